//! Problem instances, allocations and cardinality-concave utility profiles.
//!
//! Agents and goods are 0-indexed everywhere inside the library. The
//! document layer in [`crate::io`] is the only place that speaks 1-indexed.

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::ModelError;

/// Index of an agent, `0..n`.
pub type AgentId = usize;
/// Index of a good, `0..m`.
pub type GoodId = usize;

/// A fair-division instance: `n` agents, `m` goods and an `n × m` matrix of
/// non-negative integer values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    num_goods: usize,
    values: Vec<Vec<u64>>,
    desired: Vec<Vec<GoodId>>,
}

impl Instance {
    /// Builds an instance from its valuation rows. Every row must have the
    /// same, non-zero length and there must be at least one agent.
    pub fn new(values: Vec<Vec<u64>>) -> Result<Self, ModelError> {
        let num_goods = values.first().map(Vec::len).ok_or(ModelError::NoAgents)?;
        Self::with_dimensions(values.len(), num_goods, values)
    }

    /// Builds an instance and checks the matrix against declared dimensions.
    pub fn with_dimensions(
        num_agents: usize,
        num_goods: usize,
        values: Vec<Vec<u64>>,
    ) -> Result<Self, ModelError> {
        if num_agents == 0 {
            return Err(ModelError::NoAgents);
        }
        if num_goods == 0 {
            return Err(ModelError::NoGoods);
        }
        if values.len() != num_agents {
            return Err(ModelError::RowCount {
                expected: num_agents,
                found: values.len(),
            });
        }
        for (agent, row) in values.iter().enumerate() {
            if row.len() != num_goods {
                return Err(ModelError::RowLength {
                    agent,
                    expected: num_goods,
                    found: row.len(),
                });
            }
        }
        let desired = values
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v > 0)
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Ok(Self {
            num_goods,
            values,
            desired,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.values.len()
    }

    pub fn num_goods(&self) -> usize {
        self.num_goods
    }

    #[inline]
    pub fn value(&self, agent: AgentId, good: GoodId) -> u64 {
        self.values[agent][good]
    }

    pub fn row(&self, agent: AgentId) -> &[u64] {
        &self.values[agent]
    }

    pub fn values(&self) -> &[Vec<u64>] {
        &self.values
    }

    /// Goods the agent values positively, ascending.
    pub fn desire_set(&self, agent: AgentId) -> &[GoodId] {
        &self.desired[agent]
    }

    #[inline]
    pub fn desires(&self, agent: AgentId, good: GoodId) -> bool {
        self.values[agent][good] > 0
    }

    /// Additive value of an arbitrary set of goods for `agent`.
    pub fn bundle_value(&self, agent: AgentId, goods: &[GoodId]) -> u128 {
        goods.iter().map(|&j| u128::from(self.values[agent][j])).sum()
    }

    /// `true` if at least one agent values the good.
    pub fn is_desired_by_anyone(&self, good: GoodId) -> bool {
        self.values.iter().any(|row| row[good] > 0)
    }

    pub fn classify(&self) -> InstanceClass {
        classify(self)
    }
}

/// Structural flags of an instance's valuation matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstanceClass {
    /// Every entry is 0 or 1.
    pub is_binary: bool,
    /// All rows are equal.
    pub is_identical: bool,
}

pub fn classify(inst: &Instance) -> InstanceClass {
    let is_binary = inst.values.iter().flatten().all(|&v| v <= 1);
    let first = &inst.values[0];
    let is_identical = inst.values.iter().all(|row| row == first);
    InstanceClass {
        is_binary,
        is_identical,
    }
}

/// An `n`-partition of the goods, kept in both the bundle view and the
/// good → agent view.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Allocation {
    bundles: Vec<Vec<GoodId>>,
    owner: Vec<AgentId>,
}

impl Allocation {
    /// Builds an allocation from the good → agent map.
    pub fn from_owner(num_agents: usize, owner: Vec<AgentId>) -> Result<Self, ModelError> {
        let mut bundles = vec![Vec::new(); num_agents];
        for (good, &agent) in owner.iter().enumerate() {
            if agent >= num_agents {
                return Err(ModelError::AgentOutOfRange { good, agent });
            }
            bundles[agent].push(good);
        }
        Ok(Self { bundles, owner })
    }

    /// Builds an allocation from bundles; they must partition `0..num_goods`.
    pub fn from_bundles(num_goods: usize, bundles: Vec<Vec<GoodId>>) -> Result<Self, ModelError> {
        let mut owner = vec![usize::MAX; num_goods];
        for (agent, bundle) in bundles.iter().enumerate() {
            for &good in bundle {
                if good >= num_goods {
                    return Err(ModelError::GoodOutOfRange { good });
                }
                if owner[good] != usize::MAX {
                    return Err(ModelError::DoublyAllocated { good });
                }
                owner[good] = agent;
            }
        }
        if let Some(good) = owner.iter().position(|&a| a == usize::MAX) {
            return Err(ModelError::Unallocated { good });
        }
        let mut bundles = bundles;
        bundles.iter_mut().for_each(|b| b.sort_unstable());
        Ok(Self { bundles, owner })
    }

    /// Assembles an allocation without any consistency check. Use
    /// [`validate_allocation`] before trusting the result.
    pub fn from_raw_parts(bundles: Vec<Vec<GoodId>>, owner: Vec<AgentId>) -> Self {
        Self { bundles, owner }
    }

    /// Every good in one bundle.
    pub fn all_to(num_agents: usize, num_goods: usize, agent: AgentId) -> Self {
        Self::from_owner(num_agents, vec![agent; num_goods]).expect("agent index in range")
    }

    pub fn num_agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn num_goods(&self) -> usize {
        self.owner.len()
    }

    pub fn bundle(&self, agent: AgentId) -> &[GoodId] {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[Vec<GoodId>] {
        &self.bundles
    }

    #[inline]
    pub fn owner_of(&self, good: GoodId) -> AgentId {
        self.owner[good]
    }

    pub fn owners(&self) -> &[AgentId] {
        &self.owner
    }

    /// Moves `good` to `to`. Bundles stay sorted.
    pub(crate) fn transfer(&mut self, good: GoodId, to: AgentId) {
        let from = self.owner[good];
        if from == to {
            return;
        }
        let src = &mut self.bundles[from];
        if let Ok(pos) = src.binary_search(&good) {
            src.remove(pos);
        }
        let dst = &mut self.bundles[to];
        if let Err(pos) = dst.binary_search(&good) {
            dst.insert(pos, good);
        }
        self.owner[good] = to;
    }

    /// Number of goods in `agent`'s bundle that the agent values positively.
    pub fn valued_count(&self, inst: &Instance, agent: AgentId) -> usize {
        self.bundles[agent]
            .iter()
            .filter(|&&j| inst.desires(agent, j))
            .count()
    }

    /// Goods held by an agent that values them at zero.
    pub fn wasted_goods(&self, inst: &Instance) -> Vec<GoodId> {
        (0..self.num_goods())
            .filter(|&j| !inst.desires(self.owner[j], j))
            .collect()
    }
}

/// Checks that `alloc` is an `n`-partition of the instance's goods and that
/// its two views agree.
pub fn validate_allocation(inst: &Instance, alloc: &Allocation) -> Result<(), ModelError> {
    let n = inst.num_agents();
    let m = inst.num_goods();
    if alloc.bundles.len() != n {
        return Err(ModelError::BundleCount {
            expected: n,
            found: alloc.bundles.len(),
        });
    }
    if alloc.owner.len() != m {
        return Err(ModelError::OwnerLength {
            expected: m,
            found: alloc.owner.len(),
        });
    }
    let mut holder = vec![None; m];
    for (agent, bundle) in alloc.bundles.iter().enumerate() {
        for &good in bundle {
            if good >= m {
                return Err(ModelError::GoodOutOfRange { good });
            }
            if holder[good].replace(agent).is_some() {
                return Err(ModelError::DoublyAllocated { good });
            }
        }
    }
    for (good, held) in holder.iter().enumerate() {
        match *held {
            None => return Err(ModelError::Unallocated { good }),
            Some(agent) if alloc.owner[good] != agent => {
                return Err(ModelError::ViewMismatch { good })
            }
            Some(_) => {}
        }
    }
    Ok(())
}

/// Per-agent utility as a function of how many valued goods the agent holds:
/// `tables[i][k] = f_i(k)` for `k = 0..=m`.
///
/// Each `f_i` is zero at zero, nondecreasing, concave, and positive at one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcaveProfile {
    tables: Vec<Vec<BigRational>>,
}

impl ConcaveProfile {
    pub fn new(tables: Vec<Vec<BigRational>>) -> Result<Self, ModelError> {
        if tables.is_empty() {
            return Err(ModelError::NoAgents);
        }
        let len = tables[0].len();
        if len < 2 {
            return Err(ModelError::InvalidProfile {
                agent: 0,
                reason: "table must cover at least f(0) and f(1)".into(),
            });
        }
        for (agent, f) in tables.iter().enumerate() {
            let bad = |reason: &str| ModelError::InvalidProfile {
                agent,
                reason: reason.into(),
            };
            if f.len() != len {
                return Err(ModelError::ProfileShape {
                    agent,
                    expected: len,
                    found: f.len(),
                });
            }
            if !f[0].is_zero() {
                return Err(bad("f(0) must be 0"));
            }
            if f[1] <= BigRational::zero() {
                return Err(bad("f(1) must be positive"));
            }
            for k in 0..len - 1 {
                if f[k + 1] < f[k] {
                    return Err(bad(&format!("decreases between {} and {}", k, k + 1)));
                }
            }
            for k in 1..len - 1 {
                if &f[k + 1] - &f[k] > &f[k] - &f[k - 1] {
                    return Err(bad(&format!("not concave at {k}")));
                }
            }
        }
        Ok(Self { tables })
    }

    /// `f_i(k) = min(c_i, k)`: binary budget-additive utilities.
    pub fn from_caps(caps: &[u64], num_goods: usize) -> Result<Self, ModelError> {
        if let Some(agent) = caps.iter().position(|&c| c == 0) {
            return Err(ModelError::InvalidProfile {
                agent,
                reason: "utility cap must be positive".into(),
            });
        }
        let tables = caps
            .iter()
            .map(|&c| {
                (0..=num_goods as u64)
                    .map(|k| BigRational::from_integer(k.min(c).into()))
                    .collect()
            })
            .collect();
        Self::new(tables)
    }

    /// `f_i(k) = k` for every agent; reduces to additive binary valuations.
    pub fn linear(num_agents: usize, num_goods: usize) -> Self {
        let table: Vec<BigRational> = (0..=num_goods as u64)
            .map(|k| BigRational::from_integer(k.into()))
            .collect();
        Self {
            tables: vec![table; num_agents],
        }
    }

    pub fn num_agents(&self) -> usize {
        self.tables.len()
    }

    /// Largest cardinality covered by the tables.
    pub fn max_count(&self) -> usize {
        self.tables[0].len() - 1
    }

    #[inline]
    pub fn utility(&self, agent: AgentId, count: usize) -> &BigRational {
        &self.tables[agent][count]
    }

    pub fn tables(&self) -> &[Vec<BigRational>] {
        &self.tables
    }

    /// Checks the tables cover `inst`: one per agent, `m + 1` entries each.
    pub fn check_fits(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.num_agents() != inst.num_agents() || self.max_count() != inst.num_goods() {
            return Err(ModelError::ProfileMismatch {
                agents: self.num_agents(),
                entries: self.max_count() + 1,
                n: inst.num_agents(),
                m: inst.num_goods(),
            });
        }
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn inst(rows: &[&[u64]]) -> Instance {
        Instance::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn desire_sets_follow_matrix() {
        let i = inst(&[&[1, 1, 1], &[1, 0, 0]]);
        assert_eq!(i.desire_set(0), &[0, 1, 2]);
        assert_eq!(i.desire_set(1), &[0]);
    }

    #[test]
    fn classify_examples() {
        let c = inst(&[&[1, 0], &[1, 0]]).classify();
        assert!(c.is_binary && c.is_identical);
        let c = inst(&[&[2, 1], &[2, 1]]).classify();
        assert!(!c.is_binary && c.is_identical);
        let c = inst(&[&[1, 0], &[0, 1]]).classify();
        assert!(c.is_binary && !c.is_identical);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Instance::with_dimensions(2, 3, vec![vec![1, 1, 1], vec![1, 0]]).unwrap_err();
        assert!(matches!(err, ModelError::RowLength { agent: 1, .. }));
    }

    #[test]
    fn validate_examples() {
        let i = inst(&[&[1, 1], &[1, 1]]);
        let ok = Allocation::from_raw_parts(vec![vec![0], vec![1]], vec![0, 1]);
        assert!(validate_allocation(&i, &ok).is_ok());

        let double = Allocation::from_raw_parts(vec![vec![0, 1], vec![1]], vec![0, 1]);
        assert_eq!(
            validate_allocation(&i, &double),
            Err(ModelError::DoublyAllocated { good: 1 })
        );

        let missing = Allocation::from_raw_parts(vec![vec![0], vec![]], vec![0, 1]);
        assert_eq!(
            validate_allocation(&i, &missing),
            Err(ModelError::Unallocated { good: 1 })
        );

        let skew = Allocation::from_raw_parts(vec![vec![0], vec![1]], vec![0, 0]);
        assert_eq!(
            validate_allocation(&i, &skew),
            Err(ModelError::ViewMismatch { good: 1 })
        );
    }

    // Every (bundle list) over goods {0..m} with each good placed in 0, 1 or 2
    // bundles, for n, m <= 3: validation accepts exactly the partitions.
    #[test]
    fn validate_accepts_exactly_partitions() {
        for n in 1..=3usize {
            for m in 1..=3usize {
                let i = Instance::new(vec![vec![1; m]; n]).unwrap();
                // membership[j] is a bitmask over agents
                let masks = 1usize << n;
                let total = masks.pow(m as u32);
                for code in 0..total {
                    let mut c = code;
                    let mut bundles = vec![Vec::new(); n];
                    let mut is_partition = true;
                    let mut owner = vec![0; m];
                    for (j, slot) in owner.iter_mut().enumerate() {
                        let mask = c % masks;
                        c /= masks;
                        if mask.count_ones() != 1 {
                            is_partition = false;
                        }
                        for (a, b) in bundles.iter_mut().enumerate() {
                            if mask >> a & 1 == 1 {
                                b.push(j);
                                *slot = a;
                            }
                        }
                    }
                    let alloc = Allocation::from_raw_parts(bundles, owner);
                    assert_eq!(validate_allocation(&i, &alloc).is_ok(), is_partition);
                }
            }
        }
    }

    #[test]
    fn transfer_keeps_views_consistent() {
        let i = inst(&[&[1, 1, 1], &[1, 1, 1]]);
        let mut a = Allocation::from_owner(2, vec![0, 0, 1]).unwrap();
        a.transfer(0, 1);
        assert_eq!(a.bundle(0), &[1]);
        assert_eq!(a.bundle(1), &[0, 2]);
        validate_allocation(&i, &a).unwrap();
    }

    #[test]
    fn profile_rules() {
        let r = |v: i64| BigRational::from_integer(v.into());
        assert!(ConcaveProfile::new(vec![vec![r(0), r(2), r(3), r(3)]]).is_ok());
        assert!(ConcaveProfile::new(vec![vec![r(1), r(2)]]).is_err());
        assert!(ConcaveProfile::new(vec![vec![r(0), r(0), r(1)]]).is_err());
        assert!(ConcaveProfile::new(vec![vec![r(0), r(1), r(3)]]).is_err());
        assert!(ConcaveProfile::new(vec![vec![r(0), r(2), r(1)]]).is_err());
        let caps = ConcaveProfile::from_caps(&[2], 4).unwrap();
        let got: Vec<_> = (0..=4).map(|k| caps.utility(0, k).clone()).collect();
        assert_eq!(got, vec![r(0), r(1), r(2), r(2), r(2)]);
        assert!(ConcaveProfile::from_caps(&[0], 2).is_err());
    }
}
