//! Greedy allocation for identical additive valuations.
//!
//! Goods are handed out in descending order of value, each to an agent whose
//! bundle is currently worth the least. The result is EFx, and any EFx
//! allocation under identical valuations is within a factor (e ln 2)/2 of
//! the Nash optimum.

use std::cmp::Reverse;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::SolveError;
use crate::model::{AgentId, Allocation, GoodId, Instance};

/// Shared values of an identical instance, restricted to positively valued
/// goods and sorted for the greedy pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdenticalView {
    common_values: Vec<u64>,
    descending_order: Vec<GoodId>,
    zero_goods: Vec<GoodId>,
}

impl IdenticalView {
    pub fn new(inst: &Instance) -> Result<Self, SolveError> {
        if !inst.classify().is_identical {
            return Err(SolveError::NotIdentical);
        }
        let common_values = inst.row(0).to_vec();
        let (positive, zero_goods): (Vec<GoodId>, Vec<GoodId>) =
            (0..inst.num_goods()).partition(|&j| common_values[j] > 0);
        // keys are unique, so the unstable sort still breaks ties by ascending index
        let mut keyed: Vec<(Reverse<u64>, GoodId)> =
            positive.into_iter().map(|j| (Reverse(common_values[j]), j)).collect();
        keyed.sort_unstable();
        let descending_order = keyed.into_iter().map(|(_, j)| j).collect();
        Ok(Self {
            common_values,
            descending_order,
            zero_goods,
        })
    }

    pub fn value(&self, good: GoodId) -> u64 {
        self.common_values[good]
    }

    /// Positively valued goods, highest value first.
    pub fn descending_order(&self) -> &[GoodId] {
        &self.descending_order
    }

    /// Goods nobody values; placed with agent 0 after the greedy pass.
    pub fn zero_goods(&self) -> &[GoodId] {
        &self.zero_goods
    }
}

/// Greedy pass with a hook observing each placement `(good, agent)`.
pub fn solve_identical_with<F>(inst: &Instance, mut on_place: F) -> Result<Allocation, SolveError>
where
    F: FnMut(GoodId, AgentId),
{
    let view = IdenticalView::new(inst)?;
    let n = inst.num_agents();
    let mut totals = vec![0u128; n];
    let mut owner = vec![0; inst.num_goods()];
    for &good in view.descending_order() {
        // first minimum wins, i.e. lowest agent index among ties
        let mut agent = 0;
        for k in 1..n {
            if totals[k] < totals[agent] {
                agent = k;
            }
        }
        totals[agent] += u128::from(view.value(good));
        owner[good] = agent;
        on_place(good, agent);
    }
    for &good in view.zero_goods() {
        owner[good] = 0;
    }
    Ok(Allocation::from_owner(n, owner)?)
}

pub fn solve_identical(inst: &Instance) -> Result<Allocation, SolveError> {
    solve_identical_with(inst, |_, _| {})
}

/// Guaranteed lower bound on NSW(EFx allocation) / NSW(optimum) under
/// identical additive valuations: (e ln 2) / 2.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioBound {
    pub symbolic: &'static str,
    pub decimal: f64,
    /// Twenty significant digits of the constant.
    pub decimal_str: &'static str,
}

impl RatioBound {
    /// Approximation factor in the "within a factor of" convention, 1 / bound.
    pub fn factor(&self) -> f64 {
        1.0 / self.decimal
    }
}

pub fn efx_ratio_bound() -> RatioBound {
    RatioBound {
        symbolic: "(e ln 2)/2",
        decimal: std::f64::consts::E * std::f64::consts::LN_2 / 2.0,
        decimal_str: "0.94208469268186005495",
    }
}

/// Ratio threshold used by the exact product checks: `9422 / 10000`.
pub fn ratio_threshold() -> BigRational {
    BigRational::new(BigInt::from(9422), BigInt::from(10000))
}

/// The two-agent identical instance with two goods worth `m - 2` and `m - 2`
/// goods worth 1. Giving both large goods to one agent is EFx yet only
/// reaches `2√2/3` of the optimum.
pub fn gen_tight_example(m: usize) -> Result<Instance, SolveError> {
    if m < 4 || !m.is_multiple_of(2) {
        return Err(SolveError::Model(crate::error::ModelError::Malformed(format!(
            "tight example needs an even number of goods >= 4, got {m}"
        ))));
    }
    let big = (m - 2) as u64;
    let row: Vec<u64> = (0..m).map(|j| if j < 2 { big } else { 1 }).collect();
    Ok(Instance::new(vec![row.clone(), row])?)
}

/// The EFx allocation `({j1, j2}, {j3..jm})` for [`gen_tight_example`].
pub fn tight_designated_allocation(m: usize) -> Allocation {
    let owner = (0..m).map(|j| usize::from(j >= 2)).collect();
    Allocation::from_owner(2, owner).expect("two agents")
}

/// An optimal allocation for [`gen_tight_example`]: one large good and half
/// of the unit goods each.
pub fn tight_balanced_allocation(m: usize) -> Allocation {
    let half = (m - 2) / 2;
    let owner = (0..m)
        .map(|j| match j {
            0 => 0,
            1 => 1,
            _ => usize::from(j - 2 >= half),
        })
        .collect();
    Allocation::from_owner(2, owner).expect("two agents")
}
