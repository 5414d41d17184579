//! Exact Nash social welfare and envy checks.
//!
//! Welfare is never compared through the geometric-mean root. An
//! [`NswValue`] keeps the number of agents with zero utility and the exact
//! product of the remaining utilities; the root is only produced for reports.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{AgentCountMismatch, ModelError};
use crate::model::{AgentId, Allocation, ConcaveProfile, GoodId, Instance};

/// Nash social welfare of an allocation, kept exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NswValue {
    zero_count: usize,
    positive_product: BigRational,
    num_agents: usize,
}

impl NswValue {
    /// Builds the value from per-agent utilities. Negative utilities are a
    /// caller bug.
    pub fn from_utilities<I>(utilities: I) -> Self
    where
        I: IntoIterator<Item = BigRational>,
    {
        let mut zero_count = 0;
        let mut num_agents = 0;
        let mut product = BigRational::one();
        for u in utilities {
            debug_assert!(!u.is_negative());
            num_agents += 1;
            if u.is_zero() {
                zero_count += 1;
            } else {
                product *= u;
            }
        }
        Self {
            zero_count,
            positive_product: product,
            num_agents,
        }
    }

    pub fn from_integer_utilities<I>(utilities: I) -> Self
    where
        I: IntoIterator<Item = u128>,
    {
        let mut zero_count = 0;
        let mut num_agents = 0;
        let mut product = BigUint::one();
        for u in utilities {
            num_agents += 1;
            if u == 0 {
                zero_count += 1;
            } else {
                product *= BigUint::from(u);
            }
        }
        Self {
            zero_count,
            positive_product: BigRational::from_integer(BigInt::from(product)),
            num_agents,
        }
    }

    /// Assembles a value from its parts. `positive_product` must be positive.
    pub fn from_parts(zero_count: usize, positive_product: BigRational, num_agents: usize) -> Self {
        assert!(positive_product.is_positive(), "product of positive factors");
        assert!(zero_count <= num_agents);
        Self {
            zero_count,
            positive_product,
            num_agents,
        }
    }

    pub fn zero_count(&self) -> usize {
        self.zero_count
    }

    pub fn positive_product(&self) -> &BigRational {
        &self.positive_product
    }

    pub fn num_agents(&self) -> usize {
        self.num_agents
    }

    pub fn is_positive(&self) -> bool {
        self.zero_count == 0
    }

    /// `ln` of the geometric mean, or `None` when some agent has zero utility.
    pub fn ln_nsw(&self) -> Option<f64> {
        if self.zero_count > 0 || self.num_agents == 0 {
            return None;
        }
        Some(ln_rational(&self.positive_product) / self.num_agents as f64)
    }

    /// Floating geometric mean for reporting; 0.0 if any factor is zero.
    pub fn to_f64(&self) -> f64 {
        let Some(ln) = self.ln_nsw() else { return 0.0 };
        let n = self.num_agents as i32;
        match self.positive_product.to_f64() {
            // direct root with one Newton step, so perfect powers come out exact
            Some(p) if p.is_normal() => {
                let x = p.powf(1.0 / f64::from(n));
                x - (x.powi(n) - p) / (f64::from(n) * x.powi(n - 1))
            }
            _ => ln.exp(),
        }
    }

    /// Exact comparison. Errors when the agent counts differ.
    pub fn compare(&self, other: &Self) -> Result<Ordering, AgentCountMismatch> {
        compare(self, other)
    }
}

/// Values are ordered first by agent count (so the order is total), then by
/// fewer zero factors, then by the exact product.
impl Ord for NswValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.num_agents
            .cmp(&other.num_agents)
            .then_with(|| other.zero_count.cmp(&self.zero_count))
            .then_with(|| self.positive_product.cmp(&other.positive_product))
    }
}

impl PartialOrd for NswValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NswValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "NSW = {} (product = {}/{}, zeros = {}, n = {})",
            self.to_f64(),
            self.positive_product.numer(),
            self.positive_product.denom(),
            self.zero_count,
            self.num_agents
        )
    }
}

pub fn compare(a: &NswValue, b: &NswValue) -> Result<Ordering, AgentCountMismatch> {
    if a.num_agents != b.num_agents {
        return Err(AgentCountMismatch {
            left: a.num_agents,
            right: b.num_agents,
        });
    }
    Ok(a.cmp(b))
}

/// Natural log of a positive big integer without overflowing `f64`.
pub(crate) fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let head: BigInt = x >> shift;
    head.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn ln_rational(x: &BigRational) -> f64 {
    ln_big(x.numer()) - ln_big(x.denom())
}

/// Additive utility of each agent for its bundle.
pub fn bundle_values(inst: &Instance, alloc: &Allocation) -> Vec<u128> {
    (0..inst.num_agents())
        .map(|i| inst.bundle_value(i, alloc.bundle(i)))
        .collect()
}

/// Count of positively valued goods each agent holds.
pub fn valued_counts(inst: &Instance, alloc: &Allocation) -> Vec<usize> {
    (0..inst.num_agents())
        .map(|i| alloc.valued_count(inst, i))
        .collect()
}

/// Nash social welfare under additive valuations.
pub fn nsw(inst: &Instance, alloc: &Allocation) -> NswValue {
    NswValue::from_integer_utilities(bundle_values(inst, alloc))
}

/// Nash social welfare when agent `i`'s utility is `f_i(|A_i ∩ Γ_i|)`.
pub fn nsw_concave(
    inst: &Instance,
    profile: &ConcaveProfile,
    alloc: &Allocation,
) -> Result<NswValue, ModelError> {
    profile.check_fits(inst)?;
    Ok(NswValue::from_utilities(
        valued_counts(inst, alloc)
            .into_iter()
            .enumerate()
            .map(|(i, k)| profile.utility(i, k).clone()),
    ))
}

/// Welfare under an optional cardinality profile.
pub fn evaluate(
    inst: &Instance,
    profile: Option<&ConcaveProfile>,
    alloc: &Allocation,
) -> Result<NswValue, ModelError> {
    match profile {
        Some(p) => nsw_concave(inst, p, alloc),
        None => Ok(nsw(inst, alloc)),
    }
}

/// A concrete envy violation. Without `dropped_good` it witnesses a failure
/// of envy-freeness; with it, a failure of EFx.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnvyWitness {
    pub envier: AgentId,
    pub envied: AgentId,
    pub dropped_good: Option<GoodId>,
}

impl fmt::Display for EnvyWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent {} envies agent {}", self.envier + 1, self.envied + 1)?;
        if let Some(j) = self.dropped_good {
            write!(f, " even without good {}", j + 1)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvyCheck {
    Pass,
    Violation(EnvyWitness),
}

impl EnvyCheck {
    pub fn passed(&self) -> bool {
        matches!(self, EnvyCheck::Pass)
    }

    pub fn witness(&self) -> Option<EnvyWitness> {
        match self {
            EnvyCheck::Pass => None,
            EnvyCheck::Violation(w) => Some(*w),
        }
    }
}

/// Envy-freeness: every agent values its own bundle at least as much as any
/// other bundle. Reports the first violating pair in (envier, envied) order.
pub fn check_ef(inst: &Instance, alloc: &Allocation) -> EnvyCheck {
    let n = inst.num_agents();
    for i in 0..n {
        let own = inst.bundle_value(i, alloc.bundle(i));
        for k in (0..n).filter(|&k| k != i) {
            if own < inst.bundle_value(i, alloc.bundle(k)) {
                return EnvyCheck::Violation(EnvyWitness {
                    envier: i,
                    envied: k,
                    dropped_good: None,
                });
            }
        }
    }
    EnvyCheck::Pass
}

/// Envy-freeness up to any positively valued good: for all agents `i ≠ k`
/// and every `j ∈ A_k` with `v_{i,j} > 0`, `v_i(A_i) ≥ v_i(A_k \ {j})`.
///
/// The first witness in (envier, envied, good) order is returned.
pub fn check_efx(inst: &Instance, alloc: &Allocation) -> EnvyCheck {
    let n = inst.num_agents();
    for i in 0..n {
        let own = inst.bundle_value(i, alloc.bundle(i));
        for k in (0..n).filter(|&k| k != i) {
            let theirs = inst.bundle_value(i, alloc.bundle(k));
            if theirs <= own {
                continue;
            }
            let dropped = alloc.bundle(k).iter().copied().find(|&j| {
                let v = u128::from(inst.value(i, j));
                v > 0 && own < theirs - v
            });
            if let Some(j) = dropped {
                return EnvyCheck::Violation(EnvyWitness {
                    envier: i,
                    envied: k,
                    dropped_good: Some(j),
                });
            }
        }
    }
    EnvyCheck::Pass
}
