//! Exhaustive ground truth: enumerate every good → agent assignment.

use std::cmp::Ordering;

use num_bigint::BigUint;

use crate::error::OracleError;
use crate::model::{Allocation, ConcaveProfile, Instance};
use crate::welfare::{evaluate, NswValue};

/// Default cap on the number of enumerated assignments.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub best: Allocation,
    pub value: NswValue,
    pub explored: u64,
}

/// `n^m`, or an error if it exceeds `budget`.
pub fn assignment_count(inst: &Instance, budget: u64) -> Result<u64, OracleError> {
    let n = inst.num_agents() as u64;
    let mut total: u64 = 1;
    for _ in 0..inst.num_goods() {
        match total.checked_mul(n) {
            Some(t) if t <= budget => total = t,
            _ => {
                let required = BigUint::from(n).pow(inst.num_goods() as u32);
                return Err(OracleError::BudgetExceeded {
                    required: required.to_string(),
                    budget,
                });
            }
        }
    }
    Ok(total)
}

/// Base-`n` counter over owner vectors, last good fastest. Visits owner
/// vectors in lexicographic order.
struct Assignments {
    owner: Vec<usize>,
    n: usize,
    started: bool,
}

impl Assignments {
    fn new(n: usize, m: usize) -> Self {
        Self {
            owner: vec![0; m],
            n,
            started: false,
        }
    }

    /// Advances to the next vector, calling `moved(good, from, to)` for each
    /// changed position. Returns `false` once exhausted.
    fn advance(&mut self, mut moved: impl FnMut(usize, usize, usize)) -> bool {
        if !self.started {
            self.started = true;
            return true;
        }
        for pos in (0..self.owner.len()).rev() {
            let from = self.owner[pos];
            if from + 1 < self.n {
                self.owner[pos] = from + 1;
                moved(pos, from, from + 1);
                return true;
            }
            self.owner[pos] = 0;
            moved(pos, from, 0);
        }
        false
    }
}

/// Product of bundle sums: `(zeros, product)`; product in `u128` when it fits.
fn score(sums: &[u128]) -> (usize, Result<u128, BigUint>) {
    let mut zeros = 0;
    let mut acc: Result<u128, BigUint> = Ok(1);
    for &s in sums {
        if s == 0 {
            zeros += 1;
            continue;
        }
        acc = match acc {
            Ok(p) => p.checked_mul(s).ok_or_else(|| BigUint::from(p) * BigUint::from(s)),
            Err(big) => Err(big * BigUint::from(s)),
        };
    }
    (zeros, acc)
}

fn cmp_scores(a: &(usize, Result<u128, BigUint>), b: &(usize, Result<u128, BigUint>)) -> Ordering {
    b.0.cmp(&a.0).then_with(|| match (&a.1, &b.1) {
        (Ok(x), Ok(y)) => x.cmp(y),
        (x, y) => {
            let big = |r: &Result<u128, BigUint>| match r {
                Ok(v) => BigUint::from(*v),
                Err(v) => v.clone(),
            };
            big(x).cmp(&big(y))
        }
    })
}

/// Nash-optimal allocation by exhaustive search. Among maximizers the
/// lexicographically smallest owner vector is returned.
pub fn brute_force(
    inst: &Instance,
    profile: Option<&ConcaveProfile>,
    budget: u64,
) -> Result<OracleResult, OracleError> {
    assignment_count(inst, budget)?;
    if let Some(p) = profile {
        p.check_fits(inst)?;
    }
    let n = inst.num_agents();
    let m = inst.num_goods();
    let mut it = Assignments::new(n, m);
    let mut explored = 0u64;
    let mut best_owner = vec![0; m];

    match profile {
        None => {
            let mut sums = vec![0u128; n];
            sums[0] = (0..m).map(|j| u128::from(inst.value(0, j))).sum();
            let mut best: Option<(usize, Result<u128, BigUint>)> = None;
            while it.advance(|j, from, to| {
                sums[from] -= u128::from(inst.value(from, j));
                sums[to] += u128::from(inst.value(to, j));
            }) {
                explored += 1;
                let s = score(&sums);
                if best.as_ref().is_none_or(|b| cmp_scores(&s, b) == Ordering::Greater) {
                    best = Some(s);
                    best_owner.copy_from_slice(&it.owner);
                }
            }
        }
        Some(p) => {
            let mut counts = vec![0usize; n];
            counts[0] = inst.desire_set(0).len();
            let mut best: Option<NswValue> = None;
            while it.advance(|j, from, to| {
                counts[from] -= usize::from(inst.desires(from, j));
                counts[to] += usize::from(inst.desires(to, j));
            }) {
                explored += 1;
                let v = NswValue::from_utilities(
                    counts.iter().enumerate().map(|(i, &k)| p.utility(i, k).clone()),
                );
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                    best_owner.copy_from_slice(&it.owner);
                }
            }
        }
    }

    let best = Allocation::from_owner(n, best_owner)?;
    let value = evaluate(inst, profile, &best)?;
    Ok(OracleResult {
        best,
        value,
        explored,
    })
}

/// Welfare of every assignment, in enumeration order.
pub fn enumerate_nsw_distribution(
    inst: &Instance,
    profile: Option<&ConcaveProfile>,
    budget: u64,
) -> Result<Vec<NswValue>, OracleError> {
    let total = assignment_count(inst, budget)?;
    let mut out = Vec::with_capacity(total as usize);
    let mut it = Assignments::new(inst.num_agents(), inst.num_goods());
    while it.advance(|_, _, _| {}) {
        let alloc = Allocation::from_owner(inst.num_agents(), it.owner.clone())?;
        out.push(evaluate(inst, profile, &alloc)?);
    }
    Ok(out)
}
