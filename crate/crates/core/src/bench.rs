//! Benchmark sweeps comparing the solvers against the exhaustive oracle.

use std::fmt::Write as _;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::binary::{initial_allocation, solve_binary};
use crate::error::{OracleError, SolveError};
use crate::gen::{random_binary, random_caps, random_concave_profile, random_identical, SplitMix64};
use crate::identical::{
    gen_tight_example, ratio_threshold, solve_identical, tight_balanced_allocation,
    tight_designated_allocation,
};
use crate::io::format_rational;
use crate::model::{ConcaveProfile, Instance};
use crate::oracle::{assignment_count, brute_force, DEFAULT_BUDGET};
use crate::welfare::{check_efx, nsw, NswValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    IdenticalRatio,
    BinaryExact,
    ConcaveExact,
    TightnessSweep,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identical-ratio" => Ok(Suite::IdenticalRatio),
            "binary-exact" => Ok(Suite::BinaryExact),
            "concave-exact" => Ok(Suite::ConcaveExact),
            "tightness-sweep" => Ok(Suite::TightnessSweep),
            other => Err(format!("unknown suite {other:?}")),
        }
    }
}

/// Binary densities cycled through by instance id.
///
/// Random sweeps draw `n` first and then `m ≥ n` (when the range allows),
/// so that the optimum gives every agent something.
pub const DENSITIES: [f64; 3] = [0.3, 0.6, 1.0];

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub suite: Suite,
    pub count: usize,
    pub seed: u64,
    pub n_min: usize,
    pub n_max: usize,
    pub m_min: usize,
    pub m_max: usize,
    pub max_value: u64,
    pub budget: u64,
}

impl BenchConfig {
    /// Size ranges that fit the default oracle budget for each suite.
    pub fn defaults(suite: Suite) -> Self {
        let (n_max, m_max) = match suite {
            Suite::IdenticalRatio => (4, 9),
            Suite::BinaryExact => (4, 8),
            Suite::ConcaveExact => (3, 7),
            Suite::TightnessSweep => (2, 200),
        };
        Self {
            suite,
            count: 100,
            seed: 1,
            n_min: 2,
            n_max,
            m_min: if suite == Suite::TightnessSweep { 4 } else { 2 },
            m_max,
            max_value: 20,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid bench parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// One CSV row. The summary row of `identical-ratio` leaves the
/// per-instance fields empty.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub instance_id: String,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub algo: String,
    pub nsw_algo: Option<f64>,
    pub nsw_opt: Option<f64>,
    pub ratio: f64,
    pub exact_ratio_ok: bool,
    pub efx_ok: bool,
    pub iterations: Option<usize>,
    pub algo_value: Option<NswValue>,
    pub opt_value: Option<NswValue>,
}

pub const CSV_HEADER: &str = "instance_id,n,m,seed,algo,nsw_algo,nsw_opt,ratio,exact_ratio_ok,efx_ok,iterations,algo_zeros,algo_product,opt_zeros,opt_product";

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        let parts = |v: &Option<NswValue>| match v {
            Some(v) => (v.zero_count().to_string(), format_rational(v.positive_product())),
            None => (String::new(), String::new()),
        };
        let (az, ap) = parts(&self.algo_value);
        let (oz, op) = parts(&self.opt_value);
        [
            self.instance_id.clone(),
            opt(&self.n),
            opt(&self.m),
            opt(&self.seed),
            self.algo.clone(),
            opt(&self.nsw_algo),
            opt(&self.nsw_opt),
            self.ratio.to_string(),
            self.exact_ratio_ok.to_string(),
            self.efx_ok.to_string(),
            opt(&self.iterations),
            az,
            ap,
            oz,
            op,
        ]
        .join(",")
    }
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.to_csv());
    }
    out
}

/// Geometric-mean ratio of two positive welfare values.
pub fn float_ratio(algo: &NswValue, opt: &NswValue) -> f64 {
    match (algo.ln_nsw(), opt.ln_nsw()) {
        (Some(a), Some(o)) => (a - o).exp(),
        _ => 0.0,
    }
}

/// `product(algo) ≥ product(opt) · r^n` with `r` = [`ratio_threshold`].
pub fn meets_ratio_threshold(algo: &NswValue, opt: &NswValue) -> bool {
    if algo.zero_count() > opt.zero_count() {
        return false;
    }
    if algo.zero_count() < opt.zero_count() {
        return true;
    }
    let r: BigRational = Pow::pow(ratio_threshold(), algo.num_agents() as u32);
    algo.positive_product() >= &(opt.positive_product() * r)
}

pub fn run(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    if cfg.n_min == 0 || cfg.n_min > cfg.n_max || cfg.m_min == 0 || cfg.m_min > cfg.m_max {
        return Err(BenchError::Params("empty size range".into()));
    }
    if cfg.suite != Suite::TightnessSweep {
        // largest instance must fit the oracle
        let probe = Instance::new(vec![vec![0; cfg.m_max]; cfg.n_max]).expect("non-empty");
        assignment_count(&probe, cfg.budget)?;
    }
    match cfg.suite {
        Suite::IdenticalRatio => identical_ratio(cfg),
        Suite::BinaryExact => binary_exact(cfg, false),
        Suite::ConcaveExact => binary_exact(cfg, true),
        Suite::TightnessSweep => tightness_sweep(cfg),
    }
}

fn identical_ratio(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    if cfg.max_value == 0 {
        return Err(BenchError::Params("max value must be positive".into()));
    }
    let mut master = SplitMix64::new(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.count + 1);
    for id in 0..cfg.count {
        let n = master.index(cfg.n_min, cfg.n_max);
        let m = master.index(cfg.m_min.max(n).min(cfg.m_max), cfg.m_max);
        let seed = master.next_u64();
        let inst = random_identical(n, m, cfg.max_value, seed).instance;
        let alloc = solve_identical(&inst)?;
        let algo = nsw(&inst, &alloc);
        let best = brute_force(&inst, None, cfg.budget)?.value;
        rows.push(BenchRow {
            instance_id: id.to_string(),
            n: Some(n),
            m: Some(m),
            seed: Some(seed),
            algo: "identical".into(),
            nsw_algo: Some(algo.to_f64()),
            nsw_opt: Some(best.to_f64()),
            ratio: float_ratio(&algo, &best),
            exact_ratio_ok: meets_ratio_threshold(&algo, &best),
            efx_ok: check_efx(&inst, &alloc).passed(),
            iterations: None,
            algo_value: Some(algo),
            opt_value: Some(best),
        });
    }
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let summary = BenchRow {
        instance_id: "summary".into(),
        n: None,
        m: None,
        seed: None,
        algo: "identical-min".into(),
        nsw_algo: None,
        nsw_opt: None,
        ratio: if rows.is_empty() { 1.0 } else { min_ratio },
        exact_ratio_ok: rows.iter().all(|r| r.exact_ratio_ok),
        efx_ok: rows.iter().all(|r| r.efx_ok),
        iterations: None,
        algo_value: None,
        opt_value: None,
    };
    rows.push(summary);
    Ok(rows)
}

const MAX_DRAWS: usize = 10_000;

fn binary_exact(cfg: &BenchConfig, concave: bool) -> Result<Vec<BenchRow>, BenchError> {
    let mut master = SplitMix64::new(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.count);
    for id in 0..cfg.count {
        let density = DENSITIES[id % DENSITIES.len()];
        let mut draws = 0;
        let (inst, n, m, seed) = loop {
            draws += 1;
            if draws > MAX_DRAWS {
                return Err(BenchError::Params(format!(
                    "no feasible instance after {MAX_DRAWS} draws"
                )));
            }
            let n = master.index(cfg.n_min, cfg.n_max);
            let m = master.index(cfg.m_min.max(n).min(cfg.m_max), cfg.m_max);
            let seed = master.next_u64();
            let inst = random_binary(n, m, density, seed).instance;
            if initial_allocation(&inst).is_ok() {
                break (inst, n, m, seed);
            }
        };
        let (profile, algo_name) = if concave {
            let mut rng = SplitMix64::new(!seed);
            if id % 2 == 0 {
                let caps = random_caps(&mut rng, n, 1, 3);
                (Some(ConcaveProfile::from_caps(&caps, m).map_err(SolveError::from)?), "binary-caps")
            } else {
                (Some(random_concave_profile(&mut rng, n, m)), "binary-concave")
            }
        } else {
            (None, "binary")
        };
        let out = solve_binary(&inst, None, profile.as_ref())?;
        let best = brute_force(&inst, profile.as_ref(), cfg.budget)?.value;
        let ratio = if out.value == best { 1.0 } else { float_ratio(&out.value, &best) };
        rows.push(BenchRow {
            instance_id: id.to_string(),
            n: Some(n),
            m: Some(m),
            seed: Some(seed),
            algo: algo_name.into(),
            nsw_algo: Some(out.value.to_f64()),
            nsw_opt: Some(best.to_f64()),
            ratio,
            exact_ratio_ok: out.value == best,
            efx_ok: check_efx(&inst, &out.allocation).passed(),
            iterations: Some(out.iterations()),
            algo_value: Some(out.value),
            opt_value: Some(best),
        });
    }
    Ok(rows)
}

fn tightness_sweep(cfg: &BenchConfig) -> Result<Vec<BenchRow>, BenchError> {
    let start = cfg.m_min.max(4);
    let start = start + start % 2;
    let eight_ninths = BigRational::new(8.into(), 9.into());
    let mut rows = Vec::new();
    for (id, m) in (start..=cfg.m_max).step_by(2).enumerate() {
        let inst = gen_tight_example(m)?;
        let efx = tight_designated_allocation(m);
        let algo = nsw(&inst, &efx);
        let best = match brute_force(&inst, None, cfg.budget) {
            Ok(r) => r.value,
            Err(OracleError::BudgetExceeded { .. }) => nsw(&inst, &tight_balanced_allocation(m)),
            Err(e) => return Err(e.into()),
        };
        let squared = algo.positive_product() / best.positive_product();
        rows.push(BenchRow {
            instance_id: id.to_string(),
            n: Some(2),
            m: Some(m),
            seed: Some(0),
            algo: "efx-designated".into(),
            nsw_algo: Some(algo.to_f64()),
            nsw_opt: Some(best.to_f64()),
            ratio: float_ratio(&algo, &best),
            exact_ratio_ok: squared == eight_ninths && squared < BigRational::one(),
            efx_ok: check_efx(&inst, &efx).passed(),
            iterations: None,
            algo_value: Some(algo),
            opt_value: Some(best),
        });
    }
    Ok(rows)
}
