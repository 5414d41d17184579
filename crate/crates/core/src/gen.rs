//! Seeded instance families.
//!
//! The generator is SplitMix64 so that ports in other languages reproduce
//! the same instances from the same seed:
//!
//! * Bernoulli(p): `(next >> 11) * 2^-53 < p`
//! * uniform integer in `[lo, hi]`: `lo + next % (hi - lo + 1)`
//!
//! Rows are filled agent by agent, good by good.

use num_rational::BigRational;

use crate::identical::gen_tight_example;
use crate::io::{GeneratorInfo, InstanceDocument, UtilityMode};
use crate::model::{ConcaveProfile, Instance};

pub const ALGORITHM: &str = "splitmix64";

#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform in `[lo, hi]` (modulo reduction).
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi);
        let span = hi - lo;
        if span == u64::MAX {
            return self.next_u64();
        }
        lo + self.next_u64() % (span + 1)
    }

    pub fn index(&mut self, lo: usize, hi: usize) -> usize {
        self.range_inclusive(lo as u64, hi as u64) as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    RandomBinary,
    RandomIdentical,
    TightEfx,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::RandomBinary => "random-binary",
            Family::RandomIdentical => "random-identical",
            Family::TightEfx => "tight-efx",
        }
    }
}

/// `v_{i,j} ~ Bernoulli(density)`.
pub fn random_binary(n: usize, m: usize, density: f64, seed: u64) -> InstanceDocument {
    let mut rng = SplitMix64::new(seed);
    let rows = (0..n)
        .map(|_| (0..m).map(|_| u64::from(rng.bernoulli(density))).collect())
        .collect();
    InstanceDocument {
        instance: Instance::new(rows).expect("n, m >= 1"),
        utility: UtilityMode::Additive,
        generator: Some(GeneratorInfo {
            algorithm: ALGORITHM.into(),
            family: Family::RandomBinary.name().into(),
            seed,
            density: Some(density),
            max_value: None,
        }),
    }
}

/// Shared good values uniform in `[1, max_value]`.
pub fn random_identical(n: usize, m: usize, max_value: u64, seed: u64) -> InstanceDocument {
    let mut rng = SplitMix64::new(seed);
    let row: Vec<u64> = (0..m).map(|_| rng.range_inclusive(1, max_value)).collect();
    InstanceDocument {
        instance: Instance::new(vec![row; n]).expect("n, m >= 1"),
        utility: UtilityMode::Additive,
        generator: Some(GeneratorInfo {
            algorithm: ALGORITHM.into(),
            family: Family::RandomIdentical.name().into(),
            seed,
            density: None,
            max_value: Some(max_value),
        }),
    }
}

pub fn tight_efx(m: usize) -> Option<InstanceDocument> {
    let instance = gen_tight_example(m).ok()?;
    Some(InstanceDocument {
        instance,
        utility: UtilityMode::Additive,
        generator: Some(GeneratorInfo {
            algorithm: "closed-form".into(),
            family: Family::TightEfx.name().into(),
            seed: 0,
            density: None,
            max_value: None,
        }),
    })
}

/// Caps uniform in `[lo, hi]`, one per agent.
pub fn random_caps(rng: &mut SplitMix64, n: usize, lo: u64, hi: u64) -> Vec<u64> {
    (0..n).map(|_| rng.range_inclusive(lo, hi)).collect()
}

/// A random valid concave profile: `f(1)` in `[1, 4]`, then increments that
/// never grow, each the previous one times a random factor in `{0, 1/4, …, 1}`
/// (rounded through small rationals).
pub fn random_concave_profile(rng: &mut SplitMix64, n: usize, m: usize) -> ConcaveProfile {
    let tables = (0..n)
        .map(|_| {
            let mut table = vec![BigRational::from_integer(0.into())];
            let mut step = BigRational::from_integer(rng.range_inclusive(1, 4).into());
            let mut acc = step.clone();
            table.push(acc.clone());
            for _ in 2..=m {
                let shrink = BigRational::new(rng.range_inclusive(0, 4).into(), 4.into());
                step *= shrink;
                acc += &step;
                table.push(acc.clone());
            }
            table
        })
        .collect();
    ConcaveProfile::new(tables).expect("construction is concave and nondecreasing")
}
