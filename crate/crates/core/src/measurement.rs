//! The preparation, measurement, reset loop.
//!
//! A spin-1 state is prepared, measured in the S_x eigenbasis and the
//! detector that fires is recorded as a ternary digit:
//!
//! | S_x outcome | digit |
//! |-------------|-------|
//! | +1          | 0     |
//! | 0           | 1     |
//! | -1          | 2     |
//!
//! Outcomes are drawn from the Born distribution with a classical
//! [`EntropySource`]. The simulation reproduces the outcome statistics of the
//! device; it does not reproduce value indefiniteness, which is a property
//! of the physical measurement and the reason the device is certified.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coding::TernaryStream;
use crate::entropy::EntropySource;
use crate::error::{Error, Result};
use crate::spin::{born_probabilities, eigensystem_sx_analytic, superposition_state, StateVector};

/// Tolerance on `sum p = 1` for an outcome distribution.
pub const DISTRIBUTION_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PreparationSpec {
    /// `|1>`
    #[serde(rename = "plus1")]
    PlusOne,
    /// `|-1>`
    #[serde(rename = "minus1")]
    MinusOne,
    /// `(|+> - |->)/sqrt2`
    #[serde(rename = "superposition")]
    Superposition,
    /// `|0>`, the S_z = 0 preparation of the earlier two-outcome design.
    #[serde(rename = "legacy")]
    LegacySzZero,
}

impl PreparationSpec {
    pub const ALL: [PreparationSpec; 4] = [
        PreparationSpec::PlusOne,
        PreparationSpec::MinusOne,
        PreparationSpec::Superposition,
        PreparationSpec::LegacySzZero,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PreparationSpec::PlusOne => "plus1",
            PreparationSpec::MinusOne => "minus1",
            PreparationSpec::Superposition => "superposition",
            PreparationSpec::LegacySzZero => "legacy",
        }
    }
}

impl fmt::Display for PreparationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PreparationSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PreparationSpec::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown preparation {s:?} (expected plus1, minus1, superposition or legacy)"
                ))
            })
    }
}

pub fn prepare(spec: PreparationSpec) -> StateVector {
    match spec {
        PreparationSpec::PlusOne => StateVector::up(),
        PreparationSpec::MinusOne => StateVector::down(),
        PreparationSpec::Superposition => superposition_state(),
        PreparationSpec::LegacySzZero => StateVector::zero(),
    }
}

/// Probabilities indexed by digit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    p: [f64; 3],
}

impl OutcomeDistribution {
    pub fn new(p: [f64; 3]) -> Result<Self> {
        if p.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("{p:?} has a negative or non-finite entry")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > DISTRIBUTION_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("{p:?} sums to {sum}")));
        }
        Ok(Self { p })
    }

    pub fn probabilities(&self) -> [f64; 3] {
        self.p
    }

    pub fn probability(&self, digit: u8) -> f64 {
        self.p[digit as usize]
    }
}

pub fn outcome_distribution(spec: PreparationSpec) -> OutcomeDistribution {
    let p = born_probabilities(&prepare(spec), &eigensystem_sx_analytic())
        .expect("prepared states are normalized");
    OutcomeDistribution::new(p).expect("Born probabilities in an orthonormal basis sum to one")
}

/// Inverse-CDF sampling over `[0, p0)`, `[p0, p0 + p1)`, `[p0 + p1, 1)`,
/// consuming exactly one uniform draw.
///
/// A draw that lands past the accumulated mass through rounding goes to the
/// last digit with non-zero probability, so zero-probability digits are
/// never produced.
pub fn sample_digit<E: EntropySource + ?Sized>(dist: &OutcomeDistribution, entropy: &mut E) -> u8 {
    let u = entropy.next_uniform();
    let mut cumulative = 0.0;
    let mut fallback = 0u8;
    for (digit, &p) in dist.p.iter().enumerate() {
        if p > 0.0 {
            fallback = digit as u8;
            cumulative += p;
            if u < cumulative {
                return digit as u8;
            }
        }
    }
    fallback
}

/// Endless digit stream for one preparation.
pub struct DigitSource<E: EntropySource> {
    dist: OutcomeDistribution,
    entropy: E,
}

impl<E: EntropySource> DigitSource<E> {
    pub fn new(spec: PreparationSpec, entropy: E) -> Self {
        Self {
            dist: outcome_distribution(spec),
            entropy,
        }
    }

    pub fn next_digit(&mut self) -> u8 {
        sample_digit(&self.dist, &mut self.entropy)
    }

    pub fn into_entropy(self) -> E {
        self.entropy
    }
}

impl<E: EntropySource> Iterator for DigitSource<E> {
    type Item = u8;
    fn next(&mut self) -> Option<u8> {
        Some(self.next_digit())
    }
}

/// Provenance for a generated stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub seed: u64,
    pub preparation: PreparationSpec,
    pub count: u64,
    pub tallies: [u64; 3],
    /// Always `"classical-simulation"` for streams produced here.
    #[serde(default = "simulated_source")]
    pub source: String,
}

fn simulated_source() -> String {
    "classical-simulation".to_string()
}

impl GenerationRecord {
    pub fn new(seed: u64, preparation: PreparationSpec) -> Self {
        Self {
            seed,
            preparation,
            count: 0,
            tallies: [0; 3],
            source: simulated_source(),
        }
    }

    pub fn observe(&mut self, digit: u8) {
        self.tallies[digit as usize] += 1;
        self.count += 1;
    }
}

/// `n` i.i.d. digits for `spec`, with their record.
pub fn generate_ternary<E: EntropySource + ?Sized>(
    spec: PreparationSpec,
    n: usize,
    entropy: &mut E,
) -> (TernaryStream, GenerationRecord) {
    let dist = outcome_distribution(spec);
    let mut record = GenerationRecord::new(entropy.seed(), spec);
    let digits: Vec<u8> = (0..n)
        .map(|_| {
            let d = sample_digit(&dist, entropy);
            record.observe(d);
            d
        })
        .collect();
    (TernaryStream::from_digits_unchecked(digits), record)
}
