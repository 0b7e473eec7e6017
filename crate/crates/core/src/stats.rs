//! Pearson chi-square goodness of fit.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Expected counts below this make the chi-square approximation unreliable.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

const PROBABILITY_SUM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
    /// Some category expected fewer than five observations.
    pub low_expected_count: bool,
}

/// `sum (O - E)^2 / E` against `expected` probabilities, with
/// `df = categories - 1` (categories with zero expectation and zero
/// observations are dropped).
pub fn chi_square_test(observed: &[u64], expected: &[f64]) -> Result<ChiSquare> {
    if observed.len() != expected.len() || observed.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} observed categories against {} expected",
            observed.len(),
            expected.len()
        )));
    }
    if expected.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("{expected:?}")));
    }
    let sum: f64 = expected.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
        return Err(Error::InvalidDistribution(format!("{expected:?} sums to {sum}")));
    }
    let total: u64 = observed.iter().sum();
    let n = total as f64;

    let mut statistic = 0.0;
    let mut categories = 0u32;
    let mut low_expected_count = false;
    for (category, (&o, &p)) in observed.iter().zip(expected).enumerate() {
        if p == 0.0 {
            if o > 0 {
                return Err(Error::DegenerateExpected { category, observed: o });
            }
            continue;
        }
        categories += 1;
        let e = n * p;
        if e < MIN_EXPECTED_COUNT {
            low_expected_count = true;
        }
        if e > 0.0 {
            let d = o as f64 - e;
            statistic += d * d / e;
        }
    }
    let df = categories.saturating_sub(1);
    let p_value = if df == 0 || statistic == 0.0 {
        1.0
    } else {
        ChiSquared::new(df as f64)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sf(statistic)
    };
    Ok(ChiSquare {
        statistic,
        df,
        p_value,
        low_expected_count,
    })
}
