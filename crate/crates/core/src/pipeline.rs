//! Streaming file stages: generate, transform, analyze. Memory use is
//! independent of the stream length.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::coding::{morphism_digit, BitReader, BitWriter, TernaryReader, TernaryWriter};
use crate::entropy::ChaChaEntropy;
use crate::error::{Error, Result};
use crate::measurement::{DigitSource, GenerationRecord, PreparationSpec};
use crate::normality::{max_block_length, normality_report_from_counts, AccuracyFunction, MultiBlockCounter, NormalityReport};
use crate::predictor::{standard_predictors, PredictorEvaluation, StreamingEvaluator};
use crate::stats::{chi_square_test, ChiSquare};

/// Write `count` measured digits as a packed ternary file.
pub fn generate<W: Write>(out: W, spec: PreparationSpec, count: u64, seed: u64) -> Result<GenerationRecord> {
    let mut record = GenerationRecord::new(seed, spec);
    let mut writer = TernaryWriter::new(out, count)?;
    let mut digits = DigitSource::new(spec, ChaChaEntropy::new(seed));
    for _ in 0..count {
        let d = digits.next_digit();
        record.observe(d);
        writer.push(d)?;
    }
    writer.finish()?.flush()?;
    Ok(record)
}

/// Packed ternary in, packed bits out. Returns the number of symbols.
pub fn transform<R: Read, W: Write>(input: R, out: W) -> Result<u64> {
    let mut reader = TernaryReader::new(input)?;
    let count = reader.declared_count();
    let mut writer = BitWriter::new(out, count)?;
    while let Some(d) = reader.next_digit()? {
        writer.push(morphism_digit(d)?)?;
    }
    writer.finish()?.flush()?;
    Ok(count)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub normality: NormalityReport,
    pub chi_square: ChiSquare,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub predictors: Vec<PredictorEvaluation>,
}

/// Analyze a packed bit file in one pass. Predictors run only when a window
/// is given.
pub fn analyze<R: Read>(input: R, accuracy: AccuracyFunction, window: Option<usize>) -> Result<AnalysisReport> {
    let mut reader = BitReader::new(input)?;
    let n = reader.declared_count();
    let max_m = max_block_length(n);
    if max_m == 0 {
        return Err(Error::StringTooShort { n });
    }
    let mut counter = MultiBlockCounter::new(max_m)?;
    let predictors = if window.is_some() { standard_predictors() } else { Vec::new() };
    let w = window.unwrap_or(0);
    let mut evaluators: Vec<_> = predictors.iter().map(|p| StreamingEvaluator::new(p.as_ref(), w)).collect();
    let mut ones = 0u64;
    while let Some(b) = reader.next_bit()? {
        counter.push(b);
        ones += b as u64;
        for e in &mut evaluators {
            e.observe(b);
        }
    }
    let normality = normality_report_from_counts(n, accuracy, &counter.finish())?;
    let chi_square = chi_square_test(&[n - ones, ones], &[0.5, 0.5])?;
    Ok(AnalysisReport {
        normality,
        chi_square,
        predictors: evaluators.into_iter().map(StreamingEvaluator::finish).collect(),
    })
}
