//! Identical analysis battery applied to several bit sources.

use std::panic::{self, AssertUnwindSafe};
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coding::BitStream;
use crate::error::{Error, Result};
use crate::generators::{BitSource, SourceSpec};
use crate::normality::{count_symbols, normality_report, AccuracyFunction, NormalityReport};
use crate::predictor::{evaluate_predictor, standard_predictors, PredictorEvaluation};
use crate::stats::{chi_square_test, ChiSquare};

pub const DEFAULT_WINDOW: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub n: u64,
    pub seed: u64,
    pub accuracy: AccuracyFunction,
    pub window: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitAnalysis {
    pub normality: NormalityReport,
    pub chi_square: ChiSquare,
    pub predictors: Vec<PredictorEvaluation>,
}

/// Normality report, bit-frequency chi-square and the standard predictors.
pub fn analyze_bits(bits: &BitStream, accuracy: AccuracyFunction, window: usize) -> Result<BitAnalysis> {
    let normality = normality_report(bits, accuracy)?;
    let chi_square = chi_square_test(&count_symbols(bits), &[0.5, 0.5])?;
    let predictors = standard_predictors()
        .iter()
        .map(|p| evaluate_predictor(p.as_ref(), bits, window))
        .collect();
    Ok(BitAnalysis {
        normality,
        chi_square,
        predictors,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceRow {
    pub source: String,
    pub params: AnalysisParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<BitAnalysis>,
    pub throughput_bits_per_sec: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub params: AnalysisParams,
    pub rows: Vec<SourceRow>,
}

pub fn compare(sources: &[SourceSpec], params: &AnalysisParams) -> Result<ComparisonReport> {
    compare_with(sources.iter().map(|s| s.build(params.seed)).collect(), params)
}

/// Runs each source on its own thread. A failure or panic in one source
/// shows up in its row only.
pub fn compare_with(sources: Vec<Box<dyn BitSource>>, params: &AnalysisParams) -> Result<ComparisonReport> {
    if sources.is_empty() {
        return Err(Error::InvalidParameter("no sources to compare".into()));
    }
    let n = usize::try_from(params.n)
        .map_err(|_| Error::InvalidParameter(format!("n = {} exceeds address space", params.n)))?;
    let rows = thread::scope(|s| {
        let handles: Vec<_> = sources
            .into_iter()
            .map(|src| s.spawn(move || run_source(src, n, params)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("source panics are caught in run_source"))
            .collect()
    });
    Ok(ComparisonReport {
        params: params.clone(),
        rows,
    })
}

fn run_source(mut src: Box<dyn BitSource>, n: usize, params: &AnalysisParams) -> SourceRow {
    let source = src.id();
    let mut row = SourceRow {
        source,
        params: params.clone(),
        analysis: None,
        throughput_bits_per_sec: 0.0,
        error: None,
    };
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
        let start = Instant::now();
        let bits = src.generate(n);
        let elapsed = start.elapsed().as_secs_f64();
        if bits.len() != n {
            return Err(format!("source produced {} bits, expected {n}", bits.len()));
        }
        let throughput = if elapsed > 0.0 { n as f64 / elapsed } else { f64::INFINITY };
        analyze_bits(&bits, params.accuracy, params.window)
            .map(|a| (a, throughput))
            .map_err(|e| e.to_string())
    }));
    match outcome {
        Ok(Ok((analysis, throughput))) => {
            row.analysis = Some(analysis);
            row.throughput_bits_per_sec = throughput;
        }
        Ok(Err(e)) => row.error = Some(e),
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "source panicked".into());
            row.error = Some(format!("panic: {msg}"));
        }
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::PreparationSpec;

    fn params(n: u64) -> AnalysisParams {
        AnalysisParams {
            n,
            seed: 3,
            accuracy: AccuracyFunction::SqrtLog,
            window: 8,
        }
    }

    struct Broken;

    impl BitSource for Broken {
        fn id(&self) -> String {
            "broken".into()
        }
        fn generate(&mut self, _n: usize) -> BitStream {
            panic!("hardware unplugged")
        }
    }

    #[test]
    fn rows_share_parameters_and_block_range() {
        let p = params(1 << 20);
        let r = compare(&[SourceSpec::Qrng(PreparationSpec::PlusOne), SourceSpec::Lcg], &p).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert_eq!(row.params, p);
            let a = row.analysis.as_ref().unwrap();
            let ms: Vec<u32> = a.normality.per_m.iter().map(|d| d.m).collect();
            assert_eq!(ms, vec![1, 2, 3, 4]);
            assert!(row.throughput_bits_per_sec > 0.0);
        }
    }

    #[test]
    fn single_source() {
        let r = compare(&[SourceSpec::Xorshift], &params(1000)).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].source, "xorshift64");
    }

    #[test]
    fn failures_are_isolated() {
        let sources: Vec<Box<dyn BitSource>> = vec![Box::new(Broken), SourceSpec::Lcg.build(1)];
        let r = compare_with(sources, &params(4096)).unwrap();
        assert!(r.rows[0].error.as_deref().unwrap().contains("hardware unplugged"));
        assert!(r.rows[0].analysis.is_none());
        assert!(r.rows[1].error.is_none());

        let short = compare(&[SourceSpec::Lcg], &params(3)).unwrap();
        assert!(short.rows[0].error.is_some());
        assert!(compare(&[], &params(10)).is_err());
    }

    #[test]
    fn legacy_pipeline_fails_everything() {
        let r = compare(&[SourceSpec::Qrng(PreparationSpec::LegacySzZero)], &params(1 << 12)).unwrap();
        let a = r.rows[0].analysis.as_ref().unwrap();
        assert!(!a.normality.pass);
        assert!(a.chi_square.p_value < 1e-100);
        let zero = a.predictors.iter().find(|e| e.predictor == "always-zero").unwrap();
        assert_eq!(zero.k_correct_for, 1 << 12);
    }
}
