//! Simulated spin-1 quantum random number generation: state preparation and
//! measurement, the ternary-to-binary morphism, packed file formats, finite
//! Borel normality and a comparison harness.

pub mod coding;
pub mod compare;
pub mod entropy;
pub mod error;
pub mod generators;
pub mod measurement;
pub mod normality;
pub mod pipeline;
pub mod predictor;
pub mod spin;
pub mod stats;
pub mod unitary;
pub mod verify;

pub use coding::{BitStream, TernaryStream};
pub use compare::{AnalysisParams, ComparisonReport};
pub use entropy::{ChaChaEntropy, EntropySource};
pub use error::{Error, Result};
pub use generators::{BitSource, SourceSpec};
pub use measurement::{GenerationRecord, OutcomeDistribution, PreparationSpec};
pub use normality::{AccuracyFunction, NormalityReport};
pub use pipeline::AnalysisReport;
pub use predictor::{Prediction, Predictor, PredictorEvaluation};
pub use spin::{Operator, StateVector, C64};
pub use stats::ChiSquare;
pub use unitary::{BeamSplitterLayer, DecompositionPlan};
