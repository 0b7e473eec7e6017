//! Finite-sample predictor statistics.
//!
//! A predictor sees the `window` bits immediately preceding position `i`
//! (fewer near the start) and either guesses bit `i` or withholds. The
//! window is the passively extracted information available to it; in a
//! simulation passivity holds trivially and is not checked.
//!
//! A run is `k`-correct when it makes `k` correct predictions and no
//! incorrect one; `k_correct_for` is that `k`, or 0 once any prediction is
//! wrong.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::coding::BitStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prediction {
    Zero,
    One,
    Withheld,
}

impl Prediction {
    fn from_bit(bit: u8) -> Self {
        if bit == 1 {
            Prediction::One
        } else {
            Prediction::Zero
        }
    }
}

/// A total prediction procedure. Implementations return for every window,
/// so termination holds by construction.
pub trait Predictor: Sync {
    fn predict(&self, window: &[u8]) -> Prediction;

    fn name(&self) -> String;
}

/// Ignores its input.
#[derive(Clone, Copy, Debug)]
pub struct ConstantPredictor(pub Prediction);

impl Predictor for ConstantPredictor {
    fn predict(&self, _window: &[u8]) -> Prediction {
        self.0
    }

    fn name(&self) -> String {
        match self.0 {
            Prediction::Zero => "always-zero".into(),
            Prediction::One => "always-one".into(),
            Prediction::Withheld => "always-withheld".into(),
        }
    }
}

/// Predicts the majority bit of the window; withholds on ties.
#[derive(Clone, Copy, Debug, Default)]
pub struct MajorityPredictor;

impl Predictor for MajorityPredictor {
    fn predict(&self, window: &[u8]) -> Prediction {
        let ones = window.iter().filter(|&&b| b == 1).count();
        let zeros = window.len() - ones;
        match ones.cmp(&zeros) {
            std::cmp::Ordering::Greater => Prediction::One,
            std::cmp::Ordering::Less => Prediction::Zero,
            std::cmp::Ordering::Equal => Prediction::Withheld,
        }
    }

    fn name(&self) -> String {
        "majority".into()
    }
}

/// Predicts a repeat of the previous bit.
#[derive(Clone, Copy, Debug, Default)]
pub struct RepeatLastPredictor;

impl Predictor for RepeatLastPredictor {
    fn predict(&self, window: &[u8]) -> Prediction {
        window.last().map_or(Prediction::Withheld, |&b| Prediction::from_bit(b))
    }

    fn name(&self) -> String {
        "repeat-last".into()
    }
}

/// Built-in roster used by the analysis and comparison commands.
pub fn standard_predictors() -> Vec<Box<dyn Predictor>> {
    vec![
        Box::new(ConstantPredictor(Prediction::Zero)),
        Box::new(ConstantPredictor(Prediction::One)),
        Box::new(ConstantPredictor(Prediction::Withheld)),
        Box::new(MajorityPredictor),
        Box::new(RepeatLastPredictor),
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorEvaluation {
    pub predictor: String,
    pub window: usize,
    pub correct: u64,
    pub incorrect: u64,
    pub withheld: u64,
    pub k_correct_for: u64,
}

impl PredictorEvaluation {
    fn new(predictor: String, window: usize) -> Self {
        Self {
            predictor,
            window,
            correct: 0,
            incorrect: 0,
            withheld: 0,
            k_correct_for: 0,
        }
    }

    fn tally(&mut self, prediction: Prediction, actual: u8) {
        match prediction {
            Prediction::Withheld => self.withheld += 1,
            p if p == Prediction::from_bit(actual) => self.correct += 1,
            _ => self.incorrect += 1,
        }
        self.k_correct_for = if self.incorrect == 0 { self.correct } else { 0 };
    }

    pub fn total(&self) -> u64 {
        self.correct + self.incorrect + self.withheld
    }
}

pub fn evaluate_predictor(predictor: &dyn Predictor, bits: &BitStream, window: usize) -> PredictorEvaluation {
    let mut eval = PredictorEvaluation::new(predictor.name(), window);
    let b = bits.bits();
    for (i, &actual) in b.iter().enumerate() {
        let prediction = predictor.predict(&b[i.saturating_sub(window)..i]);
        eval.tally(prediction, actual);
    }
    eval
}

/// Incremental form of [`evaluate_predictor`] for streams read from disk.
pub struct StreamingEvaluator<'p> {
    predictor: &'p dyn Predictor,
    window: usize,
    history: VecDeque<u8>,
    eval: PredictorEvaluation,
}

impl<'p> StreamingEvaluator<'p> {
    pub fn new(predictor: &'p dyn Predictor, window: usize) -> Self {
        Self {
            predictor,
            window,
            history: VecDeque::with_capacity(window + 1),
            eval: PredictorEvaluation::new(predictor.name(), window),
        }
    }

    pub fn observe(&mut self, bit: u8) {
        let prediction = self.predictor.predict(self.history.make_contiguous());
        self.eval.tally(prediction, bit);
        if self.window > 0 {
            if self.history.len() == self.window {
                self.history.pop_front();
            }
            self.history.push_back(bit);
        }
    }

    pub fn finish(self) -> PredictorEvaluation {
        self.eval
    }
}
