//! Finite Borel normality of bit strings.
//!
//! A string `x` of length `n` is split into `floor(n / m)` consecutive,
//! non-overlapping blocks of length `m`; the `n mod m` trailing bits are
//! dropped. `x` is normal with accuracy `(m, eps)` when every block value `u`
//! satisfies
//!
//! ```text
//! | N_u / floor(n/m) - 2^-m | <= eps
//! ```
//!
//! and a report runs this for every `1 <= m <= floor(log2 log2 n)`, with
//! `eps` taken from an [`AccuracyFunction`] evaluated at `n`.
//!
//! Block values are stored as integers in `[0, 2^m)` with the leftmost bit of
//! the block as the most significant bit.

use std::fmt;
use std::str::FromStr;
use std::thread;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::coding::{morphism_stream, BitStream};
use crate::entropy::EntropySource;
use crate::error::{Error, Result};
use crate::measurement::{generate_ternary, PreparationSpec};

/// Largest block length a [`BlockCounter`] accepts.
pub const MAX_BLOCK_LEN: u32 = 30;
/// Guard for [`count_nonnormal_exhaustive`].
pub const MAX_EXHAUSTIVE_LEN: u32 = 24;

/// `eps` as a function of the analysed length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AccuracyFunction {
    /// `sqrt(log2 n / n)`
    SqrtLog,
    /// `1 / log2 n`
    InvLog,
    Constant(f64),
}

impl AccuracyFunction {
    pub fn epsilon(&self, n: u64) -> f64 {
        let nf = n as f64;
        match *self {
            AccuracyFunction::SqrtLog => (nf.log2() / nf).sqrt(),
            AccuracyFunction::InvLog => 1.0 / nf.log2(),
            AccuracyFunction::Constant(eps) => eps,
        }
    }
}

impl fmt::Display for AccuracyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccuracyFunction::SqrtLog => f.write_str("sqrtlog"),
            AccuracyFunction::InvLog => f.write_str("invlog"),
            AccuracyFunction::Constant(eps) => write!(f, "const:{eps}"),
        }
    }
}

impl FromStr for AccuracyFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrtlog" => Ok(AccuracyFunction::SqrtLog),
            "invlog" => Ok(AccuracyFunction::InvLog),
            _ => {
                let eps = s
                    .strip_prefix("const:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!(
                            "unknown accuracy {s:?} (expected sqrtlog, invlog or const:<eps>)"
                        ))
                    })?;
                if !(eps.is_finite() && eps > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "constant accuracy must be positive, got {eps}"
                    )));
                }
                Ok(AccuracyFunction::Constant(eps))
            }
        }
    }
}

impl Serialize for AccuracyFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for AccuracyFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `floor(log2 log2 n)`, or 0 when `n < 4`.
///
/// For `L = floor(log2 n)`, `log2 n >= 2^k` iff `L >= 2^k`, so the result is
/// `floor(log2 L)` and no floating point is involved.
pub fn max_block_length(n: u64) -> u32 {
    if n < 4 {
        return 0;
    }
    let l = 63 - n.leading_zeros();
    31 - l.leading_zeros()
}

/// Render a block key as its `m`-bit string, most significant bit first.
pub fn block_key_string(key: u64, m: u32) -> String {
    (0..m)
        .rev()
        .map(|k| if (key >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Occurrences of every `m`-bit block among non-overlapping blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCounts {
    m: u32,
    total_blocks: u64,
    counts: Vec<u64>,
}

impl BlockCounts {
    pub fn new(m: u32) -> Result<Self> {
        if !(1..=MAX_BLOCK_LEN).contains(&m) {
            return Err(Error::InvalidParameter(format!(
                "block length {m} outside 1..={MAX_BLOCK_LEN}"
            )));
        }
        Ok(Self {
            m,
            total_blocks: 0,
            counts: vec![0; 1 << m],
        })
    }

    pub fn block_len(&self) -> u32 {
        self.m
    }

    pub fn total_blocks(&self) -> u64 {
        self.total_blocks
    }

    /// Counts indexed by block key.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, key: u64) -> u64 {
        self.counts[key as usize]
    }

    /// Count for a block written as a bit string, e.g. `"10"`.
    pub fn count_of(&self, block: &str) -> Result<u64> {
        if block.len() != self.m as usize {
            return Err(Error::InvalidParameter(format!(
                "block {block:?} does not have length {}",
                self.m
            )));
        }
        let key = block.bytes().try_fold(0u64, |acc, ch| match ch {
            b'0' => Ok(acc << 1),
            b'1' => Ok(acc << 1 | 1),
            other => Err(Error::InvalidBit(other)),
        })?;
        Ok(self.count(key))
    }

    fn record(&mut self, key: usize) {
        self.counts[key] += 1;
        self.total_blocks += 1;
    }

    /// Counts of the concatenation of the two underlying strings, provided
    /// the first one's length is a multiple of `m`.
    pub fn merge(&mut self, other: &BlockCounts) -> Result<()> {
        if other.m != self.m {
            return Err(Error::InvalidParameter(format!(
                "cannot merge block length {} into {}",
                other.m, self.m
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total_blocks += other.total_blocks;
        Ok(())
    }
}

/// Single-pass counter for one block length; memory is `2^m` counters
/// regardless of stream length.
#[derive(Clone, Debug)]
pub struct BlockCounter {
    counts: BlockCounts,
    acc: usize,
    filled: u32,
}

impl BlockCounter {
    pub fn new(m: u32) -> Result<Self> {
        Ok(Self {
            counts: BlockCounts::new(m)?,
            acc: 0,
            filled: 0,
        })
    }

    #[inline]
    pub fn push(&mut self, bit: u8) {
        self.acc = (self.acc << 1) | bit as usize;
        self.filled += 1;
        if self.filled == self.counts.m {
            self.counts.record(self.acc);
            self.acc = 0;
            self.filled = 0;
        }
    }

    pub fn extend(&mut self, bits: &[u8]) {
        for &b in bits {
            self.push(b);
        }
    }

    /// Completed blocks; an unfinished trailing block is discarded.
    pub fn finish(self) -> BlockCounts {
        self.counts
    }
}

/// Counters for every block length `1..=max_m` fed from a single pass.
#[derive(Clone, Debug)]
pub struct MultiBlockCounter {
    counters: Vec<BlockCounter>,
    seen: u64,
}

impl MultiBlockCounter {
    pub fn new(max_m: u32) -> Result<Self> {
        Ok(Self {
            counters: (1..=max_m).map(BlockCounter::new).collect::<Result<_>>()?,
            seen: 0,
        })
    }

    #[inline]
    pub fn push(&mut self, bit: u8) {
        for c in &mut self.counters {
            c.push(bit);
        }
        self.seen += 1;
    }

    pub fn extend(&mut self, bits: &[u8]) {
        for &b in bits {
            self.push(b);
        }
    }

    pub fn len(&self) -> u64 {
        self.seen
    }

    pub fn is_empty(&self) -> bool {
        self.seen == 0
    }

    pub fn finish(self) -> Vec<BlockCounts> {
        self.counters.into_iter().map(BlockCounter::finish).collect()
    }
}

/// `[N_0, N_1]`.
pub fn count_symbols(x: &BitStream) -> [u64; 2] {
    let ones = x.count_ones();
    [x.len() as u64 - ones, ones]
}

pub fn block_counts(x: &BitStream, m: u32) -> Result<BlockCounts> {
    let mut counter = BlockCounter::new(m)?;
    counter.extend(x.bits());
    Ok(counter.finish())
}

/// [`block_counts`] split across `threads` workers at block boundaries and
/// merged.
pub fn block_counts_parallel(x: &BitStream, m: u32, threads: usize) -> Result<BlockCounts> {
    let threads = threads.max(1);
    let bits = x.bits();
    let blocks = bits.len() / m as usize;
    let per = blocks.div_ceil(threads).max(1) * m as usize;
    let usable = &bits[..blocks * m as usize];
    let mut total = BlockCounts::new(m)?;
    let parts: Vec<Result<BlockCounts>> = thread::scope(|s| {
        let handles: Vec<_> = usable
            .chunks(per)
            .map(|chunk| {
                s.spawn(move || {
                    let mut c = BlockCounter::new(m)?;
                    c.extend(chunk);
                    Ok(c.finish())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("block counting worker panicked"))
            .collect()
    });
    for part in parts {
        total.merge(&part?)?;
    }
    Ok(total)
}

/// Outcome of the accuracy test for a single block length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDeviation {
    pub m: u32,
    pub epsilon: f64,
    /// `max_u |N_u / floor(n/m) - 2^-m|`
    pub max_deviation: f64,
    /// Block attaining the maximum (smallest key on ties), MSB first.
    pub worst_block: String,
    pub pass: bool,
}

/// Apply the accuracy test to already-counted blocks.
pub fn block_deviation(counts: &BlockCounts, epsilon: f64) -> Result<BlockDeviation> {
    let total = counts.total_blocks();
    if total == 0 {
        return Err(Error::EmptyBlocks { n: 0, m: counts.block_len() });
    }
    let m = counts.block_len();
    let target = (-(m as f64)).exp2();
    let (worst_key, max_deviation) = counts
        .counts()
        .iter()
        .enumerate()
        .map(|(k, &c)| (k, (c as f64 / total as f64 - target).abs()))
        .fold((0usize, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    Ok(BlockDeviation {
        m,
        epsilon,
        max_deviation,
        worst_block: block_key_string(worst_key as u64, m),
        pass: max_deviation <= epsilon,
    })
}

/// Accuracy test at a single block length.
pub fn is_normal_with_accuracy(x: &BitStream, m: u32, epsilon: f64) -> Result<BlockDeviation> {
    if m == 0 || (x.len() as u64) < m as u64 {
        return Err(Error::EmptyBlocks { n: x.len() as u64, m });
    }
    block_deviation(&block_counts(x, m)?, epsilon)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub n: u64,
    pub accuracy: AccuracyFunction,
    pub per_m: Vec<BlockDeviation>,
    pub pass: bool,
}

/// Build a report from counts for block lengths `1..=floor(log2 log2 n)`
/// (in that order) of a string of length `n`.
pub fn normality_report_from_counts(
    n: u64,
    accuracy: AccuracyFunction,
    counts: &[BlockCounts],
) -> Result<NormalityReport> {
    let max_m = max_block_length(n);
    if max_m == 0 {
        return Err(Error::StringTooShort { n });
    }
    if counts.len() != max_m as usize
        || counts.iter().enumerate().any(|(i, c)| {
            c.block_len() as usize != i + 1 || c.total_blocks() != n / c.block_len() as u64
        })
    {
        return Err(Error::InvalidParameter(format!(
            "block counts do not cover m = 1..={max_m} for n = {n}"
        )));
    }
    let epsilon = accuracy.epsilon(n);
    let per_m = counts
        .iter()
        .map(|c| block_deviation(c, epsilon))
        .collect::<Result<Vec<_>>>()?;
    let pass = per_m.iter().all(|d| d.pass);
    Ok(NormalityReport {
        n,
        accuracy,
        per_m,
        pass,
    })
}

/// Run the accuracy test over every admissible block length.
pub fn normality_report(x: &BitStream, accuracy: AccuracyFunction) -> Result<NormalityReport> {
    let n = x.len() as u64;
    let max_m = max_block_length(n);
    if max_m == 0 {
        return Err(Error::StringTooShort { n });
    }
    let mut counter = MultiBlockCounter::new(max_m)?;
    counter.extend(x.bits());
    normality_report_from_counts(n, accuracy, &counter.finish())
}

/// Number of `m`-bit strings that fail [`normality_report`], by enumerating
/// all `2^m` of them.
pub fn count_nonnormal_exhaustive(m: u32, accuracy: AccuracyFunction) -> Result<u64> {
    if m > MAX_EXHAUSTIVE_LEN {
        return Err(Error::TooLarge {
            m,
            max: MAX_EXHAUSTIVE_LEN,
        });
    }
    let n = m as u64;
    let max_m = max_block_length(n);
    if max_m == 0 {
        return Err(Error::StringTooShort { n });
    }
    let mut bits = vec![0u8; m as usize];
    let mut failures = 0u64;
    for z in 0u64..(1u64 << m) {
        for (i, b) in bits.iter_mut().enumerate() {
            *b = ((z >> (m as usize - 1 - i)) & 1) as u8;
        }
        let mut counter = MultiBlockCounter::new(max_m)?;
        counter.extend(&bits);
        if !normality_report_from_counts(n, accuracy, &counter.finish())?.pass {
            failures += 1;
        }
    }
    Ok(failures)
}

/// `2^m / sqrt(log2 m)`, the bound on non-normal `m`-bit strings.
pub fn nonnormal_count_bound(m: u32) -> f64 {
    (m as f64).exp2() / (m as f64).log2().sqrt()
}

/// `1 - 1/sqrt(log2 m)`, the lower bound on the probability that a length-`m`
/// prefix of the binary output is normal under `sqrt(log2 n / n)`.
pub fn normal_probability_bound(m: u64) -> f64 {
    1.0 - 1.0 / (m as f64).log2().sqrt()
}

/// Fraction of `trials` simulated prefixes of length `m` that pass the
/// report under [`AccuracyFunction::SqrtLog`].
///
/// Each trial generates `m` digits from the `|1>` preparation, maps them to
/// bits and analyses the result. Trials draw consecutively from `entropy`.
pub fn estimate_normal_probability<E: EntropySource + ?Sized>(
    m: usize,
    trials: usize,
    entropy: &mut E,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut passed = 0usize;
    for _ in 0..trials {
        let (x, _) = generate_ternary(PreparationSpec::PlusOne, m, entropy);
        if normality_report(&morphism_stream(&x), AccuracyFunction::SqrtLog)?.pass {
            passed += 1;
        }
    }
    Ok(passed as f64 / trials as f64)
}
