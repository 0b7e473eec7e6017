//! Bit sources for side-by-side comparison: the simulated pipeline and a
//! couple of classical pseudo-random generators.

use std::fmt;
use std::str::FromStr;

use crate::coding::{morphism_digit, BitStream};
use crate::entropy::ChaChaEntropy;
use crate::error::{Error, Result};
use crate::measurement::{DigitSource, PreparationSpec};

pub trait BitSource: Send {
    fn id(&self) -> String;

    /// The next `n` bits.
    fn generate(&mut self, n: usize) -> BitStream;
}

/// Simulated measurements mapped to bits by the ternary-to-binary morphism.
pub struct QrngPipeline {
    spec: PreparationSpec,
    digits: DigitSource<ChaChaEntropy>,
}

impl QrngPipeline {
    pub fn new(spec: PreparationSpec, seed: u64) -> Self {
        Self {
            spec,
            digits: DigitSource::new(spec, ChaChaEntropy::new(seed)),
        }
    }
}

impl BitSource for QrngPipeline {
    fn id(&self) -> String {
        format!("qrng:{}", self.spec)
    }

    fn generate(&mut self, n: usize) -> BitStream {
        let bits = (0..n)
            .map(|_| morphism_digit(self.digits.next_digit()).expect("sampled digits are ternary"))
            .collect();
        BitStream::from_bits_unchecked(bits)
    }
}

fn drain_word(word: u64, width: u32, n: usize, out: &mut Vec<u8>) {
    for k in 0..width {
        if out.len() == n {
            return;
        }
        out.push(((word >> k) & 1) as u8);
    }
}

/// 64-bit linear congruential generator (Knuth's MMIX constants). Each step
/// contributes its high 32 bits, least significant first.
#[derive(Clone, Debug)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    const A: u64 = 6364136223846793005;
    const C: u64 = 1442695040888963407;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(Self::A).wrapping_add(Self::C);
        self.state
    }
}

impl BitSource for Lcg64 {
    fn id(&self) -> String {
        "lcg64".into()
    }

    fn generate(&mut self, n: usize) -> BitStream {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let hi = self.next_u64() >> 32;
            drain_word(hi, 32, n, &mut out);
        }
        BitStream::from_bits_unchecked(out)
    }
}

/// Marsaglia's xorshift64 with shifts (13, 7, 17), a linear feedback shift
/// register over GF(2). Each step contributes all 64 bits.
#[derive(Clone, Debug)]
pub struct Xorshift64 {
    state: u64,
}

impl Xorshift64 {
    pub fn new(seed: u64) -> Self {
        // the all-zero state is a fixed point
        let state = if seed == 0 { 0x9E37_79B9_7F4A_7C15 } else { seed };
        Self { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.state = x;
        x
    }
}

impl BitSource for Xorshift64 {
    fn id(&self) -> String {
        "xorshift64".into()
    }

    fn generate(&mut self, n: usize) -> BitStream {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let w = self.next_u64();
            drain_word(w, 64, n, &mut out);
        }
        BitStream::from_bits_unchecked(out)
    }
}

/// Named source for the command line: `qrng`, `qrng:<prep>`, `lcg`,
/// `xorshift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceSpec {
    Qrng(PreparationSpec),
    Lcg,
    Xorshift,
}

impl SourceSpec {
    pub fn build(&self, seed: u64) -> Box<dyn BitSource> {
        match *self {
            SourceSpec::Qrng(spec) => Box::new(QrngPipeline::new(spec, seed)),
            SourceSpec::Lcg => Box::new(Lcg64::new(seed)),
            SourceSpec::Xorshift => Box::new(Xorshift64::new(seed)),
        }
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::Qrng(p) => write!(f, "qrng:{p}"),
            SourceSpec::Lcg => f.write_str("lcg"),
            SourceSpec::Xorshift => f.write_str("xorshift"),
        }
    }
}

impl FromStr for SourceSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qrng" => Ok(SourceSpec::Qrng(PreparationSpec::PlusOne)),
            "lcg" => Ok(SourceSpec::Lcg),
            "xorshift" => Ok(SourceSpec::Xorshift),
            _ => match s.strip_prefix("qrng:") {
                Some(prep) => Ok(SourceSpec::Qrng(prep.parse()?)),
                None => Err(Error::InvalidParameter(format!(
                    "unknown source {s:?} (expected qrng, qrng:<prep>, lcg or xorshift)"
                ))),
            },
        }
    }
}
