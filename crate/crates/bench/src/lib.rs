//! Shared fixtures for the criterion benches.

use qrng_core::coding::{morphism_stream, BitStream, TernaryStream};
use qrng_core::entropy::ChaChaEntropy;
use qrng_core::measurement::{generate_ternary, PreparationSpec};

pub fn ternary_fixture(n: usize) -> TernaryStream {
    generate_ternary(PreparationSpec::PlusOne, n, &mut ChaChaEntropy::new(1)).0
}

pub fn bit_fixture(n: usize) -> BitStream {
    morphism_stream(&ternary_fixture(n))
}
