use std::fs::File;
use std::io::{BufReader, BufWriter};

use proptest::prelude::*;

use qrng_core::coding::{morphism_stream, unpack_bits, unpack_ternary, BitStream, TernaryStream};
use qrng_core::measurement::PreparationSpec;
use qrng_core::normality::{normality_report, AccuracyFunction};
use qrng_core::pipeline::{analyze, generate, transform};

#[test]
fn files_round_trip_through_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("x.qt3");
    let b = dir.path().join("x.qb2");
    let record = generate(BufWriter::new(File::create(&t).unwrap()), PreparationSpec::MinusOne, 123_457, 11).unwrap();
    let n = transform(BufReader::new(File::open(&t).unwrap()), BufWriter::new(File::create(&b).unwrap())).unwrap();
    assert_eq!(n, 123_457);

    let digits = unpack_ternary(&std::fs::read(&t).unwrap()).unwrap();
    let bits = unpack_bits(&std::fs::read(&b).unwrap()).unwrap();
    assert_eq!(digits.tallies(), record.tallies);
    assert_eq!(morphism_stream(&digits), bits);

    let streamed = analyze(BufReader::new(File::open(&b).unwrap()), AccuracyFunction::InvLog, None).unwrap();
    assert_eq!(streamed.normality, normality_report(&bits, AccuracyFunction::InvLog).unwrap());
}

#[test]
fn packed_sizes() {
    let dir = tempfile::tempdir().unwrap();
    for count in [0u64, 1, 5, 6, 1000] {
        let t = dir.path().join(format!("{count}.qt3"));
        generate(File::create(&t).unwrap(), PreparationSpec::PlusOne, count, 0).unwrap();
        assert_eq!(std::fs::metadata(&t).unwrap().len(), 13 + count.div_ceil(5));
        let b = dir.path().join(format!("{count}.qb2"));
        transform(File::open(&t).unwrap(), File::create(&b).unwrap()).unwrap();
        assert_eq!(std::fs::metadata(&b).unwrap().len(), 13 + count.div_ceil(8));
    }
}

proptest! {
    #[test]
    fn streaming_transform_matches_in_memory(d in proptest::collection::vec(0u8..3, 0..500)) {
        let x = TernaryStream::from_digits(d).unwrap();
        let mut out = Vec::new();
        transform(qrng_core::coding::pack_ternary(&x).as_slice(), &mut out).unwrap();
        prop_assert_eq!(unpack_bits(&out).unwrap(), morphism_stream(&x));
    }

    #[test]
    fn streaming_analysis_matches_in_memory(b in proptest::collection::vec(0u8..2, 4..2000)) {
        let x = BitStream::from_bits(b).unwrap();
        let r = analyze(qrng_core::coding::pack_bits(&x).as_slice(), AccuracyFunction::SqrtLog, Some(3)).unwrap();
        prop_assert_eq!(r.normality, normality_report(&x, AccuracyFunction::SqrtLog).unwrap());
        for e in &r.predictors {
            prop_assert_eq!(e.total(), x.len() as u64);
        }
    }
}
