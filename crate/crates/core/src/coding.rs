//! Ternary and binary digit streams, the ternary-to-binary morphism, and the
//! packed on-disk formats.
//!
//! Both file formats share a 13-byte header:
//!
//! | offset | size | field                              |
//! |--------|------|------------------------------------|
//! | 0      | 4    | magic, `QT3\0` or `QB2\0`          |
//! | 4      | 1    | version, always 1                  |
//! | 5      | 8    | element count, u64 little-endian   |
//!
//! Ternary payloads hold five digits per byte, the first digit most
//! significant (`d0*81 + d1*27 + d2*9 + d3*3 + d4`), so every valid byte is
//! at most 242. Bit payloads hold eight bits per byte, least significant bit
//! first. The last byte of either payload is padded with zero digits; the
//! readers reject non-zero padding, trailing bytes, and short payloads.

use std::fmt;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

pub const TERNARY_MAGIC: [u8; 4] = *b"QT3\0";
pub const BIT_MAGIC: [u8; 4] = *b"QB2\0";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 13;
pub const TRITS_PER_BYTE: usize = 5;
pub const MAX_TERNARY_BYTE: u8 = 242;

const WRITE_BUFFER: usize = 1 << 16;
const POW3: [u8; TRITS_PER_BYTE] = [81, 27, 9, 3, 1];

/// Digits over `{0, 1, 2}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TernaryStream(Vec<u8>);

impl TernaryStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_digits(digits: Vec<u8>) -> Result<Self> {
        if let Some(&d) = digits.iter().find(|&&d| d > 2) {
            return Err(Error::InvalidDigit(d));
        }
        Ok(Self(digits))
    }

    pub(crate) fn from_digits_unchecked(digits: Vec<u8>) -> Self {
        debug_assert!(digits.iter().all(|&d| d <= 2));
        Self(digits)
    }

    pub fn push(&mut self, digit: u8) -> Result<()> {
        if digit > 2 {
            return Err(Error::InvalidDigit(digit));
        }
        self.0.push(digit);
        Ok(())
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_digits(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Occurrences of each digit.
    pub fn tallies(&self) -> [u64; 3] {
        let mut t = [0u64; 3];
        for &d in &self.0 {
            t[d as usize] += 1;
        }
        t
    }

    pub fn concat(&self, other: &TernaryStream) -> TernaryStream {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }
}

/// Bits over `{0, 1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitStream(Vec<u8>);

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidBit(b));
        }
        Ok(Self(bits))
    }

    pub(crate) fn from_bits_unchecked(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Self(bits)
    }

    pub fn push(&mut self, bit: u8) -> Result<()> {
        if bit > 1 {
            return Err(Error::InvalidBit(bit));
        }
        self.0.push(bit);
        Ok(())
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> u64 {
        self.0.iter().map(|&b| b as u64).sum()
    }

    /// First `len` bits (all of them if shorter).
    pub fn prefix(&self, len: usize) -> BitStream {
        Self(self.0[..len.min(self.0.len())].to_vec())
    }

    pub fn concat(&self, other: &BitStream) -> BitStream {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Self(v)
    }
}

impl FromStr for BitStream {
    type Err = Error;

    /// Parses a string of `'0'` and `'1'` characters.
    fn from_str(s: &str) -> Result<Self> {
        s.bytes()
            .map(|ch| match ch {
                b'0' => Ok(0),
                b'1' => Ok(1),
                other => Err(Error::InvalidBit(other)),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Self)
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// The alphabetic morphism `0 -> 0, 1 -> 1, 2 -> 0`.
pub fn morphism_digit(digit: u8) -> Result<u8> {
    match digit {
        0 | 2 => Ok(0),
        1 => Ok(1),
        d => Err(Error::InvalidDigit(d)),
    }
}

/// Letter-by-letter image of a ternary stream.
pub fn morphism_stream(x: &TernaryStream) -> BitStream {
    BitStream::from_bits_unchecked(x.digits().iter().map(|&d| (d == 1) as u8).collect())
}

fn write_header<W: Write>(w: &mut W, magic: [u8; 4], count: u64) -> io::Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&magic);
    header[4] = FORMAT_VERSION;
    header[5..].copy_from_slice(&count.to_le_bytes());
    w.write_all(&header)
}

struct ByteSource<R: Read> {
    inner: BufReader<R>,
}

impl<R: Read> ByteSource<R> {
    fn new(inner: R) -> Self {
        Self {
            inner: BufReader::with_capacity(WRITE_BUFFER, inner),
        }
    }

    fn next_byte(&mut self) -> Result<Option<u8>> {
        let buf = self.inner.fill_buf()?;
        match buf.first() {
            Some(&b) => {
                self.inner.consume(1);
                Ok(Some(b))
            }
            None => Ok(None),
        }
    }

    fn read_header(&mut self, magic: [u8; 4]) -> Result<u64> {
        let mut header = [0u8; HEADER_LEN];
        self.inner.read_exact(&mut header).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => Error::CorruptFile("truncated header".into()),
            _ => Error::Io(e),
        })?;
        if header[..4] != magic {
            return Err(Error::CorruptFile(format!(
                "bad magic {:02x?}, expected {:02x?}",
                &header[..4],
                magic
            )));
        }
        if header[4] != FORMAT_VERSION {
            return Err(Error::CorruptFile(format!(
                "unsupported version {}",
                header[4]
            )));
        }
        let mut count = [0u8; 8];
        count.copy_from_slice(&header[5..]);
        Ok(u64::from_le_bytes(count))
    }

    fn expect_eof(&mut self) -> Result<()> {
        match self.next_byte()? {
            None => Ok(()),
            Some(_) => Err(Error::CorruptFile(
                "payload longer than the declared count".into(),
            )),
        }
    }
}

/// Streaming writer for the packed ternary format. The digit count is fixed
/// up front because it goes in the header.
pub struct TernaryWriter<W: Write> {
    inner: W,
    declared: u64,
    written: u64,
    acc: u8,
    filled: usize,
    buf: Vec<u8>,
}

impl<W: Write> TernaryWriter<W> {
    pub fn new(mut inner: W, count: u64) -> Result<Self> {
        write_header(&mut inner, TERNARY_MAGIC, count)?;
        Ok(Self {
            inner,
            declared: count,
            written: 0,
            acc: 0,
            filled: 0,
            buf: Vec::with_capacity(WRITE_BUFFER),
        })
    }

    pub fn push(&mut self, digit: u8) -> Result<()> {
        if digit > 2 {
            return Err(Error::InvalidDigit(digit));
        }
        if self.written == self.declared {
            return Err(Error::InvalidParameter(format!(
                "more than the declared {} digits written",
                self.declared
            )));
        }
        self.acc += digit * POW3[self.filled];
        self.filled += 1;
        self.written += 1;
        if self.filled == TRITS_PER_BYTE {
            self.emit()?;
        }
        Ok(())
    }

    pub fn push_all(&mut self, digits: &[u8]) -> Result<()> {
        digits.iter().try_for_each(|&d| self.push(d))
    }

    fn emit(&mut self) -> Result<()> {
        self.buf.push(self.acc);
        self.acc = 0;
        self.filled = 0;
        if self.buf.len() >= WRITE_BUFFER {
            self.inner.write_all(&self.buf)?;
            self.buf.clear();
        }
        Ok(())
    }

    /// Flush the padded final group and hand back the sink.
    pub fn finish(mut self) -> Result<W> {
        if self.written != self.declared {
            return Err(Error::InvalidParameter(format!(
                "declared {} digits but wrote {}",
                self.declared, self.written
            )));
        }
        if self.filled > 0 {
            self.emit()?;
        }
        self.inner.write_all(&self.buf)?;
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Streaming reader for the packed ternary format.
pub struct TernaryReader<R: Read> {
    src: ByteSource<R>,
    count: u64,
    remaining: u64,
    group: [u8; TRITS_PER_BYTE],
    pos: usize,
    finished: bool,
}

impl<R: Read> TernaryReader<R> {
    pub fn new(inner: R) -> Result<Self> {
        let mut src = ByteSource::new(inner);
        let count = src.read_header(TERNARY_MAGIC)?;
        Ok(Self {
            src,
            count,
            remaining: count,
            group: [0; TRITS_PER_BYTE],
            pos: TRITS_PER_BYTE,
            finished: false,
        })
    }

    /// Digit count declared in the header.
    pub fn declared_count(&self) -> u64 {
        self.count
    }

    pub fn next_digit(&mut self) -> Result<Option<u8>> {
        if self.remaining == 0 {
            if !self.finished {
                self.finished = true;
                self.src.expect_eof()?;
            }
            return Ok(None);
        }
        if self.pos == TRITS_PER_BYTE {
            let byte = self.src.next_byte()?.ok_or_else(|| {
                Error::CorruptFile(format!(
                    "payload truncated with {} digits outstanding",
                    self.remaining
                ))
            })?;
            if byte > MAX_TERNARY_BYTE {
                return Err(Error::CorruptFile(format!("byte value {byte} exceeds 242")));
            }
            let mut v = byte;
            for slot in self.group.iter_mut().rev() {
                *slot = v % 3;
                v /= 3;
            }
            let live = self.remaining.min(TRITS_PER_BYTE as u64) as usize;
            if self.group[live..].iter().any(|&d| d != 0) {
                return Err(Error::CorruptFile("non-zero padding digits".into()));
            }
            self.pos = 0;
        }
        let d = self.group[self.pos];
        self.pos += 1;
        self.remaining -= 1;
        Ok(Some(d))
    }

    /// Read everything that is left.
    pub fn read_to_stream(mut self) -> Result<TernaryStream> {
        let mut digits = Vec::with_capacity(self.remaining.min(1 << 26) as usize);
        while let Some(d) = self.next_digit()? {
            digits.push(d);
        }
        Ok(TernaryStream::from_digits_unchecked(digits))
    }
}

impl<R: Read> Iterator for TernaryReader<R> {
    type Item = Result<u8>;
    fn next(&mut self) -> Option<Result<u8>> {
        self.next_digit().transpose()
    }
}

/// Streaming writer for the packed bit format.
pub struct BitWriter<W: Write> {
    inner: W,
    declared: u64,
    written: u64,
    acc: u8,
    filled: u32,
    buf: Vec<u8>,
}

impl<W: Write> BitWriter<W> {
    pub fn new(mut inner: W, count: u64) -> Result<Self> {
        write_header(&mut inner, BIT_MAGIC, count)?;
        Ok(Self {
            inner,
            declared: count,
            written: 0,
            acc: 0,
            filled: 0,
            buf: Vec::with_capacity(WRITE_BUFFER),
        })
    }

    pub fn push(&mut self, bit: u8) -> Result<()> {
        if bit > 1 {
            return Err(Error::InvalidBit(bit));
        }
        if self.written == self.declared {
            return Err(Error::InvalidParameter(format!(
                "more than the declared {} bits written",
                self.declared
            )));
        }
        self.acc |= bit << self.filled;
        self.filled += 1;
        self.written += 1;
        if self.filled == 8 {
            self.emit()?;
        }
        Ok(())
    }

    pub fn push_all(&mut self, bits: &[u8]) -> Result<()> {
        bits.iter().try_for_each(|&b| self.push(b))
    }

    fn emit(&mut self) -> Result<()> {
        self.buf.push(self.acc);
        self.acc = 0;
        self.filled = 0;
        if self.buf.len() >= WRITE_BUFFER {
            self.inner.write_all(&self.buf)?;
            self.buf.clear();
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        if self.written != self.declared {
            return Err(Error::InvalidParameter(format!(
                "declared {} bits but wrote {}",
                self.declared, self.written
            )));
        }
        if self.filled > 0 {
            self.emit()?;
        }
        self.inner.write_all(&self.buf)?;
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Streaming reader for the packed bit format.
pub struct BitReader<R: Read> {
    src: ByteSource<R>,
    count: u64,
    remaining: u64,
    byte: u8,
    pos: u32,
    finished: bool,
}

impl<R: Read> BitReader<R> {
    pub fn new(inner: R) -> Result<Self> {
        let mut src = ByteSource::new(inner);
        let count = src.read_header(BIT_MAGIC)?;
        Ok(Self {
            src,
            count,
            remaining: count,
            byte: 0,
            pos: 8,
            finished: false,
        })
    }

    pub fn declared_count(&self) -> u64 {
        self.count
    }

    pub fn next_bit(&mut self) -> Result<Option<u8>> {
        if self.remaining == 0 {
            if !self.finished {
                self.finished = true;
                self.src.expect_eof()?;
            }
            return Ok(None);
        }
        if self.pos == 8 {
            self.byte = self.src.next_byte()?.ok_or_else(|| {
                Error::CorruptFile(format!(
                    "payload truncated with {} bits outstanding",
                    self.remaining
                ))
            })?;
            if self.remaining < 8 && self.byte >> self.remaining != 0 {
                return Err(Error::CorruptFile("non-zero padding bits".into()));
            }
            self.pos = 0;
        }
        let b = (self.byte >> self.pos) & 1;
        self.pos += 1;
        self.remaining -= 1;
        Ok(Some(b))
    }

    pub fn read_to_stream(mut self) -> Result<BitStream> {
        let mut bits = Vec::with_capacity(self.remaining.min(1 << 27) as usize);
        while let Some(b) = self.next_bit()? {
            bits.push(b);
        }
        Ok(BitStream::from_bits_unchecked(bits))
    }
}

impl<R: Read> Iterator for BitReader<R> {
    type Item = Result<u8>;
    fn next(&mut self) -> Option<Result<u8>> {
        self.next_bit().transpose()
    }
}

pub fn pack_ternary(x: &TernaryStream) -> Vec<u8> {
    let n = x.len();
    let mut out = Vec::with_capacity(HEADER_LEN + n.div_ceil(TRITS_PER_BYTE));
    let mut w = TernaryWriter::new(&mut out, n as u64).expect("writing to a Vec cannot fail");
    w.push_all(x.digits()).expect("digits validated by TernaryStream");
    w.finish().expect("count matches");
    out
}

pub fn unpack_ternary(bytes: &[u8]) -> Result<TernaryStream> {
    TernaryReader::new(bytes)?.read_to_stream()
}

pub fn pack_bits(x: &BitStream) -> Vec<u8> {
    let n = x.len();
    let mut out = Vec::with_capacity(HEADER_LEN + n.div_ceil(8));
    let mut w = BitWriter::new(&mut out, n as u64).expect("writing to a Vec cannot fail");
    w.push_all(x.bits()).expect("bits validated by BitStream");
    w.finish().expect("count matches");
    out
}

pub fn unpack_bits(bytes: &[u8]) -> Result<BitStream> {
    BitReader::new(bytes)?.read_to_stream()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ternary(d: &[u8]) -> TernaryStream {
        TernaryStream::from_digits(d.to_vec()).unwrap()
    }

    #[test]
    fn morphism_table() {
        assert_eq!(morphism_digit(0).unwrap(), 0);
        assert_eq!(morphism_digit(1).unwrap(), 1);
        assert_eq!(morphism_digit(2).unwrap(), 0);
        assert!(matches!(morphism_digit(3), Err(Error::InvalidDigit(3))));
    }

    #[test]
    fn morphism_on_strings() {
        assert!(morphism_stream(&TernaryStream::new()).is_empty());
        let y = morphism_stream(&ternary(&[0, 1, 2, 1, 0]));
        assert_eq!(y.bits(), &[0, 1, 0, 1, 0]);
    }

    #[test]
    fn stream_validation() {
        assert!(matches!(
            TernaryStream::from_digits(vec![0, 3]),
            Err(Error::InvalidDigit(3))
        ));
        assert!(matches!(BitStream::from_bits(vec![2]), Err(Error::InvalidBit(2))));
        assert!("0102".parse::<BitStream>().is_err());
        let b: BitStream = "0010101110".parse().unwrap();
        assert_eq!(b.to_string(), "0010101110");
    }

    #[test]
    fn ternary_packing_layout() {
        let empty = pack_ternary(&TernaryStream::new());
        assert_eq!(empty.len(), HEADER_LEN);
        assert_eq!(&empty[..4], b"QT3\0");
        assert_eq!(empty[4], 1);
        assert_eq!(&empty[5..], &0u64.to_le_bytes());
        assert_eq!(unpack_ternary(&empty).unwrap(), TernaryStream::new());

        let twos = pack_ternary(&ternary(&[2, 2, 2, 2, 2]));
        assert_eq!(&twos[HEADER_LEN..], &[242]);

        // 1 0 2 then two padding zeros: 81 + 0 + 18
        let partial = pack_ternary(&ternary(&[1, 0, 2]));
        assert_eq!(&partial[HEADER_LEN..], &[99]);
        assert_eq!(&partial[5..13], &3u64.to_le_bytes());
    }

    #[test]
    fn bit_packing_layout() {
        let one = pack_bits(&BitStream::from_bits(vec![1, 0, 0, 0, 0, 0, 0, 0]).unwrap());
        assert_eq!(&one[..5], b"QB2\0\x01");
        assert_eq!(&one[HEADER_LEN..], &[0x01]);

        let mut nine = vec![0u8; 8];
        nine.push(1);
        let packed = pack_bits(&BitStream::from_bits(nine).unwrap());
        assert_eq!(&packed[HEADER_LEN..], &[0x00, 0x01]);
    }

    #[test]
    fn corrupt_ternary_files() {
        let good = pack_ternary(&ternary(&[1, 2, 0, 1, 1, 2]));

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(unpack_ternary(&bad_magic), Err(Error::CorruptFile(_))));

        let mut bad_version = good.clone();
        bad_version[4] = 2;
        assert!(matches!(unpack_ternary(&bad_version), Err(Error::CorruptFile(_))));

        assert!(matches!(unpack_ternary(&good[..good.len() - 1]), Err(Error::CorruptFile(_))));
        assert!(matches!(unpack_ternary(&good[..7]), Err(Error::CorruptFile(_))));

        let mut big = good.clone();
        big[HEADER_LEN] = 243;
        assert!(matches!(unpack_ternary(&big), Err(Error::CorruptFile(_))));

        let mut trailing = good.clone();
        trailing.push(0);
        assert!(matches!(unpack_ternary(&trailing), Err(Error::CorruptFile(_))));

        // six digits leave four padding slots in the last byte
        let mut padding = good.clone();
        *padding.last_mut().unwrap() += 1;
        assert!(matches!(unpack_ternary(&padding), Err(Error::CorruptFile(_))));
    }

    #[test]
    fn corrupt_bit_files() {
        let good = pack_bits(&BitStream::from_bits(vec![1, 1, 0]).unwrap());
        let mut padding = good.clone();
        padding[HEADER_LEN] |= 0x80;
        assert!(matches!(unpack_bits(&padding), Err(Error::CorruptFile(_))));
        assert!(matches!(unpack_bits(&good[..HEADER_LEN]), Err(Error::CorruptFile(_))));
        let ternary_file = pack_ternary(&ternary(&[1]));
        assert!(matches!(unpack_bits(&ternary_file), Err(Error::CorruptFile(_))));
    }

    #[test]
    fn writer_enforces_declared_count() {
        let mut out = Vec::new();
        let mut w = TernaryWriter::new(&mut out, 2).unwrap();
        w.push(1).unwrap();
        assert!(w.finish().is_err());

        let mut out = Vec::new();
        let mut w = BitWriter::new(&mut out, 1).unwrap();
        w.push(1).unwrap();
        assert!(w.push(0).is_err());
    }

    #[test]
    fn preimage_counting() {
        let x = ternary(&[0, 1, 2, 2, 1, 0, 0, 2, 1]);
        let y = morphism_stream(&x);
        let t = x.tallies();
        assert_eq!(y.count_ones(), t[1]);
        assert_eq!(y.len() as u64 - y.count_ones(), t[0] + t[2]);
    }

    proptest! {
        #[test]
        fn ternary_round_trip(digits in proptest::collection::vec(0u8..3, 0..200)) {
            let x = ternary(&digits);
            let packed = pack_ternary(&x);
            prop_assert_eq!(packed.len(), HEADER_LEN + digits.len().div_ceil(5));
            prop_assert!(packed[HEADER_LEN..].iter().all(|&b| b <= MAX_TERNARY_BYTE));
            prop_assert_eq!(unpack_ternary(&packed).unwrap(), x);
        }

        #[test]
        fn bit_round_trip(bits in proptest::collection::vec(0u8..2, 0..200)) {
            let x = BitStream::from_bits(bits).unwrap();
            prop_assert_eq!(unpack_bits(&pack_bits(&x)).unwrap(), x);
        }

        #[test]
        fn morphism_is_a_homomorphism(
            a in proptest::collection::vec(0u8..3, 0..64),
            b in proptest::collection::vec(0u8..3, 0..64),
        ) {
            let (a, b) = (ternary(&a), ternary(&b));
            let whole = morphism_stream(&a.concat(&b));
            prop_assert_eq!(whole.len(), a.len() + b.len());
            prop_assert_eq!(whole, morphism_stream(&a).concat(&morphism_stream(&b)));
        }
    }
}
