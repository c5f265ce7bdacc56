//! Bit-packed binary codewords and codebooks.
//!
//! Rows are stored as little-endian `u64` words: position `i` of a codeword
//! lives in bit `i % 64` of word `i / 64`. Bits past the blocklength are kept
//! at zero so that distance and equality can work on whole words.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the final word of an `n`-bit codeword.
fn tail_mask(n: usize) -> u64 {
    match n % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A binary vector of fixed length `n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    words: Vec<u64>,
    n: usize,
}

impl Codeword {
    /// The all-zero word of length `n`.
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("blocklength must be positive"));
        }
        Ok(Codeword {
            words: vec![0; words_for(n)],
            n,
        })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut cw = Codeword::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                cw.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        Ok(cw)
    }

    /// Builds an `n`-bit word (`n <= 64`) whose position `i` is bit `i` of `value`.
    pub fn from_u64(value: u64, n: usize) -> Result<Self> {
        if n == 0 || n > WORD_BITS {
            return Err(Error::invalid(format!(
                "from_u64 needs 1 <= n <= 64, got {n}"
            )));
        }
        Ok(Codeword {
            words: vec![value & tail_mask(n)],
            n,
        })
    }

    /// Wraps pre-packed words, clearing any padding bits.
    pub fn from_words(mut words: Vec<u64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("blocklength must be positive"));
        }
        if words.len() != words_for(n) {
            return Err(Error::invalid(format!(
                "{} words cannot hold exactly {n} bits",
                words.len()
            )));
        }
        if let Some(last) = words.last_mut() {
            *last &= tail_mask(n);
        }
        Ok(Codeword { words, n })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        let mut cw = Codeword::zeros(n)?;
        for w in cw.words.iter_mut() {
            *w = rng.random();
        }
        let last = cw.words.len() - 1;
        cw.words[last] &= tail_mask(n);
        Ok(cw)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.n, "bit index {i} out of range for length {}", self.n);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.n, "bit index {i} out of range for length {}", self.n);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    /// XORs a packed mask of the same shape into this word.
    pub(crate) fn xor_words(&mut self, mask: &[u64]) {
        debug_assert_eq!(mask.len(), self.words.len());
        for (w, m) in self.words.iter_mut().zip(mask) {
            *w ^= m;
        }
        let last = self.words.len() - 1;
        self.words[last] &= tail_mask(self.n);
    }

    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Hamming distance; panics on length mismatch. See [`hamming_distance`]
    /// for the checked variant.
    #[inline]
    pub fn distance(&self, other: &Codeword) -> u32 {
        assert_eq!(self.n, other.n, "codeword length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(move |i| self.get(i))
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Codeword({self})")
    }
}

impl FromStr for Codeword {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Codeword::from_bits(&bits)
    }
}

/// Checked Hamming distance between two codewords.
pub fn hamming_distance(a: &Codeword, b: &Codeword) -> Result<u32> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.distance(b))
}

/// An ordered list of `m` codewords of common length `n`. Row index is the
/// bee identity (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    n: usize,
    rows: Vec<Codeword>,
}

impl Codebook {
    pub fn new(rows: Vec<Codeword>) -> Result<Self> {
        let n = match rows.first() {
            Some(r) => r.len(),
            None => return Err(Error::invalid("codebook needs at least one row")),
        };
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::invalid(format!(
                "row {i} has length {}, expected {n}",
                r.len()
            )));
        }
        Ok(Codebook { n, rows })
    }

    /// `m` rows of i.i.d. uniform bits.
    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("blocklength must be positive"));
        }
        if m == 0 {
            return Err(Error::invalid("codebook needs at least one row"));
        }
        let rows = (0..m)
            .map(|_| Codeword::random(n, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Codebook { n, rows })
    }

    /// Codebook with `n <= 64` whose row `j` is `values[j]` packed as in
    /// [`Codeword::from_u64`].
    pub fn from_u64s(values: &[u64], n: usize) -> Result<Self> {
        let rows = values
            .iter()
            .map(|&v| Codeword::from_u64(v, n))
            .collect::<Result<Vec<_>>>()?;
        Codebook::new(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Codeword] {
        &self.rows
    }

    pub fn row(&self, j: usize) -> &Codeword {
        &self.rows[j]
    }

    /// Minimum Hamming distance over pairs of distinct row indices.
    pub fn min_distance(&self) -> Result<u32> {
        if self.m() < 2 {
            return Err(Error::invalid("minimum distance needs at least two rows"));
        }
        let mut best = u32::MAX;
        for (i, a) in self.rows.iter().enumerate() {
            for b in &self.rows[i + 1..] {
                best = best.min(a.distance(b));
            }
        }
        Ok(best)
    }

    /// Parses the text format: one row of `0`/`1` per line. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut n = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Codeword = line.parse().map_err(|e| match e {
                Error::InvalidArgument(msg) => Error::Parse { line: line_no, msg },
                other => other,
            })?;
            match n {
                None => n = Some(row.len()),
                Some(n) if n != row.len() => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("row has length {}, expected {n}", row.len()),
                    })
                }
                Some(_) => {}
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "no codewords found".into(),
            });
        }
        Codebook::new(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Codebook::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.m() * (self.n + 1));
        for r in &self.rows {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }
}
