//! Packed bitstrings and populations.
//!
//! Bit position `i` (0-based) of a [`BitString`] corresponds to position
//! `i + 1` in the usual 1-indexed notation `x_1 .. x_n`, and is stored as bit
//! `i % 64` of word `i / 64`. Bits past `len` in the last word are always zero.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut x = Self {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        x.clear_tail();
        x
    }

    /// Uniformly random string: every bit is an independent fair coin.
    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut x = Self {
            len,
            words: (0..words_for(len)).map(|_| rng.next_u64()).collect(),
        };
        x.clear_tail();
        x
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut x = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                x.set(i, true);
            }
        }
        x
    }

    /// Builds the string whose bit `i` is bit `i` of `value` (n ≤ 64).
    pub fn from_index(len: usize, value: u64) -> Self {
        assert!(len <= WORD, "from_index supports at most 64 bits");
        let mut x = Self::zeros(len);
        if len > 0 {
            x.words[0] = value;
            x.clear_tail();
        }
        x
    }

    /// Inverse of [`BitString::from_index`].
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= WORD, "to_index supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    pub fn complement(&self) -> Self {
        let mut x = Self {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        x.clear_tail();
        x
    }

    /// Iterates over the indices of the one-bits in increasing order.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * WORD + tz)
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Copies `other` into `self` without reallocating when lengths agree.
    pub fn copy_from(&mut self, other: &BitString) {
        self.len = other.len;
        self.words.clone_from(&other.words);
    }

    pub fn check_len(&self, expected: usize) -> Result<()> {
        if self.len == expected {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected,
                actual: self.len,
            })
        }
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

/// Number of positions where `x` and `y` differ.
pub fn hamming(x: &BitString, y: &BitString) -> Result<usize> {
    y.check_len(x.len())?;
    Ok(x.words
        .iter()
        .zip(&y.words)
        .map(|(a, b)| (a ^ b).count_ones() as usize)
        .sum())
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    /// Parses `"0110"`; the first character is position 1.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "bitstring contains '{other}'"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered vector of `λ` bitstrings of common length `n`.
///
/// Member order is meaningful: selection probabilities and the index vector
/// `I_t` refer to positions in this vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Population {
    n: usize,
    members: Vec<BitString>,
}

impl Population {
    pub fn new(members: Vec<BitString>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidParameter("population must be non-empty".into()));
        };
        let n = first.len();
        for x in &members {
            x.check_len(n)?;
        }
        Ok(Self { n, members })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[BitString] {
        &self.members
    }

    pub fn get(&self, i: usize) -> &BitString {
        &self.members[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BitString> {
        self.members.iter()
    }

    pub fn into_members(self) -> Vec<BitString> {
        self.members
    }

    pub(crate) fn members_mut(&mut self) -> &mut [BitString] {
        &mut self.members
    }
}

/// Samples `P_0` uniformly from `({0,1}^n)^λ`.
pub fn new_random_population<R: RngCore + ?Sized>(n: usize, lambda: usize, rng: &mut R) -> Population {
    assert!(n >= 1 && lambda >= 1, "n and lambda must be positive");
    Population {
        n,
        members: (0..lambda).map(|_| BitString::random(n, rng)).collect(),
    }
}
