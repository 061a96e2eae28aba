//! Shortened extended Hamming component code.
//!
//! Column layout: the parent code of length `2^(r-1)` has one column per
//! `(r-1)`-bit label `l`, namely `l | 1 << (r-1)` (the top bit is the overall
//! parity row). The parity positions are the last `r` codeword positions and
//! carry the labels `1, 2, 4, ..., 2^(r-2), 0` in that order, which makes the
//! parity submatrix trivially invertible. The remaining `n - r` positions take
//! the smallest non-pivot labels in increasing order; every other label is
//! shortened away.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const INVALID: u32 = u32::MAX;

/// An `r`-bit syndrome. Bit `r - 1` is the overall-parity check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Syndrome(pub u32);

impl Syndrome {
    pub const ZERO: Syndrome = Syndrome(0);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::BitXor for Syndrome {
    type Output = Syndrome;

    fn bitxor(self, rhs: Syndrome) -> Syndrome {
        Syndrome(self.0 ^ rhs.0)
    }
}

impl std::ops::BitXorAssign for Syndrome {
    fn bitxor_assign(&mut self, rhs: Syndrome) {
        self.0 ^= rhs.0;
    }
}

/// Bounded-distance decoding decision for one component word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeAction {
    NoError,
    FlipAt(usize),
    DetectedUncorrectable,
}

#[derive(Clone, Debug)]
pub struct ComponentCode {
    n: usize,
    r: usize,
    columns: Vec<u32>,
    /// Label -> position, `INVALID` for shortened labels.
    position_of_label: Vec<u32>,
    top: u32,
    label_mask: u32,
}

/// Parity bits needed for a code of length `n`: `ceil(log2 n) + 1`.
pub fn parity_bits_for_length(n: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < n {
        bits += 1;
    }
    bits + 1
}

impl ComponentCode {
    /// Component code for block side `side` and memory `memory`, of length
    /// `(memory + 1) * side`.
    pub fn build(side: usize, memory: usize) -> Result<Self> {
        Self::with_length(
            side.checked_mul(memory + 1)
                .ok_or_else(|| Error::InvalidParams("component length overflows".into()))?,
        )
    }

    pub fn with_length(n: usize) -> Result<Self> {
        let r = parity_bits_for_length(n);
        if r > 31 {
            return Err(Error::InvalidParams(format!(
                "component length {n} needs {r} parity bits, at most 31 supported"
            )));
        }
        if n < r + 1 {
            return Err(Error::InvalidParams(format!(
                "component length {n} leaves no information bits with {r} parity bits"
            )));
        }
        let parent_len = 1usize << (r - 1);
        let top = 1u32 << (r - 1);
        let pivots: Vec<u32> = (0..r - 1).map(|b| 1u32 << b).chain([0]).collect();
        let mut labels: Vec<u32> = (1..parent_len as u32)
            .filter(|l| !l.is_power_of_two())
            .take(n - r)
            .collect();
        debug_assert_eq!(labels.len(), n - r);
        labels.extend_from_slice(&pivots);

        let mut position_of_label = vec![INVALID; parent_len];
        for (p, &l) in labels.iter().enumerate() {
            position_of_label[l as usize] = p as u32;
        }
        Ok(Self {
            n,
            r,
            columns: labels.iter().map(|&l| l | top).collect(),
            position_of_label,
            top,
            label_mask: top - 1,
        })
    }

    /// Code length `n`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of parity bits `r`.
    #[inline]
    pub fn parity_bits(&self) -> usize {
        self.r
    }

    pub fn info_len(&self) -> usize {
        self.n - self.r
    }

    /// Length of the parent extended Hamming code, `2^(r-1)`.
    pub fn parent_len(&self) -> usize {
        1 << (self.r - 1)
    }

    /// Number of parent positions removed by shortening.
    pub fn shortened(&self) -> usize {
        self.parent_len() - self.n
    }

    pub fn column_of(&self, p: usize) -> Result<u32> {
        self.columns
            .get(p)
            .copied()
            .ok_or(Error::OutOfRange {
                position: p,
                len: self.n,
            })
    }

    /// Unchecked column access for the decoder hot path.
    #[inline]
    pub fn column(&self, p: usize) -> u32 {
        self.columns[p]
    }

    pub fn columns(&self) -> &[u32] {
        &self.columns
    }

    pub fn syndrome(&self, word: &[u8]) -> Result<Syndrome> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                what: "codeword bits",
                expected: self.n,
                actual: word.len(),
            });
        }
        Ok(Syndrome(
            word.iter()
                .zip(&self.columns)
                .filter(|(&b, _)| b & 1 == 1)
                .fold(0, |s, (_, &c)| s ^ c),
        ))
    }

    /// Parity bits completing a word whose first `n - r` positions contribute
    /// `partial` to the syndrome. Bit `k` of the result is the bit at
    /// position `n - r + k`.
    #[inline]
    pub fn parity_for(&self, partial: Syndrome) -> u32 {
        let low = partial.0 & self.label_mask;
        let top_bit = ((partial.0 & self.top) != 0) as u32;
        let last = top_bit ^ (low.count_ones() & 1);
        low | (last << (self.r - 1))
    }

    pub fn encode_parity(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.n - self.r {
            return Err(Error::LengthMismatch {
                what: "information bits",
                expected: self.n - self.r,
                actual: info.len(),
            });
        }
        let partial = info
            .iter()
            .zip(&self.columns)
            .filter(|(&b, _)| b & 1 == 1)
            .fold(0, |s, (_, &c)| s ^ c);
        let bits = self.parity_for(Syndrome(partial));
        Ok((0..self.r).map(|k| ((bits >> k) & 1) as u8).collect())
    }

    #[inline]
    pub fn decide(&self, s: Syndrome) -> DecodeAction {
        if s.0 == 0 {
            return DecodeAction::NoError;
        }
        if s.0 & self.top == 0 {
            return DecodeAction::DetectedUncorrectable;
        }
        match self.position_of_label[(s.0 & self.label_mask) as usize] {
            INVALID => DecodeAction::DetectedUncorrectable,
            p => DecodeAction::FlipAt(p as usize),
        }
    }
}
