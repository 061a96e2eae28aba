//! Bit containers.
//!
//! Blocks hold one bit per byte. The decoder touches bits at scattered
//! (permuted) addresses, and byte addressing keeps that path branch free.

use serde::{Deserialize, Serialize};

/// An `S x S` binary matrix stored row-major, one bit per byte (0 or 1).
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    side: usize,
    cells: Vec<u8>,
}

impl Block {
    pub fn zeros(side: usize) -> Self {
        Self {
            side,
            cells: vec![0; side * side],
        }
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.side + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, bit: u8) {
        self.cells[row * self.side + col] = bit & 1;
    }

    #[inline]
    pub fn flip(&mut self, row: usize, col: usize) {
        self.cells[row * self.side + col] ^= 1;
    }

    /// Cells addressed by `row * S + col`.
    #[inline]
    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn cells_mut(&mut self) -> &mut [u8] {
        &mut self.cells
    }

    pub fn clear(&mut self) {
        self.cells.fill(0);
    }

    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(|&b| b == 0)
    }

    pub fn weight(&self) -> usize {
        self.cells.iter().map(|&b| b as usize).sum()
    }

    /// Appends columns `cols` to `out` in column-major order.
    pub fn write_columns(&self, cols: std::ops::Range<usize>, out: &mut Vec<u8>) {
        for col in cols {
            out.extend((0..self.side).map(|row| self.get(row, col)));
        }
    }

    /// Fills columns `cols` from `bits` in column-major order; returns the
    /// number of bits consumed.
    pub fn read_columns(&mut self, cols: std::ops::Range<usize>, bits: &[u8]) -> usize {
        let mut used = 0;
        for col in cols {
            for row in 0..self.side {
                self.set(row, col, bits[used]);
                used += 1;
            }
        }
        used
    }
}

impl std::fmt::Debug for Block {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Block({}x{})", self.side, self.side)?;
        for row in self.cells.chunks(self.side) {
            let line: String = row.iter().map(|&b| if b == 1 { '1' } else { '.' }).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// Packs a 0/1 byte-per-bit sequence MSB-first into bytes, zero padding the
/// final byte.
pub fn pack_msb(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        out[i / 8] |= (b & 1) << (7 - i % 8);
    }
    out
}

/// Unpacks `nbits` bits, MSB-first, from `bytes`.
pub fn unpack_msb(bytes: &[u8], nbits: usize) -> Vec<u8> {
    (0..nbits).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect()
}
