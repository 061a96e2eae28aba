//! Recursive block encoder and terminated frame encoding.
//!
//! Wire order within a frame: blocks in order; a full block is sent
//! column-major over all `S` columns (information columns first, then parity);
//! a terminated block sends only its `r` parity columns, column-major.

use std::collections::VecDeque;

use crate::bits::Block;
use crate::component::Syndrome;
use crate::geometry::{Code, CodeParams};
use crate::{Error, Result};

/// Frame bookkeeping derived from the parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameLayout {
    pub side: usize,
    pub parity_bits: usize,
    pub frame_len: usize,
    pub window: usize,
}

impl FrameLayout {
    pub fn new(params: &CodeParams) -> Self {
        Self {
            side: params.side,
            parity_bits: params.parity_bits,
            frame_len: params.frame_len,
            window: params.window,
        }
    }

    pub fn info_cols(&self) -> usize {
        self.side - self.parity_bits
    }

    /// Number of blocks carrying information, `F - W`.
    pub fn info_blocks(&self) -> usize {
        self.frame_len - self.window
    }

    /// The last `W` blocks of a frame carry parity only.
    pub fn is_terminated(&self, frame_block: usize) -> bool {
        frame_block >= self.info_blocks()
    }

    pub fn info_bits_per_block(&self) -> usize {
        self.side * self.info_cols()
    }

    pub fn info_bits_per_frame(&self) -> usize {
        self.info_bits_per_block() * self.info_blocks()
    }

    pub fn transmitted_bits(&self, frame_block: usize) -> usize {
        if self.is_terminated(frame_block) {
            self.side * self.parity_bits
        } else {
            self.side * self.side
        }
    }

    pub fn transmitted_bits_per_frame(&self) -> usize {
        self.side * (self.side * self.info_blocks() + self.window * self.parity_bits)
    }

    /// Columns of a block that go on the wire.
    pub fn transmitted_cols(&self, frame_block: usize) -> std::ops::Range<usize> {
        if self.is_terminated(frame_block) {
            self.info_cols()..self.side
        } else {
            0..self.side
        }
    }
}

/// Encoder state: the last `d_M` encoded blocks, starting from the all-zero
/// initialization blocks.
#[derive(Clone, Debug)]
pub struct BlockEncoder<'a> {
    code: &'a Code,
    history: VecDeque<Block>,
    next_block: usize,
}

impl<'a> BlockEncoder<'a> {
    pub fn new(code: &'a Code) -> Self {
        let span = code.span();
        Self {
            code,
            history: (0..span).map(|_| Block::zeros(code.side())).collect(),
            next_block: span,
        }
    }

    /// Index of the next block to be produced (blocks `0..d_M` are the
    /// initialization blocks).
    pub fn next_block(&self) -> usize {
        self.next_block
    }

    pub fn reset(&mut self) {
        for b in &mut self.history {
            b.clear();
        }
        self.next_block = self.code.span();
    }

    /// Completes `block` by writing its parity columns from its information
    /// columns and the encoder history, then advances the state.
    pub fn encode_block(&mut self, mut block: Block) -> Result<Block> {
        let code = self.code;
        let s = code.side();
        if block.side() != s {
            return Err(Error::LengthMismatch {
                what: "block side",
                expected: s,
                actual: block.side(),
            });
        }
        let m = code.memory();
        let comp = code.component();
        let r = comp.parity_bits();
        let info_cols = s - r;
        let span = code.span();
        let cols = comp.columns();

        for i in 0..s {
            let mut partial = 0u32;
            for k in 1..=m {
                partial ^= code.segment_syndrome(k, i, self.history[span - code.marks()[k]].cells());
            }
            let row = &block.cells()[i * s..i * s + info_cols];
            for (&bit, &col) in row.iter().zip(&cols[m * s..]) {
                partial ^= col & (bit as u32).wrapping_neg();
            }
            let parity = comp.parity_for(Syndrome(partial));
            let out = &mut block.cells_mut()[i * s + info_cols..(i + 1) * s];
            for (t, bit) in out.iter_mut().enumerate() {
                *bit = ((parity >> t) & 1) as u8;
            }
        }

        if span > 0 {
            self.history.pop_front();
            self.history.push_back(block.clone());
        }
        self.next_block += 1;
        Ok(block)
    }

    /// Encodes a block with all-zero information columns.
    pub fn encode_zero(&mut self) -> Result<Block> {
        self.encode_block(Block::zeros(self.code.side()))
    }
}

/// Encodes one terminated frame. `info` holds `S (S - r) (F - W)` bits, one
/// per byte, block by block and column-major within a block.
pub fn encode_frame(code: &Code, info: &[u8]) -> Result<Vec<u8>> {
    let layout = FrameLayout::new(code.params());
    if info.len() != layout.info_bits_per_frame() {
        return Err(Error::LengthMismatch {
            what: "information bits per frame",
            expected: layout.info_bits_per_frame(),
            actual: info.len(),
        });
    }
    let mut enc = BlockEncoder::new(code);
    let mut out = Vec::with_capacity(layout.transmitted_bits_per_frame());
    let per_block = layout.info_bits_per_block();
    for f in 0..layout.frame_len {
        let mut block = Block::zeros(code.side());
        if !layout.is_terminated(f) {
            block.read_columns(0..layout.info_cols(), &info[f * per_block..(f + 1) * per_block]);
        }
        let block = enc.encode_block(block)?;
        block.write_columns(layout.transmitted_cols(f), &mut out);
    }
    Ok(out)
}

/// Encodes a frame and also returns every block (initialization blocks
/// included), indexed as in [`Code::constraint_members`].
pub fn encode_frame_blocks(code: &Code, info: &[u8]) -> Result<Vec<Block>> {
    let layout = FrameLayout::new(code.params());
    if info.len() != layout.info_bits_per_frame() {
        return Err(Error::LengthMismatch {
            what: "information bits per frame",
            expected: layout.info_bits_per_frame(),
            actual: info.len(),
        });
    }
    let mut enc = BlockEncoder::new(code);
    let mut blocks: Vec<Block> = (0..code.span()).map(|_| Block::zeros(code.side())).collect();
    let per_block = layout.info_bits_per_block();
    for f in 0..layout.frame_len {
        let mut block = Block::zeros(code.side());
        if !layout.is_terminated(f) {
            block.read_columns(0..layout.info_cols(), &info[f * per_block..(f + 1) * per_block]);
        }
        blocks.push(enc.encode_block(block)?);
    }
    Ok(blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::PermKind;

    fn code() -> Code {
        Code::new(CodeParams::with_optimal_ruler(47, 4, PermKind::Involution, 70, 48, 2).unwrap())
            .unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let code = code();
        let mut enc = BlockEncoder::new(&code);
        for _ in 0..20 {
            assert!(enc.encode_zero().unwrap().is_zero());
        }
        let layout = FrameLayout::new(code.params());
        let tx = encode_frame(&code, &vec![0; layout.info_bits_per_frame()]).unwrap();
        assert_eq!(tx.len(), 47 * (47 * 22 + 48 * 9));
        assert!(tx.iter().all(|&b| b == 0));
    }

    #[test]
    fn wrong_lengths_rejected() {
        let code = code();
        assert!(encode_frame(&code, &[0; 3]).is_err());
        let mut enc = BlockEncoder::new(&code);
        assert!(enc.encode_block(Block::zeros(5)).is_err());
    }

    #[test]
    fn layout_counts() {
        let p = CodeParams::reference_configs()[4].clone();
        let l = FrameLayout::new(&p);
        assert_eq!(l.info_bits_per_frame(), 47 * 38 * 864);
        assert_eq!(l.transmitted_bits_per_frame(), p.transmitted_bits_per_frame());
        assert!(!l.is_terminated(863));
        assert!(l.is_terminated(864));
        let total: usize = (0..p.frame_len).map(|f| l.transmitted_bits(f)).sum();
        assert_eq!(total, l.transmitted_bits_per_frame());
    }
}
