//! Sliding-window iterative decoding in the syndrome domain.
//!
//! The window holds `W` consecutive blocks of one frame. Every constraint
//! whose member blocks all lie in the window (or in the pinned all-zero
//! initialization blocks at the head of the frame) keeps one `r`-bit syndrome
//! per row. A correction flips one window bit and patches the syndromes of
//! the `M + 1` rows that contain it, so syndromes are never recomputed once a
//! constraint has entered the window.
//!
//! Each window position runs up to `iterations` passes over the tracked
//! constraints in increasing order, emits the oldest block and slides by one.

use std::ops::Range;

use crate::bits::Block;
use crate::component::{DecodeAction, Syndrome};
use crate::encoder::FrameLayout;
use crate::geometry::{BitCoord, Code};
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecodeStats {
    /// Corrections applied.
    pub flips: u64,
    /// Corrections that targeted a pinned (known-zero) bit and were dropped.
    pub suppressed: u64,
    /// Rows that still had a nonzero syndrome when their constraint left the
    /// window.
    pub residual_rows: u64,
    /// Passes over the window, summed over window positions.
    pub iterations: u64,
    /// Flips that set a bit to 1. Relative to the all-zero codeword these are
    /// exactly the miscorrections; only recorded when tracing is enabled.
    pub miscorrections: Vec<Miscorrection>,
}

impl DecodeStats {
    pub fn merge(&mut self, other: &DecodeStats) {
        self.flips += other.flips;
        self.suppressed += other.suppressed;
        self.residual_rows += other.residual_rows;
        self.iterations += other.iterations;
        self.miscorrections.extend_from_slice(&other.miscorrections);
    }
}

/// A correction that introduced an error, assuming the all-zero codeword was
/// sent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Miscorrection {
    pub constraint: usize,
    pub row: usize,
    /// Errors on that component word just before the decision.
    pub weight: usize,
}

/// Decoder state for one frame.
#[derive(Clone, Debug)]
pub struct WindowDecoder<'a> {
    code: &'a Code,
    layout: FrameLayout,
    side: usize,
    /// Ring of `W + d_M` blocks indexed by `block % capacity`, flat.
    blocks: Vec<u8>,
    capacity: usize,
    /// Ring of `W` constraints indexed by `constraint % W`, `S` syndromes each.
    syndromes: Vec<u32>,
    /// Oldest block in the window.
    start: usize,
    /// Next block to be received; the window is `start..next`.
    next: usize,
    /// First tracked constraint.
    first_constraint: usize,
    trace: bool,
    stats: DecodeStats,
}

impl<'a> WindowDecoder<'a> {
    pub fn new(code: &'a Code) -> Self {
        let p = code.params();
        let side = p.side;
        let capacity = p.window + code.span();
        Self {
            code,
            layout: FrameLayout::new(p),
            side,
            blocks: vec![0; capacity * side * side],
            capacity,
            syndromes: vec![0; p.window * side],
            start: code.span(),
            next: code.span(),
            first_constraint: code.span(),
            trace: false,
            stats: DecodeStats::default(),
        }
    }

    /// Records miscorrections relative to the all-zero codeword. Slow; for
    /// analysis only.
    pub fn with_miscorrection_trace(mut self) -> Self {
        self.trace = true;
        self
    }

    pub fn reset(&mut self) {
        self.blocks.fill(0);
        self.syndromes.fill(0);
        self.start = self.code.span();
        self.next = self.start;
        self.first_constraint = self.start;
        self.stats = DecodeStats::default();
    }

    pub fn code(&self) -> &Code {
        self.code
    }

    pub fn stats(&self) -> &DecodeStats {
        &self.stats
    }

    pub fn take_stats(&mut self) -> DecodeStats {
        std::mem::take(&mut self.stats)
    }

    /// Blocks currently in the window.
    pub fn window(&self) -> Range<usize> {
        self.start..self.next
    }

    /// Constraints whose syndromes are tracked.
    pub fn tracked(&self) -> Range<usize> {
        self.first_constraint..self.next
    }

    pub fn is_full(&self) -> bool {
        self.next - self.start == self.layout.window
    }

    /// Frame position of the oldest window block.
    pub fn oldest_frame_block(&self) -> usize {
        self.start - self.code.span()
    }

    /// Whether every frame block has been received.
    pub fn frame_received(&self) -> bool {
        self.next - self.code.span() == self.layout.frame_len
    }

    /// Cells of `block`, if it is in the window or is an initialization block
    /// still held.
    pub fn block_cells(&self, block: usize) -> Option<&[u8]> {
        let held = block < self.next
            && (block >= self.start
                || (block < self.code.span() && block + self.capacity >= self.next));
        held.then(|| {
            let s2 = self.side * self.side;
            let slot = block % self.capacity;
            &self.blocks[slot * s2..(slot + 1) * s2]
        })
    }

    /// Stored syndrome of a tracked row.
    pub fn syndrome(&self, constraint: usize, row: usize) -> Option<Syndrome> {
        (self.tracked().contains(&constraint) && row < self.side)
            .then(|| Syndrome(self.syndromes[(constraint % self.layout.window) * self.side + row]))
    }

    /// True for initialization bits and the information region of
    /// terminated blocks.
    #[inline]
    pub fn is_pinned(&self, bit: BitCoord) -> bool {
        let span = self.code.span();
        bit.block < span
            || (self.layout.is_terminated(bit.block - span) && bit.col < self.layout.info_cols())
    }

    /// Accepts the next frame block as it came off the channel (column-major,
    /// terminated blocks carrying parity columns only).
    pub fn push_received(&mut self, bits: &[u8]) -> Result<()> {
        let f = self.next - self.code.span();
        if f >= self.layout.frame_len {
            return Err(Error::Format("frame already complete".into()));
        }
        let expected = self.layout.transmitted_bits(f);
        if bits.len() != expected {
            return Err(Error::LengthMismatch {
                what: "received bits for block",
                expected,
                actual: bits.len(),
            });
        }
        let s = self.side;
        let cols = self.layout.transmitted_cols(f);
        let cells = self.slot_mut(self.next);
        cells.fill(0);
        for (c, col) in cols.enumerate() {
            for row in 0..s {
                cells[row * s + col] = bits[c * s + row] & 1;
            }
        }
        self.admit();
        Ok(())
    }

    /// Accepts the next frame block as a matrix. For terminated blocks the
    /// information columns are forced to zero.
    pub fn push_block(&mut self, block: &Block) -> Result<()> {
        let f = self.next - self.code.span();
        if f >= self.layout.frame_len {
            return Err(Error::Format("frame already complete".into()));
        }
        if block.side() != self.side {
            return Err(Error::LengthMismatch {
                what: "block side",
                expected: self.side,
                actual: block.side(),
            });
        }
        let s = self.side;
        let info_cols = self.layout.info_cols();
        let terminated = self.layout.is_terminated(f);
        let cells = self.slot_mut(self.next);
        cells.copy_from_slice(block.cells());
        if terminated {
            for row in cells.chunks_mut(s) {
                row[..info_cols].fill(0);
            }
        }
        self.admit();
        Ok(())
    }

    fn slot_mut(&mut self, block: usize) -> &mut [u8] {
        let s2 = self.side * self.side;
        let slot = block % self.capacity;
        &mut self.blocks[slot * s2..(slot + 1) * s2]
    }

    /// Starts tracking the constraint ending at the newly stored block.
    fn admit(&mut self) {
        let m = self.next;
        self.next += 1;
        let code = self.code;
        let s = self.side;
        let s2 = s * s;
        let base = (m % self.layout.window) * s;
        for i in 0..s {
            let mut syn = 0;
            for (k, &d) in code.marks().iter().enumerate() {
                let slot = (m - d) % self.capacity;
                syn ^= code.segment_syndrome(k, i, &self.blocks[slot * s2..(slot + 1) * s2]);
            }
            self.syndromes[base + i] = syn;
        }
    }

    /// One pass over all tracked constraints. Returns the number of flips.
    pub fn iterate(&mut self) -> usize {
        let comp = self.code.component();
        let s = self.side;
        let w = self.layout.window;
        let mut flips = 0;
        for m in self.tracked() {
            let base = (m % w) * s;
            for i in 0..s {
                let syn = self.syndromes[base + i];
                if syn == 0 {
                    continue;
                }
                if let DecodeAction::FlipAt(p) = comp.decide(Syndrome(syn)) {
                    let bit = self.code.member(m, i, p);
                    if self.is_pinned(bit) {
                        self.stats.suppressed += 1;
                        continue;
                    }
                    debug_assert!(bit.block >= self.start && bit.block < self.next);
                    if self.trace {
                        self.trace_flip(m, i, bit);
                    }
                    self.flip(bit);
                    flips += 1;
                }
            }
        }
        self.stats.iterations += 1;
        self.stats.flips += flips as u64;
        flips
    }

    fn trace_flip(&mut self, constraint: usize, row: usize, bit: BitCoord) {
        if self.cell(bit) == 1 {
            return;
        }
        let weight = (0..self.code.component().len())
            .map(|p| self.cell(self.code.member(constraint, row, p)) as usize)
            .sum();
        self.stats.miscorrections.push(Miscorrection {
            constraint,
            row,
            weight,
        });
    }

    #[inline]
    fn cell(&self, bit: BitCoord) -> u8 {
        let s = self.side;
        self.blocks[(bit.block % self.capacity) * s * s + bit.row * s + bit.col]
    }

    /// Flips a window bit and patches every tracked syndrome containing it.
    #[inline]
    fn flip(&mut self, bit: BitCoord) {
        let code = self.code;
        let s = self.side;
        let w = self.layout.window;
        let m_max = code.memory();
        let cell = bit.row * s + bit.col;
        self.blocks[(bit.block % self.capacity) * s * s + cell] ^= 1;
        let cols = code.component().columns();
        for (k, &d) in code.marks().iter().enumerate() {
            let m = bit.block + d;
            if m < self.first_constraint || m >= self.next {
                continue;
            }
            let src = code.perms().inverse(k)[cell] as usize;
            let (row, j) = (src / s, src % s);
            self.syndromes[(m % w) * s + row] ^= cols[(m_max - k) * s + j];
        }
    }

    /// Flips a received bit inside the window and patches the tracked
    /// syndromes, as if the channel had flipped it.
    pub fn toggle(&mut self, bit: BitCoord) -> Result<()> {
        if !self.window().contains(&bit.block) || bit.row >= self.side || bit.col >= self.side {
            return Err(Error::Domain(format!(
                "bit {bit:?} is outside the window of blocks {:?}",
                self.window()
            )));
        }
        self.flip(bit);
        Ok(())
    }

    /// Runs up to the configured number of iterations, stopping early once a
    /// pass makes no change.
    pub fn decode_position(&mut self) -> usize {
        let mut total = 0;
        for _ in 0..self.code.params().iterations {
            let flips = self.iterate();
            total += flips;
            if flips == 0 {
                break;
            }
        }
        total
    }

    /// Cells of the oldest window block.
    pub fn oldest(&self) -> &[u8] {
        self.block_cells(self.start).expect("window is not empty")
    }

    /// Appends the information columns of the oldest block, column-major.
    pub fn emit_oldest(&self, out: &mut Vec<u8>) {
        let s = self.side;
        let cells = self.oldest();
        for col in 0..self.layout.info_cols() {
            out.extend((0..s).map(|row| cells[row * s + col]));
        }
    }

    /// Drops the oldest block and every constraint that referenced it.
    pub fn slide(&mut self) {
        assert!(self.next > self.start, "slide on an empty window");
        self.start += 1;
        let new_first = (self.start + self.code.span()).max(self.first_constraint);
        let s = self.side;
        let w = self.layout.window;
        for m in self.first_constraint..new_first.min(self.next) {
            let base = (m % w) * s;
            self.stats.residual_rows += self.syndromes[base..base + s]
                .iter()
                .filter(|&&x| x != 0)
                .count() as u64;
        }
        self.first_constraint = new_first;
    }

    /// Call after every received block. While the window is still filling,
    /// decodes the partial window. Once it is full, decodes the current
    /// position if it still has information to emit, appends that
    /// information to `out` and slides. Returns whether information was
    /// emitted.
    pub fn step(&mut self, out: &mut Vec<u8>) -> bool {
        if !self.is_full() {
            self.decode_position();
            return false;
        }
        let emitting = !self.layout.is_terminated(self.oldest_frame_block());
        if emitting {
            self.decode_position();
            self.emit_oldest(out);
        }
        self.slide();
        emitting
    }
}

/// Decodes one received frame. Returns the information bits (one per byte,
/// in encoder order) and the decoder statistics.
pub fn decode_frame(code: &Code, received: &[u8]) -> Result<(Vec<u8>, DecodeStats)> {
    let layout = FrameLayout::new(code.params());
    if received.len() != layout.transmitted_bits_per_frame() {
        return Err(Error::LengthMismatch {
            what: "received bits per frame",
            expected: layout.transmitted_bits_per_frame(),
            actual: received.len(),
        });
    }
    let mut dec = WindowDecoder::new(code);
    let mut out = Vec::with_capacity(layout.info_bits_per_frame());
    let mut offset = 0;
    for f in 0..layout.frame_len {
        let n = layout.transmitted_bits(f);
        dec.push_received(&received[offset..offset + n])?;
        offset += n;
        dec.step(&mut out);
    }
    debug_assert_eq!(out.len(), layout.info_bits_per_frame());
    Ok((out, dec.take_stats()))
}
