//! Monte-Carlo BER measurement over a binary symmetric channel.
//!
//! Frames are independent: each one is encoded, corrupted and decoded from
//! scratch with randomness drawn from a ChaCha stream keyed by
//! `(base_seed, point index)` and positioned at the frame index. Frames are
//! processed in fixed-size batches and stop rules are only evaluated between
//! batches, so every count is independent of the number of worker threads.

use std::collections::VecDeque;
use std::io::Write;
use std::ops::Range;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Block;
use crate::channel;
use crate::decoder::WindowDecoder;
use crate::encoder::{BlockEncoder, FrameLayout};
use crate::geometry::{Code, CodeParams};
use crate::{Error, Result};

/// Frames per batch between stop-rule checks.
pub const BATCH_FRAMES: u64 = 8;

pub const DEFAULT_MIN_BIT_ERRORS: u64 = 100;
pub const DEFAULT_MAX_BITS: u64 = 10_000_000_000;

/// A channel operating point, given either way.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelSpec {
    /// BSC crossover probability.
    Crossover(f64),
    /// Gap to the hard-decision Shannon limit at the code's block rate.
    GapDb(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopRules {
    pub max_frames: Option<u64>,
    pub max_bits: Option<u64>,
    pub min_bit_errors: Option<u64>,
}

impl Default for StopRules {
    fn default() -> Self {
        Self {
            max_frames: None,
            max_bits: Some(DEFAULT_MAX_BITS),
            min_bit_errors: Some(DEFAULT_MIN_BIT_ERRORS),
        }
    }
}

impl StopRules {
    fn frame_cap(&self, info_bits_per_frame: u64) -> Result<u64> {
        let by_bits = self.max_bits.map(|b| b.div_ceil(info_bits_per_frame));
        match (self.max_frames, by_bits) {
            (Some(a), Some(b)) => Ok(a.min(b)),
            (Some(a), None) | (None, Some(a)) => Ok(a),
            (None, None) => Err(Error::InvalidParams(
                "stop rules need max_frames or max_bits".into(),
            )),
        }
    }
}

/// Information bits fed to the encoder.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMode {
    /// Uniformly random information.
    #[default]
    Random,
    /// All-zero codewords; skips encoding. By linearity of the code and of
    /// the syndrome decoder this gives the same error counts as `Random` for
    /// the same noise.
    AllZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub params: CodeParams,
    pub points: Vec<ChannelSpec>,
    pub stop: StopRules,
    pub base_seed: u64,
    #[serde(default)]
    pub info_mode: InfoMode,
}

/// Counts from one or more frames.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameCounts {
    pub info_bits: u64,
    pub bit_errors: u64,
    pub frames: u64,
    pub frame_errors: u64,
    pub channel_flips: u64,
    pub decoder_flips: u64,
    pub residual_rows: u64,
}

impl std::ops::Add for FrameCounts {
    type Output = FrameCounts;

    fn add(self, o: FrameCounts) -> FrameCounts {
        FrameCounts {
            info_bits: self.info_bits + o.info_bits,
            bit_errors: self.bit_errors + o.bit_errors,
            frames: self.frames + o.frames,
            frame_errors: self.frame_errors + o.frame_errors,
            channel_flips: self.channel_flips + o.channel_flips,
            decoder_flips: self.decoder_flips + o.decoder_flips,
            residual_rows: self.residual_rows + o.residual_rows,
        }
    }
}

/// Result for one operating point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointResult {
    pub params: CodeParams,
    pub rate: f64,
    pub gap_db: f64,
    pub crossover: f64,
    pub counts: FrameCounts,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seconds: f64,
    pub bits_per_sec: f64,
    pub workers: usize,
}

impl PointResult {
    pub fn bits_per_sec_per_core(&self) -> f64 {
        self.bits_per_sec / self.workers.max(1) as f64
    }
}

/// 95% confidence interval for `errors / bits`: normal approximation, or the
/// exact one-sided bound `1 - 0.05^(1/n)` when no errors were seen.
pub fn confidence_interval(errors: u64, bits: u64) -> (f64, f64) {
    if bits == 0 {
        return (0.0, 1.0);
    }
    let n = bits as f64;
    if errors == 0 {
        return (0.0, -(0.05f64.ln() / n).exp_m1());
    }
    let p = errors as f64 / n;
    let half = 1.96 * (p * (1.0 - p) / n).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

/// Per-block channel corruption.
pub trait Noise {
    /// Corrupts the transmitted columns `cols` of frame block `frame_block`.
    /// Returns the number of flips.
    fn corrupt(&mut self, frame_block: usize, block: &mut Block, cols: Range<usize>) -> u64;
}

/// Independent flips with probability `p`, drawn as geometric gaps over the
/// frame's transmitted bit stream.
pub struct BscNoise<'r, R: Rng> {
    rng: &'r mut R,
    gaps: Option<Geometric>,
    /// Transmitted bits to skip before the next flip.
    until_flip: u64,
}

impl<'r, R: Rng> BscNoise<'r, R> {
    pub fn new(p: f64, rng: &'r mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("crossover {p} outside [0, 1]")));
        }
        let gaps = (p > 0.0)
            .then(|| Geometric::new(p).map_err(|e| Error::Domain(e.to_string())))
            .transpose()?;
        let until_flip = match &gaps {
            Some(g) => g.sample(rng),
            None => u64::MAX,
        };
        Ok(Self {
            rng,
            gaps,
            until_flip,
        })
    }
}

impl<R: Rng> Noise for BscNoise<'_, R> {
    fn corrupt(&mut self, _frame_block: usize, block: &mut Block, cols: Range<usize>) -> u64 {
        let s = block.side();
        let n = (cols.len() * s) as u64;
        let Some(gaps) = &self.gaps else { return 0 };
        let mut pos = 0u64;
        let mut flips = 0;
        while self.until_flip < n - pos {
            pos += self.until_flip;
            let t = pos as usize;
            block.flip(t % s, cols.start + t / s);
            flips += 1;
            pos += 1;
            self.until_flip = gaps.sample(self.rng);
        }
        self.until_flip -= n - pos;
        flips
    }
}

/// Flips listed `(frame block, row, col)` cells. For tests.
#[derive(Clone, Debug, Default)]
pub struct ScriptedNoise {
    pub flips: Vec<(usize, usize, usize)>,
}

impl Noise for ScriptedNoise {
    fn corrupt(&mut self, frame_block: usize, block: &mut Block, cols: Range<usize>) -> u64 {
        let mut n = 0;
        for &(f, row, col) in &self.flips {
            if f == frame_block && cols.contains(&col) {
                block.flip(row, col);
                n += 1;
            }
        }
        n
    }
}

/// Reusable per-worker encoder/decoder pair.
pub struct FrameSimulator<'a> {
    code: &'a Code,
    layout: FrameLayout,
    mode: InfoMode,
    decoder: WindowDecoder<'a>,
    truth: VecDeque<Block>,
}

impl<'a> FrameSimulator<'a> {
    pub fn new(code: &'a Code, mode: InfoMode) -> Self {
        Self {
            code,
            layout: FrameLayout::new(code.params()),
            mode,
            decoder: WindowDecoder::new(code),
            truth: VecDeque::new(),
        }
    }

    /// Runs one frame: information from `info_rng`, corruption from `noise`.
    pub fn run_frame<R: RngCore>(&mut self, info_rng: &mut R, noise: &mut impl Noise) -> FrameCounts {
        let code = self.code;
        let s = code.side();
        let info_cols = self.layout.info_cols();
        let mut encoder = BlockEncoder::new(code);
        self.decoder.reset();
        self.truth.clear();
        let mut counts = FrameCounts {
            frames: 1,
            ..Default::default()
        };

        for f in 0..self.layout.frame_len {
            let terminated = self.layout.is_terminated(f);
            let sent = match (self.mode, terminated) {
                (InfoMode::Random, false) => {
                    let mut block = Block::zeros(s);
                    for row in block.cells_mut().chunks_mut(s) {
                        fill_random_bits(info_rng, &mut row[..info_cols]);
                    }
                    encoder.encode_block(block).expect("block side matches")
                }
                (InfoMode::Random, true) => encoder.encode_zero().expect("block side matches"),
                (InfoMode::AllZero, _) => Block::zeros(s),
            };
            let mut received = sent.clone();
            counts.channel_flips += noise.corrupt(f, &mut received, self.layout.transmitted_cols(f));
            self.truth.push_back(sent);
            self.decoder.push_block(&received).expect("block side matches");

            if !self.decoder.is_full() {
                self.decoder.decode_position();
            } else {
                let emitting = !self.layout.is_terminated(self.decoder.oldest_frame_block());
                if emitting {
                    self.decoder.decode_position();
                    let truth = self.truth.front().expect("truth tracks window");
                    let decoded = self.decoder.oldest();
                    let errors: u64 = decoded
                        .chunks(s)
                        .zip(truth.cells().chunks(s))
                        .map(|(d, t)| {
                            d[..info_cols]
                                .iter()
                                .zip(&t[..info_cols])
                                .filter(|(a, b)| a != b)
                                .count() as u64
                        })
                        .sum();
                    counts.bit_errors += errors;
                    counts.info_bits += (s * info_cols) as u64;
                }
                self.decoder.slide();
                self.truth.pop_front();
            }
        }
        let stats = self.decoder.take_stats();
        counts.decoder_flips = stats.flips;
        counts.residual_rows = stats.residual_rows;
        counts.frame_errors = (counts.bit_errors > 0) as u64;
        counts
    }
}

fn fill_random_bits<R: RngCore>(rng: &mut R, out: &mut [u8]) {
    for chunk in out.chunks_mut(64) {
        let word = rng.next_u64();
        for (i, b) in chunk.iter_mut().enumerate() {
            *b = ((word >> i) & 1) as u8;
        }
    }
}

/// Generator for frame `frame` of point `point`.
pub fn frame_rng(base_seed: u64, point: u64, frame: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&base_seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    key[16..24].copy_from_slice(b"gsc-sim1");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(frame);
    rng
}

/// Resolves a channel spec to `(gap_db, crossover)` at `rate`. Crossovers
/// at or beyond the Shannon limit get a NaN gap; zero gets `+inf`.
pub fn resolve_point(rate: f64, spec: ChannelSpec) -> Result<(f64, f64)> {
    match spec {
        ChannelSpec::GapDb(g) => Ok((g, channel::gap_to_crossover(rate, g)?)),
        ChannelSpec::Crossover(p) => {
            if !(0.0..=0.5).contains(&p) {
                return Err(Error::Domain(format!("crossover {p} outside [0, 1/2]")));
            }
            if p == 0.0 {
                return Ok((f64::INFINITY, 0.0));
            }
            match channel::crossover_to_gap(rate, p) {
                Ok(g) => Ok((g, p)),
                Err(Error::AboveLimit { .. }) => Ok((f64::NAN, p)),
                Err(e) => Err(e),
            }
        }
    }
}

/// Simulates one operating point. `workers = 0` uses all available cores.
pub fn run_point(spec: &SweepSpec, point: usize, workers: usize) -> Result<PointResult> {
    let code = Code::new(spec.params.clone())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    let workers = pool.current_num_threads();
    run_point_in(&code, spec, point, &pool, workers)
}

fn run_point_in(
    code: &Code,
    spec: &SweepSpec,
    point: usize,
    pool: &rayon::ThreadPool,
    workers: usize,
) -> Result<PointResult> {
    let channel_spec = *spec
        .points
        .get(point)
        .ok_or_else(|| Error::InvalidParams(format!("no point {point}")))?;
    let rate = channel::rate_to::<f64>(spec.params.block_rate());
    let (gap_db, crossover) = resolve_point(rate, channel_spec)?;
    let layout = FrameLayout::new(&spec.params);
    let cap = spec.stop.frame_cap(layout.info_bits_per_frame() as u64)?;

    let started = Instant::now();
    let mut total = FrameCounts::default();
    let mut next = 0u64;
    while next < cap {
        let end = (next + BATCH_FRAMES).min(cap);
        let batch = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map_init(
                    || FrameSimulator::new(code, spec.info_mode),
                    |sim, frame| {
                        let mut rng = frame_rng(spec.base_seed, point as u64, frame);
                        let mut noise_rng = rng.clone();
                        // Information and noise use disjoint halves of the stream.
                        noise_rng.set_word_pos(1u128 << 64);
                        let mut noise = BscNoise::new(crossover, &mut noise_rng)
                            .expect("crossover validated");
                        sim.run_frame(&mut rng, &mut noise)
                    },
                )
                .reduce(FrameCounts::default, |a, b| a + b)
        });
        total = total + batch;
        next = end;
        if spec.stop.min_bit_errors.is_some_and(|m| total.bit_errors >= m) {
            break;
        }
    }
    let seconds = started.elapsed().as_secs_f64();
    let ber = if total.info_bits > 0 {
        total.bit_errors as f64 / total.info_bits as f64
    } else {
        0.0
    };
    let (ci_low, ci_high) = confidence_interval(total.bit_errors, total.info_bits);
    Ok(PointResult {
        params: spec.params.clone(),
        rate,
        gap_db,
        crossover,
        counts: total,
        ber,
        ci_low,
        ci_high,
        seconds,
        bits_per_sec: total.info_bits as f64 / seconds.max(1e-9),
        workers,
    })
}

/// All points of a sweep; a failing point is recorded and the sweep goes on.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<Vec<Result<PointResult>>> {
    let code = Code::new(spec.params.clone())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    let workers = pool.current_num_threads();
    Ok((0..spec.points.len())
        .map(|i| run_point_in(&code, spec, i, &pool, workers))
        .collect())
}

pub const CSV_HEADER: &str = "S,M,r,F,W,iterations,rate,gap_db,crossover_p,info_bits,bit_errors,frames,frame_errors,ber,ci_low,ci_high,seconds,bits_per_sec";

/// Writes the CSV header and one row per result. With `timing` off the
/// wall-clock columns are written as 0 so that output depends only on the
/// seed and parameters.
pub fn write_csv<W: Write>(out: &mut W, results: &[PointResult], timing: bool) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        let p = &r.params;
        let (secs, bps) = if timing { (r.seconds, r.bits_per_sec) } else { (0.0, 0.0) };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.side,
            p.memory,
            p.parity_bits,
            p.frame_len,
            p.window,
            p.iterations,
            r.rate,
            r.gap_db,
            r.crossover,
            r.counts.info_bits,
            r.counts.bit_errors,
            r.counts.frames,
            r.counts.frame_errors,
            r.ber,
            r.ci_low,
            r.ci_high,
            secs,
            bps
        )?;
    }
    Ok(())
}
