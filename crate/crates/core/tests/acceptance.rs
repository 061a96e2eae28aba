//! Acceptance gate. Prints one line per criterion and exits non-zero if any
//! criterion fails. Pass criterion numbers as arguments to run a subset:
//!
//! cargo test --test acceptance -- 3 5

mod common;

use std::collections::HashMap;
use std::time::Instant;

use gsc::channel::{gap_to_crossover, rate_to};
use gsc::decoder::decode_frame;
use gsc::encoder::{encode_frame, encode_frame_blocks};
use gsc::geometry::validate;
use gsc::nets::{self, verify_net, PermFamily, MAX_TABLE_ORDER, MIN_TABLE_ORDER};
use gsc::sim::{run_sweep, write_csv, InfoMode, PointResult};
use gsc::{BitCoord, Block, ChannelSpec, Code, CodeParams, FrameLayout, PermKind, Rate, Ruler, StopRules, SweepSpec,
    WindowDecoder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reference table: `(S, M, r, F, W, W Mbit, R_nominal, R, iterations, gap dB, input BER)`.
#[allow(clippy::type_complexity)]
const TABLE: [(usize, usize, usize, usize, usize, f64, f64, f64, usize, f64, f64); 5] = [
    (669, 3, 13, 725, 21, 9.399, 0.98057, 0.98000, 3, 0.585, 9.86e-4),
    (409, 3, 12, 926, 21, 3.513, 0.97066, 0.97000, 3, 0.650, 1.57e-3),
    (307, 3, 12, 885, 21, 1.979, 0.96091, 0.96000, 4, 0.750, 2.09e-3),
    (179, 4, 11, 1634, 36, 1.153, 0.93855, 0.93725, 4, 0.950, 3.25e-3),
    (47, 4, 9, 912, 48, 0.106, 0.80851, 0.80000, 6, 1.850, 1.05e-2),
];

const BER_TOLERANCE: f64 = 0.01;
const STALL_TRIALS: usize = 100_000;
const WATERFALL_BITS: u64 = 1_000_000_000;
const WATERFALL_TARGET: f64 = 1e-6;
const SWEEP_POINTS: [f64; 3] = [1.3e-2, 1.2e-2, 1.05e-2];
const SWEEP_SEED: u64 = 2024;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn ratio(r: Rate) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn round_to(x: f64, places: i32) -> f64 {
    let f = 10f64.powi(places);
    (x * f).round() / f
}

fn criterion_1() -> Outcome {
    let mut bad = Vec::new();
    for (p, row) in CodeParams::reference_configs().iter().zip(TABLE) {
        let (s, m, r, f, w, mbit, nominal, rate, it, _, _) = row;
        let ok = (p.side, p.memory, p.frame_len, p.window, p.iterations) == (s, m, f, w, it)
            && gsc::geometry::derived_parity_bits(s, m) == r
            && p.parity_bits == r
            && round_to(ratio(p.block_rate()), 5) == rate
            && round_to(ratio(p.nominal_rate()), 5) == nominal
            && round_to(p.window_bits() as f64 / 1e6, 3) == mbit;
        if !ok {
            bad.push(s);
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "r, R (5 dp), R_nominal (5 dp) and W Mbit (3 dp) match all five rows".to_string()
        } else {
            format!("mismatching rows S = {bad:?}")
        },
    )
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (p, row) in CodeParams::reference_configs().iter().zip(TABLE) {
        let (_, _, _, _, _, _, _, _, _, gap, ber) = row;
        let got = gap_to_crossover(rate_to::<f64>(p.block_rate()), gap).unwrap_or(f64::NAN);
        let err = ((got - ber) / ber).abs();
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
        lines.push(format!("{got:.4e}"));
    }
    outcome(
        worst < BER_TOLERANCE,
        format!(
            "input BER {}, worst relative error {:.3}% (tolerance {}%)",
            lines.join(" "),
            worst * 100.0,
            BER_TOLERANCE * 100.0
        ),
    )
}

fn net_oracle(kind: PermKind, s: usize, m: usize) -> bool {
    // Lines of distinct parallel classes meet in exactly one cell.
    let masks: Vec<Vec<Vec<bool>>> = (0..=m)
        .map(|k| {
            (0..s)
                .map(|i| {
                    let mut mask = vec![false; s * s];
                    for j in 0..s {
                        let (a, b) = common::pi(kind, s, k, i, j);
                        mask[a * s + b] = true;
                    }
                    mask
                })
                .collect()
        })
        .collect();
    (0..=m).all(|k| {
        (k + 1..=m).all(|l| {
            masks[k].iter().all(|x| {
                masks[l]
                    .iter()
                    .all(|y| x.iter().zip(y).filter(|(a, b)| **a && **b).count() == 1)
            })
        })
    })
}

fn max_shared(code: &Code, blocks: usize) -> usize {
    let mut holders: HashMap<BitCoord, Vec<(usize, usize)>> = HashMap::new();
    for m in code.span()..blocks {
        for i in 0..code.side() {
            for bit in code.constraint_members(m, i).unwrap() {
                holders.entry(bit).or_default().push((m, i));
            }
        }
    }
    let mut shared: HashMap<((usize, usize), (usize, usize)), usize> = HashMap::new();
    for rows in holders.values() {
        for (a, &x) in rows.iter().enumerate() {
            for &y in &rows[a + 1..] {
                *shared.entry((x.min(y), x.max(y))).or_default() += 1;
            }
        }
    }
    shared.values().copied().max().unwrap_or(0)
}

fn unchecked(s: usize, m: usize, marks: Vec<u32>, kind: PermKind) -> Code {
    Code::new_unchecked(CodeParams::new(s, m, Ruler::new(marks).unwrap(), kind, 60, 30, 2)).unwrap()
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    for order in MIN_TABLE_ORDER..=MAX_TABLE_ORDER {
        let r = nets::optimal_ruler(order).unwrap();
        let marks = r.marks();
        let mut diffs: Vec<u32> = marks
            .iter()
            .enumerate()
            .flat_map(|(a, &x)| marks[a + 1..].iter().map(move |&y| y - x))
            .collect();
        let n = diffs.len();
        diffs.sort_unstable();
        diffs.dedup();
        if diffs.len() != n || !nets::verify_ruler(marks) {
            failures.push(format!("ruler order {order}"));
        }
    }
    for kind in [PermKind::Shift, PermKind::Involution] {
        for (s, m) in [(7, 3), (11, 4), (13, 4), (47, 4)] {
            let fam = PermFamily::build(s, m, kind).unwrap();
            let check = verify_net(&fam);
            if !net_oracle(kind, s, m) || !check.holds || check.sampled {
                failures.push(format!("net {kind:?} S={s} M={m}"));
            }
        }
    }
    for s in 2..=64usize {
        let m = nets::lpf(s as u64).unwrap().min(12) as usize;
        let fam = PermFamily::build(s, m, PermKind::Involution).unwrap();
        let ok = (0..=m).all(|k| {
            fam.forward(k) == fam.inverse(k)
                && (0..s).all(|i| {
                    (0..s).all(|j| {
                        let (a, b) = common::pi(PermKind::Involution, s, k, i, j);
                        common::pi(PermKind::Involution, s, k, a, b) == (i, j)
                    })
                })
        });
        if !ok {
            failures.push(format!("involution S={s}"));
        }
    }
    for kind in [PermKind::Shift, PermKind::Involution] {
        for (s, m, marks) in [(7, 3, vec![0, 1, 4, 6]), (11, 4, vec![0, 1, 4, 9, 11])] {
            let code = unchecked(s, m, marks, kind);
            if max_shared(&code, 3 * code.span() + 2) != 1 || !code.verify_intersection_default() {
                failures.push(format!("intersection {kind:?} S={s}"));
            }
        }
        let non_golomb = unchecked(7, 3, vec![0, 1, 2, 4], kind);
        if validate(non_golomb.params()).passed() || max_shared(&non_golomb, 14) <= 1 {
            failures.push(format!("non-Golomb control {kind:?} was not rejected"));
        }
        let above_lpf = unchecked(6, 3, vec![0, 1, 4, 6], kind);
        let rep = validate(above_lpf.params());
        if rep.check("lpf").is_none_or(|c| c.passed) || max_shared(&above_lpf, 20) <= 1 {
            failures.push(format!("M > lpf(S) control {kind:?} was not rejected"));
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "rulers, nets, involutions, intersections and negative controls".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn snapshot(dec: &WindowDecoder) -> Vec<Block> {
    let s = dec.code().side();
    (0..dec.window().end)
        .map(|g| {
            let mut b = Block::zeros(s);
            if let Some(c) = dec.block_cells(g) {
                b.cells_mut().copy_from_slice(c);
            }
            b
        })
        .collect()
}

fn bank_matches(dec: &WindowDecoder) -> bool {
    let code = dec.code();
    let blocks = snapshot(dec);
    dec.tracked().all(|m| {
        (0..code.side()).all(|i| dec.syndrome(m, i).unwrap().0 == common::full_syndrome(code, &blocks, m, i))
    })
}

fn incremental_ok(code: &Code, p: f64, rng: &mut ChaCha8Rng) -> bool {
    let layout = FrameLayout::new(code.params());
    let info: Vec<u8> = (0..layout.info_bits_per_frame()).map(|_| rng.gen_range(0..2)).collect();
    let rx: Vec<u8> = encode_frame(code, &info)
        .unwrap()
        .into_iter()
        .map(|b| b ^ rng.gen_bool(p) as u8)
        .collect();
    let mut dec = WindowDecoder::new(code);
    let mut offset = 0;
    let mut out = Vec::new();
    for f in 0..layout.frame_len {
        let n = layout.transmitted_bits(f);
        dec.push_received(&rx[offset..offset + n]).unwrap();
        offset += n;
        if !bank_matches(&dec) {
            return false;
        }
        dec.step(&mut out);
        if !bank_matches(&dec) {
            return false;
        }
    }
    true
}

fn criterion_4() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut s47 = CodeParams::reference_configs()[4].clone();
    s47.frame_len = s47.window + 10;
    let mut zero_syndrome_cases = common::small_params(30, 14, 3);
    zero_syndrome_cases.push(s47.clone());
    for params in &zero_syndrome_cases {
        let code = Code::new(params.clone()).unwrap();
        let layout = FrameLayout::new(code.params());
        let info: Vec<u8> = (0..layout.info_bits_per_frame()).map(|_| rng.gen_range(0..2)).collect();
        let blocks = encode_frame_blocks(&code, &info).unwrap();
        if !common::all_constraints_satisfied(&code, &blocks) {
            failures.push(format!("zero syndrome S={} M={}", params.side, params.memory));
        }
    }
    for mut params in CodeParams::reference_configs() {
        params.frame_len = params.window + 10;
        let code = Code::new(params).unwrap();
        let layout = FrameLayout::new(code.params());
        let info: Vec<u8> = (0..layout.info_bits_per_frame()).map(|_| rng.gen_range(0..2)).collect();
        let (out, stats) = decode_frame(&code, &encode_frame(&code, &info).unwrap()).unwrap();
        if out != info || stats.flips != 0 {
            failures.push(format!("round trip S={}", code.side()));
        }
    }
    let mut incremental_cases = common::small_params(30, 14, 3);
    incremental_cases.push(s47);
    for params in incremental_cases {
        let code = Code::new(params).unwrap();
        let p = if code.side() == 47 { 0.012 } else { 0.03 };
        if !incremental_ok(&code, p, &mut rng) {
            failures.push(format!("incremental S={} M={}", code.side(), code.memory()));
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "zero syndromes, noiseless round trip on all five configs, incremental = recomputed".to_string()
        } else {
            failures.join("; ")
        },
    )
}

/// Window of the S = 47 reference code holding the all-zero codeword, with
/// the region `2 d_M..=4 d_M` interior: every constraint through it is
/// tracked and free of initialization blocks.
struct StallBench<'a> {
    code: &'a Code,
    dec: WindowDecoder<'a>,
}

#[derive(Default)]
struct StallTally {
    trials: u64,
    corrected: u64,
    traced: u64,
    untraced: u64,
}

impl<'a> StallBench<'a> {
    fn new(code: &'a Code) -> Self {
        let layout = FrameLayout::new(code.params());
        let mut dec = WindowDecoder::new(code).with_miscorrection_trace();
        for f in 0..layout.window {
            dec.push_received(&vec![0; layout.transmitted_bits(f)]).unwrap();
        }
        Self { code, dec }
    }

    fn region(&self) -> std::ops::RangeInclusive<usize> {
        2 * self.code.span()..=4 * self.code.span()
    }

    fn window_is_zero(&self) -> bool {
        self.dec
            .window()
            .all(|g| self.dec.block_cells(g).unwrap().iter().all(|&x| x == 0))
    }

    /// Injects `pattern`, decodes the position and reports whether the window
    /// returned to the all-zero codeword, and if not whether a
    /// miscorrection on a row holding three or more errors occurred.
    fn run(&mut self, pattern: &[BitCoord], tally: &mut StallTally) {
        for &b in pattern {
            self.dec.toggle(b).unwrap();
        }
        self.dec.decode_position();
        let stats = self.dec.take_stats();
        let s = self.code.side();
        let fast_ok = stats.flips == pattern.len() as u64
            && pattern
                .iter()
                .all(|b| self.dec.block_cells(b.block).unwrap()[b.row * s + b.col] == 0);
        tally.trials += 1;
        if fast_ok || self.window_is_zero() {
            tally.corrected += 1;
            return;
        }
        if stats.miscorrections.iter().any(|m| m.weight >= 3) {
            tally.traced += 1;
        } else {
            tally.untraced += 1;
        }
        *self = Self::new(self.code);
    }
}

fn random_bit(rng: &mut ChaCha8Rng, blocks: &std::ops::RangeInclusive<usize>, s: usize) -> BitCoord {
    BitCoord {
        block: rng.gen_range(blocks.clone()),
        row: rng.gen_range(0..s),
        col: rng.gen_range(0..s),
    }
}

fn random_pattern(rng: &mut ChaCha8Rng, blocks: &std::ops::RangeInclusive<usize>, s: usize, w: usize) -> Vec<BitCoord> {
    let mut bits: Vec<BitCoord> = Vec::with_capacity(w);
    while bits.len() < w {
        let b = random_bit(rng, blocks, s);
        if !bits.contains(&b) {
            bits.push(b);
        }
    }
    bits
}

/// A weight-`w` pattern in which every bit after the first shares a
/// component codeword with an earlier one.
fn clustered_pattern(code: &Code, rng: &mut ChaCha8Rng, blocks: &std::ops::RangeInclusive<usize>, w: usize) -> Vec<BitCoord> {
    let s = code.side();
    let centre = BitCoord {
        block: (blocks.start() + blocks.end()) / 2,
        row: rng.gen_range(0..s),
        col: rng.gen_range(0..s),
    };
    let mut bits = vec![centre];
    while bits.len() < w {
        let from = bits[rng.gen_range(0..bits.len())];
        let slot = code.locate(from)[rng.gen_range(0..=code.memory())];
        let b = code.member(slot.constraint, slot.row, rng.gen_range(0..code.component().len()));
        if blocks.contains(&b.block) && !bits.contains(&b) {
            bits.push(b);
        }
    }
    bits
}

fn criterion_5() -> Outcome {
    let code = Code::new(CodeParams::reference_configs()[4].clone()).unwrap();
    let s = code.side();
    let span = code.span();
    let mut bench = StallBench::new(&code);
    let region = bench.region();
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    // Weight 1: every bit of d_M + 1 consecutive interior blocks.
    let mut w1 = StallTally::default();
    for block in 2 * span..=3 * span {
        for row in 0..s {
            for col in 0..s {
                bench.run(&[BitCoord { block, row, col }], &mut w1);
            }
        }
    }

    // Weight 2. The code is time invariant, so the first bit ranges over one
    // block. Pairs sharing a component codeword are enumerated exhaustively;
    // the remaining pairs meet no common codeword and are sampled.
    let mut w2 = StallTally::default();
    let centre = 3 * span;
    for row in 0..s {
        for col in 0..s {
            let x = BitCoord { block: centre, row, col };
            for slot in code.locate(x) {
                for p in 0..code.component().len() {
                    let y = code.member(slot.constraint, slot.row, p);
                    if y != x {
                        bench.run(&[x, y], &mut w2);
                    }
                }
            }
        }
    }
    let mut w2_random = StallTally::default();
    for _ in 0..STALL_TRIALS {
        let pattern = random_pattern(&mut rng, &region, s, 2);
        bench.run(&pattern, &mut w2_random);
    }

    // Weight (M + 1) t = 5.
    let weight = code.memory() + 1;
    let mut w5 = StallTally::default();
    for _ in 0..STALL_TRIALS {
        let pattern = random_pattern(&mut rng, &region, s, weight);
        bench.run(&pattern, &mut w5);
    }
    let mut w5_clustered = StallTally::default();
    for _ in 0..STALL_TRIALS {
        let pattern = clustered_pattern(&code, &mut rng, &region, weight);
        bench.run(&pattern, &mut w5_clustered);
    }

    let exhaustive_ok = w1.corrected == w1.trials && w2.corrected == w2.trials && w2_random.corrected == w2_random.trials;
    let w5_ok = w5.untraced == 0 && w5_clustered.untraced == 0;
    let frac = |t: &StallTally| 100.0 * t.corrected as f64 / t.trials as f64;
    outcome(
        exhaustive_ok && w5_ok,
        format!(
            "weight 1: {}/{}; weight 2 sharing a codeword: {}/{}; weight 2 random: {}/{}; \
             weight {weight} random: {:.4}% corrected ({} failures, {} traced to 3+ errors on a row); \
             weight {weight} clustered: {:.4}% corrected ({} failures, {} traced)",
            w1.corrected,
            w1.trials,
            w2.corrected,
            w2.trials,
            w2_random.corrected,
            w2_random.trials,
            frac(&w5),
            w5.trials - w5.corrected,
            w5.traced,
            frac(&w5_clustered),
            w5_clustered.trials - w5_clustered.corrected,
            w5_clustered.traced,
        ),
    )
}

fn waterfall_spec() -> SweepSpec {
    SweepSpec {
        params: CodeParams::reference_configs()[4].clone(),
        points: SWEEP_POINTS.iter().map(|&p| ChannelSpec::Crossover(p)).collect(),
        stop: StopRules {
            max_frames: None,
            max_bits: Some(WATERFALL_BITS),
            min_bit_errors: Some(100),
        },
        base_seed: SWEEP_SEED,
        info_mode: InfoMode::Random,
    }
}

fn sweep(workers: usize) -> Vec<PointResult> {
    run_sweep(&waterfall_spec(), workers)
        .expect("reference config is valid")
        .into_iter()
        .map(|r| r.expect("sweep point"))
        .collect()
}

fn csv(results: &[PointResult]) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv(&mut out, results, false).unwrap();
    out
}

fn criterion_6(results: &[PointResult]) -> Outcome {
    let last = results.last().unwrap();
    let floor_ok = last.counts.info_bits >= WATERFALL_BITS && last.ber < WATERFALL_TARGET;
    let separated = results.windows(2).all(|w| w[0].ci_low > w[1].ci_high);
    let points: Vec<String> = results
        .iter()
        .map(|r| {
            format!(
                "p={:.2e}: {} errors in {} bits, BER {:.3e} [{:.3e}, {:.3e}]",
                r.crossover, r.counts.bit_errors, r.counts.info_bits, r.ber, r.ci_low, r.ci_high
            )
        })
        .collect();
    outcome(
        floor_ok && separated,
        format!(
            "BER < {WATERFALL_TARGET:e} at 1.05e-2 with >= {WATERFALL_BITS} bits: {}; strictly decreasing \
             with disjoint CIs: {}; {}",
            if floor_ok { "yes" } else { "no" },
            if separated { "yes" } else { "no" },
            points.join("; ")
        ),
    )
}

fn criterion_7(first: &[PointResult]) -> (Outcome, f64) {
    let started = Instant::now();
    let second = sweep(4);
    let same = csv(first) == csv(&second);
    (
        outcome(
            same,
            format!(
                "CSV with 1 worker {} CSV with 4 workers ({} bytes)",
                if same { "==" } else { "!=" },
                csv(first).len()
            ),
        ),
        started.elapsed().as_secs_f64(),
    )
}

fn criterion_8(results: &[PointResult]) -> Outcome {
    let r = results.last().unwrap();
    let per_core = r.bits_per_sec_per_core();
    outcome(
        true,
        format!(
            "report only: {:.3e} info bit/s/core at p = {:.2e} ({} worker(s)); the reference simulator reports \
             several Gbit/s per core, taken as 3 Gbit/s that is {:.0}x faster",
            per_core,
            r.crossover,
            r.workers,
            3e9 / per_core
        ),
    )
}

fn report(n: usize, budget: &str, secs: f64, o: &Outcome) -> bool {
    println!(
        "criterion {n}: {} ({secs:.1} s, budget {budget}) {}",
        if o.passed { "PASS" } else { "FAIL" },
        o.detail
    );
    o.passed
}

fn main() {
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let want = |n: usize| selected.is_empty() || selected.contains(&n);
    let mut all = true;

    let simple: [(usize, &str, fn() -> Outcome); 5] = [
        (1, "1 s", criterion_1),
        (2, "1 s", criterion_2),
        (3, "30 s", criterion_3),
        (4, "2 min", criterion_4),
        (5, "10 min", criterion_5),
    ];
    for (n, budget, f) in simple {
        if want(n) {
            let t = Instant::now();
            let o = f();
            all &= report(n, budget, t.elapsed().as_secs_f64(), &o);
        }
    }

    if want(6) || want(7) || want(8) {
        let t = Instant::now();
        let results = sweep(1);
        let secs = t.elapsed().as_secs_f64();
        if want(6) {
            all &= report(6, "1 h", secs, &criterion_6(&results));
        }
        if want(7) {
            let (o, secs7) = criterion_7(&results);
            all &= report(7, "1 h with 6", secs7, &o);
        }
        if want(8) {
            all &= report(8, "none", 0.0, &criterion_8(&results));
        }
    }

    println!("acceptance: {}", if all { "PASS" } else { "FAIL" });
    if !all {
        std::process::exit(1);
    }
}
