//! Simulates a short run of the S = 47 reference configuration and prints
//! the measured BER and throughput.
//!
//! cargo run --release -p gsc-core --example throughput -- [crossover] [frames]

use gsc::sim::{run_point, ChannelSpec, InfoMode, StopRules, SweepSpec};
use gsc::CodeParams;

fn main() {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(1.05e-2, |a| a.parse().expect("crossover"));
    let frames: u64 = args.next().map_or(20, |a| a.parse().expect("frame count"));
    let mode = match args.next().as_deref() {
        Some("zero") => InfoMode::AllZero,
        _ => InfoMode::Random,
    };
    let spec = SweepSpec {
        params: CodeParams::reference_configs()[4].clone(),
        points: vec![ChannelSpec::Crossover(p)],
        stop: StopRules {
            max_frames: Some(frames),
            max_bits: None,
            min_bit_errors: None,
        },
        base_seed: 1,
        info_mode: mode,
    };
    let r = run_point(&spec, 0, 0).expect("simulation");
    println!(
        "p = {p:e}: {} info bits, {} errors, BER {:e} [{:e}, {:e}], {:.2} s, {:.3e} bit/s/core",
        r.counts.info_bits,
        r.counts.bit_errors,
        r.ber,
        r.ci_low,
        r.ci_high,
        r.seconds,
        r.bits_per_sec_per_core()
    );
}
