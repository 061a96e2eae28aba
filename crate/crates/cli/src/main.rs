//! `gsc`: encode, decode, verify and simulate generalized staircase codes.
//!
//! Exit codes: 0 success, 1 validation / I/O / format failure, 2 unreadable
//! config or command line, 3 decoding finished with uncorrected rows.

mod config;
mod manifest;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use gsc::geometry::validate;
use gsc::sim::{run_sweep, write_csv};
use gsc::{channel, wire, Code, CodeParams};

use config::Config;
use manifest::{ManifestSection, PointRecord};

/// Largest side for which `verify` also checks pairwise codeword intersection
/// exhaustively.
const INTERSECTION_MAX_SIDE: usize = 64;

#[derive(Parser)]
#[command(name = "gsc", version, about = "Generalized staircase codes with arbitrary bit degree")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structural conditions of a code.
    Verify { config: PathBuf },
    /// Print the derived parameters of a code.
    Info { config: PathBuf },
    /// Encode a file; `-` means standard input or output.
    Encode {
        config: PathBuf,
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decode a possibly corrupted encoded file.
    Decode {
        config: PathBuf,
        #[arg(short, long)]
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a BER sweep, writing a CSV and a manifest next to it.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Defaults to the CSV path with extension `manifest.toml`.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Write wall-clock columns into the CSV instead of zeros.
        #[arg(long)]
        timing: bool,
    },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn parse(error: anyhow::Error) -> Self {
        Self { code: 2, error }
    }

    fn run(error: anyhow::Error) -> Self {
        Self { code: 1, error }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Self::run(e.into())
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify { config } => verify(&config),
        Command::Info { config } => info(&config),
        Command::Encode { config, input, output } => encode(&config, input, output),
        Command::Decode { config, input, output } => decode(&config, input, output),
        Command::Sweep {
            config,
            csv,
            manifest,
            workers,
            timing,
        } => sweep(&config, csv, manifest, workers, timing),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("gsc: error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<(Config, CodeParams), Failure> {
    let cfg = Config::load(path).map_err(Failure::parse)?;
    let params = cfg.code_params().map_err(Failure::parse)?;
    Ok((cfg, params))
}

fn build(params: CodeParams) -> Result<Code, Failure> {
    let report = validate(&params);
    if !report.passed() {
        eprint!("{report}");
        return Err(Failure::run(anyhow!("the code parameters are invalid")));
    }
    Ok(Code::new(params)?)
}

fn verify(path: &Path) -> Outcome {
    let (_, params) = load(path)?;
    let report = validate(&params);
    print!("{report}");
    let mut passed = report.passed();
    if passed && params.side <= INTERSECTION_MAX_SIDE {
        let code = Code::new(params)?;
        let ok = code.verify_intersection_default();
        let tag = if ok { "ok  " } else { "FAIL" };
        println!("[{tag}] {:<12} any two component codewords share at most one bit", "intersection");
        passed &= ok;
    }
    println!("{}", if passed { "verify: PASS" } else { "verify: FAIL" });
    Ok(if passed { 0 } else { 1 })
}

fn info(path: &Path) -> Outcome {
    let (cfg, params) = load(path)?;
    let report = validate(&params);
    let rate = params.block_rate();
    let nominal = params.nominal_rate();
    let rate_f = channel::rate_to::<f64>(rate);
    println!("S                  {}", params.side);
    println!("M                  {}", params.memory);
    println!("r                  {} (derived {})", params.parity_bits, cfg.derived_parity_bits());
    println!("ruler              {:?}", params.ruler.marks());
    println!("permutations       {:?}", params.perm_kind);
    println!("F, W, iterations   {}, {}, {}", params.frame_len, params.window, params.iterations);
    println!("component length   {}", params.component_len());
    println!("rate               {rate} = {rate_f:.5}");
    println!("nominal rate       {nominal} = {:.5}", channel::rate_to::<f64>(nominal));
    println!("W (Mbits)          {:.3}", params.window_bits() as f64 / 1e6);
    if report.passed() {
        println!("info bits/frame    {}", params.info_bits_per_frame());
        println!("sent bits/frame    {}", params.transmitted_bits_per_frame());
        if let Ok(p) = channel::limit_crossover(rate_f) {
            let ebn0 = channel::shannon_limit_ebn0(rate_f)?;
            println!("Shannon limit      p* = {p:.6e}, Eb/N0 = {ebn0:.4} dB");
        }
        Ok(0)
    } else {
        eprint!("{report}");
        Ok(1)
    }
}

fn read_input(path: &Path) -> anyhow::Result<Vec<u8>> {
    if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf)?;
        Ok(buf)
    } else {
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn write_output(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)?;
        Ok(out.flush()?)
    } else {
        std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
    }
}

fn io_paths(
    cfg: &Config,
    input: Option<PathBuf>,
    output: Option<PathBuf>,
) -> Result<(PathBuf, PathBuf), Failure> {
    let input = input
        .or_else(|| cfg.io.input.clone())
        .ok_or_else(|| Failure::parse(anyhow!("no input path (use --input or [io] input)")))?;
    let output = output
        .or_else(|| cfg.io.output.clone())
        .ok_or_else(|| Failure::parse(anyhow!("no output path (use --output or [io] output)")))?;
    Ok((input, output))
}

fn encode(path: &Path, input: Option<PathBuf>, output: Option<PathBuf>) -> Outcome {
    let (cfg, params) = load(path)?;
    let (input, output) = io_paths(&cfg, input, output)?;
    let code = build(params)?;
    let data = read_input(&input)?;
    let encoded = wire::encode_bytes(&code, &data)?;
    write_output(&output, &encoded)?;
    eprintln!("encoded {} bytes into {} bytes", data.len(), encoded.len());
    Ok(0)
}

fn decode(path: &Path, input: Option<PathBuf>, output: Option<PathBuf>) -> Outcome {
    let (cfg, params) = load(path)?;
    let (input, output) = io_paths(&cfg, input, output)?;
    let code = build(params)?;
    let file = read_input(&input)?;
    let (data, stats) = wire::decode_bytes(&code, &file)?;
    write_output(&output, &data)?;
    eprintln!(
        "decoded {} bytes: {} corrections, {} uncorrected rows",
        data.len(),
        stats.flips,
        stats.residual_rows
    );
    Ok(if stats.residual_rows > 0 { 3 } else { 0 })
}

fn sweep(
    path: &Path,
    csv: Option<PathBuf>,
    manifest: Option<PathBuf>,
    workers: usize,
    timing: bool,
) -> Outcome {
    let (cfg, params) = load(path)?;
    let spec = cfg.sweep_spec().map_err(Failure::parse)?;
    let csv = csv
        .or_else(|| cfg.io.csv.clone())
        .ok_or_else(|| Failure::parse(anyhow!("no CSV path (use --csv or [io] csv)")))?;
    let manifest_path = manifest
        .or_else(|| cfg.io.manifest.clone())
        .unwrap_or_else(|| csv.with_extension("manifest.toml"));
    build(params)?;

    let results = run_sweep(&spec, workers)?;
    let mut ok = Vec::new();
    let mut records = Vec::new();
    for (point, result) in spec.points.iter().zip(&results) {
        match result {
            Ok(r) => {
                eprintln!(
                    "p = {:.4e}  gap = {:.3} dB  BER = {:.3e}  ({} errors in {} bits, {:.1} s)",
                    r.crossover, r.gap_db, r.ber, r.counts.bit_errors, r.counts.info_bits, r.seconds
                );
                records.push(PointRecord {
                    crossover_p: r.crossover,
                    gap_db: r.gap_db,
                    info_bits: r.counts.info_bits,
                    bit_errors: r.counts.bit_errors,
                    seconds: r.seconds,
                    bits_per_sec: r.bits_per_sec,
                    error: None,
                });
                ok.push(r.clone());
            }
            Err(e) => {
                eprintln!("point {point:?} failed: {e}");
                records.push(PointRecord {
                    crossover_p: f64::NAN,
                    gap_db: f64::NAN,
                    info_bits: 0,
                    bit_errors: 0,
                    seconds: 0.0,
                    bits_per_sec: 0.0,
                    error: Some(format!("{point:?}: {e}")),
                });
            }
        }
    }

    let mut table = Vec::new();
    write_csv(&mut table, &ok, timing)?;
    std::fs::write(&csv, &table).with_context(|| format!("writing {}", csv.display()))?;

    let mut resolved = cfg.resolved().map_err(Failure::parse)?;
    let hash = manifest::content_hash(&resolved)?;
    resolved.manifest = Some(ManifestSection {
        tool: format!("gsc {}", env!("CARGO_PKG_VERSION")),
        content_hash: hash,
        base_seed: spec.base_seed,
        workers: ok.first().map_or(workers, |r| r.workers),
        csv: csv.display().to_string(),
        csv_sha256: manifest::sha256_hex(&table),
        points: records,
    });
    std::fs::write(&manifest_path, toml::to_string(&resolved)?)
        .with_context(|| format!("writing {}", manifest_path.display()))?;
    eprintln!("wrote {} and {}", csv.display(), manifest_path.display());
    Ok(if ok.len() == results.len() { 0 } else { 1 })
}
