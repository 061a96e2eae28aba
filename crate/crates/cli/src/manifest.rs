//! Sweep manifests: the resolved config plus provenance of the run.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;

/// Recorded by `gsc sweep`; ignored when the manifest is read back as a
/// config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestSection {
    pub tool: String,
    /// Git-style blob hash of the experiment parameters.
    pub content_hash: String,
    pub base_seed: u64,
    pub workers: usize,
    pub csv: String,
    pub csv_sha256: String,
    #[serde(default)]
    pub points: Vec<PointRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub crossover_p: f64,
    pub gap_db: f64,
    pub info_bits: u64,
    pub bit_errors: u64,
    pub seconds: f64,
    pub bits_per_sec: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Everything that determines the simulation output: code, frame and sweep
/// sections after resolution. Paths and provenance are excluded.
#[derive(Serialize)]
struct Hashed<'a> {
    code: &'a crate::config::CodeSection,
    frame: &'a crate::config::FrameSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: &'a Option<crate::config::SweepSection>,
}

/// `sha256("blob <len>\0" + canonical TOML of the parameters)`, as git hashes
/// objects.
pub fn content_hash(resolved: &Config) -> anyhow::Result<String> {
    let body = toml::to_string(&Hashed {
        code: &resolved.code,
        frame: &resolved.frame,
        sweep: &resolved.sweep,
    })?;
    Ok(format!("sha256:{}", blob_hash(body.as_bytes())))
}

pub fn blob_hash(body: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(body);
    hex(&h.finalize())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
