//! The TOML experiment description.
//!
//! ```toml
//! [code]
//! S = 47
//! M = 4
//! # r = 8                     # optional, must equal ceil(log2((M+1)S)) + 1
//! ruler = "optimal"           # or explicit marks, e.g. [0, 1, 4, 9, 11]
//! perm_family = "involution"  # or "shift"
//!
//! [frame]
//! F = 912
//! W = 48
//! iterations = 6
//!
//! [sweep]
//! points = [{ p = 1.3e-2 }, { gap_db = 1.85 }]
//! max_frames = 1000           # at least one of max_frames / max_bits
//! max_bits = 1_000_000_000
//! min_bit_errors = 100
//! base_seed = 2024
//! info_mode = "random"        # or "all_zero"
//!
//! [io]
//! input = "data.bin"
//! output = "data.gsc"
//! csv = "sweep.csv"
//! manifest = "sweep.manifest.toml"
//! ```
//!
//! Unknown keys are rejected everywhere. A manifest written by `gsc sweep`
//! is itself a valid config that repeats the run.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use gsc::geometry::derived_parity_bits;
use gsc::nets::optimal_ruler;
use gsc::sim::InfoMode;
use gsc::{ChannelSpec, CodeParams, PermKind, Ruler, StopRules, SweepSpec};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub code: CodeSection,
    pub frame: FrameSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "IoSection::is_empty")]
    pub io: IoSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<crate::manifest::ManifestSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    #[serde(rename = "S")]
    pub side: usize,
    #[serde(rename = "M")]
    pub memory: usize,
    #[serde(rename = "r", default, skip_serializing_if = "Option::is_none")]
    pub parity_bits: Option<usize>,
    #[serde(default)]
    pub ruler: RulerChoice,
    #[serde(default)]
    pub perm_family: PermKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RulerChoice {
    #[default]
    #[serde(with = "optimal_name")]
    Optimal,
    Marks(Vec<u32>),
}

mod optimal_name {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("optimal")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let name = String::deserialize(d)?;
        if name == "optimal" {
            Ok(())
        } else {
            Err(de::Error::custom(format!("unknown ruler name {name:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSection {
    #[serde(rename = "F")]
    pub frame_len: usize,
    #[serde(rename = "W")]
    pub window: usize,
    pub iterations: usize,
}

/// One operating point, written `{ p = ... }` or `{ gap_db = ... }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum PointChoice {
    #[serde(rename = "p")]
    Crossover(f64),
    #[serde(rename = "gap_db")]
    GapDb(f64),
}

impl From<PointChoice> for ChannelSpec {
    fn from(p: PointChoice) -> Self {
        match p {
            PointChoice::Crossover(p) => ChannelSpec::Crossover(p),
            PointChoice::GapDb(g) => ChannelSpec::GapDb(g),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub points: Vec<PointChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_frames: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bits: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_bit_errors: Option<u64>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub info_mode: InfoMode,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
}

impl IoSection {
    fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

impl Config {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Code parameters as written. Structural problems are left for
    /// validation to report; only an unresolvable ruler name fails here.
    pub fn code_params(&self) -> anyhow::Result<CodeParams> {
        let c = &self.code;
        let f = &self.frame;
        let ruler = match &c.ruler {
            RulerChoice::Optimal => Ruler::from(optimal_ruler(c.memory + 1)?),
            RulerChoice::Marks(m) => Ruler::new(m.clone())?,
        };
        let mut params = CodeParams::new(
            c.side,
            c.memory,
            ruler,
            c.perm_family,
            f.frame_len,
            f.window,
            f.iterations,
        );
        if let Some(r) = c.parity_bits {
            params.parity_bits = r;
        }
        Ok(params)
    }

    pub fn sweep_spec(&self) -> anyhow::Result<SweepSpec> {
        let Some(s) = &self.sweep else {
            bail!("the config has no [sweep] section");
        };
        if s.points.is_empty() {
            bail!("[sweep] points is empty");
        }
        if s.max_frames.is_none() && s.max_bits.is_none() {
            bail!("[sweep] needs max_frames or max_bits");
        }
        Ok(SweepSpec {
            params: self.code_params()?,
            points: s.points.iter().map(|&p| p.into()).collect(),
            stop: StopRules {
                max_frames: s.max_frames,
                max_bits: s.max_bits,
                min_bit_errors: s.min_bit_errors,
            },
            base_seed: s.base_seed,
            info_mode: s.info_mode,
        })
    }

    /// The same experiment with every derived value written out.
    pub fn resolved(&self) -> anyhow::Result<Self> {
        let params = self.code_params()?;
        let mut out = self.clone();
        out.code.ruler = RulerChoice::Marks(params.ruler.marks().to_vec());
        out.code.parity_bits = Some(params.parity_bits);
        out.manifest = None;
        Ok(out)
    }

    /// The `r` derived from `(S, M)`.
    pub fn derived_parity_bits(&self) -> usize {
        derived_parity_bits(self.code.side, self.code.memory)
    }
}
