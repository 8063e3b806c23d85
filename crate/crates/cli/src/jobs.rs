//! Serializable job descriptions. A job plus its input files fully
//! determines every artifact a run writes, which is what makes a manifest
//! rerunnable.

use std::path::{Path, PathBuf};

use hce_core::{HbConfig, HnrgConfig, ZeroNorm};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::formats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DistanceChoice {
    /// Cosine for graphs, correlation for time series, Euclidean for points.
    Auto,
    Cosine,
    Correlation,
    Euclidean,
    /// Dense matrix input holds distances rather than graph weights.
    Precomputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ZeroNormChoice {
    /// Fail on nodes without incident weight.
    Error,
    /// Treat such nodes as orthogonal to every other node.
    Orthogonal,
}

impl From<ZeroNormChoice> for ZeroNorm {
    fn from(c: ZeroNormChoice) -> Self {
        match c {
            ZeroNormChoice::Error => ZeroNorm::Error,
            ZeroNormChoice::Orthogonal => ZeroNorm::Orthogonal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Input {
    Edges { path: PathBuf, nodes: Option<usize> },
    Dense { path: PathBuf },
    Series { path: PathBuf },
    Points { path: PathBuf },
    Linkage { path: PathBuf },
    Tree { path: PathBuf, communities: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterJob {
    pub input: Input,
    pub distance: DistanceChoice,
    pub log1p: bool,
    pub zero_norm: ZeroNormChoice,
    pub max_levels: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HnrgSweepJob {
    /// Generator parameters; the mean degree is taken from the grid.
    pub base: HnrgConfig,
    pub mean_degrees: Vec<f64>,
    pub instances: usize,
    pub seed: u64,
    pub zero_norm: ZeroNormChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbSweepJob {
    pub n: usize,
    /// Background fraction `p_3`.
    pub background: f64,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub instances: usize,
    pub seed: u64,
    pub zero_norm: ZeroNormChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsprepJob {
    pub series: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullJob {
    pub series: PathBuf,
    pub regions: Option<PathBuf>,
    pub coords: Option<PathBuf>,
    pub instances: usize,
    pub levels: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Cluster(ClusterJob),
    BenchHnrg(HnrgConfig),
    BenchHb(HbConfig),
    SweepHnrg(HnrgSweepJob),
    SweepHb(HbSweepJob),
    Tsprep(TsprepJob),
    Null(NullJob),
}

impl Job {
    /// Input files with their roles.
    pub fn inputs(&self) -> Vec<(&'static str, &Path)> {
        match self {
            Job::Cluster(c) => match &c.input {
                Input::Edges { path, .. } => vec![("edges", path)],
                Input::Dense { path } => vec![("dense", path)],
                Input::Series { path } => vec![("series", path)],
                Input::Points { path } => vec![("points", path)],
                Input::Linkage { path } => vec![("linkage", path)],
                Input::Tree { path, communities } => {
                    vec![("tree", path), ("communities", communities)]
                }
            },
            Job::Tsprep(t) => vec![("series", &t.series)],
            Job::Null(n) => {
                let mut v: Vec<(&'static str, &Path)> = vec![("series", &n.series)];
                if let Some(r) = &n.regions {
                    v.push(("regions", r));
                }
                if let Some(c) = &n.coords {
                    v.push(("coords", c));
                }
                v
            }
            Job::BenchHnrg(_) | Job::BenchHb(_) | Job::SweepHnrg(_) | Job::SweepHb(_) => Vec::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Job::Cluster(c) => c.seed,
            Job::BenchHnrg(c) => c.seed,
            Job::BenchHb(c) => c.seed,
            Job::SweepHnrg(s) => s.seed,
            Job::SweepHb(s) => s.seed,
            Job::Tsprep(_) => 0,
            Job::Null(n) => n.seed,
        }
    }
}

/// Resolves a user path to an absolute one so manifests work from any
/// directory.
pub fn absolute(path: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(path).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub role: String,
    pub path: PathBuf,
    pub bytes: u64,
    /// FNV-1a 64-bit digest of the file contents, hex.
    pub fnv64: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub job: Job,
    pub inputs: Vec<InputRecord>,
    pub outputs: Vec<String>,
    #[serde(default)]
    pub notes: Vec<String>,
}

fn fnv64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn input_record(role: &str, path: &Path) -> Result<InputRecord> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(InputRecord {
        role: role.to_string(),
        path: path.to_path_buf(),
        bytes: bytes.len() as u64,
        fnv64: format!("{:016x}", fnv64(&bytes)),
    })
}

/// Collects what a job wrote so the manifest can list it.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<String>,
    pub notes: Vec<String>,
}

impl Outputs {
    pub fn path(&mut self, dir: &Path, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        dir.join(name)
    }
}

pub fn write_manifest(dir: &Path, job: &Job, outputs: Outputs) -> Result<()> {
    let inputs = job
        .inputs()
        .into_iter()
        .map(|(role, path)| input_record(role, path))
        .collect::<Result<Vec<_>>>()?;
    let mut files = outputs.files;
    files.push("manifest.json".to_string());
    files.sort();
    let manifest = Manifest {
        tool: "hce".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: job.seed(),
        job: job.clone(),
        inputs,
        outputs: files,
        notes: outputs.notes,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    formats::write_text(&dir.join("manifest.json"), &(text + "\n"))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::parse(path, e.line(), e.to_string()))
}

/// Checks that the inputs recorded in a manifest are unchanged.
pub fn verify_inputs(manifest: &Manifest) -> Result<()> {
    for recorded in &manifest.inputs {
        let now = input_record(&recorded.role, &recorded.path)?;
        if now.fnv64 != recorded.fnv64 || now.bytes != recorded.bytes {
            return Err(CliError::Validation(format!(
                "input {} ({}) changed since the manifest was written",
                recorded.role,
                recorded.path.display()
            )));
        }
    }
    Ok(())
}
