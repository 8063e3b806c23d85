//! Command-line definition and the flat `key = value` config file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use hce_core::{HbConfig, HnrgConfig};

use crate::error::{CliError, Result};
use crate::jobs::{
    absolute, ClusterJob, DistanceChoice, HbSweepJob, HnrgSweepJob, Input, Job, NullJob,
    TsprepJob, ZeroNormChoice,
};

#[derive(Debug, Parser)]
#[command(name = "hce", version, about = "Hierarchical clustering entropy pipelines")]
pub struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, env = "HCE_THREADS")]
    pub threads: Option<usize>,
    /// Flat `key = value` file; keys are flag names, flags on the command
    /// line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster an input and extract the HCE hierarchy.
    Cluster(ClusterArgs),
    /// Extract the HCE hierarchy of an existing linkage.
    Hce(HceArgs),
    /// Generate a planted benchmark network.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// AMI table over a generator parameter grid.
    #[command(subcommand)]
    Sweep(SweepCommand),
    /// Compare two partitions.
    Ami(AmiArgs),
    /// Convert a consensus tree and membership file to a linkage.
    MccConvert(MccArgs),
    /// Filter time-series ROIs by skewness and peak z-score.
    Tsprep(TsprepArgs),
    /// Hierarchy plus null-community thresholds from circular shifts.
    Null(NullArgs),
    /// Repeat the run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
#[group(id = "input", required = true, multiple = false)]
pub struct InputArgs {
    /// Edge list TSV `src<TAB>dst<TAB>weight`.
    #[arg(long, group = "input")]
    pub edges: Option<PathBuf>,
    /// Dense matrix, CSV or HCEM binary.
    #[arg(long, group = "input")]
    pub dense: Option<PathBuf>,
    /// Time series, CSV or HCET binary.
    #[arg(long, group = "input")]
    pub series: Option<PathBuf>,
    /// Point coordinates CSV `roi,x,y,z`.
    #[arg(long, group = "input")]
    pub points: Option<PathBuf>,
    /// Linkage CSV; clustering is skipped.
    #[arg(long, group = "input")]
    pub linkage: Option<PathBuf>,
    /// Consensus tree CSV `parent,child,similarity`; needs --communities.
    #[arg(long, group = "input", requires = "communities")]
    pub tree: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Finest consensus membership `node,community` (with --tree).
    #[arg(long)]
    pub communities: Option<PathBuf>,
    /// Node count for edge lists with trailing isolated nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    pub distance: DistanceChoice,
    /// Apply w = ln(1 + w) to graph weights on ingest.
    #[arg(long)]
    pub log1p: bool,
    #[arg(long, value_enum, default_value = "orthogonal")]
    pub zero_norm: ZeroNormChoice,
    #[arg(long)]
    pub max_levels: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HceArgs {
    #[arg(long)]
    pub linkage: PathBuf,
    #[arg(long)]
    pub max_levels: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Hierarchical nested random graph.
    Hnrg(HnrgArgs),
    /// Asymmetric hierarchical benchmark.
    Hb(HbArgs),
}

#[derive(Debug, Args)]
pub struct HnrgParams {
    #[arg(long, default_value_t = 10)]
    pub s0: usize,
    #[arg(long, default_value_t = 4)]
    pub r: usize,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct HnrgArgs {
    #[command(flatten)]
    pub params: HnrgParams,
    #[arg(long, default_value_t = 16.0)]
    pub mean_degree: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct HbArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Edge fractions p_0..p_L, finest level first, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.6,0.25,0.1,0.05")]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SweepCommand {
    /// Sweep the HNRG mean degree.
    Hnrg(SweepHnrgArgs),
    /// Sweep HB edge fractions (p_1, p_2) with p_0 = 1 − p_1 − p_2 − p_3.
    Hb(SweepHbArgs),
}

#[derive(Debug, Args)]
pub struct SweepHnrgArgs {
    #[command(flatten)]
    pub params: HnrgParams,
    #[arg(long, value_delimiter = ',', required = true)]
    pub mean_degrees: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    #[arg(long, value_enum, default_value = "orthogonal")]
    pub zero_norm: ZeroNormChoice,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepHbArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub background: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p1: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p2: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "orthogonal")]
    pub zero_norm: ZeroNormChoice,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AmiArgs {
    /// Partition CSV `node,label`.
    pub u: PathBuf,
    pub v: PathBuf,
}

#[derive(Debug, Args)]
pub struct MccArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[arg(long)]
    pub communities: PathBuf,
    /// Output linkage CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TsprepArgs {
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct NullArgs {
    #[arg(long)]
    pub series: PathBuf,
    /// Region labels `roi,region`.
    #[arg(long)]
    pub regions: Option<PathBuf>,
    /// ROI coordinates `roi,x,y,z`.
    #[arg(long)]
    pub coords: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    /// Renormalization levels to extract (R_0..R_{levels−1}).
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

const NESTED: [&str; 2] = ["bench", "sweep"];
const COMMANDS: [&str; 9] = [
    "cluster", "hce", "bench", "sweep", "ami", "mcc-convert", "tsprep", "null", "rerun",
];

/// Reads a flat config file into `--key value` tokens. `key = true` becomes
/// a bare flag and `key = false` is dropped.
fn config_tokens(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut tokens = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::parse(path, i + 1, "expected `key = value`"));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() || key == "config" {
            return Err(CliError::parse(path, i + 1, format!("invalid key `{key}`")));
        }
        match value {
            "true" => tokens.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                tokens.push(format!("--{key}").into());
                tokens.push(value.into());
            }
        }
    }
    Ok(tokens)
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut iter = args.iter();
    while let Some(a) = iter.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return iter.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Splices config-file tokens right after the subcommand so that later
/// command-line flags override them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let tokens = config_tokens(&path)?;
    let Some(mut at) = args
        .iter()
        .skip(1)
        .position(|a| COMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map(|p| p + 1)
    else {
        return Ok(args);
    };
    if NESTED.contains(&args[at].to_string_lossy().as_ref()) {
        at += 1;
    }
    let at = (at + 1).min(args.len());
    let mut out = args[..at].to_vec();
    out.extend(tokens);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

fn override_self(cmd: clap::Command) -> clap::Command {
    cmd.args_override_self(true).mut_subcommands(override_self)
}

/// Parses arguments, with config-file values applied first. Help, version
/// and usage errors surface as clap errors.
pub fn parse(args: Vec<OsString>) -> Result<std::result::Result<Cli, clap::Error>> {
    let args = expand_config(args)?;
    let cmd = override_self(Cli::command());
    Ok(cmd
        .try_get_matches_from(args)
        .and_then(|m| Cli::from_arg_matches(&m)))
}

fn hnrg_config(p: &HnrgParams, mean_degree: f64) -> HnrgConfig {
    HnrgConfig {
        s0: p.s0,
        r: p.r,
        l: p.levels,
        mean_degree,
        rho: p.rho,
        seed: p.seed,
    }
}

impl ClusterArgs {
    pub fn job(&self) -> Result<Job> {
        let i = &self.input;
        let input = if let Some(p) = &i.edges {
            Input::Edges {
                path: absolute(p)?,
                nodes: self.nodes,
            }
        } else if let Some(p) = &i.dense {
            Input::Dense { path: absolute(p)? }
        } else if let Some(p) = &i.series {
            Input::Series { path: absolute(p)? }
        } else if let Some(p) = &i.points {
            Input::Points { path: absolute(p)? }
        } else if let Some(p) = &i.linkage {
            Input::Linkage { path: absolute(p)? }
        } else if let Some(p) = &i.tree {
            let communities = self
                .communities
                .as_deref()
                .ok_or_else(|| CliError::Validation("--tree needs --communities".into()))?;
            Input::Tree {
                path: absolute(p)?,
                communities: absolute(communities)?,
            }
        } else {
            return Err(CliError::Validation("exactly one input is required".into()));
        };
        if self.nodes.is_some() && i.edges.is_none() {
            return Err(CliError::Validation("--nodes applies to edge lists only".into()));
        }
        if self.communities.is_some() && i.tree.is_none() {
            return Err(CliError::Validation("--communities applies with --tree only".into()));
        }
        Ok(Job::Cluster(ClusterJob {
            input,
            distance: self.distance,
            log1p: self.log1p,
            zero_norm: self.zero_norm,
            max_levels: self.max_levels,
            seed: self.seed,
        }))
    }
}

impl HceArgs {
    pub fn job(&self) -> Result<Job> {
        Ok(Job::Cluster(ClusterJob {
            input: Input::Linkage {
                path: absolute(&self.linkage)?,
            },
            distance: DistanceChoice::Auto,
            log1p: false,
            zero_norm: ZeroNormChoice::Error,
            max_levels: self.max_levels,
            seed: self.seed,
        }))
    }
}

impl HnrgArgs {
    pub fn job(&self) -> Job {
        Job::BenchHnrg(hnrg_config(&self.params, self.mean_degree))
    }
}

impl HbArgs {
    pub fn job(&self) -> Job {
        Job::BenchHb(HbConfig::new(self.n, self.fractions.clone(), self.seed))
    }
}

impl SweepHnrgArgs {
    pub fn job(&self) -> Job {
        Job::SweepHnrg(HnrgSweepJob {
            base: hnrg_config(&self.params, self.mean_degrees.first().copied().unwrap_or(1.0)),
            mean_degrees: self.mean_degrees.clone(),
            instances: self.instances,
            seed: self.params.seed,
            zero_norm: self.zero_norm,
        })
    }
}

impl SweepHbArgs {
    pub fn job(&self) -> Job {
        Job::SweepHb(HbSweepJob {
            n: self.n,
            background: self.background,
            p1: self.p1.clone(),
            p2: self.p2.clone(),
            instances: self.instances,
            seed: self.seed,
            zero_norm: self.zero_norm,
        })
    }
}

impl TsprepArgs {
    pub fn job(&self) -> Result<Job> {
        Ok(Job::Tsprep(TsprepJob {
            series: absolute(&self.series)?,
        }))
    }
}

impl NullArgs {
    pub fn job(&self) -> Result<Job> {
        Ok(Job::Null(NullJob {
            series: absolute(&self.series)?,
            regions: self.regions.as_deref().map(absolute).transpose()?,
            coords: self.coords.as_deref().map(absolute).transpose()?,
            instances: self.instances,
            levels: self.levels,
            seed: self.seed,
        }))
    }
}
