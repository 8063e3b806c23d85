//! Command-line pipelines around `hce-core`: ingest, clustering, HCE
//! hierarchy extraction, benchmark generation and sweeps, partition
//! comparison, consensus-tree conversion and time-series null models.
//!
//! Every run that writes a directory also writes `manifest.json`, which
//! records the full job and input digests; `hce rerun` replays it.

pub mod args;
pub mod error;
pub mod formats;
pub mod jobs;
pub mod null;
pub mod pipeline;
pub mod report;
pub mod sweep;

use std::ffi::OsString;
use std::path::Path;

use args::{BenchCommand, Command, SweepCommand};
use error::{CliError, Result};
use jobs::{Job, Outputs};

/// Runs a job into `dir` and writes its manifest.
pub fn execute(job: &Job, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut outputs = Outputs::default();
    match job {
        Job::Cluster(c) => pipeline::run_cluster(c, dir, &mut outputs)?,
        Job::BenchHnrg(c) => pipeline::run_bench_hnrg(c, dir, &mut outputs)?,
        Job::BenchHb(c) => pipeline::run_bench_hb(c, dir, &mut outputs)?,
        Job::SweepHnrg(s) => sweep::run_sweep_hnrg(s, dir, &mut outputs)?,
        Job::SweepHb(s) => sweep::run_sweep_hb(s, dir, &mut outputs)?,
        Job::Tsprep(t) => null::run_tsprep(t, dir, &mut outputs)?,
        Job::Null(n) => null::run_null(n, dir, &mut outputs)?,
    }
    jobs::write_manifest(dir, job, outputs)
}

fn dispatch(command: Command) -> Result<()> {
    let (job, out) = match command {
        Command::Cluster(a) => (a.job()?, a.out),
        Command::Hce(a) => (a.job()?, a.out),
        Command::Bench(BenchCommand::Hnrg(a)) => (a.job(), a.out),
        Command::Bench(BenchCommand::Hb(a)) => (a.job(), a.out),
        Command::Sweep(SweepCommand::Hnrg(a)) => (a.job(), a.out),
        Command::Sweep(SweepCommand::Hb(a)) => (a.job(), a.out),
        Command::Tsprep(a) => (a.job()?, a.out),
        Command::Null(a) => (a.job()?, a.out),
        Command::Rerun(a) => {
            let manifest = jobs::read_manifest(&a.manifest)?;
            jobs::verify_inputs(&manifest)?;
            (manifest.job, a.out)
        }
        Command::Ami(a) => {
            println!("{}", pipeline::run_ami(&a.u, &a.v)?);
            return Ok(());
        }
        Command::MccConvert(a) => return pipeline::run_mcc_convert(&a.tree, &a.communities, &a.out),
    };
    execute(&job, &out)
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn run(args: Vec<OsString>) -> i32 {
    let cli = match args::parse(args) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return 2;
        }
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
