//! Command-line front end for the corrsurf simulator.

pub mod args;
pub mod figure;
pub mod output;

use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::sync::atomic::AtomicBool;

use corrsurf::montecarlo::estimate_with;
use corrsurf::selftest;

use args::{Cli, Command, Format, GridArgs, SelftestArgs};
use output::RowWriter;

/// Why a command did not complete.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration; exit status 2.
    Usage(String),
    /// Everything else; exit status 1.
    Runtime(anyhow::Error),
    /// Stopped by a signal. Carries the `--resume-from` index when resumable.
    Interrupted(Option<usize>),
}

impl Failure {
    pub fn runtime<E: Into<anyhow::Error>>(e: E) -> Self {
        Failure::Runtime(e.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Runtime(e) => write!(f, "{e:#}"),
            Failure::Interrupted(Some(i)) => {
                write!(f, "interrupted; completed rows were flushed, rerun with --resume-from {i} to continue")
            }
            Failure::Interrupted(None) => write!(f, "interrupted"),
        }
    }
}

pub fn execute(cli: Cli, stop: &AtomicBool) -> Result<(), Failure> {
    match cli.command {
        Command::Run(g) => grid(&g, true, stop),
        Command::Sweep(g) => grid(&g, false, stop),
        Command::Figure(f) => {
            let dir = figure::run(&f, stop)?;
            eprintln!("wrote {}", dir.display());
            Ok(())
        }
        Command::Selftest(s) => run_selftest(&s),
    }
}

fn open_output(g: &GridArgs) -> Result<Box<dyn Write>, Failure> {
    let Some(path) = &g.out else {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    };
    let resuming = g.resume_from > 0;
    if resuming && g.format == Format::Json && fs::metadata(path).is_ok_and(|m| m.len() > 0) {
        return Err(Failure::Usage(
            "resumed JSON output starts a new array; choose a fresh --out".into(),
        ));
    }
    let file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(resuming)
        .truncate(!resuming)
        .open(path)
        .map_err(|e| Failure::runtime(anyhow::Error::new(e).context(path.display().to_string())))?;
    Ok(Box::new(BufWriter::new(file)))
}

fn grid(g: &GridArgs, single: bool, stop: &AtomicBool) -> Result<(), Failure> {
    let cfgs = g.configs();
    if single && cfgs.len() != 1 {
        return Err(Failure::Usage(format!(
            "run takes one configuration, got {}; use sweep for grids",
            cfgs.len()
        )));
    }
    for cfg in &cfgs {
        cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if g.resume_from > cfgs.len() {
        return Err(Failure::Usage(format!(
            "--resume-from {} exceeds the {} configurations",
            g.resume_from,
            cfgs.len()
        )));
    }

    let header = g.resume_from == 0 || g.format == Format::Json;
    let mut rows = RowWriter::new(g.format, open_output(g)?, header).map_err(Failure::runtime)?;
    for (i, cfg) in cfgs.iter().enumerate().skip(g.resume_from) {
        eprintln!(
            "[{}/{}] {} d={} p={}",
            i + 1,
            cfgs.len(),
            cfg.model,
            cfg.distance,
            cfg.p
        );
        let Some(mut stats) = estimate_with(cfg, Some(stop)).map_err(Failure::runtime)? else {
            rows.finish().map_err(Failure::runtime)?;
            return Err(Failure::Interrupted(Some(i)));
        };
        eprintln!(
            "      {} x / {} z failures in {} shots, p_l_x {:.3e} ({:.1}s)",
            stats.failures_x, stats.failures_z, stats.shots, stats.p_l_x, stats.seconds
        );
        if !g.exec.timing {
            stats.seconds = 0.0;
        }
        rows.write(&stats).map_err(Failure::runtime)?;
    }
    rows.finish().map_err(Failure::runtime)?;
    Ok(())
}

fn run_selftest(s: &SelftestArgs) -> Result<(), Failure> {
    let results = selftest::run_all(s.seed);
    let mut out = io::stdout().lock();
    for r in &results {
        let tag = if r.passed { "ok  " } else { "FAIL" };
        writeln!(out, "{tag} {}: {}", r.name, r.detail).map_err(Failure::runtime)?;
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(Failure::runtime(anyhow::anyhow!(
            "{failed} self-test check(s) failed"
        )));
    }
    Ok(())
}
