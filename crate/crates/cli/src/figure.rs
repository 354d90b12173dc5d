//! Dataset grids for the standard figure layouts: one `p pL` file per
//! distance plus a JSON manifest.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;

use corrsurf::{montecarlo::estimate_with, ModelKind, RunConfig, RunStats};
use serde::{Deserialize, Serialize};

use crate::args::{FigureArgs, FigureName, Format};
use crate::output::RowWriter;
use crate::Failure;

/// Physical error rates used when `--p` is absent.
pub const DEFAULT_P: [f64; 7] = [1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2];

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePlan {
    pub name: FigureName,
    pub model: ModelKind,
    pub distances: Vec<usize>,
    pub p: Vec<f64>,
}

impl FigureName {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureName::Fig2 => "fig2",
            FigureName::Fig4 => "fig4",
            FigureName::Fig5 => "fig5",
            FigureName::Fig6 => "fig6",
            FigureName::Fig7 => "fig7",
        }
    }
}

pub fn plan(args: &FigureArgs) -> Result<FigurePlan, String> {
    let name = args.name.as_str();
    let reject = |flag: &str| Err(format!("{name} takes no {flag}"));
    let model = match args.name {
        FigureName::Fig2 => {
            if args.n.is_some() {
                return reject("--n");
            }
            if args.a.is_some() {
                return reject("--a");
            }
            ModelKind::Baseline
        }
        FigureName::Fig4 => {
            if args.a.is_some() {
                return reject("--a");
            }
            ModelKind::ExpArea {
                base: args.n.unwrap_or(10.0),
            }
        }
        FigureName::Fig5 => {
            if args.a.is_some() {
                return reject("--a");
            }
            ModelKind::PolyArea {
                exponent: args.n.unwrap_or(2.0),
            }
        }
        FigureName::Fig6 => ModelKind::Pairwise {
            amplitude: args.a.unwrap_or(1.0),
            exponent: args.n.unwrap_or(2.0),
        },
        FigureName::Fig7 => {
            if args.n.is_some() {
                return reject("--n");
            }
            ModelKind::Column {
                amplitude: args.a.unwrap_or(1.0),
                xx_only: false,
            }
        }
    };
    model.validate().map_err(|e| e.to_string())?;
    if args.dmax < 3 {
        return Err(format!("--dmax must be at least 3, got {}", args.dmax));
    }
    let p = if args.p.is_empty() {
        DEFAULT_P.to_vec()
    } else {
        args.p.clone()
    };
    Ok(FigurePlan {
        name: args.name,
        model,
        distances: (3..=args.dmax).step_by(2).collect(),
        p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub d: usize,
    pub file: String,
    /// Rows in the file; zero-failure cells are left out.
    pub points: usize,
    pub zero_failure_p: Vec<f64>,
    pub written: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub figure: String,
    pub model: String,
    pub metric: String,
    pub columns: [String; 2],
    pub p: Vec<f64>,
    pub shots: u64,
    pub target_failures: Option<u64>,
    pub seed: u64,
    pub rounds: String,
    pub table: Option<String>,
    pub datasets: Vec<Dataset>,
    pub dry_run: bool,
    pub complete: bool,
}

fn dataset_file(name: FigureName, d: usize) -> String {
    format!("{}_d{d}.dat", name.as_str())
}

fn write_dataset(path: &Path, rows: &[RunStats]) -> std::io::Result<()> {
    let mut text = String::new();
    for r in rows.iter().filter(|r| r.failures_x > 0) {
        text.push_str(&format!("{} {}\n", r.p, r.p_l_x));
    }
    fs::write(path, text)
}

fn write_manifest(dir: &Path, m: &Manifest) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(m).map_err(Failure::runtime)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text).map_err(Failure::runtime)
}

/// Run the grid and write everything under the output directory.
pub fn run(args: &FigureArgs, stop: &AtomicBool) -> Result<PathBuf, Failure> {
    let plan = plan(args).map_err(Failure::Usage)?;
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(plan.name.as_str()));
    let config = |d: usize, p: f64| {
        let mut cfg = RunConfig::new(d, p, plan.model, args.shots.max(1), args.seed);
        args.exec.apply(&mut cfg);
        cfg
    };
    for &d in &plan.distances {
        for &p in &plan.p {
            config(d, p)
                .validate()
                .map_err(|e| Failure::Usage(e.to_string()))?;
        }
    }
    fs::create_dir_all(&dir).map_err(Failure::runtime)?;

    let dry_run = args.shots == 0;
    let table = format!("{}.csv", plan.name.as_str());
    let mut manifest = Manifest {
        figure: plan.name.as_str().into(),
        model: plan.model.to_string(),
        metric: args.exec.metric.to_string(),
        columns: ["p".into(), "p_l_x".into()],
        p: plan.p.clone(),
        shots: args.shots,
        target_failures: args.exec.target_failures,
        seed: args.seed,
        rounds: "d".into(),
        table: (!dry_run).then(|| table.clone()),
        datasets: plan
            .distances
            .iter()
            .map(|&d| Dataset {
                d,
                file: dataset_file(plan.name, d),
                points: 0,
                zero_failure_p: Vec::new(),
                written: false,
            })
            .collect(),
        dry_run,
        complete: false,
    };
    if dry_run {
        write_manifest(&dir, &manifest)?;
        return Ok(dir);
    }

    let csv = fs::File::create(dir.join(&table)).map_err(Failure::runtime)?;
    let mut rows_out =
        RowWriter::new(Format::Csv, BufWriter::new(csv), true).map_err(Failure::runtime)?;
    let cells = plan.distances.len() * plan.p.len();
    let mut done = 0;
    for (slot, &d) in plan.distances.iter().enumerate() {
        let mut rows = Vec::new();
        for &p in &plan.p {
            done += 1;
            eprintln!("[{done}/{cells}] {} d={d} p={p}", plan.model);
            let Some(mut stats) =
                estimate_with(&config(d, p), Some(stop)).map_err(Failure::runtime)?
            else {
                rows_out.finish().map_err(Failure::runtime)?;
                write_manifest(&dir, &manifest)?;
                return Err(Failure::Interrupted(None));
            };
            if stats.failures_x == 0 {
                eprintln!(
                    "warning: no logical failures at d={d} p={p} in {} shots; point omitted",
                    stats.shots
                );
                manifest.datasets[slot].zero_failure_p.push(p);
            }
            if !args.exec.timing {
                stats.seconds = 0.0;
            }
            rows_out.write(&stats).map_err(Failure::runtime)?;
            rows.push(stats);
        }
        let entry = &mut manifest.datasets[slot];
        write_dataset(&dir.join(&entry.file), &rows).map_err(Failure::runtime)?;
        entry.points = rows.iter().filter(|r| r.failures_x > 0).count();
        entry.written = true;
    }
    rows_out.finish().map_err(Failure::runtime)?;
    manifest.complete = true;
    write_manifest(&dir, &manifest)?;
    Ok(dir)
}
