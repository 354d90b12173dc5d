use clap::error::ErrorKind;
use clap::Parser;
use corrsurf::{MetricKind, ModelKind};
use corrsurf_cli::args::{Cli, Command, FigureName, Format, GridArgs, Knn};
use corrsurf_cli::figure;

fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(std::iter::once("corrsurf").chain(args.iter().copied()))
}

fn grid(args: &[&str]) -> GridArgs {
    match parse(args).expect("parses").command {
        Command::Run(g) | Command::Sweep(g) => g,
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn run_flags_map_to_config() {
    let g = grid(&[
        "run", "--d", "5", "--p", "1e-3", "--model", "exp:10", "--shots", "100000", "--seed", "7",
    ]);
    let cfgs = g.configs();
    assert_eq!(cfgs.len(), 1);
    let c = &cfgs[0];
    assert_eq!(c.distance, 5);
    assert_eq!(c.p, 1e-3);
    assert_eq!(c.model, ModelKind::ExpArea { base: 10.0 });
    assert_eq!(c.shots, 100_000);
    assert_eq!(c.seed, 7);
    assert_eq!(c.rounds(), 5);
    assert_eq!(c.target_failures, None);
    assert_eq!(c.decoder.knn, None);
    assert_eq!(c.decoder.metric, MetricKind::Weighted);
}

#[test]
fn model_strings() {
    let model = |s: &str| grid(&["run", "--model", s]).model[0];
    assert_eq!(
        model("pair:1,2"),
        ModelKind::Pairwise {
            amplitude: 1.0,
            exponent: 2.0
        }
    );
    assert_eq!(
        model("column:0.1"),
        ModelKind::Column {
            amplitude: 0.1,
            xx_only: false
        }
    );
    assert_eq!(
        model("column:1:xx"),
        ModelKind::Column {
            amplitude: 1.0,
            xx_only: true
        }
    );
    assert_eq!(model("poly:3"), ModelKind::PolyArea { exponent: 3.0 });
    assert_eq!(model("none"), ModelKind::Baseline);
}

#[test]
fn defaults_are_defined() {
    let g = grid(&["sweep"]);
    assert_eq!(g.distances, vec![3]);
    assert_eq!(g.p, vec![1e-3]);
    assert_eq!(g.model, vec![ModelKind::Baseline]);
    assert_eq!(g.shots, 10_000);
    assert_eq!(g.rounds, None);
    assert_eq!(g.seed, 0);
    assert_eq!(g.format, Format::Csv);
    assert_eq!(g.out, None);
    assert_eq!(g.resume_from, 0);
    assert_eq!(g.exec.knn, Knn(None));
    assert!(!g.exec.timing);
}

#[test]
fn lists_repeat_or_comma_separate() {
    let g = grid(&[
        "sweep",
        "--d",
        "3,5",
        "--d",
        "7",
        "--p",
        "1e-3,2e-3",
        "--model",
        "none",
        "--model",
        "pair:1,2",
    ]);
    assert_eq!(g.distances, vec![3, 5, 7]);
    assert_eq!(g.p, vec![1e-3, 2e-3]);
    let cfgs = g.configs();
    assert_eq!(cfgs.len(), 12);
    // model, then distance, then p
    assert_eq!((cfgs[0].distance, cfgs[0].p), (3, 1e-3));
    assert_eq!((cfgs[1].distance, cfgs[1].p), (3, 2e-3));
    assert_eq!(cfgs[2].distance, 5);
    assert_eq!(cfgs[5].model, ModelKind::Baseline);
    assert!(matches!(cfgs[6].model, ModelKind::Pairwise { .. }));
}

#[test]
fn malformed_input_is_rejected() {
    let kind = |args: &[&str]| parse(args).unwrap_err().kind();
    assert_eq!(kind(&["run", "--bogus"]), ErrorKind::UnknownArgument);
    assert_eq!(kind(&["run", "--model", "exp"]), ErrorKind::ValueValidation);
    assert_eq!(
        kind(&["run", "--model", "pair:1"]),
        ErrorKind::ValueValidation
    );
    assert_eq!(
        kind(&["run", "--model", "exp:0.5"]),
        ErrorKind::ValueValidation
    );
    assert_eq!(kind(&["run", "--p", "1.5"]), ErrorKind::ValueValidation);
    assert_eq!(kind(&["run", "--knn", "2"]), ErrorKind::ValueValidation);
    assert_eq!(kind(&["run", "--threads", "0"]), ErrorKind::ValueValidation);
    assert_eq!(kind(&["run", "--format", "xml"]), ErrorKind::InvalidValue);
    assert_eq!(kind(&["figure", "fig3"]), ErrorKind::InvalidValue);
    assert_eq!(kind(&["frobnicate"]), ErrorKind::InvalidSubcommand);
}

#[test]
fn knn_and_metric_flags() {
    let g = grid(&["run", "--knn", "8", "--metric", "manhattan"]);
    let c = g.configs()[0];
    assert_eq!(c.decoder.knn, Some(8));
    assert_eq!(c.decoder.metric, MetricKind::Manhattan);
    assert_eq!(grid(&["run", "--knn", "off"]).exec.knn, Knn(None));
}

#[test]
fn target_failures_defaults_to_400_when_bare() {
    assert_eq!(
        grid(&["run", "--target-failures"]).configs()[0].target_failures,
        Some(400)
    );
    assert_eq!(
        grid(&["run", "--target-failures", "50"])
            .exec
            .target_failures,
        Some(50)
    );
}

#[test]
fn thread_flag_wins_over_environment() {
    std::env::set_var("CORRSURF_THREADS", "3");
    assert_eq!(grid(&["run"]).exec.threads, Some(3));
    assert_eq!(grid(&["run", "--threads", "2"]).exec.threads, Some(2));
    assert_eq!(
        grid(&["run", "--threads", "2"]).configs()[0].workers,
        Some(2)
    );
    std::env::remove_var("CORRSURF_THREADS");
}

fn figure_args(args: &[&str]) -> corrsurf_cli::args::FigureArgs {
    match parse(args).expect("parses").command {
        Command::Figure(f) => f,
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn figure_plans() {
    let plan = figure::plan(&figure_args(&[
        "figure", "fig4", "--n", "10", "--dmax", "7",
    ]))
    .unwrap();
    assert_eq!(plan.name, FigureName::Fig4);
    assert_eq!(plan.model, ModelKind::ExpArea { base: 10.0 });
    assert_eq!(plan.distances, vec![3, 5, 7]);
    assert_eq!(plan.p, figure::DEFAULT_P.to_vec());

    let plan = figure::plan(&figure_args(&["figure", "fig5", "--n", "2", "--dmax", "5"])).unwrap();
    assert_eq!(plan.model, ModelKind::PolyArea { exponent: 2.0 });
    assert_eq!(plan.distances, vec![3, 5]);

    let plan = figure::plan(&figure_args(&["figure", "fig6", "--a", "0.1"])).unwrap();
    assert_eq!(
        plan.model,
        ModelKind::Pairwise {
            amplitude: 0.1,
            exponent: 2.0
        }
    );
    assert_eq!(plan.distances, vec![3, 5, 7, 9]);

    let plan = figure::plan(&figure_args(&["figure", "fig7", "--a", "0.1"])).unwrap();
    assert_eq!(
        plan.model,
        ModelKind::Column {
            amplitude: 0.1,
            xx_only: false
        }
    );
}

#[test]
fn figure_plan_rejects_foreign_flags() {
    assert!(figure::plan(&figure_args(&["figure", "fig2", "--n", "3"])).is_err());
    assert!(figure::plan(&figure_args(&["figure", "fig7", "--n", "3"])).is_err());
    assert!(figure::plan(&figure_args(&["figure", "fig4", "--a", "1"])).is_err());
    assert!(figure::plan(&figure_args(&["figure", "fig5", "--n", "1"])).is_err());
    assert!(figure::plan(&figure_args(&["figure", "fig2", "--dmax", "2"])).is_err());
}
