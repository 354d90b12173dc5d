//! Shot orchestration, failure tallies and per-round logical error rates.
//!
//! Shot `k` of a run draws all of its randomness from a ChaCha8 stream keyed
//! by `(seed, k)`, and tallies are plain sums, so results do not depend on the
//! worker count or on how shots are scheduled.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{Decoder, DecoderOptions, Metric, MetricKind, ShotDecision};
use crate::error::Error;
use crate::frame::{sample_faults, Fault, ResponseTable};
use crate::lattice::{Lattice, RoundCircuit};
use crate::noise::{ModelKind, NoiseModel, RoundNoise};

/// Shots per scheduling unit. Also the granularity of the target-failures
/// stopping rule.
pub const BATCH: u64 = 1024;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub distance: usize,
    pub p: f64,
    pub model: ModelKind,
    /// Shot budget; the cap when `target_failures` is set.
    pub shots: u64,
    /// Noisy rounds per shot; defaults to the distance.
    pub rounds: Option<usize>,
    pub seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Stop once this many logical-X failures have been seen.
    pub target_failures: Option<u64>,
    pub decoder: DecoderOptions,
}

impl RunConfig {
    pub fn new(distance: usize, p: f64, model: ModelKind, shots: u64, seed: u64) -> Self {
        Self {
            distance,
            p,
            model,
            shots,
            rounds: None,
            seed,
            workers: None,
            target_failures: None,
            decoder: DecoderOptions::default(),
        }
    }

    pub fn rounds(&self) -> usize {
        self.rounds.unwrap_or(self.distance)
    }

    pub fn noise_model(&self) -> Result<NoiseModel, Error> {
        NoiseModel::new(self.p, self.model)
    }

    /// Reject configs that `estimate` would refuse, without building anything.
    pub fn validate(&self) -> Result<(), Error> {
        if self.distance < 2 {
            return Err(Error::DistanceTooSmall(self.distance));
        }
        if self.shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        if self.rounds() == 0 {
            return Err(Error::InvalidConfig("rounds must be at least 1".into()));
        }
        if self.decoder.knn == Some(0) {
            return Err(Error::InvalidConfig("knn must be at least 1".into()));
        }
        self.noise_model()?;
        Ok(())
    }
}

/// Failure counts over a set of shots. Merging is associative and
/// commutative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tally {
    pub shots: u64,
    pub failures_x: u64,
    pub failures_z: u64,
}

impl Tally {
    pub fn record(&mut self, d: ShotDecision) {
        self.shots += 1;
        self.failures_x += d.fail_x as u64;
        self.failures_z += d.fail_z as u64;
    }

    pub fn merge(self, other: Tally) -> Tally {
        Tally {
            shots: self.shots + other.shots,
            failures_x: self.failures_x + other.failures_x,
            failures_z: self.failures_z + other.failures_z,
        }
    }
}

/// Everything needed to run shots for one (distance, noise model) pair.
/// Immutable and shareable across workers.
pub struct Simulator {
    lattice: Lattice,
    circuit: RoundCircuit,
    noise: RoundNoise,
    responses: ResponseTable,
    metric: Metric,
    rounds: usize,
    decoder: DecoderOptions,
}

impl Simulator {
    pub fn new(
        distance: usize,
        model: NoiseModel,
        rounds: usize,
        decoder: DecoderOptions,
    ) -> Result<Self, Error> {
        let lattice = Lattice::new(distance)?;
        let circuit = RoundCircuit::schedule(&lattice);
        let noise = RoundNoise::new(model, &lattice, &circuit);
        let responses = ResponseTable::new(&lattice, &circuit);
        let metric = match decoder.metric {
            MetricKind::Weighted => {
                Metric::weighted(&lattice, &circuit, &responses, model.p, rounds)
            }
            MetricKind::Circuit => Metric::circuit(&lattice, &responses, rounds),
            MetricKind::Manhattan => Metric::manhattan(&lattice),
        };
        Ok(Self {
            lattice,
            circuit,
            noise,
            responses,
            metric,
            rounds,
            decoder,
        })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self, Error> {
        cfg.validate()?;
        Self::new(cfg.distance, cfg.noise_model()?, cfg.rounds(), cfg.decoder)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn circuit(&self) -> &RoundCircuit {
        &self.circuit
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// Random stream of shot `index`.
    pub fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        rng
    }

    /// Simulate and decode shot `index`.
    pub fn shot(&self, seed: u64, index: u64, scratch: &mut ShotScratch) -> ShotDecision {
        let mut rng = Self::shot_rng(seed, index);
        scratch.faults.clear();
        sample_faults(
            &self.lattice,
            &self.noise,
            self.rounds,
            &mut rng,
            &mut scratch.faults,
        );
        if scratch.faults.is_empty() {
            return ShotDecision::default();
        }
        let outcome = self.responses.outcome(
            &self.lattice,
            &scratch.faults,
            self.rounds,
            &mut scratch.keys,
        );
        if outcome.events.is_empty() && !outcome.flip_x && !outcome.flip_z {
            return ShotDecision::default();
        }
        Decoder::new(&self.metric, self.decoder).decode_shot(&outcome)
    }

    /// Tally of shots `range`.
    pub fn run_range(&self, seed: u64, range: std::ops::Range<u64>) -> Tally {
        let mut scratch = ShotScratch::default();
        let mut tally = Tally::default();
        for index in range {
            tally.record(self.shot(seed, index, &mut scratch));
        }
        tally
    }
}

/// Reusable per-worker buffers.
#[derive(Debug, Default)]
pub struct ShotScratch {
    faults: Vec<Fault>,
    keys: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub p_shot: f64,
    pub p_l: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// One row of results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub model: String,
    pub d: usize,
    pub p: f64,
    pub shots: u64,
    #[serde(rename = "T")]
    pub rounds: usize,
    pub failures_x: u64,
    pub p_shot_x: f64,
    pub p_l_x: f64,
    pub ci_low_x: f64,
    pub ci_high_x: f64,
    pub failures_z: u64,
    pub p_shot_z: f64,
    pub p_l_z: f64,
    pub ci_low_z: f64,
    pub ci_high_z: f64,
    pub seed: u64,
    pub seconds: f64,
}

impl RunStats {
    pub fn from_tally(cfg: &RunConfig, tally: Tally, seconds: f64) -> Self {
        let rounds = cfg.rounds();
        let x = rate_estimate(tally.failures_x, tally.shots, rounds);
        let z = rate_estimate(tally.failures_z, tally.shots, rounds);
        Self {
            model: cfg.model.to_string(),
            d: cfg.distance,
            p: cfg.p,
            shots: tally.shots,
            rounds,
            failures_x: tally.failures_x,
            p_shot_x: x.p_shot,
            p_l_x: x.p_l,
            ci_low_x: x.ci_low,
            ci_high_x: x.ci_high,
            failures_z: tally.failures_z,
            p_shot_z: z.p_shot,
            p_l_z: z.p_l,
            ci_low_z: z.ci_low,
            ci_high_z: z.ci_high,
            seed: cfg.seed,
            seconds,
        }
    }
}

/// Per-round logical error rate from a per-shot failure probability over
/// `rounds` rounds: `(1 - (1 - 2 p_shot)^(1/rounds)) / 2`, clamped to
/// `[0, 1/2]`.
pub fn per_round(p_shot: f64, rounds: usize) -> f64 {
    if p_shot <= 0.0 {
        return 0.0;
    }
    if p_shot >= 0.5 {
        return 0.5;
    }
    let p = 0.5 * (1.0 - (1.0 - 2.0 * p_shot).powf(1.0 / rounds as f64));
    p.clamp(0.0, 0.5)
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let phat = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if k == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let high = if k as f64 == n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (low, high)
}

pub fn rate_estimate(failures: u64, shots: u64, rounds: usize) -> RateEstimate {
    let p_shot = if shots == 0 {
        0.0
    } else {
        failures as f64 / shots as f64
    };
    let (lo, hi) = wilson_interval(failures, shots, Z95);
    let p_l = per_round(p_shot, rounds);
    RateEstimate {
        p_shot,
        p_l,
        ci_low: per_round(lo, rounds).min(p_l),
        ci_high: per_round(hi, rounds).max(p_l),
    }
}

/// Run `cfg` and summarize. `stop` aborts between batches (returns `None`).
pub fn estimate_with(
    cfg: &RunConfig,
    stop: Option<&AtomicBool>,
) -> Result<Option<RunStats>, Error> {
    let sim = Simulator::from_config(cfg)?;
    let start = Instant::now();
    let run = || tally_shots(&sim, cfg, stop);
    let tally = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(run),
        None => run(),
    };
    Ok(tally.map(|t| RunStats::from_tally(cfg, t, start.elapsed().as_secs_f64())))
}

pub fn estimate(cfg: &RunConfig) -> Result<RunStats, Error> {
    Ok(estimate_with(cfg, None)?.expect("no stop flag"))
}

fn tally_shots(sim: &Simulator, cfg: &RunConfig, stop: Option<&AtomicBool>) -> Option<Tally> {
    let batches = cfg.shots.div_ceil(BATCH);
    let batch = |b: u64| sim.run_range(cfg.seed, b * BATCH..((b + 1) * BATCH).min(cfg.shots));
    let stopped = || stop.is_some_and(|s| s.load(Ordering::Relaxed));
    let group = (rayon::current_num_threads() as u64 * 4).max(1);

    let mut total = Tally::default();
    let mut next = 0;
    while next < batches {
        if stopped() {
            return None;
        }
        let end = (next + group).min(batches);
        let tallies: Vec<Tally> = (next..end).into_par_iter().map(batch).collect();
        for t in tallies {
            total = total.merge(t);
            if cfg
                .target_failures
                .is_some_and(|target| total.failures_x >= target)
            {
                return Some(total);
            }
        }
        next = end;
    }
    Some(total)
}

/// Evaluate each config in order; one row per config.
pub fn sweep(cfgs: &[RunConfig]) -> Result<Vec<RunStats>, Error> {
    if cfgs.is_empty() {
        return Err(Error::InvalidConfig("empty sweep".into()));
    }
    cfgs.iter().map(estimate).collect()
}

/// Least-squares slope of `ln p_L` against `ln p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

/// Minimum failures per row for [`fit_slope`].
pub const MIN_FIT_FAILURES: u64 = 100;

pub fn fit_slope(rows: &[RunStats]) -> Result<SlopeFit, Error> {
    if rows.len() < 3 {
        return Err(Error::SlopeFit(format!(
            "need at least 3 rows, got {}",
            rows.len()
        )));
    }
    if rows.iter().any(|r| r.d != rows[0].d) {
        return Err(Error::SlopeFit("rows mix code distances".into()));
    }
    for (k, r) in rows.iter().enumerate() {
        if rows[..k].iter().any(|o| o.p == r.p) {
            return Err(Error::SlopeFit(format!("duplicate p = {}", r.p)));
        }
        if r.failures_x < MIN_FIT_FAILURES {
            return Err(Error::SlopeFit(format!(
                "row p = {} has {} failures, need {MIN_FIT_FAILURES}",
                r.p, r.failures_x
            )));
        }
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.p.ln(), r.p_l_x.ln())).collect();
    Ok(least_squares(&points))
}

pub fn least_squares(points: &[(f64, f64)]) -> SlopeFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let stderr = if points.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    SlopeFit {
        slope,
        stderr,
        intercept,
    }
}
