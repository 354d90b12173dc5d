//! Internal consistency checks runnable from a release binary.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decoder::{mwpm, Decoder, DecoderOptions, MatchingGraph, Metric, MetricKind};
use crate::frame::{simulate, Fault, ResponseTable};
use crate::lattice::{Coord, Lattice, RoundCircuit};
use crate::noise::{expected_injected_rate, ModelKind, NoiseModel, Pauli, PauliEvent, RoundNoise};
use crate::oracle::brute_force_mwpm;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Run every check; each reports independently.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        matcher_vs_brute_force(seed),
        fast_path_vs_frame(seed),
        single_faults_corrected(),
        noise_frequencies(seed),
    ]
}

/// Observed against expected noise occurrences at one qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Injection {
    pub qubit: Coord,
    pub observed: u64,
    pub expected: f64,
}

impl Injection {
    /// Deviation in units of the Poisson standard deviation, which bounds
    /// that of a sum of independent indicators.
    pub fn sigmas(&self) -> f64 {
        (self.observed as f64 - self.expected) / self.expected.sqrt()
    }
}

/// Count noise occurrences touching `qubits` over `rounds` sampled rounds.
pub fn injection_counts(
    model: NoiseModel,
    d: usize,
    rounds: usize,
    seed: u64,
    qubits: &[Coord],
) -> Vec<Injection> {
    let lat = Lattice::new(d).expect("valid distance");
    let noise = RoundNoise::new(model, &lat, &RoundCircuit::schedule(&lat));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; lat.qubit_count()];
    let (mut out, mut touched) = (Vec::new(), Vec::new());
    for _ in 0..rounds {
        out.clear();
        touched.clear();
        noise.sample_round_traced(&lat, &mut rng, &mut out, &mut touched);
        for q in &touched {
            counts[lat.index(*q)] += 1;
        }
    }
    qubits
        .iter()
        .map(|&q| Injection {
            qubit: q,
            observed: counts[lat.index(q)],
            expected: expected_injected_rate(&model, &lat, q) * rounds as f64,
        })
        .collect()
}

/// Sampled occurrence frequencies of every model family within 3σ of the
/// analytic rates.
pub fn noise_frequencies(seed: u64) -> CheckResult {
    let kinds = [
        ModelKind::Baseline,
        ModelKind::ExpArea { base: 10.0 },
        ModelKind::PolyArea { exponent: 3.0 },
        ModelKind::Pairwise {
            amplitude: 1.0,
            exponent: 2.0,
        },
        ModelKind::Column {
            amplitude: 1.0,
            xx_only: false,
        },
    ];
    let qubits = [
        Coord::new(0, 0),
        Coord::new(4, 4),
        Coord::new(3, 4),
        Coord::new(8, 7),
    ];
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for kind in kinds {
        let model = NoiseModel::new(1e-2, kind).expect("valid model");
        for inj in injection_counts(model, 5, 200_000, seed, &qubits) {
            worst = worst.max(inj.sigmas().abs());
            bad += (inj.sigmas().abs() >= 3.0) as usize;
        }
    }
    CheckResult {
        name: "noise-frequencies",
        passed: bad == 0,
        detail: format!("{bad} qubit/model cells beyond 3 sigma, worst {worst:.2}"),
    }
}

/// Blossom matcher against exhaustive enumeration on random complete graphs.
pub fn matcher_vs_brute_force(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    let trials = 300;
    for _ in 0..trials {
        let n = 2 * rng.random_range(1..=6);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b, rng.random_range(0..20)));
            }
        }
        let expect = brute_force_mwpm(n, &edges);
        let got = mwpm(&MatchingGraph::from_edges(n, edges))
            .ok()
            .map(|m| m.weight);
        bad += (expect != got) as usize;
    }
    CheckResult {
        name: "matcher-vs-brute-force",
        passed: bad == 0,
        detail: format!("{bad}/{trials} mismatches"),
    }
}

/// Response-table outcomes against full frame propagation.
pub fn fast_path_vs_frame(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut bad = 0;
    let trials = 200;
    for d in [3, 5] {
        let lat = Lattice::new(d).expect("valid distance");
        let circuit = RoundCircuit::schedule(&lat);
        let table = ResponseTable::new(&lat, &circuit);
        let mut scratch = Vec::new();
        for _ in 0..trials {
            let faults: Vec<Fault> = (0..rng.random_range(1..6))
                .map(|_| Fault {
                    round: rng.random_range(0..d),
                    event: PauliEvent {
                        tick: rng.random_range(0..=RoundCircuit::LAYERS as u8),
                        qubit: lat.coord(rng.random_range(0..lat.qubit_count())),
                        pauli: [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)],
                    },
                })
                .collect();
            let fast = table.outcome(&lat, &faults, d, &mut scratch);
            bad += (fast != simulate(&lat, &circuit, &faults, d)) as usize;
        }
    }
    CheckResult {
        name: "fast-path-vs-frame",
        passed: bad == 0,
        detail: format!("{bad}/{} mismatches", 2 * trials),
    }
}

/// Every single Pauli landing between rounds (perfect measurements, data or
/// measure qubit) at distance 3 and 5 is decoded without a logical failure.
pub fn single_faults_corrected() -> CheckResult {
    let mut bad = 0;
    let mut total = 0;
    for d in [3, 5] {
        let lat = Lattice::new(d).expect("valid distance");
        let circuit = RoundCircuit::schedule(&lat);
        let metric = Metric::new(&lat, &circuit, MetricKind::Weighted, 1e-3, d);
        let decoder = Decoder::new(&metric, DecoderOptions::default());
        for round in 0..d {
            for q in 0..lat.qubit_count() {
                for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let fault = Fault {
                        round,
                        event: PauliEvent {
                            tick: RoundCircuit::LAYERS as u8,
                            qubit: lat.coord(q),
                            pauli,
                        },
                    };
                    let out = simulate(&lat, &circuit, &[fault], d);
                    let dec = decoder.decode_shot(&out);
                    total += 1;
                    bad += (dec.fail_x || dec.fail_z) as usize;
                }
            }
        }
    }
    CheckResult {
        name: "single-faults-corrected",
        passed: bad == 0,
        detail: format!("{bad}/{total} single faults cause a logical failure"),
    }
}
