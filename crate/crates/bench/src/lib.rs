//! Fixtures shared by the benchmarks.

use corrsurf::montecarlo::Simulator;
use corrsurf::{DecoderOptions, ModelKind, NoiseModel};

/// Simulator for a memory experiment of `d` rounds at distance `d`.
pub fn simulator(d: usize, p: f64, kind: ModelKind) -> Simulator {
    let model = NoiseModel::new(p, kind).expect("valid model");
    Simulator::new(d, model, d, DecoderOptions::default()).expect("valid distance")
}
