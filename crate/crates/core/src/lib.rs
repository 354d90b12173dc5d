//! Rotated surface code memory experiments under correlated Pauli noise.
//!
//! The pipeline is: build a [`Lattice`] and its [`RoundCircuit`], inject
//! faults from a [`NoiseModel`], propagate them to [`DetectionEvent`]s, decode
//! with minimum-weight perfect matching, and tally logical failures over many
//! shots with [`montecarlo`].

pub mod decoder;
pub mod error;
pub mod frame;
pub mod lattice;
pub mod montecarlo;
pub mod noise;
pub mod oracle;
pub mod selftest;

pub use decoder::{
    Decoder, DecoderOptions, EventMatching, Matching, MatchingGraph, Metric, MetricKind, Pairing,
    ShotDecision,
};
pub use error::Error;
pub use frame::{DetectionEvent, Fault, PauliFrame, ResponseTable, ShotOutcome, SyndromeRecord};
pub use lattice::{Coord, Gate, Lattice, QubitRole, RoundCircuit, Stabilizer, StabilizerKind};
pub use montecarlo::{estimate, fit_slope, sweep, RunConfig, RunStats, SlopeFit, Tally};
pub use noise::{ModelKind, NoiseModel, Pauli, PauliEvent, RoundNoise};
