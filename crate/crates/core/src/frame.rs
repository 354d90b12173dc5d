//! Pauli-frame propagation through the round circuit and detection events.
//!
//! [`simulate`] is the reference path: it carries X/Z error bits gate by gate.
//! [`ResponseTable`] is the fast path used by the Monte Carlo loop. The
//! circuit is Clifford and time-invariant, so the detection events and
//! logical flips caused by a Pauli at a given (tick, qubit) depend only on the
//! round it lands in, and a shot's outcome is the XOR of the responses of its
//! faults.

use rand::Rng;

use crate::error::Error;
use crate::lattice::{Gate, Lattice, RoundCircuit, StabilizerKind};
use crate::noise::{Pauli, PauliEvent, RoundNoise};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliFrame {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
}

impl PauliFrame {
    pub fn new(qubits: usize) -> Self {
        Self {
            x: vec![false; qubits],
            z: vec![false; qubits],
        }
    }

    pub fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) {
        self.x[qubit] ^= pauli.has_x();
        self.z[qubit] ^= pauli.has_z();
    }

    pub fn pauli(&self, qubit: usize) -> Option<Pauli> {
        Pauli::from_bits(self.x[qubit], self.z[qubit])
    }

    /// Conjugate the frame by `gate`. Returns the outcome flip for a
    /// measurement, `None` otherwise.
    pub fn apply_gate(&mut self, gate: &Gate, lat: &Lattice) -> Option<bool> {
        match *gate {
            Gate::Init(q) => {
                let k = lat.index(q);
                self.x[k] = false;
                self.z[k] = false;
            }
            Gate::Hadamard(q) => {
                let k = lat.index(q);
                std::mem::swap(&mut self.x[k], &mut self.z[k]);
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (lat.index(control), lat.index(target));
                self.x[t] ^= self.x[c];
                self.z[c] ^= self.z[t];
            }
            Gate::Measure(q) => return Some(self.x[lat.index(q)]),
            Gate::Identity(_) => {}
        }
        None
    }
}

/// Stabilizer outcomes of one round (or of the final data readout).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyndromeRecord {
    pub round: usize,
    pub x: Vec<bool>,
    pub z: Vec<bool>,
}

impl SyndromeRecord {
    fn zeros(round: usize, lat: &Lattice) -> Self {
        Self {
            round,
            x: vec![false; lat.stabilizers(StabilizerKind::X).len()],
            z: vec![false; lat.stabilizers(StabilizerKind::Z).len()],
        }
    }

    fn outcomes(&self, kind: StabilizerKind) -> &[bool] {
        match kind {
            StabilizerKind::X => &self.x,
            StabilizerKind::Z => &self.z,
        }
    }
}

/// A change of stabilizer `stabilizer` (index within its kind) between round
/// `round - 1` and `round`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DetectionEvent {
    pub kind: StabilizerKind,
    pub round: usize,
    pub stabilizer: usize,
}

/// Difference consecutive records. `records` must be rounds `0..=T` in order,
/// the last one being the perfect final readout; round 0 is compared against
/// the all-zero reference.
pub fn detection_events(records: &[SyndromeRecord]) -> Result<Vec<DetectionEvent>, Error> {
    if records.len() < 2 {
        return Err(Error::IncompleteRecords(format!(
            "need at least one round plus the final readout, got {} records",
            records.len()
        )));
    }
    let (nx, nz) = (records[0].x.len(), records[0].z.len());
    for (k, r) in records.iter().enumerate() {
        if r.round != k {
            return Err(Error::IncompleteRecords(format!(
                "record {k} is labelled round {}",
                r.round
            )));
        }
        if r.x.len() != nx || r.z.len() != nz {
            return Err(Error::IncompleteRecords(format!(
                "round {k} has {}+{} outcomes, expected {nx}+{nz}",
                r.x.len(),
                r.z.len()
            )));
        }
    }
    let mut events = Vec::new();
    for kind in StabilizerKind::BOTH {
        let mut previous = vec![false; records[0].outcomes(kind).len()];
        for r in records {
            for (stabilizer, (&now, before)) in
                r.outcomes(kind).iter().zip(&mut previous).enumerate()
            {
                if now != *before {
                    events.push(DetectionEvent {
                        kind,
                        round: r.round,
                        stabilizer,
                    });
                }
                *before = now;
            }
        }
    }
    events.sort_unstable();
    Ok(events)
}

/// A Pauli fault placed in a specific round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fault {
    pub round: usize,
    pub event: PauliEvent,
}

/// Detection events of a shot plus the true logical flips of the final data.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ShotOutcome {
    /// Sorted by (kind, round, stabilizer).
    pub events: Vec<DetectionEvent>,
    /// Residual X error anticommutes with logical Z.
    pub flip_x: bool,
    /// Residual Z error anticommutes with logical X.
    pub flip_z: bool,
}

impl ShotOutcome {
    pub fn events_of(&self, kind: StabilizerKind) -> &[DetectionEvent] {
        let start = self.events.partition_point(|e| e.kind < kind);
        let end = self.events.partition_point(|e| e.kind <= kind);
        &self.events[start..end]
    }
}

/// Run `rounds` rounds with the given faults, then read out the data qubits
/// perfectly. Returns every syndrome record (the last one from the readout)
/// and the final frame.
pub fn simulate_records(
    lat: &Lattice,
    circuit: &RoundCircuit,
    faults: &[Fault],
    rounds: usize,
) -> (Vec<SyndromeRecord>, PauliFrame) {
    let mut frame = PauliFrame::new(lat.qubit_count());
    let mut faults = faults.to_vec();
    faults.sort_by_key(|f| (f.round, f.event.tick));
    let mut pending = faults.iter().peekable();
    let mut records = Vec::with_capacity(rounds + 1);

    let mut apply_tick = |frame: &mut PauliFrame, round: usize, tick: u8| {
        while let Some(f) = pending.next_if(|f| f.round == round && f.event.tick == tick) {
            frame.apply_pauli(lat.index(f.event.qubit), f.event.pauli);
        }
    };

    for round in 0..rounds {
        let mut record = SyndromeRecord::zeros(round, lat);
        apply_tick(&mut frame, round, 0);
        for (k, layer) in circuit.layers.iter().enumerate() {
            for gate in layer {
                if let Some(flip) = frame.apply_gate(gate, lat) {
                    let Gate::Measure(q) = gate else {
                        unreachable!()
                    };
                    match lat.measured_by(*q) {
                        Some((StabilizerKind::X, s)) => record.x[s] = flip,
                        Some((StabilizerKind::Z, s)) => record.z[s] = flip,
                        None => {}
                    }
                }
            }
            apply_tick(&mut frame, round, k as u8 + 1);
        }
        records.push(record);
    }

    let mut last = SyndromeRecord::zeros(rounds, lat);
    for (s, stab) in lat.stabilizers(StabilizerKind::Z).iter().enumerate() {
        last.z[s] = stab
            .data()
            .fold(false, |acc, q| acc ^ frame.x[lat.index(q)]);
    }
    for (s, stab) in lat.stabilizers(StabilizerKind::X).iter().enumerate() {
        last.x[s] = stab
            .data()
            .fold(false, |acc, q| acc ^ frame.z[lat.index(q)]);
    }
    records.push(last);
    (records, frame)
}

/// Reference simulation of a shot with explicit faults.
pub fn simulate(
    lat: &Lattice,
    circuit: &RoundCircuit,
    faults: &[Fault],
    rounds: usize,
) -> ShotOutcome {
    let (records, frame) = simulate_records(lat, circuit, faults, rounds);
    let events = detection_events(&records).expect("records are complete by construction");
    let flip_x = lat
        .logical_z()
        .iter()
        .fold(false, |acc, &q| acc ^ frame.x[lat.index(q)]);
    let flip_z = lat
        .logical_x()
        .iter()
        .fold(false, |acc, &q| acc ^ frame.z[lat.index(q)]);
    ShotOutcome {
        events,
        flip_x,
        flip_z,
    }
}

/// Sample the faults of `rounds` noisy rounds.
pub fn sample_faults<R: Rng + ?Sized>(
    lat: &Lattice,
    noise: &RoundNoise,
    rounds: usize,
    rng: &mut R,
    out: &mut Vec<Fault>,
) {
    let mut buf = Vec::new();
    for round in 0..rounds {
        buf.clear();
        noise.sample_round(lat, rng, &mut buf);
        out.extend(buf.iter().map(|&event| Fault { round, event }));
    }
}

/// One noisy shot through the reference frame simulator.
pub fn run_shot<R: Rng + ?Sized>(
    lat: &Lattice,
    circuit: &RoundCircuit,
    noise: &RoundNoise,
    rounds: usize,
    rng: &mut R,
) -> ShotOutcome {
    let mut faults = Vec::new();
    sample_faults(lat, noise, rounds, rng, &mut faults);
    simulate(lat, circuit, &faults, rounds)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Response {
    /// (round offset, stabilizer key) with key = stabilizer index, X kind first.
    events: Vec<(u8, u32)>,
    flip_x: bool,
    flip_z: bool,
}

/// Effect of a single X or Z at each (tick, qubit) of a round.
#[derive(Debug, Clone)]
pub struct ResponseTable {
    qubits: usize,
    x_stabilizers: usize,
    stabilizers: usize,
    /// Indexed by `(tick * qubits + qubit) * 2 + component`, component 0 = X.
    responses: Vec<Response>,
}

const TICKS: usize = RoundCircuit::LAYERS + 1;

impl ResponseTable {
    pub fn new(lat: &Lattice, circuit: &RoundCircuit) -> Self {
        let qubits = lat.qubit_count();
        let x_stabilizers = lat.stabilizers(StabilizerKind::X).len();
        let stabilizers = x_stabilizers + lat.stabilizers(StabilizerKind::Z).len();
        let mut responses = Vec::with_capacity(TICKS * qubits * 2);
        for tick in 0..TICKS as u8 {
            for qubit in lat.coords() {
                for pauli in [Pauli::X, Pauli::Z] {
                    let fault = Fault {
                        round: 0,
                        event: PauliEvent { tick, qubit, pauli },
                    };
                    let outcome = simulate(lat, circuit, &[fault], 2);
                    let events = outcome
                        .events
                        .iter()
                        .map(|e| {
                            assert!(e.round <= 1, "fault response spans more than two rounds");
                            let key = match e.kind {
                                StabilizerKind::X => e.stabilizer,
                                StabilizerKind::Z => x_stabilizers + e.stabilizer,
                            };
                            (e.round as u8, key as u32)
                        })
                        .collect();
                    responses.push(Response {
                        events,
                        flip_x: outcome.flip_x,
                        flip_z: outcome.flip_z,
                    });
                }
            }
        }
        Self {
            qubits,
            x_stabilizers,
            stabilizers,
            responses,
        }
    }

    fn event(&self, round: usize, key: u32) -> DetectionEvent {
        let s = key as usize;
        if s < self.x_stabilizers {
            DetectionEvent {
                kind: StabilizerKind::X,
                round,
                stabilizer: s,
            }
        } else {
            DetectionEvent {
                kind: StabilizerKind::Z,
                round,
                stabilizer: s - self.x_stabilizers,
            }
        }
    }

    /// Outcome of every single X or Z landing in round 0, at every tick and
    /// qubit. Events fall in rounds 0 and 1.
    pub fn single_faults(&self) -> impl Iterator<Item = ShotOutcome> + '_ {
        self.responses.iter().map(|r| {
            let mut events: Vec<DetectionEvent> = r
                .events
                .iter()
                .map(|&(offset, key)| self.event(offset as usize, key))
                .collect();
            events.sort_unstable();
            ShotOutcome {
                events,
                flip_x: r.flip_x,
                flip_z: r.flip_z,
            }
        })
    }

    fn response(&self, tick: u8, qubit: usize, z: bool) -> &Response {
        &self.responses[(tick as usize * self.qubits + qubit) * 2 + z as usize]
    }

    /// Shot outcome for `faults` over `rounds` rounds, by superposing
    /// responses. `scratch` is reused between calls.
    pub fn outcome(
        &self,
        lat: &Lattice,
        faults: &[Fault],
        rounds: usize,
        scratch: &mut Vec<u32>,
    ) -> ShotOutcome {
        scratch.clear();
        let mut flip_x = false;
        let mut flip_z = false;
        let span = self.stabilizers as u32;
        for f in faults {
            let q = lat.index(f.event.qubit);
            let parts = [
                f.event
                    .pauli
                    .has_x()
                    .then(|| self.response(f.event.tick, q, false)),
                f.event
                    .pauli
                    .has_z()
                    .then(|| self.response(f.event.tick, q, true)),
            ];
            for r in parts.into_iter().flatten() {
                flip_x ^= r.flip_x;
                flip_z ^= r.flip_z;
                for &(offset, key) in &r.events {
                    let round = (f.round + offset as usize).min(rounds) as u32;
                    scratch.push(round * span + key);
                }
            }
        }
        scratch.sort_unstable();
        let mut events = Vec::new();
        let mut k = 0;
        while k < scratch.len() {
            let key = scratch[k];
            let mut run = 1;
            while k + run < scratch.len() && scratch[k + run] == key {
                run += 1;
            }
            if run % 2 == 1 {
                events.push(self.event((key / span) as usize, key % span));
            }
            k += run;
        }
        events.sort_unstable();
        ShotOutcome {
            events,
            flip_x,
            flip_z,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Coord, QubitRole};
    use crate::noise::{ModelKind, NoiseModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(d: usize) -> (Lattice, RoundCircuit) {
        let lat = Lattice::new(d).unwrap();
        let circuit = RoundCircuit::schedule(&lat);
        (lat, circuit)
    }

    fn fault(round: usize, tick: u8, qubit: Coord, pauli: Pauli) -> Fault {
        Fault {
            round,
            event: PauliEvent { tick, qubit, pauli },
        }
    }

    #[test]
    fn conjugation_rules() {
        let lat = Lattice::new(3).unwrap();
        let (a, b) = (Coord::new(1, 1), Coord::new(1, 2));
        let (ia, ib) = (lat.index(a), lat.index(b));

        let mut f = PauliFrame::new(lat.qubit_count());
        f.apply_pauli(ia, Pauli::X);
        f.apply_gate(&Gate::Hadamard(a), &lat);
        assert_eq!(f.pauli(ia), Some(Pauli::Z));

        let cnot = Gate::Cnot {
            control: a,
            target: b,
        };
        let mut f = PauliFrame::new(lat.qubit_count());
        f.apply_pauli(ia, Pauli::X);
        f.apply_gate(&cnot, &lat);
        assert_eq!((f.pauli(ia), f.pauli(ib)), (Some(Pauli::X), Some(Pauli::X)));

        let mut f = PauliFrame::new(lat.qubit_count());
        f.apply_pauli(ib, Pauli::Z);
        f.apply_gate(&cnot, &lat);
        assert_eq!((f.pauli(ia), f.pauli(ib)), (Some(Pauli::Z), Some(Pauli::Z)));

        let mut f = PauliFrame::new(lat.qubit_count());
        f.apply_pauli(ia, Pauli::Y);
        f.apply_gate(&Gate::Identity(a), &lat);
        assert_eq!(f.pauli(ia), Some(Pauli::Y));
        assert_eq!(f.apply_gate(&Gate::Measure(a), &lat), Some(true));
        f.apply_gate(&Gate::Init(a), &lat);
        assert_eq!(f.pauli(ia), None);
    }

    #[test]
    fn noiseless_shot_is_quiet() {
        let (lat, circuit) = setup(5);
        let noise = RoundNoise::new(NoiseModel::baseline(0.0).unwrap(), &lat, &circuit);
        let out = run_shot(&lat, &circuit, &noise, 5, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(out, ShotOutcome::default());
    }

    #[test]
    fn bulk_data_x_error_between_rounds() {
        let (lat, circuit) = setup(5);
        let q = Coord::new(4, 4);
        let out = simulate(&lat, &circuit, &[fault(1, 8, q, Pauli::X)], 5);
        assert_eq!(out.events.len(), 2);
        for e in &out.events {
            assert_eq!(e.kind, StabilizerKind::Z);
            assert_eq!(e.round, 2);
            let m = lat.stabilizers(StabilizerKind::Z)[e.stabilizer].measure;
            assert!(lat.stabilizers(StabilizerKind::Z)[e.stabilizer]
                .data()
                .any(|x| x == q));
            assert_eq!(m.i, q.i);
        }
        assert!(!out.flip_x && !out.flip_z);
    }

    #[test]
    fn measurement_flip_gives_time_pair() {
        let (lat, circuit) = setup(5);
        let q = Coord::new(4, 3);
        assert_eq!(lat.role(q), QubitRole::MeasureZ);
        let (_, s) = lat.measured_by(q).unwrap();
        let out = simulate(&lat, &circuit, &[fault(2, 7, q, Pauli::X)], 5);
        let expect = [2, 3].map(|round| DetectionEvent {
            kind: StabilizerKind::Z,
            round,
            stabilizer: s,
        });
        assert_eq!(out.events, expect);
    }

    #[test]
    fn detection_event_differencing() {
        let lat = Lattice::new(3).unwrap();
        let zeros: Vec<SyndromeRecord> = (0..5).map(|r| SyndromeRecord::zeros(r, &lat)).collect();
        assert!(detection_events(&zeros).unwrap().is_empty());

        let mut one = zeros.clone();
        one[1].z[2] = true;
        let ev = detection_events(&one).unwrap();
        assert_eq!(
            ev.iter()
                .map(|e| (e.round, e.stabilizer))
                .collect::<Vec<_>>(),
            vec![(1, 2), (2, 2)]
        );

        let mut chain = zeros.clone();
        chain[1].x[4] = true;
        chain[2].x[4] = true;
        let ev = detection_events(&chain).unwrap();
        assert_eq!(
            ev.iter()
                .map(|e| (e.round, e.stabilizer))
                .collect::<Vec<_>>(),
            vec![(1, 4), (3, 4)]
        );

        assert!(detection_events(&zeros[..1]).is_err());
        let mut gap = zeros.clone();
        gap.remove(2);
        assert!(detection_events(&gap).is_err());
        let mut short = zeros;
        short[3].z.pop();
        assert!(detection_events(&short).is_err());
    }

    #[test]
    fn single_faults_touch_at_most_two_events_per_graph() {
        let (lat, circuit) = setup(3);
        let table = ResponseTable::new(&lat, &circuit);
        let mut scratch = Vec::new();
        for tick in 0..=8u8 {
            for q in lat.coords() {
                for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let f = [fault(1, tick, q, pauli)];
                    let out = table.outcome(&lat, &f, 3, &mut scratch);
                    for kind in StabilizerKind::BOTH {
                        assert!(out.events_of(kind).len() <= 2, "{tick} {q} {pauli:?}");
                    }
                }
            }
        }
        // Two-qubit gate faults likewise.
        for (k, layer) in circuit.layers.iter().enumerate() {
            for g in layer {
                if let Gate::Cnot { control, target } = *g {
                    for code in 1..16u8 {
                        let mut fs = Vec::new();
                        for (q, bits) in [(control, code & 3), (target, code >> 2)] {
                            if let Some(p) = Pauli::from_bits(bits & 1 == 1, bits & 2 == 2) {
                                fs.push(fault(1, k as u8 + 1, q, p));
                            }
                        }
                        let out = table.outcome(&lat, &fs, 3, &mut scratch);
                        for kind in StabilizerKind::BOTH {
                            assert!(out.events_of(kind).len() <= 2);
                        }
                    }
                }
            }
        }
    }

    fn random_faults(lat: &Lattice, rng: &mut ChaCha8Rng, rounds: usize, n: usize) -> Vec<Fault> {
        (0..n)
            .map(|_| {
                let pauli = [Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..3)];
                fault(
                    rng.random_range(0..rounds),
                    rng.random_range(0..=8),
                    lat.coord(rng.random_range(0..lat.qubit_count())),
                    pauli,
                )
            })
            .collect()
    }

    fn xor_events(a: &[DetectionEvent], b: &[DetectionEvent]) -> Vec<DetectionEvent> {
        let mut all: Vec<_> = a.iter().chain(b).copied().collect();
        all.sort_unstable();
        let mut out: Vec<DetectionEvent> = Vec::new();
        for e in all {
            if out.last() == Some(&e) {
                out.pop();
            } else {
                out.push(e);
            }
        }
        out
    }

    #[test]
    fn propagation_is_linear() {
        let (lat, circuit) = setup(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = random_faults(&lat, &mut rng, 3, 4);
            let b = random_faults(&lat, &mut rng, 3, 4);
            let ab: Vec<Fault> = a.iter().chain(&b).copied().collect();
            let (ra, rb, rab) = (
                simulate(&lat, &circuit, &a, 3),
                simulate(&lat, &circuit, &b, 3),
                simulate(&lat, &circuit, &ab, 3),
            );
            assert_eq!(rab.events, xor_events(&ra.events, &rb.events));
            assert_eq!(rab.flip_x, ra.flip_x ^ rb.flip_x);
            assert_eq!(rab.flip_z, ra.flip_z ^ rb.flip_z);
        }
    }

    #[test]
    fn response_table_matches_frame_simulation() {
        for d in [3, 5] {
            let (lat, circuit) = setup(d);
            let table = ResponseTable::new(&lat, &circuit);
            let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
            let mut scratch = Vec::new();
            for n in [1, 2, 5, 20] {
                for _ in 0..50 {
                    let faults = random_faults(&lat, &mut rng, d, n);
                    assert_eq!(
                        table.outcome(&lat, &faults, d, &mut scratch),
                        simulate(&lat, &circuit, &faults, d)
                    );
                }
            }
            // And on sampled correlated noise.
            for kind in [
                ModelKind::ExpArea { base: 2.0 },
                ModelKind::Pairwise {
                    amplitude: 1.0,
                    exponent: 2.0,
                },
            ] {
                let noise = RoundNoise::new(NoiseModel::new(5e-3, kind).unwrap(), &lat, &circuit);
                for _ in 0..50 {
                    let mut faults = Vec::new();
                    sample_faults(&lat, &noise, d, &mut rng, &mut faults);
                    assert_eq!(
                        table.outcome(&lat, &faults, d, &mut scratch),
                        simulate(&lat, &circuit, &faults, d)
                    );
                }
            }
        }
    }

    #[test]
    fn deterministic_without_noise() {
        let (lat, circuit) = setup(3);
        let faults = [fault(0, 3, Coord::new(2, 2), Pauli::Y)];
        assert_eq!(
            simulate(&lat, &circuit, &faults, 3),
            simulate(&lat, &circuit, &faults, 3)
        );
    }
}
