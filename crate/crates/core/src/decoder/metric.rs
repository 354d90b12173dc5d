//! Edge weights between detection events and from events to the boundary.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::frame::{DetectionEvent, Fault, ResponseTable, ShotOutcome};
use crate::lattice::{Lattice, RoundCircuit, StabilizerKind};
use crate::noise::direct_error_outcomes;

/// How event separations are turned into edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum MetricKind {
    /// Shortest paths through the graph of single-fault responses of the
    /// round circuit, each edge weighted by the log-likelihood ratio of the
    /// gate errors that produce it.
    #[default]
    Weighted,
    /// Same graph with every edge at weight 1. Includes the diagonal
    /// space-time edges left by faults between CNOT layers.
    Circuit,
    /// `|Δrow| + |Δcol| + |Δround|` on the stabilizer grid.
    Manhattan,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Weighted => "weighted",
            MetricKind::Circuit => "circuit",
            MetricKind::Manhattan => "manhattan",
        })
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "weighted" => Ok(MetricKind::Weighted),
            "circuit" => Ok(MetricKind::Circuit),
            "manhattan" => Ok(MetricKind::Manhattan),
            _ => Err(Error::InvalidConfig(format!(
                "unknown metric '{s}', expected weighted, circuit or manhattan"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub weight: i64,
    /// Whether the companion sits on the side crossed by the protected
    /// logical operator.
    pub near: bool,
}

/// Fixed-point scale of log-likelihood weights.
const LLR_SCALE: f64 = 16.0;

/// Error rate used for weights when the model's is zero.
const FALLBACK_P: f64 = 1e-3;

const UNREACHABLE: u32 = u32::MAX / 4;

/// Elementary edges of one stabilizer kind. The circuit repeats every round,
/// so an edge is a pair of stabilizers plus a round step.
#[derive(Debug, Clone, Default)]
struct EdgeSet {
    /// `(a, b, step)` with events at `(a, t)` and `(b, t + step)`, step >= 0.
    bulk: HashMap<(usize, usize, u8), f64>,
    near: HashMap<usize, f64>,
    far: HashMap<usize, f64>,
}

impl EdgeSet {
    /// Record a mechanism firing with probability `q`. Independent
    /// mechanisms on one edge combine by parity.
    fn add(&mut self, kind: StabilizerKind, outcome: &ShotOutcome, q: f64) {
        let flip = match kind {
            StabilizerKind::Z => outcome.flip_x,
            StabilizerKind::X => outcome.flip_z,
        };
        let slot = match outcome.events_of(kind) {
            [] => return,
            [e] if flip => self.near.entry(e.stabilizer).or_default(),
            [e] => self.far.entry(e.stabilizer).or_default(),
            [a, b] => {
                assert!(!flip, "two-event fault crosses the logical operator");
                let step = (b.round - a.round) as u8;
                let key = if step == 0 && b.stabilizer < a.stabilizer {
                    (b.stabilizer, a.stabilizer, 0)
                } else {
                    (a.stabilizer, b.stabilizer, step)
                };
                self.bulk.entry(key).or_default()
            }
            _ => return,
        };
        *slot = *slot * (1.0 - q) + q * (1.0 - *slot);
    }
}

fn llr_weight(q: f64) -> u32 {
    let q = q.clamp(1e-300, 0.5);
    ((LLR_SCALE * ((1.0 - q) / q).ln()).round() as u32).max(1)
}

/// Shortest-path table for one stabilizer kind, indexed by the two
/// stabilizers and the round gap.
#[derive(Debug, Clone)]
struct KindTable {
    count: usize,
    horizon: usize,
    /// `[earlier][later][gap]`, gap in `0..=horizon`.
    dist: Vec<u32>,
    near: Vec<u32>,
    far: Vec<u32>,
}

impl KindTable {
    fn distance(&self, a: usize, b: usize, gap: usize) -> i64 {
        let at = |g: usize| self.dist[(a * self.count + b) * (self.horizon + 1) + g] as i64;
        if gap <= self.horizon {
            at(gap)
        } else {
            let slope = at(self.horizon) - at(self.horizon - 1);
            at(self.horizon) + slope * (gap - self.horizon) as i64
        }
    }

    /// Dijkstra from every stabilizer over a window of `2 * horizon + 1`
    /// rounds centred on the source.
    fn build(count: usize, edges: &EdgeSet, weight: impl Fn(f64) -> u32, horizon: usize) -> Self {
        let mut adjacency: Vec<Vec<(usize, i8, u32)>> = vec![Vec::new(); count];
        for (&(a, b, step), &q) in &edges.bulk {
            let w = weight(q);
            adjacency[a].push((b, step as i8, w));
            adjacency[b].push((a, -(step as i8), w));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let side = |m: &HashMap<usize, f64>| {
            let mut out = vec![None; count];
            for (&s, &q) in m {
                out[s] = Some(weight(q));
            }
            out
        };
        let (near_edge, far_edge) = (side(&edges.near), side(&edges.far));

        let width = 2 * horizon + 1;
        let mut dist = vec![UNREACHABLE; count * count * (horizon + 1)];
        let mut near = vec![UNREACHABLE; count];
        let mut far = vec![UNREACHABLE; count];
        let mut seen = vec![UNREACHABLE; count * width];
        let mut heap = BinaryHeap::new();
        for source in 0..count {
            seen.fill(UNREACHABLE);
            seen[source * width + horizon] = 0;
            heap.push(Reverse((0u32, source, horizon)));
            while let Some(Reverse((here, s, t))) = heap.pop() {
                if here > seen[s * width + t] {
                    continue;
                }
                if let Some(w) = near_edge[s] {
                    near[source] = near[source].min(here + w);
                }
                if let Some(w) = far_edge[s] {
                    far[source] = far[source].min(here + w);
                }
                for &(n, step, w) in &adjacency[s] {
                    let nt = t as isize + step as isize;
                    if nt < 0 || nt >= width as isize {
                        continue;
                    }
                    let slot = &mut seen[n * width + nt as usize];
                    if here + w < *slot {
                        *slot = here + w;
                        heap.push(Reverse((here + w, n, nt as usize)));
                    }
                }
            }
            for target in 0..count {
                for gap in 0..=horizon {
                    dist[(source * count + target) * (horizon + 1) + gap] =
                        seen[target * width + horizon + gap];
                }
            }
        }
        Self {
            count,
            horizon,
            dist,
            near,
            far,
        }
    }
}

/// Edge weights for one lattice and round circuit.
#[derive(Debug, Clone)]
pub struct Metric {
    lattice: Lattice,
    kind: MetricKind,
    /// Indexed X then Z; empty for Manhattan.
    tables: Vec<KindTable>,
}

impl Metric {
    pub fn manhattan(lat: &Lattice) -> Self {
        Self {
            lattice: lat.clone(),
            kind: MetricKind::Manhattan,
            tables: Vec::new(),
        }
    }

    /// Unit-weight circuit metric covering round gaps up to `horizon`;
    /// larger gaps are extrapolated linearly.
    pub fn circuit(lat: &Lattice, responses: &ResponseTable, horizon: usize) -> Self {
        let mut sets = [EdgeSet::default(), EdgeSet::default()];
        for outcome in responses.single_faults() {
            for (set, kind) in sets.iter_mut().zip(StabilizerKind::BOTH) {
                set.add(kind, &outcome, 0.5);
            }
        }
        Self::from_edges(lat, MetricKind::Circuit, &sets, |_| 1, horizon)
    }

    /// Log-likelihood weights for gate errors at rate `p` (every gate of
    /// `circuit` failing with probability `p`).
    pub fn weighted(
        lat: &Lattice,
        circuit: &RoundCircuit,
        responses: &ResponseTable,
        p: f64,
        horizon: usize,
    ) -> Self {
        let p = if p > 0.0 { p } else { FALLBACK_P };
        let mut sets = [EdgeSet::default(), EdgeSet::default()];
        let mut scratch = Vec::new();
        for (k, layer) in circuit.layers.iter().enumerate() {
            for gate in layer {
                for (share, events) in direct_error_outcomes(gate, k as u8 + 1) {
                    let faults: Vec<Fault> = events
                        .into_iter()
                        .map(|event| Fault { round: 0, event })
                        .collect();
                    let outcome = responses.outcome(lat, &faults, 2, &mut scratch);
                    for (set, kind) in sets.iter_mut().zip(StabilizerKind::BOTH) {
                        set.add(kind, &outcome, p * share);
                    }
                }
            }
        }
        Self::from_edges(lat, MetricKind::Weighted, &sets, llr_weight, horizon)
    }

    fn from_edges(
        lat: &Lattice,
        kind: MetricKind,
        sets: &[EdgeSet; 2],
        weight: impl Fn(f64) -> u32 + Copy,
        horizon: usize,
    ) -> Self {
        let horizon = horizon.max(2 * lat.distance() + 2);
        Self {
            lattice: lat.clone(),
            kind,
            tables: StabilizerKind::BOTH
                .iter()
                .zip(sets)
                .map(|(&k, set)| KindTable::build(lat.stabilizers(k).len(), set, weight, horizon))
                .collect(),
        }
    }

    /// Build any metric; `p` only matters for [`MetricKind::Weighted`].
    pub fn new(
        lat: &Lattice,
        circuit: &RoundCircuit,
        kind: MetricKind,
        p: f64,
        horizon: usize,
    ) -> Self {
        match kind {
            MetricKind::Manhattan => Self::manhattan(lat),
            MetricKind::Circuit => Self::circuit(lat, &ResponseTable::new(lat, circuit), horizon),
            MetricKind::Weighted => {
                Self::weighted(lat, circuit, &ResponseTable::new(lat, circuit), p, horizon)
            }
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    fn table(&self, kind: StabilizerKind) -> &KindTable {
        &self.tables[(kind == StabilizerKind::Z) as usize]
    }

    /// Weight of the edge between two events of the same kind.
    pub fn distance(&self, a: &DetectionEvent, b: &DetectionEvent) -> i64 {
        debug_assert_eq!(a.kind, b.kind);
        match self.kind {
            MetricKind::Manhattan => {
                let (ra, ca) = self.lattice.stabilizers(a.kind)[a.stabilizer].cell;
                let (rb, cb) = self.lattice.stabilizers(b.kind)[b.stabilizer].cell;
                (ra.abs_diff(rb) + ca.abs_diff(cb) + a.round.abs_diff(b.round)) as i64
            }
            MetricKind::Circuit | MetricKind::Weighted => {
                let (first, second) = if a.round <= b.round { (a, b) } else { (b, a) };
                self.table(a.kind).distance(
                    first.stabilizer,
                    second.stabilizer,
                    second.round - first.round,
                )
            }
        }
    }

    /// Boundary edge of an event; ties go to the near side.
    pub fn boundary(&self, e: &DetectionEvent) -> BoundaryEdge {
        let (near, far) = match self.kind {
            MetricKind::Manhattan => {
                let (near, far) = self.lattice.boundary_steps(e.kind, e.stabilizer);
                (near as i64, far as i64)
            }
            MetricKind::Circuit | MetricKind::Weighted => {
                let t = self.table(e.kind);
                (t.near[e.stabilizer] as i64, t.far[e.stabilizer] as i64)
            }
        };
        BoundaryEdge {
            weight: near.min(far),
            near: near <= far,
        }
    }
}
