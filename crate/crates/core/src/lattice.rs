//! Planar surface code layout on a `(2d-1) x (2d-1)` grid and its
//! error-detection round.
//!
//! Sites with even `i + j` hold data qubits. Odd sites hold measure qubits:
//! X-type at (odd `i`, even `j`) and Z-type at (even `i`, odd `j`). Z
//! stabilizers are truncated along the top and bottom rows, so X error chains
//! terminate on the left and right edges; X stabilizers are truncated on the
//! left and right columns and Z error chains terminate top and bottom.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Grid position: `i` is the row, `j` the column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub i: usize,
    pub j: usize,
}

impl Coord {
    pub const fn new(i: usize, j: usize) -> Self {
        Self { i, j }
    }

    fn offset(self, di: isize, dj: isize, width: usize) -> Option<Coord> {
        let i = self.i.checked_add_signed(di)?;
        let j = self.j.checked_add_signed(dj)?;
        (i < width && j < width).then_some(Coord { i, j })
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitRole {
    Data,
    MeasureX,
    MeasureZ,
}

/// Stabilizer type. Z stabilizers detect X errors and feed the graph that
/// decides logical-X failures; X stabilizers are the mirror image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StabilizerKind {
    X,
    Z,
}

impl StabilizerKind {
    pub const BOTH: [StabilizerKind; 2] = [StabilizerKind::X, StabilizerKind::Z];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stabilizer {
    pub kind: StabilizerKind,
    pub measure: Coord,
    /// Data partners in CNOT order; `None` where the lattice edge truncates.
    pub schedule: [Option<Coord>; 4],
    /// Position in this kind's stabilizer grid (row, column).
    pub cell: (usize, usize),
}

impl Stabilizer {
    pub fn data(&self) -> impl Iterator<Item = Coord> + '_ {
        self.schedule.iter().flatten().copied()
    }

    pub fn weight(&self) -> usize {
        self.schedule.iter().flatten().count()
    }
}

const NORTH: (isize, isize) = (-1, 0);
const SOUTH: (isize, isize) = (1, 0);
const WEST: (isize, isize) = (0, -1);
const EAST: (isize, isize) = (0, 1);

const Z_ORDER: [(isize, isize); 4] = [NORTH, WEST, EAST, SOUTH];
const X_ORDER: [(isize, isize); 4] = [NORTH, EAST, WEST, SOUTH];

#[derive(Debug, Clone)]
pub struct Lattice {
    distance: usize,
    width: usize,
    roles: Vec<QubitRole>,
    x_stabilizers: Vec<Stabilizer>,
    z_stabilizers: Vec<Stabilizer>,
    /// Per qubit index: the stabilizer it measures, if any.
    measured: Vec<Option<(StabilizerKind, usize)>>,
    logical_x: Vec<Coord>,
    logical_z: Vec<Coord>,
}

impl Lattice {
    /// Lay out a distance-`d` planar code. Deterministic in `d`.
    pub fn new(distance: usize) -> Result<Self, Error> {
        if distance < 2 {
            return Err(Error::DistanceTooSmall(distance));
        }
        let width = 2 * distance - 1;
        let mut roles = Vec::with_capacity(width * width);
        for i in 0..width {
            for j in 0..width {
                roles.push(match (i % 2, j % 2) {
                    (0, 0) | (1, 1) => QubitRole::Data,
                    (1, 0) => QubitRole::MeasureX,
                    _ => QubitRole::MeasureZ,
                });
            }
        }

        let mut x_stabilizers = Vec::new();
        let mut z_stabilizers = Vec::new();
        let mut measured = vec![None; width * width];
        for i in 0..width {
            for j in 0..width {
                let measure = Coord::new(i, j);
                let (kind, order, cell) = match roles[i * width + j] {
                    QubitRole::Data => continue,
                    QubitRole::MeasureX => (StabilizerKind::X, X_ORDER, ((i - 1) / 2, j / 2)),
                    QubitRole::MeasureZ => (StabilizerKind::Z, Z_ORDER, (i / 2, (j - 1) / 2)),
                };
                let schedule = order.map(|(di, dj)| measure.offset(di, dj, width));
                let list = match kind {
                    StabilizerKind::X => &mut x_stabilizers,
                    StabilizerKind::Z => &mut z_stabilizers,
                };
                measured[i * width + j] = Some((kind, list.len()));
                list.push(Stabilizer {
                    kind,
                    measure,
                    schedule,
                    cell,
                });
            }
        }

        let logical_x = (0..distance).map(|k| Coord::new(0, 2 * k)).collect();
        let logical_z = (0..distance).map(|k| Coord::new(2 * k, 0)).collect();

        Ok(Self {
            distance,
            width,
            roles,
            x_stabilizers,
            z_stabilizers,
            measured,
            logical_x,
            logical_z,
        })
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    /// Side length of the qubit grid, `2d - 1`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn qubit_count(&self) -> usize {
        self.width * self.width
    }

    #[inline]
    pub fn index(&self, q: Coord) -> usize {
        q.i * self.width + q.j
    }

    #[inline]
    pub fn coord(&self, index: usize) -> Coord {
        Coord::new(index / self.width, index % self.width)
    }

    pub fn role(&self, q: Coord) -> QubitRole {
        self.roles[self.index(q)]
    }

    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.qubit_count()).map(|k| self.coord(k))
    }

    pub fn data_qubits(&self) -> impl Iterator<Item = Coord> + '_ {
        self.coords().filter(|&q| self.role(q) == QubitRole::Data)
    }

    pub fn measure_qubits(&self) -> impl Iterator<Item = Coord> + '_ {
        self.coords().filter(|&q| self.role(q) != QubitRole::Data)
    }

    pub fn stabilizers(&self, kind: StabilizerKind) -> &[Stabilizer] {
        match kind {
            StabilizerKind::X => &self.x_stabilizers,
            StabilizerKind::Z => &self.z_stabilizers,
        }
    }

    pub fn all_stabilizers(&self) -> impl Iterator<Item = &Stabilizer> {
        self.x_stabilizers.iter().chain(&self.z_stabilizers)
    }

    /// Stabilizer measured by qubit `q`, as (kind, index within kind).
    pub fn measured_by(&self, q: Coord) -> Option<(StabilizerKind, usize)> {
        self.measured[self.index(q)]
    }

    pub fn logical_x(&self) -> &[Coord] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[Coord] {
        &self.logical_z
    }

    /// Steps from stabilizer `index` to each boundary its error chains may
    /// end on: `(near, far)`, where `near` is the side crossed by the logical
    /// operator that this kind's decoding protects (left edge for Z
    /// stabilizers, top edge for X stabilizers).
    pub fn boundary_steps(&self, kind: StabilizerKind, index: usize) -> (usize, usize) {
        let (row, col) = self.stabilizers(kind)[index].cell;
        let across = match kind {
            StabilizerKind::Z => col,
            StabilizerKind::X => row,
        };
        (across + 1, self.distance - 1 - across)
    }
}

/// One gate of the round. Every qubit is covered by exactly one gate per layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Init(Coord),
    Hadamard(Coord),
    Cnot { control: Coord, target: Coord },
    Measure(Coord),
    Identity(Coord),
}

impl Gate {
    /// The gate's qubits: the first always, the second for two-qubit gates.
    pub fn qubits(&self) -> (Coord, Option<Coord>) {
        match *self {
            Gate::Cnot { control, target } => (control, Some(target)),
            Gate::Init(q) | Gate::Hadamard(q) | Gate::Measure(q) | Gate::Identity(q) => (q, None),
        }
    }

    pub fn acts_on(&self, q: Coord) -> bool {
        let (a, b) = self.qubits();
        a == q || b == Some(q)
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. })
    }
}

/// Componentwise minimum coordinate differences between `q` and the qubits of
/// `gate`. Meaningful only for `q` outside the gate.
pub fn displacement(gate: &Gate, q: Coord) -> (usize, usize) {
    let (a, b) = gate.qubits();
    let mut di = a.i.abs_diff(q.i);
    let mut dj = a.j.abs_diff(q.j);
    if let Some(b) = b {
        di = di.min(b.i.abs_diff(q.i));
        dj = dj.min(b.j.abs_diff(q.j));
    }
    (di, dj)
}

/// One error-detection round as eight parallel layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundCircuit {
    pub layers: Vec<Vec<Gate>>,
}

impl RoundCircuit {
    /// Number of layers per round.
    pub const LAYERS: usize = 8;

    /// Build the round for `lat`: initialize measure qubits, Hadamard the
    /// X-type ones, four CNOT layers, Hadamard again, measure. Idle qubits get
    /// an identity gate in every layer.
    pub fn schedule(lat: &Lattice) -> Self {
        let mut layers = Vec::with_capacity(Self::LAYERS);
        let is_x = |q: Coord| lat.role(q) == QubitRole::MeasureX;
        let is_measure = |q: Coord| lat.role(q) != QubitRole::Data;

        layers.push(single_layer(lat, |q| {
            is_measure(q).then_some(Gate::Init(q))
        }));
        layers.push(single_layer(lat, |q| is_x(q).then_some(Gate::Hadamard(q))));
        for step in 0..4 {
            let mut gates = Vec::new();
            for stab in lat.all_stabilizers() {
                if let Some(data) = stab.schedule[step] {
                    gates.push(match stab.kind {
                        StabilizerKind::Z => Gate::Cnot {
                            control: data,
                            target: stab.measure,
                        },
                        StabilizerKind::X => Gate::Cnot {
                            control: stab.measure,
                            target: data,
                        },
                    });
                }
            }
            layers.push(fill_idle(lat, gates));
        }
        layers.push(single_layer(lat, |q| is_x(q).then_some(Gate::Hadamard(q))));
        layers.push(single_layer(lat, |q| {
            is_measure(q).then_some(Gate::Measure(q))
        }));
        Self { layers }
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn cnot_count(&self) -> usize {
        self.layers
            .iter()
            .flatten()
            .filter(|g| g.is_two_qubit())
            .count()
    }
}

fn single_layer(lat: &Lattice, mut pick: impl FnMut(Coord) -> Option<Gate>) -> Vec<Gate> {
    lat.coords()
        .map(|q| pick(q).unwrap_or(Gate::Identity(q)))
        .collect()
}

fn fill_idle(lat: &Lattice, mut gates: Vec<Gate>) -> Vec<Gate> {
    let mut busy = vec![false; lat.qubit_count()];
    for g in &gates {
        let (a, b) = g.qubits();
        busy[lat.index(a)] = true;
        if let Some(b) = b {
            busy[lat.index(b)] = true;
        }
    }
    gates.extend(
        lat.coords()
            .filter(|&q| !busy[lat.index(q)])
            .map(Gate::Identity),
    );
    let first = |g: &Gate| {
        let (a, b) = g.qubits();
        b.map_or(a, |b| a.min(b))
    };
    gates.sort_by_key(first);
    gates
}
