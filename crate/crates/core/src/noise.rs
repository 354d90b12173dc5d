//! Pauli error sampling for the baseline circuit noise and the four
//! correlated-error families.
//!
//! Every gate application draws one uniform `x`. The gate's own qubits fail
//! when `x < p`; under the area models every other qubit whose threshold
//! exceeds the same `x` receives an independent uniform `I/X/Y/Z`. Because all
//! area thresholds are strictly below `p`, only draws with `x < p` can do
//! anything, so the sampler skips geometrically between failing gates and
//! draws `x` uniformly on `[0, p)` for those.
//!
//! Pair models act once per round, before the first layer.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::lattice::{displacement, Coord, Gate, Lattice, RoundCircuit};

/// Non-identity single-qubit Pauli.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// From symplectic bits; `None` for the identity.
    pub fn from_bits(x: bool, z: bool) -> Option<Pauli> {
        match (x, z) {
            (false, false) => None,
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
        }
    }

    /// Two-bit code: bit 0 is the X component, bit 1 the Z component.
    fn from_code(code: u8) -> Option<Pauli> {
        Pauli::from_bits(code & 1 == 1, code & 2 == 2)
    }

    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }
}

/// A Pauli applied to `qubit` at `tick` of a round. Tick `k` in `1..=8` is
/// the moment right after layer `k`; tick 0 is the start of the round, before
/// the first layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliEvent {
    pub tick: u8,
    pub qubit: Coord,
    pub pauli: Pauli,
}

/// Correlated-error family, encoded on the command line as `none`, `exp:<n>`,
/// `poly:<n>`, `pair:<A>,<n>`, `column:<A>` (or `column:<A>:xx`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ModelKind {
    Baseline,
    /// Area errors with threshold `p / base^(di + dj)`.
    ExpArea {
        base: f64,
    },
    /// Area errors with threshold `0.1 p / r^exponent`.
    PolyArea {
        exponent: f64,
    },
    /// Every qubit pair fails with probability `amplitude * p / r^exponent`
    /// once per round.
    Pairwise {
        amplitude: f64,
        exponent: f64,
    },
    /// Every pair within a column fails with probability `amplitude * p` once
    /// per round. `xx_only` restricts the pair error to `XX`.
    Column {
        amplitude: f64,
        xx_only: bool,
    },
}

impl ModelKind {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        match *self {
            ModelKind::Baseline => Ok(()),
            ModelKind::ExpArea { base } if !(base > 1.0 && base.is_finite()) => {
                bad(format!("exponential base must exceed 1, got {base}"))
            }
            ModelKind::PolyArea { exponent } if !(exponent >= 2.0 && exponent.is_finite()) => bad(
                format!("polynomial exponent must be at least 2, got {exponent}"),
            ),
            ModelKind::Pairwise {
                amplitude,
                exponent,
            } if !(amplitude > 0.0 && amplitude.is_finite())
                || !(exponent >= 2.0 && exponent.is_finite()) =>
            {
                bad(format!(
                    "pair model needs A > 0 and n >= 2, got A={amplitude}, n={exponent}"
                ))
            }
            ModelKind::Column { amplitude, .. } if !(amplitude > 0.0 && amplitude.is_finite()) => {
                bad(format!(
                    "column amplitude must be positive, got {amplitude}"
                ))
            }
            _ => Ok(()),
        }
    }

    pub fn is_area(&self) -> bool {
        matches!(self, ModelKind::ExpArea { .. } | ModelKind::PolyArea { .. })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ModelKind::Baseline => write!(f, "none"),
            ModelKind::ExpArea { base } => write!(f, "exp:{base}"),
            ModelKind::PolyArea { exponent } => write!(f, "poly:{exponent}"),
            ModelKind::Pairwise {
                amplitude,
                exponent,
            } => write!(f, "pair:{amplitude},{exponent}"),
            ModelKind::Column {
                amplitude,
                xx_only: false,
            } => write!(f, "column:{amplitude}"),
            ModelKind::Column {
                amplitude,
                xx_only: true,
            } => write!(f, "column:{amplitude}:xx"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidModel(format!("cannot parse model '{s}'"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let s = s.trim();
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let kind = match name {
            "none" | "baseline" if args.is_empty() => ModelKind::Baseline,
            "exp" => ModelKind::ExpArea { base: num(args)? },
            "poly" => ModelKind::PolyArea {
                exponent: num(args)?,
            },
            "pair" => {
                let (a, n) = args.split_once(',').ok_or_else(bad)?;
                ModelKind::Pairwise {
                    amplitude: num(a)?,
                    exponent: num(n)?,
                }
            }
            "column" => match args.split_once(':') {
                Some((a, "xx")) => ModelKind::Column {
                    amplitude: num(a)?,
                    xx_only: true,
                },
                Some(_) => return Err(bad()),
                None => ModelKind::Column {
                    amplitude: num(args)?,
                    xx_only: false,
                },
            },
            _ => return Err(bad()),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Physical error rate plus correlated-error family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    pub kind: ModelKind,
}

impl NoiseModel {
    pub fn new(p: f64, kind: ModelKind) -> Result<Self, Error> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidModel(format!(
                "p must lie in [0, 1], got {p}"
            )));
        }
        kind.validate()?;
        Ok(Self { p, kind })
    }

    pub fn baseline(p: f64) -> Result<Self, Error> {
        Self::new(p, ModelKind::Baseline)
    }

    /// Area-error threshold seen by a qubit at displacement `(di, dj)` from
    /// the gate. Zero for models without area errors.
    pub fn area_threshold(&self, di: usize, dj: usize) -> f64 {
        match self.kind {
            ModelKind::ExpArea { base } => self.p / base.powi((di + dj) as i32),
            ModelKind::PolyArea { exponent } => {
                let r = ((di * di + dj * dj) as f64).sqrt();
                0.1 * self.p / r.powf(exponent)
            }
            _ => 0.0,
        }
    }

    /// Per-round failure probability of a qubit pair at squared separation
    /// `r2` under the pair models, clipped at 1.
    pub fn pair_probability(&self, r2: usize) -> f64 {
        match self.kind {
            ModelKind::Pairwise {
                amplitude,
                exponent,
            } => {
                let r = (r2 as f64).sqrt();
                (amplitude * self.p / r.powf(exponent)).min(1.0)
            }
            ModelKind::Column { amplitude, .. } => (amplitude * self.p).min(1.0),
            _ => 0.0,
        }
    }
}

/// Uniform draw shared by a gate's direct error and its area errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaErrorDraw {
    pub x: f64,
}

/// Tick at which the direct error of `gate` applied in layer `layer_tick`
/// lands. Readout errors act just before the measurement.
fn direct_tick(gate: &Gate, layer_tick: u8) -> u8 {
    match gate {
        Gate::Measure(_) => layer_tick - 1,
        _ => layer_tick,
    }
}

/// Direct error on the gate's own qubits: uniform over `X, Y, Z` for
/// single-qubit gates, uniform over the 15 non-identity two-qubit Paulis for
/// CNOT. Initialization and measurement errors are classical bit flips,
/// represented as an `X` on the qubit.
pub fn sample_gate_error<R: Rng + ?Sized>(
    gate: &Gate,
    model: &NoiseModel,
    draw: AreaErrorDraw,
    layer_tick: u8,
    rng: &mut R,
    out: &mut Vec<PauliEvent>,
) {
    if draw.x >= model.p {
        return;
    }
    let tick = direct_tick(gate, layer_tick);
    match *gate {
        Gate::Init(q) | Gate::Measure(q) => out.push(PauliEvent {
            tick,
            qubit: q,
            pauli: Pauli::X,
        }),
        Gate::Hadamard(q) | Gate::Identity(q) => out.push(PauliEvent {
            tick,
            qubit: q,
            pauli: Pauli::from_code(rng.random_range(1..4u8)).unwrap(),
        }),
        Gate::Cnot { control, target } => {
            push_pair(control, target, random_pair_code(rng), tick, out);
        }
    }
}

/// Every outcome of `gate`'s direct error with its probability given that
/// the error fires. Matches the distribution of [`sample_gate_error`].
pub fn direct_error_outcomes(gate: &Gate, layer_tick: u8) -> Vec<(f64, Vec<PauliEvent>)> {
    let tick = direct_tick(gate, layer_tick);
    let single = |q: Coord, pauli: Pauli| {
        vec![PauliEvent {
            tick,
            qubit: q,
            pauli,
        }]
    };
    match *gate {
        Gate::Init(q) | Gate::Measure(q) => vec![(1.0, single(q, Pauli::X))],
        Gate::Hadamard(q) | Gate::Identity(q) => [Pauli::X, Pauli::Y, Pauli::Z]
            .into_iter()
            .map(|p| (1.0 / 3.0, single(q, p)))
            .collect(),
        Gate::Cnot { control, target } => (1..16u8)
            .map(|code| {
                let mut out = Vec::new();
                push_pair(control, target, code, tick, &mut out);
                (1.0 / 15.0, out)
            })
            .collect(),
    }
}

fn random_pair_code<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    rng.random_range(1..16u8)
}

fn push_pair(a: Coord, b: Coord, code: u8, tick: u8, out: &mut Vec<PauliEvent>) {
    for (qubit, bits) in [(a, code & 3), (b, code >> 2)] {
        if let Some(pauli) = Pauli::from_code(bits) {
            out.push(PauliEvent { tick, qubit, pauli });
        }
    }
}

/// Qubits outside `gate` whose area threshold exceeds `draw.x`.
pub fn area_footprint(
    gate: &Gate,
    model: &NoiseModel,
    draw: AreaErrorDraw,
    width: usize,
) -> Vec<Coord> {
    let mut out = Vec::new();
    if !model.kind.is_area() || draw.x >= model.p {
        return out;
    }
    // Largest coordinate offset that can still clear the threshold.
    let reach = match model.kind {
        ModelKind::ExpArea { base } => (model.p / draw.x).ln() / base.ln(),
        ModelKind::PolyArea { exponent } => (0.1 * model.p / draw.x).powf(1.0 / exponent),
        _ => unreachable!(),
    };
    let reach = if reach.is_finite() {
        (reach.ceil() as usize).min(width)
    } else {
        width
    };
    let (a, b) = gate.qubits();
    let b = b.unwrap_or(a);
    let (i0, i1) = (a.i.min(b.i), a.i.max(b.i));
    let (j0, j1) = (a.j.min(b.j), a.j.max(b.j));
    for i in i0.saturating_sub(reach)..=(i1 + reach).min(width - 1) {
        for j in j0.saturating_sub(reach)..=(j1 + reach).min(width - 1) {
            let q = Coord::new(i, j);
            if gate.acts_on(q) {
                continue;
            }
            let (di, dj) = displacement(gate, q);
            if model.area_threshold(di, dj) > draw.x {
                out.push(q);
            }
        }
    }
    out
}

/// Area errors around `gate`: each qubit in the footprint independently gets
/// a uniform `I/X/Y/Z`.
pub fn sample_area_errors<R: Rng + ?Sized>(
    gate: &Gate,
    model: &NoiseModel,
    draw: AreaErrorDraw,
    lat: &Lattice,
    layer_tick: u8,
    rng: &mut R,
    out: &mut Vec<PauliEvent>,
) {
    let footprint = area_footprint(gate, model, draw, lat.width());
    apply_area_errors(&footprint, layer_tick, rng, out);
}

fn apply_area_errors<R: Rng + ?Sized>(
    footprint: &[Coord],
    tick: u8,
    rng: &mut R,
    out: &mut Vec<PauliEvent>,
) {
    for &qubit in footprint {
        if let Some(pauli) = Pauli::from_code(rng.random_range(0..4u8)) {
            out.push(PauliEvent { tick, qubit, pauli });
        }
    }
}

#[derive(Debug, Clone)]
struct PairBucket {
    probability: f64,
    pairs: Vec<(u32, u32)>,
    binomial: Binomial,
}

/// Precomputed pair enumeration for the pair models, grouped into buckets of
/// equal failure probability.
#[derive(Debug, Clone)]
pub struct PairNoise {
    width: usize,
    buckets: Vec<PairBucket>,
    xx_only: bool,
}

impl PairNoise {
    /// Pair noise for `model`, or `None` if the model has no pair errors.
    pub fn new(model: &NoiseModel, lat: &Lattice) -> Option<Self> {
        let (column_only, xx_only) = match model.kind {
            ModelKind::Pairwise { .. } => (false, false),
            ModelKind::Column { xx_only, .. } => (true, xx_only),
            _ => return None,
        };
        let n = lat.qubit_count();
        let mut by_r2: std::collections::BTreeMap<usize, Vec<(u32, u32)>> = Default::default();
        for a in 0..n {
            for b in a + 1..n {
                let (qa, qb) = (lat.coord(a), lat.coord(b));
                if column_only && qa.j != qb.j {
                    continue;
                }
                let (di, dj) = (qa.i.abs_diff(qb.i), qa.j.abs_diff(qb.j));
                let key = if column_only { 0 } else { di * di + dj * dj };
                by_r2.entry(key).or_default().push((a as u32, b as u32));
            }
        }
        let buckets = by_r2
            .into_iter()
            .filter_map(|(r2, pairs)| {
                let probability = model.pair_probability(r2.max(1));
                let binomial = Binomial::new(pairs.len() as u64, probability).ok()?;
                (probability > 0.0).then_some(PairBucket {
                    probability,
                    pairs,
                    binomial,
                })
            })
            .collect();
        Some(Self {
            width: lat.width(),
            buckets,
            xx_only,
        })
    }

    pub fn pair_count(&self) -> usize {
        self.buckets.iter().map(|b| b.pairs.len()).sum()
    }

    /// (probability, pair count) per bucket.
    pub fn buckets(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.buckets.iter().map(|b| (b.probability, b.pairs.len()))
    }

    /// Failing pairs for one round, as qubit indices. Each bucket draws its
    /// event count from a binomial and picks that many distinct members.
    pub fn sample_pairs<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<(usize, usize)>) {
        for bucket in &self.buckets {
            let k = bucket.binomial.sample(rng) as usize;
            if k == 0 {
                continue;
            }
            for m in index::sample(rng, bucket.pairs.len(), k) {
                let (a, b) = bucket.pairs[m];
                out.push((a as usize, b as usize));
            }
        }
    }

    /// Pauli events for one round at tick 0.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<PauliEvent>) {
        self.sample_traced(rng, out, None);
    }

    fn sample_traced<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        out: &mut Vec<PauliEvent>,
        mut touched: Option<&mut Vec<Coord>>,
    ) {
        let mut pairs = Vec::new();
        self.sample_pairs(rng, &mut pairs);
        let coord = |k: usize| Coord::new(k / self.width, k % self.width);
        for (a, b) in pairs {
            if let Some(t) = touched.as_deref_mut() {
                t.extend([coord(a), coord(b)]);
            }
            let code = if self.xx_only {
                0b0101
            } else {
                random_pair_code(rng)
            };
            push_pair(coord(a), coord(b), code, 0, out);
        }
    }
}

/// Pair events for one round under [`ModelKind::Pairwise`].
pub fn sample_pairwise_errors<R: Rng + ?Sized>(
    model: &NoiseModel,
    lat: &Lattice,
    rng: &mut R,
) -> Vec<PauliEvent> {
    let mut out = Vec::new();
    if let (ModelKind::Pairwise { .. }, Some(noise)) = (model.kind, PairNoise::new(model, lat)) {
        noise.sample(rng, &mut out);
    }
    out
}

/// Pair events for one round under [`ModelKind::Column`].
pub fn sample_column_errors<R: Rng + ?Sized>(
    model: &NoiseModel,
    lat: &Lattice,
    rng: &mut R,
) -> Vec<PauliEvent> {
    let mut out = Vec::new();
    if let (ModelKind::Column { .. }, Some(noise)) = (model.kind, PairNoise::new(model, lat)) {
        noise.sample(rng, &mut out);
    }
    out
}

/// Expected number of noise occurrences touching `q` per round: direct
/// failures of the gates acting on `q`, area footprints that cover `q`, and
/// pair events that include `q`. Counts occurrences, not the non-identity
/// part of the Pauli they apply.
pub fn expected_injected_rate(model: &NoiseModel, lat: &Lattice, q: Coord) -> f64 {
    let round = RoundCircuit::schedule(lat);
    let mut total = 0.0;
    for gate in round.layers.iter().flatten() {
        if gate.acts_on(q) {
            total += model.p;
        } else if model.kind.is_area() {
            let (di, dj) = displacement(gate, q);
            total += model.area_threshold(di, dj).min(1.0);
        }
    }
    let column_only = match model.kind {
        ModelKind::Pairwise { .. } => false,
        ModelKind::Column { .. } => true,
        _ => return total,
    };
    for other in lat.coords().filter(|&o| o != q) {
        if column_only && other.j != q.j {
            continue;
        }
        let (di, dj) = (q.i.abs_diff(other.i), q.j.abs_diff(other.j));
        total += model.pair_probability(di * di + dj * dj);
    }
    total
}

/// Flattened gate slots of one round with their layer tick.
#[derive(Debug, Clone)]
pub struct RoundNoise {
    model: NoiseModel,
    slots: Vec<(u8, Gate)>,
    gaps: Option<Geometric>,
    pairs: Option<PairNoise>,
}

impl RoundNoise {
    pub fn new(model: NoiseModel, lat: &Lattice, round: &RoundCircuit) -> Self {
        let slots = round
            .layers
            .iter()
            .enumerate()
            .flat_map(|(k, layer)| layer.iter().map(move |g| (k as u8 + 1, *g)))
            .collect();
        let gaps = (model.p > 0.0).then(|| Geometric::new(model.p).expect("p validated"));
        Self {
            model,
            slots,
            gaps,
            pairs: PairNoise::new(&model, lat),
        }
    }

    pub fn model(&self) -> &NoiseModel {
        &self.model
    }

    /// All Pauli events of one round, in tick order within each source.
    pub fn sample_round<R: Rng + ?Sized>(
        &self,
        lat: &Lattice,
        rng: &mut R,
        out: &mut Vec<PauliEvent>,
    ) {
        self.sample_traced(lat, rng, out, None);
    }

    /// As [`RoundNoise::sample_round`], also listing the qubits touched by
    /// every noise occurrence, identity draws included (one entry per
    /// occurrence per qubit).
    pub fn sample_round_traced<R: Rng + ?Sized>(
        &self,
        lat: &Lattice,
        rng: &mut R,
        out: &mut Vec<PauliEvent>,
        touched: &mut Vec<Coord>,
    ) {
        self.sample_traced(lat, rng, out, Some(touched));
    }

    fn sample_traced<R: Rng + ?Sized>(
        &self,
        lat: &Lattice,
        rng: &mut R,
        out: &mut Vec<PauliEvent>,
        mut touched: Option<&mut Vec<Coord>>,
    ) {
        let Some(gaps) = &self.gaps else {
            return;
        };
        if let Some(pairs) = &self.pairs {
            pairs.sample_traced(rng, out, touched.as_deref_mut());
        }
        let mut pos = gaps.sample(rng);
        while let Some((tick, gate)) = usize::try_from(pos).ok().and_then(|p| self.slots.get(p)) {
            let draw = AreaErrorDraw {
                x: self.model.p * rng.random::<f64>(),
            };
            sample_gate_error(gate, &self.model, draw, *tick, rng, out);
            if let Some(t) = touched.as_deref_mut() {
                let (a, b) = gate.qubits();
                t.push(a);
                t.extend(b);
            }
            if self.model.kind.is_area() {
                let footprint = area_footprint(gate, &self.model, draw, lat.width());
                if let Some(t) = touched.as_deref_mut() {
                    t.extend_from_slice(&footprint);
                }
                apply_area_errors(&footprint, *tick, rng, out);
            }
            pos = pos.saturating_add(1).saturating_add(gaps.sample(rng));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn model_grammar() {
        assert_eq!("none".parse::<ModelKind>().unwrap(), ModelKind::Baseline);
        assert_eq!(
            "exp:10".parse::<ModelKind>().unwrap(),
            ModelKind::ExpArea { base: 10.0 }
        );
        assert_eq!(
            "pair:1,2".parse::<ModelKind>().unwrap(),
            ModelKind::Pairwise {
                amplitude: 1.0,
                exponent: 2.0
            }
        );
        assert_eq!(
            "column:0.1".parse::<ModelKind>().unwrap(),
            ModelKind::Column {
                amplitude: 0.1,
                xx_only: false
            }
        );
        for s in [
            "none",
            "exp:10",
            "poly:4",
            "pair:0.1,2",
            "column:1",
            "column:0.1:xx",
        ] {
            assert_eq!(s.parse::<ModelKind>().unwrap().to_string(), s);
        }
        for s in [
            "exp:1",
            "poly:1.5",
            "pair:1",
            "pair:0,2",
            "column:-1",
            "foo",
            "exp:x",
            "",
        ] {
            assert!(s.parse::<ModelKind>().is_err(), "{s}");
        }
        assert!(NoiseModel::new(1.5, ModelKind::Baseline).is_err());
    }

    #[test]
    fn no_direct_error_above_p() {
        let model = NoiseModel::baseline(1e-3).unwrap();
        let mut out = Vec::new();
        let gate = Gate::Hadamard(Coord::new(1, 0));
        sample_gate_error(
            &gate,
            &model,
            AreaErrorDraw { x: 0.9 },
            2,
            &mut rng(1),
            &mut out,
        );
        assert!(out.is_empty());
    }

    #[test]
    fn single_qubit_direct_error_is_never_identity() {
        let model = NoiseModel::baseline(1e-3).unwrap();
        let mut r = rng(2);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            let mut out = Vec::new();
            let gate = Gate::Identity(Coord::new(2, 2));
            sample_gate_error(
                &gate,
                &model,
                AreaErrorDraw { x: 1e-4 },
                3,
                &mut r,
                &mut out,
            );
            assert_eq!(out.len(), 1);
            counts[out[0].pauli as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 5.0 * 81.6, "{counts:?}");
        }
    }

    #[test]
    fn cnot_error_uniform_over_fifteen() {
        let model = NoiseModel::baseline(1e-2).unwrap();
        let (a, b) = (Coord::new(0, 0), Coord::new(0, 1));
        let gate = Gate::Cnot {
            control: a,
            target: b,
        };
        let mut r = rng(3);
        let mut counts = [0u64; 16];
        let draws = 1_000_000;
        let mut out = Vec::new();
        for _ in 0..draws {
            out.clear();
            sample_gate_error(&gate, &model, AreaErrorDraw { x: 0.0 }, 3, &mut r, &mut out);
            let mut code = 0usize;
            for e in &out {
                let bits = e.pauli.has_x() as usize | (e.pauli.has_z() as usize) << 1;
                code |= if e.qubit == a { bits } else { bits << 2 };
            }
            counts[code] += 1;
        }
        assert_eq!(counts[0], 0);
        let expected = draws as f64 / 15.0;
        let chi2: f64 = counts[1..]
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 14 degrees of freedom; 99.9th percentile is 36.1.
        assert!(chi2 < 36.1, "chi2 = {chi2}");
    }

    fn occurrence_counts(
        model: NoiseModel,
        d: usize,
        rounds: usize,
        seed: u64,
    ) -> (Lattice, Vec<u64>, Vec<u32>) {
        let lat = Lattice::new(d).unwrap();
        let noise = RoundNoise::new(model, &lat, &RoundCircuit::schedule(&lat));
        let mut r = rng(seed);
        let mut counts = vec![0u64; lat.qubit_count()];
        let mut per_round = Vec::with_capacity(rounds);
        let (mut out, mut touched) = (Vec::new(), Vec::new());
        for _ in 0..rounds {
            out.clear();
            touched.clear();
            noise.sample_round_traced(&lat, &mut r, &mut out, &mut touched);
            per_round.push(out.len() as u32);
            for q in &touched {
                counts[lat.index(*q)] += 1;
            }
        }
        (lat, counts, per_round)
    }

    #[test]
    fn occurrence_frequencies_match_expected_rates() {
        let rounds = 1_000_000;
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
        for (k, kind) in kinds.into_iter().enumerate() {
            let model = NoiseModel::new(1e-2, kind).unwrap();
            let (lat, counts, _) = occurrence_counts(model, 5, rounds, 40 + k as u64);
            for q in [
                Coord::new(0, 0),
                Coord::new(4, 4),
                Coord::new(3, 4),
                Coord::new(8, 7),
                Coord::new(5, 0),
            ] {
                let expect = expected_injected_rate(&model, &lat, q) * rounds as f64;
                // Poisson bound on the variance of a sum of independent
                // indicators.
                let sigma = expect.sqrt();
                let got = counts[lat.index(q)] as f64;
                assert!(
                    (got - expect).abs() < 3.0 * sigma,
                    "{kind} {q:?}: {got} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn pair_event_counts_uncorrelated_between_rounds() {
        let rounds = 200_000;
        for kind in [
            ModelKind::Pairwise {
                amplitude: 1.0,
                exponent: 2.0,
            },
            ModelKind::Column {
                amplitude: 1.0,
                xx_only: false,
            },
        ] {
            let model = NoiseModel::new(1e-2, kind).unwrap();
            let lat = Lattice::new(5).unwrap();
            let pairs = PairNoise::new(&model, &lat).unwrap();
            let mut r = rng(9);
            let mut series = Vec::with_capacity(rounds);
            let mut out = Vec::new();
            for _ in 0..rounds {
                out.clear();
                pairs.sample_pairs(&mut r, &mut out);
                series.push(out.len() as f64);
            }
            let mean = series.iter().sum::<f64>() / rounds as f64;
            let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / rounds as f64;
            let lag1 = series
                .windows(2)
                .map(|w| (w[0] - mean) * (w[1] - mean))
                .sum::<f64>()
                / ((rounds - 1) as f64 * var);
            assert!(lag1.abs() < 3.0 / (rounds as f64).sqrt(), "{kind}: {lag1}");
            let expect: f64 = pairs.buckets().map(|(p, n)| p * n as f64).sum();
            assert!((mean - expect).abs() < 3.0 * (expect / rounds as f64).sqrt());
        }
    }

    #[test]
    fn enumerated_outcomes_cover_samples() {
        let model = NoiseModel::baseline(1e-2).unwrap();
        let (a, b) = (Coord::new(1, 2), Coord::new(2, 2));
        let gates = [
            Gate::Init(a),
            Gate::Measure(a),
            Gate::Hadamard(a),
            Gate::Identity(b),
            Gate::Cnot {
                control: a,
                target: b,
            },
        ];
        let mut r = rng(4);
        for gate in gates {
            let outcomes = direct_error_outcomes(&gate, 5);
            let total: f64 = outcomes.iter().map(|o| o.0).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for _ in 0..500 {
                let mut out = Vec::new();
                sample_gate_error(&gate, &model, AreaErrorDraw { x: 0.0 }, 5, &mut r, &mut out);
                assert!(outcomes.iter().any(|o| o.1 == out), "{gate:?} {out:?}");
            }
        }
    }

    #[test]
    fn init_and_measure_errors_are_flips() {
        let model = NoiseModel::baseline(0.5).unwrap();
        let mut out = Vec::new();
        let q = Coord::new(0, 1);
        let draw = AreaErrorDraw { x: 0.1 };
        sample_gate_error(&Gate::Init(q), &model, draw, 1, &mut rng(0), &mut out);
        sample_gate_error(&Gate::Measure(q), &model, draw, 8, &mut rng(0), &mut out);
        assert_eq!(
            out,
            vec![
                PauliEvent {
                    tick: 1,
                    qubit: q,
                    pauli: Pauli::X
                },
                PauliEvent {
                    tick: 7,
                    qubit: q,
                    pauli: Pauli::X
                }
            ]
        );
    }

    #[test]
    fn exponential_footprints() {
        let p = 1e-3;
        let model = NoiseModel::new(p, ModelKind::ExpArea { base: 10.0 }).unwrap();
        let gate = Gate::Identity(Coord::new(6, 6));
        let fp = |x: f64| area_footprint(&gate, &model, AreaErrorDraw { x }, 13).len();
        // Gate qubit plus footprint.
        assert_eq!(fp(p / 10.0 * 1.001), 0);
        assert_eq!(1 + fp(p / 10.0 * 0.999), 5);
        assert_eq!(1 + fp(p / 100.0 * 1.001), 5);
        assert_eq!(1 + fp(p / 10.0 * 0.5), 5);
        assert_eq!(1 + fp(p / 1000.0 * 1.001), 13);
        assert_eq!(1 + fp(p / 100.0 * 0.999), 13);
        assert_eq!(fp(p), 0);
        assert_eq!(fp(0.5), 0);
    }

    #[test]
    fn polynomial_footprints() {
        let p = 1e-3;
        let model = NoiseModel::new(p, ModelKind::PolyArea { exponent: 4.0 }).unwrap();
        let gate = Gate::Identity(Coord::new(6, 6));
        let fp = |x: f64| area_footprint(&gate, &model, AreaErrorDraw { x }, 13);
        assert!(fp(0.1 * p).is_empty());
        assert!(fp(0.5 * p).is_empty());
        assert_eq!(fp(0.1 * p * 0.999).len(), 4);
        // Just above the r = sqrt(2) threshold: the four diagonals join.
        assert_eq!(fp(0.1 * p / 4.0 * 0.999).len(), 8);
        // Disk of radius 2 (excluding center).
        let disk = fp(0.1 * p / 16.0 * 0.999);
        assert_eq!(disk.len(), 12);
        for q in disk {
            let (di, dj) = (q.i.abs_diff(6), q.j.abs_diff(6));
            assert!(di * di + dj * dj <= 4);
        }
    }

    #[test]
    fn footprints_nest() {
        let gate = Gate::Cnot {
            control: Coord::new(3, 4),
            target: Coord::new(4, 4),
        };
        for kind in [
            ModelKind::ExpArea { base: 2.0 },
            ModelKind::ExpArea { base: 10.0 },
            ModelKind::PolyArea { exponent: 2.0 },
            ModelKind::PolyArea { exponent: 3.0 },
        ] {
            let model = NoiseModel::new(1e-2, kind).unwrap();
            let mut r = rng(9);
            for _ in 0..500 {
                let x1 = model.p * r.random::<f64>();
                let x2 = model.p * r.random::<f64>();
                let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
                let big = area_footprint(&gate, &model, AreaErrorDraw { x: lo }, 11);
                let small = area_footprint(&gate, &model, AreaErrorDraw { x: hi }, 11);
                assert!(small.iter().all(|q| big.contains(q)));
            }
        }
    }

    #[test]
    fn pair_probabilities() {
        let p = 1e-3;
        let m = NoiseModel::new(
            p,
            ModelKind::Pairwise {
                amplitude: 1.0,
                exponent: 2.0,
            },
        )
        .unwrap();
        assert!((m.pair_probability(1) - p).abs() < 1e-18);
        assert!((m.pair_probability(2) - p / 2.0).abs() < 1e-18);
        let m = NoiseModel::new(
            p,
            ModelKind::Pairwise {
                amplitude: 0.1,
                exponent: 2.0,
            },
        )
        .unwrap();
        assert!((m.pair_probability(1) - 0.1 * p).abs() < 1e-18);
    }

    #[test]
    fn column_pair_count() {
        let lat = Lattice::new(3).unwrap();
        let model = NoiseModel::new(
            1e-3,
            ModelKind::Column {
                amplitude: 1.0,
                xx_only: false,
            },
        )
        .unwrap();
        let noise = PairNoise::new(&model, &lat).unwrap();
        assert_eq!(noise.pair_count(), 50);
        let expected: f64 = noise.buckets().map(|(p, n)| p * n as f64).sum();
        assert!((expected - 0.05).abs() < 1e-15);
        let rate = expected_injected_rate(&NoiseModel { p: 1e-3, ..model }, &lat, Coord::new(2, 2));
        let direct = 8.0 * 1e-3;
        assert!((rate - direct - 4.0 * 1e-3).abs() < 1e-15);
    }

    #[test]
    fn xx_only_column_errors() {
        let lat = Lattice::new(3).unwrap();
        let model = NoiseModel::new(
            0.5,
            ModelKind::Column {
                amplitude: 1.0,
                xx_only: true,
            },
        )
        .unwrap();
        let events = sample_column_errors(&model, &lat, &mut rng(4));
        assert!(!events.is_empty());
        assert!(events.iter().all(|e| e.pauli == Pauli::X && e.tick == 0));
    }

    #[test]
    fn zero_rate_is_silent() {
        let lat = Lattice::new(3).unwrap();
        let round = RoundCircuit::schedule(&lat);
        for kind in [
            ModelKind::Baseline,
            ModelKind::ExpArea { base: 2.0 },
            ModelKind::PolyArea { exponent: 2.0 },
            ModelKind::Pairwise {
                amplitude: 1.0,
                exponent: 2.0,
            },
            ModelKind::Column {
                amplitude: 1.0,
                xx_only: false,
            },
        ] {
            let model = NoiseModel::new(0.0, kind).unwrap();
            let noise = RoundNoise::new(model, &lat, &round);
            let mut r = rng(5);
            let mut out = Vec::new();
            for _ in 0..100 {
                noise.sample_round(&lat, &mut r, &mut out);
            }
            assert!(out.is_empty());
            assert!(sample_pairwise_errors(&model, &lat, &mut r).is_empty());
            assert!(sample_column_errors(&model, &lat, &mut r).is_empty());
        }
    }

    #[test]
    fn baseline_idle_rate() {
        // A data qubit takes part in 8 gates per round: some CNOTs, the rest
        // identities.
        let lat = Lattice::new(3).unwrap();
        let model = NoiseModel::baseline(1e-3).unwrap();
        let rate = expected_injected_rate(&model, &lat, Coord::new(2, 2));
        assert!((rate - 8e-3).abs() < 1e-15);
    }

    #[test]
    fn column_rate_linear_in_distance() {
        let rate = |d: usize| {
            let lat = Lattice::new(d).unwrap();
            let model = NoiseModel::new(
                1e-3,
                ModelKind::Column {
                    amplitude: 1.0,
                    xx_only: false,
                },
            )
            .unwrap();
            expected_injected_rate(&model, &lat, Coord::new(0, 0))
        };
        let r: Vec<f64> = [3, 5, 7, 9].iter().map(|&d| rate(d)).collect();
        let steps: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
        for s in &steps {
            // Two more rows per distance step, each a new partner at A p.
            assert!((s - 4e-3).abs() < 1e-15, "{steps:?}");
        }
    }
}
