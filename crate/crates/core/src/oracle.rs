//! Slow, independent reference computations used by the test suites and the
//! `selftest` command to cross-check the fast paths.

use crate::decoder::{Edge, Pairing};
use crate::frame::DetectionEvent;
use crate::lattice::{Coord, Lattice, StabilizerKind};

/// Minimum total weight over all perfect matchings, by exhaustive
/// enumeration (pair the lowest free vertex with every candidate). `None` if
/// no perfect matching exists. Exponential; meant for `nodes <= 14`.
pub fn brute_force_mwpm(nodes: usize, edges: &[Edge]) -> Option<i64> {
    if nodes % 2 == 1 {
        return None;
    }
    let mut weight = vec![vec![None::<i64>; nodes]; nodes];
    for &(a, b, w) in edges {
        let slot = &mut weight[a][b];
        *slot = Some(slot.map_or(w, |old: i64| old.min(w)));
        weight[b][a] = weight[a][b];
    }
    fn go(free: u32, weight: &[Vec<Option<i64>>]) -> Option<i64> {
        if free == 0 {
            return Some(0);
        }
        let a = free.trailing_zeros() as usize;
        let rest = free & !(1 << a);
        let mut best = None;
        let mut candidates = rest;
        while candidates != 0 {
            let b = candidates.trailing_zeros() as usize;
            candidates &= candidates - 1;
            if let Some(w) = weight[a][b] {
                if let Some(tail) = go(rest & !(1 << b), weight) {
                    let total = w + tail;
                    best = Some(best.map_or(total, |x: i64| x.min(total)));
                }
            }
        }
        best
    }
    go(((1u64 << nodes) - 1) as u32, &weight)
}

/// Number of perfect matchings of the complete graph on `nodes` vertices.
pub fn perfect_matching_count(nodes: usize) -> u64 {
    if nodes % 2 == 1 {
        return 0;
    }
    (1..nodes as u64).step_by(2).product()
}

fn stabilizer_site(kind: StabilizerKind, cell: (usize, usize)) -> Coord {
    match kind {
        StabilizerKind::Z => Coord::new(2 * cell.0, 2 * cell.1 + 1),
        StabilizerKind::X => Coord::new(2 * cell.0 + 1, 2 * cell.1),
    }
}

/// Data qubits of a canonical correction chain for one pairing: along the
/// stabilizer grid's columns first, then its rows; boundary pairings run
/// straight to the chosen edge.
pub fn correction_chain(lat: &Lattice, pairing: &Pairing) -> Vec<Coord> {
    let d = lat.distance();
    let cell = |e: &DetectionEvent| lat.stabilizers(e.kind)[e.stabilizer].cell;
    let mut chain = Vec::new();
    match *pairing {
        Pairing::Events(a, b) => {
            let kind = a.kind;
            let ((r1, c1), (r2, c2)) = (cell(&a), cell(&b));
            let site = stabilizer_site(kind, (r1, c1));
            // Step between horizontally adjacent stabilizers at (site.i, j)
            // and (site.i, j + 2): the data qubit at j + 1.
            for c in c1.min(c2)..c1.max(c2) {
                let j = stabilizer_site(kind, (r1, c)).j;
                chain.push(Coord::new(site.i, j + 1));
            }
            let j = stabilizer_site(kind, (r1, c2)).j;
            for r in r1.min(r2)..r1.max(r2) {
                let i = stabilizer_site(kind, (r, c2)).i;
                chain.push(Coord::new(i + 1, j));
            }
        }
        Pairing::Boundary { event, near } => {
            let (r, c) = cell(&event);
            let site = stabilizer_site(event.kind, (r, c));
            match (event.kind, near) {
                (StabilizerKind::Z, true) => {
                    chain.extend((0..=site.j / 2).map(|k| Coord::new(site.i, 2 * k)));
                }
                (StabilizerKind::Z, false) => {
                    chain.extend((site.j / 2 + 1..d).map(|k| Coord::new(site.i, 2 * k)));
                }
                (StabilizerKind::X, true) => {
                    chain.extend((0..=site.i / 2).map(|k| Coord::new(2 * k, site.j)));
                }
                (StabilizerKind::X, false) => {
                    chain.extend((site.i / 2 + 1..d).map(|k| Coord::new(2 * k, site.j)));
                }
            }
        }
    }
    chain
}

/// Apply the correction chains of `pairings` (all of `kind`) to the data
/// error bits `errors` (X bits for Z stabilizers, Z bits for X stabilizers;
/// indexed by qubit). Returns the residual's syndrome weight and whether it
/// anticommutes with the protected logical operator.
pub fn apply_and_measure(
    lat: &Lattice,
    kind: StabilizerKind,
    errors: &[bool],
    pairings: &[Pairing],
) -> (usize, bool) {
    let mut residual = errors.to_vec();
    for p in pairings {
        for q in correction_chain(lat, p) {
            residual[lat.index(q)] ^= true;
        }
    }
    let syndrome = lat
        .stabilizers(kind)
        .iter()
        .filter(|s| s.data().fold(false, |acc, q| acc ^ residual[lat.index(q)]))
        .count();
    let line = match kind {
        StabilizerKind::Z => lat.logical_z(),
        StabilizerKind::X => lat.logical_x(),
    };
    let flip = line
        .iter()
        .fold(false, |acc, &q| acc ^ residual[lat.index(q)]);
    (syndrome, flip)
}
