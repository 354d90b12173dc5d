//! Minimum-weight perfect matching decoder over space-time detection events.
//!
//! Events of one stabilizer kind are matched with each other or with a
//! private boundary companion. Edge weights come from a [`Metric`]; a
//! companion sits at the nearer of the two boundaries that kind's error
//! chains may end on.
//!
//! The production path ([`Decoder`]) drops every real-real edge that is
//! longer than sending both ends to their boundaries. Such an edge can always
//! be swapped for the two boundary edges while lowering the total, so the
//! optimum survives and the event graph splits into small independent
//! clusters. Clusters of one or two events are resolved in closed form;
//! larger ones go to the blossom matcher.
//!
//! Among equal-weight matchings the decoder prefers the one with the fewest
//! boundary pairings, which for two events is also the lexicographically
//! smallest pairing.

pub mod blossom;
pub mod metric;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::frame::{DetectionEvent, ShotOutcome};
use crate::lattice::StabilizerKind;

pub use blossom::Edge;
pub use metric::{BoundaryEdge, Metric, MetricKind};

/// Graph fed to [`mwpm`]. For decoding graphs, nodes `0..real` are detection
/// events and node `real + k` is the boundary companion of event `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingGraph {
    pub nodes: usize,
    pub edges: Vec<Edge>,
    pub real: usize,
    pub boundary: Vec<BoundaryEdge>,
}

impl MatchingGraph {
    /// Arbitrary weighted graph without boundary structure.
    pub fn from_edges(nodes: usize, edges: Vec<Edge>) -> Self {
        Self {
            nodes,
            edges,
            real: nodes,
            boundary: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    /// Matched pairs `(a, b)` with `a < b`, sorted.
    pub pairs: Vec<(usize, usize)>,
    pub weight: i64,
}

/// Complete matching graph over `events` (all of one kind) with boundary
/// companions joined to each other at weight zero.
pub fn build_graph(events: &[DetectionEvent], metric: &Metric) -> MatchingGraph {
    let n = events.len();
    debug_assert!(events.windows(2).all(|w| w[0].kind == w[1].kind));
    let boundary: Vec<BoundaryEdge> = events.iter().map(|e| metric.boundary(e)).collect();
    let mut edges = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in a + 1..n {
            edges.push((a, b, metric.distance(&events[a], &events[b])));
        }
    }
    for (k, be) in boundary.iter().enumerate() {
        edges.push((k, n + k, be.weight));
    }
    for a in 0..n {
        for b in a + 1..n {
            edges.push((n + a, n + b, 0));
        }
    }
    MatchingGraph {
        nodes: 2 * n,
        edges,
        real: n,
        boundary,
    }
}

/// Exact minimum-weight perfect matching.
pub fn mwpm(graph: &MatchingGraph) -> Result<Matching, Error> {
    if graph.nodes % 2 == 1 {
        return Err(Error::OddNodeCount(graph.nodes));
    }
    if graph.nodes == 0 {
        return Ok(Matching::default());
    }
    let top = graph.edges.iter().map(|e| e.2).max().unwrap_or(0);
    let flipped: Vec<Edge> = graph
        .edges
        .iter()
        .map(|&(a, b, w)| (a, b, top - w))
        .collect();
    let mates = blossom::max_weight_matching(graph.nodes, &flipped, true);
    let mut pairs = Vec::with_capacity(graph.nodes / 2);
    for (a, m) in mates.iter().enumerate().take(graph.nodes) {
        match m {
            Some(b) if a < *b => pairs.push((a, *b)),
            Some(_) => {}
            None => return Err(Error::NoPerfectMatching),
        }
    }
    let weight = pairs
        .iter()
        .map(|&(a, b)| {
            graph
                .edges
                .iter()
                .filter(|e| (e.0 == a && e.1 == b) || (e.0 == b && e.1 == a))
                .map(|e| e.2)
                .min()
                .expect("matched pair has an edge")
        })
        .sum();
    Ok(Matching { pairs, weight })
}

/// Parity of correction chains crossing the protected logical operator: the
/// number of events matched to a near-side boundary companion, mod 2.
pub fn logical_flip(matching: &Matching, graph: &MatchingGraph) -> bool {
    matching
        .pairs
        .iter()
        .filter(|&&(a, b)| a < graph.real && b == graph.real + a && graph.boundary[a].near)
        .count()
        % 2
        == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DecoderOptions {
    /// Keep only each event's `k` nearest neighbours. Approximate; off by
    /// default.
    pub knn: Option<usize>,
    pub metric: MetricKind,
}

/// Result of decoding one stabilizer kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KindDecision {
    pub weight: i64,
    /// Predicted logical flip.
    pub flip: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ShotDecision {
    pub fail_x: bool,
    pub fail_z: bool,
}

/// Stateless between shots. `options.metric` is ignored; the metric passed
/// in decides the weights.
#[derive(Debug, Clone, Copy)]
pub struct Decoder<'a> {
    metric: &'a Metric,
    options: DecoderOptions,
}

impl<'a> Decoder<'a> {
    pub fn new(metric: &'a Metric, options: DecoderOptions) -> Self {
        Self { metric, options }
    }

    pub fn options(&self) -> DecoderOptions {
        self.options
    }

    /// Compare the predicted logical flips of both graphs against the truth.
    pub fn decode_shot(&self, outcome: &ShotOutcome) -> ShotDecision {
        let x = self.decode_kind(outcome.events_of(StabilizerKind::Z));
        let z = self.decode_kind(outcome.events_of(StabilizerKind::X));
        ShotDecision {
            fail_x: x.flip != outcome.flip_x,
            fail_z: z.flip != outcome.flip_z,
        }
    }

    /// Decode events of a single kind. Independent of input order.
    pub fn decode_kind(&self, events: &[DetectionEvent]) -> KindDecision {
        match events.len() {
            0 => KindDecision::default(),
            1 => {
                let b = self.metric.boundary(&events[0]);
                KindDecision {
                    weight: b.weight,
                    flip: b.near,
                }
            }
            _ => {
                let m = self.match_events(events);
                KindDecision {
                    weight: m.weight,
                    flip: m.flip(),
                }
            }
        }
    }

    /// Minimum-weight pairing of `events` (all of one kind).
    pub fn match_events(&self, events: &[DetectionEvent]) -> EventMatching {
        let mut sorted = events.to_vec();
        sorted.sort_unstable();
        let events = &sorted[..];
        let n = events.len();
        let boundary: Vec<BoundaryEdge> = events.iter().map(|e| self.metric.boundary(e)).collect();

        let mut edges: Vec<Edge> = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let w = self.metric.distance(&events[a], &events[b]);
                if w <= boundary[a].weight + boundary[b].weight {
                    edges.push((a, b, w));
                }
            }
        }
        if let Some(k) = self.options.knn {
            edges = nearest_neighbours(n, edges, k);
        }

        let mut sets = DisjointSets::new(n);
        for &(a, b, _) in &edges {
            sets.union(a, b);
        }
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
        for k in 0..n {
            members[sets.find(k)].push(k);
        }
        let mut out = EventMatching::default();
        let to_boundary = |out: &mut EventMatching, k: usize| {
            out.weight += boundary[k].weight;
            out.pairs.push(Pairing::Boundary {
                event: events[k],
                near: boundary[k].near,
            });
        };
        let mut local = vec![usize::MAX; n];
        for group in members.iter().filter(|g| !g.is_empty()) {
            match group.len() {
                1 => to_boundary(&mut out, group[0]),
                2 => {
                    let (a, b) = (group[0], group[1]);
                    out.weight += self.metric.distance(&events[a], &events[b]);
                    out.pairs.push(Pairing::Events(events[a], events[b]));
                }
                m => {
                    for (k, &g) in group.iter().enumerate() {
                        local[g] = k;
                    }
                    let graph = cluster_graph(group, &local, &edges, &boundary);
                    let matching =
                        mwpm(&graph).expect("boundary companions guarantee a perfect matching");
                    for &(a, b) in &matching.pairs {
                        if b < m {
                            let (ga, gb) = (group[a], group[b]);
                            out.weight += self.metric.distance(&events[ga], &events[gb]);
                            out.pairs.push(Pairing::Events(events[ga], events[gb]));
                        } else if a < m {
                            to_boundary(&mut out, group[a]);
                        }
                    }
                }
            }
        }
        out
    }

    /// Decode with and without the k-nearest pruning and report whether the
    /// matching weights agree.
    pub fn audit(&self, events: &[DetectionEvent]) -> bool {
        let exact = Decoder::new(
            self.metric,
            DecoderOptions {
                knn: None,
                ..self.options
            },
        );
        exact.decode_kind(events).weight == self.decode_kind(events).weight
    }
}

/// How one event was paired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pairing {
    Events(DetectionEvent, DetectionEvent),
    Boundary { event: DetectionEvent, near: bool },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventMatching {
    pub pairs: Vec<Pairing>,
    pub weight: i64,
}

impl EventMatching {
    /// Predicted logical flip: parity of near-boundary pairings.
    pub fn flip(&self) -> bool {
        self.pairs
            .iter()
            .filter(|p| matches!(p, Pairing::Boundary { near: true, .. }))
            .count()
            % 2
            == 1
    }
}

fn cluster_graph(
    group: &[usize],
    local: &[usize],
    edges: &[Edge],
    boundary: &[BoundaryEdge],
) -> MatchingGraph {
    let m = group.len();
    // Scaled weights with a unit surcharge per boundary pairing; the
    // surcharges total less than one scaled step, so they only split ties.
    let scale = m as i64 + 1;
    let mut sub: Vec<Edge> = edges
        .iter()
        .filter(|e| group.get(local[e.0]) == Some(&e.0))
        .map(|&(a, b, w)| (local[a], local[b], w * scale))
        .collect();
    for (k, &g) in group.iter().enumerate() {
        sub.push((k, m + k, boundary[g].weight * scale + 1));
    }
    for a in 0..m {
        for b in a + 1..m {
            sub.push((m + a, m + b, 0));
        }
    }
    MatchingGraph {
        nodes: 2 * m,
        edges: sub,
        real: m,
        boundary: group.iter().map(|&g| boundary[g]).collect(),
    }
}

fn nearest_neighbours(n: usize, edges: Vec<Edge>, k: usize) -> Vec<Edge> {
    let mut adjacency: Vec<Vec<(i64, usize, usize)>> = vec![Vec::new(); n];
    for (e, &(a, b, w)) in edges.iter().enumerate() {
        adjacency[a].push((w, b, e));
        adjacency[b].push((w, a, e));
    }
    let mut keep = vec![false; edges.len()];
    for list in &mut adjacency {
        list.sort_unstable();
        for &(_, _, e) in list.iter().take(k) {
            keep[e] = true;
        }
    }
    edges
        .into_iter()
        .zip(keep)
        .filter_map(|(e, k)| k.then_some(e))
        .collect()
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}
