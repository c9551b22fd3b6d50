//! Minimum-weight perfect matching of detection events with boundary.

mod blossom;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

pub use blossom::max_weight_matching;

use crate::error::{Error, Result};
use crate::graph::DecodingGraph;
use crate::pauli::PauliOperator;
use crate::scalar::Scalar;

/// Weights are rounded to this many units per 1.0 before the blossom stage.
const SCALE: f64 = 1e12;

/// Largest event count accepted by [`brute_force_matching`].
pub const BRUTE_FORCE_MAX: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingResult<F> {
    /// Matched event pairs as node indices, each `(u, v)` with `u < v`.
    pub pairs: Vec<(usize, usize)>,
    /// Events matched to the boundary.
    pub boundary: Vec<usize>,
    pub total_weight: F,
    /// Edges of each pair's path, then of each boundary path, in that order.
    pub path_edges: Vec<Vec<usize>>,
}

impl<F: Scalar> MatchingResult<F> {
    pub fn empty() -> Self {
        Self { pairs: Vec::new(), boundary: Vec::new(), total_weight: F::zero(), path_edges: Vec::new() }
    }

    /// Every edge on some matched path.
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.path_edges.iter().flatten().copied()
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry<F>(F, usize);

impl<F: Scalar> Eq for Entry<F> {}

impl<F: Scalar> Ord for Entry<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal).then_with(|| other.1.cmp(&self.1))
    }
}

impl<F: Scalar> PartialOrd for Entry<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest paths between detection events and from each event to the boundary.
#[derive(Debug, Clone)]
pub struct PathTable<F> {
    pub events: Vec<usize>,
    /// `dist[i][j]` between events `i` and `j`; infinite when unreachable.
    pub dist: Vec<Vec<F>>,
    pub boundary_dist: Vec<F>,
    /// Predecessor edge on the search tree rooted at each event.
    pred: Vec<Vec<usize>>,
}

const NO_EDGE: usize = usize::MAX;

impl<F: Scalar> PathTable<F> {
    fn walk(&self, i: usize, target: usize, graph: &DecodingGraph<F>) -> Vec<usize> {
        let mut out = Vec::new();
        let mut node = target;
        while node != self.events[i] {
            let e = self.pred[i][node];
            out.push(e);
            let (a, b) = graph.edges[e].nodes;
            node = if a == node { b } else { a };
        }
        out.reverse();
        out
    }

    /// Edges on the shortest path from event `i` to event `j`.
    pub fn path(&self, i: usize, j: usize, graph: &DecodingGraph<F>) -> Vec<usize> {
        self.walk(i, self.events[j], graph)
    }

    pub fn boundary_path(&self, i: usize, graph: &DecodingGraph<F>) -> Vec<usize> {
        self.walk(i, graph.boundary(), graph)
    }
}

/// Dijkstra from every event. Paths never pass through the boundary node; a
/// route via the boundary is the sum of two boundary distances.
pub fn shortest_paths<F: Scalar>(graph: &DecodingGraph<F>, weights: &[F], events: &[usize]) -> Result<PathTable<F>> {
    search(graph, weights, events, false)
}

/// Like [`shortest_paths`], but `dist[i][j]` is left infinite whenever it is
/// at least `b_i + b_j`, where such a pair is never cheaper than sending both
/// events to the boundary.
pub fn pruned_paths<F: Scalar>(graph: &DecodingGraph<F>, weights: &[F], events: &[usize]) -> Result<PathTable<F>> {
    search(graph, weights, events, true)
}

fn search<F: Scalar>(graph: &DecodingGraph<F>, weights: &[F], events: &[usize], prune: bool) -> Result<PathTable<F>> {
    let n = graph.num_nodes() + 1;
    let boundary = graph.boundary();
    let mut is_event = vec![usize::MAX; n];
    for (i, &v) in events.iter().enumerate() {
        if v >= boundary {
            return Err(Error::Config(format!("event {v} is not a detection node")));
        }
        is_event[v] = i;
    }
    let mut d = vec![F::infinity(); n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut dijkstra = |source: usize, radius: F, d: &mut Vec<F>, pred: &mut Vec<usize>| {
        d.fill(F::infinity());
        done.fill(false);
        heap.clear();
        let mut remaining = events.len() + 1;
        d[source] = F::zero();
        heap.push(Entry(F::zero(), source));
        while let Some(Entry(du, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            if du > radius {
                break;
            }
            done[u] = true;
            if is_event[u] != usize::MAX || u == boundary {
                remaining -= 1;
                if remaining == 0 {
                    break;
                }
            }
            if u == boundary && source != boundary {
                continue;
            }
            for &(v, e) in graph.neighbors(u) {
                let nd = du + weights[e];
                if nd < d[v] {
                    d[v] = nd;
                    pred[v] = e;
                    heap.push(Entry(nd, v));
                }
            }
        }
        for v in 0..d.len() {
            if !done[v] {
                d[v] = F::infinity();
            }
        }
    };
    let mut scratch = vec![NO_EDGE; n];
    let (radius_base, max_b) = if prune && !events.is_empty() {
        dijkstra(boundary, F::infinity(), &mut d, &mut scratch);
        let max_b = events.iter().map(|&v| d[v]).fold(F::zero(), F::max);
        (events.iter().map(|&v| d[v]).collect(), max_b)
    } else {
        (vec![F::infinity(); events.len()], F::zero())
    };
    let mut dist = vec![vec![F::infinity(); events.len()]; events.len()];
    let mut boundary_dist = vec![F::infinity(); events.len()];
    let mut pred = Vec::with_capacity(events.len());
    for (i, &source) in events.iter().enumerate() {
        let mut p = vec![NO_EDGE; n];
        dijkstra(source, radius_base[i] + max_b, &mut d, &mut p);
        for (j, &t) in events.iter().enumerate() {
            dist[i][j] = d[t];
        }
        boundary_dist[i] = d[boundary];
        pred.push(p);
    }
    Ok(PathTable { events: events.to_vec(), dist, boundary_dist, pred })
}

fn scaled<F: Scalar>(w: F) -> i64 {
    (w.as_f64() * SCALE).round() as i64
}

/// Shortest paths between every pair of detection nodes and to the boundary,
/// for reuse across many matchings on fixed weights.
#[derive(Debug, Clone)]
pub struct AllPairs<F> {
    n: usize,
    dist: Vec<F>,
    boundary_dist: Vec<F>,
    pred: Vec<usize>,
}

impl<F: Scalar> AllPairs<F> {
    pub fn new(graph: &DecodingGraph<F>, weights: &[F]) -> Result<Self> {
        let nodes: Vec<usize> = (0..graph.num_nodes()).collect();
        let t = shortest_paths(graph, weights, &nodes)?;
        let n = nodes.len();
        let mut dist = Vec::with_capacity(n * n);
        let mut pred = Vec::with_capacity(n * (n + 1));
        for i in 0..n {
            dist.extend_from_slice(&t.dist[i]);
            pred.extend_from_slice(&t.pred[i]);
        }
        Ok(Self { n, dist, boundary_dist: t.boundary_dist, pred })
    }

    /// The path table restricted to `events`.
    pub fn table(&self, events: &[usize]) -> PathTable<F> {
        let w = self.n + 1;
        PathTable {
            events: events.to_vec(),
            dist: events.iter().map(|&i| events.iter().map(|&j| self.dist[i * self.n + j]).collect()).collect(),
            boundary_dist: events.iter().map(|&i| self.boundary_dist[i]).collect(),
            pred: events.iter().map(|&i| self.pred[i * w..(i + 1) * w].to_vec()).collect(),
        }
    }
}

/// Minimum-weight perfect matching of `events` where any event may instead
/// go to the boundary. Built on the reduced complete graph with pair weight
/// `min(d_ij, b_i + b_j)` plus one extra boundary vertex when the count is odd.
pub fn mwpm<F: Scalar>(graph: &DecodingGraph<F>, weights: &[F], events: &[usize]) -> Result<MatchingResult<F>> {
    if events.is_empty() {
        return Ok(MatchingResult::empty());
    }
    match_table(graph, &pruned_paths(graph, weights, events)?)
}

/// [`mwpm`] on precomputed shortest paths.
pub fn match_table<F: Scalar>(graph: &DecodingGraph<F>, table: &PathTable<F>) -> Result<MatchingResult<F>> {
    let events = &table.events;
    if events.is_empty() {
        return Ok(MatchingResult::empty());
    }
    let k = events.len();
    let pair_cost = |i: usize, j: usize| -> (F, bool) {
        let direct = table.dist[i][j];
        let via = table.boundary_dist[i] + table.boundary_dist[j];
        if direct <= via {
            (direct, true)
        } else {
            (via, false)
        }
    };
    let mut costs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let (c, _) = pair_cost(i, j);
            if c.is_finite() {
                costs.push((i, j, scaled(c)));
            }
        }
        if k % 2 == 1 && table.boundary_dist[i].is_finite() {
            costs.push((i, k, scaled(table.boundary_dist[i])));
        }
    }
    let max = costs.iter().map(|c| c.2).max().unwrap_or(0);
    if max > i64::MAX / 8 {
        return Err(Error::Config("matching weights overflow the integer scale".into()));
    }
    let edges: Vec<(usize, usize, i64)> = costs.iter().map(|&(i, j, c)| (i, j, max - c)).collect();
    let mate = max_weight_matching(&edges, true);
    let mut result = MatchingResult::empty();
    let mut pair_paths = Vec::new();
    let mut boundary_events = Vec::new();
    for i in 0..k {
        let Some(&Some(j)) = mate.get(i) else {
            return Err(Error::Unreachable(events[i], graph.boundary()));
        };
        if j == k {
            boundary_events.push(i);
        } else if i < j {
            let (c, direct) = pair_cost(i, j);
            result.total_weight = result.total_weight + c;
            if direct {
                result.pairs.push((events[i].min(events[j]), events[i].max(events[j])));
                pair_paths.push(table.path(i, j, graph));
            } else {
                boundary_events.push(i);
                boundary_events.push(j);
            }
        }
    }
    boundary_events.sort_unstable();
    for &i in &boundary_events {
        if mate[i] == Some(k) {
            result.total_weight = result.total_weight + table.boundary_dist[i];
        }
        result.boundary.push(events[i]);
        pair_paths.push(table.boundary_path(i, graph));
    }
    result.path_edges = pair_paths;
    Ok(result)
}

/// Exhaustive minimum over all partitions of `events` into pairs and
/// boundary singletons. Among equal weights the first partition found wins,
/// visiting partners in ascending order before the boundary.
pub fn brute_force_matching<F: Scalar>(
    graph: &DecodingGraph<F>,
    weights: &[F],
    events: &[usize],
) -> Result<MatchingResult<F>> {
    if events.len() > BRUTE_FORCE_MAX {
        return Err(Error::TooManyForBruteForce { max: BRUTE_FORCE_MAX, got: events.len() });
    }
    let table = shortest_paths(graph, weights, events)?;
    let k = events.len();

    struct Search<'a, F> {
        table: &'a PathTable<F>,
        best: F,
        best_choice: Vec<usize>,
        choice: Vec<usize>,
    }

    // choice[i] = partner index, or k for the boundary.
    fn go<F: Scalar>(s: &mut Search<'_, F>, i: usize, acc: F) {
        let k = s.choice.len();
        if acc > s.best {
            return;
        }
        let Some(i) = (i..k).find(|&i| s.choice[i] == usize::MAX) else {
            if acc < s.best {
                s.best = acc;
                s.best_choice = s.choice.clone();
            }
            return;
        };
        for j in i + 1..k {
            if s.choice[j] == usize::MAX && s.table.dist[i][j].is_finite() {
                s.choice[i] = j;
                s.choice[j] = i;
                go(s, i + 1, acc + s.table.dist[i][j]);
                s.choice[j] = usize::MAX;
            }
        }
        if s.table.boundary_dist[i].is_finite() {
            s.choice[i] = k;
            go(s, i + 1, acc + s.table.boundary_dist[i]);
        }
        s.choice[i] = usize::MAX;
    }

    let mut s = Search { table: &table, best: F::infinity(), best_choice: Vec::new(), choice: vec![usize::MAX; k] };
    go(&mut s, 0, F::zero());
    if k > 0 && s.best_choice.is_empty() {
        return Err(Error::Unreachable(events[0], graph.boundary()));
    }
    let mut result = MatchingResult::empty();
    let mut boundary_paths = Vec::new();
    for i in 0..k {
        let j = s.best_choice[i];
        if j == k {
            result.total_weight = result.total_weight + table.boundary_dist[i];
            result.boundary.push(events[i]);
            boundary_paths.push(table.boundary_path(i, graph));
        } else if i < j {
            result.total_weight = result.total_weight + table.dist[i][j];
            result.pairs.push((events[i].min(events[j]), events[i].max(events[j])));
            result.path_edges.push(table.path(i, j, graph));
        }
    }
    result.path_edges.extend(boundary_paths);
    Ok(result)
}

/// Data-qubit correction implied by a matching: the XOR of the flips of every
/// edge on every matched path.
pub fn matching_to_correction<F: Scalar>(graph: &DecodingGraph<F>, matching: &MatchingResult<F>, num_data: usize) -> PauliOperator {
    let mut out = PauliOperator::identity(num_data);
    for e in matching.edges() {
        for &q in &graph.edges[e].flips {
            match graph.lattice {
                crate::code::Lattice::X => out.flip_x(q),
                crate::code::Lattice::Z => out.flip_z(q),
            }
        }
    }
    out
}
