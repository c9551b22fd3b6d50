//! Space-time decoding graphs built from single-fault enumeration.
//!
//! Nodes are `(check, layer)` pairs indexed `layer * num_checks + check`,
//! plus one boundary node with index `num_nodes`. Every single fault that
//! leaves one or two detection events on a lattice contributes its
//! first-order rate to the edge joining those events (or joining the single
//! event to the boundary). Edge probabilities are the direct sum of the
//! contributing rates and edge weights are `-ln` of that sum.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::code::{CodeLayout, Lattice};
use crate::error::{Error, Result};
use crate::noise::{serialize_rational, FaultEnumeration};
use crate::pauli::PauliOperator;
use crate::scalar::{Rational, Scalar};

/// How base edge weights are assigned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Weighting {
    /// `-ln(P)` with `P` the summed first-order probability at rate `p`.
    LogProbability { p: f64 },
    /// Every edge weighs 1 and an edge conditioned on a matched dual edge
    /// weighs 0 (normalized code-capacity weights).
    Unit,
}

/// The six geometric classes of single-fault edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MatchingClass {
    A,
    B,
    C,
    D,
    E,
    F,
}

impl MatchingClass {
    pub const ALL: [MatchingClass; 6] =
        [MatchingClass::A, MatchingClass::B, MatchingClass::C, MatchingClass::D, MatchingClass::E, MatchingClass::F];

    pub fn letter(self) -> char {
        match self {
            MatchingClass::A => 'a',
            MatchingClass::B => 'b',
            MatchingClass::C => 'c',
            MatchingClass::D => 'd',
            MatchingClass::E => 'e',
            MatchingClass::F => 'f',
        }
    }
}

/// Matching-type label of an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MatchingType {
    Interior(MatchingClass),
    /// Edge from a detection node to the boundary.
    Boundary,
}

impl MatchingType {
    pub fn class(self) -> Option<MatchingClass> {
        match self {
            MatchingType::Interior(class) => Some(class),
            MatchingType::Boundary => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Edge<F> {
    /// Endpoints, `nodes.0 < nodes.1`; `nodes.1 == num_nodes` for boundary edges.
    pub nodes: (usize, usize),
    /// Summed first-order probability as a coefficient of `p`.
    #[serde(serialize_with = "serialize_rational")]
    pub coefficient: Rational,
    pub probability: F,
    pub weight: F,
    pub label: MatchingType,
    /// Indices of contributing faults in the enumeration.
    pub faults: Vec<usize>,
    /// Data qubits flipped (X part on `Lattice::X`, Z part on `Lattice::Z`).
    pub flips: Vec<usize>,
}

impl<F> Edge<F> {
    pub fn is_boundary(&self) -> bool {
        matches!(self.label, MatchingType::Boundary)
    }
}

/// One correlated dual edge and its conditional probability given this edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub dual_edge: usize,
    #[serde(serialize_with = "serialize_rational")]
    pub conditional: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecodingGraph<F> {
    pub lattice: Lattice,
    pub weighting: Weighting,
    /// Global stabilizer index of each check.
    pub checks: Vec<usize>,
    /// Grid position of each check.
    pub positions: Vec<(usize, usize)>,
    pub layers: usize,
    pub edges: Vec<Edge<F>>,
    /// `P(dual edge | edge)` for every dual edge sharing a fault with the edge.
    pub correlations: Vec<Vec<Correlation>>,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
    #[serde(skip)]
    edge_index: HashMap<(usize, usize), usize>,
    /// Edge of each enumerated fault on this lattice, if any.
    #[serde(skip)]
    fault_edge: Vec<Option<usize>>,
}

impl<F: Scalar> DecodingGraph<F> {
    /// Build the graph of `lattice` and label its edges.
    pub fn new(
        layout: &CodeLayout,
        enumeration: &FaultEnumeration,
        lattice: Lattice,
        weighting: Weighting,
    ) -> Result<Self> {
        let checks = layout.stabilizers_of(lattice.check_kind()).to_vec();
        let positions = checks.iter().map(|&s| layout.stabilizers[s].position).collect();
        let num_nodes = checks.len() * enumeration.layers;
        let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        let mut fault_pairs = Vec::with_capacity(enumeration.faults.len());
        for (i, ef) in enumeration.faults.iter().enumerate() {
            let key = match *ef.events(lattice) {
                [] => None,
                [a] => Some((a, num_nodes)),
                [a, b] => Some((a.min(b), a.max(b))),
                ref many => {
                    return Err(Error::TooManyEvents { fault: format!("{:?}", ef.fault), count: many.len() })
                }
            };
            if let Some(key) = key {
                groups.entry(key).or_default().push(i);
            }
            fault_pairs.push(key);
        }
        let mut edges = Vec::with_capacity(groups.len());
        let mut edge_index = HashMap::with_capacity(groups.len());
        for (nodes, faults) in groups {
            let coefficient = faults.iter().map(|&i| enumeration.faults[i].coefficient).sum();
            let residual = &enumeration.faults[faults[0]].residual;
            let flips = match lattice {
                Lattice::X => residual.x_support(),
                Lattice::Z => residual.z_support(),
            };
            edge_index.insert(nodes, edges.len());
            edges.push(Edge {
                nodes,
                coefficient,
                probability: F::zero(),
                weight: F::zero(),
                label: MatchingType::Boundary,
                faults,
                flips,
            });
        }
        let mut adjacency = vec![Vec::new(); num_nodes + 1];
        for (e, edge) in edges.iter().enumerate() {
            adjacency[edge.nodes.0].push((edge.nodes.1, e));
            adjacency[edge.nodes.1].push((edge.nodes.0, e));
        }
        let fault_edge = fault_pairs.into_iter().map(|k| k.map(|k| edge_index[&k])).collect();
        let mut graph = Self {
            lattice,
            weighting,
            checks,
            positions,
            layers: enumeration.layers,
            edges,
            correlations: Vec::new(),
            adjacency,
            edge_index,
            fault_edge,
        };
        graph.assign_weights(weighting)?;
        graph.classify_edges()?;
        Ok(graph)
    }

    /// A graph from explicit edges with no enumeration behind it. Labels and
    /// correlations are left for the caller.
    pub fn from_edges(lattice: Lattice, num_checks: usize, layers: usize, edges: Vec<Edge<F>>) -> Self {
        let num_nodes = num_checks * layers;
        let mut adjacency = vec![Vec::new(); num_nodes + 1];
        let mut edge_index = HashMap::with_capacity(edges.len());
        for (e, edge) in edges.iter().enumerate() {
            adjacency[edge.nodes.0].push((edge.nodes.1, e));
            adjacency[edge.nodes.1].push((edge.nodes.0, e));
            edge_index.insert(edge.nodes, e);
        }
        Self {
            lattice,
            weighting: Weighting::Unit,
            checks: (0..num_checks).collect(),
            positions: vec![(0, 0); num_checks],
            layers,
            correlations: vec![Vec::new(); edges.len()],
            edges,
            adjacency,
            edge_index,
            fault_edge: Vec::new(),
        }
    }

    /// Largest `p` for which every edge probability stays below 1.
    pub fn p_max(&self) -> f64 {
        let max = self.edges.iter().map(|e| e.coefficient).max().unwrap_or(Rational::from_integer(1));
        *max.denom() as f64 / *max.numer() as f64
    }

    fn assign_weights(&mut self, weighting: Weighting) -> Result<()> {
        match weighting {
            Weighting::LogProbability { p } => {
                if p == 0.0 {
                    return Err(Error::DegenerateWeight);
                }
                if !(0.0..1.0).contains(&p) {
                    return Err(Error::InvalidRate(p));
                }
                let p_max = self.p_max();
                if p >= p_max {
                    let worst = self.edges.iter().map(|e| e.coefficient).max().unwrap();
                    return Err(Error::RateTooLarge { p, coefficient: worst.to_string(), p_max });
                }
                for edge in &mut self.edges {
                    let prob = F::from_rational(edge.coefficient) * F::lit(p);
                    edge.probability = prob;
                    edge.weight = -prob.ln();
                }
            }
            Weighting::Unit => {
                for edge in &mut self.edges {
                    edge.probability = F::nan();
                    edge.weight = F::one();
                }
            }
        }
        self.weighting = weighting;
        Ok(())
    }

    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    /// Detection nodes, excluding the boundary.
    pub fn num_nodes(&self) -> usize {
        self.checks.len() * self.layers
    }

    pub fn boundary(&self) -> usize {
        self.num_nodes()
    }

    /// `(check, layer)` of a detection node.
    pub fn node_coords(&self, node: usize) -> (usize, usize) {
        (node % self.checks.len(), node / self.checks.len())
    }

    pub fn node(&self, check: usize, layer: usize) -> usize {
        layer * self.checks.len() + check
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn fault_edge(&self, fault: usize) -> Option<usize> {
        self.fault_edge[fault]
    }

    /// The part of a data error this lattice detects.
    /// Whether edge `e` joins two nodes at least two check spacings away from
    /// every spatial boundary and two layers away from the first and last
    /// layer, so that every neighbouring fault has its full bulk form.
    pub fn is_bulk_edge(&self, e: usize, distance: usize) -> bool {
        let (a, b) = self.edges[e].nodes;
        if b == self.boundary() || distance < 5 {
            return false;
        }
        [a, b].iter().all(|&n| {
            let (c, t) = self.node_coords(n);
            let (row, col) = self.positions[c];
            let inner = 4..=2 * distance - 6;
            inner.contains(&row) && inner.contains(&col) && t >= 2 && t + 3 <= self.layers
        })
    }

    pub fn lattice_part(&self, error: &PauliOperator) -> PauliOperator {
        match self.lattice {
            Lattice::X => error.x_part(),
            Lattice::Z => error.z_part(),
        }
    }

    pub fn base_weights(&self) -> Vec<F> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    /// Assign a matching type to every edge from its space-time geometry.
    pub fn classify_edges(&mut self) -> Result<()> {
        for e in 0..self.edges.len() {
            let (a, b) = self.edges[e].nodes;
            self.edges[e].label = if b == self.boundary() {
                MatchingType::Boundary
            } else {
                let (ca, ta) = self.node_coords(a);
                let (cb, tb) = self.node_coords(b);
                let (pa, pb) = (self.positions[ca], self.positions[cb]);
                let dt = tb as isize - ta as isize;
                let dr = (pb.0 as isize - pa.0 as isize) / 2;
                let dc = (pb.1 as isize - pa.1 as isize) / 2;
                let class = classify(dt, dr, dc).ok_or(Error::Classification(a, b))?;
                MatchingType::Interior(class)
            };
        }
        Ok(())
    }
}

/// Class of an interior edge from its offset `(dt, dr, dc)` in layers and
/// check spacings. Both lattices share the same geometry: d joins
/// horizontal neighbours in one layer, b vertical neighbours, and the
/// time-like classes a, c, e, f go one layer up with spatial offsets
/// `(0, 0)`, `(1, 0)`, `(0, 1)` and `(1, -1)`.
pub fn classify(dt: isize, dr: isize, dc: isize) -> Option<MatchingClass> {
    let (dt, dr, dc) = if dt < 0 { (-dt, -dr, -dc) } else { (dt, dr, dc) };
    match (dt, dr, dc) {
        (0, 0, 1) | (0, 0, -1) => Some(MatchingClass::D),
        (0, 1, 0) | (0, -1, 0) => Some(MatchingClass::B),
        (1, 0, 0) => Some(MatchingClass::A),
        (1, 1, 0) => Some(MatchingClass::C),
        (1, 0, 1) => Some(MatchingClass::E),
        (1, 1, -1) => Some(MatchingClass::F),
        _ => None,
    }
}

/// Conditional probabilities between edges of a lattice and its dual:
/// for each primal edge `e` and dual edge `f` sharing at least one fault,
/// `P(f | e) = (Σ rates of shared faults) / (Σ rates of faults on e)`.
pub fn derive_correlations<F: Scalar>(
    primal: &DecodingGraph<F>,
    dual: &DecodingGraph<F>,
    enumeration: &FaultEnumeration,
) -> Vec<Vec<Correlation>> {
    primal
        .edges
        .iter()
        .map(|edge| {
            let mut joint: BTreeMap<usize, Rational> = BTreeMap::new();
            for &i in &edge.faults {
                if let Some(f) = dual.fault_edge(i) {
                    *joint.entry(f).or_insert_with(|| Rational::from_integer(0)) += enumeration.faults[i].coefficient;
                }
            }
            joint
                .into_iter()
                .map(|(dual_edge, j)| Correlation { dual_edge, conditional: j / edge.coefficient })
                .collect()
        })
        .collect()
}

/// Both lattices with their correlation tables filled in.
pub fn build_pair<F: Scalar>(
    layout: &CodeLayout,
    enumeration: &FaultEnumeration,
    weighting: Weighting,
) -> Result<(DecodingGraph<F>, DecodingGraph<F>)> {
    let mut gx = DecodingGraph::new(layout, enumeration, Lattice::X, weighting)?;
    let mut gz = DecodingGraph::new(layout, enumeration, Lattice::Z, weighting)?;
    gx.correlations = derive_correlations(&gx, &gz, enumeration);
    gz.correlations = derive_correlations(&gz, &gx, enumeration);
    Ok((gx, gz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::SeCircuit;
    use crate::noise::{code_capacity_faults, enumerate_single_faults};
    use std::collections::BTreeSet;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn setup(l: usize, t: usize, idle: bool) -> (CodeLayout, FaultEnumeration) {
        let layout = CodeLayout::new(l).unwrap();
        let circuit = SeCircuit::new(&layout);
        let en = enumerate_single_faults(&layout, &circuit, t, idle, true).unwrap();
        (layout, en)
    }

    /// Table of conditional probabilities for edges away from every boundary,
    /// keyed by primal class: standalone coefficient and conditional multiset.
    fn table() -> Vec<(MatchingClass, Option<Rational>, Vec<Rational>)> {
        use MatchingClass::*;
        vec![
            (A, Some(r(31, 15)), vec![r(1, 31), r(1, 31), r(3, 31), r(3, 31), r(2, 31)]),
            (B, None, vec![r(1, 2)]),
            (C, None, vec![r(3, 16), r(3, 16), r(1, 8), r(1, 16), r(1, 16)]),
            (
                D,
                Some(r(42, 15)),
                vec![
                    r(1, 21),
                    r(1, 21),
                    r(1, 42),
                    r(1, 42),
                    r(1, 42),
                    r(1, 42),
                    r(1, 14),
                    r(1, 14),
                    r(3, 14),
                    r(1, 14),
                    r(1, 14),
                ],
            ),
            (E, None, vec![r(1, 8), r(1, 8), r(1, 8), r(1, 4), r(1, 8)]),
            (F, None, vec![r(1, 4), r(1, 8), r(1, 8), r(1, 8), r(1, 8)]),
        ]
    }

    fn in_bulk(g: &DecodingGraph<f64>, e: usize, l: usize) -> bool {
        let (a, b) = g.edges[e].nodes;
        if b == g.boundary() {
            return false;
        }
        [a, b].iter().all(|&n| {
            let (c, t) = g.node_coords(n);
            let (row, col) = g.positions[c];
            (4..=2 * l - 6).contains(&row) && (4..=2 * l - 6).contains(&col) && (2..=g.layers - 3).contains(&t)
        })
    }

    #[test]
    fn bulk_conditionals_match_table() {
        let l = 7;
        let (layout, en) = setup(l, 7, true);
        let (gx, gz) = build_pair::<f64>(&layout, &en, Weighting::LogProbability { p: 0.001 }).unwrap();
        let mut matched = 0;
        for g in [&gx, &gz] {
            for (class, coefficient, row) in table() {
                let mut expected = row.clone();
                expected.sort();
                let bulk: Vec<usize> = (0..g.edges.len())
                    .filter(|&e| g.edges[e].label.class() == Some(class) && in_bulk(g, e, l))
                    .collect();
                assert!(!bulk.is_empty(), "{class:?}");
                for e in bulk {
                    if let Some(c) = coefficient {
                        assert_eq!(g.edges[e].coefficient, c, "{class:?}");
                    }
                    let mut got: Vec<Rational> = g.correlations[e].iter().map(|c| c.conditional).collect();
                    got.sort();
                    assert_eq!(got, expected, "{class:?} on {:?}", g.lattice);
                }
                if g.lattice == Lattice::X {
                    matched += row.len();
                }
            }
        }
        assert_eq!(matched, 32);
    }

    #[test]
    fn temporal_edge_probability() {
        let l = 7;
        let (layout, en) = setup(l, 7, true);
        let (gx, gz) = build_pair::<f64>(&layout, &en, Weighting::LogProbability { p: 0.001 }).unwrap();
        let e = (0..gx.edges.len())
            .find(|&e| gx.edges[e].label.class() == Some(MatchingClass::A) && in_bulk(&gx, e, l))
            .unwrap();
        let edge = &gx.edges[e];
        assert_eq!(edge.coefficient, r(31, 15));
        let locations: BTreeSet<(usize, usize)> =
            edge.faults.iter().map(|&i| (en.faults[i].fault.round, en.faults[i].fault.op)).collect();
        assert_eq!(locations.len(), 5);
        let measurements = edge
            .faults
            .iter()
            .filter(|&&i| matches!(en.faults[i].fault.payload, crate::noise::FaultPayload::MeasurementFlip))
            .count();
        assert_eq!(measurements, 1);
        assert!((edge.weight - 6.181818275599201).abs() < 1e-9);

        // Joint with the dual d edge carrying 3/31.
        let c = gx.correlations[e].iter().find(|c| c.conditional == r(3, 31)).unwrap();
        let dual = &gz.edges[c.dual_edge];
        assert_eq!(dual.label.class(), Some(MatchingClass::D));
        assert_eq!(dual.coefficient, r(42, 15));
        let joint: Rational = edge
            .faults
            .iter()
            .filter(|&&i| gz.fault_edge(i) == Some(c.dual_edge))
            .map(|&i| en.faults[i].coefficient)
            .sum();
        assert_eq!(joint, r(3, 15));
    }

    #[test]
    fn bulk_lattices_are_symmetric() {
        for l in [7, 8] {
            let (layout, en) = setup(l, l, true);
            let (gx, gz) = build_pair::<f64>(&layout, &en, Weighting::LogProbability { p: 0.001 }).unwrap();
            let multiset = |g: &DecodingGraph<f64>| {
                (0..g.edges.len())
                    .filter(|&e| in_bulk(g, e, l))
                    .map(|e| (g.edges[e].label.class(), g.edges[e].coefficient))
                    .collect::<BTreeSet<_>>()
            };
            assert_eq!(multiset(&gx), multiset(&gz));
        }
    }

    #[test]
    fn graph_invariants() {
        let p = 0.001;
        for (l, t) in [(3, 3), (5, 4)] {
            let (layout, en) = setup(l, t, true);
            let (gx, gz) = build_pair::<f64>(&layout, &en, Weighting::LogProbability { p }).unwrap();
            for (g, d) in [(&gx, &gz), (&gz, &gx)] {
                let mut owned = vec![0usize; en.faults.len()];
                for (e, edge) in g.edges.iter().enumerate() {
                    assert!(edge.probability > 0.0 && edge.probability < 1.0);
                    assert!((edge.weight + edge.probability.ln()).abs() < 1e-12);
                    for &i in &edge.faults {
                        owned[i] += 1;
                        assert_eq!(g.fault_edge(i), Some(e));
                    }
                    for c in &g.correlations[e] {
                        assert!(c.conditional > r(0, 1) && c.conditional <= r(1, 1));
                        let standalone = d.edges[c.dual_edge].probability;
                        assert!(f64::from_rational(c.conditional) > standalone);
                    }
                    // Faults sharing an edge agree on data flips up to stabilizers.
                    let first = g.lattice_part(&en.faults[edge.faults[0]].residual);
                    for &i in &edge.faults[1..] {
                        let diff = first.multiply(&g.lattice_part(&en.faults[i].residual)).unwrap();
                        assert!(!layout.is_logical_error(&diff).unwrap(), "edge {e}");
                    }
                }
                for (i, f) in en.faults.iter().enumerate() {
                    assert_eq!(owned[i], usize::from(!f.events(g.lattice).is_empty()));
                }
            }
        }
    }

    #[test]
    fn rate_validation() {
        let (layout, en) = setup(3, 3, true);
        let zero = DecodingGraph::<f64>::new(&layout, &en, Lattice::X, Weighting::LogProbability { p: 0.0 });
        assert!(matches!(zero, Err(Error::DegenerateWeight)));
        let g = DecodingGraph::<f64>::new(&layout, &en, Lattice::X, Weighting::LogProbability { p: 0.01 }).unwrap();
        let p_max = g.p_max();
        assert!(p_max > 0.0 && p_max < 1.0);
        let big = DecodingGraph::<f64>::new(&layout, &en, Lattice::X, Weighting::LogProbability { p: p_max });
        assert!(matches!(big, Err(Error::RateTooLarge { .. })));
    }

    #[test]
    fn code_capacity_graph() {
        let layout = CodeLayout::new(3).unwrap();
        let en = code_capacity_faults(&layout).unwrap();
        let (gx, gz) = build_pair::<f32>(&layout, &en, Weighting::Unit).unwrap();
        // One edge per data qubit on each lattice.
        assert_eq!(gx.edges.len(), layout.num_data());
        assert_eq!(gz.edges.len(), layout.num_data());
        for (g, d) in [(&gx, &gz), (&gz, &gx)] {
            assert!(g.edges.iter().all(|e| e.weight == 1.0 && e.flips.len() == 1));
            // Y ties each edge to the dual edge on the same qubit.
            for (e, cs) in g.correlations.iter().enumerate() {
                assert_eq!(cs.len(), 1);
                assert_eq!(cs[0].conditional, r(1, 2));
                assert_eq!(g.edges[e].flips, d.edges[cs[0].dual_edge].flips);
            }
        }
    }
}
