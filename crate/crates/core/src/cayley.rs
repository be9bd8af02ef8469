//! Cayley graphs and digraphs of a finite group, word and angular metrics,
//! and the adjacency element of the standard icosahedral graph.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::rotation::{FiniteGroup, StandardGenerators};

/// A colored edge `from → s·from`; `color` indexes the generating set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub from: usize,
    pub to: usize,
    pub color: usize,
}

/// Cayley graph with edges between `γ` and `s·γ` for each generator `s`.
#[derive(Debug, Clone)]
pub struct CayleyGraph {
    order: usize,
    generators: Vec<usize>,
    edges: Vec<(usize, usize)>,
    directed: Vec<DirectedEdge>,
    neighbors: Vec<Vec<usize>>,
}

impl CayleyGraph {
    pub fn new(group: &FiniteGroup, generators: &[usize]) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidGenerator("generating set is empty".into()));
        }
        for &s in generators {
            group.check_index(s)?;
            if s == group.identity() {
                return Err(Error::InvalidGenerator("the identity cannot be a generator".into()));
            }
        }
        let n = group.order();
        let mut edges = BTreeSet::new();
        let mut directed = Vec::with_capacity(n * generators.len());
        let mut neighbors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (color, &s) in generators.iter().enumerate() {
            for g in 0..n {
                let to = group.mul(s, g);
                directed.push(DirectedEdge { from: g, to, color });
                edges.insert((g.min(to), g.max(to)));
                neighbors[g].insert(to);
                neighbors[to].insert(g);
            }
        }
        Ok(CayleyGraph {
            order: n,
            generators: generators.to_vec(),
            edges: edges.into_iter().collect(),
            directed,
            neighbors: neighbors.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    /// The standard graph of `I_p` with generating set `{C5, C2}`.
    pub fn standard(group: &FiniteGroup, gens: StandardGenerators) -> Result<Self> {
        Self::new(group, &[gens.c5, gens.c2])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Undirected edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn directed_edges(&self) -> &[DirectedEdge] {
        &self.directed
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// BFS distances from `source`; `None` marks unreachable vertices.
    pub fn bfs(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.order];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0);
            for &w in &self.neighbors[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest-path length using generators and their inverses.
    pub fn word_distance(&self, a: usize, b: usize) -> Result<usize> {
        for v in [a, b] {
            if v >= self.order {
                return Err(Error::IndexOutOfRange { index: v, order: self.order });
            }
        }
        self.bfs(a)[b].ok_or(Error::Unreachable { from: a, to: b })
    }

    pub fn diameter(&self) -> Result<usize> {
        let mut best = 0;
        for v in 0..self.order {
            for (w, d) in self.bfs(v).into_iter().enumerate() {
                best = best.max(d.ok_or(Error::Unreachable { from: v, to: w })?);
            }
        }
        Ok(best)
    }

    /// Cycles of the functional graph `γ ↦ s·γ` for one color.
    pub fn color_cycles(&self, color: usize) -> Vec<Vec<usize>> {
        let mut next = vec![usize::MAX; self.order];
        for e in self.directed.iter().filter(|e| e.color == color) {
            next[e.from] = e.to;
        }
        let mut seen = vec![false; self.order];
        let mut cycles = Vec::new();
        for start in 0..self.order {
            if seen[start] || next[start] == usize::MAX {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut v = next[start];
            while v != start {
                if seen[v] {
                    // tail into an earlier cycle; cannot happen for a permutation
                    cycle.clear();
                    break;
                }
                seen[v] = true;
                cycle.push(v);
                v = next[v];
            }
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
        }
        cycles
    }

    /// Graphviz digraph, one color attribute per generator.
    pub fn to_dot(&self, header_comment: Option<&str>) -> String {
        const PALETTE: [&str; 6] = ["blue", "red", "darkgreen", "orange", "purple", "brown"];
        let mut out = String::new();
        if let Some(comment) = header_comment {
            for line in comment.lines() {
                let _ = writeln!(out, "// {line}");
            }
        }
        out.push_str("digraph cayley {\n");
        for v in 0..self.order {
            let _ = writeln!(out, "  {v};");
        }
        for e in &self.directed {
            let color = PALETTE[e.color % PALETTE.len()];
            let _ = writeln!(out, "  {} -> {} [color={color}, label=\"s{}\"];", e.from, e.to, e.color);
        }
        out.push_str("}\n");
        out
    }
}

/// Which metric measures `d(e, γ)` for the truncation flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MetricChoice {
    Word,
    #[default]
    Angular,
}

impl std::str::FromStr for MetricChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(MetricChoice::Word),
            "angular" => Ok(MetricChoice::Angular),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

/// Bi-invariant distance `θ(b·a⁻¹)` on the rotation group.
pub fn angular_distance(group: &FiniteGroup, a: usize, b: usize) -> f64 {
    group.element(group.mul(b, group.inv(a))).angle()
}

/// `d(e, γ)` for every element under the chosen metric.
pub fn distances_from_identity(group: &FiniteGroup, graph: &CayleyGraph, metric: MetricChoice) -> Result<Vec<f64>> {
    let e = group.identity();
    match metric {
        MetricChoice::Angular => Ok((0..group.order()).map(|g| angular_distance(group, e, g)).collect()),
        MetricChoice::Word => graph
            .bfs(e)
            .into_iter()
            .enumerate()
            .map(|(g, d)| d.map(|d| d as f64).ok_or(Error::Unreachable { from: e, to: g }))
            .collect(),
    }
}

/// `δ = ½C5 + ½C5⁻¹ + C2`, so that `Δ = −π_L(δ)` is the adjacency operator
/// of the standard graph.
pub fn adjacency_element(group: &Arc<FiniteGroup>, gens: StandardGenerators) -> Result<AlgebraElement> {
    if !group.satisfies_standard_relations(gens.c5, gens.c2) {
        return Err(Error::InvalidGenerator("pair does not satisfy C5^5 = C2^2 = (C5 C2)^3 = e".into()));
    }
    let mut delta = AlgebraElement::zero(group.clone(), 1);
    delta.add_scalar_at(gens.c5, 0.5.into());
    delta.add_scalar_at(group.inv(gens.c5), 0.5.into());
    delta.add_scalar_at(gens.c2, 1.0.into());
    Ok(delta)
}

/// Unweighted `C5 + C5⁻¹ + C2`, the C60 hopping element.
pub fn c60_element(group: &Arc<FiniteGroup>, gens: StandardGenerators) -> Result<AlgebraElement> {
    if !group.satisfies_standard_relations(gens.c5, gens.c2) {
        return Err(Error::InvalidGenerator("pair does not satisfy C5^5 = C2^2 = (C5 C2)^3 = e".into()));
    }
    let mut h = AlgebraElement::zero(group.clone(), 1);
    for g in [gens.c5, group.inv(gens.c5), gens.c2] {
        h.add_scalar_at(g, 1.0.into());
    }
    Ok(h)
}

/// JSON export of the graph: edges plus distances from the identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub order: usize,
    pub generators: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub directed_edges: Vec<DirectedEdge>,
    pub word_distance_from_identity: Vec<usize>,
    pub angular_distance_from_identity: Vec<f64>,
}

impl GraphJson {
    pub fn new(group: &FiniteGroup, graph: &CayleyGraph) -> Result<Self> {
        let word = distances_from_identity(group, graph, MetricChoice::Word)?;
        let angular = distances_from_identity(group, graph, MetricChoice::Angular)?;
        Ok(GraphJson {
            order: graph.order(),
            generators: graph.generators().to_vec(),
            edges: graph.edges().to_vec(),
            directed_edges: graph.directed_edges().to_vec(),
            word_distance_from_identity: word.into_iter().map(|d| d as usize).collect(),
            angular_distance_from_identity: angular,
        })
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use nalgebra::Vector3;

    use super::*;

    fn standard() -> (Arc<FiniteGroup>, StandardGenerators, CayleyGraph) {
        let g = Arc::new(FiniteGroup::icosahedral().unwrap());
        let s = g.find_standard_generators().unwrap();
        let graph = CayleyGraph::standard(&g, s).unwrap();
        (g, s, graph)
    }

    #[test]
    fn cyclic_graph_is_a_pentagon() {
        let g = FiniteGroup::cyclic(5, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let graph = CayleyGraph::new(&g, &[1]).unwrap();
        assert_eq!(graph.edges().len(), 5);
        assert!((0..5).all(|v| graph.degree(v) == 2));
        assert_eq!(graph.color_cycles(0).len(), 1);
    }

    #[test]
    fn identity_generator_rejected() {
        let g = FiniteGroup::cyclic(5, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert!(matches!(CayleyGraph::new(&g, &[0]), Err(Error::InvalidGenerator(_))));
        assert!(matches!(CayleyGraph::new(&g, &[]), Err(Error::InvalidGenerator(_))));
    }

    #[test]
    fn standard_icosahedral_graph() {
        let (g, s, graph) = standard();
        assert_eq!(graph.order(), 60);
        // {γ, C5γ}: 60 pairs, {γ, C2γ}: 30 pairs
        assert_eq!(graph.edges().len(), 90);
        assert!((0..60).all(|v| graph.degree(v) == 3));
        let pentagons = graph.color_cycles(0);
        assert_eq!(pentagons.len(), 12);
        assert!(pentagons.iter().all(|c| c.len() == 5));
        let e = g.identity();
        assert_eq!(graph.word_distance(e, e).unwrap(), 0);
        assert_eq!(graph.word_distance(e, s.c5).unwrap(), 1);
        assert_eq!(graph.word_distance(e, g.pow(s.c5, 2)).unwrap(), 2);
    }

    #[test]
    fn unreachable_when_not_generating() {
        let g = FiniteGroup::icosahedral().unwrap();
        let s = g.find_standard_generators().unwrap();
        let graph = CayleyGraph::new(&g, &[s.c5]).unwrap();
        let far = (0..60).find(|&x| graph.bfs(0)[x].is_none()).unwrap();
        assert!(matches!(graph.word_distance(0, far), Err(Error::Unreachable { .. })));
    }

    #[test]
    fn angular_examples() {
        let (g, _, _) = standard();
        let e = g.identity();
        assert_eq!(angular_distance(&g, e, e), 0.0);
        for class in g.classes() {
            let d = angular_distance(&g, e, class.representative());
            if class.size() == 15 {
                assert!((d - PI).abs() < 1e-12);
            }
            if class.size() == 20 {
                assert!((d - 2.0 * PI / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn adjacency_element_coefficients() {
        let (g, s, _) = standard();
        let delta = adjacency_element(&g, s).unwrap();
        assert_eq!(delta.scalar_at(s.c5).re, 0.5);
        assert_eq!(delta.scalar_at(g.inv(s.c5)).re, 0.5);
        assert_eq!(delta.scalar_at(s.c2).re, 1.0);
        assert_eq!(delta.support().len(), 3);
        assert!(delta.adjoint().approx_eq(&delta, 0.0));
        let bad = StandardGenerators { c5: s.c2, c2: s.c5 };
        assert!(adjacency_element(&g, bad).is_err());
        assert_eq!(c60_element(&g, s).unwrap().support().len(), 3);
    }

    #[test]
    fn dot_export_has_every_edge() {
        let (_, _, graph) = standard();
        let dot = graph.to_dot(Some("test"));
        assert!(dot.starts_with("// test\ndigraph"));
        assert_eq!(dot.matches("->").count(), 120);
        assert_eq!(dot.matches("color=blue").count(), 60);
    }
}
