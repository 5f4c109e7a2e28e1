//! Labeled simple graphs with stable vertex and edge identities.
//!
//! Identities are opaque strings: a switch rewires incidences but never
//! creates or destroys an edge id, so edge bijections and switch histories
//! survive serialization. All values are immutable once built; operations
//! return fresh graphs.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertex cap for exhaustive simple-cycle enumeration.
pub const CYCLE_ORACLE_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub String);

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub String);

impl VertexId {
    pub fn new(s: impl Into<String>) -> Self {
        VertexId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl EdgeId {
    pub fn new(s: impl Into<String>) -> Self {
        EdgeId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {0} is a loop")]
    LoopEdge(EdgeId),
    #[error("edges {0} and {1} are parallel")]
    ParallelEdges(EdgeId, EdgeId),
    #[error("edge {edge} uses undeclared vertex {vertex}")]
    UnknownVertex { edge: EdgeId, vertex: VertexId },
    #[error("duplicate edge id {0}")]
    DuplicateEdgeId(EdgeId),
    #[error("graph is not 2-connected")]
    NotTwoConnected,
    #[error("{n} vertices exceeds the cycle-enumeration cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("not a separation: {0}")]
    InvalidSeparation(String),
}

fn ordered(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A simple undirected graph whose edges carry stable ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGraph {
    vertices: BTreeSet<VertexId>,
    incidence: BTreeMap<EdgeId, (VertexId, VertexId)>,
}

impl LabeledGraph {
    /// Builds a graph, rejecting loops, parallel edges, and undeclared endpoints.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (EdgeId, VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut incidence = BTreeMap::new();
        let mut seen_pairs: BTreeMap<(VertexId, VertexId), EdgeId> = BTreeMap::new();
        for (id, a, b) in edges {
            if a == b {
                return Err(GraphError::LoopEdge(id));
            }
            for v in [&a, &b] {
                if !vertices.contains(v) {
                    return Err(GraphError::UnknownVertex {
                        edge: id.clone(),
                        vertex: v.clone(),
                    });
                }
            }
            let pair = ordered(a, b);
            if let Some(other) = seen_pairs.get(&pair) {
                return Err(GraphError::ParallelEdges(other.clone(), id));
            }
            seen_pairs.insert(pair.clone(), id.clone());
            if incidence.insert(id.clone(), pair).is_some() {
                return Err(GraphError::DuplicateEdgeId(id));
            }
        }
        Ok(LabeledGraph { vertices, incidence })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.incidence.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.vertices.iter()
    }

    pub fn vertex_set(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn has_vertex(&self, v: &VertexId) -> bool {
        self.vertices.contains(v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, &(VertexId, VertexId))> {
        self.incidence.iter()
    }

    pub fn edge_ids(&self) -> BTreeSet<EdgeId> {
        self.incidence.keys().cloned().collect()
    }

    pub fn endpoints(&self, e: &EdgeId) -> Option<&(VertexId, VertexId)> {
        self.incidence.get(e)
    }

    pub fn edge_between(&self, a: &VertexId, b: &VertexId) -> Option<&EdgeId> {
        let pair = ordered(a.clone(), b.clone());
        self.incidence
            .iter()
            .find(|(_, p)| **p == pair)
            .map(|(id, _)| id)
    }

    pub fn neighbors(&self, v: &VertexId) -> BTreeSet<VertexId> {
        let mut out = BTreeSet::new();
        for (a, b) in self.incidence.values() {
            if a == v {
                out.insert(b.clone());
            } else if b == v {
                out.insert(a.clone());
            }
        }
        out
    }

    pub fn degree(&self, v: &VertexId) -> usize {
        self.incidence
            .values()
            .filter(|(a, b)| a == v || b == v)
            .count()
    }

    /// Edges incident to `v`.
    pub fn incident_edges(&self, v: &VertexId) -> BTreeSet<EdgeId> {
        self.incidence
            .iter()
            .filter(|(_, (a, b))| a == v || b == v)
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// The star map vertex -> set of incident edge ids.
    pub fn stars(&self) -> BTreeMap<VertexId, BTreeSet<EdgeId>> {
        let mut out: BTreeMap<VertexId, BTreeSet<EdgeId>> = self
            .vertices
            .iter()
            .map(|v| (v.clone(), BTreeSet::new()))
            .collect();
        for (id, (a, b)) in &self.incidence {
            out.get_mut(a).unwrap().insert(id.clone());
            out.get_mut(b).unwrap().insert(id.clone());
        }
        out
    }

    fn adjacency(&self) -> BTreeMap<VertexId, Vec<VertexId>> {
        let mut out: BTreeMap<VertexId, Vec<VertexId>> = self
            .vertices
            .iter()
            .map(|v| (v.clone(), Vec::new()))
            .collect();
        for (a, b) in self.incidence.values() {
            out.get_mut(a).unwrap().push(b.clone());
            out.get_mut(b).unwrap().push(a.clone());
        }
        out
    }

    /// Subgraph induced by `keep`; edge ids are preserved.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> LabeledGraph {
        let incidence = self
            .incidence
            .iter()
            .filter(|(_, (a, b))| keep.contains(a) && keep.contains(b))
            .map(|(id, p)| (id.clone(), p.clone()))
            .collect();
        LabeledGraph {
            vertices: keep.intersection(&self.vertices).cloned().collect(),
            incidence,
        }
    }

    /// Adds an edge; errors on loops, parallels, unknown vertices, duplicate ids.
    pub fn add_edge(&mut self, id: EdgeId, a: VertexId, b: VertexId) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::LoopEdge(id));
        }
        for v in [&a, &b] {
            if !self.vertices.contains(v) {
                return Err(GraphError::UnknownVertex {
                    edge: id,
                    vertex: v.clone(),
                });
            }
        }
        if let Some(old) = self.edge_between(&a, &b) {
            return Err(GraphError::ParallelEdges(old.clone(), id));
        }
        if self.incidence.contains_key(&id) {
            return Err(GraphError::DuplicateEdgeId(id));
        }
        self.incidence.insert(id, ordered(a, b));
        Ok(())
    }

    /// Removes a vertex and every edge incident to it.
    pub fn remove_vertex(&mut self, v: &VertexId) {
        self.vertices.remove(v);
        self.incidence.retain(|_, (a, b)| a != v && b != v);
    }

    fn connected_on(&self, removed: &BTreeSet<VertexId>) -> bool {
        let remaining: Vec<&VertexId> =
            self.vertices.iter().filter(|v| !removed.contains(v)).collect();
        if remaining.is_empty() {
            return true;
        }
        let adj = self.adjacency();
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut queue = VecDeque::new();
        queue.push_back(remaining[0].clone());
        seen.insert(remaining[0].clone());
        while let Some(v) = queue.pop_front() {
            for w in &adj[&v] {
                if !removed.contains(w) && !seen.contains(w) {
                    seen.insert(w.clone());
                    queue.push_back(w.clone());
                }
            }
        }
        seen.len() == remaining.len()
    }

    pub fn is_connected(&self) -> bool {
        self.connected_on(&BTreeSet::new())
    }

    /// True iff |V| >= 3, connected, and still connected after any single
    /// vertex deletion.
    pub fn is_two_connected(&self) -> bool {
        if self.vertices.len() < 3 || !self.is_connected() {
            return false;
        }
        self.vertices.iter().all(|v| {
            let removed: BTreeSet<VertexId> = [v.clone()].into_iter().collect();
            self.connected_on(&removed)
        })
    }

    /// Connected components of the graph minus `removed`, each sorted, the
    /// list ordered by smallest member.
    pub fn connected_components(&self, removed: &BTreeSet<VertexId>) -> Vec<BTreeSet<VertexId>> {
        let adj = self.adjacency();
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.vertices.iter().filter(|v| !removed.contains(v)) {
            if seen.contains(start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::new();
            queue.push_back(start.clone());
            seen.insert(start.clone());
            while let Some(v) = queue.pop_front() {
                comp.insert(v.clone());
                for w in &adj[&v] {
                    if !removed.contains(w) && !seen.contains(w) {
                        seen.insert(w.clone());
                        queue.push_back(w.clone());
                    }
                }
            }
            out.push(comp);
        }
        // BTreeSet iteration over vertices already yields components ordered
        // by their smallest member.
        out
    }

    /// All pairs {u,v} whose removal disconnects the graph, sorted.
    pub fn find_two_separators(&self) -> Result<Vec<(VertexId, VertexId)>, GraphError> {
        if !self.is_two_connected() {
            return Err(GraphError::NotTwoConnected);
        }
        let vs: Vec<&VertexId> = self.vertices.iter().collect();
        let mut out = Vec::new();
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                let removed: BTreeSet<VertexId> =
                    [vs[i].clone(), vs[j].clone()].into_iter().collect();
                if self.connected_components(&removed).len() > 1 {
                    out.push((vs[i].clone(), vs[j].clone()));
                }
            }
        }
        Ok(out)
    }

    /// Edge sets of every simple cycle. Exhaustive; capped at
    /// [`CYCLE_ORACLE_CAP`] vertices.
    pub fn all_cycles(&self) -> Result<BTreeSet<BTreeSet<EdgeId>>, GraphError> {
        if self.vertices.len() > CYCLE_ORACLE_CAP {
            return Err(GraphError::TooLarge {
                n: self.vertices.len(),
                cap: CYCLE_ORACLE_CAP,
            });
        }
        let vs: Vec<VertexId> = self.vertices.iter().cloned().collect();
        let index: BTreeMap<&VertexId, usize> = vs.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let adj = self.adjacency();
        let mut cycles = BTreeSet::new();
        // Enumerate paths whose smallest vertex is the start; close back to
        // the start and keep one traversal direction of each cycle.
        for (si, s) in vs.iter().enumerate() {
            let mut path = vec![s.clone()];
            let mut on_path: BTreeSet<usize> = [si].into_iter().collect();
            self.cycle_dfs(s, si, &mut path, &mut on_path, &index, &adj, &mut cycles);
        }
        Ok(cycles)
    }

    #[allow(clippy::too_many_arguments)]
    fn cycle_dfs(
        &self,
        start: &VertexId,
        start_idx: usize,
        path: &mut Vec<VertexId>,
        on_path: &mut BTreeSet<usize>,
        index: &BTreeMap<&VertexId, usize>,
        adj: &BTreeMap<VertexId, Vec<VertexId>>,
        cycles: &mut BTreeSet<BTreeSet<EdgeId>>,
    ) {
        let last = path.last().unwrap().clone();
        for w in &adj[&last] {
            let wi = index[w];
            if w == start && path.len() >= 3 {
                // Each cycle closes twice; keep the direction whose second
                // vertex is smaller than its last.
                if index[&path[1]] < index[path.last().unwrap()] {
                    let mut edges = BTreeSet::new();
                    for pair in path.windows(2) {
                        edges.insert(self.edge_between(&pair[0], &pair[1]).unwrap().clone());
                    }
                    edges.insert(self.edge_between(&last, start).unwrap().clone());
                    cycles.insert(edges);
                }
            } else if wi > start_idx && !on_path.contains(&wi) {
                path.push(w.clone());
                on_path.insert(wi);
                self.cycle_dfs(start, start_idx, path, on_path, index, adj, cycles);
                path.pop();
                on_path.remove(&wi);
            }
        }
    }

    /// Canonical serialization of the incidence map. Two graphs get equal
    /// keys iff they have identical incidence on identical id sets.
    pub fn incidence_key(&self) -> String {
        serde_json::to_string(&self.incidence).expect("incidence map serializes")
    }
}

/// A separation (A,B): A ∪ B = V, both sides have private vertices, and no
/// edge crosses between the private parts. Order = |A ∩ B|; order 2 makes it
/// a Whitney separation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Separation {
    pub a: BTreeSet<VertexId>,
    pub b: BTreeSet<VertexId>,
}

impl Separation {
    pub fn of(
        g: &LabeledGraph,
        a: BTreeSet<VertexId>,
        b: BTreeSet<VertexId>,
    ) -> Result<Self, GraphError> {
        let union: BTreeSet<VertexId> = a.union(&b).cloned().collect();
        if union != *g.vertex_set() {
            return Err(GraphError::InvalidSeparation(
                "sides do not cover the vertex set".into(),
            ));
        }
        if a.difference(&b).next().is_none() || b.difference(&a).next().is_none() {
            return Err(GraphError::InvalidSeparation(
                "each side needs a private vertex".into(),
            ));
        }
        for (id, (x, y)) in g.edges() {
            let x_priv_a = a.contains(x) && !b.contains(x);
            let y_priv_a = a.contains(y) && !b.contains(y);
            let x_priv_b = b.contains(x) && !a.contains(x);
            let y_priv_b = b.contains(y) && !a.contains(y);
            if (x_priv_a && y_priv_b) || (x_priv_b && y_priv_a) {
                return Err(GraphError::InvalidSeparation(format!(
                    "edge {id} crosses the separation"
                )));
            }
        }
        Ok(Separation { a, b })
    }

    pub fn order(&self) -> usize {
        self.a.intersection(&self.b).count()
    }

    pub fn is_whitney(&self) -> bool {
        self.order() == 2
    }
}

pub fn v(s: &str) -> VertexId {
    VertexId::new(s)
}

pub fn e(s: &str) -> EdgeId {
    EdgeId::new(s)
}

/// Builds the cycle v1..vn with edges `{prefix}e{i}` joining v_{i-1} v_i
/// (v0 = vn), matching the edge order used throughout.
pub fn cycle_graph(n: usize, vertex_prefix: &str, edge_prefix: &str) -> LabeledGraph {
    assert!(n >= 3);
    let vs: Vec<VertexId> = (1..=n)
        .map(|i| VertexId::new(format!("{vertex_prefix}{i}")))
        .collect();
    let mut edges = Vec::new();
    for i in 1..=n {
        let a = vs[(i + n - 2) % n].clone(); // v_{i-1}, with v_0 = v_n
        let b = vs[i - 1].clone();
        edges.push((EdgeId::new(format!("{edge_prefix}{i}")), a, b));
    }
    LabeledGraph::new(vs, edges).expect("cycle is simple")
}

/// Complete graph on the given vertex names; edge ids are `{a}-{b}`.
pub fn complete_graph(names: &[&str]) -> LabeledGraph {
    let vs: Vec<VertexId> = names.iter().map(|s| VertexId::new(*s)).collect();
    let mut edges = Vec::new();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            edges.push((
                EdgeId::new(format!("{}-{}", vs[i].as_str(), vs[j].as_str())),
                vs[i].clone(),
                vs[j].clone(),
            ));
        }
    }
    LabeledGraph::new(vs, edges).expect("complete graph is simple")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c4() -> LabeledGraph {
        cycle_graph(4, "v", "e")
    }

    fn k4() -> LabeledGraph {
        complete_graph(&["a", "b", "c", "d"])
    }

    #[test]
    fn two_connectivity_basics() {
        assert!(c4().is_two_connected());
        let path3 = LabeledGraph::new(
            [v("a"), v("b"), v("c")],
            [(e("e1"), v("a"), v("b")), (e("e2"), v("b"), v("c"))],
        )
        .unwrap();
        assert!(!path3.is_two_connected());
        // Two triangles sharing one vertex: the shared vertex cuts.
        let bowtie = LabeledGraph::new(
            [v("u"), v("a"), v("b"), v("c"), v("d")],
            [
                (e("e1"), v("u"), v("a")),
                (e("e2"), v("a"), v("b")),
                (e("e3"), v("b"), v("u")),
                (e("e4"), v("u"), v("c")),
                (e("e5"), v("c"), v("d")),
                (e("e6"), v("d"), v("u")),
            ],
        )
        .unwrap();
        assert!(!bowtie.is_two_connected());
    }

    #[test]
    fn components_examples() {
        let g = c4();
        assert_eq!(g.connected_components(&BTreeSet::new()).len(), 1);
        let removed: BTreeSet<VertexId> = [v("v1"), v("v3")].into_iter().collect();
        let comps = g.connected_components(&removed);
        assert_eq!(comps.len(), 2);
        assert!(comps.contains(&[v("v2")].into_iter().collect()));
        assert!(comps.contains(&[v("v4")].into_iter().collect()));
        let k = k4();
        let removed: BTreeSet<VertexId> = [v("a")].into_iter().collect();
        let comps = k.connected_components(&removed);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].len(), 3);
    }

    #[test]
    fn separators_on_small_graphs() {
        assert_eq!(
            c4().find_two_separators().unwrap(),
            vec![(v("v1"), v("v3")), (v("v2"), v("v4"))]
        );
        assert!(k4().find_two_separators().unwrap().is_empty());
        // C5: exactly the nonadjacent pairs.
        let c5 = cycle_graph(5, "v", "e");
        let seps = c5.find_two_separators().unwrap();
        assert_eq!(seps.len(), 5);
        for (a, b) in &seps {
            assert!(c5.edge_between(a, b).is_none());
        }
    }

    /// Brute-force oracle: delete every pair and test connectivity.
    fn separator_oracle(g: &LabeledGraph) -> Vec<(VertexId, VertexId)> {
        let vs: Vec<VertexId> = g.vertices().cloned().collect();
        let mut out = Vec::new();
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                let removed: BTreeSet<VertexId> =
                    [vs[i].clone(), vs[j].clone()].into_iter().collect();
                if !g.connected_on(&removed)
                    && g.vertices().filter(|x| !removed.contains(x)).count() > 0
                {
                    out.push((vs[i].clone(), vs[j].clone()));
                }
            }
        }
        out
    }

    #[test]
    fn separators_agree_with_oracle() {
        for (n, chords) in [(5usize, 0usize), (6, 1), (7, 2), (8, 2), (10, 3)] {
            let g = crate::instances::random_two_connected(n, chords, 7 + n as u64);
            assert_eq!(g.find_two_separators().unwrap(), separator_oracle(&g));
        }
    }

    #[test]
    fn cycle_enumeration() {
        let tri = cycle_graph(3, "v", "e");
        let cycles = tri.all_cycles().unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles.iter().next().unwrap().len(), 3);

        let cycles = c4().all_cycles().unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles.iter().next().unwrap().len(), 4);

        // K4: 4 triangles + 3 four-cycles, cross-checked by subset oracle.
        let k = k4();
        let cycles = k.all_cycles().unwrap();
        assert_eq!(cycles.len(), 7);
        assert_eq!(cycles, subset_cycle_oracle(&k));
    }

    /// Independent oracle: test every edge subset for being a single cycle.
    fn subset_cycle_oracle(g: &LabeledGraph) -> BTreeSet<BTreeSet<EdgeId>> {
        let ids: Vec<EdgeId> = g.edge_ids().into_iter().collect();
        let mut out = BTreeSet::new();
        for mask in 1u32..(1 << ids.len()) {
            let subset: BTreeSet<EdgeId> = ids
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, id)| id.clone())
                .collect();
            let mut deg: BTreeMap<&VertexId, usize> = BTreeMap::new();
            for id in &subset {
                let (a, b) = g.endpoints(id).unwrap();
                *deg.entry(a).or_default() += 1;
                *deg.entry(b).or_default() += 1;
            }
            if deg.values().any(|d| *d != 2) {
                continue;
            }
            let support: BTreeSet<VertexId> = deg.keys().map(|v| (*v).clone()).collect();
            let sub = g.induced(&support);
            let trimmed = LabeledGraph {
                vertices: support.clone(),
                incidence: sub
                    .incidence
                    .iter()
                    .filter(|(id, _)| subset.contains(id))
                    .map(|(id, p)| (id.clone(), p.clone()))
                    .collect(),
            };
            if trimmed.is_connected() {
                out.insert(subset);
            }
        }
        out
    }

    #[test]
    fn incidence_key_tracks_incidence() {
        let g = c4();
        assert_eq!(g.incidence_key(), c4().incidence_key());
        let mv = crate::switching::SwitchMove {
            separator: (v("v1"), v("v3")),
            side_b: [v("v2")].into_iter().collect(),
        };
        let switched = crate::switching::apply_switch(&g, &mv).unwrap();
        assert_ne!(g.incidence_key(), switched.incidence_key());
        let back = crate::switching::apply_switch(&switched, &mv).unwrap();
        assert_eq!(g.incidence_key(), back.incidence_key());
    }

    #[test]
    fn separation_checks() {
        let g = c4();
        let a: BTreeSet<VertexId> = [v("v1"), v("v2"), v("v3")].into_iter().collect();
        let b: BTreeSet<VertexId> = [v("v1"), v("v3"), v("v4")].into_iter().collect();
        let sep = Separation::of(&g, a, b).unwrap();
        assert_eq!(sep.order(), 2);
        assert!(sep.is_whitney());

        let a: BTreeSet<VertexId> = [v("v1"), v("v2")].into_iter().collect();
        let b: BTreeSet<VertexId> = [v("v3"), v("v4")].into_iter().collect();
        assert!(Separation::of(&g, a, b).is_err());
    }
}
