//! Tutte decompositions of 2-connected graphs.
//!
//! The decomposition is an adhesion-2 tree decomposition whose nodes split
//! into separator bags of size 2 (w2) and bags of size >= 3 (w3plus) whose
//! torsos are 3-connected graphs or cycles, with the tree bipartite between
//! the two classes. Construction runs a recursive split on separating
//! pairs, merges cycle and bond chains, and is checked by an independent
//! validator plus a relabeling-uniqueness test rather than relying on the
//! construction itself.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{EdgeId, GraphError, LabeledGraph, VertexId};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TorsoKind {
    ThreeConnected,
    Cycle,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TutteError {
    #[error("graph is not 2-connected")]
    NotTwoConnected,
    #[error("no such w3plus node: {0}")]
    BadNode(NodeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Tree of bags over a 2-connected graph, with the (w2, w3plus) partition
/// and the torso kind of every large bag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TutteDecomposition {
    pub bags: BTreeMap<NodeId, BTreeSet<VertexId>>,
    pub tree: BTreeSet<(NodeId, NodeId)>,
    pub w2: BTreeSet<NodeId>,
    pub w3plus: BTreeSet<NodeId>,
    pub torso_kind: BTreeMap<NodeId, TorsoKind>,
}

/// Node labels are derived from the sorted bag contents so decompositions
/// of equal graphs are byte-comparable.
pub fn node_label(bag: &BTreeSet<VertexId>) -> NodeId {
    let joined: Vec<&str> = bag.iter().map(|v| v.as_str()).collect();
    let mut hasher = Sha256::new();
    hasher.update(joined.join("\x1f").as_bytes());
    let digest = hasher.finalize();
    let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
    NodeId(format!("n{hex}"))
}

impl TutteDecomposition {
    pub fn bag(&self, t: &NodeId) -> Option<&BTreeSet<VertexId>> {
        self.bags.get(t)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.bags.keys()
    }

    pub fn neighbors(&self, t: &NodeId) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        for (a, b) in &self.tree {
            if a == t {
                out.insert(b.clone());
            } else if b == t {
                out.insert(a.clone());
            }
        }
        out
    }

    pub fn degree(&self, t: &NodeId) -> usize {
        self.tree.iter().filter(|(a, b)| a == t || b == t).count()
    }

    pub fn leaves(&self) -> Vec<NodeId> {
        self.bags
            .keys()
            .filter(|t| self.degree(t) == 1)
            .cloned()
            .collect()
    }

    /// Nodes at tree distance exactly 2.
    pub fn second_neighborhood(&self, t: &NodeId) -> BTreeSet<NodeId> {
        let direct = self.neighbors(t);
        let mut out = BTreeSet::new();
        for s in &direct {
            for r in self.neighbors(s) {
                if r != *t && !direct.contains(&r) {
                    out.insert(r);
                }
            }
        }
        out
    }

    /// All-pairs tree distances (by BFS from each node).
    pub fn distances_from(&self, start: &NodeId) -> BTreeMap<NodeId, usize> {
        let mut dist: BTreeMap<NodeId, usize> = BTreeMap::new();
        let mut queue = VecDeque::new();
        dist.insert(start.clone(), 0);
        queue.push_back(start.clone());
        while let Some(t) = queue.pop_front() {
            let d = dist[&t];
            for s in self.neighbors(&t) {
                if !dist.contains_key(&s) {
                    dist.insert(s.clone(), d + 1);
                    queue.push_back(s);
                }
            }
        }
        dist
    }
}

// ---------------------------------------------------------------------------
// Construction: recursive splitting into bonds, polygons, and rigid pieces.

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum PieceEdge {
    Real(EdgeId),
    Virtual(u64),
}

#[derive(Clone, Debug)]
struct Piece {
    vertices: BTreeSet<VertexId>,
    edges: Vec<(VertexId, VertexId, PieceEdge)>,
}

impl Piece {
    fn components_without(&self, u: &VertexId, v: &VertexId) -> Vec<BTreeSet<VertexId>> {
        let mut adj: BTreeMap<&VertexId, Vec<&VertexId>> = BTreeMap::new();
        for w in &self.vertices {
            adj.entry(w).or_default();
        }
        for (a, b, _) in &self.edges {
            adj.get_mut(a).unwrap().push(b);
            adj.get_mut(b).unwrap().push(a);
        }
        let mut seen: BTreeSet<&VertexId> = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.vertices.iter().filter(|w| *w != u && *w != v) {
            if seen.contains(start) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::new();
            queue.push_back(start);
            seen.insert(start);
            while let Some(x) = queue.pop_front() {
                comp.insert(x.clone());
                for y in &adj[x] {
                    if *y != u && *y != v && !seen.contains(*y) {
                        seen.insert(y);
                        queue.push_back(y);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    fn is_simple_cycle(&self) -> bool {
        if self.vertices.len() < 3 || self.edges.len() != self.vertices.len() {
            return false;
        }
        let mut deg: BTreeMap<&VertexId, usize> = BTreeMap::new();
        let mut pairs = BTreeSet::new();
        for (a, b, _) in &self.edges {
            *deg.entry(a).or_default() += 1;
            *deg.entry(b).or_default() += 1;
            if !pairs.insert((a.clone(), b.clone())) {
                return false; // parallel edges
            }
        }
        if !self.vertices.iter().all(|w| deg.get(w) == Some(&2)) {
            return false;
        }
        self.components_without_none() == 1
    }

    fn components_without_none(&self) -> usize {
        // connectivity over all vertices
        let mut adj: BTreeMap<&VertexId, Vec<&VertexId>> = BTreeMap::new();
        for w in &self.vertices {
            adj.entry(w).or_default();
        }
        for (a, b, _) in &self.edges {
            adj.get_mut(a).unwrap().push(b);
            adj.get_mut(b).unwrap().push(a);
        }
        let mut seen: BTreeSet<&VertexId> = BTreeSet::new();
        let mut comps = 0;
        for start in &self.vertices {
            if seen.contains(start) {
                continue;
            }
            comps += 1;
            let mut queue = VecDeque::new();
            queue.push_back(start);
            seen.insert(start);
            while let Some(x) = queue.pop_front() {
                for y in &adj[x] {
                    if !seen.contains(*y) {
                        seen.insert(y);
                        queue.push_back(y);
                    }
                }
            }
        }
        comps
    }
}

struct Splitter {
    next_token: u64,
}

struct SplitPlan {
    u: VertexId,
    v: VertexId,
    comps: Vec<BTreeSet<VertexId>>,
    direct: Vec<usize>, // edge indices between u and v
}

impl Splitter {
    /// Finds a separating pair per Hopcroft-Tarjan semantics: at least two
    /// edge classes, excluding the degenerate case of exactly two classes
    /// where one is a single direct edge.
    fn find_split(&self, piece: &Piece) -> Option<SplitPlan> {
        let vs: Vec<&VertexId> = piece.vertices.iter().collect();
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                let (u, v) = (vs[i], vs[j]);
                let direct: Vec<usize> = piece
                    .edges
                    .iter()
                    .enumerate()
                    .filter(|(_, (a, b, _))| {
                        (a == u && b == v) || (a == v && b == u)
                    })
                    .map(|(k, _)| k)
                    .collect();
                let comps = piece.components_without(u, v);
                let classes = direct.len() + comps.len();
                if classes < 2 {
                    continue;
                }
                if classes == 2 && !direct.is_empty() {
                    continue;
                }
                return Some(SplitPlan {
                    u: u.clone(),
                    v: v.clone(),
                    comps,
                    direct,
                });
            }
        }
        None
    }

    fn split(&mut self, piece: Piece, plan: SplitPlan) -> Vec<Piece> {
        let SplitPlan { u, v, comps, direct } = plan;
        let mut out = Vec::new();
        let fresh = |s: &mut Self| {
            s.next_token += 1;
            s.next_token
        };
        if direct.is_empty() && comps.len() == 2 {
            // Plain split: both sides share one virtual edge.
            let token = fresh(self);
            for comp in comps {
                out.push(side_piece(&piece, &u, &v, &comp, token));
            }
            return out;
        }
        // Star split: each component hangs off a bond that also absorbs
        // every direct u-v edge.
        let mut bond_edges: Vec<(VertexId, VertexId, PieceEdge)> = direct
            .iter()
            .map(|&k| piece.edges[k].clone())
            .collect();
        for comp in comps {
            let token = fresh(self);
            bond_edges.push((u.clone(), v.clone(), PieceEdge::Virtual(token)));
            out.push(side_piece(&piece, &u, &v, &comp, token));
        }
        out.push(Piece {
            vertices: [u, v].into_iter().collect(),
            edges: bond_edges,
        });
        out
    }
}

fn side_piece(
    piece: &Piece,
    u: &VertexId,
    v: &VertexId,
    comp: &BTreeSet<VertexId>,
    token: u64,
) -> Piece {
    let mut vertices: BTreeSet<VertexId> = comp.clone();
    vertices.insert(u.clone());
    vertices.insert(v.clone());
    let mut edges: Vec<(VertexId, VertexId, PieceEdge)> = piece
        .edges
        .iter()
        .filter(|(a, b, _)| comp.contains(a) || comp.contains(b))
        .cloned()
        .collect();
    edges.push((u.clone(), v.clone(), PieceEdge::Virtual(token)));
    Piece { vertices, edges }
}

fn has_virtual(piece: &Piece, token: u64) -> bool {
    piece
        .edges
        .iter()
        .any(|(_, _, e)| *e == PieceEdge::Virtual(token))
}

/// Constructs the Tutte decomposition of a 2-connected graph.
pub fn tutte_decompose(g: &LabeledGraph) -> Result<TutteDecomposition, TutteError> {
    if !g.is_two_connected() {
        return Err(TutteError::NotTwoConnected);
    }
    let root = Piece {
        vertices: g.vertex_set().clone(),
        edges: g
            .edges()
            .map(|(id, (a, b))| (a.clone(), b.clone(), PieceEdge::Real(id.clone())))
            .collect(),
    };
    let mut splitter = Splitter { next_token: 0 };
    let mut work = vec![root];
    let mut finals: Vec<Piece> = Vec::new();
    while let Some(piece) = work.pop() {
        if piece.vertices.len() == 2 {
            finals.push(piece);
            continue;
        }
        match splitter.find_split(&piece) {
            Some(plan) => work.extend(splitter.split(piece, plan)),
            None => finals.push(piece),
        }
    }

    // Merge chains: two polygons or two bonds sharing a virtual edge fuse.
    loop {
        let mut merged = false;
        'search: for i in 0..finals.len() {
            for j in i + 1..finals.len() {
                let same_kind = (finals[i].vertices.len() == 2) == (finals[j].vertices.len() == 2);
                if !same_kind {
                    continue;
                }
                if finals[i].vertices.len() > 2
                    && !(finals[i].is_simple_cycle() && finals[j].is_simple_cycle())
                {
                    continue;
                }
                let shared: Vec<u64> = finals[i]
                    .edges
                    .iter()
                    .filter_map(|(_, _, e)| match e {
                        PieceEdge::Virtual(t) if has_virtual(&finals[j], *t) => Some(*t),
                        _ => None,
                    })
                    .collect();
                if let Some(&token) = shared.first() {
                    let b = finals.remove(j);
                    let a = finals.remove(i);
                    let mut vertices = a.vertices;
                    vertices.extend(b.vertices);
                    let mut edges: Vec<_> = a
                        .edges
                        .into_iter()
                        .chain(b.edges)
                        .filter(|(_, _, e)| *e != PieceEdge::Virtual(token))
                        .collect();
                    edges.sort_by(|x, y| x.2.cmp(&y.2));
                    finals.push(Piece { vertices, edges });
                    merged = true;
                    break 'search;
                }
            }
        }
        if !merged {
            break;
        }
    }

    // Assemble the decomposition: bonds become w2 nodes, other pieces w3plus
    // nodes, and a direct piece-piece adjacency gets a fresh w2 node for its
    // separator pair.
    let mut bags: BTreeMap<NodeId, BTreeSet<VertexId>> = BTreeMap::new();
    let mut w2 = BTreeSet::new();
    let mut w3plus = BTreeSet::new();
    let mut torso_kind = BTreeMap::new();
    let mut tree: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();

    let mut label_of_piece: Vec<NodeId> = Vec::with_capacity(finals.len());
    for piece in &finals {
        let label = node_label(&piece.vertices);
        debug_assert!(
            !bags.contains_key(&label),
            "duplicate bag in decomposition"
        );
        bags.insert(label.clone(), piece.vertices.clone());
        if piece.vertices.len() == 2 {
            w2.insert(label.clone());
        } else {
            w3plus.insert(label.clone());
            let kind = if piece.is_simple_cycle() {
                TorsoKind::Cycle
            } else {
                TorsoKind::ThreeConnected
            };
            torso_kind.insert(label.clone(), kind);
        }
        label_of_piece.push(label);
    }

    // Token -> the (at most two) pieces holding it.
    let mut token_holders: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (idx, piece) in finals.iter().enumerate() {
        for (_, _, e) in &piece.edges {
            if let PieceEdge::Virtual(t) = e {
                token_holders.entry(*t).or_default().push(idx);
            }
        }
    }
    for (token, holders) in &token_holders {
        debug_assert_eq!(holders.len(), 2, "virtual token {token} not shared by 2 pieces");
        let (i, j) = (holders[0], holders[1]);
        let bond_i = finals[i].vertices.len() == 2;
        let bond_j = finals[j].vertices.len() == 2;
        let edge = |a: &NodeId, b: &NodeId| {
            if a <= b {
                (a.clone(), b.clone())
            } else {
                (b.clone(), a.clone())
            }
        };
        match (bond_i, bond_j) {
            (true, false) => {
                tree.insert(edge(&label_of_piece[i], &label_of_piece[j]));
            }
            (false, true) => {
                tree.insert(edge(&label_of_piece[i], &label_of_piece[j]));
            }
            (false, false) => {
                // Insert a w2 node for the separator pair of this adhesion.
                let (a, b, _) = finals[i]
                    .edges
                    .iter()
                    .find(|(_, _, e)| *e == PieceEdge::Virtual(*token))
                    .unwrap();
                let pair: BTreeSet<VertexId> = [a.clone(), b.clone()].into_iter().collect();
                let label = node_label(&pair);
                bags.entry(label.clone()).or_insert_with(|| pair.clone());
                w2.insert(label.clone());
                tree.insert(edge(&label, &label_of_piece[i]));
                tree.insert(edge(&label, &label_of_piece[j]));
            }
            (true, true) => unreachable!("adjacent bonds survive merging"),
        }
    }

    Ok(TutteDecomposition {
        bags,
        tree,
        w2,
        w3plus,
        torso_kind,
    })
}

/// The torso of a w3plus bag: its induced subgraph plus a virtual edge for
/// every adhesion pair with a neighboring bag. Virtual edges use the
/// reserved `~adh:` id namespace.
pub fn torso(
    d: &TutteDecomposition,
    g: &LabeledGraph,
    node: &NodeId,
) -> Result<LabeledGraph, TutteError> {
    if !d.w3plus.contains(node) {
        return Err(TutteError::BadNode(node.clone()));
    }
    let bag = d.bag(node).ok_or_else(|| TutteError::BadNode(node.clone()))?;
    let mut out = g.induced(bag);
    for nb in d.neighbors(node) {
        let other = match d.bag(&nb) {
            Some(b) => b,
            None => continue,
        };
        let shared: Vec<&VertexId> = bag.intersection(other).collect();
        for i in 0..shared.len() {
            for j in i + 1..shared.len() {
                if out.edge_between(shared[i], shared[j]).is_none() {
                    let (a, b) = if shared[i] <= shared[j] {
                        (shared[i], shared[j])
                    } else {
                        (shared[j], shared[i])
                    };
                    out.add_edge(
                        EdgeId::new(format!("~adh:{}:{}", a.as_str(), b.as_str())),
                        a.clone(),
                        b.clone(),
                    )?;
                }
            }
        }
    }
    Ok(out)
}

fn is_three_connected(g: &LabeledGraph) -> bool {
    if g.vertex_count() < 4 || !g.is_two_connected() {
        return false;
    }
    g.find_two_separators()
        .map(|s| s.is_empty())
        .unwrap_or(false)
}

fn is_cycle_graph(g: &LabeledGraph) -> bool {
    g.vertex_count() >= 3
        && g.is_connected()
        && g.vertices().all(|v| g.degree(v) == 2)
}

/// Checks a decomposition against its graph; returns human-readable
/// violations (empty iff valid). Covers the tree-decomposition axioms,
/// adhesion 2, and the structural conditions on the two node classes.
pub fn validate(d: &TutteDecomposition, g: &LabeledGraph) -> Vec<String> {
    let mut out = Vec::new();

    // Partition sanity.
    for t in d.bags.keys() {
        let in2 = d.w2.contains(t);
        let in3 = d.w3plus.contains(t);
        if in2 == in3 {
            out.push(format!("node {t} is not in exactly one of w2/w3plus"));
        }
    }
    for t in d.w2.iter().chain(d.w3plus.iter()) {
        if !d.bags.contains_key(t) {
            out.push(format!("partition references unknown node {t}"));
        }
    }

    // Tree shape.
    let n = d.bags.len();
    for (a, b) in &d.tree {
        if a == b {
            out.push(format!("tree has a self-loop at {a}"));
        }
        if !d.bags.contains_key(a) || !d.bags.contains_key(b) {
            out.push(format!("tree edge ({a},{b}) references unknown node"));
        }
    }
    if d.tree.len() + 1 != n {
        out.push(format!(
            "tree has {} edges for {} nodes",
            d.tree.len(),
            n
        ));
    } else if n > 0 {
        let start = d.bags.keys().next().unwrap();
        let reach = d.distances_from(start);
        if reach.len() != n {
            out.push("tree is not connected".into());
        }
    }

    // (T1) vertices covered.
    let mut covered: BTreeSet<&VertexId> = BTreeSet::new();
    for bag in d.bags.values() {
        covered.extend(bag.iter());
        for v in bag {
            if !g.has_vertex(v) {
                out.push(format!("bag vertex {v} is not in the graph"));
            }
        }
    }
    for v in g.vertices() {
        if !covered.contains(v) {
            out.push(format!("(T1) vertex {v} is in no bag"));
        }
    }

    // (T2) edges covered.
    for (id, (a, b)) in g.edges() {
        if !d
            .bags
            .values()
            .any(|bag| bag.contains(a) && bag.contains(b))
        {
            out.push(format!("(T2) edge {id} is in no bag"));
        }
    }

    // (T3) bags containing each vertex form a subtree.
    for v in g.vertices() {
        let holding: BTreeSet<NodeId> = d
            .bags
            .iter()
            .filter(|(_, bag)| bag.contains(v))
            .map(|(t, _)| t.clone())
            .collect();
        if holding.len() <= 1 {
            continue;
        }
        let start = holding.iter().next().unwrap().clone();
        let mut seen: BTreeSet<NodeId> = [start.clone()].into_iter().collect();
        let mut queue = VecDeque::from([start]);
        while let Some(t) = queue.pop_front() {
            for s in d.neighbors(&t) {
                if holding.contains(&s) && seen.insert(s.clone()) {
                    queue.push_back(s);
                }
            }
        }
        if seen.len() != holding.len() {
            out.push(format!("(T3) bags holding {v} do not form a subtree"));
        }
    }

    // Adhesion exactly 2 on every tree edge.
    for (a, b) in &d.tree {
        if let (Some(ba), Some(bb)) = (d.bag(a), d.bag(b)) {
            let adhesion = ba.intersection(bb).count();
            if adhesion != 2 {
                out.push(format!(
                    "tree edge ({a},{b}) has adhesion {adhesion}, expected 2"
                ));
            }
        }
    }

    // (T4) bag sizes.
    for t in &d.w2 {
        if d.bag(t).map(|b| b.len()) != Some(2) {
            out.push(format!("(T4) w2 node {t} does not have a bag of size 2"));
        }
    }
    for t in &d.w3plus {
        if d.bag(t).map(|b| b.len() >= 3) != Some(true) {
            out.push(format!("(T4) w3plus node {t} has a bag smaller than 3"));
        }
    }

    // (T5) torsos are 3-connected or cycles, matching the recorded kind.
    let mut computed_kind: BTreeMap<NodeId, TorsoKind> = BTreeMap::new();
    for t in &d.w3plus {
        match torso(d, g, t) {
            Ok(tor) => {
                if is_cycle_graph(&tor) {
                    computed_kind.insert(t.clone(), TorsoKind::Cycle);
                } else if is_three_connected(&tor) {
                    computed_kind.insert(t.clone(), TorsoKind::ThreeConnected);
                } else {
                    out.push(format!(
                        "(T5) torso of {t} is neither 3-connected nor a cycle"
                    ));
                }
                if let (Some(computed), Some(recorded)) =
                    (computed_kind.get(t), d.torso_kind.get(t))
                {
                    if computed != recorded {
                        out.push(format!(
                            "(T5) torso kind of {t} recorded as {recorded:?} but is {computed:?}"
                        ));
                    }
                }
                if d.torso_kind.get(t).is_none() {
                    out.push(format!("(T5) torso kind of {t} is not recorded"));
                }
            }
            Err(e) => out.push(format!("(T5) cannot build torso of {t}: {e}")),
        }
    }

    // (T6)/(T7) bipartite tree with w2 degrees >= 2.
    for t in &d.w2 {
        if d.degree(t) < 2 {
            out.push(format!("(T6) w2 node {t} has degree {}", d.degree(t)));
        }
        for s in d.neighbors(t) {
            if !d.w3plus.contains(&s) {
                out.push(format!("(T6) w2 node {t} has non-w3plus neighbor {s}"));
            }
        }
    }
    for t in &d.w3plus {
        for s in d.neighbors(t) {
            if !d.w2.contains(&s) {
                out.push(format!("(T7) w3plus node {t} has non-w2 neighbor {s}"));
            }
        }
    }

    // (T8) degree-2 w2 nodes need a 3-connected-torso neighbor or an edge
    // between their bag vertices.
    for t in &d.w2 {
        if d.degree(t) != 2 {
            continue;
        }
        let neighbors: Vec<NodeId> = d.neighbors(t).into_iter().collect();
        let has_rigid = neighbors
            .iter()
            .any(|s| computed_kind.get(s) == Some(&TorsoKind::ThreeConnected));
        let adjacent = d
            .bag(t)
            .map(|bag| {
                let vs: Vec<&VertexId> = bag.iter().collect();
                vs.len() == 2 && g.edge_between(vs[0], vs[1]).is_some()
            })
            .unwrap_or(false);
        if !has_rigid && !adjacent {
            out.push(format!(
                "(T8) degree-2 w2 node {t} has no 3-connected neighbor torso and nonadjacent bag"
            ));
        }
    }

    out
}
