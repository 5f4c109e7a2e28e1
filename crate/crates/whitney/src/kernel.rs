//! Kernelization and exact solving.
//!
//! Five reduction rules shrink an instance along its Tutte decompositions
//! while preserving the answer: chording long good segments of bad cycle
//! bags, completing good bags to cliques, gluing mutually good bag pairs,
//! performing forced switches across separator nodes whose two sides cannot
//! be aligned otherwise, and deleting simplicial vertices. The kernel has
//! at most max(52*b - 36, 3) vertices for b the original breakpoint number,
//! and instances with b > 2k are rejected outright. The solver then runs a
//! breadth-first search over switches with canonical-state deduplication
//! and a breakpoint-based lower-bound prune.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{cycle_graph, EdgeId, GraphError, LabeledGraph, VertexId};
use crate::switching::{apply_switch, enumerate_moves, SwitchError, SwitchMove};
use crate::tutte::{node_label, tutte_decompose, NodeId, TorsoKind, TutteDecomposition, TutteError};
use crate::twoiso::{
    build_tree_iso, classify_bags, enhance, find_phi_isomorphism, is_two_isomorphism,
    restricted_phi_iso, BagReport, EdgeBijection, IsoError, TreeIso,
};

/// Vertex cap for the exact search.
pub const SOLVE_VERTEX_CAP: usize = 30;

#[derive(Error, Debug)]
pub enum KernelError {
    #[error("instance graphs must be 2-connected")]
    NotTwoConnected,
    #[error("phi is not a 2-isomorphism")]
    NotTwoIsomorphism,
    #[error("instance too large for exact search: {n} vertices (cap {cap})")]
    TooLarge { n: usize, cap: usize },
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("no partner vertex with matching edge star for {0}")]
    NoPartner(String),
    #[error(transparent)]
    Iso(#[from] IsoError),
    #[error(transparent)]
    Tutte(#[from] TutteError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Switch(#[from] SwitchError),
}

/// A problem instance with its derived caches. The caches always describe
/// the current graphs; every rule application rebuilds or patches them.
#[derive(Clone, Debug)]
pub struct Instance {
    pub g: LabeledGraph,
    pub h: LabeledGraph,
    pub phi: EdgeBijection,
    pub k: u32,
    pub dg: TutteDecomposition,
    pub dh: TutteDecomposition,
    pub alpha: TreeIso,
    pub report: BagReport,
}

fn compute_report(
    g: &LabeledGraph,
    h: &LabeledGraph,
    phi: &EdgeBijection,
    dg: &TutteDecomposition,
    dh: &TutteDecomposition,
    alpha: &TreeIso,
) -> Result<BagReport, KernelError> {
    // The breakpoint machinery is defined on enhanced graphs; classify a
    // shadow-enhanced copy (a no-op when already enhanced).
    let (ge, he, pe, _) = enhance(g, h, phi, dg, dh, alpha)?;
    Ok(classify_bags(&ge, &he, &pe, dg, dh, alpha))
}

impl Instance {
    pub fn new(
        g: LabeledGraph,
        h: LabeledGraph,
        phi: EdgeBijection,
        k: u32,
    ) -> Result<Self, KernelError> {
        if !g.is_two_connected() || !h.is_two_connected() {
            return Err(KernelError::NotTwoConnected);
        }
        if !is_two_isomorphism(&g, &h, &phi)? {
            return Err(KernelError::NotTwoIsomorphism);
        }
        let dg = tutte_decompose(&g)?;
        let dh = tutte_decompose(&h)?;
        let alpha = build_tree_iso(&g, &h, &phi, &dg, &dh)?;
        let report = compute_report(&g, &h, &phi, &dg, &dh, &alpha)?;
        Ok(Instance {
            g,
            h,
            phi,
            k,
            dg,
            dh,
            alpha,
            report,
        })
    }

    pub fn breakpoint_number(&self) -> usize {
        self.report.breakpoint_number()
    }

    /// Consistency of the caches with the current graphs: decompositions
    /// validate and equal a fresh recomputation, alpha equals the rebuilt
    /// isomorphism, the report equals a fresh classification.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        match is_two_isomorphism(&self.g, &self.h, &self.phi) {
            Ok(true) => {}
            Ok(false) => out.push("phi is not a 2-isomorphism".into()),
            Err(e) => out.push(format!("phi check failed: {e}")),
        }
        for (name, d, g) in [("G", &self.dg, &self.g), ("H", &self.dh, &self.h)] {
            for violation in crate::tutte::validate(d, g) {
                out.push(format!("{name}: {violation}"));
            }
            match tutte_decompose(g) {
                Ok(fresh) => {
                    if fresh != *d {
                        out.push(format!("{name}: cached decomposition differs from fresh"));
                    }
                }
                Err(e) => out.push(format!("{name}: decompose failed: {e}")),
            }
        }
        match build_tree_iso(&self.g, &self.h, &self.phi, &self.dg, &self.dh) {
            Ok(fresh) => {
                if fresh.map() != self.alpha.map() {
                    out.push("cached alpha differs from rebuilt".into());
                }
            }
            Err(e) => out.push(format!("alpha rebuild failed: {e}")),
        }
        match compute_report(&self.g, &self.h, &self.phi, &self.dg, &self.dh, &self.alpha) {
            Ok(fresh) => {
                if fresh != self.report {
                    out.push("cached report differs from fresh classification".into());
                }
            }
            Err(e) => out.push(format!("report recompute failed: {e}")),
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Trace

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedEdge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedEdgePair {
    pub g: AddedEdge,
    pub h: AddedEdge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum TraceStep {
    Enhance { added: Vec<AddedEdgePair> },
    TrivialNoShortcut { breakpoints: usize, k: u32 },
    GoodSegmentChord { segment: Vec<VertexId>, added: AddedEdgePair },
    CompleteGoodBag { bag: Vec<VertexId>, added: Vec<AddedEdgePair> },
    GlueMutuallyGood { bags: [Vec<VertexId>; 2], added: Vec<AddedEdgePair> },
    ForcedSwitch { mv: SwitchMove, k_after: u32 },
    ForcedSwitchStop { mv: SwitchMove },
    DeleteSimplicial { g_vertex: VertexId, h_vertex: VertexId },
}

/// Ordered log of everything the kernelization did; replaying it against
/// the original instance reproduces the kernel byte-exactly.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelTrace {
    pub steps: Vec<TraceStep>,
}

// ---------------------------------------------------------------------------
// Decomposition patch helpers

/// Rebuilds a decomposition after changing some bags; returns the new
/// decomposition and the old-to-new node id map (identity off `changes`).
fn relabel_nodes(
    d: &TutteDecomposition,
    changes: &BTreeMap<NodeId, BTreeSet<VertexId>>,
) -> (TutteDecomposition, BTreeMap<NodeId, NodeId>) {
    let mut rename: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut bags = BTreeMap::new();
    for (t, bag) in &d.bags {
        let new_bag = changes.get(t).cloned().unwrap_or_else(|| bag.clone());
        let new_id = node_label(&new_bag);
        rename.insert(t.clone(), new_id.clone());
        bags.insert(new_id, new_bag);
    }
    let tree = d
        .tree
        .iter()
        .map(|(a, b)| {
            let (x, y) = (rename[a].clone(), rename[b].clone());
            if x <= y {
                (x, y)
            } else {
                (y, x)
            }
        })
        .collect();
    let w2 = d.w2.iter().map(|t| rename[t].clone()).collect();
    let w3plus = d.w3plus.iter().map(|t| rename[t].clone()).collect();
    let torso_kind = d
        .torso_kind
        .iter()
        .map(|(t, k)| (rename[t].clone(), *k))
        .collect();
    (
        TutteDecomposition {
            bags,
            tree,
            w2,
            w3plus,
            torso_kind,
        },
        rename,
    )
}

fn remap_alpha(
    alpha: &TreeIso,
    rename_g: &BTreeMap<NodeId, NodeId>,
    rename_h: &BTreeMap<NodeId, NodeId>,
) -> TreeIso {
    let map = alpha
        .map()
        .iter()
        .map(|(t, s)| {
            (
                rename_g.get(t).cloned().unwrap_or_else(|| t.clone()),
                rename_h.get(s).cloned().unwrap_or_else(|| s.clone()),
            )
        })
        .collect();
    TreeIso::from_map(map)
}

/// Splits a cycle node into segment bag + remainder bag joined by a fresh
/// w2 node on the chord pair; neighbors reattach by bag inclusion.
fn split_cycle_node(
    d: &mut TutteDecomposition,
    t: &NodeId,
    seg_bag: BTreeSet<VertexId>,
    rest_bag: BTreeSet<VertexId>,
    pair: BTreeSet<VertexId>,
) -> Result<(), KernelError> {
    let old_neighbors = d.neighbors(t);
    d.bags.remove(t);
    d.w3plus.remove(t);
    d.torso_kind.remove(t);
    d.tree.retain(|(a, b)| a != t && b != t);
    let n1 = node_label(&seg_bag);
    let n2 = node_label(&rest_bag);
    let np = node_label(&pair);
    d.bags.insert(n1.clone(), seg_bag.clone());
    d.bags.insert(n2.clone(), rest_bag.clone());
    d.bags.insert(np.clone(), pair);
    d.w3plus.insert(n1.clone());
    d.w3plus.insert(n2.clone());
    d.w2.insert(np.clone());
    d.torso_kind.insert(n1.clone(), TorsoKind::Cycle);
    d.torso_kind.insert(n2.clone(), TorsoKind::Cycle);
    let mut add_edge = |a: &NodeId, b: &NodeId| {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        d.tree.insert((x.clone(), y.clone()));
    };
    add_edge(&n1, &np);
    add_edge(&n2, &np);
    for w in old_neighbors {
        let wbag = d.bags[&w].clone();
        if wbag.is_subset(&seg_bag) {
            add_edge(&w, &n1);
        } else if wbag.is_subset(&rest_bag) {
            add_edge(&w, &n2);
        } else {
            return Err(KernelError::InternalInconsistency(format!(
                "neighbor {w} fits neither side of the split"
            )));
        }
    }
    Ok(())
}

/// Merges two w3plus nodes across their shared w2 node into one clique bag;
/// the w2 node disappears when nothing else hangs on it.
fn merge_glued_nodes(
    d: &mut TutteDecomposition,
    t1: &NodeId,
    t2: &NodeId,
    mid: &NodeId,
) -> NodeId {
    let union: BTreeSet<VertexId> = d.bags[t1].union(&d.bags[t2]).cloned().collect();
    let mut outside: BTreeSet<NodeId> = BTreeSet::new();
    for t in [t1, t2] {
        for nb in d.neighbors(t) {
            if nb != *mid {
                outside.insert(nb);
            }
        }
    }
    let mid_rest: BTreeSet<NodeId> = d
        .neighbors(mid)
        .into_iter()
        .filter(|x| x != t1 && x != t2)
        .collect();
    for t in [t1, t2] {
        d.bags.remove(t);
        d.w3plus.remove(t);
        d.torso_kind.remove(t);
        d.tree.retain(|(a, b)| a != t && b != t);
    }
    let merged = node_label(&union);
    d.bags.insert(merged.clone(), union);
    d.w3plus.insert(merged.clone());
    d.torso_kind.insert(merged.clone(), TorsoKind::ThreeConnected);
    let mut add_edge = |a: &NodeId, b: &NodeId| {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        d.tree.insert((x.clone(), y.clone()));
    };
    for w in &outside {
        add_edge(w, &merged);
    }
    if mid_rest.is_empty() {
        d.bags.remove(mid);
        d.w2.remove(mid);
        d.tree.retain(|(a, b)| a != mid && b != mid);
    } else {
        add_edge(mid, &merged);
    }
    merged
}

// ---------------------------------------------------------------------------
// Reduction rules

/// Rule: chord an inclusion-maximal good segment of a bad cycle bag and its
/// image path, splitting the bag in both decomposition trees.
pub fn rule1_segments(inst: &Instance) -> Result<(Instance, Option<TraceStep>), KernelError> {
    for (t, info) in &inst.report.bags {
        if info.good || info.good_segments.is_empty() {
            continue;
        }
        let path = info.good_segments[0].clone();
        let s = inst
            .alpha
            .image(t)
            .ok_or_else(|| KernelError::InternalInconsistency("unmapped bag".into()))?
            .clone();
        let sub_h = inst.h.induced(&inst.dh.bags[&s]);
        let h_path = crate::twoiso::image_path(&inst.phi, &inst.g, &sub_h, &path)
            .ok_or_else(|| {
                KernelError::InternalInconsistency("segment image is not a path".into())
            })?;
        let (v0, vr) = (path[0].clone(), path[path.len() - 1].clone());
        let (u0, ur) = (h_path[0].clone(), h_path[h_path.len() - 1].clone());

        let mut g = inst.g.clone();
        let mut h = inst.h.clone();
        let (ga, gb) = if v0 <= vr { (&v0, &vr) } else { (&vr, &v0) };
        let (ha, hb) = if u0 <= ur { (&u0, &ur) } else { (&ur, &u0) };
        let ge = EdgeId::new(format!("~sg:{}:{}", ga.as_str(), gb.as_str()));
        let he = EdgeId::new(format!("~sg:{}:{}", ha.as_str(), hb.as_str()));
        g.add_edge(ge.clone(), v0.clone(), vr.clone())?;
        h.add_edge(he.clone(), u0.clone(), ur.clone())?;
        let phi = inst.phi.extended(ge.clone(), he.clone())?;

        let seg_bag: BTreeSet<VertexId> = path.iter().cloned().collect();
        let interior: BTreeSet<VertexId> =
            path[1..path.len() - 1].iter().cloned().collect();
        let rest_bag: BTreeSet<VertexId> = inst.dg.bags[t]
            .difference(&interior)
            .cloned()
            .collect();
        let pair: BTreeSet<VertexId> = [v0.clone(), vr.clone()].into_iter().collect();
        if rest_bag.len() < 3 {
            return Err(KernelError::InternalInconsistency(
                "segment split leaves a degenerate remainder".into(),
            ));
        }
        let h_seg: BTreeSet<VertexId> = h_path.iter().cloned().collect();
        let h_interior: BTreeSet<VertexId> =
            h_path[1..h_path.len() - 1].iter().cloned().collect();
        let h_rest: BTreeSet<VertexId> = inst.dh.bags[&s]
            .difference(&h_interior)
            .cloned()
            .collect();
        let h_pair: BTreeSet<VertexId> = [u0.clone(), ur.clone()].into_iter().collect();

        let mut dg = inst.dg.clone();
        let mut dh = inst.dh.clone();
        split_cycle_node(&mut dg, t, seg_bag.clone(), rest_bag.clone(), pair.clone())?;
        split_cycle_node(&mut dh, &s, h_seg.clone(), h_rest.clone(), h_pair.clone())?;
        let mut amap = inst.alpha.map().clone();
        amap.remove(t);
        amap.insert(node_label(&seg_bag), node_label(&h_seg));
        amap.insert(node_label(&rest_bag), node_label(&h_rest));
        amap.insert(node_label(&pair), node_label(&h_pair));
        let alpha = TreeIso::from_map(amap);

        let report = compute_report(&g, &h, &phi, &dg, &dh, &alpha)?;
        let step = TraceStep::GoodSegmentChord {
            segment: path,
            added: AddedEdgePair {
                g: AddedEdge {
                    id: ge,
                    u: v0,
                    v: vr,
                },
                h: AddedEdge {
                    id: he,
                    u: u0,
                    v: ur,
                },
            },
        };
        return Ok((
            Instance {
                g,
                h,
                phi,
                k: inst.k,
                dg,
                dh,
                alpha,
                report,
            },
            Some(step),
        ));
    }
    Ok((inst.clone(), None))
}

/// Rule: complete a good bag with nonadjacent vertices to a clique on both
/// sides, mapping new chords through the bag's realizing vertex map.
pub fn rule2_complete_good_bags(
    inst: &Instance,
) -> Result<(Instance, Option<TraceStep>), KernelError> {
    for (t, info) in &inst.report.bags {
        if !info.good {
            continue;
        }
        let bag = &inst.dg.bags[t];
        let vs: Vec<&VertexId> = bag.iter().collect();
        let mut missing = Vec::new();
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                if inst.g.edge_between(vs[i], vs[j]).is_none() {
                    missing.push((vs[i].clone(), vs[j].clone()));
                }
            }
        }
        if missing.is_empty() {
            continue;
        }
        let s = inst
            .alpha
            .image(t)
            .ok_or_else(|| KernelError::InternalInconsistency("unmapped bag".into()))?
            .clone();
        let psi = restricted_phi_iso(&inst.g, &inst.h, &inst.phi, bag, &inst.dh.bags[&s])
            .ok_or_else(|| {
                KernelError::InternalInconsistency(format!(
                    "bag {t} classified good but admits no realizing map"
                ))
            })?;
        let mut g = inst.g.clone();
        let mut h = inst.h.clone();
        let mut phi = inst.phi.clone();
        let mut added = Vec::new();
        for (u, v) in missing {
            let (pu, pv) = (psi[&u].clone(), psi[&v].clone());
            let ge = EdgeId::new(format!("~cb:{}:{}", u.as_str(), v.as_str()));
            let (ha, hb) = if pu <= pv { (&pu, &pv) } else { (&pv, &pu) };
            let he = EdgeId::new(format!("~cb:{}:{}", ha.as_str(), hb.as_str()));
            g.add_edge(ge.clone(), u.clone(), v.clone())?;
            h.add_edge(he.clone(), pu.clone(), pv.clone())?;
            phi = phi.extended(ge.clone(), he.clone())?;
            added.push(AddedEdgePair {
                g: AddedEdge { id: ge, u, v },
                h: AddedEdge {
                    id: he,
                    u: pu,
                    v: pv,
                },
            });
        }
        // The bag is now a clique: the torso turns 3-connected. Bags and
        // trees are untouched.
        let mut dg = inst.dg.clone();
        let mut dh = inst.dh.clone();
        dg.torso_kind.insert(t.clone(), TorsoKind::ThreeConnected);
        dh.torso_kind.insert(s.clone(), TorsoKind::ThreeConnected);
        let alpha = inst.alpha.clone();
        let report = compute_report(&g, &h, &phi, &dg, &dh, &alpha)?;
        let step = TraceStep::CompleteGoodBag {
            bag: bag.iter().cloned().collect(),
            added,
        };
        return Ok((
            Instance {
                g,
                h,
                phi,
                k: inst.k,
                dg,
                dh,
                alpha,
                report,
            },
            Some(step),
        ));
    }
    Ok((inst.clone(), None))
}

/// Rule: glue a mutually good pair of bags around a shared w2 node into one
/// clique bag by adding the complete join between their private sides.
pub fn rule3_glue_mutually_good(
    inst: &Instance,
) -> Result<(Instance, Option<TraceStep>), KernelError> {
    for w in &inst.dg.w2 {
        let nbrs: Vec<NodeId> = inst
            .dg
            .neighbors(w)
            .into_iter()
            .filter(|t| inst.dg.w3plus.contains(t))
            .collect();
        for i in 0..nbrs.len() {
            for j in i + 1..nbrs.len() {
                let (t1, t2) = (&nbrs[i], &nbrs[j]);
                if !inst.report.bags[t1].mutually_good_with.contains(t2) {
                    continue;
                }
                let (s1, s2) = (
                    inst.alpha.image(t1).unwrap().clone(),
                    inst.alpha.image(t2).unwrap().clone(),
                );
                let sw = inst.alpha.image(w).unwrap().clone();
                let bag1 = inst.dg.bags[t1].clone();
                let bag2 = inst.dg.bags[t2].clone();
                let union_g: BTreeSet<VertexId> = bag1.union(&bag2).cloned().collect();
                let union_h: BTreeSet<VertexId> = inst.dh.bags[&s1]
                    .union(&inst.dh.bags[&s2])
                    .cloned()
                    .collect();
                let psi = restricted_phi_iso(&inst.g, &inst.h, &inst.phi, &union_g, &union_h)
                    .ok_or_else(|| {
                        KernelError::InternalInconsistency(
                            "pair classified mutually good but admits no realizing map".into(),
                        )
                    })?;
                let mut g = inst.g.clone();
                let mut h = inst.h.clone();
                let mut phi = inst.phi.clone();
                let mut added = Vec::new();
                for u in bag1.difference(&bag2) {
                    for v in bag2.difference(&bag1) {
                        let (pu, pv) = (psi[u].clone(), psi[v].clone());
                        let (ga, gb) = if u <= v { (u, v) } else { (v, u) };
                        let ge =
                            EdgeId::new(format!("~gl:{}:{}", ga.as_str(), gb.as_str()));
                        let (ha, hb) = if pu <= pv { (&pu, &pv) } else { (&pv, &pu) };
                        let he =
                            EdgeId::new(format!("~gl:{}:{}", ha.as_str(), hb.as_str()));
                        g.add_edge(ge.clone(), u.clone(), v.clone())?;
                        h.add_edge(he.clone(), pu.clone(), pv.clone())?;
                        phi = phi.extended(ge.clone(), he.clone())?;
                        added.push(AddedEdgePair {
                            g: AddedEdge {
                                id: ge,
                                u: u.clone(),
                                v: v.clone(),
                            },
                            h: AddedEdge {
                                id: he,
                                u: pu,
                                v: pv,
                            },
                        });
                    }
                }
                let mut dg = inst.dg.clone();
                let mut dh = inst.dh.clone();
                let merged_g = merge_glued_nodes(&mut dg, t1, t2, w);
                let merged_h = merge_glued_nodes(&mut dh, &s1, &s2, &sw);
                let mut amap = inst.alpha.map().clone();
                amap.remove(t1);
                amap.remove(t2);
                if !dg.bags.contains_key(w) {
                    amap.remove(w);
                }
                amap.insert(merged_g, merged_h);
                let alpha = TreeIso::from_map(amap);
                let report = compute_report(&g, &h, &phi, &dg, &dh, &alpha)?;
                let step = TraceStep::GlueMutuallyGood {
                    bags: [
                        bag1.iter().cloned().collect(),
                        bag2.iter().cloned().collect(),
                    ],
                    added,
                };
                return Ok((
                    Instance {
                        g,
                        h,
                        phi,
                        k: inst.k,
                        dg,
                        dh,
                        alpha,
                        report,
                    },
                    Some(step),
                ));
            }
        }
    }
    Ok((inst.clone(), None))
}

/// Outcome of the forced-switch rule.
pub enum Rule4Outcome {
    NotApplied,
    Applied(Instance, TraceStep),
    /// The switch was forced but the budget is spent: the instance is a
    /// no-instance.
    Stopped(TraceStep),
}

/// Rule: a degree-2 w2 node whose neighbor bags are good but not mutually
/// good forces a switch across it; spend one unit of budget.
pub fn rule4_forced_switch(inst: &Instance) -> Result<Rule4Outcome, KernelError> {
    for w in &inst.dg.w2 {
        if inst.dg.degree(w) != 2 {
            continue;
        }
        let nbrs: Vec<NodeId> = inst.dg.neighbors(w).into_iter().collect();
        let (t1, t2) = (&nbrs[0], &nbrs[1]);
        let good = |t: &NodeId| inst.report.bags.get(t).map(|i| i.good).unwrap_or(false);
        if !good(t1) || !good(t2) {
            continue;
        }
        if inst.report.bags[t1].mutually_good_with.contains(t2) {
            continue;
        }
        let pair: Vec<VertexId> = inst.dg.bags[w].iter().cloned().collect();
        let (u, v) = (pair[0].clone(), pair[1].clone());
        // Split the tree at w; each side's bag union is one side of the
        // Whitney separation.
        let side_nodes = |start: &NodeId| -> BTreeSet<NodeId> {
            let mut seen: BTreeSet<NodeId> = [start.clone()].into_iter().collect();
            let mut queue = VecDeque::from([start.clone()]);
            while let Some(t) = queue.pop_front() {
                for nb in inst.dg.neighbors(&t) {
                    if nb != *w && seen.insert(nb.clone()) {
                        queue.push_back(nb);
                    }
                }
            }
            seen
        };
        let nodes1 = side_nodes(t1);
        let nodes2 = side_nodes(t2);
        let union_of = |nodes: &BTreeSet<NodeId>| -> BTreeSet<VertexId> {
            let mut out = BTreeSet::new();
            for t in nodes {
                out.extend(inst.dg.bags[t].iter().cloned());
            }
            out
        };
        let priv1: BTreeSet<VertexId> = union_of(&nodes1)
            .into_iter()
            .filter(|x| *x != u && *x != v)
            .collect();
        let priv2: BTreeSet<VertexId> = union_of(&nodes2)
            .into_iter()
            .filter(|x| *x != u && *x != v)
            .collect();
        let (side_b, flipped_nodes) = if priv1 <= priv2 {
            (priv1, nodes1)
        } else {
            (priv2, nodes2)
        };
        let mv = SwitchMove {
            separator: (u.clone(), v.clone()),
            side_b,
        };
        if inst.k == 0 {
            return Ok(Rule4Outcome::Stopped(TraceStep::ForcedSwitchStop { mv }));
        }
        let g = apply_switch(&inst.g, &mv)?;
        // Bags on the flipped side holding exactly one of {u,v} swap it.
        let mut changes: BTreeMap<NodeId, BTreeSet<VertexId>> = BTreeMap::new();
        for t in &flipped_nodes {
            let bag = &inst.dg.bags[t];
            let has_u = bag.contains(&u);
            let has_v = bag.contains(&v);
            if has_u ^ has_v {
                let mut nb = bag.clone();
                if has_u {
                    nb.remove(&u);
                    nb.insert(v.clone());
                } else {
                    nb.remove(&v);
                    nb.insert(u.clone());
                }
                changes.insert(t.clone(), nb);
            }
        }
        let (dg, rename) = relabel_nodes(&inst.dg, &changes);
        let alpha = remap_alpha(&inst.alpha, &rename, &BTreeMap::new());
        let k = inst.k - 1;
        let report = compute_report(&g, &inst.h, &inst.phi, &dg, &inst.dh, &alpha)?;
        let step = TraceStep::ForcedSwitch {
            mv,
            k_after: k,
        };
        return Ok(Rule4Outcome::Applied(
            Instance {
                g,
                h: inst.h.clone(),
                phi: inst.phi.clone(),
                k,
                dg,
                dh: inst.dh.clone(),
                alpha,
                report,
            },
            step,
        ));
    }
    Ok(Rule4Outcome::NotApplied)
}

fn is_simplicial(g: &LabeledGraph, v: &VertexId) -> bool {
    let nbrs: Vec<VertexId> = g.neighbors(v).into_iter().collect();
    for i in 0..nbrs.len() {
        for j in i + 1..nbrs.len() {
            if g.edge_between(&nbrs[i], &nbrs[j]).is_none() {
                return false;
            }
        }
    }
    true
}

/// Rule: delete a simplicial vertex of degree >= 3 together with its star
/// partner on the other side.
pub fn rule5_delete_simplicial(
    inst: &Instance,
) -> Result<(Instance, Option<TraceStep>), KernelError> {
    let g_stars = inst.g.stars();
    for (v, star) in &g_stars {
        if star.len() < 3 || !is_simplicial(&inst.g, v) {
            continue;
        }
        let image = inst
            .phi
            .image_set(star)
            .ok_or_else(|| KernelError::InternalInconsistency("unmapped star edge".into()))?;
        let partner = inst
            .h
            .vertices()
            .find(|u| inst.h.incident_edges(u) == image)
            .cloned()
            .ok_or_else(|| KernelError::NoPartner(v.to_string()))?;
        let holders: Vec<NodeId> = inst
            .dg
            .bags
            .iter()
            .filter(|(_, bag)| bag.contains(v))
            .map(|(t, _)| t.clone())
            .collect();
        let t = match holders.as_slice() {
            [only] if inst.dg.w3plus.contains(only) => only.clone(),
            _ => {
                return Err(KernelError::InternalInconsistency(format!(
                    "simplicial vertex {v} is not private to one large bag"
                )))
            }
        };
        let s = inst.alpha.image(&t).unwrap().clone();
        if !inst.dh.bags[&s].contains(&partner) {
            return Err(KernelError::InternalInconsistency(
                "partner vertex lies outside the image bag".into(),
            ));
        }
        let mut g = inst.g.clone();
        let mut h = inst.h.clone();
        g.remove_vertex(v);
        h.remove_vertex(&partner);
        let phi = inst.phi.restricted(&g.edge_ids());
        if phi.len() != g.edge_count()
            || phi
                .image_set(&g.edge_ids())
                .map(|im| im != h.edge_ids())
                .unwrap_or(true)
        {
            return Err(KernelError::InternalInconsistency(
                "phi restriction does not match the deleted stars".into(),
            ));
        }
        let shrink = |d: &TutteDecomposition, t: &NodeId, gone: &VertexId| {
            let mut bag = d.bags[t].clone();
            bag.remove(gone);
            let mut changes = BTreeMap::new();
            changes.insert(t.clone(), bag.clone());
            let (mut nd, rename) = relabel_nodes(d, &changes);
            let kind = if bag.len() == 3 {
                TorsoKind::Cycle
            } else {
                TorsoKind::ThreeConnected
            };
            nd.torso_kind.insert(rename[t].clone(), kind);
            (nd, rename)
        };
        let (dg, rename_g) = shrink(&inst.dg, &t, v);
        let (dh, rename_h) = shrink(&inst.dh, &s, &partner);
        let alpha = remap_alpha(&inst.alpha, &rename_g, &rename_h);
        let report = compute_report(&g, &h, &phi, &dg, &dh, &alpha)?;
        let step = TraceStep::DeleteSimplicial {
            g_vertex: v.clone(),
            h_vertex: partner,
        };
        return Ok((
            Instance {
                g,
                h,
                phi,
                k: inst.k,
                dg,
                dh,
                alpha,
                report,
            },
            Some(step),
        ));
    }
    Ok((inst.clone(), None))
}

// ---------------------------------------------------------------------------
// Driver

/// The fixed no-instance used as the rejection token: two 4-cycles under a
/// bijection that transposes two adjacent edges. Any bijection between
/// cycles preserves cycles, but the transposed stars match no vertex star,
/// so no vertex map realizes it and the instance is NO at k = 0.
pub fn trivial_no_instance() -> Instance {
    let g = cycle_graph(4, "a", "e");
    let h = cycle_graph(4, "b", "f");
    let chi = EdgeBijection::new(
        [
            (EdgeId::new("e1"), EdgeId::new("f1")),
            (EdgeId::new("e2"), EdgeId::new("f3")),
            (EdgeId::new("e3"), EdgeId::new("f2")),
            (EdgeId::new("e4"), EdgeId::new("f4")),
        ]
        .into_iter()
        .collect(),
    )
    .expect("bijection");
    debug_assert!(is_two_isomorphism(&g, &h, &chi).unwrap());
    debug_assert!(find_phi_isomorphism(&g, &h, &chi).is_none());
    Instance::new(g, h, chi, 0).expect("trivial no-instance is well-formed")
}

/// Recognizes the rejection token.
pub fn is_trivial_no(inst: &Instance) -> bool {
    let t = trivial_no_instance();
    inst.k == 0
        && inst.g.incidence_key() == t.g.incidence_key()
        && inst.h.incidence_key() == t.h.incidence_key()
        && inst.phi == t.phi
}

/// Runs the kernelization: the breakpoint shortcut, enhancement, then all
/// five rules to a global fixpoint. With `validate` every step rechecks the
/// caches against fresh recomputation.
pub fn kernelize_with_options(
    inst: &Instance,
    validate: bool,
) -> Result<(Instance, KernelTrace), KernelError> {
    let mut trace = KernelTrace::default();
    let b = inst.breakpoint_number();
    if b > 2 * inst.k as usize {
        trace.steps.push(TraceStep::TrivialNoShortcut {
            breakpoints: b,
            k: inst.k,
        });
        return Ok((trivial_no_instance(), trace));
    }
    let (g, h, phi, added) = enhance(
        &inst.g, &inst.h, &inst.phi, &inst.dg, &inst.dh, &inst.alpha,
    )?;
    let added_pairs: Vec<AddedEdgePair> = added
        .iter()
        .map(|(ge, he)| {
            let (gu, gv) = g.endpoints(ge).unwrap().clone();
            let (hu, hv) = h.endpoints(he).unwrap().clone();
            AddedEdgePair {
                g: AddedEdge {
                    id: ge.clone(),
                    u: gu,
                    v: gv,
                },
                h: AddedEdge {
                    id: he.clone(),
                    u: hu,
                    v: hv,
                },
            }
        })
        .collect();
    trace.steps.push(TraceStep::Enhance { added: added_pairs });
    let report = compute_report(&g, &h, &phi, &inst.dg, &inst.dh, &inst.alpha)?;
    let mut cur = Instance {
        g,
        h,
        phi,
        k: inst.k,
        dg: inst.dg.clone(),
        dh: inst.dh.clone(),
        alpha: inst.alpha.clone(),
        report,
    };
    let check = |inst: &Instance| -> Result<(), KernelError> {
        if !validate {
            return Ok(());
        }
        let violations = inst.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(KernelError::InternalInconsistency(violations.join("; ")))
        }
    };
    check(&cur)?;
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        if rounds > 100_000 {
            return Err(KernelError::InternalInconsistency(
                "rule loop did not reach a fixpoint".into(),
            ));
        }
        let (next, step) = rule1_segments(&cur)?;
        if let Some(step) = step {
            trace.steps.push(step);
            cur = next;
            check(&cur)?;
            continue;
        }
        let (next, step) = rule2_complete_good_bags(&cur)?;
        if let Some(step) = step {
            trace.steps.push(step);
            cur = next;
            check(&cur)?;
            continue;
        }
        let (next, step) = rule3_glue_mutually_good(&cur)?;
        if let Some(step) = step {
            trace.steps.push(step);
            cur = next;
            check(&cur)?;
            continue;
        }
        match rule4_forced_switch(&cur)? {
            Rule4Outcome::Applied(next, step) => {
                trace.steps.push(step);
                cur = next;
                check(&cur)?;
                continue;
            }
            Rule4Outcome::Stopped(step) => {
                trace.steps.push(step);
                return Ok((trivial_no_instance(), trace));
            }
            Rule4Outcome::NotApplied => {}
        }
        let (next, step) = rule5_delete_simplicial(&cur)?;
        if let Some(step) = step {
            trace.steps.push(step);
            cur = next;
            check(&cur)?;
            continue;
        }
        break;
    }
    Ok((cur, trace))
}

pub fn kernelize(inst: &Instance) -> Result<(Instance, KernelTrace), KernelError> {
    kernelize_with_options(inst, false)
}

/// Mechanically replays a trace against an instance, deriving nothing.
pub fn replay_trace(inst: &Instance, trace: &KernelTrace) -> Result<Instance, KernelError> {
    let mut g = inst.g.clone();
    let mut h = inst.h.clone();
    let mut phi = inst.phi.clone();
    let mut k = inst.k;
    for step in &trace.steps {
        match step {
            TraceStep::TrivialNoShortcut { .. } | TraceStep::ForcedSwitchStop { .. } => {
                return Ok(trivial_no_instance());
            }
            TraceStep::Enhance { added } => {
                for pair in added {
                    g.add_edge(pair.g.id.clone(), pair.g.u.clone(), pair.g.v.clone())?;
                    h.add_edge(pair.h.id.clone(), pair.h.u.clone(), pair.h.v.clone())?;
                    phi = phi.extended(pair.g.id.clone(), pair.h.id.clone())?;
                }
            }
            TraceStep::GoodSegmentChord { added, .. } => {
                g.add_edge(added.g.id.clone(), added.g.u.clone(), added.g.v.clone())?;
                h.add_edge(added.h.id.clone(), added.h.u.clone(), added.h.v.clone())?;
                phi = phi.extended(added.g.id.clone(), added.h.id.clone())?;
            }
            TraceStep::CompleteGoodBag { added, .. }
            | TraceStep::GlueMutuallyGood { added, .. } => {
                for pair in added {
                    g.add_edge(pair.g.id.clone(), pair.g.u.clone(), pair.g.v.clone())?;
                    h.add_edge(pair.h.id.clone(), pair.h.u.clone(), pair.h.v.clone())?;
                    phi = phi.extended(pair.g.id.clone(), pair.h.id.clone())?;
                }
            }
            TraceStep::ForcedSwitch { mv, k_after } => {
                g = apply_switch(&g, mv)?;
                k = *k_after;
            }
            TraceStep::DeleteSimplicial { g_vertex, h_vertex } => {
                g.remove_vertex(g_vertex);
                h.remove_vertex(h_vertex);
                phi = phi.restricted(&g.edge_ids());
            }
        }
    }
    Instance::new(g, h, phi, k)
}

// ---------------------------------------------------------------------------
// Exact search

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOutcome {
    pub yes: bool,
    pub switches: Option<Vec<SwitchMove>>,
}

/// Breakpoint number of a candidate left graph against the fixed right side.
fn breakpoint_of_state(
    g: &LabeledGraph,
    h: &LabeledGraph,
    phi: &EdgeBijection,
    dh: &TutteDecomposition,
) -> Result<usize, KernelError> {
    let dg = tutte_decompose(g)?;
    let alpha = build_tree_iso(g, h, phi, &dg, dh)?;
    let report = compute_report(g, h, phi, &dg, dh, &alpha)?;
    Ok(report.breakpoint_number())
}

/// Exact decision by breadth-first search over switches to depth k, with
/// incidence-key deduplication and the breakpoint lower bound as a prune:
/// a state needing ceil(b/2) more switches than remain is dropped. On YES
/// the witness is replayed and verified before returning.
pub fn solve(inst: &Instance) -> Result<SolveOutcome, KernelError> {
    let n = inst.g.vertex_count();
    if n > SOLVE_VERTEX_CAP {
        return Err(KernelError::TooLarge {
            n,
            cap: SOLVE_VERTEX_CAP,
        });
    }
    if find_phi_isomorphism(&inst.g, &inst.h, &inst.phi).is_some() {
        return Ok(SolveOutcome {
            yes: true,
            switches: Some(Vec::new()),
        });
    }
    if inst.k == 0 {
        return Ok(SolveOutcome {
            yes: false,
            switches: None,
        });
    }
    let b0 = inst.breakpoint_number();
    if b0.div_ceil(2) > inst.k as usize {
        return Ok(SolveOutcome {
            yes: false,
            switches: None,
        });
    }

    let mut arena: Vec<(LabeledGraph, usize, Option<SwitchMove>)> =
        vec![(inst.g.clone(), usize::MAX, None)];
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(inst.g.incidence_key());
    let mut layer: Vec<usize> = vec![0];
    let reconstruct = |arena: &Vec<(LabeledGraph, usize, Option<SwitchMove>)>,
                       mut idx: usize|
     -> Vec<SwitchMove> {
        let mut moves = Vec::new();
        while idx != usize::MAX {
            if let Some(mv) = &arena[idx].2 {
                moves.push(mv.clone());
            }
            idx = arena[idx].1;
        }
        moves.reverse();
        moves
    };
    for depth in 1..=inst.k as usize {
        let mut next_layer = Vec::new();
        for &idx in &layer {
            let state = arena[idx].0.clone();
            for mv in enumerate_moves(&state)? {
                let candidate = apply_switch(&state, &mv)?;
                let key = candidate.incidence_key();
                if seen.contains(&key) {
                    continue;
                }
                seen.insert(key);
                arena.push((candidate.clone(), idx, Some(mv)));
                let cidx = arena.len() - 1;
                if find_phi_isomorphism(&candidate, &inst.h, &inst.phi).is_some() {
                    let moves = reconstruct(&arena, cidx);
                    let mut replay = inst.g.clone();
                    for m in &moves {
                        replay = apply_switch(&replay, m)?;
                    }
                    if find_phi_isomorphism(&replay, &inst.h, &inst.phi).is_none() {
                        return Err(KernelError::InternalInconsistency(
                            "witness fails to replay".into(),
                        ));
                    }
                    return Ok(SolveOutcome {
                        yes: true,
                        switches: Some(moves),
                    });
                }
                if depth < inst.k as usize {
                    let remaining = inst.k as usize - depth;
                    let b = breakpoint_of_state(&candidate, &inst.h, &inst.phi, &inst.dh)?;
                    if b.div_ceil(2) > remaining {
                        continue;
                    }
                    next_layer.push(cidx);
                }
            }
        }
        layer = next_layer;
        if layer.is_empty() && depth < inst.k as usize {
            break;
        }
    }
    Ok(SolveOutcome {
        yes: false,
        switches: None,
    })
}
