//! The Whitney switch operation and enumeration of available switches.
//!
//! A switch across a separating pair {u,v} re-attaches every edge that runs
//! from u into the flipped side at v and vice versa. Edge and vertex ids
//! are untouched, so the identity map on edges is a 2-isomorphism between a
//! graph and any of its switches.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, LabeledGraph, VertexId};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum SwitchError {
    #[error("graph is not 2-connected")]
    NotTwoConnected,
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A switch: the separator pair and the flipped side (excluding the pair).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SwitchMove {
    pub separator: (VertexId, VertexId),
    pub side_b: BTreeSet<VertexId>,
}

fn check_move(g: &LabeledGraph, m: &SwitchMove) -> Result<(), SwitchError> {
    if !g.is_two_connected() {
        return Err(SwitchError::NotTwoConnected);
    }
    let (u, v) = &m.separator;
    if u == v || !g.has_vertex(u) || !g.has_vertex(v) {
        return Err(SwitchError::InvalidMove("bad separator pair".into()));
    }
    if m.side_b.is_empty() {
        return Err(SwitchError::InvalidMove("empty flipped side".into()));
    }
    if m.side_b.contains(u) || m.side_b.contains(v) {
        return Err(SwitchError::InvalidMove(
            "flipped side contains a separator vertex".into(),
        ));
    }
    if !m.side_b.iter().all(|x| g.has_vertex(x)) {
        return Err(SwitchError::InvalidMove("unknown vertex in side".into()));
    }
    let rest: BTreeSet<VertexId> = g
        .vertex_set()
        .iter()
        .filter(|x| !m.side_b.contains(x) && *x != u && *x != v)
        .cloned()
        .collect();
    if rest.is_empty() {
        return Err(SwitchError::InvalidMove(
            "flipped side covers everything outside the separator".into(),
        ));
    }
    for (id, (a, b)) in g.edges() {
        let crosses = (m.side_b.contains(a) && rest.contains(b))
            || (m.side_b.contains(b) && rest.contains(a));
        if crosses {
            return Err(SwitchError::InvalidMove(format!(
                "edge {id} crosses the separation"
            )));
        }
    }
    Ok(())
}

/// Applies a switch, returning a new graph on the same vertex and edge ids.
pub fn apply_switch(g: &LabeledGraph, m: &SwitchMove) -> Result<LabeledGraph, SwitchError> {
    check_move(g, m)?;
    let (u, v) = &m.separator;
    let map_end = |this: &VertexId, other: &VertexId| -> VertexId {
        if this == u && m.side_b.contains(other) {
            v.clone()
        } else if this == v && m.side_b.contains(other) {
            u.clone()
        } else {
            this.clone()
        }
    };
    let edges: Vec<_> = g
        .edges()
        .map(|(id, (a, b))| (id.clone(), map_end(a, b), map_end(b, a)))
        .collect();
    let out = LabeledGraph::new(g.vertex_set().iter().cloned(), edges)?;
    debug_assert!(out.is_two_connected());
    Ok(out)
}

/// All switches of `g`, one canonical move per separator and side-grouping:
/// for each 2-separator the components of g - {u,v} are grouped into two
/// nonempty parts, and the lexicographically smaller part is the flipped
/// side. Moves that happen to fix the graph are still listed; the solver
/// deduplicates states by incidence key.
pub fn enumerate_moves(g: &LabeledGraph) -> Result<Vec<SwitchMove>, SwitchError> {
    let separators = g.find_two_separators().map_err(|e| match e {
        GraphError::NotTwoConnected => SwitchError::NotTwoConnected,
        other => SwitchError::Graph(other),
    })?;
    let mut out = Vec::new();
    for (u, v) in separators {
        let removed: BTreeSet<VertexId> = [u.clone(), v.clone()].into_iter().collect();
        let comps = g.connected_components(&removed);
        let c = comps.len();
        debug_assert!(c >= 2);
        // Component 0 stays on the fixed side, giving 2^(c-1) - 1 splits.
        for mask in 1u32..(1 << (c - 1)) {
            let mut group: BTreeSet<VertexId> = BTreeSet::new();
            for (i, comp) in comps.iter().enumerate().skip(1) {
                if mask & (1 << (i - 1)) != 0 {
                    group.extend(comp.iter().cloned());
                }
            }
            let complement: BTreeSet<VertexId> = comps
                .iter()
                .flatten()
                .filter(|x| !group.contains(*x))
                .cloned()
                .collect();
            let side_b = if group <= complement { group } else { complement };
            out.push(SwitchMove {
                separator: (u.clone(), v.clone()),
                side_b,
            });
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}
