//! Instance generators, the instance file format, and corpus utilities.
//!
//! Files are JSON with a `format` version field, sorted keys, and string
//! ids throughout; parsing validates every structural invariant before an
//! instance is handed to the solver.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, LabeledGraph, VertexId};
use crate::kernel::{Instance, KernelError};
use crate::reversals::{bfs_distance_circular, CircularPerm, BFS_CAP};
use crate::switching::{apply_switch, enumerate_moves};
use crate::twoiso::{is_two_isomorphism, EdgeBijection};

pub const FORMAT_VERSION: &str = "ws/1";

#[derive(Error, Debug)]
pub enum InstanceError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error ({field}): {message}")]
    Validation { field: String, message: String },
    #[error("permutation too small: need n >= 4")]
    TooSmall,
    #[error("generation failed after {0} attempts")]
    GenerationFailed(usize),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

// ---------------------------------------------------------------------------
// File format

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: String,
    pub u: String,
    pub v: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub format: String,
    pub g: GraphDoc,
    pub h: GraphDoc,
    pub phi: BTreeMap<String, String>,
    pub k: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<MetaDoc>,
}

fn graph_doc(g: &LabeledGraph) -> GraphDoc {
    GraphDoc {
        vertices: g.vertices().map(|v| v.as_str().to_string()).collect(),
        edges: g
            .edges()
            .map(|(id, (a, b))| EdgeDoc {
                id: id.as_str().to_string(),
                u: a.as_str().to_string(),
                v: b.as_str().to_string(),
            })
            .collect(),
    }
}

fn graph_from_doc(doc: &GraphDoc, side: &str) -> Result<LabeledGraph, InstanceError> {
    LabeledGraph::new(
        doc.vertices.iter().map(|s| VertexId::new(s.clone())),
        doc.edges.iter().map(|e| {
            (
                EdgeId::new(e.id.clone()),
                VertexId::new(e.u.clone()),
                VertexId::new(e.v.clone()),
            )
        }),
    )
    .map_err(|e| InstanceError::Validation {
        field: side.to_string(),
        message: e.to_string(),
    })
}

pub fn doc_from_instance(inst: &Instance, meta: Option<MetaDoc>) -> InstanceDoc {
    InstanceDoc {
        format: FORMAT_VERSION.to_string(),
        g: graph_doc(&inst.g),
        h: graph_doc(&inst.h),
        phi: inst
            .phi
            .forward_map()
            .iter()
            .map(|(a, b)| (a.as_str().to_string(), b.as_str().to_string()))
            .collect(),
        k: inst.k,
        meta,
    }
}

/// Builds and fully validates an instance from a document.
pub fn instance_from_doc(doc: &InstanceDoc) -> Result<Instance, InstanceError> {
    if doc.format != FORMAT_VERSION {
        return Err(InstanceError::Validation {
            field: "format".into(),
            message: format!("expected {FORMAT_VERSION}, found {}", doc.format),
        });
    }
    let g = graph_from_doc(&doc.g, "g")?;
    let h = graph_from_doc(&doc.h, "h")?;
    for side in [(&g, "g"), (&h, "h")] {
        if !side.0.is_two_connected() {
            return Err(InstanceError::Validation {
                field: side.1.to_string(),
                message: "graph is not 2-connected".into(),
            });
        }
    }
    let forward: BTreeMap<EdgeId, EdgeId> = doc
        .phi
        .iter()
        .map(|(a, b)| (EdgeId::new(a.clone()), EdgeId::new(b.clone())))
        .collect();
    let phi = EdgeBijection::new(forward).map_err(|_| InstanceError::Validation {
        field: "phi".into(),
        message: "phi not bijective".into(),
    })?;
    phi.matches(&g, &h).map_err(|e| InstanceError::Validation {
        field: "phi".into(),
        message: format!("phi not bijective between the edge sets: {e}"),
    })?;
    match is_two_isomorphism(&g, &h, &phi) {
        Ok(true) => {}
        Ok(false) => {
            return Err(InstanceError::Validation {
                field: "phi".into(),
                message: "not a 2-isomorphism".into(),
            })
        }
        Err(e) => {
            return Err(InstanceError::Validation {
                field: "phi".into(),
                message: e.to_string(),
            })
        }
    }
    Ok(Instance::new(g, h, phi, doc.k)?)
}

pub fn emit(doc: &InstanceDoc) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("instance doc serializes");
    s.push('\n');
    s
}

pub fn parse(text: &str) -> Result<InstanceDoc, InstanceError> {
    serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    instance_from_doc(&parse(text)?)
}

// ---------------------------------------------------------------------------
// Generators

/// Two n-cycles under the bijection realizing a circular permutation: the
/// i-th edge of the right cycle pulls back to edge pi_i of the left one.
pub fn cycle_pair(pi: &[u32]) -> (LabeledGraph, LabeledGraph, EdgeBijection) {
    let n = pi.len();
    let g = crate::graph::cycle_graph(n, "gv", "ge");
    let h = crate::graph::cycle_graph(n, "hv", "he");
    let forward: BTreeMap<EdgeId, EdgeId> = pi
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            (
                EdgeId::new(format!("ge{p}")),
                EdgeId::new(format!("he{}", i + 1)),
            )
        })
        .collect();
    (g, h, EdgeBijection::new(forward).expect("permutation is bijective"))
}

/// Whitney-switch instance on two n-cycles whose answer at k matches the
/// circular reversal distance of `pi`.
pub fn gen_cycle_instance(pi: &[u32], k: u32) -> Result<InstanceDoc, InstanceError> {
    if pi.len() < 4 {
        return Err(InstanceError::TooSmall);
    }
    let (g, h, phi) = cycle_pair(pi);
    let inst = Instance::new(g, h, phi, k)?;
    let expected = if pi.len() <= BFS_CAP {
        let class = CircularPerm::unsigned(pi).map_err(|e| InstanceError::Validation {
            field: "perm".into(),
            message: e.to_string(),
        })?;
        let (d, _) = bfs_distance_circular(&class, &CircularPerm::signed_identity(pi.len()), None)
            .map_err(|e| InstanceError::Validation {
                field: "perm".into(),
                message: e.to_string(),
            })?;
        Some(if d <= k as usize { "yes" } else { "no" }.to_string())
    } else {
        None
    };
    Ok(doc_from_instance(
        &inst,
        Some(MetaDoc {
            generator: Some("cycle".into()),
            seed: None,
            expected,
        }),
    ))
}

/// Series-parallel instance: an n-cycle with a parallel path of length
/// pi_i + 1 across its i-th edge, against the identity-shaped twin.
pub fn gen_subdivided_instance(pi: &[u32], k: u32) -> Result<InstanceDoc, InstanceError> {
    let n = pi.len();
    if n < 4 {
        return Err(InstanceError::TooSmall);
    }
    let build = |prefix: &str, lengths: &[u32]| -> LabeledGraph {
        let mut vertices: Vec<VertexId> = (1..=n)
            .map(|i| VertexId::new(format!("{prefix}u{i}")))
            .collect();
        let mut edges: Vec<(EdgeId, VertexId, VertexId)> = Vec::new();
        for i in 1..=n {
            let a = vertices[(i + n - 2) % n].clone(); // u_{i-1}, u_0 = u_n
            let b = vertices[i - 1].clone();
            edges.push((EdgeId::new(format!("{prefix}c{i}")), a.clone(), b.clone()));
            // Parallel path of length lengths[i-1] + 1 from u_{i-1} to u_i.
            let mut prev = a;
            for j in 1..=lengths[i - 1] {
                let w = VertexId::new(format!("{prefix}p{i}_{j}"));
                vertices.push(w.clone());
                edges.push((EdgeId::new(format!("{prefix}p{i}e{j}")), prev, w.clone()));
                prev = w;
            }
            edges.push((
                EdgeId::new(format!("{prefix}p{i}e{}", lengths[i - 1] + 1)),
                prev,
                b,
            ));
        }
        LabeledGraph::new(vertices, edges).expect("subdivided construction is simple")
    };
    let g = build("g", pi);
    let identity: Vec<u32> = (1..=n as u32).collect();
    let h = build("h", &identity);
    let mut forward: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
    for (i, &p) in pi.iter().enumerate() {
        let i = i + 1;
        forward.insert(
            EdgeId::new(format!("gc{i}")),
            EdgeId::new(format!("hc{p}")),
        );
        // The g-path across edge i has length pi_i + 1, matching the h-path
        // across edge pi_i; map edges in path order.
        for j in 1..=p + 1 {
            forward.insert(
                EdgeId::new(format!("gp{i}e{j}")),
                EdgeId::new(format!("hp{p}e{j}")),
            );
        }
    }
    let phi = EdgeBijection::new(forward).expect("path lengths match");
    let inst = Instance::new(g, h, phi, k)?;
    Ok(doc_from_instance(
        &inst,
        Some(MetaDoc {
            generator: Some("subdivided".into()),
            seed: None,
            expected: None,
        }),
    ))
}

/// Seeded random 2-connected graph: a random Hamiltonian cycle plus
/// `chords` random chords.
pub fn random_two_connected(n: usize, chords: usize, seed: u64) -> LabeledGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(&mut rng);
    let vertices: Vec<VertexId> = (1..=n).map(|i| VertexId::new(format!("v{i}"))).collect();
    let mut edges: Vec<(EdgeId, VertexId, VertexId)> = Vec::new();
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..n {
        let a = order[i];
        let b = order[(i + 1) % n];
        used.insert((a.min(b), a.max(b)));
        edges.push((
            EdgeId::new(format!("e{}", edges.len() + 1)),
            vertices[a - 1].clone(),
            vertices[b - 1].clone(),
        ));
    }
    let mut placed = 0;
    let mut attempts = 0;
    while placed < chords && attempts < 100 {
        attempts += 1;
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if used.contains(&key) {
            continue;
        }
        used.insert(key);
        edges.push((
            EdgeId::new(format!("e{}", edges.len() + 1)),
            vertices[a - 1].clone(),
            vertices[b - 1].clone(),
        ));
        placed += 1;
    }
    LabeledGraph::new(vertices, edges).expect("hamiltonian cycle plus chords is simple")
}

/// Renames vertices randomly; returns the renamed graph and the map from
/// new names back to the originals.
pub fn relabel_randomly(
    g: &LabeledGraph,
    seed: u64,
) -> (LabeledGraph, BTreeMap<VertexId, VertexId>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let olds: Vec<VertexId> = g.vertices().cloned().collect();
    let mut fresh: Vec<VertexId> = (0..olds.len())
        .map(|i| VertexId::new(format!("r{i}")))
        .collect();
    fresh.shuffle(&mut rng);
    let to_new: BTreeMap<&VertexId, &VertexId> = olds.iter().zip(fresh.iter()).collect();
    let renamed = LabeledGraph::new(
        fresh.iter().cloned(),
        g.edges().map(|(id, (a, b))| {
            (
                id.clone(),
                (*to_new[a]).clone(),
                (*to_new[b]).clone(),
            )
        }),
    )
    .expect("renaming keeps the graph simple");
    let back: BTreeMap<VertexId, VertexId> = olds
        .into_iter()
        .zip(fresh)
        .map(|(old, new)| (new, old))
        .collect();
    (renamed, back)
}

/// Seeded random yes-instance: H is G after k random switches, with phi the
/// identity on edge ids. Rejection-samples until the graph has at least one
/// separating pair, so switches exist.
pub fn gen_random_yes(n: usize, k: u32, seed: u64) -> Result<InstanceDoc, InstanceError> {
    if n < 4 {
        return Err(InstanceError::TooSmall);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const TRIES: usize = 200;
    for attempt in 0..TRIES {
        let chords = rng.gen_range(0..=n / 3);
        let g = random_two_connected(n, chords, seed.wrapping_add(0x9e37 * attempt as u64 + 1));
        if g.find_two_separators()
            .map(|s| s.is_empty())
            .unwrap_or(true)
        {
            continue;
        }
        let mut h = g.clone();
        for _ in 0..k {
            let moves = enumerate_moves(&h).map_err(KernelError::from)?;
            if moves.is_empty() {
                break;
            }
            let mv = &moves[rng.gen_range(0..moves.len())];
            h = apply_switch(&h, mv).map_err(KernelError::from)?;
        }
        let phi = EdgeBijection::identity(&g.edge_ids());
        let inst = Instance::new(g, h, phi, k)?;
        return Ok(doc_from_instance(
            &inst,
            Some(MetaDoc {
                generator: Some("random".into()),
                seed: Some(seed),
                expected: Some("yes".into()),
            }),
        ));
    }
    Err(InstanceError::GenerationFailed(TRIES))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::solve;

    #[test]
    fn cycle_generator_examples() {
        // Identity permutation: phi-isomorphic, YES at k = 0.
        let doc = gen_cycle_instance(&[1, 2, 3, 4], 0).unwrap();
        let inst = instance_from_doc(&doc).unwrap();
        assert!(solve(&inst).unwrap().yes);
        assert_eq!(doc.meta.as_ref().unwrap().expected.as_deref(), Some("yes"));

        // The worked 6-cycle: YES at 2, NO at 1.
        let yes = gen_cycle_instance(&[3, 4, 1, 2, 5, 6], 2).unwrap();
        assert_eq!(yes.meta.as_ref().unwrap().expected.as_deref(), Some("yes"));
        assert!(solve(&instance_from_doc(&yes).unwrap()).unwrap().yes);
        let no = gen_cycle_instance(&[3, 4, 1, 2, 5, 6], 1).unwrap();
        assert_eq!(no.meta.as_ref().unwrap().expected.as_deref(), Some("no"));
        assert!(!solve(&instance_from_doc(&no).unwrap()).unwrap().yes);

        assert!(matches!(
            gen_cycle_instance(&[1, 2, 3], 0),
            Err(InstanceError::TooSmall)
        ));
    }

    #[test]
    fn subdivided_generator_shape() {
        let doc = gen_subdivided_instance(&[2, 1, 3, 4], 1).unwrap();
        let inst = instance_from_doc(&doc).unwrap();
        // Series-parallel: every large bag is a cycle torso.
        assert!(inst
            .dg
            .torso_kind
            .values()
            .all(|k| *k == crate::tutte::TorsoKind::Cycle));
        assert!(!inst.dg.w2.is_empty());

        // Identity permutation: YES at 0.
        let doc = gen_subdivided_instance(&[1, 2, 3, 4], 0).unwrap();
        assert!(solve(&instance_from_doc(&doc).unwrap()).unwrap().yes);
    }

    #[test]
    fn subdivided_solve_matches_reversal_distance() {
        let pi = [2u32, 1, 3, 4];
        let class = CircularPerm::unsigned(&pi).unwrap();
        let (d, _) =
            bfs_distance_circular(&class, &CircularPerm::signed_identity(4), None).unwrap();
        assert_eq!(d, 1);
        let at = |k: u32| {
            let doc = gen_subdivided_instance(&pi, k).unwrap();
            solve(&instance_from_doc(&doc).unwrap()).unwrap().yes
        };
        assert!(!at(0));
        assert!(at(1));
    }

    #[test]
    fn random_yes_generator() {
        let doc = gen_random_yes(6, 2, 11).unwrap();
        let inst = instance_from_doc(&doc).unwrap();
        assert!(solve(&inst).unwrap().yes);
        // k = 0 gives a phi-isomorphic pair.
        let doc = gen_random_yes(6, 0, 12).unwrap();
        let inst = instance_from_doc(&doc).unwrap();
        let out = solve(&inst).unwrap();
        assert!(out.yes && out.switches.unwrap().is_empty());
        // Fixed seed, identical bytes.
        assert_eq!(
            emit(&gen_random_yes(7, 2, 99).unwrap()),
            emit(&gen_random_yes(7, 2, 99).unwrap())
        );
    }

    #[test]
    fn round_trips() {
        for doc in [
            gen_cycle_instance(&[3, 4, 1, 2, 5, 6], 2).unwrap(),
            gen_subdivided_instance(&[2, 1, 3, 4], 1).unwrap(),
            gen_random_yes(6, 1, 5).unwrap(),
        ] {
            let text = emit(&doc);
            let parsed = parse(&text).unwrap();
            assert_eq!(parsed, doc);
            assert_eq!(emit(&parsed), text);
            instance_from_doc(&parsed).unwrap();
        }
    }

    #[test]
    fn parse_rejects_broken_phi() {
        let mut doc = gen_cycle_instance(&[1, 2, 3, 4], 0).unwrap();
        // Drop one mapping: no longer a bijection onto E(H).
        let key = doc.phi.keys().next().unwrap().clone();
        doc.phi.remove(&key);
        match instance_from_doc(&doc) {
            Err(InstanceError::Validation { field, message }) => {
                assert_eq!(field, "phi");
                assert!(message.contains("bijective"), "message: {message}");
            }
            other => panic!("expected phi validation error, got {other:?}"),
        }

        // Remap two edges so a triangle's image is a star: cycle
        // preservation fails.
        let g = crate::graph::complete_graph(&["a", "b", "c", "d"]);
        let mut forward: BTreeMap<EdgeId, EdgeId> = g
            .edge_ids()
            .iter()
            .map(|e| (e.clone(), e.clone()))
            .collect();
        forward.insert(EdgeId::new("b-c"), EdgeId::new("a-c"));
        forward.insert(EdgeId::new("a-c"), EdgeId::new("a-d"));
        forward.insert(EdgeId::new("a-d"), EdgeId::new("b-c"));
        let doc = InstanceDoc {
            format: FORMAT_VERSION.into(),
            g: graph_doc(&g),
            h: graph_doc(&g),
            phi: forward
                .iter()
                .map(|(a, b)| (a.as_str().into(), b.as_str().into()))
                .collect(),
            k: 0,
            meta: None,
        };
        match instance_from_doc(&doc) {
            Err(InstanceError::Validation { field, message }) => {
                assert_eq!(field, "phi");
                assert!(message.contains("2-isomorphism"), "message: {message}");
            }
            other => panic!("expected 2-isomorphism rejection, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_non_two_connected() {
        let doc = InstanceDoc {
            format: FORMAT_VERSION.into(),
            g: GraphDoc {
                vertices: vec!["a".into(), "b".into(), "c".into()],
                edges: vec![
                    EdgeDoc {
                        id: "e1".into(),
                        u: "a".into(),
                        v: "b".into(),
                    },
                    EdgeDoc {
                        id: "e2".into(),
                        u: "b".into(),
                        v: "c".into(),
                    },
                ],
            },
            h: GraphDoc {
                vertices: vec![],
                edges: vec![],
            },
            phi: BTreeMap::new(),
            k: 0,
            meta: None,
        };
        assert!(matches!(
            instance_from_doc(&doc),
            Err(InstanceError::Validation { .. })
        ));
    }
}
