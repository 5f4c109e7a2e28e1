//! Partially signed linear and circular permutations, reversal operations,
//! signed strips, and an exact breadth-first reversal-distance oracle.
//!
//! A reversal flips an interval and negates the signs inside it; zero signs
//! stay zero. Circular permutations are equivalence classes under rotation
//! and sign-negating reflection, represented by their lexicographically
//! least member (sign order: minus < zero < plus).

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// State-space cap for the exhaustive distance oracle.
pub const BFS_CAP: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Zero,
    Plus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Zero => Sign::Zero,
            Sign::Plus => Sign::Minus,
        }
    }

    /// Zero agrees with anything; nonzero signs must match.
    pub fn agrees(self, other: Sign) -> bool {
        self == Sign::Zero || self == other
    }
}

pub type Elem = (u32, Sign);

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ReversalError {
    #[error("values are not a permutation of 1..=n")]
    NotPermutation,
    #[error("reversal indices ({i},{j}) out of range for n={n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("{n} elements exceeds the BFS oracle cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("values are not in circular identity order")]
    NotOrdered,
}

/// A partially signed linear permutation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearPerm {
    elems: Vec<Elem>,
}

impl LinearPerm {
    pub fn new(elems: Vec<Elem>) -> Result<Self, ReversalError> {
        let n = elems.len();
        let mut seen = vec![false; n];
        for (v, _) in &elems {
            let v = *v as usize;
            if v < 1 || v > n || seen[v - 1] {
                return Err(ReversalError::NotPermutation);
            }
            seen[v - 1] = true;
        }
        Ok(LinearPerm { elems })
    }

    pub fn unsigned(values: &[u32]) -> Result<Self, ReversalError> {
        Self::new(values.iter().map(|&v| (v, Sign::Zero)).collect())
    }

    /// The signed identity (1,+)(2,+)...(n,+).
    pub fn signed_identity(n: usize) -> Self {
        LinearPerm {
            elems: (1..=n as u32).map(|v| (v, Sign::Plus)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn values(&self) -> Vec<u32> {
        self.elems.iter().map(|(v, _)| *v).collect()
    }

    /// Reversal on positions i..=j (1-based): order flipped, signs negated.
    pub fn reverse(&self, i: usize, j: usize) -> Result<LinearPerm, ReversalError> {
        let n = self.elems.len();
        if i < 1 || j < i || j > n {
            return Err(ReversalError::IndexOutOfRange { i, j, n });
        }
        let mut elems = self.elems.clone();
        elems[i - 1..j].reverse();
        for e in &mut elems[i - 1..j] {
            e.1 = e.1.flip();
        }
        Ok(LinearPerm { elems })
    }

    /// Reflection: reversed order with every sign negated.
    pub fn negate(&self) -> LinearPerm {
        LinearPerm {
            elems: self.elems.iter().rev().map(|&(v, s)| (v, s.flip())).collect(),
        }
    }

    /// Rotation by h: element at position 1 becomes the old position 1+h
    /// (indices mod n).
    pub fn rotate(&self, h: i64) -> LinearPerm {
        let n = self.elems.len() as i64;
        let shift = h.rem_euclid(n) as usize;
        let mut elems = self.elems.clone();
        elems.rotate_left(shift);
        LinearPerm { elems }
    }

    /// True iff values match and every nonzero sign of `self` matches.
    pub fn agrees_in_signs(&self, signed: &LinearPerm) -> bool {
        self.elems.len() == signed.elems.len()
            && self
                .elems
                .iter()
                .zip(&signed.elems)
                .all(|((v, s), (w, t))| v == w && s.agrees(*t))
    }
}

/// A partially signed circular permutation: the class of a linear
/// permutation under rotations and sign-negating reflections, stored as the
/// lexicographically least member.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CircularPerm {
    canonical: LinearPerm,
}

impl CircularPerm {
    pub fn new(lin: LinearPerm) -> Self {
        let canonical = class_members(&lin)
            .into_iter()
            .min()
            .expect("class is nonempty");
        CircularPerm { canonical }
    }

    pub fn unsigned(values: &[u32]) -> Result<Self, ReversalError> {
        Ok(Self::new(LinearPerm::unsigned(values)?))
    }

    pub fn signed_identity(n: usize) -> Self {
        Self::new(LinearPerm::signed_identity(n))
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    pub fn canonical(&self) -> &LinearPerm {
        &self.canonical
    }

    /// All 2n rotations and reflections of the canonical member.
    pub fn representatives(&self) -> Vec<LinearPerm> {
        class_members(&self.canonical)
    }

    pub fn contains(&self, lin: &LinearPerm) -> bool {
        CircularPerm::new(lin.clone()).canonical == self.canonical
    }

    /// Circular reversal on the canonical representative. For i <= j this is
    /// the linear reversal; for i > j the reversed part wraps around the end.
    pub fn reverse(&self, i: usize, j: usize) -> Result<CircularPerm, ReversalError> {
        let n = self.canonical.len();
        if i < 1 || i > n || j < 1 || j > n {
            return Err(ReversalError::IndexOutOfRange { i, j, n });
        }
        if i <= j {
            return Ok(CircularPerm::new(self.canonical.reverse(i, j)?));
        }
        let elems = self.canonical.elems();
        let mut out: Vec<Elem> = Vec::with_capacity(n);
        // (pi_n~ .. pi_i~, pi_{j+1} .. pi_{i-1}, pi_j~ .. pi_1~)
        for idx in (i..=n).rev() {
            let (v, s) = elems[idx - 1];
            out.push((v, s.flip()));
        }
        for idx in j + 1..i {
            out.push(elems[idx - 1]);
        }
        for idx in (1..=j).rev() {
            let (v, s) = elems[idx - 1];
            out.push((v, s.flip()));
        }
        Ok(CircularPerm::new(LinearPerm { elems: out }))
    }

    /// True iff some member of the class agrees in signs with some member of
    /// the signed class `target`.
    pub fn agrees_in_signs(&self, target: &CircularPerm) -> bool {
        if self.len() != target.len() {
            return false;
        }
        let targets: HashMap<Vec<u32>, Vec<LinearPerm>> = {
            let mut m: HashMap<Vec<u32>, Vec<LinearPerm>> = HashMap::new();
            for rep in target.representatives() {
                m.entry(rep.values()).or_default().push(rep);
            }
            m
        };
        for rep in self.representatives() {
            if let Some(cands) = targets.get(&rep.values()) {
                if cands.iter().any(|t| rep.agrees_in_signs(t)) {
                    return true;
                }
            }
        }
        false
    }
}

fn class_members(lin: &LinearPerm) -> Vec<LinearPerm> {
    let n = lin.len();
    let mut out = Vec::with_capacity(2 * n);
    let reflected = lin.negate();
    for h in 0..n {
        out.push(lin.rotate(h as i64));
        out.push(reflected.rotate(h as i64));
    }
    out
}

/// A maximal signed block: consecutive values, monotone, ascending blocks
/// carry signs in {0,+}, descending blocks signs in {0,-}. `start` is the
/// 0-based position in the (canonical) representative; circular strips may
/// wrap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strip {
    pub start: usize,
    pub elems: Vec<Elem>,
}

impl Strip {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn values(&self) -> Vec<u32> {
        self.elems.iter().map(|(v, _)| *v).collect()
    }
}

fn is_signed_block(elems: &[Elem]) -> bool {
    if elems.len() <= 1 {
        return true;
    }
    let ascending = elems[1].0 > elems[0].0;
    for w in elems.windows(2) {
        let (a, b) = (w[0].0 as i64, w[1].0 as i64);
        if (b - a).abs() != 1 || (b > a) != ascending {
            return false;
        }
    }
    let ok = |s: Sign| {
        if ascending {
            s != Sign::Minus
        } else {
            s != Sign::Plus
        }
    };
    elems.iter().all(|&(_, s)| ok(s))
}

/// Maximal signed blocks of a linear permutation; they partition positions.
pub fn find_strips_linear(p: &LinearPerm) -> Vec<Strip> {
    let elems = p.elems();
    let mut out = Vec::new();
    let mut start = 0;
    while start < elems.len() {
        let mut end = start + 1;
        while end < elems.len() && is_signed_block(&elems[start..=end]) {
            end += 1;
        }
        out.push(Strip {
            start,
            elems: elems[start..end].to_vec(),
        });
        start = end;
    }
    out
}

/// Inclusion-maximal signed blocks over all circular intervals of the
/// canonical representative (intervals may wrap).
pub fn find_strips_circular(p: &CircularPerm) -> Vec<Strip> {
    let elems = p.canonical().elems();
    let n = elems.len();
    let interval = |start: usize, len: usize| -> Vec<Elem> {
        (0..len).map(|k| elems[(start + k) % n]).collect()
    };
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        for len in 1..=n {
            if is_signed_block(&interval(start, len)) {
                blocks.push((start, len));
            }
        }
    }
    let positions = |(start, len): (usize, usize)| -> HashSet<usize> {
        (0..len).map(|k| (start + k) % n).collect()
    };
    let mut maximal: Vec<(usize, usize)> = Vec::new();
    'outer: for b in &blocks {
        let pb = positions(*b);
        for other in &blocks {
            if other == b {
                continue;
            }
            let po = positions(*other);
            if pb.is_subset(&po) && pb.len() < po.len() {
                continue 'outer;
            }
        }
        if !maximal.iter().any(|m| positions(*m) == pb) {
            maximal.push(*b);
        }
    }
    maximal.sort();
    maximal
        .into_iter()
        .map(|(start, len)| Strip {
            start,
            elems: interval(start, len),
        })
        .collect()
}

/// Restricts which reversals the BFS may use; positions are 1-based on the
/// state's (canonical) representative.
pub type MoveFilter<'a, S> = &'a dyn Fn(&S, usize, usize) -> bool;

fn reconstruct<S: Clone>(
    arena: &[(S, usize, (usize, usize))],
    mut idx: usize,
) -> Vec<(usize, usize)> {
    let mut ops = Vec::new();
    while idx != usize::MAX {
        let (_, parent, op) = &arena[idx];
        ops.push(*op);
        idx = *parent;
    }
    ops.pop(); // root sentinel
    ops.reverse();
    ops
}

/// Exact linear reversal distance to a partially signed goal: the target's
/// zero signs are wildcards in the "agrees in signs" sense. Returns the
/// distance and one optimal reversal sequence.
pub fn bfs_distance_linear(
    start: &LinearPerm,
    target: &LinearPerm,
    filter: Option<MoveFilter<'_, LinearPerm>>,
) -> Result<(usize, Vec<(usize, usize)>), ReversalError> {
    let n = start.len();
    if n > BFS_CAP {
        return Err(ReversalError::TooLarge { n, cap: BFS_CAP });
    }
    let goal = |p: &LinearPerm| p.agrees_in_signs(target);
    if goal(start) {
        return Ok((0, Vec::new()));
    }
    let mut arena: Vec<(LinearPerm, usize, (usize, usize))> =
        vec![(start.clone(), usize::MAX, (0, 0))];
    let mut seen: HashSet<LinearPerm> = [start.clone()].into_iter().collect();
    let mut queue: VecDeque<(usize, usize)> = [(0usize, 0usize)].into_iter().collect();
    while let Some((idx, depth)) = queue.pop_front() {
        let state = arena[idx].0.clone();
        for i in 1..=n {
            for j in i..=n {
                if let Some(f) = filter {
                    if !f(&state, i, j) {
                        continue;
                    }
                }
                let next = state.reverse(i, j)?;
                if seen.contains(&next) {
                    continue;
                }
                arena.push((next.clone(), idx, (i, j)));
                let nidx = arena.len() - 1;
                if goal(&next) {
                    return Ok((depth + 1, reconstruct(&arena, nidx)));
                }
                seen.insert(next);
                queue.push_back((nidx, depth + 1));
            }
        }
    }
    unreachable!("every permutation is sortable by reversals")
}

/// Exact circular reversal distance; goal states are classes agreeing in
/// signs with the target class. Witness moves are indexed against each
/// intermediate state's canonical representative.
pub fn bfs_distance_circular(
    start: &CircularPerm,
    target: &CircularPerm,
    filter: Option<MoveFilter<'_, CircularPerm>>,
) -> Result<(usize, Vec<(usize, usize)>), ReversalError> {
    let n = start.len();
    if n > BFS_CAP {
        return Err(ReversalError::TooLarge { n, cap: BFS_CAP });
    }
    let goal = |p: &CircularPerm| p.agrees_in_signs(target);
    if goal(start) {
        return Ok((0, Vec::new()));
    }
    let mut arena: Vec<(CircularPerm, usize, (usize, usize))> =
        vec![(start.clone(), usize::MAX, (0, 0))];
    let mut seen: HashSet<CircularPerm> = [start.clone()].into_iter().collect();
    let mut queue: VecDeque<(usize, usize)> = [(0usize, 0usize)].into_iter().collect();
    while let Some((idx, depth)) = queue.pop_front() {
        let state = arena[idx].0.clone();
        for i in 1..=n {
            for j in 1..=n {
                if let Some(f) = filter {
                    if !f(&state, i, j) {
                        continue;
                    }
                }
                let next = state.reverse(i, j)?;
                if seen.contains(&next) {
                    continue;
                }
                arena.push((next.clone(), idx, (i, j)));
                let nidx = arena.len() - 1;
                if goal(&next) {
                    return Ok((depth + 1, reconstruct(&arena, nidx)));
                }
                seen.insert(next);
                queue.push_back((nidx, depth + 1));
            }
        }
    }
    unreachable!("every circular permutation is sortable by reversals")
}

/// For a circular permutation whose values are already in circular identity
/// order, sorting needs exactly one trivial reversal per negative sign.
/// Returns the ascending representative and the trivial reversals (i,i) at
/// its negative positions; applied to that representative in order they
/// produce a member of the signed identity class.
pub fn sort_ordered_signed(
    p: &CircularPerm,
) -> Result<(LinearPerm, Vec<(usize, usize)>), ReversalError> {
    let n = p.len();
    let ascending: Vec<u32> = (1..=n as u32).collect();
    let ordered = p
        .representatives()
        .into_iter()
        .find(|rep| rep.values() == ascending)
        .ok_or(ReversalError::NotOrdered)?;
    let ops: Vec<(usize, usize)> = ordered
        .elems()
        .iter()
        .enumerate()
        .filter(|(_, (_, s))| *s == Sign::Minus)
        .map(|(idx, _)| (idx + 1, idx + 1))
        .collect();
    Ok((ordered, ops))
}

/// Positions (0-based) of a value set in a representative.
pub fn value_positions(rep: &LinearPerm, values: &HashSet<u32>) -> HashSet<usize> {
    rep.elems()
        .iter()
        .enumerate()
        .filter(|(_, (v, _))| values.contains(v))
        .map(|(i, _)| i)
        .collect()
}

/// True iff the linear reversal (i,j) cuts the position set: the reversed
/// window contains some of the positions but not all of them.
pub fn reversal_cuts_linear(positions: &HashSet<usize>, i: usize, j: usize) -> bool {
    let window: HashSet<usize> = (i - 1..j).collect();
    let inside = positions.intersection(&window).count();
    inside > 0 && inside < positions.len()
}

/// Circular variant: for i > j the reversed part wraps around the end.
pub fn reversal_cuts_circular(positions: &HashSet<usize>, i: usize, j: usize, n: usize) -> bool {
    let window: HashSet<usize> = if i <= j {
        (i - 1..j).collect()
    } else {
        (i - 1..n).chain(0..j).collect()
    };
    let inside = positions.intersection(&window).count();
    inside > 0 && inside < positions.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lin(values: &[u32]) -> LinearPerm {
        LinearPerm::unsigned(values).unwrap()
    }

    fn circ(values: &[u32]) -> CircularPerm {
        CircularPerm::unsigned(values).unwrap()
    }

    #[test]
    fn linear_reversals() {
        assert_eq!(lin(&[3, 4, 1, 2]).reverse(1, 4).unwrap(), lin(&[2, 1, 4, 3]));
        assert_eq!(lin(&[3, 4, 1, 2]).reverse(1, 3).unwrap(), lin(&[1, 4, 3, 2]));
        let p = LinearPerm::new(vec![
            (1, Sign::Plus),
            (3, Sign::Plus),
            (2, Sign::Plus),
            (4, Sign::Plus),
        ])
        .unwrap();
        let q = p.reverse(2, 3).unwrap();
        assert_eq!(
            q.elems(),
            &[
                (1, Sign::Plus),
                (2, Sign::Minus),
                (3, Sign::Minus),
                (4, Sign::Plus)
            ]
        );
    }

    #[test]
    fn circular_reversal_cases() {
        // Trivial reversal on unsigned elements fixes the class.
        let p = circ(&[3, 1, 2, 4]);
        assert_eq!(p.reverse(2, 2).unwrap(), p);

        // One reversal realizes the worked first step
        // (3,4,1,2,5,6) -> (1,4,3,2,5,6) at the class level.
        let from = circ(&[3, 4, 1, 2, 5, 6]);
        let to = circ(&[1, 4, 3, 2, 5, 6]);
        let n = from.len();
        let mut hit = false;
        for i in 1..=n {
            for j in 1..=n {
                if from.reverse(i, j).unwrap() == to {
                    hit = true;
                }
            }
        }
        assert!(hit, "no single circular reversal realizes the first step");

        // Wraparound formula on the identity.
        let id = circ(&[1, 2, 3, 4, 5, 6]);
        let wrapped = id.reverse(6, 1).unwrap();
        let expect = LinearPerm::unsigned(&[6, 2, 3, 4, 5, 1]).unwrap();
        assert!(wrapped.contains(&expect));
    }

    #[test]
    fn representative_closure() {
        let p = circ(&[1, 2, 3]);
        let reps = p.representatives();
        assert_eq!(reps.len(), 6);
        assert!(reps.contains(p.canonical()));
        for rep in reps {
            assert_eq!(CircularPerm::new(rep), p);
        }
    }

    #[test]
    fn bfs_reproduces_worked_examples() {
        let (d, ops) = bfs_distance_linear(
            &lin(&[3, 4, 1, 2]),
            &LinearPerm::signed_identity(4),
            None,
        )
        .unwrap();
        assert_eq!(d, 2);
        assert_eq!(ops.len(), 2);

        let (d, _) = bfs_distance_circular(
            &circ(&[3, 4, 1, 2, 5, 6]),
            &CircularPerm::signed_identity(6),
            None,
        )
        .unwrap();
        assert_eq!(d, 2);

        let (d, ops) = bfs_distance_linear(
            &LinearPerm::signed_identity(4),
            &LinearPerm::signed_identity(4),
            None,
        )
        .unwrap();
        assert_eq!((d, ops.len()), (0, 0));
    }

    #[test]
    fn bfs_witness_replays() {
        let start = lin(&[3, 4, 1, 2]);
        let target = LinearPerm::signed_identity(4);
        let (d, ops) = bfs_distance_linear(&start, &target, None).unwrap();
        let mut cur = start;
        for (i, j) in ops {
            cur = cur.reverse(i, j).unwrap();
        }
        assert!(cur.agrees_in_signs(&target));
        assert_eq!(d, 2);

        let start = circ(&[3, 4, 1, 2, 5, 6]);
        let target = CircularPerm::signed_identity(6);
        let (_, ops) = bfs_distance_circular(&start, &target, None).unwrap();
        let mut cur = start;
        for (i, j) in ops {
            cur = cur.reverse(i, j).unwrap();
        }
        assert!(cur.agrees_in_signs(&target));
    }

    #[test]
    fn strips_examples() {
        let strips = find_strips_linear(&lin(&[3, 4, 1, 2]));
        let values: Vec<Vec<u32>> = strips.iter().map(|s| s.values()).collect();
        assert_eq!(values, vec![vec![3, 4], vec![1, 2]]);

        let id = CircularPerm::signed_identity(5);
        let strips = find_strips_circular(&id);
        assert_eq!(strips.len(), 1);
        assert_eq!(strips[0].len(), 5);

        let p = LinearPerm::new(vec![(1, Sign::Plus), (2, Sign::Minus)]).unwrap();
        let strips = find_strips_linear(&p);
        assert_eq!(strips.len(), 2);
    }

    #[test]
    fn ordered_signed_sorting() {
        let all_plus = CircularPerm::signed_identity(4);
        let (_, ops) = sort_ordered_signed(&all_plus).unwrap();
        assert!(ops.is_empty());

        let p = CircularPerm::new(
            LinearPerm::new(vec![
                (1, Sign::Minus),
                (2, Sign::Plus),
                (3, Sign::Plus),
                (4, Sign::Minus),
            ])
            .unwrap(),
        );
        let (ordered, ops) = sort_ordered_signed(&p).unwrap();
        assert_eq!(ops.len(), 2);
        let mut cur = ordered;
        for (i, j) in &ops {
            cur = cur.reverse(*i, *j).unwrap();
        }
        assert!(CircularPerm::new(cur).agrees_in_signs(&CircularPerm::signed_identity(4)));
        let (d, _) =
            bfs_distance_circular(&p, &CircularPerm::signed_identity(4), None).unwrap();
        assert_eq!(d, 2);

        // All negatives, n = 5: five trivial reversals, BFS agrees.
        let p = CircularPerm::new(
            LinearPerm::new((1..=5).map(|v| (v, Sign::Minus)).collect()).unwrap(),
        );
        let (_, ops) = sort_ordered_signed(&p).unwrap();
        assert_eq!(ops.len(), 5);
        let (d, _) =
            bfs_distance_circular(&p, &CircularPerm::signed_identity(5), None).unwrap();
        assert_eq!(d, 5);

        assert_eq!(
            sort_ordered_signed(&circ(&[2, 1, 3, 4])).unwrap_err(),
            ReversalError::NotOrdered
        );
    }

    fn arb_perm(max_n: usize) -> impl Strategy<Value = LinearPerm> {
        (2..=max_n)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec(0..3u8, n),
                    proptest::collection::vec(proptest::num::u64::ANY, n),
                )
            })
            .prop_map(|(n, signs, keys)| {
                let mut values: Vec<u32> = (1..=n as u32).collect();
                // Sort by random keys for a uniform-ish shuffle.
                let mut pairs: Vec<(u64, u32)> =
                    keys.into_iter().zip(values.drain(..)).collect();
                pairs.sort();
                let elems = pairs
                    .into_iter()
                    .zip(signs)
                    .map(|((_, v), s)| {
                        let s = match s {
                            0 => Sign::Minus,
                            1 => Sign::Zero,
                            _ => Sign::Plus,
                        };
                        (v, s)
                    })
                    .collect();
                LinearPerm::new(elems).unwrap()
            })
    }

    proptest! {
        #[test]
        fn reversal_involution(p in arb_perm(7), i in 1usize..=7, j in 1usize..=7) {
            let n = p.len();
            let (i, j) = (i.min(n), j.min(n));
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            prop_assert_eq!(p.reverse(i, j).unwrap().reverse(i, j).unwrap(), p);
        }

        #[test]
        fn canonical_is_fixed_point(p in arb_perm(6)) {
            let c = CircularPerm::new(p);
            prop_assert_eq!(CircularPerm::new(c.canonical().clone()), c);
        }

        #[test]
        fn strips_partition_positions(p in arb_perm(7)) {
            let strips = find_strips_linear(&p);
            let total: usize = strips.iter().map(|s| s.len()).sum();
            prop_assert_eq!(total, p.len());
            let mut pos = 0;
            for s in strips {
                prop_assert_eq!(s.start, pos);
                pos += s.len();
            }
        }
    }
}
