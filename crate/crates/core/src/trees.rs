//! Planar reduced trees and arity-constrained enumeration.
//!
//! A planar reduced tree is a rooted planar tree whose internal vertices
//! all have at least two children. We store a tree as its preorder arity
//! sequence: every internal vertex contributes its arity, every leaf
//! contributes `0`. The sequence `[3, 0, 2, 0, 0, 0]` is the 3-ary root
//! whose middle child is a binary vertex. The empty sequence denotes the
//! empty tree, which has no leaves at all and only ever shows up in the
//! unital constructions.
//!
//! Invariants maintained here:
//!
//! * every [`PlanarTree`] holds a valid prefix sequence: reading left to
//!   right, the number of open child slots reaches zero exactly at the
//!   end, and no entry equals 1;
//! * [`enumerate`] returns trees of a fixed leaf count in strictly
//!   increasing code order, with no duplicates;
//! * membership of a tree in an arity set is decided by scanning its
//!   code, so enumeration and membership can be cross-checked cheaply.
//!
//! The degree of a tree is its number of leaves. Enumeration is a dynamic
//! program over degrees: a tree with `n >= 2` leaves decomposes uniquely
//! as a root arity `k` together with an ordered list of `k` subtrees whose
//! degrees sum to `n`.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde_json::Value;
use thiserror::Error;

/// Errors raised by tree construction and arity-set parsing.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    /// The arity sequence does not close exactly at its end.
    #[error("arity sequence is not a valid preorder code")]
    MalformedCode,
    /// Reduced trees have no unary vertices.
    #[error("arity 1 vertices are not allowed in reduced trees")]
    UnaryVertex,
    /// Grafting and arity sets only make sense for arities at least 2.
    #[error("arity must be at least 2, got {0}")]
    ArityTooSmall(u32),
    /// An operation that requires a nonempty tree received the empty one.
    #[error("the empty tree is not allowed here")]
    EmptyTree,
    /// Wrong number of arguments for the requested operation.
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    /// Odd arity ranges must start at an odd bound.
    #[error("an odd arity range must start at an odd integer >= 3, got {0}")]
    BadOddBound(u32),
    /// A pair of arity sets violated a required containment.
    #[error("arity set {0} is not contained in {1}")]
    NotSubset(String, String),
    /// Text that could not be read as the expected object.
    #[error("cannot parse {input:?} as {expected}")]
    Parse { input: String, expected: &'static str },
}

fn parse_err(input: impl Into<String>, expected: &'static str) -> TreeError {
    TreeError::Parse {
        input: input.into(),
        expected,
    }
}

/// A planar reduced tree, stored as its preorder arity sequence.
///
/// Ordering is lexicographic on the code; within a fixed degree this is
/// the canonical order used everywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PlanarTree {
    code: Vec<u32>,
}

impl PlanarTree {
    /// The empty tree: no vertices, no leaves, degree 0.
    pub fn empty() -> Self {
        PlanarTree { code: Vec::new() }
    }

    /// The single leaf, degree 1.
    pub fn leaf() -> Self {
        PlanarTree { code: vec![0] }
    }

    /// Validate an arity sequence and wrap it.
    ///
    /// The empty sequence is accepted and yields the empty tree.
    pub fn from_code(code: Vec<u32>) -> Result<Self, TreeError> {
        Self::check_code(&code)?;
        Ok(PlanarTree { code })
    }

    fn check_code(code: &[u32]) -> Result<(), TreeError> {
        if code.is_empty() {
            return Ok(());
        }
        let mut open: usize = 1;
        for &a in code {
            if open == 0 {
                return Err(TreeError::MalformedCode);
            }
            if a == 1 {
                return Err(TreeError::UnaryVertex);
            }
            open = open - 1 + a as usize;
        }
        if open != 0 {
            return Err(TreeError::MalformedCode);
        }
        Ok(())
    }

    /// Internal constructor for codes known to be valid.
    fn from_code_unchecked(code: Vec<u32>) -> Self {
        debug_assert!(Self::check_code(&code).is_ok());
        PlanarTree { code }
    }

    /// The preorder arity sequence.
    pub fn code(&self) -> &[u32] {
        &self.code
    }

    /// Number of leaves. The empty tree has degree 0.
    pub fn degree(&self) -> usize {
        if self.code.is_empty() {
            0
        } else {
            self.code.iter().filter(|&&a| a == 0).count()
        }
    }

    /// Number of internal vertices.
    pub fn vertex_count(&self) -> usize {
        self.code.iter().filter(|&&a| a != 0).count()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn is_leaf(&self) -> bool {
        self.code == [0]
    }

    /// Arity of the root vertex; `None` for the empty tree and the leaf.
    pub fn root_arity(&self) -> Option<u32> {
        match self.code.first() {
            None | Some(0) => None,
            Some(&a) => Some(a),
        }
    }

    /// Iterator over the arities of all internal vertices, in preorder.
    pub fn arities(&self) -> impl Iterator<Item = u32> + '_ {
        self.code.iter().copied().filter(|&a| a != 0)
    }

    /// Graft `children` under a new root of arity `k`.
    ///
    /// Requires `k >= 2`, exactly `k` children, and no empty child.
    pub fn graft(k: u32, children: &[PlanarTree]) -> Result<Self, TreeError> {
        if k < 2 {
            return Err(TreeError::ArityTooSmall(k));
        }
        if children.len() != k as usize {
            return Err(TreeError::ArityMismatch {
                expected: k as usize,
                got: children.len(),
            });
        }
        if children.iter().any(|c| c.is_empty()) {
            return Err(TreeError::EmptyTree);
        }
        let mut code = Vec::with_capacity(1 + children.iter().map(|c| c.code.len()).sum::<usize>());
        code.push(k);
        for c in children {
            code.extend_from_slice(&c.code);
        }
        Ok(PlanarTree::from_code_unchecked(code))
    }

    /// Split off the root vertex: its arity and the ordered list of branches.
    ///
    /// Returns `None` for the empty tree and the leaf, which have no root
    /// vertex to remove.
    pub fn root_split(&self) -> Option<(u32, Vec<PlanarTree>)> {
        let k = self.root_arity()?;
        let mut branches = Vec::with_capacity(k as usize);
        let mut pos = 1;
        for _ in 0..k {
            let end = subtree_end(&self.code, pos);
            branches.push(PlanarTree::from_code_unchecked(self.code[pos..end].to_vec()));
            pos = end;
        }
        debug_assert_eq!(pos, self.code.len());
        Some((k, branches))
    }

    /// Partial inverse of grafting: the branches if the root has arity
    /// exactly `m`, otherwise `None` (the co-operation takes the value 0).
    pub fn ungraft(&self, m: u32) -> Option<Vec<PlanarTree>> {
        match self.root_split() {
            Some((k, branches)) if k == m => Some(branches),
            _ => None,
        }
    }

    /// Substitute one tree per leaf, left to right.
    ///
    /// This is operadic composition: the `i`-th argument replaces the
    /// `i`-th leaf. Requires as many arguments as leaves and no empty
    /// argument, and the receiver must not be empty.
    pub fn plug(&self, args: &[PlanarTree]) -> Result<Self, TreeError> {
        if self.is_empty() {
            return Err(TreeError::EmptyTree);
        }
        if args.len() != self.degree() {
            return Err(TreeError::ArityMismatch {
                expected: self.degree(),
                got: args.len(),
            });
        }
        if args.iter().any(|a| a.is_empty()) {
            return Err(TreeError::EmptyTree);
        }
        let extra: usize = args.iter().map(|a| a.code.len()).sum();
        let mut code = Vec::with_capacity(self.code.len() - args.len() + extra);
        let mut next = args.iter();
        for &a in &self.code {
            if a == 0 {
                code.extend_from_slice(&next.next().expect("one argument per leaf").code);
            } else {
                code.push(a);
            }
        }
        Ok(PlanarTree::from_code_unchecked(code))
    }

    /// Nested-array encoding: a leaf is `[]`, an internal vertex is the
    /// array of its children, the empty tree is `null`.
    pub fn to_json(&self) -> Value {
        if self.is_empty() {
            return Value::Null;
        }
        fn build(code: &[u32], pos: &mut usize) -> Value {
            let a = code[*pos];
            *pos += 1;
            let mut children = Vec::with_capacity(a as usize);
            for _ in 0..a {
                children.push(build(code, pos));
            }
            Value::Array(children)
        }
        let mut pos = 0;
        let v = build(&self.code, &mut pos);
        debug_assert_eq!(pos, self.code.len());
        v
    }

    /// Inverse of [`PlanarTree::to_json`].
    pub fn from_json(v: &Value) -> Result<Self, TreeError> {
        match v {
            Value::Null => Ok(PlanarTree::empty()),
            Value::Array(children) => {
                if children.is_empty() {
                    return Ok(PlanarTree::leaf());
                }
                if children.len() == 1 {
                    return Err(TreeError::UnaryVertex);
                }
                let parts = children
                    .iter()
                    .map(PlanarTree::from_json)
                    .collect::<Result<Vec<_>, _>>()?;
                if parts.iter().any(|p| p.is_empty()) {
                    return Err(TreeError::EmptyTree);
                }
                PlanarTree::graft(children.len() as u32, &parts)
            }
            other => Err(parse_err(other.to_string(), "tree")),
        }
    }
}

/// End index (exclusive) of the subtree starting at `start`.
fn subtree_end(code: &[u32], start: usize) -> usize {
    let mut open = 1usize;
    let mut pos = start;
    while open > 0 {
        open = open - 1 + code[pos] as usize;
        pos += 1;
    }
    pos
}

impl fmt::Display for PlanarTree {
    /// Comma-separated arity sequence, e.g. `2,0,0`; empty string for the
    /// empty tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for a in &self.code {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for PlanarTree {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, TreeError> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(PlanarTree::empty());
        }
        let code = s
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| parse_err(s, "tree code")))
            .collect::<Result<Vec<_>, _>>()?;
        PlanarTree::from_code(code)
    }
}

/// A set of allowed vertex arities, every member at least 2.
///
/// Besides finite sets, the two infinite families needed in practice are
/// representable exactly: all arities from some bound up, and all odd
/// arities from some odd bound up. Infinite sets are only ever consumed
/// through [`AritySpec::materialize`], which cuts them at a degree bound.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AritySpec {
    /// An explicit finite set; possibly empty.
    Finite(BTreeSet<u32>),
    /// Every arity `>= min`.
    From(u32),
    /// Every odd arity `>= min`, with `min` odd.
    OddFrom(u32),
}

impl AritySpec {
    /// Finite set from any iterator; rejects entries below 2.
    pub fn finite<I: IntoIterator<Item = u32>>(arities: I) -> Result<Self, TreeError> {
        let set: BTreeSet<u32> = arities.into_iter().collect();
        if let Some(&a) = set.iter().next() {
            if a < 2 {
                return Err(TreeError::ArityTooSmall(a));
            }
        }
        Ok(AritySpec::Finite(set))
    }

    /// The empty arity set.
    pub fn none() -> Self {
        AritySpec::Finite(BTreeSet::new())
    }

    /// Every arity from 2 up.
    pub fn all() -> Self {
        AritySpec::From(2)
    }

    /// Every arity from `min` up.
    pub fn from_min(min: u32) -> Result<Self, TreeError> {
        if min < 2 {
            return Err(TreeError::ArityTooSmall(min));
        }
        Ok(AritySpec::From(min))
    }

    /// Every odd arity from `min` up; `min` must be odd and at least 3.
    pub fn odd_from(min: u32) -> Result<Self, TreeError> {
        if min < 3 || min % 2 == 0 {
            return Err(TreeError::BadOddBound(min));
        }
        Ok(AritySpec::OddFrom(min))
    }

    /// The interval `{2, ..., n}`; empty when `n < 2`.
    pub fn interval(n: u32) -> Self {
        AritySpec::Finite((2..=n).collect())
    }

    pub fn contains(&self, a: u32) -> bool {
        if a < 2 {
            return false;
        }
        match self {
            AritySpec::Finite(set) => set.contains(&a),
            AritySpec::From(min) => a >= *min,
            AritySpec::OddFrom(min) => a >= *min && a % 2 == 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, AritySpec::Finite(set) if set.is_empty())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, AritySpec::Finite(_))
    }

    /// The members `<= bound`, ascending.
    pub fn materialize(&self, bound: u32) -> Vec<u32> {
        match self {
            AritySpec::Finite(set) => set.iter().copied().filter(|&a| a <= bound).collect(),
            AritySpec::From(min) => (*min..=bound).collect(),
            AritySpec::OddFrom(min) => (*min..=bound).step_by(2).collect(),
        }
    }

    /// Structural subset test, exact also for the infinite families.
    pub fn is_subset_of(&self, other: &AritySpec) -> bool {
        match (self, other) {
            (AritySpec::Finite(set), _) => set.iter().all(|&a| other.contains(a)),
            (AritySpec::From(a), AritySpec::From(b)) => a >= b,
            (AritySpec::From(_), _) => false,
            (AritySpec::OddFrom(a), AritySpec::OddFrom(b)) => a >= b,
            (AritySpec::OddFrom(a), AritySpec::From(b)) => a >= b,
            (AritySpec::OddFrom(_), AritySpec::Finite(_)) => false,
        }
    }

    /// Members of `self` not in `other`, cut at `bound`, ascending.
    pub fn difference_upto(&self, other: &AritySpec, bound: u32) -> Vec<u32> {
        self.materialize(bound)
            .into_iter()
            .filter(|&a| !other.contains(a))
            .collect()
    }

    /// Do the two sets agree below the bound?
    pub fn same_upto(&self, other: &AritySpec, bound: u32) -> bool {
        self.materialize(bound) == other.materialize(bound)
    }

    /// Does every internal vertex of `t` carry an arity from this set?
    ///
    /// True for the leaf and the empty tree, which have no vertices.
    pub fn admits(&self, t: &PlanarTree) -> bool {
        t.arities().all(|a| self.contains(a))
    }
}

impl fmt::Display for AritySpec {
    /// Mirrors the accepted input syntax: `2,3,5`, `all`, `3..all`,
    /// `odd3..all`, `none`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AritySpec::Finite(set) if set.is_empty() => write!(f, "none"),
            AritySpec::Finite(set) => {
                let mut first = true;
                for a in set {
                    if !first {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                    first = false;
                }
                Ok(())
            }
            AritySpec::From(2) => write!(f, "all"),
            AritySpec::From(min) => write!(f, "{min}..all"),
            AritySpec::OddFrom(min) => write!(f, "odd{min}..all"),
        }
    }
}

impl FromStr for AritySpec {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, TreeError> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(AritySpec::none());
        }
        if s == "all" {
            return Ok(AritySpec::all());
        }
        if let Some(head) = s.strip_suffix("..all") {
            if let Some(odd) = head.strip_prefix("odd") {
                let min = odd
                    .parse::<u32>()
                    .map_err(|_| parse_err(s, "arity set"))?;
                return AritySpec::odd_from(min);
            }
            let min = head
                .parse::<u32>()
                .map_err(|_| parse_err(s, "arity set"))?;
            return AritySpec::from_min(min);
        }
        let arities = s
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| parse_err(s, "arity set")))
            .collect::<Result<Vec<_>, _>>()?;
        AritySpec::finite(arities)
    }
}

/// All trees with `n` leaves whose vertex arities lie in `s`, in
/// increasing code order.
///
/// Degree 1 always yields exactly the leaf. Time is proportional to the
/// total output size over all degrees up to `n`, which is what dominates
/// any use of the result anyway.
pub fn enumerate(s: &AritySpec, n: usize) -> Vec<PlanarTree> {
    assert!(n >= 1, "trees have at least one leaf");
    let mut by_degree: Vec<Vec<PlanarTree>> = Vec::with_capacity(n + 1);
    by_degree.push(Vec::new());
    by_degree.push(vec![PlanarTree::leaf()]);
    for m in 2..=n {
        let mut out = Vec::new();
        for k in s.materialize(m as u32) {
            let k = k as usize;
            if k > m {
                break;
            }
            for_each_composition(m, k, &mut |parts| {
                collect_grafts(k as u32, parts, &by_degree, &mut out);
            });
        }
        out.sort();
        by_degree.push(out);
    }
    by_degree.pop().expect("degree n computed")
}

/// Invoke `f` on every composition of `total` into `parts` positive parts.
pub(crate) fn for_each_composition(total: usize, parts: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(remaining: usize, slots: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if slots == 1 {
            acc.push(remaining);
            f(acc);
            acc.pop();
            return;
        }
        // Leave at least one leaf for every following slot.
        for first in 1..=remaining - (slots - 1) {
            acc.push(first);
            rec(remaining - first, slots - 1, acc, f);
            acc.pop();
        }
    }
    if parts == 0 || total < parts {
        return;
    }
    let mut acc = Vec::with_capacity(parts);
    rec(total, parts, &mut acc, f);
}

/// Push every graft of one subtree choice per part onto `out`.
fn collect_grafts(
    k: u32,
    parts: &[usize],
    by_degree: &[Vec<PlanarTree>],
    out: &mut Vec<PlanarTree>,
) {
    let pools: Vec<&[PlanarTree]> = parts.iter().map(|&d| by_degree[d].as_slice()).collect();
    if pools.iter().any(|p| p.is_empty()) {
        return;
    }
    let mut choice = vec![0usize; pools.len()];
    loop {
        let mut code = Vec::with_capacity(
            1 + choice
                .iter()
                .zip(&pools)
                .map(|(&i, p)| p[i].code.len())
                .sum::<usize>(),
        );
        code.push(k);
        for (&i, pool) in choice.iter().zip(&pools) {
            code.extend_from_slice(&pool[i].code);
        }
        out.push(PlanarTree::from_code_unchecked(code));
        // Odometer step over the choice vector.
        let mut slot = pools.len();
        loop {
            if slot == 0 {
                return;
            }
            slot -= 1;
            choice[slot] += 1;
            if choice[slot] < pools[slot].len() {
                break;
            }
            choice[slot] = 0;
        }
    }
}

/// Trees with `n` leaves, arities in `s`, and root arity in `s \ t`.
///
/// These span degree `n` of the root-constrained suboperad: the identity
/// in degree 1 together with everything whose root operation is not a
/// `t`-arity. Degree 1 yields the leaf; for `n >= 2` the trees are
/// filtered from [`enumerate`] and inherit its ordering.
pub fn enumerate_magroot(
    s: &AritySpec,
    t: &AritySpec,
    n: usize,
) -> Result<Vec<PlanarTree>, TreeError> {
    if !t.is_subset_of(s) {
        return Err(TreeError::NotSubset(t.to_string(), s.to_string()));
    }
    let trees = enumerate(s, n)
        .into_iter()
        .filter(|tree| match tree.root_arity() {
            None => true,
            Some(r) => !t.contains(r),
        })
        .collect();
    Ok(trees)
}

/// Number of trees with `n` leaves and arities in `s`, grouped by number
/// of internal vertices.
///
/// Degree 1 gives `{0: 1}` for the bare leaf. The counts refine the plain
/// enumeration: summing the values recovers `enumerate(s, n).len()`.
pub fn count_bivariate(s: &AritySpec, n: usize) -> BTreeMap<usize, u64> {
    let mut counts = BTreeMap::new();
    for tree in enumerate(s, n) {
        *counts.entry(tree.vertex_count()).or_insert(0u64) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tree(code: &[u32]) -> PlanarTree {
        PlanarTree::from_code(code.to_vec()).unwrap()
    }

    #[test]
    fn code_validation_accepts_and_rejects() {
        assert!(PlanarTree::from_code(vec![]).is_ok());
        assert!(PlanarTree::from_code(vec![0]).is_ok());
        assert!(PlanarTree::from_code(vec![2, 0, 0]).is_ok());
        assert!(PlanarTree::from_code(vec![3, 0, 2, 0, 0, 0]).is_ok());
        assert_eq!(
            PlanarTree::from_code(vec![2, 0]),
            Err(TreeError::MalformedCode)
        );
        assert_eq!(
            PlanarTree::from_code(vec![2, 0, 0, 0]),
            Err(TreeError::MalformedCode)
        );
        assert_eq!(
            PlanarTree::from_code(vec![1, 0]),
            Err(TreeError::UnaryVertex)
        );
        assert_eq!(PlanarTree::from_code(vec![2]), Err(TreeError::MalformedCode));
    }

    #[test]
    fn degree_counts_leaves() {
        assert_eq!(PlanarTree::empty().degree(), 0);
        assert_eq!(PlanarTree::leaf().degree(), 1);
        assert_eq!(tree(&[3, 0, 2, 0, 0, 0]).degree(), 4);
        assert_eq!(tree(&[3, 0, 2, 0, 0, 0]).vertex_count(), 2);
    }

    #[test]
    fn grafting_builds_the_expected_code() {
        let caret = PlanarTree::graft(2, &[PlanarTree::leaf(), PlanarTree::leaf()]).unwrap();
        assert_eq!(caret.code(), &[2, 0, 0]);
        let t = PlanarTree::graft(3, &[PlanarTree::leaf(), caret.clone(), PlanarTree::leaf()])
            .unwrap();
        assert_eq!(t.code(), &[3, 0, 2, 0, 0, 0]);
        assert_eq!(
            PlanarTree::graft(2, &[PlanarTree::leaf(), PlanarTree::empty()]),
            Err(TreeError::EmptyTree)
        );
        assert_eq!(
            PlanarTree::graft(1, &[PlanarTree::leaf()]),
            Err(TreeError::ArityTooSmall(1))
        );
    }

    #[test]
    fn ungrafting_requires_the_matching_root_arity() {
        let t = tree(&[3, 0, 2, 0, 0, 0]);
        let branches = t.ungraft(3).unwrap();
        assert_eq!(branches.len(), 3);
        assert_eq!(branches[0], PlanarTree::leaf());
        assert_eq!(branches[1], tree(&[2, 0, 0]));
        assert_eq!(branches[2], PlanarTree::leaf());
        assert_eq!(t.ungraft(2), None);
        assert_eq!(PlanarTree::leaf().ungraft(2), None);
        assert_eq!(PlanarTree::empty().ungraft(2), None);
    }

    #[test]
    fn graft_then_ungraft_round_trips() {
        let children = [tree(&[2, 0, 0]), PlanarTree::leaf(), tree(&[3, 0, 0, 0])];
        let t = PlanarTree::graft(3, &children).unwrap();
        assert_eq!(t.ungraft(3).unwrap(), children.to_vec());
    }

    #[test]
    fn plugging_substitutes_leaves_in_order() {
        let caret = tree(&[2, 0, 0]);
        let plugged = caret.plug(&[caret.clone(), PlanarTree::leaf()]).unwrap();
        assert_eq!(plugged.code(), &[2, 2, 0, 0, 0]);
        let other = caret.plug(&[PlanarTree::leaf(), caret.clone()]).unwrap();
        assert_eq!(other.code(), &[2, 0, 2, 0, 0]);
        assert_eq!(
            caret.plug(&[caret.clone()]),
            Err(TreeError::ArityMismatch {
                expected: 2,
                got: 1
            })
        );
        assert_eq!(
            caret.plug(&[caret.clone(), PlanarTree::empty()]),
            Err(TreeError::EmptyTree)
        );
    }

    #[test]
    fn plugging_leaves_is_the_identity_both_ways() {
        let t = tree(&[3, 0, 2, 0, 0, 0]);
        let leaves = vec![PlanarTree::leaf(); t.degree()];
        assert_eq!(t.plug(&leaves).unwrap(), t);
        assert_eq!(PlanarTree::leaf().plug(&[t.clone()]).unwrap(), t);
    }

    #[test]
    fn enumerate_binary_gives_catalan_counts() {
        let s = AritySpec::finite([2]).unwrap();
        let expected = [1usize, 1, 2, 5, 14, 42];
        for (i, &want) in expected.iter().enumerate() {
            assert_eq!(enumerate(&s, i + 1).len(), want);
        }
    }

    #[test]
    fn enumerate_all_arities_gives_super_catalan_counts() {
        let s = AritySpec::all();
        let expected = [1usize, 1, 3, 11, 45, 197, 903];
        for (i, &want) in expected.iter().enumerate() {
            assert_eq!(enumerate(&s, i + 1).len(), want);
        }
    }

    #[test]
    fn enumerate_degree_three_lists_both_binary_combs_and_the_corolla() {
        let s = AritySpec::finite([2, 3]).unwrap();
        let got = enumerate(&s, 3);
        assert_eq!(
            got,
            vec![tree(&[2, 0, 2, 0, 0]), tree(&[2, 2, 0, 0, 0]), tree(&[3, 0, 0, 0])]
        );
    }

    #[test]
    fn enumerate_is_strictly_increasing_and_admitted() {
        for s in [
            AritySpec::finite([2]).unwrap(),
            AritySpec::finite([2, 3]).unwrap(),
            AritySpec::finite([3, 5]).unwrap(),
            AritySpec::all(),
            AritySpec::odd_from(3).unwrap(),
        ] {
            for n in 1..=7 {
                let trees = enumerate(&s, n);
                for w in trees.windows(2) {
                    assert!(w[0] < w[1], "not strictly increasing for {s} at degree {n}");
                }
                for t in &trees {
                    assert_eq!(t.degree(), n);
                    assert!(s.admits(t));
                }
            }
        }
    }

    #[test]
    fn enumerate_empty_set_has_only_the_leaf() {
        let s = AritySpec::none();
        assert_eq!(enumerate(&s, 1), vec![PlanarTree::leaf()]);
        for n in 2..=5 {
            assert!(enumerate(&s, n).is_empty());
        }
    }

    #[test]
    fn magroot_keeps_roots_outside_t() {
        let s = AritySpec::finite([2, 3]).unwrap();
        let t = AritySpec::finite([2]).unwrap();
        let got = enumerate_magroot(&s, &t, 3).unwrap();
        assert_eq!(got, vec![tree(&[3, 0, 0, 0])]);
        let at_four = enumerate_magroot(&s, &t, 4).unwrap();
        for tr in &at_four {
            assert_eq!(tr.root_arity(), Some(3));
        }
        // Root arity 3 with branch degrees (1,1,2), (1,2,1) or (2,1,1).
        assert_eq!(at_four.len(), 3);
        assert!(enumerate_magroot(&t, &s, 3).is_err());
    }

    #[test]
    fn magroot_with_equal_sets_is_identity_only() {
        let s = AritySpec::finite([2, 3]).unwrap();
        assert_eq!(enumerate_magroot(&s, &s, 1).unwrap(), vec![PlanarTree::leaf()]);
        for n in 2..=5 {
            assert!(enumerate_magroot(&s, &s, n).unwrap().is_empty());
        }
    }

    #[test]
    fn bivariate_counts_refine_the_plain_count() {
        let s = AritySpec::all();
        assert_eq!(count_bivariate(&s, 1), BTreeMap::from([(0, 1)]));
        assert_eq!(count_bivariate(&s, 2), BTreeMap::from([(1, 1)]));
        assert_eq!(count_bivariate(&s, 3), BTreeMap::from([(1, 1), (2, 2)]));
        for n in 1..=7 {
            let total: u64 = count_bivariate(&s, n).values().sum();
            assert_eq!(total as usize, enumerate(&s, n).len());
        }
    }

    #[test]
    fn arity_spec_parsing_round_trips() {
        for text in ["2,3,5", "all", "3..all", "odd3..all", "none", "2"] {
            let spec: AritySpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert!("1,2".parse::<AritySpec>().is_err());
        assert!("odd4..all".parse::<AritySpec>().is_err());
        assert!("x".parse::<AritySpec>().is_err());
    }

    #[test]
    fn arity_spec_subsets_and_differences() {
        let all = AritySpec::all();
        let odd = AritySpec::odd_from(3).unwrap();
        let pair = AritySpec::finite([2, 3]).unwrap();
        assert!(odd.is_subset_of(&all));
        assert!(pair.is_subset_of(&all));
        assert!(!all.is_subset_of(&odd));
        assert!(!all.is_subset_of(&pair));
        assert_eq!(all.difference_upto(&odd, 8), vec![2, 4, 6, 8]);
        assert_eq!(pair.difference_upto(&AritySpec::finite([2]).unwrap(), 8), vec![3]);
        assert_eq!(odd.materialize(9), vec![3, 5, 7, 9]);
    }

    #[test]
    fn tree_text_and_json_round_trip() {
        for code in [vec![], vec![0], vec![2, 0, 0], vec![3, 0, 2, 0, 0, 0]] {
            let t = PlanarTree::from_code(code).unwrap();
            assert_eq!(t.to_string().parse::<PlanarTree>().unwrap(), t);
            assert_eq!(PlanarTree::from_json(&t.to_json()).unwrap(), t);
        }
        assert_eq!(
            tree(&[3, 0, 2, 0, 0, 0]).to_json(),
            serde_json::json!([[], [[], []], []])
        );
        assert_eq!(PlanarTree::from_json(&serde_json::json!(null)).unwrap(), PlanarTree::empty());
        assert!(PlanarTree::from_json(&serde_json::json!([[]])).is_err());
    }

    /// Strategy: a random admitted tree of degree at most 6 over `{2, 3}`.
    fn arb_tree() -> impl Strategy<Value = PlanarTree> {
        (1usize..=6).prop_flat_map(|n| {
            let trees = enumerate(&AritySpec::finite([2, 3]).unwrap(), n);
            proptest::sample::select(trees)
        })
    }

    proptest! {
        #[test]
        fn plugging_is_associative(outer in arb_tree(), pick in proptest::collection::vec(0usize..100, 12)) {
            // Compose outer with middles, then middles with inners, and
            // check both bracketings of the double substitution agree.
            let s = AritySpec::finite([2, 3]).unwrap();
            let small: Vec<PlanarTree> = (1..=3).flat_map(|n| enumerate(&s, n)).collect();
            let middles: Vec<PlanarTree> = (0..outer.degree())
                .map(|i| small[pick[i % pick.len()] % small.len()].clone())
                .collect();
            let once = outer.plug(&middles).unwrap();
            let total: usize = middles.iter().map(|m| m.degree()).sum();
            let inners: Vec<PlanarTree> = (0..total)
                .map(|i| small[pick[(i + 5) % pick.len()] % small.len()].clone())
                .collect();
            let left = once.plug(&inners).unwrap();
            let mut right_mid = Vec::new();
            let mut offset = 0;
            for m in &middles {
                let d = m.degree();
                right_mid.push(m.plug(&inners[offset..offset + d]).unwrap());
                offset += d;
            }
            let right = outer.plug(&right_mid).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn display_round_trips(t in arb_tree()) {
            prop_assert_eq!(t.to_string().parse::<PlanarTree>().unwrap(), t);
        }
    }
}
