//! The free bialgebra on labelled planar reduced trees.
//!
//! Fix an arity set `S` for operations, a subset `T` of it for
//! co-operations, and a finite label space `V`. Degree `n` of the free
//! algebra is spanned by trees with `n` leaves, arities in `S`, and one
//! label per leaf. The operation of arity `n in S` grafts its arguments
//! under a new root; the co-operation of arity `k in T` ungrafts a root
//! of that exact arity and returns 0 on everything else. Together these
//! satisfy the defining compatibility: splitting with arity `k` after
//! multiplying with arity `l` returns the argument tuple when `k = l`
//! and 0 otherwise, on any tuple of elements without constant term.
//!
//! Everything lives below a fixed truncation degree; operations whose
//! result would overflow it report an error instead of silently
//! dropping terms.
//!
//! Invariants maintained here:
//!
//! * elements never store zero coefficients, and their term order
//!   (degree, then tree code, then label tuple) is the canonical basis
//!   order, so equality of elements is equality of maps;
//! * [`FreeBialgebra::basis_of_degree`] is strictly increasing in that
//!   order and contains exactly `(number of trees) * dim(V)^n` entries;
//! * the primitive basis is computed as an honest kernel and must agree
//!   with its combinatorial description (root arity outside `T`), both
//!   in dimension and membership; a mismatch panics rather than
//!   returning either answer.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::number::{parse_ratio, Q};
use crate::trees::{enumerate, AritySpec, PlanarTree, TreeError};

/// Errors from bialgebra constructions.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    /// The requested operation arity is not in `S`.
    #[error("arity {0} is not an algebra operation arity")]
    OperationArity(u32),
    /// The requested co-operation arity is not in `T`.
    #[error("arity {0} is not a coalgebra co-operation arity")]
    CooperationArity(u32),
    /// Wrong number of arguments.
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    /// A product would land beyond the truncation degree.
    #[error("result degree {degree} exceeds the truncation degree {trunc}")]
    TruncationExceeded { degree: usize, trunc: usize },
    /// Co-operation arities must form a subset of the operation arities.
    #[error("the coalgebra arity set must be contained in the algebra arity set")]
    AritySetsNotNested,
    /// Label spaces are nonzero by assumption.
    #[error("a label space needs at least one basis vector")]
    EmptyBasis,
    #[error("label names must be distinct")]
    DuplicateLabel,
    /// A tree needs exactly one label per leaf.
    #[error("expected {expected} labels for this tree, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("truncation degree must be at least 1")]
    ZeroTruncation,
    /// A homogeneous element of a specific degree was required.
    #[error("element of degree {found} where degree {expected} was required")]
    NotHomogeneous { expected: usize, found: usize },
    /// The element mentions a tree or label outside the ambient basis.
    #[error("element mentions a tree or label outside the ambient basis")]
    OutsideBasis,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("cannot parse element: {0}")]
    Parse(String),
}

/// Names for the basis of the label space `V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSpace {
    names: Vec<String>,
}

impl BasisSpace {
    /// A label space with the given distinct basis names.
    pub fn new(names: Vec<String>) -> Result<Self, AlgebraError> {
        if names.is_empty() {
            return Err(AlgebraError::EmptyBasis);
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            return Err(AlgebraError::DuplicateLabel);
        }
        Ok(BasisSpace { names })
    }

    /// The space with basis `v1, ..., vdim`.
    pub fn standard(dim: usize) -> Result<Self, AlgebraError> {
        BasisSpace::new((1..=dim).map(|i| format!("v{i}")).collect())
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// A tree shape together with one label index per leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    shape: PlanarTree,
    labels: Vec<usize>,
}

impl LabeledTree {
    /// Attach labels to a nonempty shape, one per leaf.
    pub fn new(shape: PlanarTree, labels: Vec<usize>) -> Result<Self, AlgebraError> {
        if shape.is_empty() {
            return Err(TreeError::EmptyTree.into());
        }
        if labels.len() != shape.degree() {
            return Err(AlgebraError::LabelCount {
                expected: shape.degree(),
                got: labels.len(),
            });
        }
        Ok(LabeledTree { shape, labels })
    }

    /// The degree-1 element carrying a single label.
    pub fn generator(label: usize) -> Self {
        LabeledTree {
            shape: PlanarTree::leaf(),
            labels: vec![label],
        }
    }

    pub fn shape(&self) -> &PlanarTree {
        &self.shape
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn degree(&self) -> usize {
        self.labels.len()
    }

    /// JSON object `{"tree": ..., "labels": [names...]}`.
    pub fn to_json(&self, basis: &BasisSpace) -> Value {
        let labels: Vec<Value> = self
            .labels
            .iter()
            .map(|&i| json!(basis.name(i)))
            .collect();
        json!({ "tree": self.shape.to_json(), "labels": labels })
    }

    /// Inverse of [`LabeledTree::to_json`].
    pub fn from_json(v: &Value, basis: &BasisSpace) -> Result<Self, AlgebraError> {
        let bad = || AlgebraError::Parse(v.to_string());
        let obj = v.as_object().ok_or_else(bad)?;
        let shape = PlanarTree::from_json(obj.get("tree").ok_or_else(bad)?)?;
        let labels = obj
            .get("labels")
            .and_then(Value::as_array)
            .ok_or_else(bad)?
            .iter()
            .map(|l| {
                l.as_str()
                    .and_then(|name| basis.index_of(name))
                    .ok_or_else(bad)
            })
            .collect::<Result<Vec<_>, _>>()?;
        LabeledTree::new(shape, labels)
    }
}

impl Ord for LabeledTree {
    /// Degree first, then tree code, then label tuple.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.shape.cmp(&other.shape))
            .then_with(|| self.labels.cmp(&other.labels))
    }
}

impl PartialOrd for LabeledTree {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite linear combination of labelled trees.
///
/// Terms are kept in canonical order and zero coefficients are never
/// stored, so `==` decides equality of elements.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    terms: BTreeMap<LabeledTree, Q>,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn single(term: LabeledTree, coeff: Q) -> Self {
        let mut e = Element::zero();
        e.add_term(term, coeff);
        e
    }

    /// The generator with the given label index, coefficient 1.
    pub fn generator(label: usize) -> Self {
        Element::single(LabeledTree::generator(label), Q::one())
    }

    pub fn from_terms<I: IntoIterator<Item = (LabeledTree, Q)>>(terms: I) -> Self {
        let mut e = Element::zero();
        for (t, c) in terms {
            e.add_term(t, c);
        }
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LabeledTree, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, term: &LabeledTree) -> Q {
        self.terms.get(term).cloned().unwrap_or_else(Q::zero)
    }

    /// Accumulate a term, dropping it if the coefficient cancels.
    pub fn add_term(&mut self, term: LabeledTree, coeff: Q) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(term) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn plus(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (t, c) in other.terms() {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &Element) -> Element {
        let mut out = self.clone();
        for (t, c) in other.terms() {
            out.add_term(t.clone(), -c.clone());
        }
        out
    }

    pub fn scaled(&self, c: &Q) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element {
            terms: self
                .terms
                .iter()
                .map(|(t, v)| (t.clone(), v * c))
                .collect(),
        }
    }

    /// Largest degree appearing in the support; `None` for zero.
    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(LabeledTree::degree)
    }

    pub fn is_homogeneous(&self, n: usize) -> bool {
        self.terms.keys().all(|t| t.degree() == n)
    }

    /// JSON array of `{"tree", "labels", "coeff"}` objects in term order.
    pub fn to_json(&self, basis: &BasisSpace) -> Value {
        let items: Vec<Value> = self
            .terms
            .iter()
            .map(|(t, c)| {
                let mut obj = t.to_json(basis);
                obj["coeff"] = json!(c.to_string());
                obj
            })
            .collect();
        Value::Array(items)
    }

    /// Inverse of [`Element::to_json`].
    pub fn from_json(v: &Value, basis: &BasisSpace) -> Result<Self, AlgebraError> {
        let bad = || AlgebraError::Parse(v.to_string());
        let items = v.as_array().ok_or_else(bad)?;
        let mut e = Element::zero();
        for item in items {
            let term = LabeledTree::from_json(item, basis)?;
            let coeff = item
                .get("coeff")
                .and_then(Value::as_str)
                .and_then(parse_ratio)
                .ok_or_else(bad)?;
            e.add_term(term, coeff);
        }
        Ok(e)
    }
}

/// An element of a tensor power: linear combination of tuples of
/// labelled trees, all tuples of one fixed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorElement {
    arity: usize,
    terms: BTreeMap<Vec<LabeledTree>, Q>,
}

impl TensorElement {
    pub fn zero(arity: usize) -> Self {
        TensorElement {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(factors: Vec<LabeledTree>, coeff: Q) -> Self {
        let mut t = TensorElement::zero(factors.len());
        t.add_term(factors, coeff);
        t
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<LabeledTree>, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, factors: &[LabeledTree]) -> Q {
        self.terms.get(factors).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, factors: Vec<LabeledTree>, coeff: Q) {
        assert_eq!(factors.len(), self.arity, "tensor factor count");
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(factors) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn plus(&self, other: &TensorElement) -> TensorElement {
        assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (t, c) in other.terms() {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn scaled(&self, c: &Q) -> TensorElement {
        if c.is_zero() {
            return TensorElement::zero(self.arity);
        }
        TensorElement {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(t, v)| (t.clone(), v * c))
                .collect(),
        }
    }

    /// JSON array of `{"factors": [...], "coeff"}` objects in term order.
    pub fn to_json(&self, basis: &BasisSpace) -> Value {
        let items: Vec<Value> = self
            .terms
            .iter()
            .map(|(factors, c)| {
                let fs: Vec<Value> = factors.iter().map(|f| f.to_json(basis)).collect();
                json!({ "factors": fs, "coeff": c.to_string() })
            })
            .collect();
        Value::Array(items)
    }
}

/// A counterexample to the defining compatibility relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatWitness {
    pub op_arity: u32,
    pub coop_arity: u32,
    pub args: Vec<LabeledTree>,
    pub got: TensorElement,
    pub expected: TensorElement,
}

impl fmt::Display for CompatWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "splitting with arity {} after multiplying {} arguments disagreed with the axiom",
            self.coop_arity, self.op_arity
        )
    }
}

/// The free bialgebra on a label space, truncated in degree.
///
/// Holds the operation arity set `S`, the co-operation arity set
/// `T (a subset of S)`, the label space, and a truncation degree. Basis
/// enumerations per degree are computed once and cached; the context is
/// safe to share across threads.
#[derive(Debug)]
pub struct FreeBialgebra {
    s: AritySpec,
    t: AritySpec,
    basis: BasisSpace,
    trunc: usize,
    tree_cache: Vec<OnceLock<Vec<PlanarTree>>>,
    basis_cache: Vec<OnceLock<Vec<LabeledTree>>>,
}

impl FreeBialgebra {
    pub fn new(
        s: AritySpec,
        t: AritySpec,
        basis: BasisSpace,
        trunc: usize,
    ) -> Result<Self, AlgebraError> {
        if !t.is_subset_of(&s) {
            return Err(AlgebraError::AritySetsNotNested);
        }
        if trunc < 1 {
            return Err(AlgebraError::ZeroTruncation);
        }
        Ok(FreeBialgebra {
            s,
            t,
            basis,
            trunc,
            tree_cache: (0..=trunc).map(|_| OnceLock::new()).collect(),
            basis_cache: (0..=trunc).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn algebra_arities(&self) -> &AritySpec {
        &self.s
    }

    pub fn coalgebra_arities(&self) -> &AritySpec {
        &self.t
    }

    pub fn label_space(&self) -> &BasisSpace {
        &self.basis
    }

    pub fn truncation(&self) -> usize {
        self.trunc
    }

    /// The admitted tree shapes of a degree, in canonical order.
    pub fn trees_of_degree(&self, n: usize) -> &[PlanarTree] {
        assert!(n >= 1 && n <= self.trunc, "degree out of range");
        self.tree_cache[n].get_or_init(|| enumerate(&self.s, n))
    }

    /// The canonical basis of degree `n`: every admitted shape with every
    /// label tuple, ordered by (shape, labels).
    pub fn basis_of_degree(&self, n: usize) -> &[LabeledTree] {
        assert!(n >= 1 && n <= self.trunc, "degree out of range");
        self.basis_cache[n].get_or_init(|| {
            let tuples = label_tuples(n, self.basis.dim());
            let mut out = Vec::new();
            for shape in self.trees_of_degree(n) {
                for labels in &tuples {
                    out.push(LabeledTree {
                        shape: shape.clone(),
                        labels: labels.clone(),
                    });
                }
            }
            out
        })
    }

    pub fn dim_of_degree(&self, n: usize) -> usize {
        self.basis_of_degree(n).len()
    }

    /// Position of a basis element within its degree, if it belongs.
    pub fn index_of(&self, term: &LabeledTree) -> Option<usize> {
        let n = term.degree();
        if n == 0 || n > self.trunc {
            return None;
        }
        self.basis_of_degree(n).binary_search(term).ok()
    }

    /// Coordinates of a homogeneous element in the degree-`n` basis.
    pub fn coords(&self, n: usize, x: &Element) -> Result<Vec<Q>, AlgebraError> {
        let mut v = vec![Q::zero(); self.dim_of_degree(n)];
        for (term, c) in x.terms() {
            if term.degree() != n {
                return Err(AlgebraError::NotHomogeneous {
                    expected: n,
                    found: term.degree(),
                });
            }
            let idx = self.index_of(term).ok_or(AlgebraError::OutsideBasis)?;
            v[idx] = c.clone();
        }
        Ok(v)
    }

    /// Element from degree-`n` coordinates.
    pub fn from_coords(&self, n: usize, v: &[Q]) -> Element {
        let basis = self.basis_of_degree(n);
        assert_eq!(v.len(), basis.len(), "coordinate length");
        Element::from_terms(
            v.iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (basis[i].clone(), c.clone())),
        )
    }

    /// The operation of arity `n`: graft the arguments under a new root,
    /// extended multilinearly.
    pub fn mu(&self, n: u32, args: &[Element]) -> Result<Element, AlgebraError> {
        if !self.s.contains(n) {
            return Err(AlgebraError::OperationArity(n));
        }
        if args.len() != n as usize {
            return Err(AlgebraError::ArityMismatch {
                expected: n as usize,
                got: args.len(),
            });
        }
        let term_lists: Vec<Vec<(&LabeledTree, &Q)>> =
            args.iter().map(|a| a.terms().collect()).collect();
        let mut out = Element::zero();
        if term_lists.iter().any(Vec::is_empty) {
            return Ok(out);
        }
        let mut choice = vec![0usize; term_lists.len()];
        loop {
            let picked: Vec<&LabeledTree> = choice
                .iter()
                .zip(&term_lists)
                .map(|(&i, l)| l[i].0)
                .collect();
            let degree: usize = picked.iter().map(|t| t.degree()).sum();
            if degree > self.trunc {
                return Err(AlgebraError::TruncationExceeded {
                    degree,
                    trunc: self.trunc,
                });
            }
            let shapes: Vec<PlanarTree> = picked.iter().map(|t| t.shape.clone()).collect();
            let shape = PlanarTree::graft(n, &shapes)?;
            let mut labels = Vec::with_capacity(degree);
            for t in &picked {
                labels.extend_from_slice(&t.labels);
            }
            let coeff: Q = choice
                .iter()
                .zip(&term_lists)
                .map(|(&i, l)| l[i].1)
                .product();
            out.add_term(LabeledTree { shape, labels }, coeff);
            if !advance(&mut choice, |i| term_lists[i].len()) {
                break;
            }
        }
        Ok(out)
    }

    /// The co-operation of arity `k`: ungraft a root of that exact
    /// arity, zero on every other term.
    pub fn delta(&self, k: u32, x: &Element) -> Result<TensorElement, AlgebraError> {
        if !self.t.contains(k) {
            return Err(AlgebraError::CooperationArity(k));
        }
        let mut out = TensorElement::zero(k as usize);
        for (term, c) in x.terms() {
            if let Some(branches) = term.shape.ungraft(k) {
                let mut factors = Vec::with_capacity(k as usize);
                let mut offset = 0;
                for b in branches {
                    let d = b.degree();
                    factors.push(LabeledTree {
                        shape: b,
                        labels: term.labels[offset..offset + d].to_vec(),
                    });
                    offset += d;
                }
                out.add_term(factors, c.clone());
            }
        }
        Ok(out)
    }

    /// The composite co-operation shaped like `shape`: ungraft the root
    /// arity of `shape`, then recurse into the branches. The leaf acts
    /// as the identity. Every arity of `shape` must lie in `T`.
    pub fn delta_along_tree(
        &self,
        shape: &PlanarTree,
        x: &Element,
    ) -> Result<TensorElement, AlgebraError> {
        if shape.is_empty() {
            return Err(TreeError::EmptyTree.into());
        }
        if let Some(a) = shape.arities().find(|&a| !self.t.contains(a)) {
            return Err(AlgebraError::CooperationArity(a));
        }
        self.delta_along_tree_inner(shape, x)
    }

    fn delta_along_tree_inner(
        &self,
        shape: &PlanarTree,
        x: &Element,
    ) -> Result<TensorElement, AlgebraError> {
        if shape.is_leaf() {
            let mut out = TensorElement::zero(1);
            for (term, c) in x.terms() {
                out.add_term(vec![term.clone()], c.clone());
            }
            return Ok(out);
        }
        let (k, parts) = shape.root_split().expect("nonempty, not a leaf");
        let first = self.delta(k, x)?;
        let mut out = TensorElement::zero(shape.degree());
        for (factors, c) in first.terms() {
            let refined: Vec<TensorElement> = factors
                .iter()
                .zip(&parts)
                .map(|(slot, part)| {
                    self.delta_along_tree_inner(part, &Element::single(slot.clone(), Q::one()))
                })
                .collect::<Result<_, _>>()?;
            let refined_terms: Vec<Vec<(&Vec<LabeledTree>, &Q)>> =
                refined.iter().map(|t| t.terms().collect()).collect();
            if refined_terms.iter().any(Vec::is_empty) {
                continue;
            }
            let mut choice = vec![0usize; refined_terms.len()];
            loop {
                let mut key = Vec::with_capacity(shape.degree());
                let mut coeff = c.clone();
                for (&i, l) in choice.iter().zip(&refined_terms) {
                    key.extend(l[i].0.iter().cloned());
                    coeff *= l[i].1;
                }
                out.add_term(key, coeff);
                if !advance(&mut choice, |i| refined_terms[i].len()) {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// The composite operation shaped like `shape`: one argument per
    /// leaf, multiplied together following the tree from the leaves down.
    /// The leaf acts as the identity.
    pub fn mu_along_tree(
        &self,
        shape: &PlanarTree,
        args: &[Element],
    ) -> Result<Element, AlgebraError> {
        if shape.is_empty() {
            return Err(TreeError::EmptyTree.into());
        }
        if args.len() != shape.degree() {
            return Err(AlgebraError::ArityMismatch {
                expected: shape.degree(),
                got: args.len(),
            });
        }
        if shape.is_leaf() {
            return Ok(args[0].clone());
        }
        let (k, parts) = shape.root_split().expect("nonempty, not a leaf");
        let mut sub = Vec::with_capacity(k as usize);
        let mut offset = 0;
        for part in &parts {
            let d = part.degree();
            sub.push(self.mu_along_tree(part, &args[offset..offset + d])?);
            offset += d;
        }
        self.mu(k, &sub)
    }

    /// Visit every tuple of basis elements with `len` slots and total
    /// degree at most `max_total`, in lexicographic order. The visitor
    /// returns `false` to stop early; the return value reports whether
    /// the walk ran to completion.
    pub fn visit_basis_tuples(
        &self,
        len: usize,
        max_total: usize,
        f: &mut dyn FnMut(&[LabeledTree]) -> bool,
    ) -> bool {
        let mut acc = Vec::with_capacity(len);
        self.visit_tuples_rec(len, max_total, 0, &mut acc, f)
    }

    fn visit_tuples_rec(
        &self,
        len: usize,
        max_total: usize,
        used: usize,
        acc: &mut Vec<LabeledTree>,
        f: &mut dyn FnMut(&[LabeledTree]) -> bool,
    ) -> bool {
        if acc.len() == len {
            return f(acc);
        }
        let slots_left = len - acc.len();
        if max_total < used + slots_left {
            return true;
        }
        let budget = max_total - used - (slots_left - 1);
        for d in 1..=budget {
            for b in self.basis_of_degree(d) {
                acc.push(b.clone());
                let keep_going = self.visit_tuples_rec(len, max_total, used + d, acc, f);
                acc.pop();
                if !keep_going {
                    return false;
                }
            }
        }
        true
    }

    /// Exhaustively test the compatibility relation on basis tuples of
    /// total degree at most `max_degree`; `None` means it holds.
    ///
    /// For every operation arity `l`, tuple of arguments, and
    /// co-operation arity `k`, the composite must be the argument tuple
    /// when `k = l` and zero otherwise.
    pub fn compat_witness(&self, max_degree: usize) -> Option<CompatWitness> {
        assert!(
            max_degree >= 1 && max_degree <= self.trunc,
            "degree out of range"
        );
        let mut witness = None;
        for l in self.s.materialize(max_degree as u32) {
            let coop_arities = self.t.materialize(max_degree as u32);
            self.visit_basis_tuples(l as usize, max_degree, &mut |args| {
                let product = self
                    .mu(l, &args.iter().map(|a| Element::single(a.clone(), Q::one())).collect::<Vec<_>>())
                    .expect("arity and truncation already checked");
                for &k in &coop_arities {
                    let got = self.delta(k, &product).expect("arity in T");
                    let expected = if k == l {
                        TensorElement::single(args.to_vec(), Q::one())
                    } else {
                        TensorElement::zero(k as usize)
                    };
                    if got != expected {
                        witness = Some(CompatWitness {
                            op_arity: l,
                            coop_arity: k,
                            args: args.to_vec(),
                            got,
                            expected,
                        });
                        return false;
                    }
                }
                true
            });
            if witness.is_some() {
                break;
            }
        }
        witness
    }

    /// Does the compatibility relation hold on all basis tuples of total
    /// degree at most `max_degree`?
    pub fn compat_check(&self, max_degree: usize) -> bool {
        self.compat_witness(max_degree).is_none()
    }

    /// Basis of the degree-`n` primitives: the joint kernel of all
    /// co-operations, computed by exact row reduction.
    ///
    /// The result is cross-checked against the combinatorial description
    /// of the primitives (labelled trees whose root arity lies outside
    /// `T`, plus all of `V` in degree 1); any disagreement panics, since
    /// it would mean the crate computed the coalgebra structure wrong.
    pub fn primitive_basis(&self, n: usize) -> Vec<Element> {
        assert!(n >= 1 && n <= self.trunc, "degree out of range");
        let basis = self.basis_of_degree(n);
        let dim = basis.len();
        if dim == 0 {
            return Vec::new();
        }
        let mut row_index: BTreeMap<(u32, Vec<LabeledTree>), usize> = BTreeMap::new();
        let mut entries: Vec<(usize, usize, Q)> = Vec::new();
        for k in self.t.materialize(n as u32) {
            for (j, b) in basis.iter().enumerate() {
                let image = self
                    .delta(k, &Element::single(b.clone(), Q::one()))
                    .expect("arity in T");
                for (factors, c) in image.terms() {
                    let next = row_index.len();
                    let row = *row_index.entry((k, factors.clone())).or_insert(next);
                    entries.push((row, j, c.clone()));
                }
            }
        }
        let mut matrix = Matrix::zero(row_index.len(), dim);
        for (r, c, v) in entries {
            matrix.set(r, c, v);
        }
        let kernel: Vec<Element> = matrix
            .kernel_basis()
            .into_iter()
            .map(|v| self.from_coords(n, &v))
            .collect();

        // Independent description: primitives are exactly the basis
        // elements whose root operation cannot be split off.
        let combinatorial: Vec<&LabeledTree> = basis
            .iter()
            .filter(|b| match b.shape.root_arity() {
                None => true,
                Some(r) => !self.t.contains(r),
            })
            .collect();
        assert_eq!(
            kernel.len(),
            combinatorial.len(),
            "primitive rank disagrees with the root-arity count in degree {n}"
        );
        for b in combinatorial {
            for k in self.t.materialize(n as u32) {
                let image = self
                    .delta(k, &Element::single((*b).clone(), Q::one()))
                    .expect("arity in T");
                assert!(
                    image.is_zero(),
                    "a root-arity primitive was not annihilated in degree {n}"
                );
            }
        }
        kernel
    }

    /// Smallest filtration level containing `x`: 0 for zero, otherwise
    /// the largest arity `r` such that some composite co-operation with
    /// `r` outputs fails to kill `x`, and 1 when even the binary ones
    /// all do.
    ///
    /// Composite co-operations of arity beyond the top degree of `x`
    /// vanish on it for degree reasons, so the search is finite.
    pub fn filtration_degree(&self, x: &Element) -> usize {
        let Some(top) = x.max_degree() else {
            return 0;
        };
        for arity in (2..=top).rev() {
            for shape in enumerate(&self.t, arity) {
                let image = self
                    .delta_along_tree(&shape, x)
                    .expect("enumerated over T");
                if !image.is_zero() {
                    return arity;
                }
            }
        }
        1
    }

    /// Render an element with label names, e.g. `(2,0,0)[v1,v2]`.
    pub fn format_element(&self, x: &Element) -> String {
        if x.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (term, c)) in x.terms().enumerate() {
            let negative = c < &Q::zero();
            let magnitude = if negative { -c.clone() } else { c.clone() };
            if i == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            if !magnitude.is_one() {
                out.push_str(&format!("{magnitude}*"));
            }
            let labels: Vec<&str> = term.labels.iter().map(|&l| self.basis.name(l)).collect();
            out.push_str(&format!("({})[{}]", term.shape, labels.join(",")));
        }
        out
    }
}

/// All label tuples of the given length over `dim` labels, in
/// lexicographic order.
pub(crate) fn label_tuples(len: usize, dim: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; len];
    loop {
        out.push(current.clone());
        if !advance(&mut current, |_| dim) {
            break;
        }
    }
    out
}

/// Odometer step: increment a mixed-radix counter, returning `false`
/// once it wraps around to all zeros.
fn advance(counter: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    let mut i = counter.len();
    while i > 0 {
        i -= 1;
        counter[i] += 1;
        if counter[i] < radix(i) {
            return true;
        }
        counter[i] = 0;
    }
    false
}
