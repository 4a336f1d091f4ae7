//! Unital partial magmatic bialgebras over interval arity sets.
//!
//! The unital theory only works for arity intervals: operations
//! `mu_2, ..., mu_n` and co-operations `delta_2, ..., delta_m` with
//! `2 <= m <= n`. The underlying space is the free algebra on labelled
//! trees with a unit element `1` adjoined.
//!
//! The unit absorbs arguments: plugging `1` into `j` slots of `mu_l`
//! collapses it to `mu_{l-j}`, with `mu_1 = Id` and the empty product
//! equal to `1`. Dually, the co-operation of arity `k` on a tree with
//! root arity `r` produces three kinds of tensor terms:
//!
//! * the whole tree inserted into one slot, units elsewhere (always);
//! * the tuple of root branches (exactly when `k = r`);
//! * the branches interleaved, in order, with `k - r` units (when
//!   `k > r`).
//!
//! An equivalent description, used here as an independent oracle: the
//! coproduct of `x` sums one tensor term per way to write `x` as
//! `mu_k(y_1, ..., y_k)` with each `y_i` either a unit or a tree.
//!
//! Subtracting shuffled unit paddings of lower co-operations yields the
//! reduced co-operations `rd_1 = Id`,
//! `rd_k = delta_k - sum_{l<k} sum_{shuffles} (rd_l padded with units)`,
//! which are unit-free and single out the root split of the matching
//! arity. Primitives, the filtration and, for `m = n`, the splitting
//! idempotent are all built from these reduced co-operations.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{
    AlgebraError, BasisSpace, Element, FreeBialgebra, LabeledTree, TensorElement,
};
use crate::linalg::{in_column_span, Matrix};
use crate::number::{parse_ratio, Q};
use crate::structure::{CheckReport, GradedMap, StructureError};
use crate::trees::{AritySpec, PlanarTree, TreeError};

/// Errors from the unital constructions.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UnitalError {
    /// The arity ranges must satisfy `2 <= m <= n`.
    #[error("unital contexts need arity ranges 2..=m inside 2..=n with m >= 2")]
    BadRanges,
    /// Operation arity outside `2..=n`.
    #[error("arity {0} is outside the operation range")]
    OperationArity(u32),
    /// Co-operation arity outside the allowed range.
    #[error("arity {0} is outside the co-operation range")]
    CooperationArity(u32),
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("result degree {degree} exceeds the truncation degree {trunc}")]
    TruncationExceeded { degree: usize, trunc: usize },
    /// Rigidity needs the two ranges to coincide.
    #[error("the rigidity machinery needs matching arity ranges (m = n)")]
    RequiresEqualRanges,
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("cannot parse unital element: {0}")]
    Parse(String),
}

/// An element `c . 1 + (combination of labelled trees)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct UnitalElement {
    unit: Q,
    terms: BTreeMap<LabeledTree, Q>,
}

impl UnitalElement {
    pub fn zero() -> Self {
        UnitalElement::default()
    }

    /// The unit with the given coefficient.
    pub fn unit(c: Q) -> Self {
        UnitalElement {
            unit: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(term: LabeledTree, coeff: Q) -> Self {
        let mut e = UnitalElement::zero();
        e.add_term(term, coeff);
        e
    }

    pub fn generator(label: usize) -> Self {
        UnitalElement::single(LabeledTree::generator(label), Q::one())
    }

    /// Wrap a unit-free element.
    pub fn from_element(x: &Element) -> Self {
        UnitalElement {
            unit: Q::zero(),
            terms: x.terms().map(|(t, c)| (t.clone(), c.clone())).collect(),
        }
    }

    pub fn unit_coeff(&self) -> &Q {
        &self.unit
    }

    /// The tree terms, forgetting the unit component.
    pub fn tree_part(&self) -> Element {
        Element::from_terms(self.terms.iter().map(|(t, c)| (t.clone(), c.clone())))
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero() && self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LabeledTree, &Q)> {
        self.terms.iter()
    }

    pub fn add_unit(&mut self, c: Q) {
        self.unit += c;
    }

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

    pub fn plus(&self, other: &UnitalElement) -> UnitalElement {
        let mut out = self.clone();
        out.unit += &other.unit;
        for (t, c) in other.terms() {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &UnitalElement) -> UnitalElement {
        self.plus(&other.scaled(&-Q::one()))
    }

    pub fn scaled(&self, c: &Q) -> UnitalElement {
        if c.is_zero() {
            return UnitalElement::zero();
        }
        UnitalElement {
            unit: &self.unit * c,
            terms: self.terms.iter().map(|(t, v)| (t.clone(), v * c)).collect(),
        }
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(LabeledTree::degree)
    }

    /// `{"unit": "c", "terms": [...]}` with the terms as in the
    /// unit-free encoding.
    pub fn to_json(&self, basis: &BasisSpace) -> Value {
        json!({
            "unit": self.unit.to_string(),
            "terms": self.tree_part().to_json(basis),
        })
    }

    pub fn from_json(v: &Value, basis: &BasisSpace) -> Result<Self, UnitalError> {
        let bad = || UnitalError::Parse(v.to_string());
        let obj = v.as_object().ok_or_else(bad)?;
        let unit = obj
            .get("unit")
            .and_then(Value::as_str)
            .and_then(parse_ratio)
            .ok_or_else(bad)?;
        let terms = Element::from_json(obj.get("terms").ok_or_else(bad)?, basis)?;
        let mut out = UnitalElement::from_element(&terms);
        out.unit = unit;
        Ok(out)
    }
}

/// One slot of a unital tensor: a unit or a labelled tree.
pub type UnitalSlot = Option<LabeledTree>;

/// A linear combination of tensors whose slots hold units or trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitalTensor {
    arity: usize,
    terms: BTreeMap<Vec<UnitalSlot>, Q>,
}

impl UnitalTensor {
    pub fn zero(arity: usize) -> Self {
        UnitalTensor {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn single(slots: Vec<UnitalSlot>, coeff: Q) -> Self {
        let mut t = UnitalTensor::zero(slots.len());
        t.add_term(slots, coeff);
        t
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<UnitalSlot>, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, slots: &[UnitalSlot]) -> Q {
        self.terms.get(slots).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, slots: Vec<UnitalSlot>, coeff: Q) {
        assert_eq!(slots.len(), self.arity, "tensor slot count");
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(slots) {
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

    pub fn plus(&self, other: &UnitalTensor) -> UnitalTensor {
        assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (t, c) in other.terms() {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    /// Is every slot of every term a tree (no units anywhere)?
    pub fn is_unit_free(&self) -> bool {
        self.terms.keys().all(|slots| slots.iter().all(Option::is_some))
    }

    /// Forget unit slots are possible: convert to a plain tensor,
    /// which panics if a unit slot is present.
    pub fn into_tensor(&self) -> TensorElement {
        let mut out = TensorElement::zero(self.arity);
        for (slots, c) in &self.terms {
            let factors: Vec<LabeledTree> = slots
                .iter()
                .map(|s| s.clone().expect("unit slot in unit-free tensor"))
                .collect();
            out.add_term(factors, c.clone());
        }
        out
    }
}

/// A `(p, q)`-shuffle: a permutation of `p + q` slots keeping the first
/// `p` factors and the last `q` factors in their relative orders.
///
/// `positions[i]` is the slot the `i`-th factor lands in (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shuffle {
    positions: Vec<usize>,
    split: usize,
}

impl Shuffle {
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Scatter `factors` into a fresh slot vector of the full length,
    /// filling unclaimed slots with `fill`.
    pub fn scatter<T: Clone>(&self, factors: &[T], fill: &T) -> Vec<T> {
        assert_eq!(factors.len(), self.split, "factor count");
        let mut out = vec![fill.clone(); self.positions.len()];
        for (i, f) in factors.iter().enumerate() {
            out[self.positions[i]] = f.clone();
        }
        out
    }
}

impl fmt::Display for Shuffle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.positions.iter().map(|p| (p + 1).to_string()).collect();
        write!(f, "[{}]", strs.join(","))
    }
}

/// All `(p, q)`-shuffles, ordered by the slot set of the first block in
/// lexicographic order. There are `binomial(p + q, p)` of them.
pub fn shuffles(p: usize, q: usize) -> Vec<Shuffle> {
    let total = p + q;
    let mut out = Vec::new();
    let mut first_block = Vec::with_capacity(p);
    fn rec(start: usize, total: usize, p: usize, first_block: &mut Vec<usize>, out: &mut Vec<Shuffle>) {
        if first_block.len() == p {
            let mut positions = first_block.clone();
            positions.extend((0..total).filter(|i| !first_block.contains(i)));
            out.push(Shuffle {
                positions,
                split: p,
            });
            return;
        }
        for i in start..total {
            first_block.push(i);
            rec(i + 1, total, p, first_block, out);
            first_block.pop();
        }
    }
    rec(0, total, p, &mut first_block, &mut out);
    out
}

/// The unital bialgebra with operations `mu_2 ..= mu_n` and
/// co-operations `delta_2 ..= delta_m`, on a label space, truncated in
/// degree.
#[derive(Debug)]
pub struct UnitalBialgebra {
    m: u32,
    n: u32,
    inner: FreeBialgebra,
}

impl UnitalBialgebra {
    /// Requires `2 <= m <= n` and a truncation degree of at least 1.
    pub fn new(m: u32, n: u32, basis: BasisSpace, trunc: usize) -> Result<Self, UnitalError> {
        if m < 2 || m > n {
            return Err(UnitalError::BadRanges);
        }
        let inner = FreeBialgebra::new(
            AritySpec::interval(n),
            AritySpec::interval(m),
            basis,
            trunc,
        )?;
        Ok(UnitalBialgebra { m, n, inner })
    }

    pub fn coop_bound(&self) -> u32 {
        self.m
    }

    pub fn op_bound(&self) -> u32 {
        self.n
    }

    /// The underlying unit-free bialgebra on the same trees.
    pub fn inner(&self) -> &FreeBialgebra {
        &self.inner
    }

    pub fn truncation(&self) -> usize {
        self.inner.truncation()
    }

    pub fn label_space(&self) -> &BasisSpace {
        self.inner.label_space()
    }

    /// The operation of arity `l`, with the unit absorbing arguments:
    /// units among the arguments drop out, the surviving trees are
    /// grafted with the smaller arity, a single survivor passes through,
    /// and no survivor at all multiplies out to the unit.
    pub fn unital_mu(&self, l: u32, args: &[UnitalElement]) -> Result<UnitalElement, UnitalError> {
        if l < 2 || l > self.n {
            return Err(UnitalError::OperationArity(l));
        }
        if args.len() != l as usize {
            return Err(UnitalError::ArityMismatch {
                expected: l as usize,
                got: args.len(),
            });
        }
        let parts: Vec<Vec<(Option<&LabeledTree>, &Q)>> = args
            .iter()
            .map(|a| {
                let mut list: Vec<(Option<&LabeledTree>, &Q)> = Vec::new();
                if !a.unit.is_zero() {
                    list.push((None, &a.unit));
                }
                list.extend(a.terms.iter().map(|(t, c)| (Some(t), c)));
                list
            })
            .collect();
        let mut out = UnitalElement::zero();
        if parts.iter().any(Vec::is_empty) {
            return Ok(out);
        }
        let mut choice = vec![0usize; parts.len()];
        loop {
            let mut coeff = Q::one();
            let mut present: Vec<&LabeledTree> = Vec::new();
            for (&i, list) in choice.iter().zip(&parts) {
                let (slot, c) = list[i];
                coeff *= c;
                if let Some(t) = slot {
                    present.push(t);
                }
            }
            match present.len() {
                0 => out.add_unit(coeff),
                1 => out.add_term(present[0].clone(), coeff),
                j => {
                    let degree: usize = present.iter().map(|t| t.degree()).sum();
                    if degree > self.truncation() {
                        return Err(UnitalError::TruncationExceeded {
                            degree,
                            trunc: self.truncation(),
                        });
                    }
                    let shapes: Vec<PlanarTree> =
                        present.iter().map(|t| t.shape().clone()).collect();
                    let shape = PlanarTree::graft(j as u32, &shapes)?;
                    let mut labels = Vec::with_capacity(degree);
                    for t in &present {
                        labels.extend_from_slice(t.labels());
                    }
                    out.add_term(LabeledTree::new(shape, labels)?, coeff);
                }
            }
            if !advance_mixed(&mut choice, &parts) {
                break;
            }
        }
        Ok(out)
    }

    /// The co-operation of arity `k` on the unital bialgebra.
    ///
    /// On the unit it is `1 tensor ... tensor 1`. On a tree it sums the
    /// insertions of the whole tree into each slot, plus the root
    /// branches when the root arity matches `k` exactly, plus the
    /// in-order interleavings of the branches with units when `k`
    /// exceeds the root arity.
    pub fn unital_delta(&self, k: u32, x: &UnitalElement) -> Result<UnitalTensor, UnitalError> {
        if k < 2 || k > self.m {
            return Err(UnitalError::CooperationArity(k));
        }
        let k_us = k as usize;
        let mut out = UnitalTensor::zero(k_us);
        if !x.unit.is_zero() {
            out.add_term(vec![None; k_us], x.unit.clone());
        }
        for (term, c) in &x.terms {
            // Insertions: the whole term in one slot, units elsewhere.
            for i in 0..k_us {
                let mut slots: Vec<UnitalSlot> = vec![None; k_us];
                slots[i] = Some(term.clone());
                out.add_term(slots, c.clone());
            }
            let Some((r, branches)) = term.shape().root_split() else {
                continue;
            };
            if r > k {
                continue;
            }
            // Branch tuples: labelled branches, in order, spread over the
            // chosen slots; for r = k this is the plain root split.
            let labelled: Vec<LabeledTree> = {
                let mut list = Vec::with_capacity(r as usize);
                let mut offset = 0;
                for b in branches {
                    let d = b.degree();
                    list.push(
                        LabeledTree::new(b, term.labels()[offset..offset + d].to_vec())
                            .expect("branch labels match"),
                    );
                    offset += d;
                }
                list
            };
            for chosen in combinations(k_us, r as usize) {
                let mut slots: Vec<UnitalSlot> = vec![None; k_us];
                for (b, &pos) in labelled.iter().zip(&chosen) {
                    slots[pos] = Some(b.clone());
                }
                out.add_term(slots, c.clone());
            }
        }
        Ok(out)
    }

    /// Independent form of the same co-operation: one tensor term per
    /// way to write each tree of `x` as `mu_k` of units and trees.
    ///
    /// Planar trees decompose uniquely, so the only candidates for the
    /// non-unit entries are the whole tree (alone) or its root branches
    /// (all of them, in order); this makes the enumeration finite
    /// without reference to the insertion/interleaving case analysis.
    pub fn unital_delta_by_decomposition(
        &self,
        k: u32,
        x: &UnitalElement,
    ) -> Result<UnitalTensor, UnitalError> {
        if k < 2 || k > self.m {
            return Err(UnitalError::CooperationArity(k));
        }
        let k_us = k as usize;
        let mut out = UnitalTensor::zero(k_us);
        if !x.unit.is_zero() {
            out.add_term(vec![None; k_us], x.unit.clone());
        }
        for (term, c) in &x.terms {
            // Distinct candidates only: two equal branches are the same
            // element, and a tuple of elements is counted once.
            let mut candidates: Vec<UnitalSlot> = vec![None, Some(term.clone())];
            if let Some((_, branches)) = term.shape().root_split() {
                let mut offset = 0;
                for b in branches {
                    let d = b.degree();
                    let branch = Some(
                        LabeledTree::new(b, term.labels()[offset..offset + d].to_vec())
                            .expect("branch labels match"),
                    );
                    if !candidates.contains(&branch) {
                        candidates.push(branch);
                    }
                    offset += d;
                }
            }
            let mut choice = vec![0usize; k_us];
            loop {
                let slots: Vec<UnitalSlot> =
                    choice.iter().map(|&i| candidates[i].clone()).collect();
                // Products preserve the total tree degree, so tuples of a
                // different degree never reproduce the term.
                let degree: usize = slots.iter().flatten().map(LabeledTree::degree).sum();
                if degree == term.degree() {
                    let args: Vec<UnitalElement> = slots
                        .iter()
                        .map(|s| match s {
                            None => UnitalElement::unit(Q::one()),
                            Some(t) => UnitalElement::single(t.clone(), Q::one()),
                        })
                        .collect();
                    let product = self.unital_mu(k, &args)?;
                    if product == UnitalElement::single(term.clone(), Q::one()) {
                        out.add_term(slots, c.clone());
                    }
                }
                if !advance_uniform(&mut choice, candidates.len()) {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// The counit: the coefficient of the unit.
    pub fn counit(&self, x: &UnitalElement) -> Q {
        x.unit.clone()
    }

    /// Collapse all slots except `keep` with the counit.
    pub fn counit_collapse(&self, tensor: &UnitalTensor, keep: usize) -> UnitalElement {
        assert!(keep < tensor.arity(), "slot out of range");
        let mut out = UnitalElement::zero();
        for (slots, c) in tensor.terms() {
            let others_are_units = slots
                .iter()
                .enumerate()
                .all(|(i, s)| i == keep || s.is_none());
            if !others_are_units {
                continue;
            }
            match &slots[keep] {
                None => out.add_unit(c.clone()),
                Some(t) => out.add_term(t.clone(), c.clone()),
            }
        }
        out
    }

    /// Check the counit law on all basis elements (and the unit) up to
    /// `max_degree`: collapsing every slot but one of any co-operation
    /// must return the element unchanged. `None` means it holds.
    pub fn counit_witness(&self, max_degree: usize) -> Option<String> {
        assert!(max_degree >= 1 && max_degree <= self.truncation());
        let mut elements: Vec<UnitalElement> = vec![UnitalElement::unit(Q::one())];
        for d in 1..=max_degree {
            for b in self.inner.basis_of_degree(d) {
                elements.push(UnitalElement::single(b.clone(), Q::one()));
            }
        }
        for k in 2..=self.m {
            for x in &elements {
                let split = self.unital_delta(k, x).expect("arity in range");
                for keep in 0..k as usize {
                    let collapsed = self.counit_collapse(&split, keep);
                    if &collapsed != x {
                        return Some(format!(
                            "counit collapse of slot {keep} of the arity-{k} coproduct changed the element"
                        ));
                    }
                }
            }
        }
        None
    }

    /// Compare [`UnitalBialgebra::unital_delta`] against the
    /// decomposition oracle on every product `mu_l` of basis elements
    /// with total degree at most `max_degree`. `None` means agreement.
    pub fn compat_witness(&self, max_degree: usize) -> Option<String> {
        assert!(max_degree >= 1 && max_degree <= self.truncation());
        let mut witness = None;
        for l in 2..=self.n.min(max_degree as u32) {
            self.inner
                .visit_basis_tuples(l as usize, max_degree, &mut |args| {
                    let uargs: Vec<UnitalElement> = args
                        .iter()
                        .map(|a| UnitalElement::single(a.clone(), Q::one()))
                        .collect();
                    let product = self.unital_mu(l, &uargs).expect("within truncation");
                    for k in 2..=self.m {
                        let got = self.unital_delta(k, &product).expect("arity in range");
                        let expected = self
                            .unital_delta_by_decomposition(k, &product)
                            .expect("arity in range");
                        if got != expected {
                            witness = Some(format!(
                                "arity-{k} coproduct of an arity-{l} product of {} basis elements disagreed with the decomposition sum",
                                args.len()
                            ));
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

    /// Does the coproduct agree with the decomposition oracle on all
    /// products up to `max_degree`?
    pub fn compat_check(&self, max_degree: usize) -> bool {
        self.compat_witness(max_degree).is_none()
    }

    /// The reduced co-operation of arity `k`: `rd_1 = Id`, and
    /// `rd_k = delta_k - sum_{l=1}^{k-1} sum_{(l, k-l)-shuffles} (rd_l
    /// padded with units, slots scattered by the shuffle)`.
    ///
    /// The reduced co-operations live on the unit-free part of the
    /// space, so the unit component of `x` is projected away first; in
    /// particular they vanish on the unit itself. The result never
    /// contains a unit slot; that is asserted, not assumed.
    pub fn reduced_delta(&self, k: u32, x: &UnitalElement) -> Result<UnitalTensor, UnitalError> {
        if k < 1 || k > self.m {
            return Err(UnitalError::CooperationArity(k));
        }
        let reduced = UnitalElement {
            unit: Q::zero(),
            terms: x.terms.clone(),
        };
        let ladder = self.reduced_ladder(k, &reduced)?;
        let result = ladder.into_iter().last().expect("k >= 1");
        debug_assert!(result.is_unit_free(), "reduced co-operation produced a unit slot");
        Ok(result)
    }

    /// All of `rd_1, ..., rd_k` applied to `x`.
    fn reduced_ladder(&self, k: u32, x: &UnitalElement) -> Result<Vec<UnitalTensor>, UnitalError> {
        let mut ladder: Vec<UnitalTensor> = Vec::with_capacity(k as usize);
        let identity = UnitalTensor {
            arity: 1,
            terms: x
                .terms
                .iter()
                .map(|(t, c)| (vec![Some(t.clone())], c.clone()))
                .collect(),
        };
        ladder.push(identity);
        for kk in 2..=k {
            let kk_us = kk as usize;
            let mut acc = self.unital_delta(kk, x)?;
            for l in 1..kk_us {
                let lower = &ladder[l - 1];
                for sigma in shuffles(l, kk_us - l) {
                    for (factors, c) in lower.terms() {
                        let slots = sigma.scatter(factors, &None);
                        acc.add_term(slots, -c.clone());
                    }
                }
            }
            ladder.push(acc);
        }
        Ok(ladder)
    }

    /// The composite reduced co-operation shaped like `shape`: reduce
    /// with the root arity, then recurse into the branches. All arities
    /// of `shape` must lie in the co-operation range.
    pub fn reduced_delta_along_tree(
        &self,
        shape: &PlanarTree,
        x: &UnitalElement,
    ) -> Result<UnitalTensor, UnitalError> {
        if shape.is_empty() {
            return Err(TreeError::EmptyTree.into());
        }
        if let Some(a) = shape.arities().find(|&a| a < 2 || a > self.m) {
            return Err(UnitalError::CooperationArity(a));
        }
        let reduced = UnitalElement {
            unit: Q::zero(),
            terms: x.terms.clone(),
        };
        self.reduced_along_tree_inner(shape, &reduced)
    }

    fn reduced_along_tree_inner(
        &self,
        shape: &PlanarTree,
        x: &UnitalElement,
    ) -> Result<UnitalTensor, UnitalError> {
        if shape.is_leaf() {
            return Ok(UnitalTensor {
                arity: 1,
                terms: x
                    .terms
                    .iter()
                    .map(|(t, c)| (vec![Some(t.clone())], c.clone()))
                    .collect(),
            });
        }
        let (k, parts) = shape.root_split().expect("nonempty, not a leaf");
        let first = self.reduced_delta(k, x)?;
        let mut out = UnitalTensor::zero(shape.degree());
        for (slots, c) in first.terms() {
            let refined: Vec<UnitalTensor> = slots
                .iter()
                .zip(&parts)
                .map(|(slot, part)| {
                    let t = slot.clone().expect("reduced output is unit-free");
                    self.reduced_along_tree_inner(part, &UnitalElement::single(t, Q::one()))
                })
                .collect::<Result<_, _>>()?;
            let refined_terms: Vec<Vec<(&Vec<UnitalSlot>, &Q)>> =
                refined.iter().map(|t| t.terms().collect()).collect();
            if refined_terms.iter().any(Vec::is_empty) {
                continue;
            }
            let mut choice = vec![0usize; refined_terms.len()];
            loop {
                let mut key: Vec<UnitalSlot> = Vec::with_capacity(shape.degree());
                let mut coeff = c.clone();
                for (&i, list) in choice.iter().zip(&refined_terms) {
                    key.extend(list[i].0.iter().cloned());
                    coeff *= list[i].1;
                }
                out.add_term(key, coeff);
                if !advance_ragged(&mut choice, &refined_terms) {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Basis of the degree-`d` primitives: joint kernel of the reduced
    /// co-operations, computed by exact row reduction and cross-checked
    /// against the root-arity description (root strictly above `m`).
    pub fn primitive_basis(&self, d: usize) -> Vec<UnitalElement> {
        assert!(d >= 1 && d <= self.truncation(), "degree out of range");
        let basis = self.inner.basis_of_degree(d);
        let dim = basis.len();
        if dim == 0 {
            return Vec::new();
        }
        let mut row_index: BTreeMap<(u32, Vec<UnitalSlot>), usize> = BTreeMap::new();
        let mut entries: Vec<(usize, usize, Q)> = Vec::new();
        for k in 2..=self.m.min(d as u32) {
            for (j, b) in basis.iter().enumerate() {
                let image = self
                    .reduced_delta(k, &UnitalElement::single(b.clone(), Q::one()))
                    .expect("arity in range, unit-free input");
                for (slots, c) in image.terms() {
                    let next = row_index.len();
                    let row = *row_index.entry((k, slots.clone())).or_insert(next);
                    entries.push((row, j, c.clone()));
                }
            }
        }
        let mut matrix = Matrix::zero(row_index.len(), dim);
        for (r, c, v) in entries {
            matrix.set(r, c, v);
        }
        let kernel: Vec<UnitalElement> = matrix
            .kernel_basis()
            .into_iter()
            .map(|v| UnitalElement::from_element(&self.inner.from_coords(d, &v)))
            .collect();

        let combinatorial: Vec<&LabeledTree> = basis
            .iter()
            .filter(|b| match b.shape().root_arity() {
                None => true,
                Some(r) => r > self.m,
            })
            .collect();
        assert_eq!(
            kernel.len(),
            combinatorial.len(),
            "unital primitive rank disagrees with the root-arity count in degree {d}"
        );
        for b in combinatorial {
            for k in 2..=self.m.min(d as u32) {
                let image = self
                    .reduced_delta(k, &UnitalElement::single((*b).clone(), Q::one()))
                    .expect("arity in range");
                assert!(
                    image.is_zero(),
                    "a root-arity unital primitive was not annihilated in degree {d}"
                );
            }
        }
        kernel
    }

    /// Smallest filtration level containing `x`: 0 for multiples of the
    /// unit, 1 for elements killed by every composite reduced
    /// co-operation of two or more outputs, otherwise the largest
    /// output count that still sees `x`.
    pub fn filtration_degree(&self, x: &UnitalElement) -> usize {
        if x.terms.is_empty() {
            return 0;
        }
        let reduced_part = UnitalElement {
            unit: Q::zero(),
            terms: x.terms.clone(),
        };
        let top = reduced_part.max_degree().expect("nonempty tree part");
        for arity in (2..=top).rev() {
            for shape in crate::trees::enumerate(&AritySpec::interval(self.m), arity) {
                let image = self
                    .reduced_delta_along_tree(&shape, &reduced_part)
                    .expect("arities in range");
                if !image.is_zero() {
                    return arity;
                }
            }
        }
        1
    }

    /// Interpret a tree shape as a composite of unital operations and
    /// apply it to the arguments, one per leaf.
    pub fn unital_mu_along_tree(
        &self,
        shape: &PlanarTree,
        args: &[UnitalElement],
    ) -> Result<UnitalElement, UnitalError> {
        if shape.is_empty() {
            return Err(TreeError::EmptyTree.into());
        }
        if args.len() != shape.degree() {
            return Err(UnitalError::ArityMismatch {
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
            sub.push(self.unital_mu_along_tree(part, &args[offset..offset + d])?);
            offset += d;
        }
        self.unital_mu(k, &sub)
    }

    /// Rigidity at matching ranges (`m = n`): rebuild the splitting
    /// idempotent and the comparison maps from the unital operations
    /// and the reduced co-operations, and verify the same identities as
    /// in the unit-free case.
    pub fn rigidity_check(&self) -> Result<Vec<CheckReport>, UnitalError> {
        if self.m != self.n {
            return Err(UnitalError::RequiresEqualRanges);
        }
        let inner = &self.inner;
        let trunc = self.truncation();
        let id = GradedMap::identity(inner);
        let mut e = id.clone();
        for k in 2..=self.n.min(trunc as u32) {
            let conv = GradedMap::from_action(inner, &mut |_, b| {
                let x = UnitalElement::single(b.clone(), Q::one());
                let split = self.reduced_delta(k, &x).expect("basis input is unit-free");
                let mut out = UnitalElement::zero();
                for (slots, c) in split.terms() {
                    let args: Vec<UnitalElement> = slots
                        .iter()
                        .map(|s| {
                            UnitalElement::single(
                                s.clone().expect("reduced output is unit-free"),
                                Q::one(),
                            )
                        })
                        .collect();
                    let product = self.unital_mu(k, &args).expect("within truncation");
                    out = out.plus(&product.scaled(c));
                }
                debug_assert!(out.unit_coeff().is_zero());
                Ok(out.tree_part())
            })?;
            e = e.minus(&conv)?;
        }

        let g = GradedMap::from_action(inner, &mut |d, b| {
            let x = UnitalElement::single(b.clone(), Q::one());
            let mut out = Element::zero();
            for shape in inner.trees_of_degree(d) {
                let split = self
                    .reduced_delta_along_tree(shape, &x)
                    .expect("arities in range");
                for (slots, c) in split.terms() {
                    // Each slot has degree 1 here; project it with the
                    // degree-1 block of the idempotent and use the labels.
                    let mut label_choices: Vec<Vec<(usize, Q)>> = Vec::with_capacity(slots.len());
                    for s in slots {
                        let t = s.clone().expect("reduced output is unit-free");
                        debug_assert_eq!(t.degree(), 1);
                        let projected = e
                            .apply(inner, &Element::single(t, Q::one()))
                            .expect("degree within truncation");
                        label_choices.push(
                            projected
                                .terms()
                                .map(|(lt, v)| (lt.labels()[0], v.clone()))
                                .collect(),
                        );
                    }
                    if label_choices.iter().any(Vec::is_empty) {
                        continue;
                    }
                    let mut choice = vec![0usize; label_choices.len()];
                    loop {
                        let labels: Vec<usize> = choice
                            .iter()
                            .zip(&label_choices)
                            .map(|(&i, l)| l[i].0)
                            .collect();
                        let mut coeff = c.clone();
                        for (&i, l) in choice.iter().zip(&label_choices) {
                            coeff *= &l[i].1;
                        }
                        out.add_term(
                            LabeledTree::new(shape.clone(), labels).expect("label count matches"),
                            coeff,
                        );
                        let mut slot = choice.len();
                        let mut done = true;
                        while slot > 0 {
                            slot -= 1;
                            choice[slot] += 1;
                            if choice[slot] < label_choices[slot].len() {
                                done = false;
                                break;
                            }
                            choice[slot] = 0;
                        }
                        if done {
                            break;
                        }
                    }
                }
            }
            Ok(out)
        })?;

        let f = GradedMap::from_action(inner, &mut |_, b| {
            let args: Vec<UnitalElement> = b
                .labels()
                .iter()
                .map(|&l| UnitalElement::generator(l))
                .collect();
            let assembled = self
                .unital_mu_along_tree(b.shape(), &args)
                .expect("within truncation");
            debug_assert!(assembled.unit_coeff().is_zero());
            Ok(assembled.tree_part())
        })?;

        let mut reports = Vec::new();
        let ee = e.compose(&e)?;
        for d in 1..=trunc {
            reports.push(if ee.dense(d) == e.dense(d) {
                CheckReport::pass("projector_idempotent", d)
            } else {
                CheckReport::fail(
                    "projector_idempotent",
                    d,
                    format!("e^2 differs from e in degree {d}"),
                )
            });
        }

        for d in 1..=trunc {
            let prims = self.primitive_basis(d);
            let prim_coords: Vec<Vec<Q>> = prims
                .iter()
                .map(|p| {
                    inner
                        .coords(d, &p.tree_part())
                        .expect("primitive output is homogeneous")
                })
                .collect();
            let prim_matrix = Matrix::from_columns(&prim_coords);
            let dense = e.dense(d);
            let rank = dense.rank();
            let mut ok = rank == prims.len();
            let mut witness = if ok {
                None
            } else {
                Some(format!(
                    "projector rank {rank} but {} primitives in degree {d}",
                    prims.len()
                ))
            };
            if ok {
                let dim = inner.dim_of_degree(d);
                for j in 0..dim {
                    let col: Vec<Q> = (0..dim).map(|i| dense.entry(i, j).clone()).collect();
                    let inside = if prims.is_empty() {
                        col.iter().all(Q::is_zero)
                    } else {
                        in_column_span(&prim_matrix, &col)
                    };
                    if !inside {
                        ok = false;
                        witness = Some(format!(
                            "projector image of basis column {j} leaves the primitive span in degree {d}"
                        ));
                        break;
                    }
                }
            }
            reports.push(match witness {
                None => CheckReport::pass("projector_image_is_primitives", d),
                Some(w) if !ok => CheckReport::fail("projector_image_is_primitives", d, w),
                Some(_) => unreachable!(),
            });
        }

        let fg = f.compose(&g)?;
        let gf = g.compose(&f)?;
        for (name, composite) in [
            ("composition_after_decomposition", &fg),
            ("decomposition_after_composition", &gf),
        ] {
            for d in 1..=trunc {
                reports.push(if composite.dense(d) == Matrix::identity(inner.dim_of_degree(d)) {
                    CheckReport::pass(name, d)
                } else {
                    CheckReport::fail(
                        name,
                        d,
                        format!("composite differs from the identity in degree {d}"),
                    )
                });
            }
        }

        // The decomposition respects the unital products on tree tuples.
        for k in 2..=self.n.min(trunc as u32) {
            let mut failures: BTreeMap<usize, String> = BTreeMap::new();
            let mut totals: Vec<usize> = Vec::new();
            inner.visit_basis_tuples(k as usize, trunc, &mut |args| {
                let total: usize = args.iter().map(LabeledTree::degree).sum();
                if !totals.contains(&total) {
                    totals.push(total);
                }
                let uargs: Vec<UnitalElement> = args
                    .iter()
                    .map(|a| UnitalElement::single(a.clone(), Q::one()))
                    .collect();
                let product = self.unital_mu(k, &uargs).expect("within truncation");
                let lhs = g
                    .apply(inner, &product.tree_part())
                    .expect("within truncation");
                let mapped: Vec<UnitalElement> = uargs
                    .iter()
                    .map(|a| {
                        UnitalElement::from_element(
                            &g.apply(inner, &a.tree_part()).expect("within truncation"),
                        )
                    })
                    .collect();
                let rhs = self.unital_mu(k, &mapped).expect("within truncation");
                if lhs != rhs.tree_part() || !rhs.unit_coeff().is_zero() {
                    failures
                        .entry(total)
                        .or_insert_with(|| format!("splitting an arity-{k} unital product disagreed"));
                }
                true
            });
            totals.sort_unstable();
            for total in totals {
                reports.push(match failures.get(&total) {
                    None => CheckReport::pass(&format!("decomposition_respects_products_{k}"), total),
                    Some(w) => CheckReport::fail(
                        &format!("decomposition_respects_products_{k}"),
                        total,
                        w.clone(),
                    ),
                });
            }
        }

        Ok(reports)
    }

    /// Render an element including its unit component.
    pub fn format_element(&self, x: &UnitalElement) -> String {
        let tree_text = self.inner.format_element(&x.tree_part());
        if x.unit.is_zero() {
            return tree_text;
        }
        if x.terms.is_empty() {
            return format!("{}*1", x.unit);
        }
        format!("{}*1 + {}", x.unit, tree_text)
    }
}

/// All ascending `r`-element subsets of `0..k`, in lexicographic order.
fn combinations(k: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, r: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if acc.len() == r {
            out.push(acc.clone());
            return;
        }
        for i in start..k {
            acc.push(i);
            rec(i + 1, k, r, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    let mut acc = Vec::with_capacity(r);
    if r <= k {
        rec(0, k, r, &mut acc, &mut out);
    }
    out
}

/// Odometer over per-slot lists of possibly different lengths.
fn advance_mixed(choice: &mut [usize], parts: &[Vec<(Option<&LabeledTree>, &Q)>]) -> bool {
    let mut i = choice.len();
    while i > 0 {
        i -= 1;
        choice[i] += 1;
        if choice[i] < parts[i].len() {
            return true;
        }
        choice[i] = 0;
    }
    false
}

/// Odometer with a uniform radix.
fn advance_uniform(choice: &mut [usize], radix: usize) -> bool {
    let mut i = choice.len();
    while i > 0 {
        i -= 1;
        choice[i] += 1;
        if choice[i] < radix {
            return true;
        }
        choice[i] = 0;
    }
    false
}

/// Odometer over borrowed term lists.
fn advance_ragged(choice: &mut [usize], lists: &[Vec<(&Vec<UnitalSlot>, &Q)>]) -> bool {
    let mut i = choice.len();
    while i > 0 {
        i -= 1;
        choice[i] += 1;
        if choice[i] < lists[i].len() {
            return true;
        }
        choice[i] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::q;

    fn ctx(m: u32, n: u32, dim: usize, trunc: usize) -> UnitalBialgebra {
        UnitalBialgebra::new(m, n, BasisSpace::standard(dim).unwrap(), trunc).unwrap()
    }

    #[test]
    fn context_validates_ranges() {
        let v = BasisSpace::standard(1).unwrap();
        assert!(matches!(
            UnitalBialgebra::new(3, 2, v.clone(), 3),
            Err(UnitalError::BadRanges)
        ));
        assert!(matches!(
            UnitalBialgebra::new(1, 2, v.clone(), 3),
            Err(UnitalError::BadRanges)
        ));
        assert!(UnitalBialgebra::new(2, 2, v, 3).is_ok());
    }

    #[test]
    fn unit_absorbs_arguments() {
        let c = ctx(2, 3, 2, 4);
        let one = UnitalElement::unit(q(1));
        let x = UnitalElement::generator(0);
        let y = UnitalElement::generator(1);
        // mu_2(1, x) = x and mu_2(x, 1) = x.
        assert_eq!(c.unital_mu(2, &[one.clone(), x.clone()]).unwrap(), x);
        assert_eq!(c.unital_mu(2, &[x.clone(), one.clone()]).unwrap(), x);
        // mu_3(x, 1, y) collapses to mu_2(x, y).
        let collapsed = c.unital_mu(3, &[x.clone(), one.clone(), y.clone()]).unwrap();
        let direct = c.unital_mu(2, &[x.clone(), y.clone()]).unwrap();
        assert_eq!(collapsed, direct);
        // All units multiply to the unit.
        assert_eq!(
            c.unital_mu(2, &[one.clone(), one.clone()]).unwrap(),
            UnitalElement::unit(q(1))
        );
        // Coefficients multiply through.
        let scaled = c
            .unital_mu(2, &[UnitalElement::unit(q(3)), x.clone()])
            .unwrap();
        assert_eq!(scaled, x.scaled(&q(3)));
    }

    #[test]
    fn unital_coproduct_of_a_product_has_the_three_kinds_of_terms() {
        let c = ctx(2, 2, 2, 4);
        let x = UnitalElement::generator(0);
        let y = UnitalElement::generator(1);
        let xy = c.unital_mu(2, &[x, y]).unwrap();
        let split = c.unital_delta(2, &xy).unwrap();
        let t = xy.terms().next().unwrap().0.clone();
        let gx = LabeledTree::generator(0);
        let gy = LabeledTree::generator(1);
        // 1 (x) t + t (x) 1 + x (x) y.
        assert_eq!(split.coeff(&[None, Some(t.clone())]), q(1));
        assert_eq!(split.coeff(&[Some(t.clone()), None]), q(1));
        assert_eq!(split.coeff(&[Some(gx.clone()), Some(gy.clone())]), q(1));
        assert_eq!(split.coeff(&[Some(gy), Some(gx)]), q(0));
        assert_eq!(split.terms().count(), 3);
    }

    #[test]
    fn unital_coproduct_interleaves_when_arity_exceeds_the_root() {
        let c = ctx(3, 3, 1, 4);
        let v = UnitalElement::generator(0);
        let pair = c.unital_mu(2, &[v.clone(), v.clone()]).unwrap();
        let t = pair.terms().next().unwrap().0.clone();
        let split = c.unital_delta(3, &pair).unwrap();
        let g = LabeledTree::generator(0);
        // Three insertions of the whole tree and three interleavings of
        // the two branches among three slots.
        assert_eq!(split.terms().count(), 6);
        assert_eq!(split.coeff(&[Some(t.clone()), None, None]), q(1));
        assert_eq!(split.coeff(&[Some(g.clone()), Some(g.clone()), None]), q(1));
        assert_eq!(split.coeff(&[Some(g.clone()), None, Some(g.clone())]), q(1));
        assert_eq!(split.coeff(&[None, Some(g.clone()), Some(g.clone())]), q(1));
    }

    #[test]
    fn unital_coproduct_of_unit_and_generator() {
        let c = ctx(2, 2, 1, 3);
        let one = UnitalElement::unit(q(1));
        let split = c.unital_delta(2, &one).unwrap();
        assert_eq!(split.coeff(&[None, None]), q(1));
        assert_eq!(split.terms().count(), 1);
        let v = UnitalElement::generator(0);
        let split_v = c.unital_delta(2, &v).unwrap();
        let g = LabeledTree::generator(0);
        assert_eq!(split_v.coeff(&[Some(g.clone()), None]), q(1));
        assert_eq!(split_v.coeff(&[None, Some(g)]), q(1));
        assert_eq!(split_v.terms().count(), 2);
    }

    #[test]
    fn decomposition_oracle_matches_the_case_analysis() {
        for (m, n) in [(2, 2), (2, 3), (3, 3), (3, 4)] {
            let c = ctx(m, n, 2, 4);
            assert!(c.compat_check(4), "disagreement for m={m} n={n}");
        }
    }

    #[test]
    fn counit_law_holds() {
        for (m, n) in [(2, 2), (2, 3), (3, 4)] {
            let c = ctx(m, n, 2, 4);
            assert_eq!(c.counit_witness(4), None, "counit failed for m={m} n={n}");
        }
    }

    #[test]
    fn shuffles_have_binomial_counts_and_preserve_block_orders() {
        assert_eq!(shuffles(1, 1).len(), 2);
        assert_eq!(shuffles(2, 1).len(), 3);
        assert_eq!(shuffles(2, 2).len(), 6);
        assert_eq!(shuffles(0, 2).len(), 1);
        for sh in shuffles(2, 2) {
            let p = sh.positions();
            assert!(p[0] < p[1], "first block out of order: {sh}");
            assert!(p[2] < p[3], "second block out of order: {sh}");
        }
        // Scatter drops the factors into their slots.
        let sh = &shuffles(2, 1)[1];
        assert_eq!(sh.positions(), &[0, 2, 1]);
        assert_eq!(sh.scatter(&['a', 'b'], &'.'), vec!['a', '.', 'b']);
    }

    #[test]
    fn reduced_delta_recovers_the_root_split_only() {
        let c = ctx(3, 3, 2, 4);
        let x = UnitalElement::generator(0);
        let y = UnitalElement::generator(1);
        let xy = c.unital_mu(2, &[x.clone(), y.clone()]).unwrap();
        // rd_2 of a binary product is exactly the branch pair.
        let rd2 = c.reduced_delta(2, &xy).unwrap();
        let gx = LabeledTree::generator(0);
        let gy = LabeledTree::generator(1);
        assert_eq!(rd2.coeff(&[Some(gx.clone()), Some(gy.clone())]), q(1));
        assert_eq!(rd2.terms().count(), 1);
        // rd_3 of it vanishes; rd_2 and rd_3 kill generators.
        assert!(c.reduced_delta(3, &xy).unwrap().is_zero());
        assert!(c.reduced_delta(2, &x).unwrap().is_zero());
        assert!(c.reduced_delta(3, &x).unwrap().is_zero());
        // rd_3 of a ternary product is its branch triple.
        let xyz = c.unital_mu(3, &[x.clone(), y.clone(), x.clone()]).unwrap();
        let rd3 = c.reduced_delta(3, &xyz).unwrap();
        assert_eq!(
            rd3.coeff(&[Some(gx.clone()), Some(gy), Some(gx)]),
            q(1)
        );
        assert_eq!(rd3.terms().count(), 1);
        // rd_1 is the identity on unit-free elements.
        let rd1 = c.reduced_delta(1, &xy).unwrap();
        assert_eq!(rd1.arity(), 1);
        assert_eq!(rd1.terms().count(), 1);
    }

    #[test]
    fn reduced_delta_projects_out_the_unit() {
        let c = ctx(2, 2, 1, 3);
        // The reduced co-operations vanish on the unit itself.
        assert!(c.reduced_delta(2, &UnitalElement::unit(q(1))).unwrap().is_zero());
        // A unit component never influences the reduced output.
        let v = UnitalElement::generator(0);
        let vv = c.unital_mu(2, &[v.clone(), v]).unwrap();
        let mixed = vv.plus(&UnitalElement::unit(q(7)));
        assert_eq!(
            c.reduced_delta(2, &mixed).unwrap(),
            c.reduced_delta(2, &vv).unwrap()
        );
    }

    #[test]
    fn reduced_outputs_never_contain_units() {
        let c = ctx(3, 4, 2, 4);
        for d in 1..=4 {
            for b in c.inner().basis_of_degree(d) {
                for k in 1..=3 {
                    let image = c
                        .reduced_delta(k, &UnitalElement::single(b.clone(), q(1)))
                        .unwrap();
                    assert!(image.is_unit_free(), "unit slot from degree {d} arity {k}");
                }
            }
        }
    }

    #[test]
    fn unital_primitives_match_high_root_trees() {
        let c = ctx(2, 3, 1, 4);
        // Degree 1: the label space.
        assert_eq!(c.primitive_basis(1).len(), 1);
        // Degree 2: only the binary tree, which rd_2 splits.
        assert_eq!(c.primitive_basis(2).len(), 0);
        // Degree 3: the 3-corolla survives (root 3 > m = 2).
        assert_eq!(c.primitive_basis(3).len(), 1);
        // Degree 4: root-3 trees with one binary branch.
        assert_eq!(c.primitive_basis(4).len(), 3);
    }

    #[test]
    fn unital_filtration_examples() {
        let c = ctx(2, 2, 2, 4);
        assert_eq!(c.filtration_degree(&UnitalElement::zero()), 0);
        assert_eq!(c.filtration_degree(&UnitalElement::unit(q(5))), 0);
        assert_eq!(c.filtration_degree(&UnitalElement::generator(0)), 1);
        let x = UnitalElement::generator(0);
        let y = UnitalElement::generator(1);
        let xy = c.unital_mu(2, &[x, y]).unwrap();
        assert_eq!(c.filtration_degree(&xy), 2);
        let mixed = xy.plus(&UnitalElement::unit(q(7)));
        assert_eq!(c.filtration_degree(&mixed), 2);
    }

    #[test]
    fn unital_rigidity_passes_at_matching_ranges() {
        for (n, dim) in [(2u32, 1), (2, 2), (3, 1)] {
            let c = ctx(n, n, dim, 4);
            let reports = c.rigidity_check().unwrap();
            assert!(
                CheckReport::all_pass(&reports),
                "unital rigidity failed for n={n} dim={dim}: {:?}",
                reports.iter().filter(|r| !r.pass).collect::<Vec<_>>()
            );
        }
        let c = ctx(2, 3, 1, 3);
        assert!(matches!(
            c.rigidity_check(),
            Err(UnitalError::RequiresEqualRanges)
        ));
    }

    #[test]
    fn unital_element_json_round_trips() {
        let c = ctx(2, 2, 2, 3);
        let x = UnitalElement::unit(q(3) / q(2)).plus(&UnitalElement::generator(1).scaled(&q(-2)));
        let v = x.to_json(c.label_space());
        assert_eq!(UnitalElement::from_json(&v, c.label_space()).unwrap(), x);
    }
}
