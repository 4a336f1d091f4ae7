//! Truncated generating series with exact rational coefficients.
//!
//! A [`Series`] is a polynomial truncated at a fixed degree `D`: a
//! constant term plus coefficients for `x^1` through `x^D`. Arithmetic
//! is exact; operations on mismatched truncations are programming errors
//! and panic rather than silently re-truncating.
//!
//! The interesting entry points are the dimension series:
//!
//! * [`mag_dims`]: degreewise dimensions of the free algebra on one
//!   generator with one basic operation per arity in `S`, obtained by
//!   reverting `x - sum_{i in S} x^i`;
//! * [`magroot_dims`]: dimensions of the root-constrained suboperad,
//!   computed along two independent routes that must agree;
//! * [`koszul_check`]: the bivariate series identity tying the tree
//!   counts to their Koszul dual nilpotent counterpart.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::number::{parse_ratio, q_u, Q};
use crate::trees::{count_bivariate, AritySpec, TreeError};

/// Errors from series constructions.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    /// Composition `g(f)` needs `f` without constant term.
    #[error("inner series must have zero constant term")]
    NonzeroConstantTerm,
    /// Reversion needs a series of the form `x + higher order`.
    #[error("reversion needs constant term 0 and linear coefficient 1")]
    NotRevertible,
    /// A containment between arity sets failed.
    #[error(transparent)]
    Trees(#[from] TreeError),
    /// Two supposedly equivalent computations disagreed. This indicates a
    /// bug in the crate itself and must never fire.
    #[error("internal consistency failure: {0}")]
    Inconsistent(&'static str),
    /// Text or JSON that does not describe a series.
    #[error("cannot parse series: {0}")]
    Parse(String),
}

/// A series `c + a_1 x + ... + a_D x^D`, truncated at degree `D >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    trunc: usize,
    constant: Q,
    coeffs: Vec<Q>,
}

impl Series {
    /// The zero series truncated at `trunc`.
    pub fn zero(trunc: usize) -> Self {
        assert!(trunc >= 1, "truncation degree must be at least 1");
        Series {
            trunc,
            constant: Q::zero(),
            coeffs: vec![Q::zero(); trunc],
        }
    }

    /// The identity series `x`.
    pub fn x(trunc: usize) -> Self {
        let mut s = Series::zero(trunc);
        s.coeffs[0] = Q::one();
        s
    }

    /// A single term `c x^degree`; degree 0 sets the constant term.
    pub fn monomial(trunc: usize, degree: usize, c: Q) -> Self {
        let mut s = Series::zero(trunc);
        s.set_coeff(degree, c);
        s
    }

    /// Series with the given coefficients for `x^1 ..= x^len` and zero
    /// constant term.
    pub fn from_coeffs(coeffs: Vec<Q>) -> Self {
        assert!(!coeffs.is_empty(), "truncation degree must be at least 1");
        Series {
            trunc: coeffs.len(),
            constant: Q::zero(),
            coeffs,
        }
    }

    pub fn truncation(&self) -> usize {
        self.trunc
    }

    /// Coefficient of `x^n`; `n = 0` is the constant term.
    pub fn coeff(&self, n: usize) -> &Q {
        assert!(n <= self.trunc, "degree {n} beyond truncation {}", self.trunc);
        if n == 0 {
            &self.constant
        } else {
            &self.coeffs[n - 1]
        }
    }

    pub fn set_coeff(&mut self, n: usize, c: Q) {
        assert!(n <= self.trunc, "degree {n} beyond truncation {}", self.trunc);
        if n == 0 {
            self.constant = c;
        } else {
            self.coeffs[n - 1] = c;
        }
    }

    /// The coefficients of `x^1 ..= x^D`, in order.
    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.coeffs.iter().all(Q::is_zero)
    }

    /// Are all coefficients integers? Dimension series must satisfy this.
    pub fn is_integral(&self) -> bool {
        self.constant.is_integer() && self.coeffs.iter().all(Q::is_integer)
    }

    fn check_same_trunc(&self, other: &Series) {
        assert_eq!(
            self.trunc, other.trunc,
            "series truncations differ: {} vs {}",
            self.trunc, other.trunc
        );
    }

    pub fn add(&self, other: &Series) -> Series {
        self.check_same_trunc(other);
        let mut out = self.clone();
        out.constant += &other.constant;
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.check_same_trunc(other);
        let mut out = self.clone();
        out.constant -= &other.constant;
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Series {
        let mut out = self.clone();
        out.constant *= c;
        for a in out.coeffs.iter_mut() {
            *a *= c;
        }
        out
    }

    /// Product, truncated at the common truncation degree.
    pub fn multiply(&self, other: &Series) -> Series {
        self.check_same_trunc(other);
        let mut out = Series::zero(self.trunc);
        out.constant = &self.constant * &other.constant;
        for n in 1..=self.trunc {
            let mut acc = &self.constant * other.coeff(n) + self.coeff(n) * &other.constant;
            for i in 1..n {
                let a = self.coeff(i);
                if a.is_zero() {
                    continue;
                }
                acc += a * other.coeff(n - i);
            }
            out.coeffs[n - 1] = acc;
        }
        out
    }

    /// `k`-th power, truncated.
    pub fn pow(&self, k: usize) -> Series {
        let mut out = Series::monomial(self.trunc, 0, Q::one());
        for _ in 0..k {
            out = out.multiply(self);
        }
        out
    }

    /// Composition `self(inner)`; `inner` must have zero constant term so
    /// that the result is well defined degree by degree.
    pub fn compose(&self, inner: &Series) -> Result<Series, SeriesError> {
        self.check_same_trunc(inner);
        self.compose_upto(inner, self.trunc)
    }

    /// Composition keeping only degrees `<= bound`. Horner evaluation:
    /// `g(f) = c_0 + f (a_1 + f (a_2 + ...))`.
    fn compose_upto(&self, inner: &Series, bound: usize) -> Result<Series, SeriesError> {
        if !inner.constant.is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let mut acc = Series::zero(self.trunc);
        for n in (1..=bound.min(self.trunc)).rev() {
            acc.constant += self.coeff(n);
            acc = acc.multiply_upto(inner, bound);
        }
        acc.constant = self.constant.clone();
        Ok(acc)
    }

    /// Product keeping only degrees `<= bound`.
    fn multiply_upto(&self, other: &Series, bound: usize) -> Series {
        let mut out = self.multiply(other);
        for n in (bound + 1)..=self.trunc {
            out.coeffs[n - 1] = Q::zero();
        }
        out
    }

    /// Compositional inverse: the unique `f` with `self(f) = x`.
    ///
    /// Requires `self = x + higher order`. Solved degree by degree: with
    /// `f` known below degree `n`, the coefficient of `x^n` in
    /// `self(f)` is `f_n` plus terms involving only lower coefficients,
    /// so `f_n` is forced.
    pub fn reversion(&self) -> Result<Series, SeriesError> {
        if !self.constant.is_zero() || !self.coeffs[0].is_one() {
            return Err(SeriesError::NotRevertible);
        }
        let mut f = Series::x(self.trunc);
        for n in 2..=self.trunc {
            let partial = self.compose_upto(&f, n)?;
            f.coeffs[n - 1] = -partial.coeff(n);
        }
        Ok(f)
    }

    /// JSON object `{"D": trunc, "coeffs": ["a1", ..., "aD"]}`, with a
    /// `"constant"` field only when the constant term is nonzero.
    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self.coeffs.iter().map(|c| json!(c.to_string())).collect();
        let mut obj = json!({ "D": self.trunc, "coeffs": coeffs });
        if !self.constant.is_zero() {
            obj["constant"] = json!(self.constant.to_string());
        }
        obj
    }

    /// Inverse of [`Series::to_json`].
    pub fn from_json(v: &Value) -> Result<Series, SeriesError> {
        let bad = || SeriesError::Parse(v.to_string());
        let obj = v.as_object().ok_or_else(bad)?;
        let trunc = obj.get("D").and_then(Value::as_u64).ok_or_else(bad)? as usize;
        let raw = obj.get("coeffs").and_then(Value::as_array).ok_or_else(bad)?;
        if trunc != raw.len() || trunc == 0 {
            return Err(bad());
        }
        let coeffs = raw
            .iter()
            .map(|c| c.as_str().and_then(parse_ratio).ok_or_else(bad))
            .collect::<Result<Vec<_>, _>>()?;
        let mut s = Series::from_coeffs(coeffs);
        if let Some(c) = obj.get("constant") {
            s.constant = c.as_str().and_then(parse_ratio).ok_or_else(bad)?;
        }
        Ok(s)
    }

    /// CSV rows `n,coefficient` for `n = 1 ..= D`, with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,coefficient\n");
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, c));
        }
        out
    }
}

/// Dimensions of the free one-generator algebra with one basic operation
/// per arity in `s`, as the series `sum_n dim_n x^n` up to degree `d`.
///
/// The dimension in degree `n` counts planar reduced trees with `n`
/// leaves and vertex arities in `s`, so this is the compositional inverse
/// of `x - sum_{i in s} x^i`.
pub fn mag_dims(s: &AritySpec, d: usize) -> Series {
    let mut g = Series::x(d);
    for i in s.materialize(d as u32) {
        g.set_coeff(i as usize, -Q::one());
    }
    g.reversion()
        .expect("x minus higher-order terms is revertible")
}

/// Dimensions of the root-constrained suboperad: the identity plus all
/// trees over `s` whose root arity lies outside `t`.
///
/// Two independent formulas compute it, and both are evaluated:
///
/// * directly, `x + sum_{k in s \ t} f^k` with `f = mag_dims(s)`;
/// * as the composite `(x - sum_{i in t} x^i)(f)`.
///
/// Their agreement is asserted on every call; a mismatch is reported as
/// an internal error rather than returning either value.
pub fn magroot_dims(s: &AritySpec, t: &AritySpec, d: usize) -> Result<Series, SeriesError> {
    if !t.is_subset_of(s) {
        return Err(TreeError::NotSubset(t.to_string(), s.to_string()).into());
    }
    let f = mag_dims(s, d);

    let mut direct = Series::x(d);
    let mut power = Series::monomial(d, 0, Q::one());
    let mut power_exp = 0usize;
    for k in s.difference_upto(t, d as u32) {
        for _ in power_exp..k as usize {
            power = power.multiply(&f);
        }
        power_exp = k as usize;
        direct = direct.add(&power);
    }

    let mut outer = Series::x(d);
    for i in t.materialize(d as u32) {
        outer.set_coeff(i as usize, -Q::one());
    }
    let composed = outer.compose(&f)?;

    if direct != composed {
        return Err(SeriesError::Inconsistent(
            "the two root-constrained dimension formulas disagree",
        ));
    }
    Ok(direct)
}

/// A bivariate polynomial in `x` (degree, up to a truncation) and `z`
/// (weight), with exact coefficients.
///
/// Used for counts refined by the number of internal vertices: the
/// coefficient of `x^n z^d` counts degree-`n` objects of weight `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiSeries {
    trunc: usize,
    terms: BTreeMap<(usize, usize), Q>,
}

impl BiSeries {
    pub fn zero(trunc: usize) -> Self {
        assert!(trunc >= 1);
        BiSeries {
            trunc,
            terms: BTreeMap::new(),
        }
    }

    /// The plain variable `x`.
    pub fn x(trunc: usize) -> Self {
        let mut s = BiSeries::zero(trunc);
        s.add_term(1, 0, Q::one());
        s
    }

    pub fn truncation(&self) -> usize {
        self.trunc
    }

    /// Add `c x^n z^d`, dropping terms beyond the `x`-truncation and
    /// entries that cancel to zero.
    pub fn add_term(&mut self, n: usize, d: usize, c: Q) {
        if n > self.trunc || c.is_zero() {
            return;
        }
        let entry = self.terms.entry((n, d)).or_insert_with(Q::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(n, d));
        }
    }

    pub fn coeff(&self, n: usize, d: usize) -> Q {
        self.terms.get(&(n, d)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &Q)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &BiSeries) -> BiSeries {
        assert_eq!(self.trunc, other.trunc);
        let mut out = self.clone();
        for (&(n, d), c) in &other.terms {
            out.add_term(n, d, c.clone());
        }
        out
    }

    pub fn multiply(&self, other: &BiSeries) -> BiSeries {
        assert_eq!(self.trunc, other.trunc);
        let mut out = BiSeries::zero(self.trunc);
        for (&(n1, d1), c1) in &self.terms {
            for (&(n2, d2), c2) in &other.terms {
                if n1 + n2 > self.trunc {
                    break;
                }
                out.add_term(n1 + n2, d1 + d2, c1 * c2);
            }
        }
        out
    }

    /// Multiply by `-z`: shift every weight by one and negate.
    pub fn times_neg_z(&self) -> BiSeries {
        let mut out = BiSeries::zero(self.trunc);
        for (&(n, d), c) in &self.terms {
            out.add_term(n, d + 1, -c.clone());
        }
        out
    }

    /// Is this exactly the variable `x`?
    pub fn is_x(&self) -> bool {
        self.terms.len() == 1 && self.coeff(1, 0).is_one()
    }
}

/// Tree counts refined by internal vertex count, as a bivariate series:
/// the coefficient of `x^n z^d` counts degree-`n` trees over `s` with
/// `d` vertices.
pub fn tree_dims_bivariate(s: &AritySpec, d: usize) -> BiSeries {
    let mut out = BiSeries::zero(d);
    for n in 1..=d {
        for (weight, count) in count_bivariate(s, n) {
            out.add_term(n, weight, q_u(count));
        }
    }
    out
}

/// Bivariate dimension series of the dual nilpotent structure: `x` plus
/// one weight-1 term `z x^n` per arity `n` in `s`.
///
/// In the dual, every composite of two or more basic operations
/// vanishes, so nothing exists beyond weight 1.
pub fn nil_dims(s: &AritySpec, d: usize) -> BiSeries {
    let mut out = BiSeries::x(d);
    for n in s.materialize(d as u32) {
        out.add_term(n as usize, 1, Q::one());
    }
    out
}

/// Koszul duality test: substitute the tree series into the dual
/// nilpotent series with `z` negated and check the composite collapses
/// to `x` through degree `d`.
///
/// Concretely, with `f = tree_dims_bivariate(s)` and
/// `g(x, z) = nil_dims(s)`, this evaluates `g(f(x, z), -z)` exactly and
/// compares with `x`.
pub fn koszul_check(s: &AritySpec, d: usize) -> bool {
    let f = tree_dims_bivariate(s, d);
    let g = nil_dims(s, d);

    let mut result = BiSeries::zero(d);
    // Powers of f on demand; g's terms come in ascending x-degree.
    let mut power = f.clone();
    let mut power_exp = 1usize;
    for (&(n, weight), c) in g.terms() {
        for _ in power_exp..n {
            power = power.multiply(&f);
        }
        power_exp = power_exp.max(n);
        let mut contribution = power.clone();
        for _ in 0..weight {
            contribution = contribution.times_neg_z();
        }
        // Scale by the dual dimension (always 1 here, kept for generality).
        for (&(tn, td), tc) in contribution.terms.iter() {
            result.add_term(tn, td, tc * c);
        }
    }
    result.is_x()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::q;

    fn int_series(trunc: usize, coeffs: &[i64]) -> Series {
        let mut s = Series::zero(trunc);
        for (i, &c) in coeffs.iter().enumerate() {
            s.set_coeff(i + 1, q(c));
        }
        s
    }

    #[test]
    fn multiply_matches_hand_expansion() {
        // (x + x^2)^2 = x^2 + 2x^3 + x^4.
        let f = int_series(4, &[1, 1]);
        assert_eq!(f.multiply(&f), int_series(4, &[0, 1, 2, 1]));
    }

    #[test]
    fn compose_with_identity_is_identity() {
        let f = int_series(5, &[1, 2, 0, 3, 1]);
        let x = Series::x(5);
        assert_eq!(x.compose(&f).unwrap(), f);
        assert_eq!(f.compose(&x).unwrap(), f);
    }

    #[test]
    fn compose_cancels_to_x_in_low_degree() {
        // (x - x^2) composed with x + x^2 + 2x^3 + 5x^4 is x through
        // degree 4.
        let g = int_series(4, &[1, -1]);
        let f = int_series(4, &[1, 1, 2, 5]);
        assert_eq!(g.compose(&f).unwrap(), Series::x(4));
    }

    #[test]
    fn compose_rejects_constant_terms() {
        let mut f = Series::x(3);
        f.set_coeff(0, q(1));
        assert_eq!(
            Series::x(3).compose(&f),
            Err(SeriesError::NonzeroConstantTerm)
        );
    }

    #[test]
    fn reversion_inverts_composition_both_ways() {
        let g = int_series(8, &[1, -1, -1, 2, 0, -3, 1, 5]);
        let f = g.reversion().unwrap();
        assert_eq!(g.compose(&f).unwrap(), Series::x(8));
        assert_eq!(f.compose(&g).unwrap(), Series::x(8));
    }

    #[test]
    fn reversion_rejects_bad_leading_terms() {
        assert_eq!(
            int_series(3, &[2, 1]).reversion(),
            Err(SeriesError::NotRevertible)
        );
        let mut g = Series::x(3);
        g.set_coeff(0, q(1));
        assert_eq!(g.reversion(), Err(SeriesError::NotRevertible));
    }

    #[test]
    fn binary_dimensions_are_catalan() {
        let s = AritySpec::finite([2]).unwrap();
        assert_eq!(mag_dims(&s, 8), int_series(8, &[1, 1, 2, 5, 14, 42, 132, 429]));
    }

    #[test]
    fn all_arities_dimensions_are_super_catalan() {
        let s = AritySpec::all();
        assert_eq!(
            mag_dims(&s, 10),
            int_series(10, &[1, 1, 3, 11, 45, 197, 903, 4279, 20793, 103049])
        );
    }

    /// Independent route to the Super-Catalan numbers: the closed form
    /// `(1 + x - sqrt(1 - 6x + x^2)) / 4`, with the square root expanded
    /// by exact rational arithmetic.
    #[test]
    fn super_catalan_closed_form_agrees() {
        let d = 10;
        // sqrt(1 - 6x + x^2) via s_n = (u_n - sum s_i s_{n-i}) / (2 s_0).
        let mut u = Series::monomial(d, 0, q(1));
        u.set_coeff(1, q(-6));
        u.set_coeff(2, q(1));
        let mut s = Series::monomial(d, 0, q(1));
        for n in 1..=d {
            let mut acc = u.coeff(n).clone();
            for i in 1..n {
                acc -= s.coeff(i) * s.coeff(n - i);
            }
            s.set_coeff(n, acc / q(2));
        }
        assert_eq!(s.multiply(&s), u);

        let mut closed = Series::monomial(d, 0, q(1)).add(&Series::x(d)).sub(&s);
        closed = closed.scale(&(q(1) / q(4)));
        assert_eq!(closed.coeff(0), &q(0));
        assert_eq!(closed, mag_dims(&AritySpec::all(), d));
    }

    #[test]
    fn magroot_matches_published_low_degree_values() {
        let s = AritySpec::all();
        let t3 = AritySpec::from_min(3).unwrap();
        assert_eq!(
            magroot_dims(&s, &t3, 7).unwrap(),
            int_series(7, &[1, 1, 2, 7, 28, 121, 550])
        );
        let odd = AritySpec::odd_from(3).unwrap();
        assert_eq!(
            magroot_dims(&s, &odd, 7).unwrap(),
            int_series(7, &[1, 1, 2, 8, 32, 140, 640])
        );
    }

    #[test]
    fn magroot_with_equal_sets_is_x() {
        let s = AritySpec::finite([2, 3]).unwrap();
        assert_eq!(magroot_dims(&s, &s, 6).unwrap(), int_series(6, &[1, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn magroot_rejects_non_subset() {
        let s = AritySpec::finite([2]).unwrap();
        let t = AritySpec::finite([2, 3]).unwrap();
        assert!(magroot_dims(&s, &t, 4).is_err());
    }

    #[test]
    fn series_json_and_csv_round_trip() {
        let f = int_series(4, &[1, 0, 3, 7]);
        assert_eq!(Series::from_json(&f.to_json()).unwrap(), f);
        assert_eq!(f.to_csv(), "n,coefficient\n1,1\n2,0\n3,3\n4,7\n");
        let mut g = f.clone();
        g.set_coeff(0, q(5) / q(2));
        assert_eq!(Series::from_json(&g.to_json()).unwrap(), g);
        assert!(Series::from_json(&json!({"D": 2, "coeffs": ["1"]})).is_err());
    }

    #[test]
    fn bivariate_tree_counts_sum_to_plain_counts() {
        let s = AritySpec::all();
        let bi = tree_dims_bivariate(&s, 7);
        let plain = mag_dims(&s, 7);
        for n in 1..=7 {
            let total: Q = (0..=7).map(|w| bi.coeff(n, w)).sum();
            assert_eq!(&total, plain.coeff(n));
        }
        // Weight is concentrated at d = n - 1 exactly for binary trees.
        let binary = tree_dims_bivariate(&AritySpec::finite([2]).unwrap(), 6);
        for n in 1..=6 {
            assert!(!binary.coeff(n, n - 1).is_zero());
            for w in 0..n.saturating_sub(1) {
                assert!(binary.coeff(n, w).is_zero());
            }
        }
    }

    #[test]
    fn koszul_identity_holds_for_small_sets() {
        for s in [
            AritySpec::finite([2]).unwrap(),
            AritySpec::finite([3]).unwrap(),
            AritySpec::finite([2, 3]).unwrap(),
            AritySpec::all(),
        ] {
            assert!(koszul_check(&s, 6), "koszul identity failed for {s}");
        }
    }

    #[test]
    fn koszul_identity_detects_a_wrong_dual() {
        // Substituting into the dual of a different arity set must not
        // collapse to x.
        let f = tree_dims_bivariate(&AritySpec::finite([2]).unwrap(), 6);
        let g = nil_dims(&AritySpec::finite([2, 3]).unwrap(), 6);
        let mut result = BiSeries::zero(6);
        let mut power = f.clone();
        let mut power_exp = 1usize;
        for (&(n, weight), c) in g.terms() {
            for _ in power_exp..n {
                power = power.multiply(&f);
            }
            power_exp = power_exp.max(n);
            let mut contribution = power.clone();
            for _ in 0..weight {
                contribution = contribution.times_neg_z();
            }
            for (&(tn, td), tc) in contribution.terms.iter() {
                result.add_term(tn, td, tc * c);
            }
        }
        assert!(!result.is_x());
    }
}
