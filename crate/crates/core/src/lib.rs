//! Exact combinatorics of partial magmatic (co)algebras on planar reduced trees.
//!
//! A planar reduced tree has internal vertices of arity at least 2; a set
//! `S` of allowed arities cuts out the trees whose vertices all carry
//! arities from `S`. Linear spans of such trees, with leaves decorated by
//! basis labels, form the free `S`-magmatic algebra on a finite-dimensional
//! space. The crate builds that algebra together with its ungrafting
//! coalgebra structure and everything the two induce jointly:
//!
//! * [`trees`]: the trees themselves, with grafting, ungrafting, plugging
//!   and enumeration by leaf count;
//! * [`series`]: generating series of the dimension counts, including the
//!   reversion formula, the root-constrained suboperad counts and the
//!   bivariate Koszul duality identity;
//! * [`algebra`]: free bialgebra elements, the operations and
//!   co-operations, compatibility checking, primitives and the coradical
//!   style filtration;
//! * [`structure`]: degreewise linear maps, convolution products, the
//!   idempotent splitting a bialgebra onto its primitives when the two
//!   arity sets agree, and the tree-composition basis realizing the
//!   triangular decomposition when they differ;
//! * [`unital`]: the unital variant for interval arity sets, where the
//!   unit absorbs arguments and co-operations produce empty slots.
//!
//! Every scalar is an arbitrary-precision rational ([`Q`]); there is no
//! floating point anywhere, so every check the crate performs is exact.

pub mod algebra;
pub mod linalg;
mod number;
pub mod series;
pub mod structure;
pub mod trees;
pub mod unital;

pub use number::{parse_ratio, Q};
