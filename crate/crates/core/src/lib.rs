//! Exact structural invariants of free Bogoljubov crossed products.
//!
//! Given a symbolic description of an orthogonal representation of the
//! integers (a list of eigenvalue atoms on the circle plus weakly mixing
//! summands), this crate computes presentations of the associated crossed
//! product as an amalgamated free product, free-dimension parameters,
//! spectral measure-class invariants, solidity/rigidity classifications,
//! and Isomorphic/Distinct/Unknown verdicts with re-checkable certificates.
//!
//! All arithmetic is exact: rationals are `num::BigRational`, irrational
//! rotation angles are opaque symbols assumed rationally independent, and
//! every computation is deterministic.

pub mod circle;
pub mod classify;
pub mod extent;
pub mod freedim;
pub mod freeprob;
pub mod parse;
pub mod presentation;
pub mod rep;
pub mod spectral;
pub mod words;

pub use extent::{ExtRational, Extent};
