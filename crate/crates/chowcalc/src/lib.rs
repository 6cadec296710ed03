//! Exact symbolic intersection theory for projective hypersurfaces and
//! Calabi-Yau complete intersections.
//!
//! The crate computes, over exact rationals, the ingredients of diagonal
//! decompositions in the Chow rings of a smooth variety X cut out by
//! hypersurfaces in projective space:
//!
//! - [`ring`]: truncated multivariate polynomial rings modelling
//!   CH*(P^m x ... x P^m), plus formal power series utilities (Bernoulli
//!   numbers, exponentials, the geometric-sum ratio series).
//! - [`chern`]: Chern-class machinery for split and non-split bundle data,
//!   the degree-n polynomial Q(H1,H2) attached to a Calabi-Yau complete
//!   intersection, and its leading coefficients.
//! - [`schubert`]: the Chow ring of the Grassmannian G(2,N) of lines, fiber
//!   towers of the universal line, vector-bundle top Chern classes on those
//!   towers, and pushforwards to products of projective spaces.
//! - [`partitions`]: set partitions of {1..r} as restricted-growth strings,
//!   their composition, tuple pullback, and surjection counting.
//! - [`diagonal`]: the subring of CH*(X^r) spanned by diagonal pushforwards
//!   of powers of the hyperplane class, with its rewrite rule, projections,
//!   classification into decomposition buckets, and a symbolic
//!   correspondence calculus.
//! - [`decomp`]: the end-to-end pipelines that assemble and cross-check the
//!   diagonal decompositions for both geometries.
//! - [`cli`]: the command-line surface with deterministic JSON reports.

pub mod chern;
pub mod cli;
pub mod decomp;
pub mod diagonal;
pub mod partitions;
pub mod ring;
pub mod schubert;
