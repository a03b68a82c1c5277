//! Combinatorial W-structures of 4-dimensional graph-manifolds.
//!
//! A graph-manifold is described here by a connected graph whose vertices
//! are blocks (trivial torus bundles over surfaces with boundary) and whose
//! edges carry 3x3 integer gluing matrices between boundary-torus homology
//! lattices. The crate computes the intersection invariants of such
//! structures exactly, decides orthogonality by the charge-map criterion,
//! and performs the two constructions that normalize a structure: the
//! finite-cover unwinding of intersection data and the re-gluing to
//! signed-permutation form.
//!
//! All arithmetic is exact (arbitrary-precision integers and rationals).
//! Every value is immutable after construction and every operation is a
//! pure function, so everything is safe to share across threads.

pub mod charge;
pub mod generators;
pub mod invariants;
pub mod json;
pub mod lattice;
pub mod matrix;
pub mod report;
pub mod rng;
pub mod transform;
pub mod wstructure;
