//! Combinatorial W-structure of a 4-dimensional graph-manifold.
//!
//! A manifold is a connected graph whose vertices are blocks (trivial torus
//! bundles over a surface with boundary) and whose edges carry 3x3 integer
//! gluing matrices between the boundary-torus homology lattices L_w = Z^3.
//!
//! Convention C1, pinned for the whole crate: for a directed edge `w` the
//! columns of its gluing matrix are the coordinates of the far basis
//! (z_{-w}, f1_{-w}, f2_{-w}) in the ordered near basis (z_w, f1_w, f2_w).
//! The near basis is declared positively oriented; a valid gluing has
//! determinant -1, which encodes that the two sides carry opposite
//! orientations. One matrix is stored per edge (for the designated
//! direction); the reverse direction is always the exact integer inverse,
//! never stored, so inverse-consistency holds by construction.

use crate::lattice::{hnf, Lattice};
use crate::matrix::IntMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("gluing matrix is not unimodular (det {0})")]
    NotUnimodular(BigInt),
    #[error("invalid basis change: {0}")]
    InvalidBasisChange(String),
    #[error("unknown vertex id {0:?}")]
    UnknownVertex(String),
    #[error("unknown edge id {0:?}")]
    UnknownEdge(String),
}

/// One block: a trivial T^2-bundle over a genus-g surface with boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    pub id: String,
    pub genus: u32,
    pub boundary_count: u32,
}

impl BlockSpec {
    /// Euler characteristic 2 - 2g - b of the base surface.
    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * i64::from(self.genus) - i64::from(self.boundary_count)
    }
}

/// 3x3 integer gluing matrix with the block reading
/// `[[a, b],[c, d]]`: scalar a, row b (length 2), column c, 2x2 block d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingMatrix {
    m: IntMatrix,
}

impl GluingMatrix {
    pub fn new(m: IntMatrix) -> Self {
        assert!(m.rows() == 3 && m.cols() == 3, "gluing matrix must be 3x3");
        GluingMatrix { m }
    }

    pub fn from_rows_i64(rows: &[Vec<i64>; 3]) -> Self {
        Self::new(IntMatrix::from_rows_i64(rows))
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.m
    }

    pub fn a(&self) -> &BigInt {
        self.m.get(0, 0)
    }

    /// The row (m[0][1], m[0][2]): z-components of the far fiber vectors.
    pub fn b_row(&self) -> [BigInt; 2] {
        [self.m.get(0, 1).clone(), self.m.get(0, 2).clone()]
    }

    pub fn c_col(&self) -> [BigInt; 2] {
        [self.m.get(1, 0).clone(), self.m.get(2, 0).clone()]
    }

    /// Lower-right 2x2 block: the fiber-to-fiber part.
    pub fn d_block(&self) -> IntMatrix {
        IntMatrix::from_fn(2, 2, |r, c| self.m.get(r + 1, c + 1).clone())
    }

    pub fn det(&self) -> BigInt {
        self.m.det()
    }

    pub fn b_row_is_zero(&self) -> bool {
        self.m.get(0, 1).is_zero() && self.m.get(0, 2).is_zero()
    }

    /// Exact integer inverse: the gluing matrix of the reverse direction.
    pub fn reverse(&self) -> Result<GluingMatrix, StructureError> {
        match self.m.inverse_unimodular() {
            Some(inv) => Ok(GluingMatrix::new(inv)),
            None => Err(StructureError::NotUnimodular(self.det())),
        }
    }
}

/// One edge of the graph together with its stored (designated-direction)
/// gluing matrix. Boundary slots pair edge ends to boundary components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSpec {
    pub id: String,
    pub from: (String, u32),
    pub to: (String, u32),
    pub gluing: GluingMatrix,
}

/// A directed edge: an edge index plus a direction flag. `reversed = false`
/// is the stored from->to direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DirectedEdge {
    pub edge: usize,
    pub reversed: bool,
}

impl DirectedEdge {
    pub fn forward(edge: usize) -> Self {
        DirectedEdge { edge, reversed: false }
    }

    pub fn opposite(self) -> Self {
        DirectedEdge {
            edge: self.edge,
            reversed: !self.reversed,
        }
    }
}

/// The whole combinatorial object. Immutable after construction; every
/// operation on it is a pure function, so values are safe to share across
/// threads.
#[derive(Clone, Debug)]
pub struct GraphManifold {
    blocks: Vec<BlockSpec>,
    edges: Vec<EdgeSpec>,
    meta: Option<serde_json::Value>,
    vertex_ids: BTreeMap<String, usize>,
}

impl GraphManifold {
    pub fn new(blocks: Vec<BlockSpec>, edges: Vec<EdgeSpec>) -> Self {
        let vertex_ids = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.clone(), i))
            .collect();
        GraphManifold {
            blocks,
            edges,
            meta: None,
            vertex_ids,
        }
    }

    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn meta(&self) -> Option<&serde_json::Value> {
        self.meta.as_ref()
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_ids.get(id).copied()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Same graph, new gluing matrices (one per edge, stored direction).
    pub fn with_gluings(&self, gluings: Vec<GluingMatrix>) -> GraphManifold {
        assert_eq!(gluings.len(), self.edges.len());
        let edges = self
            .edges
            .iter()
            .zip(gluings)
            .map(|(e, g)| EdgeSpec { gluing: g, ..e.clone() })
            .collect();
        GraphManifold::new(self.blocks.clone(), edges)
    }

    /// Tail vertex of a directed edge (the side whose lattice L_w the
    /// matrix is written in).
    pub fn tail(&self, w: DirectedEdge) -> usize {
        let e = &self.edges[w.edge];
        let id = if w.reversed { &e.to.0 } else { &e.from.0 };
        self.vertex_index(id)
            .unwrap_or_else(|| panic!("unresolved vertex {id:?}; validate first"))
    }

    pub fn head(&self, w: DirectedEdge) -> usize {
        self.tail(w.opposite())
    }

    /// All directed edges leaving a vertex, in deterministic order. A
    /// self-loop contributes both directions.
    pub fn boundary_of(&self, v: usize) -> Vec<DirectedEdge> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if self.vertex_index(&e.from.0) == Some(v) {
                out.push(DirectedEdge::forward(i));
            }
            if self.vertex_index(&e.to.0) == Some(v) {
                out.push(DirectedEdge::forward(i).opposite());
            }
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.boundary_of(v).len()
    }

    /// Gluing matrix of a directed edge under convention C1.
    pub fn gluing_of(&self, w: DirectedEdge) -> Result<IntMatrix, StructureError> {
        let stored = &self.edges[w.edge].gluing;
        if w.reversed {
            Ok(stored.reverse()?.matrix().clone())
        } else {
            Ok(stored.matrix().clone())
        }
    }

    pub fn directed_edge_name(&self, w: DirectedEdge) -> String {
        if w.reversed {
            format!("-{}", self.edges[w.edge].id)
        } else {
            self.edges[w.edge].id.clone()
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.blocks.is_empty() {
            violations.push(Violation::Empty);
            return ValidationReport { violations };
        }
        let mut seen = BTreeMap::new();
        for b in &self.blocks {
            if seen.insert(b.id.clone(), ()).is_some() {
                violations.push(Violation::DuplicateBlockId(b.id.clone()));
            }
            if b.boundary_count == 0 || b.euler_characteristic() >= 0 {
                violations.push(Violation::EulerCharacteristic {
                    vertex: b.id.clone(),
                    chi: b.euler_characteristic(),
                });
            }
        }
        let mut edge_ids = BTreeMap::new();
        let mut slot_use: BTreeMap<(usize, u32), usize> = BTreeMap::new();
        for e in &self.edges {
            if edge_ids.insert(e.id.clone(), ()).is_some() {
                violations.push(Violation::DuplicateEdgeId(e.id.clone()));
            }
            for (vid, slot) in [&e.from, &e.to] {
                match self.vertex_index(vid) {
                    None => violations.push(Violation::UnknownVertex {
                        edge: e.id.clone(),
                        vertex: vid.clone(),
                    }),
                    Some(v) => {
                        if *slot >= self.blocks[v].boundary_count {
                            violations.push(Violation::BadSlot {
                                edge: e.id.clone(),
                                vertex: vid.clone(),
                                slot: *slot,
                            });
                        } else {
                            *slot_use.entry((v, *slot)).or_insert(0) += 1;
                        }
                    }
                }
            }
            let det = e.gluing.det();
            if det != BigInt::from(-1) {
                violations.push(Violation::DeterminantNotMinusOne {
                    edge: e.id.clone(),
                    det,
                });
            }
            if e.gluing.b_row_is_zero() {
                violations.push(Violation::FiberTorusIdentified { edge: e.id.clone() });
            }
        }
        for (v, b) in self.blocks.iter().enumerate() {
            for slot in 0..b.boundary_count {
                match slot_use.get(&(v, slot)).copied().unwrap_or(0) {
                    0 => violations.push(Violation::SlotUnused {
                        vertex: b.id.clone(),
                        slot,
                    }),
                    1 => {}
                    _ => violations.push(Violation::SlotReused {
                        vertex: b.id.clone(),
                        slot,
                    }),
                }
            }
        }
        if !self.is_connected() {
            violations.push(Violation::Disconnected);
        }
        ValidationReport { violations }
    }

    fn is_connected(&self) -> bool {
        if self.blocks.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.blocks.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                if let (Some(a), Some(b)) =
                    (self.vertex_index(&e.from.0), self.vertex_index(&e.to.0))
                {
                    for (x, y) in [(a, b), (b, a)] {
                        if x == v && !seen[y] {
                            seen[y] = true;
                            stack.push(y);
                        }
                    }
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty,
    DuplicateBlockId(String),
    DuplicateEdgeId(String),
    UnknownVertex { edge: String, vertex: String },
    BadSlot { edge: String, vertex: String, slot: u32 },
    SlotUnused { vertex: String, slot: u32 },
    SlotReused { vertex: String, slot: u32 },
    /// chi >= 0 means the base surface is a disk, annulus or closed surface,
    /// none of which is allowed as a block base.
    EulerCharacteristic { vertex: String, chi: i64 },
    DeterminantNotMinusOne { edge: String, det: BigInt },
    /// Zero b-row: the gluing identifies the two fiber-torus classes.
    FiberTorusIdentified { edge: String },
    Disconnected,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "manifold has no blocks"),
            Violation::DuplicateBlockId(id) => write!(f, "duplicate block id {id:?}"),
            Violation::DuplicateEdgeId(id) => write!(f, "duplicate edge id {id:?}"),
            Violation::UnknownVertex { edge, vertex } => {
                write!(f, "edge {edge:?} references unknown vertex {vertex:?}")
            }
            Violation::BadSlot { edge, vertex, slot } => {
                write!(f, "edge {edge:?} uses slot {slot} outside the boundary of {vertex:?}")
            }
            Violation::SlotUnused { vertex, slot } => {
                write!(f, "boundary slot {slot} of {vertex:?} is not glued")
            }
            Violation::SlotReused { vertex, slot } => {
                write!(f, "boundary slot {slot} of {vertex:?} is glued more than once")
            }
            Violation::EulerCharacteristic { vertex, chi } => {
                write!(f, "block {vertex:?} has Euler characteristic {chi} >= 0 (disk/annulus excluded)")
            }
            Violation::DeterminantNotMinusOne { edge, det } => {
                write!(f, "edge {edge:?} gluing has determinant {det}, expected -1")
            }
            Violation::FiberTorusIdentified { edge } => {
                write!(f, "edge {edge:?} gluing identifies the fiber tori (zero b-row)")
            }
            Violation::Disconnected => write!(f, "graph is not connected"),
        }
    }
}

/// Validation outcome; the empty report means the manifold is valid.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "violation: {v}")?;
            }
            Ok(())
        }
    }
}

/// Per-vertex part of a Waldhausen basis change: a sign and a GL(2,Z) fiber
/// transformation, subject to epsilon * det(sigma) = 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexChange {
    pub epsilon: BigInt,
    pub sigma: IntMatrix,
}

impl VertexChange {
    pub fn identity() -> Self {
        VertexChange {
            epsilon: BigInt::one(),
            sigma: IntMatrix::identity(2),
        }
    }
}

/// A Waldhausen basis change: per vertex (epsilon, sigma), per directed edge
/// a fiber shift n_w, with the per-vertex constraint sum_{w in dv} n_w = 0.
/// Missing entries default to the identity / zero shift.
#[derive(Clone, Debug, Default)]
pub struct BasisChange {
    pub vertices: BTreeMap<String, VertexChange>,
    /// Keyed by (edge id, reversed flag).
    pub shifts: BTreeMap<(String, bool), [BigInt; 2]>,
}

impl BasisChange {
    pub fn identity() -> Self {
        BasisChange::default()
    }

    pub fn vertex_change(&self, id: &str) -> VertexChange {
        self.vertices.get(id).cloned().unwrap_or_else(VertexChange::identity)
    }

    pub fn shift(&self, edge_id: &str, reversed: bool) -> [BigInt; 2] {
        self.shifts
            .get(&(edge_id.to_string(), reversed))
            .cloned()
            .unwrap_or([BigInt::zero(), BigInt::zero()])
    }

    /// The 3x3 matrix of the change at a directed edge: block lower
    /// triangular with epsilon in the corner, the shift in the first column
    /// and sigma in the fiber block.
    pub fn matrix_for(&self, g: &GraphManifold, w: DirectedEdge) -> IntMatrix {
        let v = g.tail(w);
        let vc = self.vertex_change(&g.blocks()[v].id);
        let n = self.shift(&g.edges()[w.edge].id, w.reversed);
        let mut h = IntMatrix::zero(3, 3);
        h.set(0, 0, vc.epsilon.clone());
        h.set(1, 0, n[0].clone());
        h.set(2, 0, n[1].clone());
        for r in 0..2 {
            for c in 0..2 {
                h.set(r + 1, c + 1, vc.sigma.get(r, c).clone());
            }
        }
        h
    }

    /// Checks the group conditions against a manifold: epsilon and sigma
    /// orientation-compatible at every vertex, shifts summing to zero over
    /// each vertex boundary.
    pub fn check(&self, g: &GraphManifold) -> Result<(), StructureError> {
        for (id, vc) in &self.vertices {
            if g.vertex_index(id).is_none() {
                return Err(StructureError::UnknownVertex(id.clone()));
            }
            if vc.epsilon.abs() != BigInt::one() {
                return Err(StructureError::InvalidBasisChange(format!(
                    "epsilon at {id:?} must be +1 or -1"
                )));
            }
            if &vc.epsilon * vc.sigma.det() != BigInt::one() {
                return Err(StructureError::InvalidBasisChange(format!(
                    "epsilon * det(sigma) != 1 at vertex {id:?}"
                )));
            }
        }
        for (eid, _) in self.shifts.keys() {
            if g.edge_index(eid).is_none() {
                return Err(StructureError::UnknownEdge(eid.clone()));
            }
        }
        for (v, b) in g.blocks().iter().enumerate() {
            let mut sum = [BigInt::zero(), BigInt::zero()];
            for w in g.boundary_of(v) {
                let n = self.shift(&g.edges()[w.edge].id, w.reversed);
                sum[0] += &n[0];
                sum[1] += &n[1];
            }
            if !sum[0].is_zero() || !sum[1].is_zero() {
                return Err(StructureError::InvalidBasisChange(format!(
                    "shifts at vertex {:?} sum to ({}, {}), expected zero",
                    b.id, sum[0], sum[1]
                )));
            }
        }
        Ok(())
    }

    /// Composition: applying `self` first, then `other`.
    pub fn compose(&self, g: &GraphManifold, other: &BasisChange) -> BasisChange {
        let mut vertices = BTreeMap::new();
        for b in g.blocks() {
            let a = self.vertex_change(&b.id);
            let c = other.vertex_change(&b.id);
            vertices.insert(
                b.id.clone(),
                VertexChange {
                    epsilon: &a.epsilon * &c.epsilon,
                    sigma: a.sigma.mul(&c.sigma),
                },
            );
        }
        let mut shifts = BTreeMap::new();
        for (i, e) in g.edges().iter().enumerate() {
            for reversed in [false, true] {
                let w = DirectedEdge { edge: i, reversed };
                let h = self.matrix_for(g, w).mul(&other.matrix_for(g, w));
                shifts.insert(
                    (e.id.clone(), reversed),
                    [h.get(1, 0).clone(), h.get(2, 0).clone()],
                );
            }
        }
        BasisChange { vertices, shifts }
    }
}

/// Rewrites every gluing matrix in the changed bases: g_w becomes
/// h_w^{-1} g_w h_{-w}. Applying a change and then its inverse is the
/// identity, and the result is again a valid manifold.
pub fn apply_basis_change(
    g: &GraphManifold,
    h: &BasisChange,
) -> Result<GraphManifold, StructureError> {
    h.check(g)?;
    let mut gluings = Vec::with_capacity(g.edges().len());
    for (i, e) in g.edges().iter().enumerate() {
        let w = DirectedEdge::forward(i);
        let hw = h.matrix_for(g, w);
        let hmw = h.matrix_for(g, w.opposite());
        let hw_inv = hw.inverse_unimodular().ok_or_else(|| {
            StructureError::InvalidBasisChange(format!(
                "change at edge {:?} is not unimodular",
                e.id
            ))
        })?;
        gluings.push(GluingMatrix::new(hw_inv.mul(e.gluing.matrix()).mul(&hmw)));
    }
    Ok(g.with_gluings(gluings))
}

/// Near-side fiber lattice F_w (always the coordinate plane z = 0) and the
/// far-side fiber lattice F_{-w} (the column span of the two fiber columns
/// of the gluing matrix), both in L_w coordinates and both saturated.
pub fn fiber_lattice_at(
    g: &GraphManifold,
    w: DirectedEdge,
) -> Result<(Lattice, Lattice), StructureError> {
    let m = g.gluing_of(w)?;
    Ok((near_fiber(), far_fiber_of_matrix(&m)))
}

pub fn near_fiber() -> Lattice {
    Lattice::from_rows_i64(3, &[vec![0, 1, 0], vec![0, 0, 1]])
}

pub fn far_fiber_of_matrix(m: &IntMatrix) -> Lattice {
    hnf(&IntMatrix::from_row_vecs(vec![m.col(1), m.col(2)]))
}

/// True when the matrix has exactly one entry of absolute value 1 in every
/// row and column and zeros elsewhere.
pub fn is_signed_permutation(m: &IntMatrix) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.rows();
    let mut col_used = vec![false; n];
    for r in 0..n {
        let mut found = None;
        for c in 0..n {
            let v = m.get(r, c);
            if v.is_zero() {
                continue;
            }
            if !v.abs().is_one() || found.is_some() {
                return false;
            }
            found = Some(c);
        }
        match found {
            Some(c) if !col_used[c] => col_used[c] = true,
            _ => return false,
        }
    }
    true
}

/// Explicitly orthogonal: every stored gluing matrix is a signed permutation
/// (the reverse directions then are too).
pub fn is_explicitly_orthogonal(g: &GraphManifold) -> bool {
    g.edges()
        .iter()
        .all(|e| is_signed_permutation(e.gluing.matrix()))
}
