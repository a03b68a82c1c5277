//! Edge and vertex invariants of a W-structure.
//!
//! Per edge: the intersection number i_e (gcd of the b-row), the rank-1
//! intersection lattice P_|w| = F_w meet F_{-w}, and the subgroup index
//! (L_e : <F_w, F_{-w}>), which must always agree with i_e. Per vertex: the
//! partition of its directed edges into parallelism classes (edges sharing
//! the same intersection lattice inside the fiber F_v), the type (number of
//! classes), the fiber-intersection group P_v and the secondary intersection
//! number j_v = (F_v : P_v).

use crate::lattice::{
    content, index, intersect, join, saturate, Lattice, LatticeError, LatticeIndex,
};
use crate::matrix::IntMatrix;
use crate::wstructure::{fiber_lattice_at, DirectedEdge, GluingMatrix, GraphManifold, StructureError};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("intersection lattice at edge {edge} has rank {rank}, expected 1 (invalid input slipped through validation)")]
    RankViolation { edge: String, rank: usize },
    #[error("internal consistency failure: {0}")]
    Inconsistency(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Intersection data of one edge.
#[derive(Clone, Debug)]
pub struct EdgeInvariants {
    pub edge_id: String,
    /// gcd of the b-row; equals `fe_index`.
    pub i: BigUint,
    /// P_|w| in L_w coordinates (rank 1, saturated).
    pub p_w: Lattice,
    /// P_|w| projected into the source fiber F_v (rank 1 in Z^2).
    pub p_from: Lattice,
    /// P_|w| transported through the gluing and projected into F_u.
    pub p_to: Lattice,
    /// (L_e : <F_w, F_{-w}>).
    pub fe_index: BigUint,
}

/// One parallelism class at a vertex.
#[derive(Clone, Debug)]
pub struct ParallelClass {
    /// The shared intersection lattice, as a saturated rank-1 sublattice of F_v.
    pub lattice: Lattice,
    pub members: Vec<DirectedEdge>,
}

/// Invariants of one vertex.
#[derive(Clone, Debug)]
pub struct VertexInvariants {
    pub vertex_id: String,
    /// Classes sorted by the lexicographic order of their lattice bases;
    /// class 0 plays the role of P^1, class 1 of P^2.
    pub classes: Vec<ParallelClass>,
    pub vtype: usize,
    /// Fiber-intersection group: the join of one representative per class
    /// for type >= 2, the full fiber for type 1.
    pub p_v: Lattice,
    /// Secondary intersection number (F_v : P_v).
    pub j: BigUint,
}

/// Drops the z coordinate of a fiber vector, checking it really is zero.
fn drop_z(v: &[BigInt]) -> Result<Vec<BigInt>, InvariantError> {
    if !v[0].is_zero() {
        return Err(InvariantError::Inconsistency(format!(
            "expected a fiber vector with zero z-coordinate, got ({}, {}, {})",
            v[0], v[1], v[2]
        )));
    }
    Ok(v[1..].to_vec())
}

fn project_to_fiber(l: &Lattice) -> Result<Lattice, InvariantError> {
    let rows = l
        .basis_rows()
        .iter()
        .map(|r| drop_z(r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Lattice::from_generators(2, rows))
}

/// The rank-1 lattice F_w meet F_{-w} in L_w coordinates.
pub fn intersection_lattice(
    g: &GraphManifold,
    w: DirectedEdge,
) -> Result<Lattice, InvariantError> {
    let (fw, fmw) = fiber_lattice_at(g, w)?;
    let p = saturate(&intersect(&fw, &fmw)?);
    if p.rank() != 1 {
        return Err(InvariantError::RankViolation {
            edge: g.directed_edge_name(w),
            rank: p.rank(),
        });
    }
    Ok(p)
}

/// P_|w| as a sublattice of the tail vertex's fiber F_v.
pub fn intersection_lattice_in_fiber(
    g: &GraphManifold,
    w: DirectedEdge,
) -> Result<Lattice, InvariantError> {
    project_to_fiber(&intersection_lattice(g, w)?)
}

/// gcd of the b-row entries; direction independent.
pub fn intersection_number(gm: &GluingMatrix) -> BigUint {
    content(&gm.b_row())
}

/// Computes the intersection number twice: as the b-row gcd and as the
/// subgroup index (L_e : <F_w, F_{-w}>). The two must agree; a mismatch is
/// an internal consistency failure, never returned as data.
pub fn index_characterization(
    g: &GraphManifold,
    edge: usize,
) -> Result<(BigUint, BigUint), InvariantError> {
    let w = DirectedEdge::forward(edge);
    let gcd_value = intersection_number(&g.edges()[edge].gluing);
    let (fw, fmw) = fiber_lattice_at(g, w)?;
    let fe = join(&fw, &fmw)?;
    let idx = match index(&fe, &Lattice::full(3))? {
        LatticeIndex::Finite(n) => n,
        LatticeIndex::Infinite => {
            return Err(InvariantError::Inconsistency(format!(
                "<F_w, F_-w> at edge {} has rank below 3",
                g.edges()[edge].id
            )))
        }
    };
    if gcd_value != idx {
        return Err(InvariantError::Inconsistency(format!(
            "edge {}: b-row gcd {} differs from subgroup index {}",
            g.edges()[edge].id, gcd_value, idx
        )));
    }
    Ok((gcd_value, idx))
}

/// Full per-edge invariants.
pub fn edge_invariants(g: &GraphManifold, edge: usize) -> Result<EdgeInvariants, InvariantError> {
    let w = DirectedEdge::forward(edge);
    let (i, fe_index) = index_characterization(g, edge)?;
    let p_w = intersection_lattice(g, w)?;
    let p_from = project_to_fiber(&p_w)?;
    let m = g.gluing_of(w)?;
    let inv = m
        .inverse_unimodular()
        .ok_or_else(|| StructureError::NotUnimodular(m.det()))?;
    let transported: Vec<Vec<BigInt>> = p_w
        .basis_rows()
        .iter()
        .map(|r| inv.mul_vec(r))
        .collect();
    let p_to = project_to_fiber(&Lattice::from_generators(3, transported))?;
    Ok(EdgeInvariants {
        edge_id: g.edges()[edge].id.clone(),
        i,
        p_w,
        p_from,
        p_to,
        fe_index,
    })
}

/// Groups the directed edges at `v` by their intersection lattice in F_v.
pub fn vertex_invariants(g: &GraphManifold, v: usize) -> Result<VertexInvariants, InvariantError> {
    let mut classes: Vec<ParallelClass> = Vec::new();
    for w in g.boundary_of(v) {
        let lat = intersection_lattice_in_fiber(g, w)?;
        match classes.iter_mut().find(|c| c.lattice == lat) {
            Some(c) => c.members.push(w),
            None => classes.push(ParallelClass {
                lattice: lat,
                members: vec![w],
            }),
        }
    }
    // Deterministic labeling: descending lexicographic order of the
    // canonical bases, so the fiber-axis class <(1,0)> labels as P^1 when
    // both axes appear.
    classes.sort_by(|a, b| b.lattice.lex_cmp(&a.lattice));
    let vtype = classes.len();
    let full = Lattice::full(2);
    let p_v = if vtype <= 1 {
        // A single class never spans the fiber; the convention takes the
        // whole fiber group with secondary intersection number 1.
        full.clone()
    } else {
        let mut acc = classes[0].lattice.clone();
        for c in &classes[1..] {
            acc = join(&acc, &c.lattice)?;
        }
        acc
    };
    let j = match index(&p_v, &full)? {
        LatticeIndex::Finite(n) => n,
        LatticeIndex::Infinite => {
            return Err(InvariantError::Inconsistency(format!(
                "fiber-intersection group at vertex {} is not of full rank",
                g.blocks()[v].id
            )))
        }
    };
    Ok(VertexInvariants {
        vertex_id: g.blocks()[v].id.clone(),
        classes,
        vtype,
        p_v,
        j,
    })
}

/// Maximum vertex type over the manifold.
pub fn manifold_type(g: &GraphManifold) -> Result<usize, InvariantError> {
    let mut t = 0;
    for v in 0..g.blocks().len() {
        t = t.max(vertex_invariants(g, v)?.vtype);
    }
    Ok(t)
}

/// All edge and vertex invariants plus the manifold type.
#[derive(Clone, Debug)]
pub struct InvariantSet {
    pub edges: Vec<EdgeInvariants>,
    pub vertices: Vec<VertexInvariants>,
    pub manifold_type: usize,
}

pub fn invariant_set(g: &GraphManifold) -> Result<InvariantSet, InvariantError> {
    let edges = (0..g.edges().len())
        .map(|e| edge_invariants(g, e))
        .collect::<Result<Vec<_>, _>>()?;
    let vertices = (0..g.blocks().len())
        .map(|v| vertex_invariants(g, v))
        .collect::<Result<Vec<_>, _>>()?;
    let manifold_type = vertices.iter().map(|v| v.vtype).max().unwrap_or(0);
    Ok(InvariantSet {
        edges,
        vertices,
        manifold_type,
    })
}

impl InvariantSet {
    pub fn all_i_one(&self) -> bool {
        self.edges.iter().all(|e| e.i == BigUint::one())
    }

    pub fn all_j_one(&self) -> bool {
        self.vertices.iter().all(|v| v.j == BigUint::one())
    }

    pub fn vertex(&self, id: &str) -> Option<&VertexInvariants> {
        self.vertices.iter().find(|v| v.vertex_id == id)
    }
}

/// The class partition at every vertex, with members named by directed-edge
/// strings and classes ordered by their member lists. The partition is what
/// basis changes preserve; the P^1/P^2 labeling is coordinate-dependent.
pub fn class_partition(g: &GraphManifold, inv: &InvariantSet) -> Vec<Vec<Vec<String>>> {
    inv.vertices
        .iter()
        .map(|vi| {
            let mut classes: Vec<Vec<String>> = vi
                .classes
                .iter()
                .map(|c| {
                    c.members
                        .iter()
                        .map(|&w| g.directed_edge_name(w))
                        .collect()
                })
                .collect();
            classes.sort();
            classes
        })
        .collect()
}

/// Transports P_|w| through the gluing matrix into L_{-w} coordinates.
pub fn transport_to_far_side(
    g: &GraphManifold,
    w: DirectedEdge,
    l: &Lattice,
) -> Result<Lattice, InvariantError> {
    let m = g.gluing_of(w)?;
    let inv = m
        .inverse_unimodular()
        .ok_or_else(|| StructureError::NotUnimodular(m.det()))?;
    let rows: Vec<Vec<BigInt>> = l.basis_rows().iter().map(|r| inv.mul_vec(r)).collect();
    Ok(Lattice::from_generators(3, rows))
}

/// Embeds a rank-2 fiber lattice into L_w coordinates as { (0, p) }.
pub fn embed_fiber_lattice(l: &Lattice) -> Lattice {
    let rows: Vec<Vec<BigInt>> = l
        .basis_rows()
        .iter()
        .map(|r| {
            let mut v = vec![BigInt::zero()];
            v.extend(r.iter().cloned());
            v
        })
        .collect();
    Lattice::from_generators(3, rows)
}

/// Applies a 2x2 integer matrix to a rank-<=2 lattice in Z^2 (basis rows map
/// through the matrix as column vectors).
pub fn map_fiber_lattice(sigma: &IntMatrix, l: &Lattice) -> Lattice {
    let rows: Vec<Vec<BigInt>> = l.basis_rows().iter().map(|r| sigma.mul_vec(r)).collect();
    Lattice::from_generators(2, rows)
}
