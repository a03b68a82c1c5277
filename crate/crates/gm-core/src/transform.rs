//! Constructive procedures: adapted Waldhausen bases, re-gluing to
//! orthogonal form, the constructive orthogonality witness, and the
//! unwinding of intersection data to a finite-cover local model.

use crate::invariants::{
    class_partition, embed_fiber_lattice, intersection_lattice, invariant_set, InvariantError,
    InvariantSet,
};
use crate::lattice::{
    index, intersect, join, saturate, Lattice, LatticeError, LatticeIndex,
};
use crate::matrix::IntMatrix;
use crate::wstructure::{
    apply_basis_change, is_signed_permutation, BasisChange, DirectedEdge, GluingMatrix,
    GraphManifold, StructureError, VertexChange,
};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("vertex {vertex} has secondary intersection number {j}; an adapted basis needs 1")]
    SecondaryIndexObstruction { vertex: String, j: BigUint },
    #[error("vertex {vertex} has type {vtype}; this construction requires type <= {max}")]
    TypeObstruction {
        vertex: String,
        vtype: usize,
        max: usize,
    },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("witness search over {0} vertices exceeds the 2^24 sign-assignment budget")]
    SearchBudgetExceeded(usize),
    #[error("edge {edge}: the fiber-intersection group does not split off inside the cover lattice")]
    SplitFailure { edge: String },
    #[error("edge {edge}: transported far fiber-intersection group coincides with the near one")]
    DegenerateGluing { edge: String },
    #[error("internal: {0}")]
    Internal(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// One recomputed check inside a transformation, kept in the result so
/// reports can show exactly what held.
#[derive(Clone, Debug)]
pub struct AssertionRecord {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl AssertionRecord {
    fn check(name: impl Into<String>, ok: bool, detail: impl Into<String>) -> Self {
        AssertionRecord {
            name: name.into(),
            ok,
            detail: detail.into(),
        }
    }
}

pub fn assertions_ok(records: &[AssertionRecord]) -> bool {
    records.iter().all(|r| r.ok)
}

/// Basis change aligning the fiber basis with the parallelism classes:
/// after applying it, f^1 spans the first class representative at every
/// vertex, and f^2 spans the second one at type-2 vertices.
#[derive(Clone, Debug)]
pub struct AdaptedBasis {
    pub change: BasisChange,
}

/// Completion of a primitive column to a GL(2,Z) matrix with determinant 1.
fn complete_primitive(p: &[BigInt; 2]) -> [BigInt; 2] {
    let e = p[0].extended_gcd(&p[1]);
    assert!(e.gcd.abs().is_one(), "class generator is not primitive");
    let (u, v) = (e.x / &e.gcd, e.y / &e.gcd);
    // det of columns (p, q) = p0 q1 - p1 q0 = 1 with q = (-v, u)
    [-v, u]
}

/// Builds the adapted basis. Requires every secondary intersection number to
/// be 1 (so the class generators form a fiber basis) and type at most 2.
pub fn adapted_basis(g: &GraphManifold) -> Result<AdaptedBasis, TransformError> {
    let inv = invariant_set(g)?;
    let mut change = BasisChange::identity();
    for vi in &inv.vertices {
        if vi.vtype > 2 {
            return Err(TransformError::TypeObstruction {
                vertex: vi.vertex_id.clone(),
                vtype: vi.vtype,
                max: 2,
            });
        }
        if !vi.j.is_one() {
            return Err(TransformError::SecondaryIndexObstruction {
                vertex: vi.vertex_id.clone(),
                j: vi.j.clone(),
            });
        }
        let p1_row = vi.classes[0].lattice.basis_rows().remove(0);
        let p1 = [p1_row[0].clone(), p1_row[1].clone()];
        let p2 = if vi.vtype == 2 {
            let row = vi.classes[1].lattice.basis_rows().remove(0);
            [row[0].clone(), row[1].clone()]
        } else {
            complete_primitive(&p1)
        };
        let sigma = IntMatrix::from_fn(2, 2, |r, c| if c == 0 { p1[r].clone() } else { p2[r].clone() });
        let det = sigma.det();
        if !det.abs().is_one() {
            return Err(TransformError::Internal(format!(
                "class generators at {} do not form a basis (det {det})",
                vi.vertex_id
            )));
        }
        change.vertices.insert(
            vi.vertex_id.clone(),
            VertexChange {
                epsilon: det.clone(),
                sigma,
            },
        );
    }
    Ok(AdaptedBasis { change })
}

/// Per-edge shift data in an adapted basis.
struct ShiftData {
    /// The z-shift n_w: z_w + n_w equals the far complementary fiber vector
    /// up to the sign of its z-coefficient.
    shift: [BigInt; 2],
}

/// Derives the matched fiber index on both sides of a directed edge and the
/// induced z-shift, in an adapted basis with all intersection numbers 1.
fn derive_shift(g: &GraphManifold, w: DirectedEdge) -> Result<ShiftData, TransformError> {
    let m = g.gluing_of(w)?;
    let p = intersection_lattice(g, w)?;
    let prow = p.basis_rows().remove(0);
    let near_matched = if prow == [BigInt::zero(), BigInt::one(), BigInt::zero()] {
        1
    } else if prow == [BigInt::zero(), BigInt::zero(), BigInt::one()] {
        2
    } else {
        return Err(TransformError::Internal(format!(
            "edge {}: intersection lattice not aligned with a fiber axis; basis not adapted",
            g.directed_edge_name(w)
        )));
    };
    let matched_col = |col: &[BigInt]| -> bool {
        col[0].is_zero()
            && col[near_matched].abs().is_one()
            && col[3 - near_matched].is_zero()
    };
    let c1 = m.col(1);
    let c2 = m.col(2);
    let far_matched = match (matched_col(&c1), matched_col(&c2)) {
        (true, false) => 1,
        (false, true) => 2,
        _ => {
            return Err(TransformError::Internal(format!(
                "edge {}: no unique far fiber column matches the intersection axis",
                g.directed_edge_name(w)
            )))
        }
    };
    let far_complement = 3 - far_matched;
    let comp = m.col(far_complement);
    let sign = comp[0].clone();
    if !sign.abs().is_one() {
        return Err(TransformError::Internal(format!(
            "edge {}: far complementary vector has z-coefficient {}, expected +-1 (is i = 1?)",
            g.directed_edge_name(w),
            sign
        )));
    }
    Ok(ShiftData {
        shift: [&sign * &comp[1], &sign * &comp[2]],
    })
}

fn shift_matrix(n: &[BigInt; 2]) -> IntMatrix {
    let mut t = IntMatrix::identity(3);
    t.set(1, 0, n[0].clone());
    t.set(2, 0, n[1].clone());
    t
}

/// Result of the re-gluing construction.
#[derive(Clone, Debug)]
pub struct ReglueResult {
    pub adapted: BasisChange,
    /// Per-directed-edge z-shifts absorbed into the new gluings (these are
    /// not a basis change; they alter the manifold).
    pub shifts: BTreeMap<(String, bool), [BigInt; 2]>,
    pub manifold: GraphManifold,
    pub assertions: Vec<AssertionRecord>,
}

/// Re-glues a manifold with all intersection numbers 1, all secondary
/// intersection numbers 1, and type at most 2 into one whose gluings are
/// signed permutations. Works in the adapted basis; per edge the new
/// boundary vector is the far complementary fiber vector (sign-normalized),
/// which turns both directions of the gluing into slot exchanges. The
/// intersection data is unchanged and is recomputed to prove it.
pub fn reglue(g: &GraphManifold) -> Result<ReglueResult, TransformError> {
    let report = g.validate();
    if !report.is_valid() {
        return Err(TransformError::PreconditionFailed(format!(
            "input does not validate: {report}"
        )));
    }
    let inv = invariant_set(g)?;
    check_reglue_preconditions(&inv)?;
    let adapted = adapted_basis(g)?;
    let m1 = apply_basis_change(g, &adapted.change)?;
    let mut shifts = BTreeMap::new();
    let mut gluings = Vec::with_capacity(g.edges().len());
    for (i, e) in m1.edges().iter().enumerate() {
        let w = DirectedEdge::forward(i);
        let fwd = derive_shift(&m1, w)?;
        let rev = derive_shift(&m1, w.opposite())?;
        let t_near = shift_matrix(&fwd.shift);
        let t_far = shift_matrix(&rev.shift);
        let new = t_near
            .inverse_unimodular()
            .expect("shift matrices are unimodular")
            .mul(e.gluing.matrix())
            .mul(&t_far);
        shifts.insert((e.id.clone(), false), fwd.shift);
        shifts.insert((e.id.clone(), true), rev.shift);
        gluings.push(GluingMatrix::new(new));
    }
    let out = m1.with_gluings(gluings);
    let mut assertions = reglue_assertions(g, &m1, &out)?;
    assertions.insert(
        0,
        AssertionRecord::check(
            "output validates",
            out.validate().is_valid(),
            out.validate().to_string(),
        ),
    );
    Ok(ReglueResult {
        adapted: adapted.change,
        shifts,
        manifold: out,
        assertions,
    })
}

fn check_reglue_preconditions(inv: &InvariantSet) -> Result<(), TransformError> {
    for e in &inv.edges {
        if !e.i.is_one() {
            return Err(TransformError::PreconditionFailed(format!(
                "intersection number at edge {} is {}, expected 1",
                e.edge_id, e.i
            )));
        }
    }
    for v in &inv.vertices {
        if !v.j.is_one() {
            return Err(TransformError::PreconditionFailed(format!(
                "secondary intersection number at vertex {} is {}, expected 1",
                v.vertex_id, v.j
            )));
        }
        if v.vtype > 2 {
            return Err(TransformError::TypeObstruction {
                vertex: v.vertex_id.clone(),
                vtype: v.vtype,
                max: 2,
            });
        }
    }
    Ok(())
}

/// Recomputes the invariants of the output and compares: numeric data and
/// class partitions against the original input, lattices against the
/// adapted intermediate (whose fiber coordinates the output shares).
fn reglue_assertions(
    original: &GraphManifold,
    adapted: &GraphManifold,
    out: &GraphManifold,
) -> Result<Vec<AssertionRecord>, TransformError> {
    let mut records = Vec::new();
    let signed = out
        .edges()
        .iter()
        .all(|e| is_signed_permutation(e.gluing.matrix()));
    records.push(AssertionRecord::check(
        "gluings are signed permutations",
        signed,
        "",
    ));
    let inv0 = invariant_set(original)?;
    let inv1 = invariant_set(adapted)?;
    let inv2 = invariant_set(out)?;
    records.push(AssertionRecord::check(
        "intersection numbers unchanged",
        inv0
            .edges
            .iter()
            .zip(&inv2.edges)
            .all(|(a, b)| a.i == b.i && a.fe_index == b.fe_index),
        "",
    ));
    records.push(AssertionRecord::check(
        "secondary intersection numbers unchanged",
        inv0
            .vertices
            .iter()
            .zip(&inv2.vertices)
            .all(|(a, b)| a.j == b.j),
        "",
    ));
    records.push(AssertionRecord::check(
        "vertex types unchanged",
        inv0
            .vertices
            .iter()
            .zip(&inv2.vertices)
            .all(|(a, b)| a.vtype == b.vtype),
        "",
    ));
    records.push(AssertionRecord::check(
        "parallelism classes unchanged",
        class_partition(original, &inv0) == class_partition(out, &inv2),
        "",
    ));
    records.push(AssertionRecord::check(
        "intersection lattices unchanged in adapted fiber coordinates",
        inv1
            .edges
            .iter()
            .zip(&inv2.edges)
            .all(|(a, b)| a.p_from == b.p_from && a.p_to == b.p_to)
            && inv1
                .vertices
                .iter()
                .zip(&inv2.vertices)
                .all(|(a, b)| a.p_v == b.p_v),
        "",
    ));
    Ok(records)
}

/// Outcome of the constructive orthogonality search.
#[derive(Clone, Debug)]
pub enum WitnessOutcome {
    /// A Waldhausen basis change making every gluing a signed permutation,
    /// together with the resulting explicitly orthogonal manifold.
    Witness {
        change: BasisChange,
        manifold: GraphManifold,
        flipped_vertices: Vec<String>,
    },
    /// No sign assignment balances the shifts; the per-vertex residuals of
    /// the unflipped assignment are returned.
    Refutation {
        residuals: Vec<(String, [BigInt; 2])>,
    },
}

/// Searches for a Waldhausen basis change exhibiting orthogonality.
///
/// Preconditions: every vertex of type exactly 2, all intersection and
/// secondary intersection numbers 1. In the adapted basis the candidate
/// boundary shift at each directed edge is forced; a basis change exists
/// exactly when the shifts sum to zero around every vertex. Because
/// choice-independence of that test under admissible sign choices is not
/// something this crate assumes, the search quantifies over per-vertex
/// sign flips of f^2 (lexicographically smallest successful assignment
/// wins), capped at 2^24 candidates.
pub fn orthogonality_witness(g: &GraphManifold) -> Result<WitnessOutcome, TransformError> {
    let report = g.validate();
    if !report.is_valid() {
        return Err(TransformError::PreconditionFailed(format!(
            "input does not validate: {report}"
        )));
    }
    let inv = invariant_set(g)?;
    for v in &inv.vertices {
        if v.vtype != 2 {
            return Err(TransformError::PreconditionFailed(format!(
                "vertex {} has type {}, the witness construction needs type exactly 2",
                v.vertex_id, v.vtype
            )));
        }
    }
    check_reglue_preconditions(&inv)?;
    let nv = g.blocks().len();
    if nv > 24 {
        return Err(TransformError::SearchBudgetExceeded(nv));
    }
    let adapted = adapted_basis(g)?;
    let m1 = apply_basis_change(g, &adapted.change)?;
    let mut vertex_ids: Vec<String> = g.blocks().iter().map(|b| b.id.clone()).collect();
    vertex_ids.sort();
    let mut base_residuals = None;
    for mask in 0u64..(1u64 << nv) {
        let flipped: Vec<String> = vertex_ids
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, id)| id.clone())
            .collect();
        let mut flip = BasisChange::identity();
        for id in &flipped {
            flip.vertices.insert(
                id.clone(),
                VertexChange {
                    epsilon: -BigInt::one(),
                    sigma: IntMatrix::from_rows_i64(&[vec![1, 0], vec![0, -1]]),
                },
            );
        }
        let m2 = if mask == 0 {
            m1.clone()
        } else {
            apply_basis_change(&m1, &flip)?
        };
        let mut shift = BasisChange::identity();
        for (i, e) in m2.edges().iter().enumerate() {
            for reversed in [false, true] {
                let w = DirectedEdge { edge: i, reversed };
                let data = derive_shift(&m2, w)?;
                shift.shifts.insert((e.id.clone(), reversed), data.shift);
            }
        }
        let mut residuals = Vec::new();
        for (v, b) in m2.blocks().iter().enumerate() {
            let mut sum = [BigInt::zero(), BigInt::zero()];
            for w in m2.boundary_of(v) {
                let n = shift.shift(&m2.edges()[w.edge].id, w.reversed);
                sum[0] += &n[0];
                sum[1] += &n[1];
            }
            if !sum[0].is_zero() || !sum[1].is_zero() {
                residuals.push((b.id.clone(), sum));
            }
        }
        if mask == 0 {
            base_residuals = Some(residuals.clone());
        }
        if residuals.is_empty() {
            let m3 = apply_basis_change(&m2, &shift)?;
            if !crate::wstructure::is_explicitly_orthogonal(&m3) {
                return Err(TransformError::Internal(
                    "balanced shifts did not produce signed permutations".into(),
                ));
            }
            let change = adapted.change.compose(g, &flip).compose(g, &shift);
            change.check(g).map_err(|e| {
                TransformError::Internal(format!("composed witness change is invalid: {e}"))
            })?;
            return Ok(WitnessOutcome::Witness {
                change,
                manifold: m3,
                flipped_vertices: flipped,
            });
        }
    }
    Ok(WitnessOutcome::Refutation {
        residuals: base_residuals.unwrap_or_default(),
    })
}

/// Symbolic count built from the unknown orbifold-cover degrees n_v; the
/// concrete part (ratios of secondary intersection numbers) is evaluated.
#[derive(Clone, Debug)]
pub struct UnwoundVertex {
    pub vertex_id: String,
    /// The fiber lattice of the covering block: P_v in F_v coordinates.
    pub fiber: Lattice,
    pub j: BigUint,
    /// Number of block copies, "(N/n_v) * (J/j_v)" with J/j_v evaluated.
    pub copies: String,
}

#[derive(Clone, Debug)]
pub struct UnwoundEdge {
    pub edge_id: String,
    /// A_w = <P_v, transported P_u> in L_w coordinates (forward direction).
    pub a_lattice: Lattice,
    pub index_in_l: BigUint,
    /// j_u * j_v, the index the covering construction predicts.
    pub expected_index: BigUint,
    pub new_gluing: GluingMatrix,
    /// Boundary components of one copy of the near block covering this
    /// edge's torus: "n_v / j_u" kept symbolic.
    pub boundary_from: String,
    pub boundary_to: String,
    /// Whether the canonical boundary lift was negated to keep det = -1.
    pub z_flipped: bool,
}

#[derive(Clone, Debug)]
pub struct UnwindResult {
    /// Product of all secondary intersection numbers.
    pub j_product: BigUint,
    pub vertices: Vec<UnwoundVertex>,
    pub edges: Vec<UnwoundEdge>,
    /// The unwound gluing data assembled on the template graph. One block
    /// copy per vertex; the full cover has the symbolic copy counts above.
    pub local_model: GraphManifold,
    pub assertions: Vec<AssertionRecord>,
}

/// Builds, per edge, the cover lattice A_w spanned by the two
/// fiber-intersection groups, checks the index law (L_w : A_w) = j_u * j_v,
/// and rewrites the gluing in the cover bases. The resulting local data has
/// every intersection number and secondary intersection number equal to 1
/// and the same intersection lattices, which is recomputed and recorded.
pub fn unwind(g: &GraphManifold) -> Result<UnwindResult, TransformError> {
    let report = g.validate();
    if !report.is_valid() {
        return Err(TransformError::PreconditionFailed(format!(
            "input does not validate: {report}"
        )));
    }
    let inv = invariant_set(g)?;
    let j_product: BigUint = inv
        .vertices
        .iter()
        .fold(BigUint::one(), |acc, v| acc * &v.j);
    let mut assertions = Vec::new();
    let vertices: Vec<UnwoundVertex> = inv
        .vertices
        .iter()
        .map(|vi| UnwoundVertex {
            vertex_id: vi.vertex_id.clone(),
            fiber: vi.p_v.clone(),
            j: vi.j.clone(),
            copies: format!(
                "(N/n_{}) * {}",
                vi.vertex_id,
                &j_product / &vi.j
            ),
        })
        .collect();
    let mut edges = Vec::with_capacity(g.edges().len());
    let mut gluings = Vec::with_capacity(g.edges().len());
    for (i, e) in g.edges().iter().enumerate() {
        let w = DirectedEdge::forward(i);
        let (v, u) = (g.tail(w), g.head(w));
        let vi = &inv.vertices[v];
        let ui = &inv.vertices[u];
        let m = g.gluing_of(w)?;
        let m_inv = m
            .inverse_unimodular()
            .ok_or_else(|| StructureError::NotUnimodular(m.det()))?;
        let near = cover_lattice(&m, &vi.p_v, &ui.p_v, &e.id)?;
        let far = cover_lattice(&m_inv, &ui.p_v, &vi.p_v, &e.id)?;
        // The two sides describe the same subgroup of the edge lattice.
        let transported_far = Lattice::from_generators(
            3,
            far.a.basis_rows().iter().map(|r| m.mul_vec(r)).collect(),
        );
        assertions.push(AssertionRecord::check(
            format!("edge {}: cover lattice agrees from both sides", e.id),
            transported_far == near.a,
            "",
        ));
        let expected = &vi.j * &ui.j;
        assertions.push(AssertionRecord::check(
            format!("edge {}: (L : A) = j_u * j_v", e.id),
            near.index == expected,
            format!("index {}, expected {}", near.index, expected),
        ));
        // New gluing in the cover bases (Z_w, P_v-basis) and (Z_{-w}, P_u-basis).
        let mut n_near = near.basis_matrix.clone();
        let mut new = transition_matrix(&n_near, &m, &far.basis_matrix)?;
        let mut z_flipped = false;
        if new.det() == BigInt::one() {
            // negate the near boundary lift to restore orientation reversal
            z_flipped = true;
            for r in 0..3 {
                let v = -n_near.get(r, 0).clone();
                n_near.set(r, 0, v);
            }
            new = transition_matrix(&n_near, &m, &far.basis_matrix)?;
        }
        let gm = GluingMatrix::new(new);
        assertions.push(AssertionRecord::check(
            format!("edge {}: unwound gluing has det -1 and nonzero b-row", e.id),
            gm.det() == -BigInt::one() && !gm.b_row_is_zero(),
            format!("det {}", gm.det()),
        ));
        let i_new = crate::invariants::intersection_number(&gm);
        assertions.push(AssertionRecord::check(
            format!("edge {}: unwound intersection number is 1", e.id),
            i_new.is_one(),
            format!("i' = {i_new}"),
        ));
        edges.push(UnwoundEdge {
            edge_id: e.id.clone(),
            a_lattice: near.a.clone(),
            index_in_l: near.index.clone(),
            expected_index: expected,
            new_gluing: gm.clone(),
            boundary_from: format!("n_{}/{}", g.blocks()[v].id, ui.j),
            boundary_to: format!("n_{}/{}", g.blocks()[u].id, vi.j),
            z_flipped,
        });
        gluings.push(gm);
    }
    let local_model = g.with_gluings(gluings);
    assertions.push(AssertionRecord::check(
        "local model validates",
        local_model.validate().is_valid(),
        local_model.validate().to_string(),
    ));
    let inv_new = invariant_set(&local_model)?;
    assertions.push(AssertionRecord::check(
        "unwound secondary intersection numbers are 1",
        inv_new.all_j_one(),
        "",
    ));
    // P'_|w| = P_|w|: map the unwound intersection lattice back through the
    // cover basis and compare with the original one.
    let mut p_preserved = true;
    for (i, ue) in edges.iter().enumerate() {
        let w = DirectedEdge::forward(i);
        let p_new = intersection_lattice(&local_model, w)?;
        let n_v = cover_basis_matrix(&ue.a_lattice, ue.z_flipped);
        let back = Lattice::from_generators(
            3,
            p_new.basis_rows().iter().map(|r| n_v.mul_vec(r)).collect(),
        );
        if back != intersection_lattice(g, w)? {
            p_preserved = false;
        }
    }
    assertions.push(AssertionRecord::check(
        "unwound intersection lattices equal the originals",
        p_preserved,
        "",
    ));
    Ok(UnwindResult {
        j_product,
        vertices,
        edges,
        local_model,
        assertions,
    })
}

struct CoverSide {
    a: Lattice,
    index: BigUint,
    /// Columns: (Z_w, embedded P_v basis).
    basis_matrix: IntMatrix,
}

/// A_w = <P_near, transported P_far> together with its canonical basis
/// (boundary lift first, then the near fiber-intersection basis).
fn cover_lattice(
    m: &IntMatrix,
    p_near: &Lattice,
    p_far: &Lattice,
    edge_id: &str,
) -> Result<CoverSide, TransformError> {
    let near_embedded = embed_fiber_lattice(p_near);
    let far_transported = Lattice::from_generators(
        3,
        embed_fiber_lattice(p_far)
            .basis_rows()
            .iter()
            .map(|r| m.mul_vec(r))
            .collect(),
    );
    if saturate(&far_transported) == saturate(&near_embedded) {
        return Err(TransformError::DegenerateGluing {
            edge: edge_id.to_string(),
        });
    }
    let a = join(&near_embedded, &far_transported)?;
    if a.rank() != 3 {
        return Err(TransformError::DegenerateGluing {
            edge: edge_id.to_string(),
        });
    }
    // The near fiber-intersection group must be exactly the fiber part of A.
    let fiber_part = intersect(&a, &saturate(&near_embedded))?;
    if fiber_part != near_embedded {
        return Err(TransformError::SplitFailure {
            edge: edge_id.to_string(),
        });
    }
    let index = match index(&a, &Lattice::full(3))? {
        LatticeIndex::Finite(n) => n,
        LatticeIndex::Infinite => {
            return Err(TransformError::Internal(
                "rank-3 lattice with infinite index".into(),
            ))
        }
    };
    Ok(CoverSide {
        basis_matrix: cover_basis_matrix(&a, false),
        a,
        index,
    })
}

/// Columns (Z_w | fiber basis of A): the first HNF row of A is the unique
/// canonical lift of the positive generator of A modulo its fiber part.
fn cover_basis_matrix(a: &Lattice, z_flipped: bool) -> IntMatrix {
    let rows = a.basis_rows();
    assert_eq!(rows.len(), 3);
    IntMatrix::from_fn(3, 3, |r, c| {
        let v = rows[c][r].clone();
        if c == 0 && z_flipped {
            -v
        } else {
            v
        }
    })
}

/// new = N_near^{-1} * m * N_far, checked to be integral.
fn transition_matrix(
    n_near: &IntMatrix,
    m: &IntMatrix,
    n_far: &IntMatrix,
) -> Result<IntMatrix, TransformError> {
    let det = n_near.det();
    if det.is_zero() {
        return Err(TransformError::Internal("singular cover basis".into()));
    }
    // adjugate / det, applied to m * n_far
    let n = 3usize;
    let adj = IntMatrix::from_fn(n, n, |r, c| {
        let rows: Vec<usize> = (0..n).filter(|&x| x != c).collect();
        let cols: Vec<usize> = (0..n).filter(|&x| x != r).collect();
        let minor = IntMatrix::from_fn(2, 2, |i, j| n_near.get(rows[i], cols[j]).clone());
        let cof = minor.det();
        if (r + c) % 2 == 0 {
            cof
        } else {
            -cof
        }
    });
    let raw = adj.mul(&m.mul(n_far));
    let mut out = IntMatrix::zero(n, n);
    for r in 0..n {
        for c in 0..n {
            let (q, rem) = raw.get(r, c).div_rem(&det);
            if !rem.is_zero() {
                return Err(TransformError::Internal(format!(
                    "unwound gluing is not integral at ({r},{c})"
                )));
            }
            out.set(r, c, q);
        }
    }
    Ok(out)
}

/// Full pipeline: unwind to the i = j = 1 local model, then re-glue it to
/// orthogonal form.
#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub unwind: UnwindResult,
    pub reglue: ReglueResult,
}

impl PipelineReport {
    pub fn manifold(&self) -> &GraphManifold {
        &self.reglue.manifold
    }

    pub fn all_assertions_ok(&self) -> bool {
        assertions_ok(&self.unwind.assertions) && assertions_ok(&self.reglue.assertions)
    }
}

pub fn orthogonalize(g: &GraphManifold) -> Result<PipelineReport, TransformError> {
    let inv = invariant_set(g)?;
    for v in &inv.vertices {
        if v.vtype > 2 {
            return Err(TransformError::TypeObstruction {
                vertex: v.vertex_id.clone(),
                vtype: v.vtype,
                max: 2,
            });
        }
    }
    let unwound = unwind(g)?;
    let reglued = reglue(&unwound.local_model)?;
    Ok(PipelineReport {
        unwind: unwound,
        reglue: reglued,
    })
}
