//! Instance generators: the cycle family, orthogonal manifolds built from
//! slot permutations, and seeded random corpora for property testing.
//!
//! Everything is deterministic for a fixed seed. Random instances are
//! produced by perturb-and-reject: correctness of a target family is
//! certified by recomputing the invariants, never by the sampler itself.

use crate::invariants::{invariant_set, InvariantError};
use crate::lattice::{intersect, join, saturate, Lattice};
use crate::matrix::IntMatrix;
use crate::rng::Rng;
use crate::wstructure::{
    far_fiber_of_matrix, near_fiber, BasisChange, BlockSpec, DirectedEdge, EdgeSpec,
    GluingMatrix, GraphManifold, StructureError, VertexChange,
};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("bad slot permutation: {0}")]
    BadPermutation(String),
    #[error("{what}: attempt budget of {budget} exhausted")]
    BudgetExceeded { what: String, budget: usize },
    #[error("generator postcondition failed: {0}")]
    Postcondition(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Graph shapes used by the generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphShape {
    /// k vertices in a cycle, k >= 3.
    Cycle(usize),
    /// Two vertices joined by s parallel edges, s >= 3.
    Theta(usize),
    /// Complete graph on n vertices, n >= 3.
    Complete(usize),
}

impl GraphShape {
    fn vertex_count(&self) -> usize {
        match *self {
            GraphShape::Cycle(k) => k,
            GraphShape::Theta(_) => 2,
            GraphShape::Complete(n) => n,
        }
    }

    fn edge_pairs(&self) -> Vec<(usize, usize)> {
        match *self {
            GraphShape::Cycle(k) => {
                assert!(k >= 3, "cycle needs at least 3 vertices");
                (0..k).map(|i| (i, (i + 1) % k)).collect()
            }
            GraphShape::Theta(s) => {
                assert!(s >= 3, "theta needs at least 3 strands");
                (0..s).map(|_| (0, 1)).collect()
            }
            GraphShape::Complete(n) => {
                assert!(n >= 3, "complete graph needs at least 3 vertices");
                let mut out = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        out.push((i, j));
                    }
                }
                out
            }
        }
    }
}

/// Builds the graph skeleton: genus-1 blocks with one boundary slot per
/// incident edge end, slots assigned in edge order.
fn skeleton(shape: GraphShape, gluings: Vec<GluingMatrix>) -> GraphManifold {
    let pairs = shape.edge_pairs();
    assert_eq!(pairs.len(), gluings.len());
    let nv = shape.vertex_count();
    let mut degree = vec![0u32; nv];
    for &(a, b) in &pairs {
        degree[a] += 1;
        degree[b] += 1;
    }
    let blocks = (0..nv)
        .map(|i| BlockSpec {
            id: format!("v{}", i + 1),
            genus: 1,
            boundary_count: degree[i],
        })
        .collect();
    let mut next_slot = vec![0u32; nv];
    let edges = pairs
        .iter()
        .zip(gluings)
        .enumerate()
        .map(|(k, (&(a, b), gluing))| {
            let from_slot = next_slot[a];
            next_slot[a] += 1;
            let to_slot = next_slot[b];
            next_slot[b] += 1;
            EdgeSpec {
                id: format!("e{}", k + 1),
                from: (format!("v{}", a + 1), from_slot),
                to: (format!("v{}", b + 1), to_slot),
                gluing,
            }
        })
        .collect();
    GraphManifold::new(blocks, edges)
}

/// A permutation of the three basis slots (z, f1, f2) with per-slot signs;
/// column j of the matrix is signs[j] * e_{targets[j]}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlotPermutation {
    pub targets: [usize; 3],
    pub signs: [i64; 3],
}

impl SlotPermutation {
    pub fn new(targets: [usize; 3], signs: [i64; 3]) -> Result<Self, GenError> {
        let mut seen = [false; 3];
        for &t in &targets {
            if t > 2 || seen[t] {
                return Err(GenError::BadPermutation(format!(
                    "targets {targets:?} are not a permutation of the slots"
                )));
            }
            seen[t] = true;
        }
        if targets[0] == 0 {
            return Err(GenError::BadPermutation(
                "the permutation fixes the z slot, so the gluing would identify the fiber tori"
                    .into(),
            ));
        }
        if signs.iter().any(|s| s.abs() != 1) {
            return Err(GenError::BadPermutation(format!("signs {signs:?} must be +-1")));
        }
        Ok(SlotPermutation { targets, signs })
    }

    /// The permutation joining class `tail` at the near vertex with class
    /// `head` at the far vertex (classes numbered 1 and 2), identity signs.
    pub fn from_classes(tail: usize, head: usize) -> Self {
        assert!((1..=2).contains(&tail) && (1..=2).contains(&head));
        let mut targets = [0usize; 3];
        targets[0] = 3 - tail; // z_{-w} lands on the complementary fiber axis
        targets[head] = tail; // far matched vector lands on the near matched axis
        targets[3 - head] = 0; // far complementary vector lands on z
        SlotPermutation {
            targets,
            signs: [1, 1, 1],
        }
        .with_det_minus_one()
    }

    pub fn det(&self) -> i64 {
        let mut inversions = 0;
        for i in 0..3 {
            for j in i + 1..3 {
                if self.targets[i] > self.targets[j] {
                    inversions += 1;
                }
            }
        }
        let parity = if inversions % 2 == 0 { 1 } else { -1 };
        parity * self.signs[0] * self.signs[1] * self.signs[2]
    }

    /// Flips the sign on the column that lands on the z slot, if needed, so
    /// the determinant is -1.
    pub fn with_det_minus_one(mut self) -> Self {
        if self.det() != -1 {
            let zcol = (0..3).find(|&j| self.targets[j] == 0).expect("permutation");
            self.signs[zcol] = -self.signs[zcol];
        }
        self
    }

    pub fn matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zero(3, 3);
        for j in 0..3 {
            m.set(self.targets[j], j, BigInt::from(self.signs[j]));
        }
        m
    }

    fn with_random_signs(mut self, rng: &mut Rng) -> Self {
        for s in &mut self.signs {
            *s = rng.sign();
        }
        self.with_det_minus_one()
    }
}

/// How permutations are assigned to the edges of a shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PermAssignment {
    /// The z <-> f2 exchange everywhere (the cycle-example gluing).
    UniformZF2,
    /// The z <-> f1 exchange everywhere.
    UniformZF1,
    /// z <-> f2 on odd-numbered edges, z <-> f1 on even ones.
    Alternating,
    /// End-class labeling guaranteeing both classes at every vertex
    /// (so type 2 everywhere), with seeded signs.
    AllTypeTwo,
    /// Seeded per-edge choice among all class pairs, seeded signs.
    Mixed,
}

fn type_two_labels(shape: GraphShape) -> Vec<(usize, usize)> {
    match shape {
        // tail ends in class 1, head ends in class 2: every vertex sees both
        GraphShape::Cycle(k) => vec![(1, 2); k],
        GraphShape::Theta(s) => (0..s).map(|i| if i % 2 == 0 { (1, 2) } else { (2, 1) }).collect(),
        GraphShape::Complete(n) => {
            let mut out = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    out.push(if (i + j) % 2 == 0 { (1, 2) } else { (2, 1) });
                }
            }
            out
        }
    }
}

/// Orthogonal manifold from permutation data: every gluing is a signed slot
/// permutation moving z, so the result validates, is explicitly orthogonal,
/// and has all intersection data trivial. The postconditions are recomputed,
/// not assumed.
pub fn gen_orthogonal(
    shape: GraphShape,
    assignment: PermAssignment,
    seed: u64,
) -> Result<GraphManifold, GenError> {
    let pairs = shape.edge_pairs();
    let mut rng = Rng::new(seed);
    let perms: Vec<SlotPermutation> = match assignment {
        PermAssignment::UniformZF2 => vec![SlotPermutation::from_classes(1, 1); pairs.len()],
        PermAssignment::UniformZF1 => vec![SlotPermutation::from_classes(2, 2); pairs.len()],
        PermAssignment::Alternating => (0..pairs.len())
            .map(|i| {
                if i % 2 == 0 {
                    SlotPermutation::from_classes(1, 1)
                } else {
                    SlotPermutation::from_classes(2, 2)
                }
            })
            .collect(),
        PermAssignment::AllTypeTwo => type_two_labels(shape)
            .into_iter()
            .map(|(t, h)| SlotPermutation::from_classes(t, h).with_random_signs(&mut rng))
            .collect(),
        PermAssignment::Mixed => (0..pairs.len())
            .map(|_| {
                let t = rng.range_i64(1, 2) as usize;
                let h = rng.range_i64(1, 2) as usize;
                SlotPermutation::from_classes(t, h).with_random_signs(&mut rng)
            })
            .collect(),
    };
    let g = skeleton(shape, perms.iter().map(|p| GluingMatrix::new(p.matrix())).collect());
    let report = g.validate();
    if !report.is_valid() {
        return Err(GenError::Postcondition(format!(
            "orthogonal generator produced an invalid manifold: {report}"
        )));
    }
    let inv = invariant_set(&g)?;
    if !inv.all_i_one() || !inv.all_j_one() {
        return Err(GenError::Postcondition(
            "orthogonal generator produced nontrivial intersection data".into(),
        ));
    }
    Ok(g)
}

/// The cycle family: k genus-1 blocks with two boundary circles in a cycle,
/// every gluing the z <-> f2 exchange; the perturbed variant replaces the
/// v2 -> v3 gluing by the unipotent deformation [[0,0,1],[0,1,1],[1,0,0]].
/// Both variants validate with all intersection and secondary intersection
/// numbers equal to 1 (recomputed).
pub fn gen_cycle_example(k: usize, perturbed: bool) -> Result<GraphManifold, GenError> {
    assert!(k >= 3, "the cycle family needs k >= 3");
    let flip = SlotPermutation::from_classes(1, 1).matrix();
    let gluings: Vec<GluingMatrix> = (0..k)
        .map(|i| {
            if perturbed && i == 1 {
                GluingMatrix::from_rows_i64(&[vec![0, 0, 1], vec![0, 1, 1], vec![1, 0, 0]])
            } else {
                GluingMatrix::new(flip.clone())
            }
        })
        .collect();
    let g = skeleton(GraphShape::Cycle(k), gluings);
    let report = g.validate();
    if !report.is_valid() {
        return Err(GenError::Postcondition(format!("cycle example invalid: {report}")));
    }
    let inv = invariant_set(&g)?;
    if !inv.all_i_one() || !inv.all_j_one() {
        return Err(GenError::Postcondition(
            "cycle example has nontrivial intersection data".into(),
        ));
    }
    Ok(g)
}

/// Target family for the random generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomTarget {
    /// All intersection numbers 1, all secondary intersection numbers 1,
    /// every vertex of type exactly 2.
    I1J1Type2,
    /// Anything that validates.
    Unconstrained,
    /// Prescribed secondary intersection numbers in {1,2,3} with the
    /// cover-compatible gluings of the unwinding construction.
    MixedJ,
}

#[derive(Clone, Copy, Debug)]
pub struct GenOptions {
    pub target: RandomTarget,
    pub attempt_budget: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            target: RandomTarget::Unconstrained,
            attempt_budget: 10_000,
        }
    }
}

/// Seeded random manifold on a shape. Deterministic for a fixed seed;
/// rejection-sampled until the target's invariants hold (recomputed).
pub fn gen_random(shape: GraphShape, seed: u64, options: GenOptions) -> Result<GraphManifold, GenError> {
    match options.target {
        RandomTarget::I1J1Type2 => gen_i1j1type2(shape, seed, options.attempt_budget),
        RandomTarget::Unconstrained => gen_unconstrained(shape, seed, options.attempt_budget),
        RandomTarget::MixedJ => gen_mixed_j(shape, seed, options.attempt_budget),
    }
}

fn gen_unconstrained(shape: GraphShape, seed: u64, budget: usize) -> Result<GraphManifold, GenError> {
    let mut rng = Rng::new(seed ^ 0x756e636f);
    let pairs = shape.edge_pairs();
    for _ in 0..budget {
        let gluings: Vec<GluingMatrix> = (0..pairs.len())
            .map(|_| GluingMatrix::new(crate::rng::random_unimodular(&mut rng, 9)))
            .collect();
        let g = skeleton(shape, gluings);
        if g.validate().is_valid() {
            return Ok(g);
        }
    }
    Err(GenError::BudgetExceeded {
        what: "unconstrained random manifold".into(),
        budget,
    })
}

/// Starts from an all-type-2 orthogonal manifold and perturbs it. A third
/// of the instances are scrambled by a random Waldhausen basis change (so
/// they stay orthogonal under the criterion); the rest get unipotent shears
/// along the intersection direction on both sides of each edge, which keep
/// det = -1 and the b-row (so every intersection number stays 1) while the
/// vertex data moves. Rejection keeps type 2 and j = 1.
fn gen_i1j1type2(shape: GraphShape, seed: u64, budget: usize) -> Result<GraphManifold, GenError> {
    let mut rng = Rng::new(seed ^ 0x69316a31);
    for _ in 0..budget {
        let base = gen_orthogonal(shape, PermAssignment::AllTypeTwo, rng.next_u64())?;
        let g = if rng.below(3) == 0 {
            let h = random_basis_change(&base, &mut rng, 2);
            crate::wstructure::apply_basis_change(&base, &h)?
        } else {
            let gluings: Vec<GluingMatrix> = base
                .edges()
                .iter()
                .map(|e| {
                    GluingMatrix::new(perturb_along_intersection(&mut rng, e.gluing.matrix()))
                })
                .collect();
            base.with_gluings(gluings)
        };
        if !g.validate().is_valid() {
            continue;
        }
        let inv = invariant_set(&g)?;
        if inv.all_i_one()
            && inv.all_j_one()
            && inv.vertices.iter().all(|v| v.vtype == 2)
        {
            return Ok(g);
        }
    }
    Err(GenError::BudgetExceeded {
        what: "i=1, j=1, type-2 random manifold".into(),
        budget,
    })
}

/// Adds integer multiples of the intersection-axis column into the other
/// fiber column (far side) and of the matched fiber row into the other
/// fiber row (near side).
fn perturb_along_intersection(rng: &mut Rng, m: &IntMatrix) -> IntMatrix {
    let mut out = m.clone();
    // far matched column: the fiber column with zero z-entry
    let a_far = if out.get(0, 1).is_zero() { 1 } else { 2 };
    let b_far = 3 - a_far;
    for _ in 0..rng.below(3) {
        let t = BigInt::from(rng.range_i64(-2, 2));
        if t.is_zero() {
            continue;
        }
        if rng.coin() {
            for r in 0..3 {
                let v = out.get(r, b_far) + &t * out.get(r, a_far);
                out.set(r, b_far, v);
            }
        } else {
            // near matched axis: the fiber row holding the matched column's unit
            let a_near = if out.get(1, a_far).abs().is_one() { 1 } else { 2 };
            let b_near = 3 - a_near;
            for c in 0..3 {
                let v = out.get(b_near, c) + &t * out.get(a_near, c);
                out.set(b_near, c, v);
            }
        }
    }
    out
}

/// Per-vertex class data for the mixed-j construction.
struct VertexDesign {
    /// Primitive class generators; |det| is the target secondary index.
    p: [[BigInt; 2]; 2],
    j: BigUint,
}

fn vertex_design(rng: &mut Rng, target_j: u32) -> VertexDesign {
    let presets: &[[[i64; 2]; 2]] = match target_j {
        1 => &[[[1, 0], [0, 1]], [[1, 1], [0, 1]], [[1, 0], [1, 1]]],
        2 => &[[[1, 1], [1, -1]], [[1, 0], [1, 2]], [[1, 2], [1, 0]]],
        _ => &[[[1, 1], [1, -2]], [[1, 0], [1, 3]], [[1, 3], [1, 0]]],
    };
    let pick = *rng.pick(presets);
    VertexDesign {
        p: [
            [BigInt::from(pick[0][0]), BigInt::from(pick[0][1])],
            [BigInt::from(pick[1][0]), BigInt::from(pick[1][1])],
        ],
        j: BigUint::from(target_j),
    }
}

impl VertexDesign {
    /// Basis of the designed cover lattice <far_j * z> + P_v, as columns.
    fn cover_basis(&self, far_j: &BigUint) -> IntMatrix {
        let mut s = IntMatrix::zero(3, 3);
        s.set(0, 0, BigInt::from(far_j.clone()));
        for c in 0..2 {
            s.set(1, c + 1, self.p[c][0].clone());
            s.set(2, c + 1, self.p[c][1].clone());
        }
        s
    }

    fn p_lattice(&self) -> Lattice {
        Lattice::from_generators(
            2,
            vec![self.p[0].to_vec(), self.p[1].to_vec()],
        )
    }
}

/// Builds manifolds with prescribed secondary intersection numbers by
/// writing each gluing as S_v gamma S_u^{-1}: the cover lattices spanned by
/// the fiber-intersection groups then correspond under the gluing by
/// construction, which is exactly the hypothesis the unwinding's index law
/// needs. gamma is sampled per edge and accepted only when the whole matrix
/// is integral with det -1 and realizes the designed intersection classes.
pub fn gen_mixed_j(shape: GraphShape, seed: u64, budget: usize) -> Result<GraphManifold, GenError> {
    let mut rng = Rng::new(seed ^ 0x6d697864);
    let pairs = shape.edge_pairs();
    let nv = shape.vertex_count();
    let labels = type_two_labels(shape);
    for _ in 0..(budget / 100).max(1) {
        let designs: Vec<VertexDesign> = (0..nv)
            .map(|i| {
                // spread the targets so each manifold mixes values
                let t = match (i as u64 + rng.below(3)) % 3 {
                    0 => 1,
                    1 => 2,
                    _ => 3,
                };
                vertex_design(&mut rng, t)
            })
            .collect();
        let mut gluings = Vec::with_capacity(pairs.len());
        let mut ok = true;
        for (k, &(a, b)) in pairs.iter().enumerate() {
            let (ct, ch) = labels[k];
            match sample_cover_gluing(&mut rng, &designs[a], &designs[b], ct - 1, ch - 1, 400) {
                Some(m) => gluings.push(GluingMatrix::new(m)),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let g = skeleton(shape, gluings);
        if !g.validate().is_valid() {
            continue;
        }
        let inv = invariant_set(&g)?;
        let matches = inv.vertices.iter().enumerate().all(|(i, vi)| {
            vi.vtype == 2 && vi.j == designs[i].j && vi.p_v == designs[i].p_lattice()
        });
        if matches {
            return Ok(g);
        }
    }
    Err(GenError::BudgetExceeded {
        what: "mixed-j random manifold".into(),
        budget,
    })
}

/// One gluing for the mixed-j family: near classes ct/far class ch (0-based)
/// are the matched ones. Returns an integral det -1 matrix carrying the far
/// cover lattice onto the near one and the far matched class onto the near
/// matched class, or None when the per-edge budget runs out.
fn sample_cover_gluing(
    rng: &mut Rng,
    near: &VertexDesign,
    far: &VertexDesign,
    ct: usize,
    ch: usize,
    budget: usize,
) -> Option<IntMatrix> {
    let s_near = near.cover_basis(&far.j);
    let s_far = far.cover_basis(&near.j);
    let det_far = s_far.det();
    let adj_far = adjugate3(&s_far);
    for _ in 0..budget {
        // gamma: the far matched slot maps onto the near matched slot
        let mut gamma = IntMatrix::zero(3, 3);
        gamma.set(ct + 1, ch + 1, BigInt::from(rng.sign()));
        let free: Vec<usize> = (0..3).filter(|&c| c != ch + 1).collect();
        for &c in &free {
            for r in 0..3 {
                gamma.set(r, c, BigInt::from(rng.range_i64(-2, 2)));
            }
        }
        if !gamma.det().abs().is_one() {
            continue;
        }
        // g = S_near * gamma * S_far^{-1}, integrality via the adjugate
        let raw = s_near.mul(&gamma).mul(&adj_far);
        let mut m = IntMatrix::zero(3, 3);
        let mut integral = true;
        'fill: for r in 0..3 {
            for c in 0..3 {
                let v = raw.get(r, c);
                if (v % &det_far).is_zero() {
                    m.set(r, c, v / &det_far);
                } else {
                    integral = false;
                    break 'fill;
                }
            }
        }
        if !integral || m.det() != -BigInt::one() {
            continue;
        }
        let gm = GluingMatrix::new(m.clone());
        if gm.b_row_is_zero() {
            continue;
        }
        // realized intersection class must be the designed matched one
        let p_design = Lattice::from_generators(
            3,
            vec![vec![
                BigInt::zero(),
                near.p[ct][0].clone(),
                near.p[ct][1].clone(),
            ]],
        );
        let p = saturate(
            &intersect(&near_fiber(), &far_fiber_of_matrix(&m)).expect("same ambient"),
        );
        if p != p_design {
            continue;
        }
        // the spanned cover lattice must equal the designed one, both sides
        let near_cover = Lattice::from_generators(3, columns_of(&s_near));
        let a_near = join(
            &crate::invariants::embed_fiber_lattice(&near.p_lattice()),
            &Lattice::from_generators(
                3,
                crate::invariants::embed_fiber_lattice(&far.p_lattice())
                    .basis_rows()
                    .iter()
                    .map(|row| m.mul_vec(row))
                    .collect(),
            ),
        )
        .expect("same ambient");
        if a_near != near_cover {
            continue;
        }
        return Some(m);
    }
    None
}

fn columns_of(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    (0..m.cols()).map(|c| m.col(c)).collect()
}

fn adjugate3(m: &IntMatrix) -> IntMatrix {
    IntMatrix::from_fn(3, 3, |r, c| {
        let rows: Vec<usize> = (0..3).filter(|&x| x != c).collect();
        let cols: Vec<usize> = (0..3).filter(|&x| x != r).collect();
        let minor = IntMatrix::from_fn(2, 2, |i, j| m.get(rows[i], cols[j]).clone());
        let cof = minor.det();
        if (r + c) % 2 == 0 {
            cof
        } else {
            -cof
        }
    })
}

/// Random valid Waldhausen basis change: seeded GL(2,Z) fiber moves and
/// shifts balanced to zero around every vertex.
pub fn random_basis_change(g: &GraphManifold, rng: &mut Rng, bound: i64) -> BasisChange {
    let mut change = BasisChange::identity();
    for b in g.blocks() {
        let mut sigma = IntMatrix::identity(2);
        for _ in 0..rng.below(4) {
            sigma = match rng.below(3) {
                0 => sigma.mul(&IntMatrix::from_rows_i64(&[vec![0, 1], vec![1, 0]])),
                1 => sigma.mul(&IntMatrix::from_rows_i64(&[
                    vec![1, rng.range_i64(-bound, bound)],
                    vec![0, 1],
                ])),
                _ => sigma.mul(&IntMatrix::from_rows_i64(&[
                    vec![1, 0],
                    vec![rng.range_i64(-bound, bound), 1],
                ])),
            };
        }
        change.vertices.insert(
            b.id.clone(),
            VertexChange {
                epsilon: sigma.det(),
                sigma,
            },
        );
    }
    for (v, _) in g.blocks().iter().enumerate() {
        let dv = g.boundary_of(v);
        let mut sum = [BigInt::zero(), BigInt::zero()];
        for (k, w) in dv.iter().enumerate() {
            let key = (g.edges()[w.edge].id.clone(), w.reversed);
            if k + 1 == dv.len() {
                change.shifts.insert(key, [-sum[0].clone(), -sum[1].clone()]);
            } else {
                let n = [
                    BigInt::from(rng.range_i64(-bound, bound)),
                    BigInt::from(rng.range_i64(-bound, bound)),
                ];
                sum[0] += &n[0];
                sum[1] += &n[1];
                change.shifts.insert(key, n);
            }
        }
    }
    change
}

/// Random valid gluing matrix: unimodular with det -1, nonzero b-row,
/// entries bounded by `bound` (built as a signed permutation dressed with
/// elementary operations).
pub fn random_gluing(rng: &mut Rng, bound: i64) -> GluingMatrix {
    loop {
        let m = crate::rng::random_unimodular(rng, bound);
        let gm = GluingMatrix::new(m);
        if !gm.b_row_is_zero() {
            return gm;
        }
    }
}

/// Attaches generator metadata (kind, seed) to a manifold.
pub fn with_generator_meta(g: GraphManifold, kind: &str, seed: Option<u64>) -> GraphManifold {
    let mut meta = serde_json::Map::new();
    meta.insert("generator".into(), serde_json::Value::String(kind.into()));
    if let Some(s) = seed {
        meta.insert("seed".into(), serde_json::Value::from(s));
    }
    g.with_meta(serde_json::Value::Object(meta))
}

/// Enumerates the directed edges of `g` (forward then reverse per edge).
pub fn directed_edges(g: &GraphManifold) -> Vec<DirectedEdge> {
    (0..g.edges().len())
        .flat_map(|i| [DirectedEdge::forward(i), DirectedEdge::forward(i).opposite()])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charge::{charge_data, orthogonality_criterion, OrthogonalityVerdict};
    use crate::json::{manifold_from_json, manifold_to_json};
    use crate::wstructure::is_explicitly_orthogonal;
    use num_traits::One;

    #[test]
    fn cycle_example_matches_uniform_orthogonal() {
        let a = gen_cycle_example(3, false).unwrap();
        let b = gen_orthogonal(GraphShape::Cycle(3), PermAssignment::UniformZF2, 0).unwrap();
        for (ea, eb) in a.edges().iter().zip(b.edges()) {
            assert_eq!(ea.gluing, eb.gluing);
        }
        assert!(is_explicitly_orthogonal(&a));
    }

    #[test]
    fn perturbed_cycle_has_unit_invariants() {
        let g = gen_cycle_example(3, true).unwrap();
        let inv = invariant_set(&g).unwrap();
        assert!(inv.all_i_one());
        assert!(inv.all_j_one());
        assert_eq!(
            g.edges()[1].gluing,
            GluingMatrix::from_rows_i64(&[vec![0, 0, 1], vec![0, 1, 1], vec![1, 0, 0]])
        );
    }

    #[test]
    fn all_type_two_assignment_gives_type_two() {
        for (shape, seed) in [
            (GraphShape::Cycle(3), 1u64),
            (GraphShape::Cycle(6), 2),
            (GraphShape::Theta(3), 3),
            (GraphShape::Complete(4), 4),
        ] {
            let g = gen_orthogonal(shape, PermAssignment::AllTypeTwo, seed).unwrap();
            let inv = invariant_set(&g).unwrap();
            assert!(
                inv.vertices.iter().all(|v| v.vtype == 2),
                "{shape:?}: types {:?}",
                inv.vertices.iter().map(|v| v.vtype).collect::<Vec<_>>()
            );
            assert_eq!(
                orthogonality_criterion(&g).unwrap(),
                OrthogonalityVerdict::Pass
            );
        }
    }

    #[test]
    fn orthogonal_outputs_have_vanishing_charge() {
        let g = gen_orthogonal(GraphShape::Theta(3), PermAssignment::AllTypeTwo, 17).unwrap();
        for v in 0..g.blocks().len() {
            let cd = charge_data(&g, v).unwrap();
            assert!(cd.charge_vanishing);
            if let Some(k) = cd.k_of_b {
                assert!(k[0].is_zero() && k[1].is_zero());
            }
        }
    }

    #[test]
    fn random_is_deterministic() {
        for target in [
            RandomTarget::Unconstrained,
            RandomTarget::I1J1Type2,
            RandomTarget::MixedJ,
        ] {
            let opts = GenOptions {
                target,
                ..Default::default()
            };
            let a = gen_random(GraphShape::Cycle(4), 7, opts).unwrap();
            let b = gen_random(GraphShape::Cycle(4), 7, opts).unwrap();
            assert_eq!(manifold_to_json(&a), manifold_to_json(&b));
        }
    }

    #[test]
    fn i1j1type2_target_holds() {
        for seed in 0..10 {
            let g = gen_random(
                GraphShape::Cycle(4),
                seed,
                GenOptions {
                    target: RandomTarget::I1J1Type2,
                    ..Default::default()
                },
            )
            .unwrap();
            let inv = invariant_set(&g).unwrap();
            assert!(inv.all_i_one());
            assert!(inv.all_j_one());
            assert!(inv.vertices.iter().all(|v| v.vtype == 2));
        }
    }

    #[test]
    fn mixed_j_realizes_designed_indices() {
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..8 {
            let g = gen_random(
                GraphShape::Cycle(4),
                seed,
                GenOptions {
                    target: RandomTarget::MixedJ,
                    ..Default::default()
                },
            )
            .unwrap();
            let inv = invariant_set(&g).unwrap();
            for v in &inv.vertices {
                assert_eq!(v.vtype, 2);
                seen.insert(v.j.clone());
            }
        }
        assert!(seen.contains(&BigUint::from(2u32)) || seen.contains(&BigUint::from(3u32)));
    }

    #[test]
    fn unconstrained_validates() {
        for seed in 0..20 {
            let g = gen_random(GraphShape::Cycle(3), seed, GenOptions::default()).unwrap();
            assert!(g.validate().is_valid());
        }
    }

    #[test]
    fn generator_outputs_roundtrip() {
        let g = with_generator_meta(
            gen_orthogonal(GraphShape::Complete(4), PermAssignment::Mixed, 5).unwrap(),
            "orthogonal",
            Some(5),
        );
        let s = manifold_to_json(&g);
        assert_eq!(manifold_to_json(&manifold_from_json(&s, false).unwrap()), s);
    }

    #[test]
    fn bad_permutation_is_rejected() {
        assert!(matches!(
            SlotPermutation::new([0, 1, 2], [1, 1, 1]),
            Err(GenError::BadPermutation(_))
        ));
        assert!(SlotPermutation::new([2, 1, 0], [1, 1, 1]).is_ok());
    }

    #[test]
    fn random_gluing_is_valid() {
        let mut rng = Rng::new(123);
        for _ in 0..50 {
            let gm = random_gluing(&mut rng, 20);
            assert_eq!(gm.det(), -BigInt::one());
            assert!(!gm.b_row_is_zero());
        }
    }
}
