//! Randomized structural properties of the W-structure layer.

use gm_core::charge::space_q;
use gm_core::generators::{
    gen_random, random_basis_change, random_gluing, GenOptions, GraphShape, RandomTarget,
};
use gm_core::invariants::{class_partition, index_characterization, intersection_number, invariant_set};
use gm_core::rng::Rng;
use gm_core::wstructure::apply_basis_change;

#[test]
fn reverse_preserves_intersection_number() {
    let mut rng = Rng::new(2024);
    for _ in 0..200 {
        let gm = random_gluing(&mut rng, 20);
        let rev = gm.reverse().unwrap();
        assert_eq!(intersection_number(&gm), intersection_number(&rev));
        assert_eq!(rev.reverse().unwrap(), gm);
    }
}

#[test]
fn basis_changes_preserve_all_invariants() {
    let mut rng = Rng::new(77);
    for seed in 0..15 {
        let shape = match seed % 3 {
            0 => GraphShape::Cycle(4),
            1 => GraphShape::Theta(3),
            _ => GraphShape::Complete(4),
        };
        let g = gen_random(shape, seed, GenOptions::default()).unwrap();
        let h = random_basis_change(&g, &mut rng, 3);
        let g2 = apply_basis_change(&g, &h).unwrap();
        assert!(g2.validate().is_valid(), "seed {seed}");
        let a = invariant_set(&g).unwrap();
        let b = invariant_set(&g2).unwrap();
        assert_eq!(a.manifold_type, b.manifold_type, "seed {seed}");
        for (x, y) in a.edges.iter().zip(&b.edges) {
            assert_eq!(x.i, y.i, "seed {seed}");
            assert_eq!(x.fe_index, y.fe_index, "seed {seed}");
        }
        for (x, y) in a.vertices.iter().zip(&b.vertices) {
            assert_eq!(x.j, y.j, "seed {seed}");
            assert_eq!(x.vtype, y.vtype, "seed {seed}");
        }
        assert_eq!(
            class_partition(&g, &a),
            class_partition(&g2, &b),
            "seed {seed}"
        );
    }
}

#[test]
fn gcd_equals_subgroup_index_on_random_manifolds() {
    for seed in 0..30 {
        let g = gen_random(GraphShape::Cycle(3), seed, GenOptions::default()).unwrap();
        for e in 0..g.edges().len() {
            let (i, idx) = index_characterization(&g, e).unwrap();
            assert_eq!(i, idx, "seed {seed} edge {e}");
        }
    }
}

#[test]
fn edge_lattices_lie_in_the_fiber_intersection_group() {
    use gm_core::invariants::{intersection_lattice_in_fiber, vertex_invariants};
    for seed in 0..20 {
        let g = gen_random(GraphShape::Cycle(4), seed, GenOptions::default()).unwrap();
        for v in 0..g.blocks().len() {
            let vi = vertex_invariants(&g, v).unwrap();
            for w in g.boundary_of(v) {
                let p = intersection_lattice_in_fiber(&g, w).unwrap();
                assert!(vi.p_v.contains_lattice(&p), "seed {seed}");
            }
        }
    }
}

#[test]
fn unwound_models_are_unwind_fixed_points() {
    use gm_core::transform::unwind;
    for seed in 0..5 {
        let g = gen_random(
            GraphShape::Cycle(4),
            seed,
            GenOptions {
                target: RandomTarget::MixedJ,
                ..Default::default()
            },
        )
        .unwrap();
        let u = unwind(&g).unwrap();
        let u2 = unwind(&u.local_model).unwrap();
        for (a, b) in u.local_model.edges().iter().zip(u2.local_model.edges()) {
            assert_eq!(a.gluing, b.gluing, "seed {seed}");
        }
    }
}

#[test]
fn core_types_are_shareable_across_threads() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<gm_core::lattice::Lattice>();
    assert_send_sync::<gm_core::matrix::IntMatrix>();
    assert_send_sync::<gm_core::wstructure::GraphManifold>();
    assert_send_sync::<gm_core::wstructure::BasisChange>();
    assert_send_sync::<gm_core::invariants::InvariantSet>();
    assert_send_sync::<gm_core::charge::ChargeData>();
}

#[test]
fn constraint_space_dimensions() {
    for seed in 0..10 {
        let shape = if seed % 2 == 0 {
            GraphShape::Theta(4)
        } else {
            GraphShape::Complete(4)
        };
        let g = gen_random(shape, seed, GenOptions::default()).unwrap();
        for v in 0..g.blocks().len() {
            let q = space_q(&g, v).unwrap();
            let dv = g.boundary_of(v).len();
            assert_eq!(q.dim_q, dv + 1);
            assert_eq!(q.dim_a, dv);
        }
    }
}
