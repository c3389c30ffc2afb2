mod common;

use nedelec::amr::{CellKey, Forest};
use nedelec::assembly::{solve, Coefficients};
use nedelec::interpolation::{error_norms, interpolate, AnalyticField};
use nedelec::space::{max_tangential_jump, FeSpace};
use nedelec::vec3::Vec3;
use proptest::prelude::*;

fn corner_refined(dim: usize) -> Forest {
    let n = vec![2; dim];
    let mut f = Forest::unit(&n).unwrap();
    f.refine(&[CellKey { level: 0, coords: [0; 3] }]).unwrap();
    let inner = if dim == 3 { [1, 1, 1] } else { [1, 1, 0] };
    f.refine(&[CellKey { level: 1, coords: inner }]).unwrap();
    f
}

#[test]
fn random_forests_are_balanced_and_continuous() {
    let mut rng = common::rng(30);
    for trial in 0..4 {
        let forest = common::random_forest(&[4, 4], 4 + trial, &mut rng);
        assert!(forest.is_balanced());
        for k in 1..=3 {
            let space = FeSpace::on_forest(&forest, k, false).unwrap();
            let u = common::random_member(&space, &mut rng);
            let j = max_tangential_jump(&space, &u, 4);
            assert!(j < 1e-9, "trial {trial} k={k}: {j:e}");
        }
    }
}

#[test]
fn octree_fields_are_continuous() {
    let mut rng = common::rng(31);
    let forest = common::random_forest(&[2, 2, 2], 3, &mut rng);
    for k in 1..=2 {
        let space = FeSpace::on_forest(&forest, k, false).unwrap();
        assert!(!space.hanging.is_empty());
        let u = common::random_member(&space, &mut rng);
        assert!(max_tangential_jump(&space, &u, 3) < 1e-9);
    }
}

#[test]
fn constrained_solve_reproduces_space_members() {
    let mut rng = common::rng(32);
    for (dim, n) in [(2, vec![3, 3]), (3, vec![2, 2, 2])] {
        let forest = common::random_forest(&n, 2, &mut rng);
        for k in 1..=2 {
            let p = common::random_vector_poly(dim, k - 1, &mut rng);
            let cc = p.curl().curl();
            let (pu, pc) = (p.clone(), p.clone());
            let exact = AnalyticField::new(move |x| pu.eval(x), move |x| pc.curl_at(x));
            let f = move |x: &Vec3| {
                let a = p.eval(x);
                let b = cc.eval(x);
                [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
            };
            let space = FeSpace::on_forest(&forest, k, true).unwrap();
            let (uh, _) = solve(&space, &Coefficients::unit(), &f, Some(&|x| exact.value(x)), 1e-12).unwrap();
            let e = error_norms(&space, &uh, &exact, 0).unwrap();
            assert!(e.hcurl < 1e-8, "dim {dim} k={k}: {:e}", e.hcurl);
            let iu = interpolate(&space, &|x| exact.value(x));
            let gap = uh.values.iter().zip(&iu.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(gap < 1e-8);
            assert!(uh.constraint_residual(&space) < 1e-12);
        }
    }
}

#[test]
fn restriction_matches_moment_oracle() {
    let mut rng = common::rng(33);
    let forest = common::random_forest(&[4, 4], 3, &mut rng);
    for k in 1..=3 {
        let space = FeSpace::on_forest(&forest, k, false).unwrap();
        for _ in 0..3 {
            let u = common::random_member(&space, &mut rng);
            assert!(common::restriction_oracle_error(&space, &u) < 1e-9);
        }
    }
    let forest = corner_refined(3);
    let space = FeSpace::on_forest(&forest, 2, false).unwrap();
    let u = common::random_member(&space, &mut rng);
    assert!(common::restriction_oracle_error(&space, &u) < 1e-9);
}

#[test]
fn hanging_dofs_are_not_free() {
    let forest = corner_refined(2);
    let space = FeSpace::on_forest(&forest, 2, true).unwrap();
    for &i in space.constraints.rows.keys() {
        assert!(!space.is_free(i) && !space.is_dirichlet(i));
        for &(j, _) in &space.constraints.rows[&i] {
            assert!(!space.constraints.is_constrained(j));
        }
    }
}

#[test]
fn unit_square_l2_of_interpolant_is_exact_for_constants() {
    let forest = corner_refined(2);
    let space = FeSpace::on_forest(&forest, 1, false).unwrap();
    let c = AnalyticField::new(|_| [0.7, -0.2, 0.0], |_| [0.0; 3]);
    let iu = interpolate(&space, &|x| c.value(x));
    assert!(error_norms(&space, &iu, &c, 0).unwrap().hcurl < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_refinement_keeps_balance(seed in 0u64..100_000, rounds in 1usize..6) {
        let mut rng = common::rng(seed);
        let forest = common::random_forest(&[4, 4], rounds, &mut rng);
        prop_assert!(forest.is_balanced());
        let space = FeSpace::on_forest(&forest, 1, false).unwrap();
        let u = common::random_member(&space, &mut rng);
        prop_assert!(max_tangential_jump(&space, &u, 3) < 1e-9);
    }
}
