//! Acceptance criteria 1-10 plus the Fichera smoke run. Prints one line per
//! criterion and exits nonzero if any fails.

mod common;

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use nedelec::amr::Forest;
use nedelec::assembly::{solve, Coefficients};
use nedelec::element::{Moment, ReferenceElement};
use nedelec::harness::{
    mark_cells, run_experiment, slope_last_two, slopes, ConvergenceRecord, ExperimentConfig, Problem, Refinement,
};
use nedelec::interpolation::error_norms;
use nedelec::poly::sk_basis;
use nedelec::space::{max_tangential_jump, FeSpace};
use nedelec::topology::{CellKind, Family};
use nedelec::vec3::Vec3;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// Max deviation of the moment matrix `sum w(m) . phi_b(x)` from identity,
/// with all shapes evaluated once per quadrature point.
fn identity_error(
    el: &ReferenceElement,
    shapes: &dyn Fn(&Vec3) -> Vec<Vec3>,
    weight: &dyn Fn(&Moment, &Vec3) -> Vec3,
) -> f64 {
    let mut cache = std::collections::HashMap::new();
    let mut worst: f64 = 0.0;
    for (a, m) in el.moments.moments.iter().enumerate() {
        let vals: &Vec<Vec<Vec3>> =
            cache.entry((m.owner.dim, m.owner.local_index)).or_insert_with(|| m.points.iter().map(shapes).collect());
        let mut row = vec![0.0; el.n_dofs()];
        for (phis, w) in vals.iter().zip(&m.weights) {
            let w = weight(m, w);
            for (r, phi) in row.iter_mut().zip(phis) {
                *r += nedelec::vec3::dot(phi, &w);
            }
        }
        for (b, v) in row.iter().enumerate() {
            worst = worst.max((v - if a == b { 1.0 } else { 0.0 }).abs());
        }
    }
    worst
}

fn c1_duality() -> Outcome {
    let mut worst: f64 = 0.0;
    for kind in CellKind::ALL {
        for k in 1..=4 {
            let el = ReferenceElement::get(kind, k).unwrap();
            worst = worst.max(identity_error(&el, &|x| el.eval_shapes(x).0, &|_, w| *w));
        }
    }
    outcome(worst < 1e-10, format!("max |sigma_a(phi_b) - delta_ab| = {worst:.2e} (< 1e-10)"))
}

fn c2_dof_counts() -> Outcome {
    let formula = |kind: CellKind, k: usize| match (kind.family, kind.dim) {
        (Family::Cube, 2) => 2 * k * (k + 1),
        (Family::Cube, _) => 3 * k * (k + 1) * (k + 1),
        (Family::Simplex, 2) => k * (k + 2),
        (Family::Simplex, _) => k * (k * k + 5 * k + 6) / 2,
    };
    let mut bad = Vec::new();
    for kind in CellKind::ALL {
        for k in 1..=6 {
            let n = ReferenceElement::get(kind, k).map(|e| e.n_dofs());
            if n.as_ref().ok() != Some(&formula(kind, k)) {
                bad.push(format!("{} k={k}: {n:?}", kind.name()));
            }
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "all kinds, k = 1..6 exact".into() } else { bad.join("; ") })
}

fn c3_sk() -> Outcome {
    let mut rng = common::rng(3);
    let mut notes = Vec::new();
    for d in [2, 3] {
        for k in 1..=5 {
            let s = sk_basis(k, d).unwrap();
            let want = if d == 3 { (k + 2) * k } else { k };
            if s.len() != want {
                notes.push(format!("d={d} k={k}: dim {}", s.len()));
            }
            if !s.terms.iter().all(|p| p.dot_position().is_zero()) {
                notes.push(format!("d={d} k={k}: p.x != 0"));
            }
            let pts = 3 * s.len();
            let mut m = DMatrix::zeros(pts * d, s.len());
            for q in 0..pts {
                let x: Vec3 = std::array::from_fn(|i| if i < d { rng.random_range(-1.0..1.0) } else { 0.0 });
                for (b, p) in s.terms.iter().enumerate() {
                    let v = p.eval(&x);
                    for i in 0..d {
                        m[(q * d + i, b)] = v[i];
                    }
                }
            }
            let sv = m.singular_values();
            let rank = sv.iter().filter(|&&v| v > 1e-10 * sv.max()).count();
            if rank != s.len() {
                notes.push(format!("d={d} k={k}: rank {rank} of {}", s.len()));
            }
        }
    }
    outcome(notes.is_empty(), if notes.is_empty() { "dims, p.x = 0 and full rank for k = 1..5".into() } else { notes.join("; ") })
}

fn c4_conformity() -> Outcome {
    let mut rng = common::rng(4);
    let mut worst: f64 = 0.0;
    for kind in CellKind::ALL {
        let mesh = common::two_cell_mesh(kind);
        for k in 1..=3 {
            let space = FeSpace::conforming(&mesh, k, false).unwrap();
            for _ in 0..5 {
                let u = common::random_member(&space, &mut rng);
                worst = worst.max(max_tangential_jump(&space, &u, 6));
            }
        }
    }
    outcome(worst < 1e-10, format!("max tangential jump {worst:.2e} (< 1e-10)"))
}

fn uniform(problem: Problem, family: Family, k: usize, initial: usize, steps: usize) -> Vec<ConvergenceRecord> {
    let mut cfg = ExperimentConfig::new(problem, family, k, Refinement::Uniform, steps);
    cfg.initial = Some(initial);
    run_experiment(&cfg).unwrap()
}

fn rates(records: &[ConvergenceRecord]) -> (f64, f64) {
    let s = slopes(records, 2, false).unwrap();
    (s.l2_last, s.hcurl_last)
}

fn slope_sweep(problem: Problem, initial: usize, steps: usize, orders: &[usize], tol: f64, limit: Duration) -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for family in [Family::Cube, Family::Simplex] {
        for &k in orders {
            let (l2, hc) = rates(&uniform(problem, family, k, initial, steps));
            let ok = (l2 - k as f64).abs() <= tol && (hc - k as f64).abs() <= tol;
            pass &= ok;
            let cell = if family == Family::Cube { "hex" } else { "tet" };
            parts.push(format!("{cell} k={k}: {l2:.3}/{hc:.3}"));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed < limit;
    outcome(pass, format!("L2/Hcurl slopes {} (+-{tol}); {:.1}s (< {}s)", parts.join(", "), elapsed.as_secs_f64(), limit.as_secs()))
}

fn c7_lshaped() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=2 {
        let (_, hc) = rates(&uniform(Problem::LShaped(1), Family::Cube, k, 8, 4));
        let ok = (hc - 2.0 / 3.0).abs() <= 0.1;
        pass &= ok;
        parts.push(format!("n=1 k={k}: {hc:.3}"));
    }
    for k in 1..=3 {
        let (_, hc) = rates(&uniform(Problem::LShaped(4), Family::Cube, k, 8, 4));
        let want = (k as f64).min(8.0 / 3.0);
        pass &= (hc - want).abs() <= 0.2;
        parts.push(format!("n=4 k={k}: {hc:.3} vs {want:.3}"));
    }
    outcome(pass, format!("Hcurl slopes {} (n=1: 2/3 +-0.1, n=4: +-0.2)", parts.join(", ")))
}

/// Criterion 8 properties on one forest; returns (jump, reproduction, oracle).
fn amr_properties(forest: &Forest, orders: &[usize], members: usize, seed: u64) -> (f64, f64, f64) {
    let mut rng = common::rng(seed);
    let (mut jump, mut repro, mut oracle) = (0.0f64, 0.0f64, 0.0f64);
    let dim = forest.dim;
    for &k in orders {
        let free = FeSpace::on_forest(forest, k, false).unwrap();
        for _ in 0..members {
            let u = common::random_member(&free, &mut rng);
            jump = jump.max(max_tangential_jump(&free, &u, 4));
            oracle = oracle.max(common::restriction_oracle_error(&free, &u));
        }
        let space = FeSpace::on_forest(forest, k, true).unwrap();
        let (exact, f) = common::polynomial_problem(dim, k - 1, &mut rng);
        let (uh, _) = solve(&space, &Coefficients::unit(), &f, Some(&|x| exact.value(x)), 1e-12).unwrap();
        repro = repro.max(error_norms(&space, &uh, &exact, 0).unwrap().hcurl);
    }
    (jump, repro, oracle)
}

fn c8_amr() -> Outcome {
    let mut rng = common::rng(8);
    let (mut jump, mut repro, mut oracle) = (0.0f64, 0.0f64, 0.0f64);
    let mut cells = 0;
    for trial in 0..5 {
        let forest = common::random_forest(&[4, 4], 3 + trial, &mut rng);
        cells += forest.n_leaves();
        let members = if trial == 0 { 20 } else { 2 };
        let (j, r, o) = amr_properties(&forest, &[1, 2, 3], members, 80 + trial as u64);
        jump = jump.max(j);
        repro = repro.max(r);
        oracle = oracle.max(o);
    }
    let forest = common::random_forest(&[2, 2, 2], 2, &mut rng);
    let (j, r, o) = amr_properties(&forest, &[1, 2], 2, 89);
    jump = jump.max(j);
    repro = repro.max(r);
    oracle = oracle.max(o);
    let pass = jump < 1e-9 && repro < 1e-8 && oracle < 1e-9;
    outcome(
        pass,
        format!(
            "(a) jump {jump:.2e} (< 1e-9), (b) in-space Hcurl error {repro:.2e} (< 1e-8), (c) restriction vs oracle {oracle:.2e} (< 1e-9); {cells} leaves over 5 quadtrees + 1 octree"
        ),
    )
}

fn c9_adaptive() -> Outcome {
    let start = Instant::now();
    let cfg = ExperimentConfig::new(Problem::LShaped(1), Family::Cube, 2, Refinement::Adaptive(0.05), 12);
    let adaptive = run_experiment(&cfg).unwrap();
    let max_dofs = adaptive.iter().map(|r| r.n_dofs).max().unwrap();
    let mut steps = 1;
    let uni = loop {
        let u = uniform(Problem::LShaped(1), Family::Cube, 2, 8, steps);
        if u.last().unwrap().n_dofs >= max_dofs || steps > 8 {
            break u;
        }
        steps += 1;
    };
    // uniform Hcurl error at equal DOFs by log-log interpolation
    let at = |n: f64| {
        let i = uni.windows(2).position(|w| (w[1].n_dofs as f64) >= n).unwrap_or(uni.len() - 2);
        let (a, b) = (&uni[i], &uni[i + 1]);
        let t = (n.ln() - (a.n_dofs as f64).ln()) / ((b.n_dofs as f64).ln() - (a.n_dofs as f64).ln());
        (a.hcurl_error.ln() + t * (b.hcurl_error.ln() - a.hcurl_error.ln())).exp()
    };
    let compared: Vec<_> = adaptive.iter().filter(|r| r.n_dofs > 1000).collect();
    let worst = compared.iter().map(|r| r.hcurl_error / at(r.n_dofs as f64)).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    let pass = !compared.is_empty() && worst < 1.0 && elapsed < Duration::from_secs(180);
    outcome(
        pass,
        format!(
            "{} adaptive steps above 1000 DOFs, max adaptive/uniform Hcurl ratio {worst:.3} (< 1); {:.1}s (< 180s)",
            compared.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn c10_piola() -> Outcome {
    let mut rng = common::rng(10);
    let mut worst: f64 = 0.0;
    for kind in CellKind::ALL {
        for k in 1..=3 {
            let el = ReferenceElement::get(kind, k).unwrap();
            for _ in 0..5 {
                let map = common::random_affine(kind.dim, &mut rng);
                // physical shapes at the mapped point, pulled back through the inverse map
                let shapes = |x: &Vec3| {
                    let xp = map.map_point(x);
                    el.eval_shapes(&map.inverse_point(&xp)).0.iter().map(|v| map.push_value(v)).collect()
                };
                let weight = |m: &Moment, w: &Vec3| common::physical_weight(kind, &map, m, w);
                worst = worst.max(identity_error(&el, &shapes, &weight));
            }
        }
    }
    outcome(worst < 1e-10, format!("max physical-moment deviation {worst:.2e} over 5 maps per kind, k = 1..3 (< 1e-10)"))
}

fn fichera_smoke() -> Outcome {
    let p = Problem::Fichera;
    let (lo, hi, keep) = p.domain();
    let (u, f) = p.fields();
    let mut forest = Forest::new(&[4, 4, 4], lo, hi, &keep).unwrap();
    let (mut jump, mut repro, mut oracle) = (0.0f64, 0.0f64, 0.0f64);
    let mut errors = Vec::new();
    let mut dofs = Vec::new();
    for step in 0..6 {
        let space = FeSpace::on_forest(&forest, 1, true).unwrap();
        let (uh, _) = solve(&space, &Coefficients::unit(), &|x| f.value(x), Some(&|x| u.value(x)), 1e-10).unwrap();
        let e = error_norms(&space, &uh, &u, 4).unwrap();
        errors.push(e.hcurl);
        dofs.push((space.n_dofs() - space.constraints.len()) as f64);
        if step % 2 == 1 {
            let (j, r, o) = amr_properties(&forest, &[1], 2, 90 + step as u64);
            jump = jump.max(j);
            repro = repro.max(r);
            oracle = oracle.max(o);
        }
        let leaves = space.leaves.clone().unwrap();
        let marked: Vec<_> = mark_cells(&e.cell_l2_sq, 0.05).into_iter().map(|c| leaves[c]).collect();
        forest.refine(&marked).unwrap();
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let x: Vec<f64> = dofs.iter().map(|n| n.powf(-1.0 / 3.0)).collect();
    let rate = slope_last_two(&x, &errors);
    let pass = decreasing && jump < 1e-9 && repro < 1e-8 && oracle < 1e-9;
    outcome(
        pass,
        format!(
            "6 adaptive steps k=1: Hcurl {:.3e} -> {:.3e} (monotone: {decreasing}, rate {rate:.2}), jump {jump:.2e}, in-space {repro:.2e}, oracle {oracle:.2e}",
            errors[0],
            errors[5]
        ),
    )
}

fn main() {
    type Check = fn() -> Outcome;
    let checks: Vec<(&str, Check)> = vec![
        ("criterion 1 (dual basis)", c1_duality),
        ("criterion 2 (DOF counts)", c2_dof_counts),
        ("criterion 3 (S_k)", c3_sk),
        ("criterion 4 (two-cell conformity)", c4_conformity),
        ("criterion 5 (2D uniform convergence)", || {
            slope_sweep(Problem::Unit2d, 4, 4, &[1, 2, 3], 0.15, Duration::from_secs(120))
        }),
        ("criterion 6 (3D uniform convergence)", || {
            slope_sweep(Problem::Unit3d, 2, 3, &[1, 2], 0.2, Duration::from_secs(600))
        }),
        ("criterion 7 (L-shaped singular)", c7_lshaped),
        ("criterion 8 (AMR constraints)", c8_amr),
        ("criterion 9 (adaptive efficiency)", c9_adaptive),
        ("criterion 10 (Piola equivalence)", c10_piola),
        ("fichera smoke", fichera_smoke),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} {name}: {} [{:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
}
