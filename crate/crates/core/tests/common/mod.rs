#![allow(dead_code)]

use nedelec::amr::{edge_restriction_cached, Forest};
use nedelec::element::Moment;
use nedelec::geometry::AffineMap;
use nedelec::mesh::Mesh;
use nedelec::poly::{Polynomial, VectorPolynomial};
use nedelec::space::FeSpace;
use nedelec::topology::{edge_vector, CellKind, Family};
use nedelec::vec3::{self, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random affine map with singular values kept away from zero.
pub fn random_affine(dim: usize, rng: &mut ChaCha8Rng) -> AffineMap {
    loop {
        let mut cols = [[0.0; 3]; 3];
        for (j, col) in cols.iter_mut().enumerate().take(dim) {
            for (i, v) in col.iter_mut().enumerate().take(dim) {
                *v = rng.random_range(-0.5..0.5) + if i == j { 1.0 } else { 0.0 };
            }
            let s = rng.random_range(0.3..2.0);
            col.iter_mut().for_each(|v| *v *= s);
        }
        let mut b = [0.0; 3];
        b.iter_mut().take(dim).for_each(|v| *v = rng.random_range(-2.0..2.0));
        if let Ok(m) = AffineMap::new(dim, cols, b) {
            if m.det.abs() > 0.05 {
                return m;
            }
        }
    }
}

/// Two cells sharing one facet, with a generic (non-axis-aligned) geometry
/// for simplices.
pub fn two_cell_mesh(kind: CellKind) -> Mesh {
    match (kind.family, kind.dim) {
        (Family::Cube, 2) => nedelec::mesh::structured_hex_mesh(&[2, 1], [0.0; 3], [2.0, 1.0, 0.0]).unwrap(),
        (Family::Cube, _) => nedelec::mesh::structured_hex_mesh(&[2, 1, 1], [0.0; 3], [2.0, 1.0, 1.0]).unwrap(),
        (Family::Simplex, 2) => Mesh::new(
            kind,
            vec![[0.0, 0.0, 0.0], [1.1, 0.2, 0.0], [0.3, 0.9, 0.0], [1.2, 1.3, 0.0]],
            vec![vec![0, 1, 2], vec![3, 2, 1]],
        )
        .unwrap(),
        (Family::Simplex, _) => Mesh::new(
            kind,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.1, 0.0],
                [0.2, 1.1, 0.1],
                [0.1, 0.2, 0.9],
                [1.0, 1.0, 1.0],
            ],
            vec![vec![0, 1, 2, 3], vec![4, 3, 2, 1]],
        )
        .unwrap(),
    }
}

/// Random member of the space: random unconstrained values, constrained
/// entries recovered from their rows.
pub fn random_member(space: &FeSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut u: Vec<f64> = (0..space.n_dofs()).map(|_| rng.random_range(-1.0..1.0)).collect();
    space.constraints.distribute(&mut u);
    u
}

/// Random forest: `rounds` refinements of up to three random leaves each.
pub fn random_forest(n: &[usize], rounds: usize, rng: &mut ChaCha8Rng) -> Forest {
    let mut forest = Forest::unit(n).unwrap();
    for _ in 0..rounds {
        let leaves = forest.leaves();
        let count = rng.random_range(1..=3usize.min(leaves.len()));
        let mut marked: Vec<_> = (0..count).map(|_| leaves[rng.random_range(0..leaves.len())]).collect();
        marked.sort();
        marked.dedup();
        forest.refine(&marked).unwrap();
    }
    forest
}

/// Random vector polynomial of total degree `deg` in each component.
pub fn random_vector_poly(dim: usize, deg: usize, rng: &mut ChaCha8Rng) -> VectorPolynomial {
    let comp = |rng: &mut ChaCha8Rng| {
        let mut p = Polynomial::zero();
        for a in 0..=deg {
            for b in 0..=deg - a {
                for c in 0..=(if dim == 3 { deg - a - b } else { 0 }) {
                    p = p.add(&Polynomial::monomial([a as u8, b as u8, c as u8], rng.random_range(-1.0..1.0)));
                }
            }
        }
        p
    };
    let mut comps = [comp(rng), comp(rng), Polynomial::zero()];
    if dim == 3 {
        comps[2] = comp(rng);
    }
    VectorPolynomial::new(comps)
}

/// Largest gap between child DOFs from the restriction matrices and the
/// moments of the coarse field evaluated on each child, over all cells.
pub fn restriction_oracle_error(space: &FeSpace, u: &[f64]) -> f64 {
    let el = &space.element;
    let d = el.dim();
    let r = edge_restriction_cached(el.kind, el.order).unwrap();
    let mut worst: f64 = 0.0;
    for c in 0..space.n_cells() {
        let local = space.local(c, u);
        for (s, rs) in r.iter().enumerate() {
            let offset: Vec3 = std::array::from_fn(|a| if a < d { ((s >> a) & 1) as f64 } else { 0.0 });
            let oracle = el.apply_moments(&|x: &Vec3| {
                let xp: Vec3 = std::array::from_fn(|a| 0.5 * (x[a] + offset[a]));
                let v = el.evaluate(&local, &xp).0;
                [0.5 * v[0], 0.5 * v[1], 0.5 * v[2]]
            });
            for (a, o) in oracle.iter().enumerate() {
                let got: f64 = (0..local.len()).map(|b| rs[(a, b)] * local[b]).sum();
                worst = worst.max((got - o).abs());
            }
        }
    }
    worst
}

fn mat_vec(map: &AffineMap, v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| vec3::dot(&map.a[i], v))
}

/// Physical weight of moment `m` at quadrature weight `w`: edge moments use
/// the mapped edge vector, other moments the covariantly transported weight.
pub fn physical_weight(kind: CellKind, map: &AffineMap, m: &Moment, w: &Vec3) -> Vec3 {
    if m.owner.dim == 1 {
        let t_ref = edge_vector(kind, &m.owner);
        let a = map.map_point(&kind.vertex(m.owner.vertices[0]));
        let b = map.map_point(&kind.vertex(m.owner.vertices[1]));
        vec3::scale(&vec3::sub(&b, &a), vec3::dot(w, &t_ref) / vec3::dot(&t_ref, &t_ref))
    } else {
        mat_vec(map, w)
    }
}

/// Physical moment of a physical field.
pub fn physical_moment(kind: CellKind, map: &AffineMap, m: &Moment, u: &dyn Fn(&Vec3) -> Vec3) -> f64 {
    m.points
        .iter()
        .zip(&m.weights)
        .map(|(x, w)| vec3::dot(&u(&map.map_point(x)), &physical_weight(kind, map, m, w)))
        .sum()
}

/// Random polynomial field of degree `deg` with the source of the unit
/// curl-curl problem.
pub fn polynomial_problem(
    dim: usize,
    deg: usize,
    rng: &mut ChaCha8Rng,
) -> (nedelec::interpolation::AnalyticField, impl Fn(&Vec3) -> Vec3) {
    let p = random_vector_poly(dim, deg, rng);
    let cc = p.curl().curl();
    let (pu, pc) = (p.clone(), p.clone());
    let exact = nedelec::interpolation::AnalyticField::new(move |x| pu.eval(x), move |x| pc.curl_at(x));
    let f = move |x: &Vec3| vec3::add(&p.eval(x), &cc.eval(x));
    (exact, f)
}
