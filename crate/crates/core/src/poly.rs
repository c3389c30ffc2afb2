//! Polynomials over monomial coefficients and the bases built from them.
//!
//! Every polynomial is stored as a sorted list of `(multi-index, coefficient)`
//! pairs in up to three variables. Bases list their terms with the `x_1`
//! exponent varying fastest, so `Q_(1,1)` is `{1, x_1, x_2, x_1 x_2}`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Exponents of a monomial `x_1^a x_2^b x_3^c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub [u8; 3]);

impl MultiIndex {
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }
}

/// Scalar polynomial in monomial form.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: Vec<(MultiIndex, f64)>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn monomial(exps: [u8; 3], coef: f64) -> Self {
        let mut p = Self::zero();
        if coef != 0.0 {
            p.terms.push((MultiIndex(exps), coef));
        }
        p
    }

    /// The coordinate function `x_{axis+1}`.
    pub fn variable(axis: usize) -> Self {
        let mut e = [0u8; 3];
        e[axis] = 1;
        Self::monomial(e, 1.0)
    }

    fn from_map(map: BTreeMap<MultiIndex, f64>) -> Self {
        Polynomial { terms: map.into_iter().filter(|(_, c)| *c != 0.0).collect() }
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn max_exponent(&self, axis: usize) -> usize {
        self.terms.iter().map(|(m, _)| m.0[axis] as usize).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        self.axpy(1.0, other)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Polynomial) -> Polynomial {
        let mut map: BTreeMap<MultiIndex, f64> = self.terms.iter().copied().collect();
        for (m, c) in &other.terms {
            *map.entry(*m).or_insert(0.0) += s * c;
        }
        Self::from_map(map)
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        if s == 0.0 {
            return Self::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect() }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut map = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let e = [a.0[0] + b.0[0], a.0[1] + b.0[1], a.0[2] + b.0[2]];
                *map.entry(MultiIndex(e)).or_insert(0.0) += ca * cb;
            }
        }
        Self::from_map(map)
    }

    pub fn derivative(&self, axis: usize) -> Polynomial {
        let mut map = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.0[axis];
            if e > 0 {
                let mut d = m.0;
                d[axis] -= 1;
                *map.entry(MultiIndex(d)).or_insert(0.0) += c * e as f64;
            }
        }
        Self::from_map(map)
    }

    /// Re-express a polynomial in `x_1` as the same polynomial in `x_{axis+1}`.
    pub fn in_axis(&self, axis: usize) -> Polynomial {
        let mut map = BTreeMap::new();
        for (m, c) in &self.terms {
            debug_assert!(m.0[1] == 0 && m.0[2] == 0);
            let mut e = [0u8; 3];
            e[axis] = m.0[0];
            *map.entry(MultiIndex(e)).or_insert(0.0) += c;
        }
        Self::from_map(map)
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        let p = Powers::new(x, self.max_power());
        self.eval_with(&p)
    }

    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        let p = Powers::new(x, self.max_power());
        self.gradient_with(&p)
    }

    pub(crate) fn max_power(&self) -> usize {
        (0..3).map(|a| self.max_exponent(a)).max().unwrap_or(0)
    }

    pub(crate) fn eval_with(&self, p: &Powers) -> f64 {
        self.terms.iter().map(|(m, c)| c * p.monomial(m.0)).sum()
    }

    pub(crate) fn gradient_with(&self, p: &Powers) -> Vec3 {
        let mut g = [0.0; 3];
        for (m, c) in &self.terms {
            for (axis, ga) in g.iter_mut().enumerate() {
                let e = m.0[axis];
                if e > 0 {
                    let mut d = m.0;
                    d[axis] -= 1;
                    *ga += c * e as f64 * p.monomial(d);
                }
            }
        }
        g
    }
}

/// Cached powers `x_i^e` for fast monomial evaluation at one point.
pub(crate) struct Powers {
    table: [Vec<f64>; 3],
}

impl Powers {
    pub(crate) fn new(x: &Vec3, max_deg: usize) -> Self {
        let row = |v: f64| {
            let mut r = Vec::with_capacity(max_deg + 1);
            let mut acc = 1.0;
            for _ in 0..=max_deg {
                r.push(acc);
                acc *= v;
            }
            r
        };
        Powers { table: [row(x[0]), row(x[1]), row(x[2])] }
    }

    #[inline]
    pub(crate) fn monomial(&self, e: [u8; 3]) -> f64 {
        self.table[0][e[0] as usize] * self.table[1][e[1] as usize] * self.table[2][e[2] as usize]
    }
}

/// Vector-valued polynomial; unused trailing components are zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VectorPolynomial {
    pub comps: [Polynomial; 3],
}

impl VectorPolynomial {
    pub fn new(comps: [Polynomial; 3]) -> Self {
        VectorPolynomial { comps }
    }

    /// Scalar polynomial placed in component `c`.
    pub fn unit(c: usize, p: Polynomial) -> Self {
        let mut v = VectorPolynomial::default();
        v.comps[c] = p;
        v
    }

    pub fn axpy(&self, s: f64, other: &VectorPolynomial) -> VectorPolynomial {
        VectorPolynomial {
            comps: std::array::from_fn(|i| self.comps[i].axpy(s, &other.comps[i])),
        }
    }

    pub fn scale(&self, s: f64) -> VectorPolynomial {
        VectorPolynomial { comps: std::array::from_fn(|i| self.comps[i].scale(s)) }
    }

    pub fn degree(&self) -> usize {
        self.comps.iter().map(|c| c.degree()).max().unwrap_or(0)
    }

    pub(crate) fn max_power(&self) -> usize {
        self.comps.iter().map(|c| c.max_power()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &Vec3) -> Vec3 {
        let p = Powers::new(x, self.max_power());
        self.eval_with(&p)
    }

    pub(crate) fn eval_with(&self, p: &Powers) -> Vec3 {
        [self.comps[0].eval_with(p), self.comps[1].eval_with(p), self.comps[2].eval_with(p)]
    }

    /// Pointwise curl; for planar fields only the z entry is non-zero and
    /// equals the scalar curl `d1 v2 - d2 v1`.
    pub fn curl_at(&self, x: &Vec3) -> Vec3 {
        let p = Powers::new(x, self.max_power());
        self.curl_with(&p)
    }

    pub(crate) fn curl_with(&self, p: &Powers) -> Vec3 {
        let g: [Vec3; 3] = std::array::from_fn(|i| self.comps[i].gradient_with(p));
        [g[2][1] - g[1][2], g[0][2] - g[2][0], g[1][0] - g[0][1]]
    }

    /// Symbolic curl.
    pub fn curl(&self) -> VectorPolynomial {
        let d = |c: usize, a: usize| self.comps[c].derivative(a);
        VectorPolynomial::new([
            d(2, 1).axpy(-1.0, &d(1, 2)),
            d(0, 2).axpy(-1.0, &d(2, 0)),
            d(1, 0).axpy(-1.0, &d(0, 1)),
        ])
    }

    /// `p(x) . x` as a polynomial.
    pub fn dot_position(&self) -> Polynomial {
        (0..3).fold(Polynomial::zero(), |acc, i| {
            acc.add(&self.comps[i].mul(&Polynomial::variable(i)))
        })
    }
}

/// Ordered family of scalar polynomials in `dim` variables.
#[derive(Debug, Clone)]
pub struct ScalarBasis {
    pub dim: usize,
    pub terms: Vec<Polynomial>,
}

impl ScalarBasis {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Values and gradients of every term.
    pub fn eval(&self, x: &Vec3) -> (Vec<f64>, Vec<Vec3>) {
        let deg = self.terms.iter().map(|t| t.max_power()).max().unwrap_or(0);
        let p = Powers::new(x, deg);
        (
            self.terms.iter().map(|t| t.eval_with(&p)).collect(),
            self.terms.iter().map(|t| t.gradient_with(&p)).collect(),
        )
    }
}

/// Ordered family of vector polynomials in `dim` variables.
#[derive(Debug, Clone)]
pub struct VectorBasis {
    pub dim: usize,
    pub terms: Vec<VectorPolynomial>,
}

impl VectorBasis {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Values and curls of every term (2D curls sit in the z entry).
    pub fn eval(&self, x: &Vec3) -> (Vec<Vec3>, Vec<Vec3>) {
        let deg = self.terms.iter().map(|t| t.max_power()).max().unwrap_or(0);
        let p = Powers::new(x, deg);
        (
            self.terms.iter().map(|t| t.eval_with(&p)).collect(),
            self.terms.iter().map(|t| t.curl_with(&p)).collect(),
        )
    }
}

/// Iterate multi-indices with `e_i <= orders[i]`, first index fastest.
pub(crate) fn tensor_indices(orders: &[usize]) -> Vec<[u8; 3]> {
    let d = orders.len();
    let mut out = Vec::new();
    let total: usize = orders.iter().map(|k| k + 1).product();
    for mut flat in 0..total {
        let mut e = [0u8; 3];
        for i in 0..d {
            e[i] = (flat % (orders[i] + 1)) as u8;
            flat /= orders[i] + 1;
        }
        out.push(e);
    }
    out
}

/// Monomial basis of the anisotropic tensor space `Q_k` with `k = orders`.
pub fn monomial_q(orders: &[usize]) -> ScalarBasis {
    ScalarBasis {
        dim: orders.len(),
        terms: tensor_indices(orders).into_iter().map(|e| Polynomial::monomial(e, 1.0)).collect(),
    }
}

/// Monomial basis of the total-degree space `P_k` in `d` variables.
pub fn monomial_p(k: usize, d: usize) -> ScalarBasis {
    let orders = vec![k; d];
    ScalarBasis {
        dim: d,
        terms: tensor_indices(&orders)
            .into_iter()
            .filter(|e| MultiIndex(*e).degree() <= k)
            .map(|e| Polynomial::monomial(e, 1.0))
            .collect(),
    }
}

/// Triangular (d = 2) or tetrahedral (d = 3) number `T^d_n`.
pub fn simplex_number(n: usize, d: usize) -> usize {
    let num: usize = (1..=d).map(|i| n + i - 1).product();
    let den: usize = (1..=d).product();
    num / den
}

/// Spanning set of the homogeneous space `S_k = {p in [P~_k]^d : p(x).x = 0}`.
pub fn sk_basis(k: usize, d: usize) -> Result<VectorBasis> {
    if k < 1 || !(2..=3).contains(&d) {
        return Err(Error::InvalidArgument(format!("sk_basis needs k >= 1 and d in {{2,3}} (k={k}, d={d})")));
    }
    let m = |a: usize, b: usize, c: usize, s: f64| Polynomial::monomial([a as u8, b as u8, c as u8], s);
    let mut terms = Vec::new();
    if d == 2 {
        for a in 1..=k {
            terms.push(VectorPolynomial::new([
                m(a - 1, k - a + 1, 0, -1.0),
                m(a, k - a, 0, 1.0),
                Polynomial::zero(),
            ]));
        }
    } else {
        for b in 1..=k {
            for a in 1..=(k + 1 - b) {
                terms.push(VectorPolynomial::new([
                    m(a - 1, k + 2 - a - b, b - 1, -1.0),
                    m(a, k + 1 - a - b, b - 1, 1.0),
                    Polynomial::zero(),
                ]));
                terms.push(VectorPolynomial::new([
                    m(k + 1 - a - b, b - 1, a, -1.0),
                    Polynomial::zero(),
                    m(k + 2 - a - b, b - 1, a - 1, 1.0),
                ]));
            }
        }
        for a in 1..=k {
            terms.push(VectorPolynomial::new([
                Polynomial::zero(),
                m(0, a - 1, k - a + 1, -1.0),
                m(0, a, k - a, 1.0),
            ]));
        }
    }
    Ok(VectorBasis { dim: d, terms })
}

/// One-dimensional Lagrange basis on equispaced nodes of `[0, 1]`.
///
/// Equispaced nodes are adequate up to roughly `k = 6`; beyond that the
/// monomial expansion becomes badly conditioned.
#[derive(Debug, Clone)]
pub struct LagrangeBasis1D {
    pub order: usize,
    pub nodes: Vec<f64>,
    /// Polynomials in `x_1`.
    pub polys: Vec<Polynomial>,
}

impl LagrangeBasis1D {
    pub fn eval(&self, x: f64) -> Vec<f64> {
        self.polys.iter().map(|p| p.eval(&[x, 0.0, 0.0])).collect()
    }

    /// Values and derivatives from the product form, which stays accurate
    /// where the monomial expansion cancels.
    pub fn eval_product(&self, x: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes.len();
        let mut vals = vec![1.0; n];
        let mut ders = vec![0.0; n];
        for i in 0..n {
            let xi = self.nodes[i];
            for m in 0..n {
                if m == i {
                    continue;
                }
                let den = xi - self.nodes[m];
                let mut t = 1.0 / den;
                for j in 0..n {
                    if j != i && j != m {
                        t *= (x - self.nodes[j]) / (xi - self.nodes[j]);
                    }
                }
                ders[i] += t;
                vals[i] *= (x - self.nodes[m]) / den;
            }
        }
        (vals, ders)
    }
}

/// One vector component of a tensor Lagrange pre-basis kept in factored
/// form: terms `prod_a L_a[e_a](x_a) * unit(component)`.
#[derive(Debug, Clone)]
pub struct TensorComponent {
    pub component: usize,
    pub axes: Vec<LagrangeBasis1D>,
    pub indices: Vec<[u8; 3]>,
}

impl TensorComponent {
    pub fn new(component: usize, orders: &[usize]) -> Self {
        TensorComponent {
            component,
            axes: orders.iter().map(|&k| lagrange_1d(k)).collect(),
            indices: tensor_indices(orders),
        }
    }

    /// Appends values and curls of every term at `x`.
    pub fn eval_into(&self, x: &Vec3, values: &mut Vec<Vec3>, curls: &mut Vec<Vec3>) {
        let tables: Vec<(Vec<f64>, Vec<f64>)> =
            self.axes.iter().enumerate().map(|(a, b)| b.eval_product(x[a])).collect();
        let d = self.axes.len();
        let mut unit = [0.0; 3];
        unit[self.component] = 1.0;
        for e in &self.indices {
            let mut v = 1.0;
            let mut grad = [0.0; 3];
            for j in 0..d {
                v *= tables[j].0[e[j] as usize];
                grad[j] = (0..d)
                    .map(|a| if a == j { tables[a].1[e[a] as usize] } else { tables[a].0[e[a] as usize] })
                    .product();
            }
            values.push(crate::vec3::scale(&unit, v));
            curls.push(crate::vec3::cross(&grad, &unit));
        }
    }
}

pub fn lagrange_nodes(k: usize) -> Vec<f64> {
    if k == 0 {
        vec![0.5]
    } else {
        (0..=k).map(|i| i as f64 / k as f64).collect()
    }
}

pub fn lagrange_1d(k: usize) -> LagrangeBasis1D {
    let nodes = lagrange_nodes(k);
    let polys = (0..=k)
        .map(|i| {
            (0..=k).filter(|&n| n != i).fold(Polynomial::constant(1.0), |acc, n| {
                let den = nodes[i] - nodes[n];
                let lin = Polynomial::variable(0).axpy(-nodes[n], &Polynomial::constant(1.0));
                acc.mul(&lin.scale(1.0 / den))
            })
        })
        .collect();
    LagrangeBasis1D { order: k, nodes, polys }
}

/// Tensor-product Lagrange basis of `Q_k`, `k = orders`, first index fastest.
pub fn tensor_lagrange(orders: &[usize]) -> ScalarBasis {
    let bases: Vec<LagrangeBasis1D> = orders.iter().map(|&k| lagrange_1d(k)).collect();
    let terms = tensor_indices(orders)
        .into_iter()
        .map(|e| {
            (0..orders.len()).fold(Polynomial::constant(1.0), |acc, axis| {
                acc.mul(&bases[axis].polys[e[axis] as usize].in_axis(axis))
            })
        })
        .collect();
    ScalarBasis { dim: orders.len(), terms }
}

/// Nodes of `tensor_lagrange(orders)`, in the same order as its terms.
pub fn tensor_lagrange_nodes(orders: &[usize]) -> Vec<Vec3> {
    let nodes: Vec<Vec<f64>> = orders.iter().map(|&k| lagrange_nodes(k)).collect();
    tensor_indices(orders)
        .into_iter()
        .map(|e| {
            let mut x = [0.0; 3];
            for (axis, xa) in x.iter_mut().enumerate().take(orders.len()) {
                *xa = nodes[axis][e[axis] as usize];
            }
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force_p_count(k: usize, d: usize) -> usize {
        let mut n = 0;
        for a in 0..=k {
            for b in 0..=k {
                for c in 0..=k {
                    let e = [a, b, if d == 3 { c } else { 0 }];
                    if d == 2 && c > 0 {
                        continue;
                    }
                    if e.iter().sum::<usize>() <= k {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    #[test]
    fn q_dimensions() {
        let q = monomial_q(&[1, 1]);
        assert_eq!(q.len(), 4);
        let expected = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]];
        for (t, e) in q.terms.iter().zip(expected) {
            assert_eq!(t.terms()[0].0 .0, e);
        }
        assert_eq!(monomial_q(&[0, 1, 1]).len(), 4);
        assert_eq!(monomial_q(&[2, 1]).len(), 6);
        assert_eq!(monomial_q(&[1, 2]).len(), 6);
    }

    #[test]
    fn p_dimensions() {
        assert_eq!(monomial_p(1, 3).len(), 4);
        assert_eq!(monomial_p(0, 2).len(), 1);
        assert_eq!(monomial_p(2, 2).len(), brute_force_p_count(2, 2));
        assert_eq!(monomial_p(2, 2).len(), 6);
        for d in 2..=3 {
            for k in 0..6 {
                assert_eq!(monomial_p(k, d).len(), simplex_number(k + 1, d));
                assert_eq!(monomial_p(k, d).len(), brute_force_p_count(k, d));
            }
        }
    }

    #[test]
    fn sk_examples() {
        let s = sk_basis(1, 3).unwrap();
        assert_eq!(s.len(), 3);
        let x = [0.3, 0.7, 1.1];
        let v: Vec<Vec3> = s.terms.iter().map(|t| t.eval(&x)).collect();
        assert_eq!(v[0], [-x[1], x[0], 0.0]);
        assert_eq!(v[1], [-x[2], 0.0, x[0]]);
        assert_eq!(v[2], [0.0, -x[2], x[1]]);

        let s2 = sk_basis(2, 2).unwrap();
        assert_eq!(s2.len(), 2);
        let v: Vec<Vec3> = s2.terms.iter().map(|t| t.eval(&x)).collect();
        assert!((v[0][0] + x[1] * x[1]).abs() < 1e-15 && (v[0][1] - x[0] * x[1]).abs() < 1e-15);
        assert!((v[1][0] + x[0] * x[1]).abs() < 1e-15 && (v[1][1] - x[0] * x[0]).abs() < 1e-15);
        assert!(sk_basis(0, 3).is_err());
    }

    #[test]
    fn sk_dimension_identities() {
        for d in 2..=3 {
            for k in 1..=5 {
                let hom = |j: usize| simplex_number(j + 1, d - 1);
                let expected = d * hom(k) - hom(k + 1);
                let s = sk_basis(k, d).unwrap();
                assert_eq!(s.len(), expected);
                assert_eq!(s.len(), if d == 3 { (k + 2) * k } else { k });
                for t in &s.terms {
                    assert!(t.dot_position().is_zero(), "p.x must cancel exactly");
                    for c in &t.comps[..d] {
                        assert!(c.terms().iter().all(|(m, _)| m.degree() == k));
                    }
                }
            }
        }
    }

    #[test]
    fn lagrange_duality_and_partition() {
        let l1 = lagrange_1d(1);
        assert!((l1.eval(0.25)[0] - 0.75).abs() < 1e-15);
        assert!((l1.eval(0.25)[1] - 0.25).abs() < 1e-15);
        let l2 = lagrange_1d(2);
        assert!((l2.eval(0.5)[1] - 1.0).abs() < 1e-14);
        assert!(l2.eval(0.0)[1].abs() < 1e-14 && l2.eval(1.0)[1].abs() < 1e-14);
        for k in 0..=6 {
            let l = lagrange_1d(k);
            for (j, &xj) in l.nodes.iter().enumerate() {
                for (i, v) in l.eval(xj).into_iter().enumerate() {
                    let d = if i == j { 1.0 } else { 0.0 };
                    assert!((v - d).abs() < 1e-12);
                }
            }
        }
        let l4 = lagrange_1d(4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x: f64 = rng.random();
            assert!((l4.eval(x).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curls() {
        let x = [0.2, -0.4, 0.9];
        let rot = VectorPolynomial::new([
            Polynomial::variable(1).scale(-1.0),
            Polynomial::variable(0),
            Polynomial::zero(),
        ]);
        assert_eq!(rot.curl_at(&x), [0.0, 0.0, 2.0]);
        let c = VectorPolynomial::unit(0, Polynomial::constant(1.0));
        assert_eq!(c.curl_at(&x), [0.0, 0.0, 0.0]);
        let t = VectorPolynomial::new([
            Polynomial::zero(),
            Polynomial::variable(2).scale(-1.0),
            Polynomial::variable(1),
        ]);
        assert_eq!(t.curl_at(&x), [2.0, 0.0, 0.0]);
        assert_eq!(t.curl().eval(&x), [2.0, 0.0, 0.0]);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let basis = tensor_lagrange(&[2, 3, 1]);
        let h = 1e-6;
        for _ in 0..10 {
            let x: Vec3 = [rng.random(), rng.random(), rng.random()];
            let (_, grads) = basis.eval(&x);
            for (t, g) in basis.terms.iter().zip(&grads) {
                for a in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[a] += h;
                    xm[a] -= h;
                    let fd = (t.eval(&xp) - t.eval(&xm)) / (2.0 * h);
                    assert!((fd - g[a]).abs() <= 1e-6 * (1.0 + g[a].abs()));
                }
            }
        }
    }

    #[test]
    fn tensor_lagrange_nodal() {
        let orders = [2, 1];
        let b = tensor_lagrange(&orders);
        let nodes = tensor_lagrange_nodes(&orders);
        assert_eq!(b.len(), 6);
        for (j, xj) in nodes.iter().enumerate() {
            for (i, t) in b.terms.iter().enumerate() {
                let d = if i == j { 1.0 } else { 0.0 };
                assert!((t.eval(xj) - d).abs() < 1e-13);
            }
        }
    }
}
