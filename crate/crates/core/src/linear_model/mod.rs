//! The linear model on `C^n = R^{2n}`.
//!
//! Coordinates are `(x_1..x_n, y_1..y_n)` with `z_j = x_j + i y_j`, so the
//! standard complex structure is `J = [[0, -I], [I, 0]]` and a symmetric `S`
//! generates the symplectic flow `exp(t J S)`. Every isotopy is reparametrised
//! to the unit interval; `R_{st}` is `exp(2π s t J)`, i.e. `e^{2πist}`.

pub mod axioms;
pub mod compose;
pub mod cz;
pub mod extender;
pub mod spectrum;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use axioms::{axiom_suite, AxiomReport, Jump};
pub use compose::{compose_paths, ComposedFamily, IsotopyFamily};
pub use cz::{cz_index, mu_linear, mu_right_limit, MuValue};
pub use extender::{extender_profile, ConvexCutoff, ExtenderProfile};
pub use spectrum::{c_r_linear, spectrum, CrValue, SpectrumWindow};

pub type Mat = DMatrix<f64>;

pub const SYMPLECTIC_TOL: f64 = 1e-9;
pub const DEFAULT_GRID: usize = 2048;

/// The standard complex structure on `R^{2n}`.
pub fn standard_j(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = -1.0;
        j[(n + k, k)] = 1.0;
    }
    j
}

/// `‖MᵀJM − J‖_∞` relative to `max(1, ‖M‖²)`.
pub fn symplectic_defect(m: &Mat) -> f64 {
    let n = m.nrows() / 2;
    let j = standard_j(n);
    let e = m.transpose() * &j * m - &j;
    e.amax() / m.amax().powi(2).max(1.0)
}

/// Real `2n × 2n` form of a complex `n × n` matrix.
pub fn realify(c: &DMatrix<Complex<f64>>) -> Mat {
    let n = c.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for k in 0..n {
            let z = c[(i, k)];
            m[(i, k)] = z.re;
            m[(i, n + k)] = -z.im;
            m[(n + i, k)] = z.im;
            m[(n + i, n + k)] = z.re;
        }
    }
    m
}

/// Inverse of [`realify`]; `None` if `m` does not commute with `J`.
pub fn complexify(m: &Mat, tol: f64) -> Option<DMatrix<Complex<f64>>> {
    let n = m.nrows() / 2;
    let j = standard_j(n);
    if (m * &j - &j * m).amax() > tol {
        return None;
    }
    Some(DMatrix::from_fn(n, n, |i, k| Complex::new(m[(i, k)], m[(n + i, k)])))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Segment {
    Exp {
        #[serde(rename = "S")]
        s: Vec<Vec<f64>>,
        duration: f64,
    },
}

/// Wire form of an isotopy: a concatenation of exponential segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotopySpec {
    pub segments: Vec<Segment>,
}

#[derive(Clone, Debug)]
struct Piece {
    start: f64,
    generator: Mat,
    base: Mat,
}

#[derive(Clone, Debug)]
enum Node {
    Pieces(Vec<Piece>),
    Product(Arc<Node>, Arc<Node>),
    Inverse(Arc<Node>),
    Sum(Arc<Node>, Arc<Node>, usize, usize),
    Conjugate(Arc<Mat>, Arc<Node>),
}

fn embed(a: &Mat, b: &Mat, na: usize, nb: usize) -> Mat {
    let n = na + nb;
    let ia = |k: usize| if k < na { k } else { n + k - na };
    let ib = |k: usize| if k < nb { na + k } else { n + na + k - nb };
    let mut m = Mat::zeros(2 * n, 2 * n);
    for r in 0..2 * na {
        for c in 0..2 * na {
            m[(ia(r), ia(c))] = a[(r, c)];
        }
    }
    for r in 0..2 * nb {
        for c in 0..2 * nb {
            m[(ib(r), ib(c))] = b[(r, c)];
        }
    }
    m
}

fn symplectic_inverse(m: &Mat, j: &Mat) -> Mat {
    -(j * m.transpose() * j)
}

impl Node {
    fn eval(&self, t: f64, j: &Mat) -> (Mat, Mat) {
        match self {
            Node::Pieces(pieces) => {
                let k = pieces.iter().rposition(|p| p.start <= t).unwrap_or(0);
                let p = &pieces[k];
                let phi = (&p.generator * (t - p.start)).exp() * &p.base;
                let dphi = &p.generator * &phi;
                (phi, dphi)
            }
            Node::Product(a, b) => {
                let (pa, da) = a.eval(t, j);
                let (pb, db) = b.eval(t, j);
                (&pa * &pb, da * &pb + &pa * db)
            }
            Node::Inverse(a) => {
                let (pa, da) = a.eval(t, j);
                let inv = symplectic_inverse(&pa, j);
                let d = -(&inv * da * &inv);
                (inv, d)
            }
            Node::Sum(a, b, na, nb) => {
                let ja = standard_j(*na);
                let jb = standard_j(*nb);
                let (pa, da) = a.eval(t, &ja);
                let (pb, db) = b.eval(t, &jb);
                (embed(&pa, &pb, *na, *nb), embed(&da, &db, *na, *nb))
            }
            Node::Conjugate(u, a) => {
                let (pa, da) = a.eval(t, j);
                let ut = u.transpose();
                (u.as_ref() * pa * &ut, u.as_ref() * da * ut)
            }
        }
    }
}

/// A path `[0,1] → Sp(2n)` starting at the identity.
#[derive(Clone, Debug)]
pub struct LinearIsotopy {
    n: usize,
    node: Arc<Node>,
    time_one: Mat,
    grid: usize,
}

impl LinearIsotopy {
    fn from_node(n: usize, node: Node) -> Self {
        let j = standard_j(n);
        let time_one = node.eval(1.0, &j).0;
        Self { n, node: Arc::new(node), time_one, grid: DEFAULT_GRID }
    }

    /// Concatenation of `exp(τ J S_k)` over the given durations, each sample checked symplectic.
    pub fn from_segments(n: usize, segments: &[(Mat, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("complex dimension must be positive".into()));
        }
        if segments.is_empty() {
            return Err(Error::Input("an isotopy needs at least one segment".into()));
        }
        let total: f64 = segments.iter().map(|s| s.1).sum();
        let j = standard_j(n);
        let mut pieces = Vec::with_capacity(segments.len());
        let mut base = Mat::identity(2 * n, 2 * n);
        let mut start = 0.0;
        for (k, (s, d)) in segments.iter().enumerate() {
            if s.nrows() != 2 * n || s.ncols() != 2 * n {
                return Err(Error::Input(format!("segment {k}: S is {}x{}, expected {}x{}", s.nrows(), s.ncols(), 2 * n, 2 * n)));
            }
            if !(d.is_finite() && *d > 0.0) {
                return Err(Error::Input(format!("segment {k}: duration must be positive")));
            }
            if (s - s.transpose()).amax() > SYMPLECTIC_TOL * s.amax().max(1.0) {
                return Err(Error::Input(format!("segment {k}: S is not symmetric")));
            }
            let generator = &j * s * total;
            let len = d / total;
            let next = (&generator * len).exp() * &base;
            pieces.push(Piece { start, generator, base });
            base = next;
            start += len;
        }
        let iso = Self::from_node(n, Node::Pieces(pieces));
        iso.check_samples()?;
        Ok(iso)
    }

    pub fn from_spec(spec: &IsotopySpec) -> Result<Self> {
        let first = spec.segments.first().ok_or_else(|| Error::Input("an isotopy needs at least one segment".into()))?;
        let Segment::Exp { s, .. } = first;
        let dim = s.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::Input(format!("S must be 2n x 2n, got {dim} rows")));
        }
        let mut segs = Vec::new();
        for (k, Segment::Exp { s, duration }) in spec.segments.iter().enumerate() {
            if s.len() != dim || s.iter().any(|r| r.len() != dim) {
                return Err(Error::Input(format!("segment {k}: S must be {dim}x{dim}")));
            }
            segs.push((Mat::from_fn(dim, dim, |i, c| s[i][c]), *duration));
        }
        Self::from_segments(dim / 2, &segs)
    }

    /// `τ ↦ exp(τ J S)` on the unit interval.
    pub fn exp_path(s: Mat) -> Result<Self> {
        let n = s.nrows() / 2;
        Self::from_segments(n, &[(s, 1.0)])
    }

    /// `R_{st} = e^{2πist}` on `C^n`.
    pub fn reeb(n: usize, s: f64) -> Self {
        Self::diagonal(&vec![s; n])
    }

    /// `diag(e^{2πi a_j t})`.
    pub fn diagonal(angles: &[f64]) -> Self {
        let n = angles.len();
        let mut s = Mat::zeros(2 * n, 2 * n);
        for (k, a) in angles.iter().enumerate() {
            s[(k, k)] = 2.0 * PI * a;
            s[(n + k, n + k)] = 2.0 * PI * a;
        }
        let generator = standard_j(n) * s;
        let base = Mat::identity(2 * n, 2 * n);
        Self::from_node(n, Node::Pieces(vec![Piece { start: 0.0, generator, base }]))
    }

    /// The constant path at the identity.
    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![0.0; n])
    }

    /// `τ ↦ exp(τ·i H)` for a Hermitian `H`.
    pub fn unitary(h: &DMatrix<Complex<f64>>) -> Result<Self> {
        if (h - h.adjoint()).camax() > SYMPLECTIC_TOL * h.camax().max(1.0) {
            return Err(Error::Input("generator is not Hermitian".into()));
        }
        Self::exp_path(realify(h))
    }

    /// Pointwise product `τ ↦ self(τ)·other(τ)`.
    pub fn then_apply(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self::from_node(self.n, Node::Product(self.node.clone(), other.node.clone())))
    }

    /// Pointwise product `τ ↦ other(τ)·self(τ)`, i.e. `other ∘ self`.
    pub fn followed_by(&self, other: &Self) -> Result<Self> {
        other.then_apply(self)
    }

    pub fn inverse(&self) -> Self {
        Self::from_node(self.n, Node::Inverse(self.node.clone()))
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        Self::from_node(self.n + other.n, Node::Sum(self.node.clone(), other.node.clone(), self.n, other.n))
    }

    /// `τ ↦ U self(τ) U⁻¹` for a unitary `U`.
    pub fn conjugate(&self, u: &DMatrix<Complex<f64>>) -> Result<Self> {
        if u.nrows() != self.n || (u.adjoint() * u - DMatrix::identity(self.n, self.n)).camax() > 1e-9 {
            return Err(Error::Domain("conjugating matrix is not unitary of the right size".into()));
        }
        Ok(Self::from_node(self.n, Node::Conjugate(Arc::new(realify(u)), self.node.clone())))
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Domain(format!("dimensions differ: {} vs {}", self.n, other.n)));
        }
        Ok(())
    }

    fn check_samples(&self) -> Result<()> {
        let j = standard_j(self.n);
        for k in 0..=self.grid {
            let t = k as f64 / self.grid as f64;
            let defect = symplectic_defect(&self.node.eval(t, &j).0);
            if defect > SYMPLECTIC_TOL {
                return Err(Error::Domain(format!("sample at t = {t} is not symplectic (defect {defect:e})")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid.max(8);
        self
    }

    pub fn time_one(&self) -> &Mat {
        &self.time_one
    }

    pub fn at(&self, t: f64) -> Mat {
        self.node.eval(t, &standard_j(self.n)).0
    }

    /// `(Φ(t), Φ'(t))`.
    pub fn jet(&self, t: f64) -> (Mat, Mat) {
        self.node.eval(t, &standard_j(self.n))
    }

    /// The symmetric generator `S(t) = −J Φ'(t) Φ(t)⁻¹`.
    pub fn generator(&self, t: f64) -> Mat {
        let j = standard_j(self.n);
        let (phi, dphi) = self.node.eval(t, &j);
        let s = -(&j * dphi * symplectic_inverse(&phi, &j));
        (&s + s.transpose()) * 0.5
    }

    /// The uniform sample grid.
    pub fn samples(&self) -> Vec<Mat> {
        let j = standard_j(self.n);
        (0..=self.grid).map(|k| self.node.eval(k as f64 / self.grid as f64, &j).0).collect()
    }

    /// Whether the time-one map is unitary.
    pub fn unitary_endpoint(&self, tol: f64) -> bool {
        let m = &self.time_one;
        (m.transpose() * m - Mat::identity(2 * self.n, 2 * self.n)).amax() <= tol && complexify(m, tol).is_some()
    }
}

/// A Haar-like random unitary from the QR factor of a Gaussian-ish matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> DMatrix<Complex<f64>> {
    let g = DMatrix::from_fn(n, n, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    g.qr().q()
}

/// A random real avoiding integers by at least `margin`.
pub fn random_angle<R: Rng>(rng: &mut R, lo: f64, hi: f64, margin: f64) -> f64 {
    loop {
        let a: f64 = rng.random_range(lo..hi);
        if (a - a.round()).abs() > margin {
            return a;
        }
    }
}

/// Unitary isotopy `τ ↦ V diag(e^{2πi θ_j(τ)}) V*` made of commuting segments; returns the total angles `θ_j(1)`.
pub fn random_unitary_isotopy<R: Rng>(rng: &mut R, n: usize) -> Result<(LinearIsotopy, Vec<f64>)> {
    let v = random_unitary(rng, n);
    let pieces = rng.random_range(1..=3);
    let durations: Vec<f64> = (0..pieces).map(|_| rng.random_range(0.2..1.0)).collect();
    loop {
        let rates: Vec<Vec<f64>> = (0..pieces).map(|_| (0..n).map(|_| random_angle(rng, -2.5, 2.5, 0.05)).collect()).collect();
        let angles: Vec<f64> = (0..n)
            .map(|j| rates.iter().zip(&durations).map(|(r, d)| r[j] * d).sum())
            .collect();
        if angles.iter().any(|a| (a - a.round()).abs() < 0.02) {
            continue;
        }
        let mut segs = Vec::with_capacity(pieces);
        for (r, d) in rates.iter().zip(&durations) {
            let diag = DMatrix::from_fn(n, n, |i, k| if i == k { Complex::new(2.0 * PI * r[i], 0.0) } else { Complex::new(0.0, 0.0) });
            let h = &v * diag * v.adjoint();
            let h = (&h + h.adjoint()) * Complex::new(0.5, 0.0);
            segs.push((realify(&h), *d));
        }
        return Ok((LinearIsotopy::from_segments(n, &segs)?, angles));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reeb_is_scalar_rotation() {
        let r = LinearIsotopy::reeb(2, 0.25);
        let u = complexify(r.time_one(), 1e-12).unwrap();
        for k in 0..2 {
            assert!((u[(k, k)] - Complex::new(0.0, 1.0)).norm() < 1e-12);
        }
        assert!(r.unitary_endpoint(1e-12));
        assert!((r.generator(0.3) - Mat::identity(4, 4) * (PI / 2.0)).amax() < 1e-9);
    }

    #[test]
    fn products_inverses_and_sums() {
        let a = LinearIsotopy::diagonal(&[0.3, -0.7]);
        let b = LinearIsotopy::diagonal(&[0.2, 0.1]);
        let ab = a.then_apply(&b).unwrap();
        let expect = LinearIsotopy::diagonal(&[0.5, -0.6]);
        for t in [0.0, 0.4, 1.0] {
            assert!((ab.at(t) - expect.at(t)).amax() < 1e-12);
            assert!((ab.generator(t) - expect.generator(t)).amax() < 1e-9);
        }
        let id = a.then_apply(&a.inverse()).unwrap();
        assert!((id.time_one() - Mat::identity(4, 4)).amax() < 1e-12);
        let s = LinearIsotopy::diagonal(&[0.3]).direct_sum(&LinearIsotopy::diagonal(&[-0.7]));
        assert!((s.at(0.6) - a.at(0.6)).amax() < 1e-12);
    }

    #[test]
    fn segments_validate() {
        let mut s = Mat::identity(2, 2);
        assert!(LinearIsotopy::from_segments(1, &[(s.clone(), 0.5), (s.clone() * 2.0, 0.5)]).is_ok());
        s[(0, 1)] = 1.0;
        assert!(matches!(LinearIsotopy::from_segments(1, &[(s, 1.0)]), Err(Error::Input(_))));
        assert!(LinearIsotopy::from_segments(1, &[(Mat::identity(2, 2), 0.0)]).is_err());
        let spec: IsotopySpec =
            serde_json::from_str(r#"{"segments":[{"type":"exp","S":[[1,0],[0,1]],"duration":2}]}"#).unwrap();
        let iso = LinearIsotopy::from_spec(&spec).unwrap();
        assert!((iso.time_one() - LinearIsotopy::diagonal(&[1.0 / PI]).time_one()).amax() < 1e-12);
    }

    #[test]
    fn random_unitary_paths_are_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=3 {
            let (iso, _) = random_unitary_isotopy(&mut rng, n).unwrap();
            assert!(iso.samples().iter().all(|m| symplectic_defect(m) < 1e-9));
            assert!(iso.unitary_endpoint(1e-9));
        }
        let u = random_unitary(&mut rng, 3);
        let c = complexify(&realify(&u), 1e-12).unwrap();
        assert!((c - u).camax() < 1e-14);
    }
}
