//! Conley–Zehnder index by crossing forms.
//!
//! A crossing is a time `t` with `ker(Φ(t) − I) ≠ 0`; its form is
//! `v ↦ ⟨v, S(t) v⟩` on the kernel. The index is half the signature at `t = 0`
//! plus the signatures of the interior crossings, which pins `CZ(R_{εt}) = n`.
//! Crossings are found as zeros of `σ_min(Φ(t) − I)`: grid cells are subdivided
//! while a Lipschitz bound leaves room for a zero.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use super::{LinearIsotopy, Mat};
use crate::error::{Error, Result};

pub const DEGENERACY_TOL: f64 = 1e-9;
/// `σ_min` below this at a refined minimum is a crossing.
pub const CROSSING_TOL: f64 = 1e-8;
/// Refined minima between the two tolerances are unresolved.
pub const ISOLATION_TOL: f64 = 1e-6;
pub const MAX_REFINEMENT: u32 = 20;
const KERNEL_TOL: f64 = 1e-6;
/// More candidate cells than this means `σ_min` hugs zero along a whole stretch of the path.
const MAX_CANDIDATES: usize = 1 << 14;

fn sigma_min(m: &Mat) -> f64 {
    let id = Mat::identity(m.nrows(), m.ncols());
    (m - id).singular_values().min()
}

/// `σ_min(Φ(1) − I)`.
pub fn endpoint_gap(iso: &LinearIsotopy) -> f64 {
    sigma_min(iso.time_one())
}

fn signature(q: &Mat, what: &str) -> Result<i64> {
    let scale = q.amax().max(1.0);
    let eig = SymmetricEigen::new(q.clone()).eigenvalues;
    let mut sig = 0;
    for &l in eig.iter() {
        if l.abs() < 1e-8 * scale {
            return Err(Error::Precision(format!("non-regular crossing {what}: crossing form has eigenvalue {l:e}")));
        }
        sig += if l > 0.0 { 1 } else { -1 };
    }
    Ok(sig)
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-14 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let t = (a + b) / 2.0;
    (t, f(t))
}

/// `(σ_min(Φ(t) − I), |Φ'(t)|)` at `t`.
fn probe(iso: &LinearIsotopy, t: f64) -> (f64, f64) {
    let (phi, dphi) = iso.jet(t);
    (sigma_min(&phi), dphi.norm())
}

/// Subintervals of width at most `floor` that may contain a zero of `σ_min`, using that
/// `σ_min(Φ − I)` is Lipschitz with constant `sup |Φ'|`.
fn candidates(iso: &LinearIsotopy, (a, pa): (f64, (f64, f64)), (b, pb): (f64, (f64, f64)), floor: f64, out: &mut Vec<(f64, f64)>) {
    let lipschitz = 2.0 * pa.1.max(pb.1) + 1e-12;
    if pa.0 + pb.0 > lipschitz * (b - a) {
        return;
    }
    if out.len() > MAX_CANDIDATES {
        return;
    }
    if b - a <= floor {
        out.push((a, b));
        return;
    }
    let m = (a + b) / 2.0;
    let pm = probe(iso, m);
    candidates(iso, (a, pa), (m, pm), floor, out);
    candidates(iso, (m, pm), (b, pb), floor, out);
}

/// A crossing at `time` with the signature of its form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Crossing {
    pub time: f64,
    pub kernel_dim: usize,
    pub signature: i64,
}

/// All crossings in `(0, 1)`, in order.
pub fn interior_crossings(iso: &LinearIsotopy) -> Result<Vec<Crossing>> {
    let f = |t: f64| sigma_min(&iso.at(t));
    let grid = iso.grid();
    let floor = 2.0f64.powi(-(MAX_REFINEMENT as i32));
    let ts: Vec<f64> = (0..=grid).map(|k| k as f64 / grid as f64).collect();
    let probes: Vec<(f64, f64)> = ts.iter().map(|&t| probe(iso, t)).collect();
    let mut cells = Vec::new();
    for k in 0..grid {
        candidates(iso, (ts[k], probes[k]), (ts[k + 1], probes[k + 1]), floor, &mut cells);
    }
    if cells.len() > MAX_CANDIDATES {
        return Err(Error::Precision("Φ(t) − I is nearly singular along an interval".into()));
    }
    let mut clusters: Vec<(f64, f64)> = Vec::new();
    for (a, b) in cells {
        match clusters.last_mut() {
            Some(last) if a <= last.1 => last.1 = b,
            _ => clusters.push((a, b)),
        }
    }
    // The start of the path is a zero of σ_min by construction.
    if clusters.first().is_some_and(|c| c.0 == 0.0) {
        clusters.remove(0);
    }
    let minima: Vec<(f64, f64)> = clusters
        .iter()
        .map(|&(a, b)| golden_min(&f, (a - floor).max(0.0), (b + floor).min(1.0)))
        .collect();
    let mut out = Vec::new();
    for (t, v) in minima {
        if v >= ISOLATION_TOL || t <= 0.0 || t >= 1.0 - 1e-12 {
            continue;
        }
        if v >= CROSSING_TOL {
            return Err(Error::Precision(format!("unresolved near-crossing at t = {t} (σ_min = {v:e})")));
        }
        let (phi, _) = iso.jet(t);
        let svd = (&phi - Mat::identity(phi.nrows(), phi.ncols())).svd(false, true);
        let vt = svd.v_t.expect("requested right singular vectors");
        let ker: Vec<usize> = (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] < KERNEL_TOL).collect();
        let k = Mat::from_fn(phi.ncols(), ker.len(), |r, c| vt[(ker[c], r)]);
        let q = k.transpose() * iso.generator(t) * &k;
        let signature = signature(&q, &format!("at t = {t}"))?;
        out.push(Crossing { time: t, kernel_dim: ker.len(), signature });
    }
    Ok(out)
}

/// The Conley–Zehnder index of a path with nondegenerate endpoint.
pub fn cz_index(iso: &LinearIsotopy) -> Result<i64> {
    let gap = endpoint_gap(iso);
    if gap < DEGENERACY_TOL {
        return Err(Error::Degenerate(gap));
    }
    let start = signature(&iso.generator(0.0), "at t = 0")?;
    let interior: i64 = interior_crossings(iso)?.iter().map(|c| c.signature).sum();
    Ok(start / 2 + interior)
}

/// `μ = CZ − n`.
pub fn mu_linear(iso: &LinearIsotopy) -> Result<i64> {
    Ok(cz_index(iso)? - iso.n() as i64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MuValue {
    pub value: i64,
    /// Set when the endpoint is degenerate and `value` is `lim_{ε→0+} μ(R_{εt} φ_t)`.
    pub right_limit: bool,
}

/// `μ`, or its limit from above along the Reeb flow at a degenerate or unresolvable endpoint.
pub fn mu_right_limit(iso: &LinearIsotopy) -> Result<MuValue> {
    match mu_linear(iso) {
        Ok(value) => Ok(MuValue { value, right_limit: false }),
        Err(Error::Degenerate(_) | Error::Precision(_)) => {
            let mut last = None;
            for k in 0..12 {
                let eps = 1e-3 * 0.5f64.powi(k);
                let pushed = iso.followed_by(&LinearIsotopy::reeb(iso.n(), eps))?;
                let value = match mu_linear(&pushed) {
                    Ok(v) => v,
                    Err(Error::Degenerate(_) | Error::Precision(_)) => continue,
                    Err(e) => return Err(e),
                };
                if last == Some(value) {
                    return Ok(MuValue { value, right_limit: true });
                }
                last = Some(value);
            }
            Err(Error::Precision("right limit of μ did not stabilise".into()))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_model::random_unitary;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_reeb_rotation_has_index_n() {
        for n in 1..=4 {
            for eps in [0.1, 0.5, 0.9] {
                assert_eq!(cz_index(&LinearIsotopy::reeb(n, eps)).unwrap(), n as i64);
                assert_eq!(mu_linear(&LinearIsotopy::reeb(n, eps)).unwrap(), 0);
            }
        }
    }

    #[test]
    fn diagonal_rotations_match_oracle() {
        assert_eq!(cz_index(&LinearIsotopy::diagonal(&[1.5])).unwrap(), 3);
        assert_eq!(mu_linear(&LinearIsotopy::diagonal(&[1.5])).unwrap(), 2);
        assert_eq!(cz_index(&LinearIsotopy::diagonal(&[-0.3])).unwrap(), -1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(1..=3);
            let a: Vec<f64> = (0..n).map(|_| crate::linear_model::random_angle(&mut rng, -3.0, 3.0, 0.02)).collect();
            let iso = LinearIsotopy::diagonal(&a);
            assert_eq!(cz_index(&iso).unwrap(), oracle::cz_diagonal(&a), "{a:?}");
            let u = random_unitary(&mut rng, n);
            assert_eq!(cz_index(&iso.conjugate(&u).unwrap()).unwrap(), oracle::cz_diagonal(&a));
        }
    }

    #[test]
    fn crossings_closer_than_the_grid() {
        let a = [-1.0949203490015385, 1.3581118543860917, -2.1913797410911853, -2.606076058217044];
        assert_eq!(cz_index(&LinearIsotopy::diagonal(&a)).unwrap(), oracle::cz_diagonal(&a));
        let b = [1.0, 1.0 + 1e-4].map(|x: f64| 1.5 * x);
        assert_eq!(interior_crossings(&LinearIsotopy::diagonal(&b)).unwrap().len(), 2);
    }

    #[test]
    fn additive_under_direct_sum() {
        let a = LinearIsotopy::diagonal(&[2.3, -0.4]);
        let b = LinearIsotopy::diagonal(&[0.7]);
        assert_eq!(cz_index(&a.direct_sum(&b)).unwrap(), cz_index(&a).unwrap() + cz_index(&b).unwrap());
    }

    #[test]
    fn hyperbolic_path() {
        // S = diag(1, -1) generates (e^{-t}, e^{t}) in (x, y): no interior crossing, signature 0.
        let mut s = Mat::zeros(2, 2);
        s[(0, 1)] = 1.0;
        s[(1, 0)] = 1.0;
        let iso = LinearIsotopy::exp_path(s).unwrap();
        assert_eq!(cz_index(&iso).unwrap(), 0);
    }

    #[test]
    fn degenerate_endpoints() {
        assert!(matches!(cz_index(&LinearIsotopy::reeb(2, 1.0)), Err(Error::Degenerate(_))));
        assert!(matches!(mu_linear(&LinearIsotopy::identity(1)), Err(Error::Degenerate(_))));
        let m = mu_right_limit(&LinearIsotopy::identity(2)).unwrap();
        assert_eq!(m, MuValue { value: 0, right_limit: true });
        let m = mu_right_limit(&LinearIsotopy::reeb(1, 1.0)).unwrap();
        assert_eq!(m, MuValue { value: 2, right_limit: true });
        assert!(!mu_right_limit(&LinearIsotopy::reeb(1, 0.5)).unwrap().right_limit);
    }

    #[test]
    fn crossings_of_fast_rotation() {
        let iso = LinearIsotopy::diagonal(&[3.5, 0.5]);
        let c = interior_crossings(&iso).unwrap();
        let times: Vec<f64> = c.iter().map(|c| c.time).collect();
        assert_eq!(times.len(), 3);
        for (t, e) in times.iter().zip([1.0 / 3.5, 2.0 / 3.5, 3.0 / 3.5]) {
            assert!((t - e).abs() < 1e-9);
        }
        assert!(c.iter().all(|c| c.kernel_dim == 2 && c.signature == 2));
    }
}
