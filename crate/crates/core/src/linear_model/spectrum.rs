//! Discriminant spectra of unitary time-one maps and the invariant `c_R`.

use std::f64::consts::PI;

use serde::Serialize;

use super::cz::mu_linear;
use super::{complexify, LinearIsotopy, Mat};
use crate::error::{Error, Result};
use crate::par::*;

pub const UNITARY_TOL: f64 = 1e-8;
const MERGE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumWindow {
    pub window: (f64, f64),
    /// Angles `θ/2π ∈ [0, 1)` of the eigenvalues, with multiplicity.
    pub angles: Vec<f64>,
    /// Sorted `s ∈ [a, b]` with `e^{2πis}` an eigenvalue, with multiplicity.
    pub points: Vec<f64>,
}

impl SpectrumWindow {
    /// Points with multiplicities merged.
    pub fn distinct(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &p in &self.points {
            if out.last().is_none_or(|&q| p - q > MERGE_TOL) {
                out.push(p);
            }
        }
        out
    }

    pub fn contains_near(&self, s: f64, tol: f64) -> bool {
        self.points.iter().any(|p| (p - s).abs() <= tol)
    }

    pub fn is_empty_on(&self, a: f64, b: f64) -> bool {
        !self.points.iter().any(|&p| p > a && p < b)
    }
}

/// Eigenvalue angles of a unitary `U`, as fractions of a full turn in `[0, 1)`.
pub fn eigen_angles(u: &Mat) -> Result<Vec<f64>> {
    let n = u.nrows() / 2;
    if u.nrows() != 2 * n || u.ncols() != u.nrows() || n == 0 {
        return Err(Error::Domain("time-one map must be 2n x 2n".into()));
    }
    let defect = (u.transpose() * u - Mat::identity(2 * n, 2 * n)).amax();
    let c = complexify(u, UNITARY_TOL);
    let c = match c {
        Some(c) if defect <= UNITARY_TOL => c,
        _ => return Err(Error::Domain("time-one map is not unitary; spectra are only computed for unitary maps".into())),
    };
    let eig = c
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Precision("complex Schur form did not triangularise".into()))?;
    let mut angles: Vec<f64> = eig
        .iter()
        .map(|z| {
            let a = z.im.atan2(z.re) / (2.0 * PI);
            let a = if a < 0.0 { a + 1.0 } else { a };
            if a >= 1.0 - 1e-13 { 0.0 } else { a }
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(angles)
}

/// All `s ∈ [a, b]` with `e^{2πis}` an eigenvalue of `U`.
pub fn spectrum(u: &Mat, window: (f64, f64)) -> Result<SpectrumWindow> {
    let (a, b) = window;
    if !(a <= b) {
        return Err(Error::Domain(format!("empty window [{a}, {b}]")));
    }
    let angles = eigen_angles(u)?;
    let mut points = Vec::new();
    for &th in &angles {
        let mut k = (a - th).ceil();
        while th + k <= b {
            if th + k >= a {
                points.push(th + k);
            }
            k += 1.0;
        }
    }
    points.sort_by(f64::total_cmp);
    Ok(SpectrumWindow { window, angles, points })
}

/// `μ(φ⁻¹ ∘ R_{st})`.
pub fn mu_of_reeb_shift(iso: &LinearIsotopy, s: f64) -> Result<i64> {
    mu_linear(&iso.inverse().then_apply(&LinearIsotopy::reeb(iso.n(), s))?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrValue {
    pub value: f64,
    /// Off-spectrum probes `(s, μ)` evaluated during the search, in order.
    pub probes: Vec<(f64, i64)>,
    /// Distance from `value` to the nearest spectrum point.
    pub spectrality_gap: f64,
}

/// `c_R(φ) = inf{s : μ(φ⁻¹ ∘ R_{st}) ≥ 0}`, located by bisection over the gaps of the spectrum.
pub fn c_r_linear(iso: &LinearIsotopy) -> Result<CrValue> {
    let angles = eigen_angles(iso.time_one())?;
    let mut probes = Vec::new();
    let probe = |s: f64, probes: &mut Vec<(f64, i64)>| -> Result<i64> {
        let m = mu_of_reeb_shift(iso, s)?;
        probes.push((s, m));
        Ok(m)
    };
    let (mut lo, mut hi) = (-2.0, 2.0);
    loop {
        let sw = spectrum(iso.time_one(), (lo, hi))?;
        let pts = sw.distinct();
        let mids: Vec<f64> = pts.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
        let (first, last) = (mids[0], mids[mids.len() - 1]);
        if probe(first, &mut probes)? >= 0 {
            lo -= 4.0;
            continue;
        }
        if probe(last, &mut probes)? < 0 {
            hi += 4.0;
            continue;
        }
        let (mut a, mut b) = (0usize, mids.len() - 1);
        while b - a > 1 {
            let m = (a + b) / 2;
            if probe(mids[m], &mut probes)? >= 0 {
                b = m;
            } else {
                a = m;
            }
        }
        let value = pts[b];
        let spectrality_gap = angles
            .iter()
            .map(|th| {
                let d = (value - th).rem_euclid(1.0);
                d.min(1.0 - d)
            })
            .fold(f64::INFINITY, f64::min);
        return Ok(CrValue { value, probes, spectrality_gap });
    }
}

/// `c_R` over many isotopies in parallel.
pub fn c_r_batch(isos: &[LinearIsotopy]) -> Vec<Result<CrValue>> {
    isos.par_iter().map(c_r_linear).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_model::{realify, LinearIsotopy};
    use crate::oracle;
    use nalgebra::{Complex, DMatrix};

    #[test]
    fn identity_spectrum_is_the_integers() {
        let sw = spectrum(&Mat::identity(4, 4), (-2.5, 2.5)).unwrap();
        assert_eq!(sw.distinct(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(sw.points.len(), 10);
        assert!(sw.is_empty_on(-1.0, 0.0) && sw.is_empty_on(0.0, 1.0));
    }

    #[test]
    fn reeb_spectrum_is_shifted() {
        let sw = spectrum(LinearIsotopy::reeb(1, 0.7).time_one(), (-1.0, 2.0)).unwrap();
        let expect = [-0.3, 0.7, 1.7];
        assert_eq!(sw.points.len(), 3);
        for (p, e) in sw.points.iter().zip(expect) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn third_roots() {
        let w = |k: f64| Complex::from_polar(1.0, 2.0 * PI * k / 3.0);
        let z = Complex::new(0.0, 0.0);
        let u = DMatrix::from_row_slice(2, 2, &[w(1.0), z, z, w(2.0)]);
        let sw = spectrum(&realify(&u), (0.0, 1.0 - 1e-9)).unwrap();
        assert_eq!(sw.points.len(), 2);
        assert!((sw.points[0] - 1.0 / 3.0).abs() < 1e-12 && (sw.points[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn non_unitary_is_rejected() {
        let mut m = Mat::identity(2, 2);
        m[(0, 0)] = 2.0;
        m[(1, 1)] = 0.5;
        assert!(matches!(spectrum(&m, (0.0, 1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn c_r_of_reeb_flows() {
        for s0 in [0.1, 0.7, 1.5, 2.25] {
            let c = c_r_linear(&LinearIsotopy::reeb(2, s0)).unwrap();
            assert!((c.value - s0).abs() < 1e-9, "{s0}: {c:?}");
            assert!(c.spectrality_gap < 1e-9);
        }
        assert!(c_r_linear(&LinearIsotopy::identity(2)).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn c_r_agrees_with_grid_scan() {
        let iso = LinearIsotopy::diagonal(&[1.0 / 3.0, 2.0 / 3.0]);
        let c = c_r_linear(&iso).unwrap();
        let scan = oracle::first_nonnegative_on_grid(|s| mu_of_reeb_shift(&iso, s).ok(), 0.005, 1.5, 1e-2);
        assert!((c.value - scan.unwrap()).abs() < 1e-2 + 1e-9, "{} vs {scan:?}", c.value);
        assert!((c.value - 2.0 / 3.0).abs() < 1e-9);
    }
}
