//! One-parameter families of isotopies and the composition of 1-simplices.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{LinearIsotopy, Mat};
use crate::error::{Error, Result};

const ENDPOINT_TOL: f64 = 1e-9;
const ENDPOINT_SAMPLES: usize = 16;

/// `s ∈ [0, 1] ↦ σ_s`, a 1-simplex of isotopies.
#[derive(Clone)]
pub struct IsotopyFamily {
    n: usize,
    label: String,
    at: Arc<dyn Fn(f64) -> LinearIsotopy + Send + Sync>,
    /// Set when `s ↦ σ_s` is known to be non-decreasing.
    monotone: bool,
}

impl fmt::Debug for IsotopyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IsotopyFamily").field("n", &self.n).field("label", &self.label).finish()
    }
}

fn lerp(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
}

impl IsotopyFamily {
    pub fn new(
        n: usize,
        label: impl Into<String>,
        monotone: bool,
        at: impl Fn(f64) -> LinearIsotopy + Send + Sync + 'static,
    ) -> Self {
        Self { n, label: label.into(), at: Arc::new(at), monotone }
    }

    /// `s ↦ R_{(a + s(b − a))t}`.
    pub fn reeb_segment(n: usize, a: f64, b: f64) -> Self {
        Self::new(n, format!("reeb[{a},{b}]"), b >= a, move |s| LinearIsotopy::reeb(n, a + s * (b - a)))
    }

    /// `s ↦ R_{st}` over an arbitrary slope range `s ∈ [lo, hi]`, with `at` taking the slope itself.
    pub fn reeb(n: usize) -> Self {
        Self::new(n, "reeb", true, move |s| LinearIsotopy::reeb(n, s))
    }

    /// Linear interpolation of diagonal rotation speeds.
    pub fn diagonal_segment(from: Vec<f64>, to: Vec<f64>) -> Self {
        let n = from.len();
        let monotone = from.iter().zip(&to).all(|(a, b)| b >= a);
        Self::new(n, "diagonal", monotone, move |s| LinearIsotopy::diagonal(&lerp(&from, &to, s)))
    }

    pub fn constant(iso: LinearIsotopy) -> Self {
        Self::new(iso.n(), "constant", true, move |_| iso.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn at(&self, s: f64) -> LinearIsotopy {
        (self.at)(s)
    }
}

fn max_path_distance(a: &LinearIsotopy, b: &LinearIsotopy) -> f64 {
    (0..=ENDPOINT_SAMPLES)
        .map(|k| {
            let t = k as f64 / ENDPOINT_SAMPLES as f64;
            (a.at(t) - b.at(t)).amax()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug)]
pub struct ComposedFamily {
    pub family: IsotopyFamily,
    /// Sup distance on sample times between the composite at `s = 0` and `σ_{1,0}`.
    pub start_error: f64,
    /// Distance between the time-one maps of the composite at `s = 1` and of `σ_{m,1}`.
    pub end_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EndpointCheck {
    pub start_error: f64,
    pub end_error: f64,
    pub holds: bool,
}

impl ComposedFamily {
    pub fn check(&self) -> EndpointCheck {
        EndpointCheck {
            start_error: self.start_error,
            end_error: self.end_error,
            holds: self.start_error <= ENDPOINT_TOL && self.end_error <= ENDPOINT_TOL,
        }
    }
}

/// `(σ_{m,s} σ_{m,0}⁻¹) ∘ … ∘ (σ_{1,s} σ_{1,0}⁻¹) ∘ σ_{1,0}` for composable simplices.
pub fn compose_paths(simplices: &[IsotopyFamily]) -> Result<ComposedFamily> {
    let first = simplices.first().ok_or_else(|| Error::Domain("nothing to compose".into()))?;
    let n = first.n();
    for (k, w) in simplices.windows(2).enumerate() {
        if w[1].n() != n {
            return Err(Error::Domain(format!("simplex {} has dimension {}, expected {n}", k + 1, w[1].n())));
        }
        let gap = max_path_distance(&w[0].at(1.0), &w[1].at(0.0));
        if gap > ENDPOINT_TOL {
            return Err(Error::Domain(format!("simplex {k} ends {gap:e} away from the start of simplex {}", k + 1)));
        }
    }
    let parts: Vec<IsotopyFamily> = simplices.to_vec();
    let monotone = parts.iter().all(IsotopyFamily::is_monotone);
    let label = parts.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join(" * ");
    let bases: Vec<LinearIsotopy> = parts.iter().map(|p| p.at(0.0)).collect();
    let family = IsotopyFamily::new(n, label, monotone, move |s| {
        let mut acc = bases[0].clone();
        for (p, b) in parts.iter().zip(&bases) {
            let step = b.inverse().followed_by(&p.at(s)).expect("dimensions checked");
            acc = acc.followed_by(&step).expect("dimensions checked");
        }
        acc
    });
    let start_error = max_path_distance(&family.at(0.0), &first.at(0.0));
    let last = simplices.last().expect("nonempty");
    let end_error = (family.at(1.0).time_one() - last.at(1.0).time_one()).amax();
    Ok(ComposedFamily { family, start_error, end_error })
}

/// Time-one map of a composite, for reporting.
pub fn composite_time_one(c: &ComposedFamily, s: f64) -> Mat {
    c.family.at(s).time_one().clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear_model::spectrum::eigen_angles;

    #[test]
    fn two_simplices_reduce() {
        let a = IsotopyFamily::diagonal_segment(vec![0.2, 0.1], vec![0.5, 0.4]);
        let b = IsotopyFamily::diagonal_segment(vec![0.5, 0.4], vec![1.3, 0.45]);
        let c = compose_paths(&[a.clone(), b.clone()]).unwrap();
        assert!(c.check().holds);
        for s in [0.0, 0.3, 1.0] {
            let expect = a.at(s).followed_by(&b.at(0.0).inverse()).unwrap().followed_by(&b.at(s)).unwrap();
            assert!((c.family.at(s).at(0.7) - expect.at(0.7)).amax() < 1e-12);
        }
    }

    #[test]
    fn constant_simplex_is_neutral() {
        let a = IsotopyFamily::diagonal_segment(vec![0.2], vec![0.9]);
        let k = IsotopyFamily::constant(a.at(1.0));
        let c = compose_paths(&[a.clone(), k]).unwrap();
        for s in [0.0, 0.5, 1.0] {
            assert!((c.family.at(s).time_one() - a.at(s).time_one()).amax() < 1e-12);
        }
    }

    #[test]
    fn rotation_angles_add() {
        let a = IsotopyFamily::reeb_segment(1, 0.0, 0.3);
        let b = IsotopyFamily::reeb_segment(1, 0.3, 0.75);
        let c = compose_paths(&[a, b]).unwrap();
        let angles = eigen_angles(&composite_time_one(&c, 1.0)).unwrap();
        assert!((angles[0] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn mismatched_endpoints() {
        let a = IsotopyFamily::reeb_segment(1, 0.0, 0.3);
        let b = IsotopyFamily::reeb_segment(1, 0.4, 0.75);
        assert!(matches!(compose_paths(&[a, b]), Err(Error::Domain(_))));
    }
}
