//! The index axioms checked along a one-parameter family.

use serde::Serialize;

use super::compose::IsotopyFamily;
use super::cz::{endpoint_gap, mu_linear, mu_right_limit};
use super::spectrum::c_r_linear;
use super::LinearIsotopy;
use crate::error::{Error, Result};
use crate::par::*;

const NUDGE: f64 = 1e-7;
const LOCATE_TOL: f64 = 1e-10;
const ON_SPECTRUM_TOL: f64 = 1e-6;
const R_SAMPLES: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Jump {
    pub at: f64,
    pub from: i64,
    pub to: i64,
    /// `σ_min(φ_1 − I)` at the located jump.
    pub endpoint_gap: f64,
    pub on_spectrum: bool,
    /// `μ` at the jump itself, by continuity from above.
    pub value_at: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub range: (f64, f64),
    pub samples: Vec<(f64, i64)>,
    pub jumps: Vec<Jump>,
    pub attained: Vec<i64>,
    /// Monotonicity; vacuous for families not known to be non-decreasing.
    pub g1_monotone: bool,
    pub g2_continuity_from_above: bool,
    pub g3_normalization: bool,
    pub g4_non_triviality: bool,
    /// `μ` changes only at spectrum points.
    pub g5_discriminant: bool,
    pub r1_spectrality: Option<bool>,
    pub r2_monotone: Option<bool>,
    pub r3_normalization: bool,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.g1_monotone
            && self.g2_continuity_from_above
            && self.g3_normalization
            && self.g4_non_triviality
            && self.g5_discriminant
            && self.r1_spectrality != Some(false)
            && self.r2_monotone != Some(false)
            && self.r3_normalization
    }
}

/// `μ(family(s))`, stepping just above `s` if the endpoint is degenerate.
fn mu_off_spectrum(family: &IsotopyFamily, s: f64) -> Result<i64> {
    let mut t = s;
    for _ in 0..8 {
        match mu_linear(&family.at(t)) {
            Err(Error::Degenerate(_) | Error::Precision(_)) => t += NUDGE,
            r => return r,
        }
    }
    Err(Error::Precision(format!("no nondegenerate probe near s = {s}")))
}

fn locate(family: &IsotopyFamily, mut a: f64, mut b: f64, ma: i64) -> Result<f64> {
    while b - a > LOCATE_TOL {
        let m = (a + b) / 2.0;
        match mu_linear(&family.at(m)) {
            Ok(v) if v == ma => a = m,
            Ok(_) => b = m,
            Err(Error::Degenerate(_) | Error::Precision(_)) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(golden_min(&|s| endpoint_gap(&family.at(s)), a, b))
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-13 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    (a + b) / 2.0
}

/// Runs G1–G5 and R1–R3 along `s ↦ family(s)` on `count` evenly spaced slopes in `range`.
pub fn axiom_suite(family: &IsotopyFamily, range: (f64, f64), count: usize) -> Result<AxiomReport> {
    let (lo, hi) = range;
    if !(lo < hi) || count < 2 {
        return Err(Error::Domain("axiom suite needs a nonempty range and at least two samples".into()));
    }
    let n = family.n();
    let ss: Vec<f64> = (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect();
    let mus: Vec<i64> = ss.par_iter().map(|&s| mu_off_spectrum(family, s)).collect::<Result<_>>()?;
    let samples: Vec<(f64, i64)> = ss.iter().copied().zip(mus.iter().copied()).collect();

    let brackets: Vec<(f64, f64, i64, i64)> = samples
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| (w[0].0, w[1].0, w[0].1, w[1].1))
        .collect();
    let jumps: Vec<Jump> = brackets
        .par_iter()
        .map(|&(a, b, from, to)| {
            let at = locate(family, a, b, from)?;
            let iso = family.at(at);
            let gap = endpoint_gap(&iso);
            let value_at = mu_right_limit(&iso)?.value;
            Ok(Jump { at, from, to, endpoint_gap: gap, on_spectrum: gap < ON_SPECTRUM_TOL, value_at })
        })
        .collect::<Result<_>>()?;

    let mut attained: Vec<i64> = mus.clone();
    attained.sort_unstable();
    attained.dedup();

    let g1_monotone = !family.is_monotone() || mus.windows(2).all(|w| w[0] <= w[1]);
    let g2_continuity_from_above = jumps.iter().all(|j| j.value_at == j.to);
    let g3_normalization = mu_right_limit(&LinearIsotopy::identity(n))?.value == 0;
    let g4_non_triviality = attained.last().is_some_and(|&m| m >= 2 * n as i64);
    let g5_discriminant = jumps.iter().all(|j| j.on_spectrum);

    let unitary = ss.iter().all(|&s| family.at(s).unitary_endpoint(1e-8));
    let (r1_spectrality, r2_monotone) = if unitary {
        let probes: Vec<f64> = (0..R_SAMPLES).map(|k| lo + (hi - lo) * k as f64 / (R_SAMPLES - 1) as f64).collect();
        let crs: Vec<_> = probes.par_iter().map(|&s| c_r_linear(&family.at(s))).collect::<Result<Vec<_>>>()?;
        let spectral = crs.iter().all(|c| c.spectrality_gap < 1e-9);
        let monotone = !family.is_monotone() || crs.windows(2).all(|w| w[0].value <= w[1].value + 1e-9);
        (Some(spectral), Some(monotone))
    } else {
        (None, None)
    };
    let r3_normalization = c_r_linear(&LinearIsotopy::identity(n))?.value.abs() < 1e-9;

    Ok(AxiomReport {
        range,
        samples,
        jumps,
        attained,
        g1_monotone,
        g2_continuity_from_above,
        g3_normalization,
        g4_non_triviality,
        g5_discriminant,
        r1_spectrality,
        r2_monotone,
        r3_normalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reeb_family_jumps_at_integers() {
        for n in [1, 2] {
            let r = axiom_suite(&IsotopyFamily::reeb(n), (0.05, 2.95), 59).unwrap();
            assert!(r.holds(), "{r:?}");
            assert_eq!(r.jumps.len(), 2);
            for (j, at) in r.jumps.iter().zip([1.0, 2.0]) {
                assert!((j.at - at).abs() < 1e-9);
                assert_eq!(j.to - j.from, 2 * n as i64);
            }
            assert_eq!(r.attained, vec![0, 2 * n as i64, 4 * n as i64]);
        }
    }

    #[test]
    fn constant_family_is_flat() {
        let f = IsotopyFamily::constant(LinearIsotopy::diagonal(&[0.4, 1.2]));
        let r = axiom_suite(&f, (0.0, 1.0), 5).unwrap();
        assert!(r.jumps.is_empty());
        assert_eq!(r.attained, vec![2]);
    }

    #[test]
    fn diagonal_family_jumps_where_an_angle_is_integral() {
        let f = IsotopyFamily::diagonal_segment(vec![0.3, -0.6], vec![1.7, 0.8]);
        let r = axiom_suite(&f, (0.0, 1.0), 40).unwrap();
        assert!(r.g5_discriminant && r.g1_monotone && r.g2_continuity_from_above);
        let expect = [0.6 / 1.4, 0.7 / 1.4];
        assert_eq!(r.jumps.len(), 2);
        for (j, e) in r.jumps.iter().zip(expect) {
            assert!((j.at - e).abs() < 1e-9, "{} vs {e}", j.at);
        }
    }
}
