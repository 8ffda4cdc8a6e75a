//! Convex cut-off functions and the action profile of the autonomous extender.
//!
//! `γ'` is a monotone cubic Hermite spline rising from 0 at the first knot to 1
//! at the last, so `γ` vanishes to the left, equals `x − ε` to the right, and
//! `γ'' > 0` wherever `0 < γ' < 1`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexCutoff {
    knots: Vec<f64>,
    /// `γ'` at the knots: 0 first, 1 last, strictly increasing.
    slopes: Vec<f64>,
    /// `γ''` at the knots: zero at both ends, positive inside.
    curvatures: Vec<f64>,
    #[serde(skip)]
    offsets: Vec<f64>,
}

fn basis(u: f64) -> [f64; 4] {
    let (u2, u3) = (u * u, u * u * u);
    [2.0 * u3 - 3.0 * u2 + 1.0, u3 - 2.0 * u2 + u, -2.0 * u3 + 3.0 * u2, u3 - u2]
}

fn basis_integral(u: f64) -> [f64; 4] {
    let (u2, u3, u4) = (u * u, u * u * u, u * u * u * u);
    [u - u3 + u4 / 2.0, u2 / 2.0 - 2.0 * u3 / 3.0 + u4 / 4.0, u3 - u4 / 2.0, -u3 / 3.0 + u4 / 4.0]
}

fn basis_derivative(u: f64) -> [f64; 4] {
    let u2 = u * u;
    [6.0 * u2 - 6.0 * u, 3.0 * u2 - 4.0 * u + 1.0, -6.0 * u2 + 6.0 * u, 3.0 * u2 - 2.0 * u]
}

impl ConvexCutoff {
    pub fn new(knots: Vec<f64>, slopes: Vec<f64>, curvatures: Vec<f64>) -> Result<Self> {
        let m = knots.len();
        if m < 2 || slopes.len() != m || curvatures.len() != m {
            return Err(Error::Domain("a cut-off needs at least two knots with matching slopes and curvatures".into()));
        }
        if knots[0] <= 0.0 || knots[m - 1] > 1.0 || knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("knots must increase strictly inside (0, 1]".into()));
        }
        if slopes[0] != 0.0 || slopes[m - 1] != 1.0 || slopes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("γ' must rise strictly from 0 to 1 across the knots".into()));
        }
        if curvatures[0] != 0.0 || curvatures[m - 1] != 0.0 || curvatures[1..m - 1].iter().any(|&c| c <= 0.0) {
            return Err(Error::Domain("γ'' must vanish at the end knots and be positive inside".into()));
        }
        for i in 0..m - 1 {
            let h = knots[i + 1] - knots[i];
            let rise = slopes[i + 1] - slopes[i];
            if (curvatures[i] + curvatures[i + 1]) * h >= 2.0 * rise {
                return Err(Error::Domain(format!("curvatures on interval {i} are too large for γ'' > 0")));
            }
        }
        let mut c = Self { knots, slopes, curvatures, offsets: Vec::new() };
        c.offsets = c.compute_offsets();
        c.check_convex()?;
        Ok(c)
    }

    /// The cut-off with a single transition on `[a, b]`.
    pub fn standard(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![0.0, 1.0], vec![0.0, 0.0])
    }

    /// A random cut-off with up to four transition intervals.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let pieces = rng.random_range(1..=4);
        let a = rng.random_range(0.02..0.4);
        let b = rng.random_range(a + 0.1..=1.0);
        let mut knots: Vec<f64> = (0..pieces - 1).map(|_| rng.random_range(a..b)).collect();
        knots.push(a);
        knots.push(b);
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
        let m = knots.len();
        let mut slopes: Vec<f64> = (0..m - 2).map(|_| rng.random_range(0.01..0.99)).collect();
        slopes.sort_by(f64::total_cmp);
        slopes.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
        slopes.insert(0, 0.0);
        slopes.push(1.0);
        while slopes.len() < m {
            let k = slopes.len() - 1;
            slopes.insert(k, (slopes[k - 1] + slopes[k]) / 2.0);
        }
        let mut curv = vec![0.0; m];
        for i in 1..m - 1 {
            let left = (slopes[i] - slopes[i - 1]) / (knots[i] - knots[i - 1]);
            let right = (slopes[i + 1] - slopes[i]) / (knots[i + 1] - knots[i]);
            curv[i] = rng.random_range(0.05..0.95) * left.min(right);
        }
        Self::new(knots, slopes, curv).expect("random cut-off satisfies the constraints")
    }

    fn compute_offsets(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for i in 0..self.knots.len() - 1 {
            out.push(out[i] + self.piece_integral(i, 1.0));
        }
        out
    }

    fn piece(&self, x: f64) -> Option<(usize, f64, f64)> {
        let m = self.knots.len();
        if x <= self.knots[0] || x >= self.knots[m - 1] {
            return None;
        }
        let i = self.knots.partition_point(|&k| k <= x) - 1;
        let h = self.knots[i + 1] - self.knots[i];
        Some((i, (x - self.knots[i]) / h, h))
    }

    fn coeffs(&self, i: usize) -> [f64; 4] {
        let h = self.knots[i + 1] - self.knots[i];
        [self.slopes[i], h * self.curvatures[i], self.slopes[i + 1], h * self.curvatures[i + 1]]
    }

    fn piece_integral(&self, i: usize, u: f64) -> f64 {
        let h = self.knots[i + 1] - self.knots[i];
        let c = self.coeffs(i);
        h * basis_integral(u).iter().zip(c).map(|(b, c)| b * c).sum::<f64>()
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// The constant with `γ(x) = x − ε` for `x ≥ 1`.
    pub fn epsilon(&self) -> f64 {
        self.end() - self.offsets[self.knots.len() - 1]
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= self.start() {
            return 0.0;
        }
        if x >= self.end() {
            return x - self.epsilon();
        }
        let (i, u, _) = self.piece(x).expect("inside the transition zone");
        self.offsets[i] + self.piece_integral(i, u)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= self.start() {
            return 0.0;
        }
        if x >= self.end() {
            return 1.0;
        }
        let (i, u, _) = self.piece(x).expect("inside the transition zone");
        basis(u).iter().zip(self.coeffs(i)).map(|(b, c)| b * c).sum()
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self.piece(x) {
            None => 0.0,
            Some((i, u, h)) => basis_derivative(u).iter().zip(self.coeffs(i)).map(|(b, c)| b * c).sum::<f64>() / h,
        }
    }

    /// `γ'` non-decreasing on a refinement of the knot grid.
    fn check_convex(&self) -> Result<()> {
        let mut prev = 0.0;
        for w in self.knots.windows(2) {
            for k in 0..=64 {
                let x = w[0] + (w[1] - w[0]) * k as f64 / 64.0;
                let d = self.derivative(x);
                if d < prev - 1e-12 {
                    return Err(Error::Domain(format!("γ' decreases near x = {x}")));
                }
                prev = d;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtenderProfile {
    pub sigma: f64,
    pub s_star: f64,
    pub action: f64,
    /// `|γ'(S*) − σ₀|`.
    pub residual: f64,
    pub curvature: f64,
    /// `γ'` is strictly below `σ₀` to the left of `S*` and strictly above to the right.
    pub unique: bool,
    pub negative: bool,
}

/// The unique `S*` with `γ'(S*) = σ₀`, and the action `γ(S*) − S*σ₀` of the corresponding orbits.
pub fn extender_profile(gamma: &ConvexCutoff, sigma: f64) -> Result<ExtenderProfile> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("slope {sigma} is not in (0, 1)")));
    }
    let (mut a, mut b) = (gamma.start(), gamma.end());
    for _ in 0..200 {
        let m = (a + b) / 2.0;
        if gamma.derivative(m) < sigma {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    let s_star = (a + b) / 2.0;
    let residual = (gamma.derivative(s_star) - sigma).abs();
    let delta = 1e-7;
    let unique = gamma.derivative(s_star - delta) < sigma && gamma.derivative(s_star + delta) > sigma;
    let action = gamma.value(s_star) - s_star * sigma;
    Ok(ExtenderProfile {
        sigma,
        s_star,
        action,
        residual,
        curvature: gamma.second_derivative(s_star),
        unique,
        negative: action < 0.0,
    })
}
