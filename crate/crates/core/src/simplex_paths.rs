//! Straight-line paths in the standard simplex.
//!
//! A path in `Δⁿ` runs from `v_0` to `v_n` at unit speed, with `Σ j·θ_j` as the
//! time coordinate. It is determined by its cubical coordinates
//! `(x_1, …, x_{n−1}) ∈ [0,1]^{n−1}`: the first point `p_i` of the path in the
//! face spanned by `v_i..v_n` is `(1 − x_i)·v_i + x_i·p_{i+1}`, and the path is
//! affine between consecutive `p_i`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::par::*;

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a"`, `"a/b"` or a finite decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Input(format!("not a rational number: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(a, b));
    }
    if let Some((i, f)) = s.split_once('.') {
        if f.is_empty() || !f.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = i.starts_with('-');
        let whole: BigInt = if i.is_empty() || i == "-" { BigInt::zero() } else { i.parse().map_err(|_| bad())? };
        let frac: BigInt = f.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), f.len());
        let frac = Q::new(frac, den);
        let whole = Q::from_integer(whole.abs());
        let v = whole + frac;
        return Ok(if neg { -v } else { v });
    }
    let a: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(a))
}

pub fn serialize_rational<S: Serializer>(v: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn serialize_rationals<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn serialize_intervals<S: Serializer>(v: &[(Q, Q)], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|(a, b)| [a.to_string(), b.to_string()]))
}

fn vertex(n: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); n + 1];
    v[i] = Q::one();
    v
}

fn lerp(a: &[Q], b: &[Q], t: &Q) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect()
}

/// `Σ j·θ_j`, the primitive of the speed form.
pub fn time_of(theta: &[Q]) -> Q {
    theta.iter().enumerate().map(|(j, t)| t * Q::from_integer(BigInt::from(j))).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StraightLinePath {
    n: usize,
    #[serde(serialize_with = "serialize_rationals")]
    cube: Vec<Q>,
    #[serde(serialize_with = "serialize_rationals")]
    taus: Vec<Q>,
}

impl StraightLinePath {
    /// `n = 0` is the constant path at the single vertex.
    pub fn from_cube(n: usize, coords: Vec<Q>) -> Result<Self> {
        if coords.len() != n.saturating_sub(1) {
            return Err(Error::Domain(format!(
                "a path in the {n}-simplex has {} cubical coordinates, got {}",
                n.saturating_sub(1),
                coords.len()
            )));
        }
        if let Some(x) = coords.iter().find(|x| x.is_negative() || **x > Q::one()) {
            return Err(Error::Domain(format!("cubical coordinate {x} outside [0,1]")));
        }
        let mut taus = vec![Q::zero(); n + 1];
        taus[n] = Q::from_integer(BigInt::from(n));
        for i in (1..n).rev() {
            let ii = Q::from_integer(BigInt::from(i));
            taus[i] = &ii + &coords[i - 1] * (&taus[i + 1] - &ii);
        }
        Ok(StraightLinePath { n, cube: coords, taus })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(x_1, …, x_{n−1})`.
    pub fn cube(&self) -> &[Q] {
        &self.cube
    }

    /// `(τ_0, …, τ_n)`, the times at which the path passes `p_0, …, p_n`.
    pub fn taus(&self) -> &[Q] {
        &self.taus
    }

    /// The points `p_0 = v_0, p_1, …, p_n = v_n` in barycentric coordinates.
    pub fn breakpoints(&self) -> Vec<Vec<Q>> {
        let n = self.n;
        let mut pts = vec![vertex(n, n); n + 1];
        for i in (1..n).rev() {
            let x = &self.cube[i - 1];
            pts[i] = lerp(&vertex(n, i), &pts[i + 1], x);
        }
        pts[0] = vertex(n, 0);
        pts
    }

    pub fn evaluate(&self, tau: &Q) -> Result<Vec<Q>> {
        let n = self.n;
        if tau.is_negative() || *tau > Q::from_integer(BigInt::from(n)) {
            return Err(Error::Domain(format!("time {tau} outside [0,{n}]")));
        }
        let pts = self.breakpoints();
        if n == 0 {
            return Ok(pts[0].clone());
        }
        let i = (0..n).find(|&i| *tau <= self.taus[i + 1]).unwrap_or(n - 1);
        let len = &self.taus[i + 1] - &self.taus[i];
        if len.is_zero() {
            return Ok(pts[i].clone());
        }
        Ok(lerp(&pts[i], &pts[i + 1], &((tau - &self.taus[i]) / len)))
    }

    /// The first point of the path lying in the face spanned by `v_i..v_n`.
    pub fn first_entry(&self, i: usize) -> Vec<Q> {
        let pts = self.breakpoints();
        pts.into_iter()
            .find(|p| p[..i].iter().all(Zero::is_zero))
            .expect("the path ends at v_n")
    }

    /// Cubical coordinates read back from the path itself.
    pub fn recovered_cube(&self) -> Vec<Q> {
        (1..self.n).map(|i| self.first_entry(i)[i + 1..].iter().sum()).collect()
    }

    /// The set of times at which the path sits at `v_q`, as a closed interval.
    pub fn vertex_preimage(&self, q: usize) -> Option<(Q, Q)> {
        let v = vertex(self.n, q);
        let pts = self.breakpoints();
        let hits: Vec<&Q> = pts.iter().zip(&self.taus).filter(|(p, _)| **p == v).map(|(_, t)| t).collect();
        // A vertex is an extreme point, so it is never interior to a segment between distinct points.
        Some(((*hits.first()?).clone(), (*hits.last()?).clone()))
    }

    pub fn interval_layout(&self) -> Result<IntervalLayout> {
        if let Some(x) = self.cube.iter().find(|x| x.is_zero() || x.is_one()) {
            return Err(Error::DegenerateLayout(format!("cubical coordinate {x} lies on the boundary")));
        }
        let mut intervals = Vec::with_capacity(self.n);
        let mut s = Q::zero();
        for i in 1..=self.n {
            if i == 1 {
                intervals.push((Q::zero(), Q::one()));
                continue;
            }
            let x = &self.cube[i - 2];
            s += x - x.recip();
            let w = Q::one() - x;
            intervals.push((s.clone(), &s + w));
        }
        Ok(IntervalLayout { intervals })
    }
}

impl fmt::Display for StraightLinePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.cube.iter().map(ToString::to_string).collect();
        write!(f, "path in Δ^{} with x = ({})", self.n, c.join(", "))
    }
}

/// Travelling intervals `I_1, …, I_n`, listed in that order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntervalLayout {
    #[serde(serialize_with = "serialize_intervals")]
    pub intervals: Vec<(Q, Q)>,
}

impl IntervalLayout {
    pub fn interiors_disjoint(&self) -> bool {
        let mut sorted: Vec<&(Q, Q)> = self.intervals.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        sorted.windows(2).all(|w| w[0].1 <= w[1].0)
    }

    /// `I_n ≤ … ≤ I_1` as intervals on the line.
    pub fn descending(&self) -> bool {
        self.intervals.windows(2).all(|w| w[1].1 <= w[0].0)
    }
}

/// A non-decreasing map `{0..m} → {0..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct MonotoneMap {
    values: Vec<usize>,
    target: usize,
}

impl MonotoneMap {
    pub fn new(values: Vec<usize>, target: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("a monotone map needs a non-empty source".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain(format!("{values:?} is not non-decreasing")));
        }
        if values.iter().any(|&v| v > target) {
            return Err(Error::Domain(format!("{values:?} leaves [{target}]")));
        }
        Ok(MonotoneMap { values, target })
    }

    pub fn identity(n: usize) -> Self {
        MonotoneMap { values: (0..=n).collect(), target: n }
    }

    /// The coface `[n−1] → [n]` skipping `i`.
    pub fn coface(n: usize, i: usize) -> Self {
        MonotoneMap { values: (0..n).map(|j| if j < i { j } else { j + 1 }).collect(), target: n }
    }

    /// The codegeneracy `[n+1] → [n]` hitting `i` twice.
    pub fn codegeneracy(n: usize, i: usize) -> Self {
        MonotoneMap { values: (0..=n + 1).map(|j| if j <= i { j } else { j - 1 }).collect(), target: n }
    }

    pub fn source_dim(&self) -> usize {
        self.values.len() - 1
    }

    pub fn target_dim(&self) -> usize {
        self.target
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply(&self, i: usize) -> usize {
        self.values[i]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MonotoneMap) -> Result<MonotoneMap> {
        if other.target != self.source_dim() {
            return Err(Error::Domain(format!(
                "cannot compose a map out of [{}] with a map into [{}]",
                self.source_dim(),
                other.target
            )));
        }
        Ok(MonotoneMap { values: other.values.iter().map(|&v| self.values[v]).collect(), target: self.target })
    }

    /// Every non-decreasing map `[m] → [n]`.
    pub fn all(m: usize, n: usize) -> Vec<MonotoneMap> {
        fn go(len: usize, lo: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<MonotoneMap>) {
            if cur.len() == len {
                out.push(MonotoneMap { values: cur.clone(), target: n });
                return;
            }
            for v in lo..=n {
                cur.push(v);
                go(len, v, n, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(m + 1, 0, n, &mut Vec::new(), &mut out);
        out
    }

    /// Pushes a barycentric point of `Δ^m` forward to `Δ^n`.
    pub fn push_point(&self, theta: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.target + 1];
        for (i, t) in theta.iter().enumerate() {
            out[self.values[i]] += t;
        }
        out
    }
}

/// A straight-line path living on the face `v_offset..v_{offset+n}` of an
/// ambient simplex, parametrised by `[offset, offset + n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathSegment {
    pub offset: usize,
    pub path: StraightLinePath,
}

impl PathSegment {
    pub fn whole(path: StraightLinePath) -> Self {
        PathSegment { offset: 0, path }
    }

    pub fn start(&self) -> usize {
        self.offset
    }

    pub fn end(&self) -> usize {
        self.offset + self.path.n
    }

    /// Barycentric point in the ambient `Δ^ambient` at global time `tau`.
    pub fn evaluate(&self, tau: &Q, ambient: usize) -> Result<Vec<Q>> {
        if self.end() > ambient {
            return Err(Error::Domain(format!("segment ends at vertex {} beyond [{ambient}]", self.end())));
        }
        let local = self.path.evaluate(&(tau - Q::from_integer(BigInt::from(self.offset))))?;
        let mut out = vec![Q::zero(); ambient + 1];
        for (j, t) in local.into_iter().enumerate() {
            out[self.offset + j] = t;
        }
        Ok(out)
    }

    /// Global times of the segment's breakpoints.
    pub fn global_taus(&self) -> Vec<Q> {
        let off = Q::from_integer(BigInt::from(self.offset));
        self.path.taus.iter().map(|t| t + &off).collect()
    }
}

/// A piecewise-affine function given by its breakpoints `(t, value)` in increasing `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseAffine {
    pub points: Vec<(Q, Q)>,
}

impl PiecewiseAffine {
    pub fn eval(&self, t: &Q) -> Result<Q> {
        let (first, last) = (&self.points[0], &self.points[self.points.len() - 1]);
        if *t < first.0 || *t > last.0 {
            return Err(Error::Domain(format!("{t} outside [{}, {}]", first.0, last.0)));
        }
        for w in self.points.windows(2) {
            let ((a, fa), (b, fb)) = (&w[0], &w[1]);
            if t <= b {
                if a == b {
                    return Ok(fa.clone());
                }
                return Ok(fa + (fb - fa) * ((t - a) / (b - a)));
            }
        }
        Ok(first.1.clone())
    }
}

impl Serialize for PiecewiseAffine {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.points.iter().map(|(a, b)| [a.to_string(), b.to_string()]))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pushforward {
    pub rho: PiecewiseAffine,
    pub segment: PathSegment,
}

/// Pushes a whole path in `Δ^m` forward along `f: [m] → [n]`.
pub fn pushforward(f: &MonotoneMap, path: &StraightLinePath) -> Result<Pushforward> {
    pushforward_segment(f, &PathSegment::whole(path.clone()))
}

/// Pushes a segment on the face `v_a..v_b` of `Δ^m` forward along `f: [m] → [n]`.
///
/// Only the part of `f_*ℓ` over `[f(a), f(b)]` is determined, and only that part is returned.
pub fn pushforward_segment(f: &MonotoneMap, seg: &PathSegment) -> Result<Pushforward> {
    if seg.end() > f.source_dim() {
        return Err(Error::Domain(format!(
            "segment on vertices {}..{} does not fit in [{}]",
            seg.start(),
            seg.end(),
            f.source_dim()
        )));
    }
    let d = seg.path.n;
    let h: Vec<usize> = (0..=d).map(|i| f.apply(seg.offset + i)).collect();
    let pts = seg.path.breakpoints();
    let push = |theta: &[Q]| -> Vec<Q> {
        let mut out = vec![Q::zero(); h[d] - h[0] + 1];
        for (i, t) in theta.iter().enumerate() {
            out[h[i] - h[0]] += t;
        }
        out
    };
    let base = Q::from_integer(BigInt::from(h[0]));
    let rho = PiecewiseAffine {
        points: seg
            .global_taus()
            .into_iter()
            .zip(&pts)
            .map(|(t, p)| (t, &base + time_of(&push(p))))
            .collect(),
    };
    let dim = h[d] - h[0];
    let cube = (1..dim)
        .map(|j| {
            let i = (0..=d).find(|&i| h[i] - h[0] >= j).expect("h(d) ≥ j");
            Q::one() - &push(&pts[i])[j]
        })
        .collect();
    let path = StraightLinePath::from_cube(dim, cube)?;
    Ok(Pushforward { rho, segment: PathSegment { offset: h[0], path } })
}

/// Checks `f∘ℓ = f_*ℓ∘ρ` at every breakpoint and segment midpoint, and that
/// `ρ` carries each `[τ_i, τ_{i+1}]` into a single `[σ_j, σ_{j+1}]`.
pub fn pushforward_sound(f: &MonotoneMap, seg: &PathSegment, pf: &Pushforward) -> Result<bool> {
    let n = f.target_dim();
    let taus = seg.global_taus();
    let sigmas = pf.segment.global_taus();
    let mut samples = taus.clone();
    samples.extend(taus.windows(2).map(|w| (&w[0] + &w[1]) / q(2, 1)));
    for t in &samples {
        let lhs = f.push_point(&seg.evaluate(t, f.source_dim())?);
        let rhs = pf.segment.evaluate(&pf.rho.eval(t)?, n)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    for w in taus.windows(2) {
        let (a, b) = (pf.rho.eval(&w[0])?, pf.rho.eval(&w[1])?);
        if !sigmas.windows(2).any(|s| s[0] <= a && b <= s[1]) && !(sigmas.len() == 1 && a == b) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FunctorialityVerdict {
    pub rho_composes: bool,
    pub segments_agree: bool,
    pub pushforwards_sound: bool,
}

impl FunctorialityVerdict {
    pub fn holds(&self) -> bool {
        self.rho_composes && self.segments_agree && self.pushforwards_sound
    }
}

/// Compares `(f∘g)_*ℓ` with `f_*(g_*ℓ)` and `ρ_{fg}` with `ρ_f∘ρ_g`, for `g: [m] → [k]`, `f: [k] → [n]`.
pub fn functoriality_check(f: &MonotoneMap, g: &MonotoneMap, path: &StraightLinePath) -> Result<FunctorialityVerdict> {
    if g.source_dim() != path.n {
        return Err(Error::Domain(format!("path lives in Δ^{} but the map starts at [{}]", path.n, g.source_dim())));
    }
    let fg = f.compose(g)?;
    let whole = PathSegment::whole(path.clone());
    let direct = checked_pushforward(&fg, &whole)?;
    let inner = checked_pushforward(g, &whole)?;
    compare(f, path, &direct, &inner)
}

/// A pushforward with its soundness check.
type Checked = Result<(Pushforward, bool)>;

fn checked_pushforward(f: &MonotoneMap, seg: &PathSegment) -> Checked {
    let pf = pushforward_segment(f, seg)?;
    let sound = pushforward_sound(f, seg, &pf)?;
    Ok((pf, sound))
}

fn compare(
    f: &MonotoneMap,
    path: &StraightLinePath,
    (direct, direct_sound): &(Pushforward, bool),
    (inner, inner_sound): &(Pushforward, bool),
) -> Result<FunctorialityVerdict> {
    let (outer, outer_sound) = checked_pushforward(f, &inner.segment)?;
    let taus = path.taus();
    let mut samples = taus.to_vec();
    samples.extend(taus.windows(2).map(|w| (&w[0] + &w[1]) / q(2, 1)));
    let mut rho_composes = true;
    for t in &samples {
        if direct.rho.eval(t)? != outer.rho.eval(&inner.rho.eval(t)?)? {
            rho_composes = false;
        }
    }
    Ok(FunctorialityVerdict {
        rho_composes,
        segments_agree: direct.segment == outer.segment,
        pushforwards_sound: *direct_sound && *inner_sound && outer_sound,
    })
}

/// A random path; coordinates are `k/d` with `d ≤ 12`, hitting the boundary now and then.
pub fn random_path<R: Rng>(rng: &mut R, n: usize) -> StraightLinePath {
    let coords = (1..n)
        .map(|_| {
            let d: i64 = rng.random_range(1..=12);
            q(rng.random_range(0..=d), d)
        })
        .collect();
    StraightLinePath::from_cube(n, coords).expect("coordinates lie in [0,1]")
}

/// A random path with every coordinate strictly inside `(0,1)`.
pub fn random_interior_path<R: Rng>(rng: &mut R, n: usize) -> StraightLinePath {
    let coords = (1..n)
        .map(|_| {
            let d: i64 = rng.random_range(2..=40);
            q(rng.random_range(1..d), d)
        })
        .collect();
    StraightLinePath::from_cube(n, coords).expect("coordinates lie in (0,1)")
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub pairs: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

/// Functoriality over every composable pair `[m] → [k] → [n]` with all dimensions `≤ max_dim`.
pub fn functoriality_sweep(max_dim: usize, paths_per_pair: usize, seed: u64) -> SweepReport {
    use rand::SeedableRng;
    let mut triples = Vec::new();
    for m in 0..=max_dim {
        for k in 0..=max_dim {
            for n in 0..=max_dim {
                triples.push((m, k, n));
            }
        }
    }
    let results: Vec<(usize, usize, Vec<String>)> = triples
        .into_par_iter()
        .map(|(m, k, n)| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ ((m * 100 + k * 10 + n) as u64).wrapping_mul(0x9e37_79b9));
            let paths: Vec<StraightLinePath> = (0..paths_per_pair).map(|_| random_path(&mut rng, m)).collect();
            let gs = MonotoneMap::all(m, k);
            let fs = MonotoneMap::all(k, n);
            let mut failures = Vec::new();
            for path in &paths {
                let whole = PathSegment::whole(path.clone());
                // Every map out of [m] is pushed forward once per path.
                let mut cache: HashMap<(Vec<usize>, usize), Checked> = HashMap::new();
                let mut pushed = |h: &MonotoneMap| {
                    cache
                        .entry((h.values.clone(), h.target))
                        .or_insert_with(|| checked_pushforward(h, &whole))
                        .clone()
                };
                for g in &gs {
                    let inner = pushed(g);
                    for f in &fs {
                        let outcome = f.compose(g).and_then(|fg| {
                            let direct = pushed(&fg)?;
                            compare(f, path, &direct, inner.as_ref().map_err(Clone::clone)?)
                        });
                        match outcome {
                            Ok(v) if v.holds() => {}
                            Ok(v) => failures.push(format!("f={:?} g={:?} {path}: {v:?}", f.values, g.values)),
                            Err(e) => failures.push(format!("f={:?} g={:?} {path}: {e}", f.values, g.values)),
                        }
                    }
                }
            }
            let pairs = gs.len() * fs.len();
            (pairs, pairs * paths.len(), failures)
        })
        .collect();
    let mut report = SweepReport { pairs: 0, checks: 0, failures: Vec::new() };
    for (p, c, f) in results {
        report.pairs += p;
        report.checks += c;
        report.failures.extend(f);
    }
    report
}
