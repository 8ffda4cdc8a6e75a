//! Borel-equivariant Morse complexes for `G = Z/p` over `F_p[[x]]/(x^N)`.
//!
//! Morse data is combinatorial: critical points with an index, an orbit and a
//! group tag, plus signed flow counts `a → b` between indices `i` and `i + 1`,
//! read as the cochain differential `δa = Σ count·b`. The classifying-space
//! model is the cell structure of `S^∞` with its free `Z/p` action; a shift map
//! raises the index by 2 (`p ≥ 3`) or 1 (`p = 2`) and records the power of `x`.
//!
//! The complex has generators `(q, y)` with `q` a critical point of the space and
//! `y` a distinguished lift in `EG`. A flow of `EG` from `y_+` to `g·τ^k(y_−)`
//! contributes `x^k (g^{-1} q, y_−)` to `d(q, y_+)`, and a flow of the space
//! contributes `(−1)^{|y|}(δq, y)`. For `p = 2` the complex is ungraded.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain_complex::{degree_homology, homology, ChainComplex, ChainMap, Generator, GradedFinModule, Grading};
use crate::coeff_ring::{check_prime, TruncatedSeries};
use crate::error::{Error, Result};
use crate::fg_module::{in_image, ImageDecision, SeriesMatrix};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub label: String,
    pub index: usize,
    pub orbit: usize,
    /// The group element `t^tag` carrying the orbit's base point here; 0 for fixed points.
    #[serde(default)]
    pub tag: u32,
    #[serde(default)]
    pub fixed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub from: String,
    pub to: String,
    pub count: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftPair {
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GMorseData {
    pub p: u32,
    pub points: Vec<CriticalPoint>,
    #[serde(default)]
    pub flows: Vec<Flow>,
    #[serde(default)]
    pub shift: Vec<ShiftPair>,
}

/// Lookup tables for validated data.
struct Indexed {
    /// `(orbit, tag) → point`.
    by_orbit: HashMap<(usize, u32), usize>,
    counts: HashMap<(usize, usize), i64>,
    shift: HashMap<usize, usize>,
}

impl GMorseData {
    pub fn validate(&self) -> Result<()> {
        self.indexed().map(|_| ())
    }

    fn indexed(&self) -> Result<Indexed> {
        check_prime(self.p)?;
        let p = self.p;
        let mut by_label = HashMap::new();
        for (i, q) in self.points.iter().enumerate() {
            if by_label.insert(q.label.clone(), i).is_some() {
                return Err(Error::Structural(format!("duplicate critical point {}", q.label)));
            }
        }
        let mut orbits: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, q) in self.points.iter().enumerate() {
            orbits.entry(q.orbit).or_default().push(i);
        }
        let mut by_orbit = HashMap::new();
        for (o, members) in &orbits {
            let first = &self.points[members[0]];
            if first.fixed {
                if members.len() != 1 || first.tag != 0 {
                    return Err(Error::Structural(format!("fixed orbit {o} must be a single point with tag 0")));
                }
            } else {
                let mut tags: Vec<u32> = members.iter().map(|&i| self.points[i].tag).collect();
                tags.sort_unstable();
                if tags != (0..p).collect::<Vec<_>>() {
                    return Err(Error::Structural(format!("free orbit {o} must carry each tag 0..{p} once")));
                }
                if members.iter().any(|&i| self.points[i].fixed || self.points[i].index != first.index) {
                    return Err(Error::Structural(format!("orbit {o} mixes fixed points or indices")));
                }
            }
            for &i in members {
                by_orbit.insert((*o, self.points[i].tag), i);
            }
        }
        let lookup = |l: &str| by_label.get(l).copied().ok_or_else(|| Error::Structural(format!("unknown critical point {l}")));
        let mut counts = HashMap::new();
        for f in &self.flows {
            let (a, b) = (lookup(&f.from)?, lookup(&f.to)?);
            if self.points[b].index != self.points[a].index + 1 {
                return Err(Error::Structural(format!("flow {} → {} does not raise the index by one", f.from, f.to)));
            }
            *counts.entry((a, b)).or_insert(0) += f.count;
        }
        counts.retain(|_, c| *c != 0);
        let mut shift = HashMap::new();
        for s in &self.shift {
            shift.insert(lookup(&s.from)?, lookup(&s.to)?);
        }
        let ix = Indexed { by_orbit, counts, shift };
        for (&(a, b), &c) in &ix.counts {
            for g in 1..p {
                let (ga, gb) = (self.act(&ix, g, a), self.act(&ix, g, b));
                if ix.counts.get(&(ga, gb)).copied().unwrap_or(0) != c {
                    return Err(Error::Structural(format!(
                        "flow counts are not equivariant: {} → {} under t^{g}",
                        self.points[a].label, self.points[b].label
                    )));
                }
            }
        }
        for (&a, &ta) in &ix.shift {
            for g in 1..p {
                if ix.shift.get(&self.act(&ix, g, a)) != Some(&self.act(&ix, g, ta)) {
                    return Err(Error::Structural(format!("shift does not commute with the action at {}", self.points[a].label)));
                }
            }
        }
        for (&(a, b), &c) in &ix.counts {
            if let (Some(&ta), Some(&tb)) = (ix.shift.get(&a), ix.shift.get(&b)) {
                let tc = ix.counts.get(&(ta, tb)).copied().unwrap_or(0);
                if (tc - c).rem_euclid(p as i64) != 0 {
                    return Err(Error::Structural(format!(
                        "shift does not preserve the flow count {} → {}",
                        self.points[a].label, self.points[b].label
                    )));
                }
            }
        }
        Ok(ix)
    }

    fn act(&self, ix: &Indexed, g: u32, i: usize) -> usize {
        let q = &self.points[i];
        if q.fixed {
            i
        } else {
            ix.by_orbit[&(q.orbit, (q.tag + g) % self.p)]
        }
    }

    pub fn fixed_points(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(|q| q.fixed)
    }

    pub fn points_of_index(&self, k: usize) -> usize {
        self.points.iter().filter(|q| q.index == k).count()
    }

    /// Index step of the shift map.
    pub fn shift_step(p: u32) -> usize {
        if p == 2 { 1 } else { 2 }
    }

    /// The `Z`-valued cellular boundary of the quotient by `G`, one orbit per index: entry `k` is `∂: C_k → C_{k−1}`.
    /// Each index must carry exactly one free orbit.
    pub fn quotient_boundaries(&self) -> Result<Vec<i64>> {
        let ix = self.indexed()?;
        let top = self.points.iter().map(|q| q.index).max().unwrap_or(0);
        let base = |k: usize| -> Result<usize> {
            let orbits: Vec<usize> = self.points.iter().filter(|q| q.index == k).map(|q| q.orbit).collect();
            if orbits.is_empty() || orbits.iter().any(|&o| o != orbits[0]) || self.points.iter().any(|q| q.index == k && q.fixed) {
                return Err(Error::Structural(format!("index {k} is not a single free orbit")));
            }
            Ok(ix.by_orbit[&(orbits[0], 0)])
        };
        let mut out = vec![0i64];
        for k in 1..=top {
            let upper = base(k)?;
            let lower_orbit = self.points[base(k - 1)?].orbit;
            let a: i64 = (0..self.p)
                .map(|h| ix.counts.get(&(ix.by_orbit[&(lower_orbit, h)], upper)).copied().unwrap_or(0))
                .sum();
            out.push(a);
        }
        Ok(out)
    }
}

/// Cell structure of the `EG` skeleton: indices `0..=2·level` for `p ≥ 3`, `0..=level` for `p = 2`.
pub fn build_bg_model(p: u32, level: usize) -> Result<GMorseData> {
    check_prime(p)?;
    if level < 2 {
        return Err(Error::Domain(format!("skeleton level {level} is below 2")));
    }
    let top = if p == 2 { level } else { 2 * level };
    let label = |k: usize, g: u32| format!("v{k},{g}");
    let mut points = Vec::new();
    for k in 0..=top {
        for g in 0..p {
            points.push(CriticalPoint { label: label(k, g), index: k, orbit: k, tag: g, fixed: false });
        }
    }
    let mut flows = Vec::new();
    for k in 0..top {
        for g in 0..p {
            let from = label(k, g);
            if p == 2 {
                // ∂e_{k+1} = (t + (−1)^{k+1}) e_k
                let s = if (k + 1) % 2 == 0 { 1 } else { -1 };
                flows.push(Flow { from: from.clone(), to: label(k + 1, (g + 1) % 2), count: 1 });
                flows.push(Flow { from, to: label(k + 1, g), count: s });
            } else if k % 2 == 0 {
                // ∂e_{k+1} = (t − 1) e_k
                flows.push(Flow { from: from.clone(), to: label(k + 1, (g + p - 1) % p), count: 1 });
                flows.push(Flow { from, to: label(k + 1, g), count: -1 });
            } else {
                // ∂e_{k+1} = N e_k
                for h in 0..p {
                    flows.push(Flow { from: from.clone(), to: label(k + 1, h), count: 1 });
                }
            }
        }
    }
    let step = GMorseData::shift_step(p);
    let shift = (0..=top.saturating_sub(step))
        .flat_map(|k| (0..p).map(move |g| (k, g)))
        .map(|(k, g)| ShiftPair { from: label(k, g), to: label(k + step, g) })
        .collect();
    Ok(GMorseData { p, points, flows, shift })
}

#[derive(Clone, Debug)]
pub struct EqMorseComplex {
    pub complex: ChainComplex,
    /// `(point of the space, distinguished lift)` per generator.
    pub pairs: Vec<(usize, usize)>,
    pub space: GMorseData,
    pub bg: GMorseData,
}

pub fn build_cm_eq(w: &GMorseData, bg: &GMorseData, precision: usize) -> Result<EqMorseComplex> {
    if w.p != bg.p {
        return Err(Error::Structural(format!("space has p = {} and the model p = {}", w.p, bg.p)));
    }
    let p = w.p;
    let wi = w.indexed()?;
    let bi = bg.indexed()?;
    let step = GMorseData::shift_step(p);
    let distinguished: Vec<usize> = (0..step)
        .map(|k| {
            bg.points
                .iter()
                .position(|q| q.index == k && q.tag == 0 && !q.fixed)
                .ok_or_else(|| Error::Structural(format!("model has no distinguished point of index {k}")))
        })
        .collect::<Result<_>>()?;
    // τ^k(y) for each distinguished y, to decompose flow endpoints as g·τ^k(y).
    let mut decompose: HashMap<(usize, u32), (usize, usize)> = HashMap::new();
    for (yi, &y) in distinguished.iter().enumerate() {
        let (mut cur, mut k) = (y, 0);
        loop {
            decompose.insert((bg.points[cur].orbit, 0), (yi, k));
            match bi.shift.get(&cur) {
                Some(&next) => {
                    cur = next;
                    k += 1;
                }
                None => break,
            }
        }
    }
    let mut pairs = Vec::new();
    let mut generators = Vec::new();
    let grading = if p == 2 { Grading::Ungraded } else { Grading::Z2 };
    for (qi, q) in w.points.iter().enumerate() {
        for (yi, &y) in distinguished.iter().enumerate() {
            pairs.push((qi, yi));
            let deg = if p == 2 { 0 } else { ((q.index + bg.points[y].index) % 2) as u8 };
            generators.push(Generator::new(format!("({},{})", q.label, bg.points[y].label), deg));
        }
    }
    let pos: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &pr)| (pr, i)).collect();
    let mut d = SeriesMatrix::zeros(pairs.len(), pairs.len(), p, precision);
    let add = |d: &mut SeriesMatrix, row: usize, col: usize, c: i64, k: usize| {
        if k < precision {
            let term = TruncatedSeries::monomial(c, k, p, precision);
            d[(row, col)] = &d[(row, col)] + &term;
        }
    };
    for (&(a, b), &c) in &wi.counts {
        for (yi, &y) in distinguished.iter().enumerate() {
            let sign = if bg.points[y].index.is_multiple_of(2) { c } else { -c };
            add(&mut d, pos[&(b, yi)], pos[&(a, yi)], sign, 0);
        }
    }
    for (&(a, b), &c) in &bi.counts {
        let Some(yp) = distinguished.iter().position(|&y| y == a) else { continue };
        let target = &bg.points[b];
        let &(ym, k) = decompose
            .get(&(target.orbit, 0))
            .ok_or_else(|| Error::Structural(format!("{} is not a shift of a distinguished point", target.label)))?;
        let base_tag = bg.points[distinguished[ym]].tag;
        let g = (target.tag + p - base_tag) % p;
        let g_inv = (p - g) % p;
        for qi in 0..w.points.len() {
            let q_minus = w.act(&wi, g_inv, qi);
            add(&mut d, pos[&(q_minus, ym)], pos[&(qi, yp)], c, k);
        }
    }
    let complex = ChainComplex::new(generators, d, grading)?;
    Ok(EqMorseComplex { complex, pairs, space: w.clone(), bg: bg.clone() })
}

impl EqMorseComplex {
    pub fn homology(&self) -> GradedFinModule {
        homology(&self.complex)
    }

    fn is_minimum_pair(&self, i: usize) -> bool {
        let (q, y) = self.pairs[i];
        self.space.points[q].index == 0 && y == 0
    }
}

/// Sum of the generators `(q, y)` with both indices zero.
pub fn unit_cycle(c: &EqMorseComplex) -> Result<Vec<TruncatedSeries>> {
    let (p, n) = (c.complex.modulus(), c.complex.precision());
    let unit: Vec<TruncatedSeries> = (0..c.pairs.len())
        .map(|i| if c.is_minimum_pair(i) { TruncatedSeries::one(p, n) } else { TruncatedSeries::zero(p, n) })
        .collect();
    if c.complex.apply_d(&unit)?.iter().any(|s| !s.is_zero()) {
        return Err(Error::ContractViolation("the sum of the minima is not a cycle".into()));
    }
    Ok(unit)
}

/// Projection onto the generators `(q0, y)`, which is a quotient by a subcomplex when `q0` is a fixed minimum.
pub fn localize_at_fixed_point(c: &EqMorseComplex, q0: &str) -> Result<(ChainComplex, ChainMap)> {
    let qi = c
        .space
        .points
        .iter()
        .position(|q| q.label == q0)
        .ok_or_else(|| Error::Domain(format!("no critical point {q0}")))?;
    let q = &c.space.points[qi];
    if !q.fixed || q.index != 0 {
        return Err(Error::Domain(format!("{q0} is not a fixed point of index 0")));
    }
    let keep: Vec<usize> = (0..c.pairs.len()).filter(|&i| c.pairs[i].0 == qi).collect();
    let rest: Vec<usize> = (0..c.pairs.len()).filter(|&i| c.pairs[i].0 != qi).collect();
    if !c.complex.differential().submatrix(&keep, &rest).is_zero() {
        return Err(Error::ContractViolation(format!("generators away from {q0} are not a subcomplex")));
    }
    let quotient = c.complex.restrict(&keep)?;
    let (p, n) = (c.complex.modulus(), c.complex.precision());
    let mut proj = SeriesMatrix::zeros(keep.len(), c.pairs.len(), p, n);
    for (r, &i) in keep.iter().enumerate() {
        proj[(r, i)] = TruncatedSeries::one(p, n);
    }
    let map = ChainMap::new(c.complex.clone(), quotient.clone(), 0, proj)?;
    if !map.is_chain_map() {
        return Err(Error::ContractViolation("projection is not a chain map".into()));
    }
    Ok((quotient, map))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnitClass {
    NotTorsion,
    Torsion,
    /// No minima, so the unit is zero.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnitVerdict {
    pub class: UnitClass,
    /// Largest `d` with the free part of `[1]` divisible by `x^d`.
    pub free_divisibility: Option<usize>,
    /// Least `e` with `x^e·1` a boundary, when one exists below the precision.
    pub annihilator: Option<usize>,
    pub precision_limited: bool,
}

pub fn unit_torsion_check(c: &EqMorseComplex) -> Result<UnitVerdict> {
    let unit = unit_cycle(c)?;
    if unit.iter().all(TruncatedSeries::is_zero) {
        return Ok(UnitVerdict { class: UnitClass::Degenerate, free_divisibility: None, annihilator: None, precision_limited: false });
    }
    let dh = degree_homology(&c.complex, 0);
    let local = dh.local(&unit);
    let coords = dh.boundaries.coordinates(&local)?;
    let free_divisibility = coords.free.iter().filter_map(|s| s.valuation().finite()).min();
    let d_in = c.complex.d_block(c.complex.next_degree(0), 0);
    let n = c.complex.precision();
    let mut annihilator = None;
    for e in 0..n {
        let target: Vec<TruncatedSeries> = local.iter().map(|s| s.shift_up(e)).collect();
        if let ImageDecision::Yes { .. } = in_image(&target, &d_in)? {
            annihilator = Some(e);
            break;
        }
    }
    let class = if free_divisibility.is_some() { UnitClass::NotTorsion } else { UnitClass::Torsion };
    let bound = dh.module.torsion.iter().copied().max().unwrap_or(0);
    let precision_limited = dh.module.precision_limited
        || free_divisibility.is_some_and(|v| v + bound >= n)
        || (class == UnitClass::Torsion && annihilator.is_none());
    Ok(UnitVerdict { class, free_divisibility, annihilator, precision_limited })
}

fn point(label: impl Into<String>, index: usize, orbit: usize, tag: u32, fixed: bool) -> CriticalPoint {
    CriticalPoint { label: label.into(), index, orbit, tag, fixed }
}

/// A single fixed minimum.
pub fn point_model(p: u32) -> GMorseData {
    GMorseData { p, points: vec![point("q0", 0, 0, 0, true)], flows: vec![], shift: vec![] }
}

/// One free orbit of minima.
pub fn free_orbit_model(p: u32) -> GMorseData {
    GMorseData { p, points: (0..p).map(|g| point(format!("a{g}"), 0, 0, g, false)).collect(), flows: vec![], shift: vec![] }
}

/// A fixed minimum together with a free orbit of minima.
pub fn fixed_and_orbit_model(p: u32) -> GMorseData {
    let mut m = free_orbit_model(p);
    for q in &mut m.points {
        q.orbit = 1;
    }
    m.points.insert(0, point("q0", 0, 0, 0, true));
    m
}

/// Models accepted by name: `pt`, `free-orbit`, `fixed-and-orbit`, each with `:p=P`.
pub fn builtin_model(spec: &str) -> Result<GMorseData> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    let mut p = 3u32;
    for kv in args.split(',').filter(|s| !s.is_empty()) {
        match kv.split_once('=') {
            Some(("p", v)) => p = v.parse().map_err(|_| Error::Input(format!("bad prime in {spec:?}")))?,
            _ => return Err(Error::Input(format!("unknown model argument {kv:?} in {spec:?}"))),
        }
    }
    check_prime(p).map_err(|e| Error::Input(e.to_string()))?;
    match name {
        "pt" => Ok(point_model(p)),
        "free-orbit" => Ok(free_orbit_model(p)),
        "fixed-and-orbit" => Ok(fixed_and_orbit_model(p)),
        _ => Err(Error::Input(format!("unknown model {name:?}; expected pt, free-orbit or fixed-and-orbit"))),
    }
}

/// Random equivariant data built from edges between minima and cancelling pairs.
/// When `fixed_minima > 0` the first minimum is `q0`, fixed.
pub fn random_model<R: Rng>(rng: &mut R, p: u32, fixed_minima: usize, free_minima: usize) -> GMorseData {
    let mut points = Vec::new();
    let mut flows = Vec::new();
    let mut orbit = 0usize;
    let free_orbit = |points: &mut Vec<CriticalPoint>, name: &str, index: usize, orbit: &mut usize| -> usize {
        for g in 0..p {
            points.push(point(format!("{name}{}.{g}", *orbit), index, *orbit, g, false));
        }
        *orbit += 1;
        *orbit - 1
    };
    let mut minima: Vec<(usize, bool)> = Vec::new();
    for _ in 0..fixed_minima {
        let label = if orbit == 0 { "q0".to_string() } else { format!("m{orbit}") };
        points.push(point(label, 0, orbit, 0, true));
        minima.push((orbit, true));
        orbit += 1;
    }
    for _ in 0..free_minima {
        let o = free_orbit(&mut points, "m", 0, &mut orbit);
        minima.push((o, false));
    }
    let label_of = |points: &[CriticalPoint], o: usize, g: u32| -> String {
        points.iter().find(|q| q.orbit == o && (q.fixed || q.tag == g)).expect("point exists").label.clone()
    };
    // Edges: a free orbit of index-1 points, each running from one minimum to another.
    let edges = if minima.is_empty() { 0 } else { rng.random_range(0..=3) };
    for _ in 0..edges {
        let (u, _) = minima[rng.random_range(0..minima.len())];
        let (v, _) = minima[rng.random_range(0..minima.len())];
        let twist = rng.random_range(0..p);
        let e = free_orbit(&mut points, "e", 1, &mut orbit);
        for g in 0..p {
            let b = label_of(&points, e, g);
            flows.push(Flow { from: label_of(&points, u, g), to: b.clone(), count: -1 });
            flows.push(Flow { from: label_of(&points, v, (g + twist) % p), to: b, count: 1 });
        }
    }
    // Cancelling pairs in higher index, fixed or free.
    for _ in 0..rng.random_range(0..=2) {
        let k = rng.random_range(1..=3);
        let c = rng.random_range(1..p as i64 + 2);
        if rng.random_bool(0.5) {
            let a = format!("c{orbit}");
            points.push(point(a.clone(), k, orbit, 0, true));
            let b = format!("c{}", orbit + 1);
            points.push(point(b.clone(), k + 1, orbit + 1, 0, true));
            orbit += 2;
            flows.push(Flow { from: a, to: b, count: c });
        } else {
            let a = free_orbit(&mut points, "c", k, &mut orbit);
            let b = free_orbit(&mut points, "c", k + 1, &mut orbit);
            for g in 0..p {
                flows.push(Flow { from: label_of(&points, a, g), to: label_of(&points, b, g), count: c });
            }
        }
    }
    GMorseData { p, points, flows, shift: vec![] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_complex::is_x_torsion;
    use crate::fg_module::FinModule;
    use crate::oracle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bg_models_have_the_right_cells() {
        for p in [2u32, 3, 5] {
            let bg = build_bg_model(p, 4).unwrap();
            bg.validate().unwrap();
            let top = if p == 2 { 4 } else { 8 };
            for k in 0..=top {
                assert_eq!(bg.points_of_index(k), p as usize);
            }
        }
        let bg = build_bg_model(3, 3).unwrap();
        assert_eq!(bg.points_of_index(0) + bg.points_of_index(1), 6);
        assert!(matches!(build_bg_model(4, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn quotient_matches_lens_space_homology() {
        for p in [2u32, 3, 5, 7] {
            for level in 2..=6 {
                let bg = build_bg_model(p, level).unwrap();
                let a = bg.quotient_boundaries().unwrap();
                assert_eq!(oracle::homology_of_rank_one_complex(&a), oracle::lens_space_homology(p as i64, a.len() - 1), "p={p} level={level}");
            }
        }
    }

    #[test]
    fn point_gives_bg_cohomology() {
        for p in [3u32, 5] {
            let c = build_cm_eq(&point_model(p), &build_bg_model(p, 8).unwrap(), 16).unwrap();
            let h = c.homology();
            assert!(h.even.same_invariants(&FinModule::free(1)));
            assert!(h.odd.same_invariants(&FinModule::free(1)));
        }
        let c = build_cm_eq(&point_model(2), &build_bg_model(2, 8).unwrap(), 16).unwrap();
        assert!(c.homology().even.same_invariants(&FinModule::free(1)));
        assert_eq!(c.complex.grading(), Grading::Ungraded);
    }

    #[test]
    fn free_orbit_is_a_single_copy_of_k() {
        for p in [2u32, 3, 5] {
            let c = build_cm_eq(&free_orbit_model(p), &build_bg_model(p, 4).unwrap(), 10).unwrap();
            let h = c.homology();
            assert_eq!(is_x_torsion(&h), (true, Some(1)));
            assert_eq!(h.even, FinModule::new(0, vec![1]));
            let v = unit_torsion_check(&c).unwrap();
            assert_eq!(v.class, UnitClass::Torsion);
            assert_eq!(v.annihilator, Some(1));
        }
    }

    #[test]
    fn free_orbit_differential_for_p3() {
        let c = build_cm_eq(&free_orbit_model(3), &build_bg_model(3, 2).unwrap(), 4).unwrap();
        let d = c.complex.differential();
        // d(a_g, v0) = (a_{g+1}, v1) − (a_g, v1); d(a_g, v1) = x Σ_h (a_h, v0)
        let x = TruncatedSeries::monomial(1, 1, 3, 4);
        let one = TruncatedSeries::one(3, 4);
        assert_eq!(d[(3, 0)], one);
        assert_eq!(d[(1, 0)], one.scale(2));
        for h in 0..3 {
            assert_eq!(d[(2 * h, 1)], x);
        }
    }

    #[test]
    fn unit_and_localization() {
        for p in [2u32, 3, 5] {
            let bg = build_bg_model(p, 4).unwrap();
            let c = build_cm_eq(&fixed_and_orbit_model(p), &bg, 12).unwrap();
            let unit = unit_cycle(&c).unwrap();
            assert_eq!(unit.iter().filter(|s| s.is_one()).count(), 1 + p as usize);
            let (quotient, map) = localize_at_fixed_point(&c, "q0").unwrap();
            let image = map.matrix.mul_vec(&unit).unwrap();
            assert!(image[0].is_one() && image[1..].iter().all(TruncatedSeries::is_zero));
            let pt = build_cm_eq(&point_model(p), &bg, 12).unwrap();
            assert!(homology(&quotient).same_invariants(&pt.homology()));
            let v = unit_torsion_check(&c).unwrap();
            assert_eq!((v.class, v.free_divisibility), (UnitClass::NotTorsion, Some(0)));
            assert!(matches!(localize_at_fixed_point(&c, "a0"), Err(Error::Domain(_))));
        }
        let c = build_cm_eq(&point_model(3), &build_bg_model(3, 3).unwrap(), 8).unwrap();
        let (_, map) = localize_at_fixed_point(&c, "q0").unwrap();
        assert!(map.matrix.is_identity());
    }

    #[test]
    fn random_models_follow_the_dichotomy() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in [2u32, 3, 5] {
            let bg = build_bg_model(p, 4).unwrap();
            for _ in 0..8 {
                let fixed = rng.random_range(1..=2);
                let free = rng.random_range(0..=2);
                let w = random_model(&mut rng, p, fixed, free);
                let c = build_cm_eq(&w, &bg, 12).unwrap();
                assert_eq!(unit_torsion_check(&c).unwrap().class, UnitClass::NotTorsion, "{w:?}");
                let (quotient, _) = localize_at_fixed_point(&c, "q0").unwrap();
                assert!(homology(&quotient).even.free_rank > 0);
                let orbits = rng.random_range(1..=2);
                let free_only = random_model(&mut rng, p, 0, orbits);
                let c = build_cm_eq(&free_only, &bg, 12).unwrap();
                let v = unit_torsion_check(&c).unwrap();
                assert_eq!(v.class, UnitClass::Torsion, "{free_only:?}");
                assert!(v.annihilator.is_some());
            }
        }
    }

    #[test]
    fn empty_space_is_degenerate() {
        let w = GMorseData { p: 3, points: vec![], flows: vec![], shift: vec![] };
        let c = build_cm_eq(&w, &build_bg_model(3, 2).unwrap(), 4).unwrap();
        assert_eq!(unit_torsion_check(&c).unwrap().class, UnitClass::Degenerate);
    }

    #[test]
    fn invalid_data_is_rejected() {
        let mut w = free_orbit_model(3);
        w.points.push(point("b0", 1, 1, 0, true));
        w.flows.push(Flow { from: "a0".into(), to: "b0".into(), count: 1 });
        assert!(matches!(w.validate(), Err(Error::Structural(m)) if m.contains("equivariant")));
        let mut w = free_orbit_model(3);
        w.points.pop();
        assert!(matches!(w.validate(), Err(Error::Structural(_))));
        let mut w = point_model(3);
        w.points.push(point("b", 2, 1, 0, true));
        w.flows.push(Flow { from: "q0".into(), to: "b".into(), count: 1 });
        assert!(w.validate().is_err());
        assert!(builtin_model("pt:p=4").is_err());
        assert_eq!(builtin_model("free-orbit:p=2").unwrap(), free_orbit_model(2));
    }

    #[test]
    fn json_round_trip() {
        let m = random_model(&mut ChaCha8Rng::seed_from_u64(1), 3, 1, 1);
        let s = serde_json::to_string(&m).unwrap();
        let back: GMorseData = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
