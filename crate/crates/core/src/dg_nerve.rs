//! Functors into the dg-nerve of chain complexes over `F_p[[x]]/(x^N)`.
//!
//! A functor on `Δⁿ` assigns a complex `C_i` to each vertex and, to each
//! subsimplex `S = {s_0 < … < s_m}` with `m ≥ 1`, a map `c_S: C_{s_0} → C_{s_m}`
//! of degree `1 − m`. The maps must satisfy
//!
//! ```text
//! Σ_{j=1}^{m−1} (−1)^j (c_{S[j..m]} c_{S[0..j]} − c_{S∖s_j}) = c_S d + (−1)^m d c_S.
//! ```
//!
//! Signs follow the cone convention of [`crate::chain_complex`]: a shift
//! negates the differential, and the witness matrices for a 2-simplex carry
//! the Koszul signs fixed by [`WitnessSigns::koszul`].

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::chain_complex::{check_map_shape, homology, is_x_torsion, mapping_cone, ChainComplex, ChainMap, Generator};
use crate::coeff_ring::TruncatedSeries;
use crate::error::{Error, Result};
use crate::fg_module::SeriesMatrix;
use crate::gen;
use crate::par::*;

pub const MAX_DIMENSION: usize = 4;

/// Degree of the map attached to a simplex with `len` vertices.
pub fn simplex_degree(len: usize) -> u8 {
    (len % 2) as u8
}

/// Every subsimplex of `{0..n}` with at least two vertices, shortest first.
pub fn subsimplices(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u32..1 << (n + 1))
        .filter(|m| m.count_ones() >= 2)
        .map(|m| (0..=n).filter(|&i| m & (1 << i) != 0).collect())
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctorData {
    pub complexes: Vec<ChainComplex>,
    /// Keyed by the sorted vertex list of the subsimplex.
    pub maps: BTreeMap<Vec<usize>, SeriesMatrix>,
}

impl FunctorData {
    pub fn new(complexes: Vec<ChainComplex>, maps: BTreeMap<Vec<usize>, SeriesMatrix>) -> Result<Self> {
        let data = FunctorData { complexes, maps };
        data.validate()?;
        Ok(data)
    }

    pub fn dimension(&self) -> usize {
        self.complexes.len().saturating_sub(1)
    }

    fn validate(&self) -> Result<()> {
        if self.complexes.is_empty() {
            return Err(Error::Structural("functor data needs at least one vertex".into()));
        }
        let n = self.dimension();
        if n > MAX_DIMENSION {
            return Err(Error::Structural(format!("simplex dimension {n} exceeds {MAX_DIMENSION}")));
        }
        for key in self.maps.keys() {
            if key.len() < 2 || key.windows(2).any(|w| w[0] >= w[1]) || key.iter().any(|&v| v > n) {
                return Err(Error::Structural(format!("{key:?} is not a subsimplex of [{n}]")));
            }
        }
        for s in subsimplices(n) {
            let m = self.maps.get(&s).ok_or_else(|| Error::Structural(format!("no map for simplex {s:?}")))?;
            let (src, dst) = (&self.complexes[s[0]], &self.complexes[s[s.len() - 1]]);
            check_map_shape(src, dst, simplex_degree(s.len()), m)
                .map_err(|e| Error::Structural(format!("simplex {s:?}: {e}")))?;
        }
        Ok(())
    }

    pub fn map(&self, s: &[usize]) -> &SeriesMatrix {
        &self.maps[s]
    }

    /// The chain map attached to the edge `i < j`.
    pub fn edge(&self, i: usize, j: usize) -> Result<ChainMap> {
        let m = self
            .maps
            .get(&vec![i, j])
            .ok_or_else(|| Error::Structural(format!("no edge ({i}, {j})")))?;
        ChainMap::new(self.complexes[i].clone(), self.complexes[j].clone(), 0, m.clone())
    }

    /// The face opposite vertex `v`, with vertices renumbered.
    pub fn face(&self, v: usize) -> Result<FunctorData> {
        if self.dimension() == 0 || v > self.dimension() {
            return Err(Error::Structural(format!("no face opposite vertex {v}")));
        }
        let relabel = |i: usize| if i < v { i } else { i - 1 };
        let complexes = self.complexes.iter().enumerate().filter(|&(i, _)| i != v).map(|(_, c)| c.clone()).collect();
        let maps = self
            .maps
            .iter()
            .filter(|(k, _)| !k.contains(&v))
            .map(|(k, m)| (k.iter().map(|&i| relabel(i)).collect(), m.clone()))
            .collect();
        FunctorData::new(complexes, maps)
    }

    /// Pullback along the codegeneracy `[n+1] → [n]` that repeats vertex `i`.
    /// Degenerate edges go to identities and higher degenerate simplices to zero.
    pub fn degenerate(&self, i: usize) -> Result<FunctorData> {
        let n = self.dimension();
        if i > n || n + 1 > MAX_DIMENSION {
            return Err(Error::Structural(format!("cannot repeat vertex {i} of [{n}]")));
        }
        let s = |j: usize| if j <= i { j } else { j - 1 };
        let complexes: Vec<ChainComplex> = (0..=n + 1).map(|j| self.complexes[s(j)].clone()).collect();
        let mut maps = BTreeMap::new();
        for key in subsimplices(n + 1) {
            let image: Vec<usize> = key.iter().map(|&j| s(j)).collect();
            let (src, dst) = (&complexes[key[0]], &complexes[key[key.len() - 1]]);
            let m = if image.windows(2).all(|w| w[0] < w[1]) {
                self.maps[&image].clone()
            } else if key.len() == 2 {
                SeriesMatrix::identity(src.len(), src.modulus(), src.precision())
            } else {
                SeriesMatrix::zeros(dst.len(), src.len(), src.modulus(), src.precision())
            };
            maps.insert(key, m);
        }
        FunctorData::new(complexes, maps)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralResidual {
    pub simplex: Vec<usize>,
    pub vanishes: bool,
    pub residual: SeriesMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidualReport {
    pub residuals: Vec<StructuralResidual>,
}

impl ResidualReport {
    pub fn all_vanish(&self) -> bool {
        self.residuals.iter().all(|r| r.vanishes)
    }

    pub fn failing(&self) -> Vec<&[usize]> {
        self.residuals.iter().filter(|r| !r.vanishes).map(|r| r.simplex.as_slice()).collect()
    }
}

fn sign(k: usize, m: &SeriesMatrix) -> SeriesMatrix {
    if k.is_multiple_of(2) { m.clone() } else { m.neg() }
}

/// The left side minus the right side of the structural equation for `s`.
pub fn residual(data: &FunctorData, s: &[usize]) -> Result<SeriesMatrix> {
    let m = s.len() - 1;
    let c = data.map(s);
    let d0 = data.complexes[s[0]].differential();
    let dm = data.complexes[s[m]].differential();
    let mut acc = c.mul(d0)?.add(&sign(m, &dm.mul(c)?))?.neg();
    for j in 1..m {
        let composite = data.map(&s[j..]).mul(data.map(&s[..=j]))?;
        let mut without = s.to_vec();
        without.remove(j);
        acc = acc.add(&sign(j, &composite.sub(data.map(&without))?))?;
    }
    Ok(acc)
}

pub fn verify_functor(data: &FunctorData) -> Result<ResidualReport> {
    data.validate()?;
    let residuals = subsimplices(data.dimension())
        .into_par_iter()
        .map(|s| {
            let r = residual(data, &s)?;
            Ok(StructuralResidual { vanishes: r.is_zero(), simplex: s, residual: r })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport { residuals })
}

/// Signs on the entries of the 2-simplex witness matrices that the mod-2 picture leaves open.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessSigns {
    /// Lower-right entry of `d_Γ`.
    pub gamma_shift: i64,
    /// The identity `C_1[1] → C_1` in `d_Δ`.
    pub delta_corner: i64,
    /// Differential of `C_0[1]` in `d_Δ`.
    pub delta_shift0: i64,
    /// Differential of `C_1[1]` in `d_Δ`.
    pub delta_shift1: i64,
    /// The `k` entry of `p`.
    pub p_k: i64,
    /// The `k` entry of `i`.
    pub i_k: i64,
    /// The single nonzero entry of `K`.
    pub homotopy: i64,
}

impl WitnessSigns {
    pub const FIELDS: [&'static str; 7] =
        ["gamma_shift", "delta_corner", "delta_shift0", "delta_shift1", "p_k", "i_k", "homotopy"];

    pub fn koszul() -> Self {
        WitnessSigns { gamma_shift: -1, delta_corner: -1, delta_shift0: -1, delta_shift1: -1, p_k: -1, i_k: 1, homotopy: -1 }
    }

    /// All signs `+1`, the picture over `F_2`.
    pub fn unsigned() -> Self {
        WitnessSigns { gamma_shift: 1, delta_corner: 1, delta_shift0: 1, delta_shift1: 1, p_k: 1, i_k: 1, homotopy: 1 }
    }

    /// The same table with one named sign flipped.
    pub fn flipped(&self, field: &str) -> Option<Self> {
        let mut s = *self;
        let slot = match field {
            "gamma_shift" => &mut s.gamma_shift,
            "delta_corner" => &mut s.delta_corner,
            "delta_shift0" => &mut s.delta_shift0,
            "delta_shift1" => &mut s.delta_shift1,
            "p_k" => &mut s.p_k,
            "i_k" => &mut s.i_k,
            "homotopy" => &mut s.homotopy,
            _ => return None,
        };
        *slot = -*slot;
        Some(s)
    }
}

impl Default for WitnessSigns {
    fn default() -> Self {
        Self::koszul()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WitnessIdentity {
    #[serde(rename = "d_gamma^2 = 0")]
    GammaSquare,
    #[serde(rename = "d_delta^2 = 0")]
    DeltaSquare,
    #[serde(rename = "p chain map")]
    PChainMap,
    #[serde(rename = "i chain map")]
    IChainMap,
    #[serde(rename = "p i = 1")]
    Retraction,
    #[serde(rename = "1 - i p = dK + Kd")]
    Homotopy,
}

impl WitnessIdentity {
    pub const ALL: [WitnessIdentity; 6] = [
        WitnessIdentity::GammaSquare,
        WitnessIdentity::DeltaSquare,
        WitnessIdentity::PChainMap,
        WitnessIdentity::IChainMap,
        WitnessIdentity::Retraction,
        WitnessIdentity::Homotopy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WitnessIdentity::GammaSquare => "d_gamma^2 = 0",
            WitnessIdentity::DeltaSquare => "d_delta^2 = 0",
            WitnessIdentity::PChainMap => "p chain map",
            WitnessIdentity::IChainMap => "i chain map",
            WitnessIdentity::Retraction => "p i = 1",
            WitnessIdentity::Homotopy => "1 - i p = dK + Kd",
        }
    }
}

impl std::fmt::Display for WitnessIdentity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// `Γ = C_2 ⊕ C_0[1]`, `Δ = C_1 ⊕ C_0[1] ⊕ C_2 ⊕ C_1[1]` and the maps between them.
#[derive(Clone, Debug)]
pub struct Witness {
    pub gamma: ChainComplex,
    pub delta: ChainComplex,
    pub p: ChainMap,
    pub i: ChainMap,
    pub homotopy: SeriesMatrix,
    pub signs: WitnessSigns,
    /// Generators `0..sub_len` of `Δ` span the subcomplex `C_1 ⊕ C_0[1]`.
    pub sub_len: usize,
}

struct RawWitness {
    d_gamma: SeriesMatrix,
    d_delta: SeriesMatrix,
    p: SeriesMatrix,
    i: SeriesMatrix,
    k: SeriesMatrix,
}

fn signed(m: &SeriesMatrix, s: i64) -> SeriesMatrix {
    if s >= 0 { m.clone() } else { m.neg() }
}

fn raw_witness(f: &ChainMap, g: &ChainMap, h: &ChainMap, k: &SeriesMatrix, s: &WitnessSigns) -> Result<RawWitness> {
    let (c0, c1, c2) = (&f.source, &f.target, &g.target);
    let (p, n) = (c0.modulus(), c0.precision());
    let (n0, n1, n2) = (c0.len(), c1.len(), c2.len());
    let z = |r: usize, c: usize| SeriesMatrix::zeros(r, c, p, n);
    let id = |r: usize| SeriesMatrix::identity(r, p, n);
    let (d0, d1, d2) = (c0.differential(), c1.differential(), c2.differential());
    let d_gamma = SeriesMatrix::block(&[vec![d2, &h.matrix], vec![&z(n0, n2), &signed(d0, s.gamma_shift)]])?;
    let d_delta = SeriesMatrix::block(&[
        vec![d1, &f.matrix, &z(n1, n2), &signed(&id(n1), s.delta_corner)],
        vec![&z(n0, n1), &signed(d0, s.delta_shift0), &z(n0, n2), &z(n0, n1)],
        vec![&z(n2, n1), &z(n2, n0), d2, &g.matrix],
        vec![&z(n1, n1), &z(n1, n0), &z(n1, n2), &signed(d1, s.delta_shift1)],
    ])?;
    let pm = SeriesMatrix::block(&[
        vec![&g.matrix, &signed(k, s.p_k), &id(n2), &z(n2, n1)],
        vec![&z(n0, n1), &id(n0), &z(n0, n2), &z(n0, n1)],
    ])?;
    let im = SeriesMatrix::block(&[
        vec![&z(n1, n2), &z(n1, n0)],
        vec![&z(n0, n2), &id(n0)],
        vec![&id(n2), &signed(k, s.i_k)],
        vec![&z(n1, n2), &f.matrix],
    ])?;
    let km = SeriesMatrix::block(&[
        vec![&z(n1, n1), &z(n1, n0), &z(n1, n2), &z(n1, n1)],
        vec![&z(n0, n1), &z(n0, n0), &z(n0, n2), &z(n0, n1)],
        vec![&z(n2, n1), &z(n2, n0), &z(n2, n2), &z(n2, n1)],
        vec![&signed(&id(n1), s.homotopy), &z(n1, n0), &z(n1, n2), &z(n1, n1)],
    ])?;
    Ok(RawWitness { d_gamma, d_delta, p: pm, i: im, k: km })
}

fn identity_holds(w: &RawWitness, which: WitnessIdentity) -> Result<bool> {
    let (dg, dd) = (&w.d_gamma, &w.d_delta);
    let (p, n) = (dd.modulus(), dd.precision());
    Ok(match which {
        WitnessIdentity::GammaSquare => dg.mul(dg)?.is_zero(),
        WitnessIdentity::DeltaSquare => dd.mul(dd)?.is_zero(),
        WitnessIdentity::PChainMap => w.p.mul(dd)?.sub(&dg.mul(&w.p)?)?.is_zero(),
        WitnessIdentity::IChainMap => w.i.mul(dg)?.sub(&dd.mul(&w.i)?)?.is_zero(),
        WitnessIdentity::Retraction => w.p.mul(&w.i)?.is_identity(),
        WitnessIdentity::Homotopy => {
            let lhs = SeriesMatrix::identity(dd.rows(), p, n).sub(&w.i.mul(&w.p)?)?;
            lhs.sub(&dd.mul(&w.k)?.add(&w.k.mul(dd)?)?)?.is_zero()
        }
    })
}

/// Checks `h − g f = k d + d k` for `f: C_0 → C_1`, `g: C_1 → C_2`, `h: C_0 → C_2` and odd `k: C_0 → C_2`.
pub fn check_two_simplex(f: &ChainMap, g: &ChainMap, h: &ChainMap, k: &SeriesMatrix) -> Result<()> {
    if f.target != g.source || h.source != f.source || h.target != g.target {
        return Err(Error::Structural("maps do not form a triangle".into()));
    }
    check_map_shape(&f.source, &g.target, 1, k)?;
    for (name, m) in [("f", f), ("g", g), ("h", h)] {
        if !m.is_chain_map() {
            return Err(Error::ContractViolation(format!("{name} is not a chain map")));
        }
    }
    let lhs = h.matrix.sub(&g.matrix.mul(&f.matrix)?)?;
    let rhs = k.mul(f.source.differential())?.add(&g.target.differential().mul(k)?)?;
    if lhs != rhs {
        return Err(Error::ContractViolation("h - gf = kd + dk fails".into()));
    }
    Ok(())
}

pub fn composition_witness(f: &ChainMap, g: &ChainMap, h: &ChainMap, k: &SeriesMatrix) -> Result<Witness> {
    composition_witness_with(f, g, h, k, &WitnessSigns::koszul())
}

/// As [`composition_witness`] with an explicit sign table; fails on the first identity that does not close.
pub fn composition_witness_with(
    f: &ChainMap,
    g: &ChainMap,
    h: &ChainMap,
    k: &SeriesMatrix,
    signs: &WitnessSigns,
) -> Result<Witness> {
    check_two_simplex(f, g, h, k)?;
    let raw = raw_witness(f, g, h, k, signs)?;
    if let Some(bad) = first_failing_identity(&raw)? {
        return Err(Error::ContractViolation(format!("witness identity fails: {bad}")));
    }
    let (c0, c1, c2) = (&f.source, &f.target, &g.target);
    let mut gamma_gens = c2.generators().to_vec();
    gamma_gens.extend(c0.shift().generators().iter().cloned());
    let mut delta_gens: Vec<Generator> = c1.generators().to_vec();
    delta_gens.extend(c0.shift().generators().iter().cloned());
    delta_gens.extend(c2.generators().iter().cloned());
    delta_gens.extend(c1.shift().generators().iter().cloned());
    let gamma = ChainComplex::new(gamma_gens, raw.d_gamma, c0.grading())?;
    let delta = ChainComplex::new(delta_gens, raw.d_delta, c0.grading())?;
    let p = ChainMap::new(delta.clone(), gamma.clone(), 0, raw.p)?;
    let i = ChainMap::new(gamma.clone(), delta.clone(), 0, raw.i)?;
    Ok(Witness { gamma, delta, p, i, homotopy: raw.k, signs: *signs, sub_len: c1.len() + c0.len() })
}

fn first_failing_identity(raw: &RawWitness) -> Result<Option<WitnessIdentity>> {
    for id in WitnessIdentity::ALL {
        if !identity_holds(raw, id)? {
            return Ok(Some(id));
        }
    }
    Ok(None)
}

/// Which of the witness identities hold for the given sign table, without failing early.
pub fn witness_identities(
    f: &ChainMap,
    g: &ChainMap,
    h: &ChainMap,
    k: &SeriesMatrix,
    signs: &WitnessSigns,
) -> Result<Vec<(WitnessIdentity, bool)>> {
    check_two_simplex(f, g, h, k)?;
    let raw = raw_witness(f, g, h, k, signs)?;
    WitnessIdentity::ALL.iter().map(|&id| Ok((id, identity_holds(&raw, id)?))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionVerdict {
    /// Torsion bounds of the cones of `f`, `g`, `h`; `None` when not x-torsion.
    pub bounds: [Option<usize>; 3],
    pub hypothesis: bool,
    pub conclusion: bool,
    /// `H(Δ)` has the invariants of `H(Γ)`.
    pub delta_matches_gamma: bool,
    /// The subcomplex and quotient of `Δ` are the cones of `f` and `g`.
    pub filtration_matches_cones: bool,
}

impl TorsionVerdict {
    pub fn holds(&self) -> bool {
        (!self.hypothesis || self.conclusion) && self.delta_matches_gamma && self.filtration_matches_cones
    }
}

pub fn torsion_propagation(f: &ChainMap, g: &ChainMap, h: &ChainMap, k: &SeriesMatrix) -> Result<TorsionVerdict> {
    let w = composition_witness(f, g, h, k)?;
    let cones = [mapping_cone(f)?, mapping_cone(g)?, mapping_cone(h)?];
    let hs: Vec<_> = cones.par_iter().map(homology).collect();
    let bounds = [is_x_torsion(&hs[0]).1, is_x_torsion(&hs[1]).1, is_x_torsion(&hs[2]).1];
    let hypothesis = bounds[0].is_some() && bounds[1].is_some();
    let conclusion = bounds[2].is_some();
    let delta_matches_gamma = homology(&w.delta).same_invariants(&hs[2]);
    let sub: Vec<usize> = (0..w.sub_len).collect();
    let quo: Vec<usize> = (w.sub_len..w.delta.len()).collect();
    let dd = w.delta.differential();
    let closed = dd.submatrix(&quo, &sub).is_zero();
    let filtration_matches_cones = closed
        && dd.submatrix(&sub, &sub) == *cones[0].differential()
        && dd.submatrix(&quo, &quo) == *cones[1].differential();
    Ok(TorsionVerdict { bounds, hypothesis, conclusion, delta_matches_gamma, filtration_matches_cones })
}

pub fn cone_of_edge(data: &FunctorData, edge: (usize, usize)) -> Result<ChainComplex> {
    let (i, j) = edge;
    if i >= j || j > data.dimension() {
        return Err(Error::Structural(format!("({i}, {j}) is not an edge of [{}]", data.dimension())));
    }
    mapping_cone(&data.edge(i, j)?)
}

/// A valid 2-simplex `(f, g, h = g f + k d + d k, k)` on random complexes.
pub struct RandomTriangle {
    pub f: ChainMap,
    pub g: ChainMap,
    pub h: ChainMap,
    pub k: SeriesMatrix,
}

impl RandomTriangle {
    pub fn functor_data(&self) -> Result<FunctorData> {
        let maps = BTreeMap::from([
            (vec![0, 1], self.f.matrix.clone()),
            (vec![1, 2], self.g.matrix.clone()),
            (vec![0, 2], self.h.matrix.clone()),
            (vec![0, 1, 2], self.k.clone()),
        ]);
        FunctorData::new(vec![self.f.source.clone(), self.f.target.clone(), self.g.target.clone()], maps)
    }
}

fn close_triangle<R: Rng>(rng: &mut R, f: ChainMap, g: ChainMap) -> Result<RandomTriangle> {
    let k = gen::random_map(rng, &f.source, &g.target, 1, 0.4).matrix;
    let null = k.mul(f.source.differential())?.add(&g.target.differential().mul(&k)?)?;
    let h = ChainMap::new(f.source.clone(), g.target.clone(), 0, g.matrix.mul(&f.matrix)?.add(&null)?)?;
    Ok(RandomTriangle { f, g, h, k })
}

pub fn random_triangle<R: Rng>(rng: &mut R, p: u32, precision: usize, max_size: usize) -> Result<RandomTriangle> {
    let cs: Vec<_> = (0..3).map(|_| {
        let size = rng.random_range(1..=max_size);
        gen::random_complex(rng, p, precision, size)
    }).collect();
    let f = gen::random_chain_map(rng, &cs[0], &cs[1])?;
    let g = gen::random_chain_map(rng, &cs[1], &cs[2])?;
    close_triangle(rng, f, g)
}

/// A triangle whose two edges have x-torsion cones with bounds `a` and `b`.
pub fn random_torsion_triangle<R: Rng>(
    rng: &mut R,
    p: u32,
    precision: usize,
    max_size: usize,
    a: usize,
    b: usize,
) -> Result<RandomTriangle> {
    let size = rng.random_range(1..=max_size);
    let c0 = gen::random_complex(rng, p, precision, size);
    let (c1, f) = gen::torsion_cone_map(rng, &c0, a)?;
    let (_, g) = gen::torsion_cone_map(rng, &c1, b)?;
    close_triangle(rng, f, g)
}

/// Valid data on `Δ³`: random edges `01, 12, 23`, random 2-cells `012, 123, 023` and 3-cell,
/// with the remaining edges and the 2-cell `013` solved from the structural equation.
pub fn random_three_simplex<R: Rng>(rng: &mut R, p: u32, precision: usize, max_size: usize) -> Result<FunctorData> {
    let cs: Vec<_> = (0..4).map(|_| {
        let size = rng.random_range(1..=max_size);
        gen::random_complex(rng, p, precision, size)
    }).collect();
    let c: Vec<&ChainComplex> = cs.iter().map(|r| &r.complex).collect();
    let d = |i: usize| c[i].differential();
    let f01 = gen::random_chain_map(rng, &cs[0], &cs[1])?.matrix;
    let f12 = gen::random_chain_map(rng, &cs[1], &cs[2])?.matrix;
    let f23 = gen::random_chain_map(rng, &cs[2], &cs[3])?.matrix;
    let k012 = gen::random_map(rng, c[0], c[2], 1, 0.4).matrix;
    let k123 = gen::random_map(rng, c[1], c[3], 1, 0.4).matrix;
    let k023 = gen::random_map(rng, c[0], c[3], 1, 0.4).matrix;
    let top = gen::random_map(rng, c[0], c[3], 0, 0.4).matrix;
    let f02 = f12.mul(&f01)?.add(&k012.mul(d(0))?)?.add(&d(2).mul(&k012)?)?;
    let f13 = f23.mul(&f12)?.add(&k123.mul(d(1))?)?.add(&d(3).mul(&k123)?)?;
    // −k123 f01 + k023 + f23 k012 − k013 = top d − d top
    let k013 = k023
        .sub(&k123.mul(&f01)?)?
        .add(&f23.mul(&k012)?)?
        .sub(&top.mul(d(0))?.sub(&d(3).mul(&top)?)?)?;
    let f03 = f23.mul(&f02)?.add(&k023.mul(d(0))?)?.add(&d(3).mul(&k023)?)?;
    let maps = BTreeMap::from([
        (vec![0, 1], f01),
        (vec![1, 2], f12),
        (vec![2, 3], f23),
        (vec![0, 2], f02),
        (vec![1, 3], f13),
        (vec![0, 3], f03),
        (vec![0, 1, 2], k012),
        (vec![1, 2, 3], k123),
        (vec![0, 2, 3], k023),
        (vec![0, 1, 3], k013),
        (vec![0, 1, 2, 3], top),
    ]);
    FunctorData::new(c.into_iter().cloned().collect(), maps)
}

/// Adds `d e − e d` to the top cell, which keeps every equation satisfied.
pub fn perturb_top<R: Rng>(rng: &mut R, data: &FunctorData) -> Result<FunctorData> {
    let n = data.dimension();
    let top: Vec<usize> = (0..=n).collect();
    let (src, dst) = (&data.complexes[0], &data.complexes[n]);
    let e = gen::random_map(rng, src, dst, simplex_degree(n + 1) ^ 1, 0.4).matrix;
    let shift = dst.differential().mul(&e)?.sub(&sign(n, &e.mul(src.differential())?))?;
    let mut out = data.clone();
    let m = out.maps.get_mut(&top).expect("top cell");
    *m = m.add(&shift)?;
    Ok(out)
}

/// Multiplication by `c` as a chain map `source → target` on equal-sized complexes.
pub fn scalar_map(source: &ChainComplex, target: &ChainComplex, c: &TruncatedSeries) -> Result<ChainMap> {
    let m = SeriesMatrix::scalar(source.len(), c);
    ChainMap::new(source.clone(), target.clone(), 0, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_complex::Grading;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(p: u32, n: usize) -> ChainComplex {
        ChainComplex::new(vec![Generator::new("a", 0)], SeriesMatrix::zeros(1, 1, p, n), Grading::Z2).unwrap()
    }

    #[test]
    fn edge_equation_is_the_chain_map_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = gen::random_complex(&mut rng, 3, 6, 3);
        let d = gen::random_complex(&mut rng, 3, 6, 3);
        let f = gen::random_chain_map(&mut rng, &c, &d).unwrap();
        let data = FunctorData::new(vec![c.complex.clone(), d.complex.clone()], BTreeMap::from([(vec![0, 1], f.matrix.clone())])).unwrap();
        assert!(verify_functor(&data).unwrap().all_vanish());
        let bad = gen::random_map(&mut rng, &c.complex, &d.complex, 0, 1.0);
        let data = FunctorData::new(vec![c.complex, d.complex], BTreeMap::from([(vec![0, 1], bad.matrix.clone())])).unwrap();
        assert_eq!(verify_functor(&data).unwrap().all_vanish(), bad.is_chain_map());
    }

    #[test]
    fn strict_composition_verifies() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cs: Vec<_> = (0..3).map(|_| gen::random_complex(&mut rng, 5, 6, 3)).collect();
        let f = gen::random_chain_map(&mut rng, &cs[0], &cs[1]).unwrap();
        let g = gen::random_chain_map(&mut rng, &cs[1], &cs[2]).unwrap();
        let h = g.compose(&f).unwrap();
        let k = SeriesMatrix::zeros(cs[2].complex.len(), cs[0].complex.len(), 5, 6);
        let t = RandomTriangle { f, g, h, k };
        assert!(verify_functor(&t.functor_data().unwrap()).unwrap().all_vanish());
    }

    #[test]
    fn two_simplex_equation_matches_the_homotopy_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for p in [2, 3, 5] {
            let t = random_triangle(&mut rng, p, 6, 3).unwrap();
            assert!(verify_functor(&t.functor_data().unwrap()).unwrap().all_vanish());
            let mut broken = t.functor_data().unwrap();
            let k = broken.maps.get_mut(&vec![0, 1, 2]).unwrap();
            let extra = gen::random_map(&mut rng, &t.f.source, &t.g.target, 1, 1.0).matrix;
            let changed = extra.mul(t.f.source.differential()).unwrap().add(&t.g.target.differential().mul(&extra).unwrap()).unwrap();
            *k = k.add(&extra).unwrap();
            assert_eq!(verify_functor(&broken).unwrap().all_vanish(), changed.is_zero());
        }
    }

    #[test]
    fn witness_over_small_primes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in [2, 3, 5] {
            for _ in 0..10 {
                let t = random_triangle(&mut rng, p, 8, 3).unwrap();
                let w = composition_witness(&t.f, &t.g, &t.h, &t.k).unwrap();
                assert!(w.p.is_chain_map() && w.i.is_chain_map());
                if p == 2 {
                    assert!(composition_witness_with(&t.f, &t.g, &t.h, &t.k, &WitnessSigns::unsigned()).is_ok());
                }
            }
        }
    }

    #[test]
    fn flipped_signs_fail_loudly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = loop {
            let t = random_triangle(&mut rng, 3, 6, 3).unwrap();
            if !t.h.matrix.is_zero() && !t.f.source.differential().is_zero() && !t.g.target.differential().is_zero() {
                break t;
            }
        };
        for field in WitnessSigns::FIELDS {
            let signs = WitnessSigns::koszul().flipped(field).unwrap();
            let ids = witness_identities(&t.f, &t.g, &t.h, &t.k, &signs).unwrap();
            assert!(ids.iter().any(|(_, ok)| !ok), "{field}");
            let err = composition_witness_with(&t.f, &t.g, &t.h, &t.k, &signs).unwrap_err();
            assert!(matches!(err, Error::ContractViolation(ref m) if m.contains("witness identity")), "{field}");
        }
    }

    #[test]
    fn failed_hypothesis_is_named() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        loop {
            let t = random_triangle(&mut rng, 3, 6, 3).unwrap();
            let bump = gen::random_map(&mut rng, &t.f.source, &t.g.target, 1, 1.0).matrix;
            let k = t.k.add(&bump).unwrap();
            let moved = bump.mul(t.f.source.differential()).unwrap().add(&t.g.target.differential().mul(&bump).unwrap()).unwrap();
            if moved.is_zero() {
                continue;
            }
            let err = composition_witness(&t.f, &t.g, &t.h, &k).unwrap_err();
            assert_eq!(err, Error::ContractViolation("h - gf = kd + dk fails".into()));
            break;
        }
    }

    #[test]
    fn multiplication_by_x_composes() {
        let (p, n) = (2, 12);
        let c = single(p, n);
        let x = TruncatedSeries::monomial(1, 1, p, n);
        let x2 = TruncatedSeries::monomial(1, 2, p, n);
        let f = scalar_map(&c, &c, &x).unwrap();
        let h = scalar_map(&c, &c, &x2).unwrap();
        let k = SeriesMatrix::zeros(1, 1, p, n);
        let v = torsion_propagation(&f, &f, &h, &k).unwrap();
        assert_eq!(v.bounds, [Some(1), Some(1), Some(2)]);
        assert!(v.holds());
        let id = ChainMap::identity(&c);
        let v = torsion_propagation(&id, &id, &id, &k).unwrap();
        assert_eq!(v.bounds, [Some(0), Some(0), Some(0)]);
    }

    #[test]
    fn random_torsion_triangles_propagate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let (a, b) = (rng.random_range(0..=3), rng.random_range(0..=3));
            let t = random_torsion_triangle(&mut rng, 2, 16, 3, a, b).unwrap();
            let v = torsion_propagation(&t.f, &t.g, &t.h, &t.k).unwrap();
            assert!(v.hypothesis && v.holds(), "{v:?}");
            assert!(v.bounds[2].unwrap() <= v.bounds[0].unwrap() + v.bounds[1].unwrap());
        }
    }

    #[test]
    fn three_simplices_faces_and_degeneracies() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for p in [2, 3, 5] {
            for _ in 0..3 {
                let data = random_three_simplex(&mut rng, p, 6, 2).unwrap();
                let report = verify_functor(&data).unwrap();
                assert!(report.all_vanish(), "{:?}", report.failing());
                for v in 0..=3 {
                    assert!(verify_functor(&data.face(v).unwrap()).unwrap().all_vanish());
                }
                let perturbed = perturb_top(&mut rng, &data).unwrap();
                assert!(verify_functor(&perturbed).unwrap().all_vanish());
                for i in 0..=3 {
                    let four = data.degenerate(i).unwrap();
                    let r = verify_functor(&four).unwrap();
                    assert!(r.all_vanish(), "repeat {i}: {:?}", r.failing());
                    assert!(verify_functor(&perturb_top(&mut rng, &four).unwrap()).unwrap().all_vanish());
                }
            }
        }
    }

    #[test]
    fn corrupted_cells_are_caught() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = random_three_simplex(&mut rng, 3, 6, 2).unwrap();
        let mut bad = data.clone();
        let m = bad.maps.get_mut(&vec![0, 1, 3]).unwrap();
        let one = TruncatedSeries::one(3, 6);
        let (r, c) = (0..m.rows()).flat_map(|r| (0..m.cols()).map(move |c| (r, c)))
            .find(|&(r, c)| check_map_shape(&data.complexes[0], &data.complexes[3], 1, &{
                let mut t = SeriesMatrix::zeros(m.rows(), m.cols(), 3, 6);
                t[(r, c)] = one.clone();
                t
            }).is_ok())
            .expect("some odd entry");
        m[(r, c)] = &m[(r, c)] + &one;
        let report = verify_functor(&bad).unwrap();
        assert!(!report.all_vanish());
        assert!(report.failing().contains(&[0, 1, 2, 3].as_slice()) || report.failing().contains(&[0, 1, 3].as_slice()));
    }

    #[test]
    fn identity_edge_has_acyclic_cone() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let c = gen::random_complex(&mut rng, 3, 6, 3).complex;
        let data = FunctorData::new(vec![c.clone()], BTreeMap::new()).unwrap().degenerate(0).unwrap();
        let cone = cone_of_edge(&data, (0, 1)).unwrap();
        assert!(homology(&cone).is_zero());
        let t = random_triangle(&mut rng, 3, 6, 3).unwrap();
        let cone = cone_of_edge(&t.functor_data().unwrap(), (0, 2)).unwrap();
        assert_eq!(cone, mapping_cone(&t.h).unwrap());
    }

    #[test]
    fn shape_errors_are_structural() {
        let c = single(3, 4);
        let wrong = SeriesMatrix::zeros(2, 1, 3, 4);
        let err = FunctorData::new(vec![c.clone(), c.clone()], BTreeMap::from([(vec![0, 1], wrong)])).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
        assert!(matches!(FunctorData::new(vec![c.clone(), c], BTreeMap::new()), Err(Error::Structural(_))));
    }

    #[test]
    fn subsimplex_counts() {
        assert_eq!(subsimplices(2).len(), 4);
        assert_eq!(subsimplices(4).len(), 26);
    }
}
