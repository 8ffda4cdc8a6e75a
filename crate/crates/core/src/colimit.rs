//! Finite chains of continuation maps: colimits, the unit, `μ` extraction and
//! the lower-triangular vanishing chase.
//!
//! For a chain `C_1 → … → C_m` the colimit is `H(C_m)` with the composite maps.
//! A two-block complex orders its generators as `(Q, S)` with differential
//! `[[d_Q, 0], [h, d_S]]`, so `S` is a subcomplex and `Q` the quotient.

use rand::Rng;
use serde::Serialize;

use crate::chain_complex::{degree_homology, homology, mapping_cone, ChainComplex, ChainMap, GradedFinModule};
use crate::coeff_ring::{series_add, series_mul, series_sub, TruncatedSeries};
use crate::error::{Error, Result};
use crate::fg_module::{in_image, smith_decompose, ImageDecision, SeriesMatrix};
use crate::gen::{self, RandomComplex};
use crate::par::*;

#[derive(Clone, Debug)]
pub struct SlopeDiagram {
    slopes: Vec<f64>,
    complexes: Vec<ChainComplex>,
    maps: Vec<ChainMap>,
    unit: Option<Vec<TruncatedSeries>>,
}

impl SlopeDiagram {
    pub fn new(
        slopes: Vec<f64>,
        complexes: Vec<ChainComplex>,
        maps: Vec<ChainMap>,
        unit: Option<Vec<TruncatedSeries>>,
    ) -> Result<Self> {
        if complexes.is_empty() {
            return Err(Error::Structural("a diagram needs at least one complex".into()));
        }
        if slopes.len() != complexes.len() || maps.len() + 1 != complexes.len() {
            return Err(Error::Structural(format!(
                "{} slopes, {} complexes and {} maps do not form a chain",
                slopes.len(),
                complexes.len(),
                maps.len()
            )));
        }
        if slopes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Structural("slopes must increase strictly".into()));
        }
        for (i, f) in maps.iter().enumerate() {
            if f.source != complexes[i] || f.target != complexes[i + 1] {
                return Err(Error::Structural(format!("map {i} does not join complexes {i} and {}", i + 1)));
            }
            if !f.is_chain_map() {
                return Err(Error::ContractViolation(format!("map {i} is not a degree-0 chain map")));
            }
        }
        if let Some(u) = &unit {
            let c = &complexes[0];
            if u.len() != c.len() {
                return Err(Error::Structural(format!("unit has {} entries for {} generators", u.len(), c.len())));
            }
            if !c.apply_d(u)?.iter().all(TruncatedSeries::is_zero) {
                return Err(Error::ContractViolation("unit is not a cycle".into()));
            }
            unit_degree(c, u)?;
        }
        Ok(Self { slopes, complexes, maps, unit })
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn complexes(&self) -> &[ChainComplex] {
        &self.complexes
    }

    pub fn maps(&self) -> &[ChainMap] {
        &self.maps
    }

    pub fn unit(&self) -> Option<&[TruncatedSeries]> {
        self.unit.as_deref()
    }

    pub fn len(&self) -> usize {
        self.complexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complexes.is_empty()
    }

    /// The composite `C_i → C_k` for `i ≤ k`.
    pub fn composite(&self, i: usize, k: usize) -> Result<ChainMap> {
        if i > k || k >= self.len() {
            return Err(Error::Structural(format!("no composite from {i} to {k}")));
        }
        let mut f = ChainMap::identity(&self.complexes[i]);
        for g in &self.maps[i..k] {
            f = g.compose(&f)?;
        }
        Ok(f)
    }

    /// The same diagram with an identity map inserted after position `i`, at a slope between its neighbours.
    pub fn refine_with_identity(&self, i: usize) -> Result<Self> {
        if i >= self.len() {
            return Err(Error::Structural(format!("no complex at {i}")));
        }
        let next = self.slopes.get(i + 1).copied().unwrap_or(self.slopes[i] + 2.0);
        let mut slopes = self.slopes.clone();
        slopes.insert(i + 1, (self.slopes[i] + next) / 2.0);
        let mut complexes = self.complexes.clone();
        complexes.insert(i + 1, self.complexes[i].clone());
        let mut maps = self.maps.clone();
        maps.insert(i, ChainMap::identity(&self.complexes[i]));
        Self::new(slopes, complexes, maps, self.unit.clone())
    }
}

fn unit_degree(c: &ChainComplex, u: &[TruncatedSeries]) -> Result<u8> {
    let degs: Vec<u8> = (0..c.len()).filter(|&i| !u[i].is_zero()).map(|i| c.generators()[i].degree).collect();
    match degs.first() {
        None => Ok(0),
        Some(&d) if degs.iter().all(|&e| e == d) => Ok(d),
        _ => Err(Error::Structural("unit is not homogeneous".into())),
    }
}

fn embed(c: &ChainComplex, j: u8, local: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
    let mut v = vec![TruncatedSeries::zero(c.modulus(), c.precision()); c.len()];
    for (&i, x) in c.indices_in_degree(j).iter().zip(local) {
        v[i] = x.clone();
    }
    v
}

/// Cycle generators of `c`, as full-length vectors.
pub fn cycle_generators(c: &ChainComplex) -> Vec<Vec<TruncatedSeries>> {
    c.degrees()
        .iter()
        .flat_map(|&j| {
            let h = degree_homology(c, j);
            h.cycles.iter().map(|z| embed(c, j, z)).collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageSummary {
    pub index: usize,
    /// Free rank of the image of `H(C_i)` in the colimit, per degree.
    pub free_rank: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColimitReport {
    pub homologies: Vec<GradedFinModule>,
    pub colimit: GradedFinModule,
    pub images: Vec<ImageSummary>,
}

/// Free coordinates in `H_j(C_m)` of the images of the cycles of `C_i`.
fn image_lattice(d: &SlopeDiagram, i: usize, j: u8) -> Result<SeriesMatrix> {
    let m = d.len() - 1;
    let target = &d.complexes[m];
    let hm = degree_homology(target, j);
    let f = d.composite(i, m)?;
    let c = &d.complexes[i];
    let cycles = degree_homology(c, j).cycles;
    let free_len = hm.boundaries.ambient_rank() - hm.boundaries.smith().rank;
    let mut cols = Vec::with_capacity(cycles.len());
    for z in &cycles {
        let img = f.matrix.mul_vec(&embed(c, j, z))?;
        cols.push(hm.boundaries.coordinates(&hm.local(&img))?.free);
    }
    Ok(SeriesMatrix::from_columns(&cols, free_len, target.modulus(), target.precision()))
}

/// `H(C_m)` with the images of every `H(C_i)`.
pub fn colimit_module(d: &SlopeDiagram) -> Result<ColimitReport> {
    let homologies: Vec<GradedFinModule> = d.complexes.par_iter().map(homology).collect();
    let colimit = homologies.last().expect("nonempty").clone();
    let degrees = d.complexes[0].degrees();
    let images = (0..d.len())
        .into_par_iter()
        .map(|i| {
            let free_rank = degrees
                .iter()
                .map(|&j| image_lattice(d, i, j).map(|l| smith_decompose(&l).rank))
                .collect::<Result<Vec<_>>>()?;
            Ok(ImageSummary { index: i, free_rank })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ColimitReport { homologies, colimit, images })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum DiagramMu {
    Finite(i64),
    /// Not even `x^{N−1}·1` lies in the image within the working precision.
    NegInfinite,
    /// The unit has no free component in the colimit.
    Degenerate,
}

/// `sup{d : x^{−d}·1 ∈ im(H(C_i) → colim)}`, read in the free part of the colimit.
pub fn mu_from_diagram(d: &SlopeDiagram, at: usize) -> Result<DiagramMu> {
    let unit = d.unit.as_ref().ok_or_else(|| Error::Domain("diagram has no unit".into()))?;
    if at >= d.len() {
        return Err(Error::Domain(format!("index {at} is outside a diagram of length {}", d.len())));
    }
    let m = d.len() - 1;
    let j = unit_degree(&d.complexes[0], unit)?;
    let target = &d.complexes[m];
    let (p, n) = (target.modulus(), target.precision());
    let hm = degree_homology(target, j);
    let u_full = d.composite(0, m)?.matrix.mul_vec(unit)?;
    let coords = hm.boundaries.coordinates(&hm.local(&u_full))?;
    if hm.module.free_rank == 0 {
        return Ok(DiagramMu::Degenerate);
    }
    // Cycle bases are exact only below x^{N−e}, e the largest pivot of an outgoing differential.
    let slack = d
        .complexes
        .iter()
        .filter_map(|c| degree_homology(c, j).out_pivots().iter().copied().filter(|&e| e < n).max())
        .max()
        .unwrap_or(0);
    let n = n.saturating_sub(slack).max(1);
    let free: Vec<TruncatedSeries> = coords.free.iter().map(|c| c.truncate(n)).collect();
    let Some(v) = free.iter().filter_map(|c| c.valuation().finite()).min() else {
        return Ok(DiagramMu::Degenerate);
    };
    let lattice = image_lattice(d, at, j)?.truncate(n);
    let mut dd = v as i64;
    while dd > -(n as i64) {
        let decision = if dd >= 0 {
            let xd = TruncatedSeries::monomial(1, dd as usize, p, n);
            in_image(&free, &lattice.scale(&xd))?
        } else {
            let xd = TruncatedSeries::monomial(1, (-dd) as usize, p, n);
            let target: Vec<TruncatedSeries> = free.iter().map(|c| series_mul(c, &xd)).collect::<Result<_>>()?;
            if target.iter().all(TruncatedSeries::is_zero) {
                break;
            }
            in_image(&target, &lattice)?
        };
        if decision.is_yes() {
            return Ok(DiagramMu::Finite(dd));
        }
        dd -= 1;
    }
    Ok(DiagramMu::NegInfinite)
}

/// `mu_from_diagram` at every index.
pub fn mu_profile(d: &SlopeDiagram) -> Result<Vec<DiagramMu>> {
    (0..d.len()).into_par_iter().map(|i| mu_from_diagram(d, i)).collect()
}

/// A diagram whose complexes split as `(Q, S)` with block lower-triangular differentials and maps.
#[derive(Clone, Debug)]
pub struct TwoBlockDiagram {
    pub diagram: SlopeDiagram,
    /// Size of the quotient block `Q` in each complex.
    pub quotient_sizes: Vec<usize>,
}

impl TwoBlockDiagram {
    pub fn new(diagram: SlopeDiagram, quotient_sizes: Vec<usize>) -> Result<Self> {
        if quotient_sizes.len() != diagram.len() {
            return Err(Error::Structural("one block size per complex is required".into()));
        }
        for (i, c) in diagram.complexes.iter().enumerate() {
            let q = quotient_sizes[i];
            if q > c.len() {
                return Err(Error::Structural(format!("block size {q} exceeds complex {i}")));
            }
            if !upper_right_zero(c.differential(), q, q) {
                return Err(Error::Structural(format!("differential of complex {i} maps S into Q")));
            }
        }
        for (i, f) in diagram.maps.iter().enumerate() {
            if !upper_right_zero(&f.matrix, quotient_sizes[i + 1], quotient_sizes[i]) {
                return Err(Error::Structural(format!("map {i} does not respect the blocks")));
            }
        }
        Ok(Self { diagram, quotient_sizes })
    }

    fn q_range(&self, i: usize) -> Vec<usize> {
        (0..self.quotient_sizes[i]).collect()
    }

    fn s_range(&self, i: usize) -> Vec<usize> {
        (self.quotient_sizes[i]..self.diagram.complexes[i].len()).collect()
    }
}

fn upper_right_zero(m: &SeriesMatrix, q_rows: usize, q_cols: usize) -> bool {
    (0..q_rows).all(|r| (q_cols..m.cols()).all(|c| m[(r, c)].is_zero()))
}

fn pick(v: &[TruncatedSeries], idx: &[usize]) -> Vec<TruncatedSeries> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

fn place(len: usize, idx: &[usize], v: &[TruncatedSeries], p: u32, n: usize) -> Vec<TruncatedSeries> {
    let mut out = vec![TruncatedSeries::zero(p, n); len];
    for (&i, x) in idx.iter().zip(v) {
        out[i] = x.clone();
    }
    out
}

fn boundary_witness(d: &SeriesMatrix, v: &[TruncatedSeries]) -> Result<Option<Vec<TruncatedSeries>>> {
    if v.iter().all(TruncatedSeries::is_zero) {
        return Ok(Some(vec![TruncatedSeries::zero(d.modulus(), d.precision()); d.cols()]));
    }
    Ok(match in_image(v, d)? {
        ImageDecision::Yes { witness } => Some(witness),
        ImageDecision::No { .. } => None,
    })
}

/// The chase for one cycle `z ∈ C_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChaseStep {
    pub index: usize,
    pub cycle: usize,
    /// Where the quotient class dies.
    pub quotient_dies_at: Option<usize>,
    /// Where the resulting subcomplex class dies.
    pub sub_dies_at: Option<usize>,
    /// `d W = f_{ik}(z)` was verified for the assembled witness `W`.
    pub witness_verified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexVerdict {
    pub index: usize,
    /// Smallest `j` with `H(Q_i) → H(Q_j)` zero.
    pub quotient_dies_at: Option<usize>,
    /// Some `j` kills `H(Q_i)` and `H(S_j) → H(S_m)` is zero, `m` the last index.
    pub diagonal_dies: bool,
    /// Index by which the chase kills all of `H(C_i)`.
    pub chase_bound: Option<usize>,
    /// Smallest `k` with `H(C_i) → H(C_k)` zero, found directly.
    pub brute_force: Option<usize>,
    pub steps: Vec<ChaseStep>,
}

impl IndexVerdict {
    pub fn consistent(&self) -> bool {
        let chase_ok = match (self.chase_bound, self.brute_force) {
            (Some(c), Some(b)) => b <= c,
            (Some(_), None) => false,
            (None, _) => true,
        };
        chase_ok && (!self.diagonal_dies || self.chase_bound.is_some())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VanishingVerdict {
    pub per_index: Vec<IndexVerdict>,
    /// Indices at which the diagonal classes die within the diagram.
    pub hypothesis: Vec<usize>,
    /// Every class of `H(C_i)` dies by the last complex, for each `i` in `hypothesis`.
    pub conclusion: bool,
    pub matches_brute_force: bool,
}

impl VanishingVerdict {
    pub fn holds(&self) -> bool {
        self.matches_brute_force && self.conclusion
    }
}

/// `H` of the chosen block of `C_i` maps to zero in the same block of `C_k`.
fn block_zero(t: &TwoBlockDiagram, i: usize, k: usize, quotient: bool) -> Result<bool> {
    let d = &t.diagram;
    let (src, dst) = if quotient { (t.q_range(i), t.q_range(k)) } else { (t.s_range(i), t.s_range(k)) };
    let block = d.complexes[i].restrict(&src)?;
    let target = d.complexes[k].differential().submatrix(&dst, &dst);
    let f = d.composite(i, k)?.matrix.submatrix(&dst, &src);
    for z in cycle_generators(&block) {
        if boundary_witness(&target, &f.mul_vec(&z)?)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn chase(t: &TwoBlockDiagram, i: usize, ci: usize, z: &[TruncatedSeries]) -> Result<ChaseStep> {
    let d = &t.diagram;
    let m = d.len() - 1;
    let (p, n) = (d.complexes[i].modulus(), d.complexes[i].precision());
    let mut step = ChaseStep { index: i, cycle: ci, quotient_dies_at: None, sub_dies_at: None, witness_verified: false };
    for j in i..=m {
        let cj = &d.complexes[j];
        let qj = t.q_range(j);
        let gz = d.composite(i, j)?.matrix.mul_vec(z)?;
        let dq = cj.differential().submatrix(&qj, &qj);
        let Some(wq) = boundary_witness(&dq, &pick(&gz, &qj))? else { continue };
        step.quotient_dies_at = Some(j);
        let wq_full = place(cj.len(), &qj, &wq, p, n);
        let dwq = cj.apply_d(&wq_full)?;
        let y: Vec<TruncatedSeries> = gz.iter().zip(&dwq).map(|(a, b)| series_sub(a, b)).collect::<Result<_>>()?;
        debug_assert!(pick(&y, &qj).iter().all(TruncatedSeries::is_zero));
        for k in j..=m {
            let ck = &d.complexes[k];
            let sk = t.s_range(k);
            let h = d.composite(j, k)?;
            let hy = h.matrix.mul_vec(&y)?;
            let ds = ck.differential().submatrix(&sk, &sk);
            let Some(ws) = boundary_witness(&ds, &pick(&hy, &sk))? else { continue };
            step.sub_dies_at = Some(k);
            let hw = h.matrix.mul_vec(&wq_full)?;
            let ws_full = place(ck.len(), &sk, &ws, p, n);
            let w: Vec<TruncatedSeries> = hw.iter().zip(&ws_full).map(|(a, b)| series_add(a, b)).collect::<Result<_>>()?;
            let lhs = ck.apply_d(&w)?;
            let rhs = d.composite(i, k)?.matrix.mul_vec(z)?;
            step.witness_verified = lhs == rhs;
            return Ok(step);
        }
        return Ok(step);
    }
    Ok(step)
}

fn brute_force_kill(d: &SlopeDiagram, i: usize, cycles: &[Vec<TruncatedSeries>]) -> Result<Option<usize>> {
    for k in i..d.len() {
        let f = d.composite(i, k)?;
        let dk = d.complexes[k].differential();
        let mut all = true;
        for z in cycles {
            if boundary_witness(dk, &f.matrix.mul_vec(z)?)?.is_none() {
                all = false;
                break;
            }
        }
        if all {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

/// Runs the zig-zag chase at every non-final index and compares it with the direct computation.
pub fn lower_triangular_vanishing(t: &TwoBlockDiagram) -> Result<VanishingVerdict> {
    let d = &t.diagram;
    let last = d.len() - 1;
    let per_index: Vec<IndexVerdict> = (0..last)
        .into_par_iter()
        .map(|i| {
            let cycles = cycle_generators(&d.complexes[i]);
            let mut quotient_dies_at = None;
            for j in i..=last {
                if block_zero(t, i, j, true)? {
                    quotient_dies_at = Some(j);
                    break;
                }
            }
            let mut diagonal_dies = false;
            if let Some(j0) = quotient_dies_at {
                for j in j0..=last {
                    if block_zero(t, j, last, false)? {
                        diagonal_dies = true;
                        break;
                    }
                }
            }
            let steps = cycles.iter().enumerate().map(|(ci, z)| chase(t, i, ci, z)).collect::<Result<Vec<_>>>()?;
            let chase_bound = steps
                .iter()
                .map(|s| if s.witness_verified { s.sub_dies_at } else { None })
                .try_fold(i, |acc, k| k.map(|k| acc.max(k)));
            let brute_force = brute_force_kill(d, i, &cycles)?;
            Ok(IndexVerdict { index: i, quotient_dies_at, diagonal_dies, chase_bound, brute_force, steps })
        })
        .collect::<Result<_>>()?;
    let hypothesis: Vec<usize> = per_index.iter().filter(|v| v.diagonal_dies).map(|v| v.index).collect();
    let conclusion = hypothesis.iter().all(|&i| per_index[i].brute_force.is_some());
    let matches_brute_force = per_index.iter().all(IndexVerdict::consistent);
    Ok(VanishingVerdict { per_index, hypothesis, conclusion, matches_brute_force })
}

/// Reorders a cone on `B ⊕ A[1]` to `(A[1], B)`, making it two-block lower triangular.
fn cone_as_two_block(f: &ChainMap) -> Result<(ChainComplex, usize, SeriesMatrix)> {
    let cone = mapping_cone(f)?;
    let (nb, na) = (f.target.len(), f.source.len());
    let order: Vec<usize> = (nb..nb + na).chain(0..nb).collect();
    let c = cone.restrict(&order)?;
    let perm = SeriesMatrix::identity(na + nb, cone.modulus(), cone.precision()).submatrix(&order, &(0..na + nb).collect::<Vec<_>>());
    Ok((c, na, perm))
}

fn null_homotopic<R: Rng>(rng: &mut R, c: &ChainComplex, d: &ChainComplex) -> Result<(SeriesMatrix, SeriesMatrix)> {
    let h = gen::random_map(rng, c, d, 1, 0.4).matrix;
    let n = d.differential().mul(&h)?.add(&h.mul(c.differential())?)?;
    Ok((n, h))
}

fn small_complex<R: Rng>(rng: &mut R, p: u32, precision: usize) -> RandomComplex {
    let size = rng.random_range(1..=3);
    gen::random_complex(rng, p, precision, size)
}

/// Steps of a generated two-block chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockStep {
    /// `a = id`, `b` a random chain map, strict square.
    Push,
    /// Both diagonal blocks null-homotopic, joined by the induced off-diagonal homotopy.
    Kill,
    /// `f = 0`, `a = b = id`: block diagonal, nothing dies.
    Keep,
}

/// A random two-block chain of cones with the given steps.
pub fn random_two_block<R: Rng>(rng: &mut R, p: u32, precision: usize, steps: &[BlockStep], block_diagonal: bool) -> Result<TwoBlockDiagram> {
    let a = small_complex(rng, p, precision);
    let mut b: RandomComplex = small_complex(rng, p, precision);
    let mut f = if block_diagonal {
        ChainMap::zero(&a.complex, &b.complex, 0)
    } else {
        gen::random_chain_map(rng, &a, &b)?
    };
    let (mut c, q, mut perm) = cone_as_two_block(&f)?;
    let mut complexes = vec![c.clone()];
    let mut sizes = vec![q];
    let mut maps = Vec::new();
    for &step in steps {
        let (na, nb_old) = (a.complex.len(), b.complex.len());
        let (amap, bmap, k, f_next, b_next) = match step {
            BlockStep::Keep => (
                SeriesMatrix::identity(na, p, precision),
                SeriesMatrix::identity(nb_old, p, precision),
                SeriesMatrix::zeros(nb_old, na, p, precision),
                f.clone(),
                b.clone(),
            ),
            BlockStep::Push => {
                let b_next = small_complex(rng, p, precision);
                let bm = gen::random_chain_map(rng, &b, &b_next)?;
                let f_next = if block_diagonal { ChainMap::zero(&a.complex, &b_next.complex, 0) } else { bm.compose(&f)? };
                let nb = b_next.complex.len();
                (SeriesMatrix::identity(na, p, precision), bm.matrix, SeriesMatrix::zeros(nb, na, p, precision), f_next, b_next)
            }
            BlockStep::Kill => {
                let b_next = small_complex(rng, p, precision);
                let (am, ha) = null_homotopic(rng, &a.complex, &a.complex)?;
                let (bm, hb) = null_homotopic(rng, &b.complex, &b_next.complex)?;
                let f_next = if block_diagonal {
                    ChainMap::zero(&a.complex, &b_next.complex, 0)
                } else {
                    gen::random_chain_map(rng, &a, &b_next)?
                };
                // b f − f' a = d k + k d with k = h_B f − f' h_A.
                let k = hb.mul(&f.matrix)?.sub(&f_next.matrix.mul(&ha)?)?;
                (am, bm, k, f_next, b_next)
            }
        };
        let (c_next, q_next, perm_next) = cone_as_two_block(&f_next)?;
        let nb = b_next.complex.len();
        // Cone map on (B, A[1]) is [[b, k], [0, a]]; conjugate into the (A[1], B) order.
        let zero = SeriesMatrix::zeros(na, nb_old, p, precision);
        let cone_map = SeriesMatrix::block(&[vec![&bmap, &k], vec![&zero, &amap]])?;
        debug_assert_eq!(cone_map.rows(), nb + na);
        let m = perm_next.mul(&cone_map)?.mul(&perm.transpose())?;
        maps.push(ChainMap::new(c.clone(), c_next.clone(), 0, m)?);
        complexes.push(c_next.clone());
        sizes.push(q_next);
        c = c_next;
        perm = perm_next;
        f = f_next;
        b = b_next;
    }
    let slopes = (0..complexes.len()).map(|i| i as f64).collect();
    TwoBlockDiagram::new(SlopeDiagram::new(slopes, complexes, maps, None)?, sizes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_complex::{is_x_torsion, Generator, Grading};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(p: u32, n: usize) -> ChainComplex {
        ChainComplex::new(vec![Generator::new("g", 0)], SeriesMatrix::zeros(1, 1, p, n), Grading::Z2).unwrap()
    }

    fn one(p: u32, n: usize) -> Vec<TruncatedSeries> {
        vec![TruncatedSeries::one(p, n)]
    }

    #[test]
    fn single_complex() {
        let c = line(3, 8);
        let d = SlopeDiagram::new(vec![0.0], vec![c.clone()], vec![], Some(one(3, 8))).unwrap();
        let r = colimit_module(&d).unwrap();
        assert_eq!(r.colimit, homology(&c));
        assert_eq!(mu_from_diagram(&d, 0).unwrap(), DiagramMu::Finite(0));
    }

    #[test]
    fn identity_diagrams() {
        let c = line(3, 8);
        let id = ChainMap::identity(&c);
        let d = SlopeDiagram::new(vec![0.0, 1.0, 2.0], vec![c.clone(), c.clone(), c], vec![id.clone(), id], Some(one(3, 8))).unwrap();
        assert_eq!(mu_profile(&d).unwrap(), vec![DiagramMu::Finite(0); 3]);
        assert!(colimit_module(&d).unwrap().images.iter().all(|s| s.free_rank == vec![1, 0]));
    }

    #[test]
    fn multiplication_by_x_shifts_mu() {
        let c = line(2, 8);
        let x = ChainMap::new(c.clone(), c.clone(), 0, SeriesMatrix::scalar(1, &TruncatedSeries::monomial(1, 1, 2, 8))).unwrap();
        let d = SlopeDiagram::new(vec![0.0, 1.0], vec![c.clone(), c], vec![x], Some(one(2, 8))).unwrap();
        let (m0, m1) = (mu_from_diagram(&d, 0).unwrap(), mu_from_diagram(&d, 1).unwrap());
        assert_eq!((m0, m1), (DiagramMu::Finite(0), DiagramMu::Finite(1)));
        let refined = d.refine_with_identity(0).unwrap();
        assert_eq!(mu_profile(&refined).unwrap(), vec![m0, m0, m1]);
    }

    #[test]
    fn torsion_unit_is_degenerate() {
        let mut dm = SeriesMatrix::zeros(2, 2, 3, 8);
        dm[(0, 1)] = TruncatedSeries::monomial(1, 2, 3, 8);
        let c = ChainComplex::new(vec![Generator::new("a", 0), Generator::new("b", 1)], dm, Grading::Z2).unwrap();
        let u = vec![TruncatedSeries::one(3, 8), TruncatedSeries::zero(3, 8)];
        let d = SlopeDiagram::new(vec![0.0], vec![c], vec![], Some(u)).unwrap();
        assert_eq!(mu_from_diagram(&d, 0).unwrap(), DiagramMu::Degenerate);
        let d = SlopeDiagram::new(vec![0.0], vec![line(3, 8)], vec![], None).unwrap();
        assert!(matches!(mu_from_diagram(&d, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_bad_diagrams() {
        let c = line(3, 8);
        let id = ChainMap::identity(&c);
        assert!(SlopeDiagram::new(vec![1.0, 0.0], vec![c.clone(), c.clone()], vec![id.clone()], None).is_err());
        assert!(SlopeDiagram::new(vec![0.0, 1.0], vec![c.clone(), c.clone()], vec![], None).is_err());
    }

    #[test]
    fn torsion_cones_keep_free_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let c = gen::random_complex(&mut rng, 3, 8, 4);
            let (t, f) = gen::torsion_cone_map(&mut rng, &c, 2).unwrap();
            assert!(is_x_torsion(&homology(&mapping_cone(&f).unwrap())).0);
            let d = SlopeDiagram::new(vec![0.0, 1.0], vec![c.complex.clone(), t.complex.clone()], vec![f], None).unwrap();
            let r = colimit_module(&d).unwrap();
            for h in &r.homologies {
                assert_eq!(h.even.free_rank, r.colimit.even.free_rank);
                assert_eq!(h.odd.free_rank, r.colimit.odd.free_rank);
            }
            assert_eq!(r.images[0].free_rank, vec![r.colimit.even.free_rank, r.colimit.odd.free_rank]);
        }
    }

    #[test]
    fn killed_diagonals_kill_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let t = random_two_block(&mut rng, 2, 6, &[BlockStep::Push, BlockStep::Kill, BlockStep::Kill], false).unwrap();
            let v = lower_triangular_vanishing(&t).unwrap();
            assert!(v.holds(), "{v:?}");
            assert!(v.hypothesis.contains(&0) && v.hypothesis.contains(&1));
            assert!(v.per_index[0].brute_force.is_some_and(|k| k <= 3));
        }
    }

    #[test]
    fn surviving_diagonal_survives() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut survivors = 0;
        for _ in 0..10 {
            let t = random_two_block(&mut rng, 3, 6, &[BlockStep::Keep, BlockStep::Push], true).unwrap();
            let v = lower_triangular_vanishing(&t).unwrap();
            assert!(v.holds());
            if v.per_index[0].quotient_dies_at.is_none() {
                survivors += 1;
                assert!(v.per_index[0].brute_force.is_none());
            }
        }
        assert!(survivors > 0);
    }

    #[test]
    fn block_violations_are_structural() {
        let mut dm = SeriesMatrix::zeros(2, 2, 2, 6);
        dm[(0, 1)] = TruncatedSeries::one(2, 6);
        let c = ChainComplex::new(vec![Generator::new("a", 0), Generator::new("b", 1)], dm, Grading::Z2).unwrap();
        let d = SlopeDiagram::new(vec![0.0], vec![c], vec![], None).unwrap();
        assert!(matches!(TwoBlockDiagram::new(d.clone(), vec![1]), Err(Error::Structural(_))));
        assert!(TwoBlockDiagram::new(d.clone(), vec![0]).is_ok());
        assert!(matches!(TwoBlockDiagram::new(d, vec![0, 0]), Err(Error::Structural(_))));
    }

    fn rank(m: DiagramMu) -> i64 {
        match m {
            DiagramMu::Finite(v) => v,
            _ => i64::MIN,
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(400))]
        #[test]
        fn mu_is_monotone_along_the_chain(seed in 0u64..10_000, p in proptest::sample::select(vec![2u32, 3, 5])) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rc: Vec<RandomComplex> = (0..3).map(|_| gen::random_complex(&mut rng, p, 8, 4)).collect();
            let maps: Vec<ChainMap> = rc.windows(2).map(|w| gen::random_chain_map(&mut rng, &w[0], &w[1]).unwrap()).collect();
            let complexes: Vec<ChainComplex> = rc.iter().map(|r| r.complex.clone()).collect();
            let unit = cycle_generators(&complexes[0]).into_iter().next();
            let d = SlopeDiagram::new(vec![0.0, 0.5, 1.0], complexes, maps, unit).unwrap();
            let mus = mu_profile(&d).unwrap();
            let degenerate = mus.iter().filter(|m| **m == DiagramMu::Degenerate).count();
            proptest::prop_assert!(degenerate == 0 || degenerate == mus.len());
            proptest::prop_assert!(mus.windows(2).all(|w| rank(w[0]) <= rank(w[1])), "{:?}", mus);
            let refined = d.refine_with_identity(1).unwrap();
            let again = mu_profile(&refined).unwrap();
            proptest::prop_assert_eq!(vec![mus[0], mus[1], mus[1], mus[2]], again);
        }
    }
}
