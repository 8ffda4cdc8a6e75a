//! Z/2-graded chain complexes over `F_p[[x]]/(x^N)`.
//!
//! Conventions: the differential has odd degree; `c[1]` flips every degree and
//! negates the differential; the cone of `f: C -> D` lives on `D ⊕ C[1]` with
//! differential `[[d_D, f], [0, -d_C]]`. In [`Grading::Ungraded`] mode every
//! generator sits in degree 0 and the differential may connect any pair.

use serde::{Deserialize, Serialize};

use crate::coeff_ring::{TruncatedSeries, Valuation};
use crate::error::{Error, Result};
use crate::fg_module::{smith_decompose, FinModule, ModuleBasis, Smith, SeriesMatrix};
use crate::fp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Grading {
    #[default]
    Z2,
    Ungraded,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    pub degree: u8,
}

impl Generator {
    pub fn new(label: impl Into<String>, degree: u8) -> Self {
        Self { label: label.into(), degree: degree % 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    grading: Grading,
    generators: Vec<Generator>,
    d: SeriesMatrix,
}

impl ChainComplex {
    pub fn new(generators: Vec<Generator>, d: SeriesMatrix, grading: Grading) -> Result<Self> {
        let n = generators.len();
        if d.rows() != n || d.cols() != n {
            return Err(Error::Structural(format!(
                "differential is {}x{} on {n} generators",
                d.rows(),
                d.cols()
            )));
        }
        match grading {
            Grading::Z2 => {
                for i in 0..n {
                    for j in 0..n {
                        if !d[(i, j)].is_zero() && generators[i].degree != (generators[j].degree + 1) % 2 {
                            return Err(Error::Structural(format!(
                                "differential entry ({}, {}) joins generators of equal degree",
                                generators[i].label, generators[j].label
                            )));
                        }
                    }
                }
            }
            Grading::Ungraded => {
                if let Some(g) = generators.iter().find(|g| g.degree != 0) {
                    return Err(Error::Structural(format!("generator {} has nonzero degree in ungraded mode", g.label)));
                }
            }
        }
        if !d.mul(&d)?.is_zero() {
            return Err(Error::Structural("differential does not square to zero".into()));
        }
        Ok(Self { grading, generators, d })
    }

    pub fn zero(p: u32, precision: usize, grading: Grading) -> Self {
        Self { grading, generators: Vec::new(), d: SeriesMatrix::zeros(0, 0, p, precision) }
    }

    pub fn grading(&self) -> Grading {
        self.grading
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn differential(&self) -> &SeriesMatrix {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn modulus(&self) -> u32 {
        self.d.modulus()
    }

    pub fn precision(&self) -> usize {
        self.d.precision()
    }

    /// Degrees present: `[0, 1]`, or `[0]` when ungraded.
    pub fn degrees(&self) -> &'static [u8] {
        match self.grading {
            Grading::Z2 => &[0, 1],
            Grading::Ungraded => &[0],
        }
    }

    pub fn next_degree(&self, j: u8) -> u8 {
        match self.grading {
            Grading::Z2 => (j + 1) % 2,
            Grading::Ungraded => 0,
        }
    }

    pub fn indices_in_degree(&self, j: u8) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.generators[i].degree == j).collect()
    }

    /// The part of `d` mapping degree `from` into degree `to`.
    pub fn d_block(&self, from: u8, to: u8) -> SeriesMatrix {
        self.d.submatrix(&self.indices_in_degree(to), &self.indices_in_degree(from))
    }

    pub fn shift(&self) -> Self {
        let generators = match self.grading {
            Grading::Z2 => self
                .generators
                .iter()
                .map(|g| Generator::new(format!("{}[1]", g.label), g.degree + 1))
                .collect(),
            Grading::Ungraded => self.generators.clone(),
        };
        Self { grading: self.grading, generators, d: self.d.neg() }
    }

    pub fn tensor_k(&self) -> Self {
        Self { grading: self.grading, generators: self.generators.clone(), d: self.d.truncate(1) }
    }

    /// Reduction to `R/(x^l)`.
    pub fn truncate(&self, l: usize) -> Self {
        Self { grading: self.grading, generators: self.generators.clone(), d: self.d.truncate(l) }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.grading != other.grading {
            return Err(Error::Structural("direct sum of complexes with different gradings".into()));
        }
        let z12 = SeriesMatrix::zeros(self.len(), other.len(), self.modulus(), self.precision());
        let z21 = SeriesMatrix::zeros(other.len(), self.len(), self.modulus(), self.precision());
        let d = SeriesMatrix::block(&[vec![&self.d, &z12], vec![&z21, &other.d]])?;
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        Ok(Self { grading: self.grading, generators, d })
    }

    /// The complex on a subset of generators with the induced block of `d`.
    /// Only meaningful for subcomplexes and quotients; callers check that.
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        let generators = idx.iter().map(|&i| self.generators[i].clone()).collect();
        Self::new(generators, self.d.submatrix(idx, idx), self.grading)
    }

    /// The same complex with the differential conjugated by a degree-preserving invertible matrix.
    pub fn conjugate(&self, p: &SeriesMatrix) -> Result<Self> {
        let p_inv = p.inverse()?;
        let d = p.mul(&self.d)?.mul(&p_inv)?;
        Self::new(self.generators.clone(), d, self.grading)
    }

    pub fn apply_d(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        self.d.mul_vec(v)
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.generators.iter().position(|g| g.label == label)
    }
}

/// Matrix of a map between complexes, with a Z/2 degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    pub source: ChainComplex,
    pub target: ChainComplex,
    pub degree: u8,
    pub matrix: SeriesMatrix,
}

impl ChainMap {
    pub fn new(source: ChainComplex, target: ChainComplex, degree: u8, matrix: SeriesMatrix) -> Result<Self> {
        check_map_shape(&source, &target, degree, &matrix)?;
        Ok(Self { source, target, degree: degree % 2, matrix })
    }

    pub fn identity(c: &ChainComplex) -> Self {
        Self {
            source: c.clone(),
            target: c.clone(),
            degree: 0,
            matrix: SeriesMatrix::identity(c.len(), c.modulus(), c.precision()),
        }
    }

    pub fn zero(source: &ChainComplex, target: &ChainComplex, degree: u8) -> Self {
        Self {
            source: source.clone(),
            target: target.clone(),
            degree: degree % 2,
            matrix: SeriesMatrix::zeros(target.len(), source.len(), source.modulus(), source.precision()),
        }
    }

    /// `d_target ∘ f - f ∘ d_source`.
    pub fn commutator(&self) -> Result<SeriesMatrix> {
        self.target.d.mul(&self.matrix)?.sub(&self.matrix.mul(&self.source.d)?)
    }

    pub fn is_chain_map(&self) -> bool {
        self.degree == 0 && self.commutator().is_ok_and(|c| c.is_zero())
    }

    pub fn compose(&self, first: &ChainMap) -> Result<ChainMap> {
        if first.target != self.source {
            return Err(Error::Structural("composed maps do not share a complex".into()));
        }
        Ok(ChainMap {
            source: first.source.clone(),
            target: self.target.clone(),
            degree: (self.degree + first.degree) % 2,
            matrix: self.matrix.mul(&first.matrix)?,
        })
    }
}

pub(crate) fn check_map_shape(source: &ChainComplex, target: &ChainComplex, degree: u8, m: &SeriesMatrix) -> Result<()> {
    if m.rows() != target.len() || m.cols() != source.len() {
        return Err(Error::Structural(format!(
            "map matrix is {}x{}, expected {}x{}",
            m.rows(),
            m.cols(),
            target.len(),
            source.len()
        )));
    }
    if m.modulus() != source.modulus() || m.precision() != source.precision()
        || target.modulus() != source.modulus() || target.precision() != source.precision()
    {
        return Err(Error::Structural("map and complexes live over different rings".into()));
    }
    if source.grading == Grading::Z2 && target.grading == Grading::Z2 {
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if !m[(i, j)].is_zero() && target.generators[i].degree != (source.generators[j].degree + degree) % 2 {
                    return Err(Error::Structural(format!(
                        "map entry ({}, {}) does not have degree {degree}",
                        target.generators[i].label, source.generators[j].label
                    )));
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GradedFinModule {
    pub even: FinModule,
    pub odd: FinModule,
}

impl GradedFinModule {
    pub fn degree(&self, j: u8) -> &FinModule {
        if j.is_multiple_of(2) { &self.even } else { &self.odd }
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    pub fn swap(&self) -> Self {
        Self { even: self.odd.clone(), odd: self.even.clone() }
    }

    pub fn same_invariants(&self, other: &Self) -> bool {
        self.even.same_invariants(&other.even) && self.odd.same_invariants(&other.odd)
    }
}

/// Homology in one degree together with the bases needed to work with classes.
#[derive(Clone, Debug)]
pub struct DegreeHomology {
    pub degree: u8,
    /// Generators of the complex in this degree, in order.
    pub indices: Vec<usize>,
    pub module: FinModule,
    /// `C_j / im(d_in)` with Smith-adapted coordinates.
    pub boundaries: ModuleBasis,
    /// Decomposition of `d_out: C_j -> C_{j+1}`.
    pub out: Smith,
    /// Cycle generators in local coordinates.
    pub cycles: Vec<Vec<TruncatedSeries>>,
}

impl DegreeHomology {
    pub fn in_pivots(&self) -> &[usize] {
        &self.boundaries.smith().diagonal
    }

    pub fn out_pivots(&self) -> &[usize] {
        &self.out.diagonal
    }

    /// Restricts a full-length vector to this degree.
    pub fn local(&self, v: &[TruncatedSeries]) -> Vec<TruncatedSeries> {
        self.indices.iter().map(|&i| v[i].clone()).collect()
    }

    /// `dim_k H_j(C ⊗ R/(x^l))`, read off the pivots of both differentials touching this degree.
    pub fn dim_mod_x_power(&self, l: usize) -> usize {
        let lost: usize = self
            .in_pivots()
            .iter()
            .chain(self.out_pivots())
            .filter(|&&e| e < l)
            .map(|&e| l - e)
            .sum();
        (l * self.indices.len()).saturating_sub(lost)
    }
}

pub fn degree_homology(c: &ChainComplex, j: u8) -> DegreeHomology {
    let indices = c.indices_in_degree(j);
    let d_in = c.d_block(c.next_degree(j), j);
    let d_out = c.d_block(j, c.next_degree(j));
    let boundaries = ModuleBasis::from_presentation(&d_in);
    let out = smith_decompose(&d_out);
    let r_in = boundaries.smith().rank;
    let n = indices.len();
    let free = n as isize - r_in as isize - out.rank as isize;
    let cycles = out.kernel_basis();
    let module = FinModule {
        free_rank: free.max(0) as usize,
        torsion: boundaries.module.torsion.clone(),
        precision_limited: free < 0,
    };
    DegreeHomology { degree: j, indices, module, boundaries, out, cycles }
}

pub fn homology(c: &ChainComplex) -> GradedFinModule {
    let even = degree_homology(c, 0).module;
    let odd = match c.grading {
        Grading::Z2 => degree_homology(c, 1).module,
        Grading::Ungraded => FinModule::default(),
    };
    GradedFinModule { even, odd }
}

pub fn mapping_cone(f: &ChainMap) -> Result<ChainComplex> {
    if f.degree != 0 {
        return Err(Error::ContractViolation("cone of a map of odd degree".into()));
    }
    if !f.commutator()?.is_zero() {
        return Err(Error::ContractViolation("map is not a chain map".into()));
    }
    let shifted = f.source.shift();
    let zero = SeriesMatrix::zeros(f.source.len(), f.target.len(), f.target.modulus(), f.target.precision());
    let d = SeriesMatrix::block(&[vec![&f.target.d, &f.matrix], vec![&zero, &shifted.d]])?;
    let mut generators = f.target.generators.clone();
    generators.extend(shifted.generators);
    ChainComplex::new(generators, d, f.target.grading)
}

/// `(true, max exponent)` when both free ranks vanish.
pub fn is_x_torsion(h: &GradedFinModule) -> (bool, Option<usize>) {
    if h.even.free_rank > 0 || h.odd.free_rank > 0 {
        return (false, None);
    }
    let bound = h.even.torsion.iter().chain(&h.odd.torsion).copied().max().unwrap_or(0);
    (true, Some(bound))
}

pub fn tensor_k(c: &ChainComplex) -> ChainComplex {
    c.tensor_k()
}

/// Ranks around one node `H_j -x-> H_j -π-> H_j(C⊗k) -δ-> H_{j+1}` of the long exact sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LesNode {
    pub degree: u8,
    pub free_rank: usize,
    pub torsion_count: usize,
    pub dim_tensor_k: usize,
    pub rank_pi: usize,
    pub rank_delta: usize,
    /// Torsion summands of `H_{j+1}`, the rank of `ker x` there.
    pub next_torsion_count: usize,
    pub delta_pi_zero: bool,
    pub delta_in_kernel_of_x: bool,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LesReport {
    pub nodes: Vec<LesNode>,
    pub exact: bool,
}

fn constant_vec(v: &[TruncatedSeries]) -> Vec<u32> {
    v.iter().map(TruncatedSeries::constant_term).collect()
}

/// `[w] ∈ ker(x) ⊂ H_{j}` as leading torsion coefficients, or `None` if `w` is not killed by `x`.
fn kernel_of_x_coords(w: &[TruncatedSeries], h: &DegreeHomology) -> Option<Vec<u32>> {
    let coords = h.boundaries.coordinates(w).ok()?;
    let n = w.first().map_or(1, TruncatedSeries::precision);
    let free_ok = coords
        .free
        .iter()
        .all(|c| c.valuation() >= Valuation::Finite(n.saturating_sub(1)));
    if !free_ok {
        return None;
    }
    let mut out = Vec::with_capacity(coords.torsion.len());
    for (e, c) in &coords.torsion {
        if c.valuation() < Valuation::Finite(e - 1) {
            return None;
        }
        out.push(c.coeffs()[e - 1]);
    }
    Some(out)
}

/// Connecting map on a cycle of `C_j ⊗ k`, valued in `H_{j+1}`.
fn connecting(c: &ChainComplex, from: &DegreeHomology, to: &DegreeHomology, zbar: &[u32]) -> Option<Vec<u32>> {
    let (p, n) = (c.modulus(), c.precision());
    let mut z = vec![TruncatedSeries::zero(p, n); c.len()];
    for (&i, &a) in from.indices.iter().zip(zbar) {
        z[i] = TruncatedSeries::constant(a as i64, p, n);
    }
    let dz = c.apply_d(&z).ok()?;
    if dz.iter().any(|e| e.constant_term() != 0) {
        return None;
    }
    let w: Vec<TruncatedSeries> = to.indices.iter().map(|&i| dz[i].shift_down(1)).collect();
    kernel_of_x_coords(&w, to)
}

/// Checks exactness of the x-multiplication long exact sequence by comparing ranks of `π` and `δ`.
pub fn x_les_check(c: &ChainComplex) -> LesReport {
    let p = c.modulus();
    let hs: Vec<DegreeHomology> = c.degrees().iter().map(|&j| degree_homology(c, j)).collect();
    let ck = c.tensor_k();
    let mut nodes = Vec::new();
    for (a, h) in hs.iter().enumerate() {
        let j = h.degree;
        let next = &hs[if hs.len() == 1 { 0 } else { 1 - a }];
        let nj = h.indices.len();
        let dbar_in = ck.d_block(c.next_degree(j), j);
        let dbar_out = ck.d_block(j, c.next_degree(j));
        let in_rows = dbar_in.constant_part();
        let out_rows = dbar_out.constant_part();
        let r_in = fp::rank(&in_rows, p);
        let k_cycles = fp::kernel(&out_rows, nj, p);
        let dim_tensor_k = k_cycles.len() - r_in;

        let mut span = fp::columns(&in_rows, dbar_in.cols());
        let base = fp::rank_of_columns(&span, p);
        span.extend(h.cycles.iter().map(|z| constant_vec(z)));
        let rank_pi = fp::rank_of_columns(&span, p) - base;

        let mut delta_ok = true;
        let mut images = Vec::new();
        for zbar in &k_cycles {
            match connecting(c, h, next, zbar) {
                Some(v) => images.push(v),
                None => delta_ok = false,
            }
        }
        let rank_delta = if images.first().is_some_and(|v| !v.is_empty()) { fp::rank_of_columns(&images, p) } else { 0 };

        let mut delta_pi_zero = true;
        for z in &h.cycles {
            match connecting(c, h, next, &constant_vec(z)) {
                Some(v) => delta_pi_zero &= v.iter().all(|&x| x == 0),
                None => delta_pi_zero = false,
            }
        }

        let free_rank = h.module.free_rank;
        let torsion_count = h.module.torsion.len();
        let next_torsion_count = next.module.torsion.len();
        let exact = delta_ok
            && delta_pi_zero
            && rank_pi == free_rank + torsion_count
            && rank_delta == next_torsion_count
            && dim_tensor_k == rank_pi + rank_delta;
        nodes.push(LesNode {
            degree: j,
            free_rank,
            torsion_count,
            dim_tensor_k,
            rank_pi,
            rank_delta,
            next_torsion_count,
            delta_pi_zero,
            delta_in_kernel_of_x: delta_ok,
            exact,
        });
    }
    let exact = nodes.iter().all(|n| n.exact);
    LesReport { nodes, exact }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiltrationLevel {
    pub level: usize,
    pub degree: u8,
    pub total: usize,
    pub sub: usize,
    pub quotient: usize,
}

#[derive(Clone, Debug)]
pub struct FiltrationReport {
    pub sub: ChainComplex,
    pub quotient: ChainComplex,
    pub levels: Vec<FiltrationLevel>,
    pub inequality_holds: bool,
    pub equality: bool,
}

/// Splits `c` along a subcomplex spanned by `sub` and compares `dim_k H(- ⊗ R/x^l)` for every level.
pub fn two_step_filtration(c: &ChainComplex, sub: &[usize]) -> Result<FiltrationReport> {
    let mut in_sub = vec![false; c.len()];
    for &i in sub {
        if i >= c.len() {
            return Err(Error::Structural(format!("generator index {i} out of range")));
        }
        in_sub[i] = true;
    }
    for j in (0..c.len()).filter(|&j| in_sub[j]) {
        for i in (0..c.len()).filter(|&i| !in_sub[i]) {
            if !c.d[(i, j)].is_zero() {
                return Err(Error::Structural(format!(
                    "differential maps {} out of the subcomplex",
                    c.generators[j].label
                )));
            }
        }
    }
    let sub_idx: Vec<usize> = (0..c.len()).filter(|&i| in_sub[i]).collect();
    let quo_idx: Vec<usize> = (0..c.len()).filter(|&i| !in_sub[i]).collect();
    let subc = c.restrict(&sub_idx)?;
    let quoc = c.restrict(&quo_idx)?;
    let mut levels = Vec::new();
    let hs = |x: &ChainComplex| x.degrees().iter().map(|&j| degree_homology(x, j)).collect::<Vec<_>>();
    let (ht, hsub, hq) = (hs(c), hs(&subc), hs(&quoc));
    for l in 1..=c.precision() {
        for k in 0..ht.len() {
            levels.push(FiltrationLevel {
                level: l,
                degree: ht[k].degree,
                total: ht[k].dim_mod_x_power(l),
                sub: hsub[k].dim_mod_x_power(l),
                quotient: hq[k].dim_mod_x_power(l),
            });
        }
    }
    let inequality_holds = levels.iter().all(|v| v.total <= v.sub + v.quotient);
    let equality = levels.iter().all(|v| v.total == v.sub + v.quotient);
    Ok(FiltrationReport { sub: subc, quotient: quoc, levels, inequality_holds, equality })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::oracle;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mono(k: usize, p: u32, n: usize) -> TruncatedSeries {
        TruncatedSeries::monomial(1, k, p, n)
    }

    fn one_arrow(e: usize, p: u32, n: usize) -> ChainComplex {
        let mut d = SeriesMatrix::zeros(2, 2, p, n);
        d[(0, 1)] = mono(e, p, n);
        ChainComplex::new(vec![Generator::new("a", 0), Generator::new("b", 1)], d, Grading::Z2).unwrap()
    }

    fn free_line(p: u32, n: usize) -> ChainComplex {
        ChainComplex::new(vec![Generator::new("g", 0)], SeriesMatrix::zeros(1, 1, p, n), Grading::Z2).unwrap()
    }

    #[test]
    fn rejects_bad_differentials() {
        let mut d = SeriesMatrix::zeros(2, 2, 2, 4);
        d[(0, 1)] = mono(0, 2, 4);
        let gens = vec![Generator::new("a", 0), Generator::new("b", 0)];
        assert!(ChainComplex::new(gens, d.clone(), Grading::Z2).is_err());
        d[(1, 0)] = mono(0, 2, 4);
        let gens = vec![Generator::new("a", 0), Generator::new("b", 1)];
        assert!(matches!(ChainComplex::new(gens, d, Grading::Z2), Err(Error::Structural(_))));
    }

    #[test]
    fn homology_examples() {
        let c = ChainComplex::new(
            vec![Generator::new("a", 0), Generator::new("b", 0)],
            SeriesMatrix::zeros(2, 2, 3, 16),
            Grading::Z2,
        )
        .unwrap();
        let h = homology(&c);
        assert_eq!(h.even, FinModule::free(2));
        assert!(h.odd.is_zero());

        let h = homology(&one_arrow(2, 3, 16));
        assert_eq!(h.even, FinModule::new(0, vec![2]));
        assert!(h.odd.is_zero());
    }

    #[test]
    fn cones() {
        let c = free_line(3, 16);
        assert!(homology(&mapping_cone(&ChainMap::identity(&c)).unwrap()).is_zero());

        let h = homology(&mapping_cone(&ChainMap::zero(&c, &c, 0)).unwrap());
        assert_eq!(h.even, FinModule::free(1));
        assert_eq!(h.odd, FinModule::free(1));

        let x = ChainMap::new(c.clone(), c.clone(), 0, SeriesMatrix::scalar(1, &mono(1, 3, 16))).unwrap();
        let h = homology(&mapping_cone(&x).unwrap());
        assert_eq!(h.even, FinModule::new(0, vec![1]));
        assert!(h.odd.is_zero());

        let x3 = ChainMap::new(c.clone(), c, 0, SeriesMatrix::scalar(1, &mono(3, 3, 16))).unwrap();
        assert_eq!(is_x_torsion(&homology(&mapping_cone(&x3).unwrap())), (true, Some(3)));
    }

    #[test]
    fn cone_rejects_non_chain_maps() {
        let a = one_arrow(1, 3, 8);
        let mut m = SeriesMatrix::zeros(2, 2, 3, 8);
        m[(0, 0)] = mono(0, 3, 8);
        let f = ChainMap::new(a.clone(), a, 0, m).unwrap();
        assert!(matches!(mapping_cone(&f), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn torsion_verdicts() {
        let h = GradedFinModule { even: FinModule::new(0, vec![1, 2]), odd: FinModule::default() };
        assert_eq!(is_x_torsion(&h), (true, Some(2)));
        let h = GradedFinModule { even: FinModule::default(), odd: FinModule::free(1) };
        assert_eq!(is_x_torsion(&h), (false, None));
    }

    #[test]
    fn tensor_examples() {
        let k = one_arrow(1, 3, 8).tensor_k();
        assert!(k.differential().is_zero());
        let mut d = SeriesMatrix::zeros(2, 2, 3, 8);
        d[(0, 1)] = TruncatedSeries::from_coeffs(&[1, 1], 3, 8).unwrap();
        let c = ChainComplex::new(vec![Generator::new("a", 0), Generator::new("b", 1)], d, Grading::Z2).unwrap();
        assert_eq!(c.tensor_k().differential()[(0, 1)].coeffs(), &[1]);
    }

    #[test]
    fn les_on_cone_of_x_squared() {
        let c = free_line(2, 16);
        let f = ChainMap::new(c.clone(), c, 0, SeriesMatrix::scalar(1, &mono(2, 2, 16))).unwrap();
        let cone = mapping_cone(&f).unwrap();
        let r = x_les_check(&cone);
        assert!(r.exact);
        // H_0 = k[[x]]/(x^2), H_1 = 0: both of H(C⊗k) have dimension 1.
        assert_eq!(r.nodes[0].dim_tensor_k, 1);
        assert_eq!(r.nodes[1].dim_tensor_k, 1);
        assert_eq!(r.nodes[0].rank_pi, 1);
        assert_eq!(r.nodes[1].rank_delta, 1);
        assert!(x_les_check(&ChainComplex::zero(2, 16, Grading::Z2)).exact);
    }

    #[test]
    fn filtration_split_case_is_equality() {
        let c = one_arrow(2, 3, 8).direct_sum(&one_arrow(0, 3, 8)).unwrap();
        let r = two_step_filtration(&c, &[0, 1]).unwrap();
        assert!(r.equality);
        assert!(two_step_filtration(&one_arrow(1, 3, 8), &[1]).is_err());
    }

    #[test]
    fn homology_matches_truncated_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = gen::random_complex(&mut rng, 2, 4, 8).complex;
            let h = homology(&c);
            for l in 1..=4 {
                let (e, o) = oracle::homology_dims_mod_x_power(&c, l);
                assert_eq!(e, oracle::uct_dim(&h.even, &h.odd, l));
                assert_eq!(o, oracle::uct_dim(&h.odd, &h.even, l));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn shift_swaps_homology(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = gen::random_complex(&mut rng, 3, 8, 6).complex;
            prop_assert!(homology(&c.shift()).same_invariants(&homology(&c).swap()));
        }

        #[test]
        fn random_complexes_satisfy_les(seed in any::<u64>(), p in prop_oneof![Just(2u32), Just(3)]) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = gen::random_complex(&mut rng, p, 8, 6).complex;
            prop_assert!(x_les_check(&c).exact);
        }

        #[test]
        fn cone_acyclic_iff_quasi_iso(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = gen::random_complex(&mut rng, 2, 4, 4);
            let d = gen::random_complex(&mut rng, 2, 4, 4);
            let f = gen::random_chain_map(&mut rng, &c, &d).unwrap();
            let acyclic = homology(&mapping_cone(&f).unwrap()).is_zero();
            prop_assert_eq!(acyclic, oracle::induces_iso_mod_x_powers(&f));
        }

        #[test]
        fn torsion_cone_keeps_free_ranks(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = gen::random_complex(&mut rng, 3, 8, 5);
            let d = gen::random_complex(&mut rng, 3, 8, 5);
            let f = gen::random_chain_map(&mut rng, &c, &d).unwrap();
            let (torsion, _) = is_x_torsion(&homology(&mapping_cone(&f).unwrap()));
            if torsion {
                let (hc, hd) = (homology(&c.complex), homology(&d.complex));
                prop_assert_eq!(hc.even.free_rank, hd.even.free_rank);
                prop_assert_eq!(hc.odd.free_rank, hd.odd.free_rank);
            }
        }

        #[test]
        fn upper_triangular_filtration_inequality(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (c, sub) = gen::random_filtered_complex(&mut rng, 3, 6);
            prop_assert!(two_step_filtration(&c, &sub).unwrap().inequality_holds);
        }
    }
}
