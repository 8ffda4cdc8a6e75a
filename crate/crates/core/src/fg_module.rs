//! Finitely generated modules over `R = F_p[[x]]/(x^N)` presented by matrices.
//!
//! A presentation matrix `m` (rows = generators, columns = relations) describes
//! the cokernel `R^rows / im(m)`. [`smith_decompose`] brings `m` to a diagonal
//! of x-powers by invertible row and column operations; the resulting
//! [`FinModule`] lists the free rank and the torsion exponents.
//!
//! Answers follow `k[[x]]` semantics wherever the truncated data allows it: a
//! relation column that vanishes is treated as absent rather than as a
//! relation `x^N = 0`.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::coeff_ring::{check_prime, TruncatedSeries, Valuation};
use crate::error::{Error, Result};

/// Dense row-major matrix of series over a common ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeriesMatrix {
    p: u32,
    precision: usize,
    rows: usize,
    cols: usize,
    entries: Vec<TruncatedSeries>,
}

impl SeriesMatrix {
    pub fn zeros(rows: usize, cols: usize, p: u32, precision: usize) -> Self {
        Self {
            p,
            precision,
            rows,
            cols,
            entries: vec![TruncatedSeries::zero(p, precision); rows * cols],
        }
    }

    pub fn identity(n: usize, p: u32, precision: usize) -> Self {
        let mut m = Self::zeros(n, n, p, precision);
        for i in 0..n {
            m[(i, i)] = TruncatedSeries::one(p, precision);
        }
        m
    }

    /// `c * I`.
    pub fn scalar(n: usize, c: &TruncatedSeries) -> Self {
        let mut m = Self::zeros(n, n, c.modulus(), c.precision());
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: Vec<TruncatedSeries>,
        p: u32,
        precision: usize,
    ) -> Result<Self> {
        check_prime(p)?;
        if entries.len() != rows * cols {
            return Err(Error::Structural(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| e.modulus() != p || e.precision() != precision) {
            return Err(Error::Structural(format!(
                "entry over F_{}[[x]]/(x^{}) in a matrix over F_{p}[[x]]/(x^{precision})",
                bad.modulus(),
                bad.precision()
            )));
        }
        Ok(Self { p, precision, rows, cols, entries })
    }

    /// Builds a matrix from a grid of integer coefficient lists.
    pub fn from_coeff_grid(grid: &[Vec<Vec<i64>>], p: u32, precision: usize) -> Result<Self> {
        let rows = grid.len();
        let cols = grid.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(rows * cols);
        for (i, row) in grid.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Structural(format!("row {i} has {} entries, expected {cols}", row.len())));
            }
            for c in row {
                entries.push(TruncatedSeries::from_coeffs(c, p, precision)?);
            }
        }
        Self::from_entries(rows, cols, entries, p, precision)
    }

    /// Block matrix; every block in a block row shares a row count, every block in a block column a column count.
    pub fn block(blocks: &[Vec<&SeriesMatrix>]) -> Result<Self> {
        let first = blocks
            .first()
            .and_then(|r| r.first())
            .ok_or_else(|| Error::Structural("empty block layout".into()))?;
        let (p, precision) = (first.p, first.precision);
        let heights: Vec<usize> = blocks.iter().map(|r| r[0].rows).collect();
        let widths: Vec<usize> = blocks[0].iter().map(|b| b.cols).collect();
        let mut out = Self::zeros(heights.iter().sum(), widths.iter().sum(), p, precision);
        let mut r0 = 0;
        for (bi, row) in blocks.iter().enumerate() {
            if row.len() != widths.len() {
                return Err(Error::Structural("ragged block layout".into()));
            }
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                if b.rows != heights[bi] || b.cols != widths[bj] || b.p != p || b.precision != precision {
                    return Err(Error::Structural(format!("block ({bi},{bj}) does not fit the layout")));
                }
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                    }
                }
                c0 += widths[bj];
            }
            r0 += heights[bi];
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn entries(&self) -> &[TruncatedSeries] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(TruncatedSeries::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j { e.is_one() } else { e.is_zero() }
                })
            })
    }

    pub fn column(&self, j: usize) -> Vec<TruncatedSeries> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn from_columns(cols: &[Vec<TruncatedSeries>], rows: usize, p: u32, precision: usize) -> Self {
        let mut m = Self::zeros(rows, cols.len(), p, precision);
        for (j, c) in cols.iter().enumerate() {
            for (i, e) in c.iter().enumerate() {
                m[(i, j)] = e.clone();
            }
        }
        m
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len(), self.p, self.precision);
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows, self.p, self.precision);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.precision != other.precision {
            return Err(Error::Structural(format!(
                "matrices over F_{}[[x]]/(x^{}) and F_{}[[x]]/(x^{})",
                self.p, self.precision, other.p, other.precision
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        if self.cols != other.rows {
            return Err(Error::Structural(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols, self.p, self.precision);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                let neg_a = -a;
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out.entries[i * other.cols + j].sub_mul_assign(&neg_a, b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(&TruncatedSeries, &TruncatedSeries) -> TruncatedSeries,
    ) -> Result<Self> {
        self.same_ring(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Structural(format!(
                "shapes {}x{} and {}x{} differ",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| f(a, b)).collect();
        Ok(Self { entries, ..self.clone_shape() })
    }

    fn clone_shape(&self) -> Self {
        Self { p: self.p, precision: self.precision, rows: self.rows, cols: self.cols, entries: Vec::new() }
    }

    pub fn neg(&self) -> Self {
        Self { entries: self.entries.iter().map(|e| -e).collect(), ..self.clone_shape() }
    }

    pub fn scale(&self, c: &TruncatedSeries) -> Self {
        Self { entries: self.entries.iter().map(|e| e * c).collect(), ..self.clone_shape() }
    }

    pub fn mul_vec(&self, v: &[TruncatedSeries]) -> Result<Vec<TruncatedSeries>> {
        if v.len() != self.cols {
            return Err(Error::Structural(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        let mut out = vec![TruncatedSeries::zero(self.p, self.precision); self.rows];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, x) in v.iter().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() && !x.is_zero() {
                    o.sub_mul_assign(&-a, x);
                }
            }
        }
        Ok(out)
    }

    /// Reduction to coarser precision.
    pub fn truncate(&self, precision: usize) -> Self {
        Self {
            precision,
            entries: self.entries.iter().map(|e| e.truncate(precision)).collect(),
            ..self.clone_shape()
        }
    }

    /// Constant coefficients, as a matrix over `F_p`.
    pub fn constant_part(&self) -> Vec<Vec<u32>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].constant_term()).collect())
            .collect()
    }

    /// Inverse of a square matrix that is invertible over the ring.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Structural("inverse of a non-square matrix".into()));
        }
        let s = smith_decompose(self);
        if s.rank != self.rows || s.diagonal.iter().any(|&e| e != 0) {
            return Err(Error::Domain("matrix is not invertible over the ring".into()));
        }
        s.v.mul(&s.u)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.entries.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.entries.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    fn scale_row(&mut self, r: usize, c: &TruncatedSeries) {
        for j in 0..self.cols {
            let e = &self.entries[r * self.cols + j] * c;
            self.entries[r * self.cols + j] = e;
        }
    }

    fn scale_col(&mut self, k: usize, c: &TruncatedSeries) {
        for i in 0..self.rows {
            let e = &self.entries[i * self.cols + k] * c;
            self.entries[i * self.cols + k] = e;
        }
    }

    /// `row[dst] -= q * row[src]`.
    fn row_axpy(&mut self, dst: usize, q: &TruncatedSeries, src: usize) {
        for j in 0..self.cols {
            let s = self.entries[src * self.cols + j].clone();
            if !s.is_zero() {
                self.entries[dst * self.cols + j].sub_mul_assign(q, &s);
            }
        }
    }

    /// `col[dst] -= q * col[src]`.
    fn col_axpy(&mut self, dst: usize, q: &TruncatedSeries, src: usize) {
        for i in 0..self.rows {
            let s = self.entries[i * self.cols + src].clone();
            if !s.is_zero() {
                self.entries[i * self.cols + dst].sub_mul_assign(q, &s);
            }
        }
    }
}

impl Index<(usize, usize)> for SeriesMatrix {
    type Output = TruncatedSeries;
    fn index(&self, (i, j): (usize, usize)) -> &TruncatedSeries {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for SeriesMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut TruncatedSeries {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        &mut self.entries[i * self.cols + j]
    }
}

/// Free rank plus torsion exponents: `R^free ⊕ ⊕_e k[[x]]/(x^e)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct FinModule {
    pub free_rank: usize,
    /// Ascending, each in `1..N`.
    pub torsion: Vec<usize>,
    /// Some free summand may be torsion of exponent `>= N`.
    pub precision_limited: bool,
}

impl FinModule {
    pub fn free(rank: usize) -> Self {
        Self { free_rank: rank, ..Self::default() }
    }

    pub fn new(free_rank: usize, mut torsion: Vec<usize>) -> Self {
        torsion.sort_unstable();
        Self { free_rank, torsion, precision_limited: false }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Same invariants, ignoring the precision flag.
    pub fn same_invariants(&self, other: &Self) -> bool {
        self.free_rank == other.free_rank && self.torsion == other.torsion
    }

    /// Number of cyclic summands, which is `dim_k (M / xM)`.
    pub fn num_generators(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    /// `dim_k (M ⊗ k[x]/(x^l))`.
    pub fn dim_mod_x_power(&self, l: usize) -> usize {
        self.free_rank * l + self.torsion.iter().map(|&e| e.min(l)).sum::<usize>()
    }
}

impl fmt::Display for FinModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 { "k[[x]]".to_string() } else { format!("k[[x]]^{}", self.free_rank) });
        }
        for e in &self.torsion {
            parts.push(format!("k[[x]]/(x^{e})"));
        }
        if parts.is_empty() {
            parts.push("0".into());
        }
        write!(f, "{}", parts.join(" + "))?;
        if self.precision_limited {
            write!(f, " (precision limited)")?;
        }
        Ok(())
    }
}

/// `u · m · v = diag(x^{e_0}, …, x^{e_{rank-1}}, 0, …)`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub module: FinModule,
    pub u: SeriesMatrix,
    pub u_inv: SeriesMatrix,
    pub v: SeriesMatrix,
    /// Pivot exponents, non-decreasing.
    pub diagonal: Vec<usize>,
    pub rank: usize,
}

impl Smith {
    pub fn diagonal_matrix(&self) -> SeriesMatrix {
        let (p, n) = (self.u.p, self.u.precision);
        let mut d = SeriesMatrix::zeros(self.u.rows, self.v.rows, p, n);
        for (i, &e) in self.diagonal.iter().enumerate() {
            d[(i, i)] = TruncatedSeries::monomial(1, e, p, n);
        }
        d
    }

    /// Re-multiplication check of `u · m · v = D`.
    pub fn verify(&self, m: &SeriesMatrix) -> bool {
        let Ok(um) = self.u.mul(m) else { return false };
        let Ok(umv) = um.mul(&self.v) else { return false };
        umv == self.diagonal_matrix()
            && self.u.mul(&self.u_inv).is_ok_and(|e| e.is_identity())
    }

    /// Columns of `v` spanning the kernel of `m` over `k[[x]]`.
    pub fn kernel_basis(&self) -> Vec<Vec<TruncatedSeries>> {
        (self.rank..self.v.cols).map(|j| self.v.column(j)).collect()
    }
}

/// Smith form over the truncated ring, pivoting on minimal valuation with row-major tie-breaks.
pub fn smith_decompose(m: &SeriesMatrix) -> Smith {
    let (p, n) = (m.p, m.precision);
    let mut a = m.clone();
    let mut u = SeriesMatrix::identity(m.rows, p, n);
    let mut u_inv = u.clone();
    let mut v = SeriesMatrix::identity(m.cols, p, n);
    let mut diagonal = Vec::new();

    for t in 0..m.rows.min(m.cols) {
        let mut best: Option<(usize, usize, usize)> = None;
        for i in t..m.rows {
            for j in t..m.cols {
                if let Valuation::Finite(val) = a[(i, j)].valuation() {
                    if best.is_none_or(|(b, _, _)| val < b) {
                        best = Some((val, i, j));
                    }
                }
            }
        }
        let Some((e, pi, pj)) = best else { break };

        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        u_inv.swap_cols(t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);

        let unit = a[(t, t)].shift_down(e);
        let unit_inv = unit.inverse().expect("pivot quotient is a unit");
        a.scale_row(t, &unit_inv);
        u.scale_row(t, &unit_inv);
        u_inv.scale_col(t, &unit);

        for i in t + 1..m.rows {
            if a[(i, t)].is_zero() {
                continue;
            }
            let q = a[(i, t)].shift_down(e);
            a.row_axpy(i, &q, t);
            u.row_axpy(i, &q, t);
            u_inv.col_axpy(t, &-&q, i);
        }
        for j in t + 1..m.cols {
            if a[(t, j)].is_zero() {
                continue;
            }
            let q = a[(t, j)].shift_down(e);
            a.col_axpy(j, &q, t);
            v.col_axpy(j, &q, t);
        }
        diagonal.push(e);
    }

    let rank = diagonal.len();
    let free_rank = m.rows - rank;
    let module = FinModule {
        free_rank,
        torsion: diagonal.iter().copied().filter(|&e| e >= 1).collect(),
        precision_limited: free_rank > 0 && m.cols > rank,
    };
    Smith { module, u, u_inv, v, diagonal, rank }
}

/// Outcome of [`in_image`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImageDecision {
    Yes { witness: Vec<TruncatedSeries> },
    /// Solvability already fails modulo `x^{level+1}`.
    No { level: usize },
}

impl ImageDecision {
    pub fn is_yes(&self) -> bool {
        matches!(self, ImageDecision::Yes { .. })
    }
}

/// Decides whether `target` is in the column span of `map`.
pub fn in_image(target: &[TruncatedSeries], map: &SeriesMatrix) -> Result<ImageDecision> {
    let s = smith_decompose(map);
    in_image_with(target, map, &s)
}

/// As [`in_image`], reusing a decomposition of `map`.
pub fn in_image_with(target: &[TruncatedSeries], map: &SeriesMatrix, s: &Smith) -> Result<ImageDecision> {
    if target.len() != map.rows {
        return Err(Error::Structural(format!("target of length {} for {} rows", target.len(), map.rows)));
    }
    if let Some(t) = target.iter().find(|t| t.modulus() != map.p || t.precision() != map.precision) {
        return Err(Error::Structural(format!(
            "target entry over F_{}[[x]]/(x^{}) for a matrix over F_{}[[x]]/(x^{})",
            t.modulus(),
            t.precision(),
            map.p,
            map.precision
        )));
    }
    let w = s.u.mul_vec(target)?;
    let mut obstruction: Option<usize> = None;
    let mut z = vec![TruncatedSeries::zero(map.p, map.precision); map.cols];
    for (i, wi) in w.iter().enumerate() {
        let needed = s.diagonal.get(i).copied();
        match (wi.valuation(), needed) {
            (Valuation::Infinite, _) => {}
            (Valuation::Finite(val), Some(e)) if val >= e => z[i] = wi.shift_down(e),
            (Valuation::Finite(val), _) => {
                obstruction = Some(obstruction.map_or(val, |o| o.min(val)));
            }
        }
    }
    if let Some(level) = obstruction {
        return Ok(ImageDecision::No { level });
    }
    let witness = s.v.mul_vec(&z)?;
    debug_assert_eq!(map.mul_vec(&witness)?, target);
    Ok(ImageDecision::Yes { witness })
}

/// A quotient `ambient / im(relations)` with coordinates adapted to its Smith form.
#[derive(Clone, Debug)]
pub struct ModuleBasis {
    pub module: FinModule,
    smith: Smith,
}

/// Coordinates of an element of a [`ModuleBasis`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCoords {
    /// `(exponent, coordinate mod x^exponent)` per torsion summand.
    pub torsion: Vec<(usize, TruncatedSeries)>,
    pub free: Vec<TruncatedSeries>,
}

impl ClassCoords {
    pub fn is_zero(&self) -> bool {
        self.torsion.iter().all(|(_, c)| c.is_zero()) && self.free.iter().all(TruncatedSeries::is_zero)
    }
}

/// Result of [`x_divisibility`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divisibility {
    /// Largest `d` with the free component in `x^d · free`; `None` when the free part is zero.
    pub free_part: Option<usize>,
    pub precision_limited: bool,
    pub torsion_component: bool,
}

impl ModuleBasis {
    pub fn from_presentation(relations: &SeriesMatrix) -> Self {
        let smith = smith_decompose(relations);
        Self { module: smith.module.clone(), smith }
    }

    /// The standard presentation `R^free ⊕ ⊕ R/(x^e)` whose generators come free-first.
    pub fn standard(module: &FinModule, p: u32, precision: usize) -> Self {
        let t = module.torsion.len();
        let mut rel = SeriesMatrix::zeros(module.free_rank + t, t, p, precision);
        for (k, &e) in module.torsion.iter().enumerate() {
            rel[(module.free_rank + k, k)] = TruncatedSeries::monomial(1, e, p, precision);
        }
        let mut b = Self::from_presentation(&rel);
        b.module.precision_limited = module.precision_limited;
        b
    }

    pub fn ambient_rank(&self) -> usize {
        self.smith.u.rows
    }

    pub fn smith(&self) -> &Smith {
        &self.smith
    }

    pub fn coordinates(&self, elem: &[TruncatedSeries]) -> Result<ClassCoords> {
        if elem.len() != self.ambient_rank() {
            return Err(Error::Structural(format!(
                "element of length {} in a module on {} generators",
                elem.len(),
                self.ambient_rank()
            )));
        }
        let w = self.smith.u.mul_vec(elem)?;
        let mut torsion = Vec::new();
        for (i, &e) in self.smith.diagonal.iter().enumerate() {
            if e >= 1 {
                let c = w[i].reduce_mod_x_power(e);
                torsion.push((e, c));
            }
        }
        let free = w[self.smith.rank..].to_vec();
        Ok(ClassCoords { torsion, free })
    }

    /// Ambient vector representing `x^0`-multiples of the free generators, for building classes.
    pub fn free_generator(&self, j: usize) -> Vec<TruncatedSeries> {
        self.smith.u_inv.column(self.smith.rank + j)
    }

    pub fn torsion_generator(&self, k: usize) -> Vec<TruncatedSeries> {
        let idx = self
            .smith
            .diagonal
            .iter()
            .enumerate()
            .filter(|(_, &e)| e >= 1)
            .nth(k)
            .map(|(i, _)| i)
            .expect("torsion index in range");
        self.smith.u_inv.column(idx)
    }
}

/// x-adic divisibility of `elem` inside the free part of `basis`.
pub fn x_divisibility(elem: &[TruncatedSeries], basis: &ModuleBasis) -> Result<Divisibility> {
    let coords = basis.coordinates(elem)?;
    Ok(divisibility_of(&coords, &basis.module))
}

pub(crate) fn divisibility_of(coords: &ClassCoords, module: &FinModule) -> Divisibility {
    let torsion_component = coords.torsion.iter().any(|(_, c)| !c.is_zero());
    if module.free_rank == 0 {
        return Divisibility { free_part: None, precision_limited: false, torsion_component };
    }
    let n = coords.free.first().map_or(0, TruncatedSeries::precision);
    let d = coords.free.iter().filter_map(|c| c.valuation().finite()).min();
    match d {
        Some(d) => Divisibility { free_part: Some(d), precision_limited: module.precision_limited, torsion_component },
        None => Divisibility { free_part: Some(n), precision_limited: true, torsion_component },
    }
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

    fn diag(exps: &[usize], p: u32, n: usize) -> SeriesMatrix {
        let mut m = SeriesMatrix::zeros(exps.len(), exps.len(), p, n);
        for (i, &e) in exps.iter().enumerate() {
            m[(i, i)] = mono(e, p, n);
        }
        m
    }

    #[test]
    fn diagonal_presentation() {
        let m = diag(&[0, 1, 2], 3, 16);
        let s = smith_decompose(&m);
        assert_eq!(s.module, FinModule::new(0, vec![1, 2]));
        assert!(s.verify(&m));
    }

    #[test]
    fn zero_and_empty_matrices() {
        let s = smith_decompose(&SeriesMatrix::zeros(2, 3, 2, 16));
        assert_eq!(s.module.free_rank, 2);
        assert!(s.module.torsion.is_empty());
        assert!(s.module.precision_limited);
        assert_eq!(smith_decompose(&SeriesMatrix::zeros(4, 0, 2, 16)).module, FinModule::free(4));
    }

    #[test]
    fn unused_relations_flag_precision() {
        // The second relation reduces to zero; it may hide an exponent of at least 16.
        let mut m = SeriesMatrix::zeros(3, 2, 2, 16);
        m[(0, 0)] = mono(15, 2, 16);
        m[(0, 1)] = mono(15, 2, 16);
        let s = smith_decompose(&m);
        assert_eq!(s.module.free_rank, 2);
        assert_eq!(s.module.torsion, vec![15]);
        assert!(s.module.precision_limited);
    }

    #[test]
    fn random_5x7_against_minors() {
        // Matrix with a prescribed Smith form hidden by random unimodular changes of basis.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = gen::matrix_with_smith_form(&mut rng, 5, 7, &[0, 1, 1, 3], 3, 16);
        let s = smith_decompose(&m);
        assert!(s.verify(&m));
        assert_eq!(oracle::smith_exponents_from_minors(&m), vec![0, 1, 1, 3]);
        assert_eq!(s.diagonal, vec![0, 1, 1, 3]);
        assert!(s.module.same_invariants(&FinModule::new(1, vec![1, 1, 3])));
    }

    #[test]
    fn image_membership_examples() {
        let m = diag(&[2], 3, 16);
        let zero = vec![TruncatedSeries::zero(3, 16)];
        assert_eq!(in_image(&zero, &m).unwrap(), ImageDecision::Yes { witness: zero.clone() });
        assert_eq!(in_image(&[mono(1, 3, 16)], &m).unwrap(), ImageDecision::No { level: 1 });
        assert!(in_image(&[mono(3, 3, 16)], &m).unwrap().is_yes());
    }

    #[test]
    fn divisibility_examples() {
        let b = ModuleBasis::standard(&FinModule::free(1), 3, 16);
        let d = x_divisibility(&[mono(0, 3, 16)], &b).unwrap();
        assert_eq!(d.free_part, Some(0));
        let d = x_divisibility(&[mono(3, 3, 16)], &b).unwrap();
        assert_eq!(d.free_part, Some(3));
        assert!(!d.torsion_component);

        let t = ModuleBasis::standard(&FinModule::new(0, vec![2]), 3, 16);
        let d = x_divisibility(&[mono(0, 3, 16)], &t).unwrap();
        assert_eq!(d.free_part, None);
        assert!(d.torsion_component);
        let d = x_divisibility(&[mono(2, 3, 16)], &t).unwrap();
        assert!(!d.torsion_component);
    }

    #[test]
    fn divisibility_of_zero_free_coordinate() {
        let b = ModuleBasis::standard(&FinModule::free(1), 2, 8);
        let d = x_divisibility(&[TruncatedSeries::zero(2, 8)], &b).unwrap();
        assert_eq!(d.free_part, Some(8));
        assert!(d.precision_limited);
    }

    #[test]
    fn exhaustive_image_over_f2_precision4() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let rows = rand::Rng::random_range(&mut rng, 1..=3usize);
            let cols = rand::Rng::random_range(&mut rng, 1..=2usize);
            let m = gen::random_matrix(&mut rng, rows, cols, 2, 4, 0.5);
            let span = oracle::exhaustive_span(&m);
            for t in oracle::all_vectors(2, 4, rows) {
                let d = in_image(&t, &m).unwrap();
                assert_eq!(d.is_yes(), span.contains(&oracle::vector_key(&t)));
            }
        }
    }

    proptest! {
        #[test]
        fn invariants_stable_under_unimodular_changes(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = gen::random_matrix(&mut rng, 4, 5, 3, 8, 0.6);
            let p = gen::random_unimodular(&mut rng, 4, 3, 8);
            let q = gen::random_unimodular(&mut rng, 5, 3, 8);
            let m2 = p.mul(&m).unwrap().mul(&q).unwrap();
            let a = smith_decompose(&m);
            let b = smith_decompose(&m2);
            prop_assert!(a.verify(&m));
            prop_assert!(b.verify(&m2));
            prop_assert_eq!(a.diagonal, b.diagonal);
        }

        #[test]
        fn construct_then_solve(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = gen::random_matrix(&mut rng, 4, 3, 5, 10, 0.7);
            let v = gen::random_vector(&mut rng, 3, 5, 10);
            let t = m.mul_vec(&v).unwrap();
            match in_image(&t, &m).unwrap() {
                ImageDecision::Yes { witness } => prop_assert_eq!(m.mul_vec(&witness).unwrap(), t),
                ImageDecision::No { .. } => prop_assert!(false, "constructed target rejected"),
            }
        }

        #[test]
        fn minors_agree_with_pivots(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = gen::random_matrix(&mut rng, 3, 4, 2, 6, 0.5);
            let s = smith_decompose(&m);
            let seen = oracle::smith_exponents_from_minors(&m);
            prop_assert_eq!(&s.diagonal[..seen.len()], &seen[..]);
            if seen.len() < s.rank {
                let total: usize = s.diagonal[..=seen.len()].iter().sum();
                prop_assert!(total >= 6);
            }
        }
    }
}
