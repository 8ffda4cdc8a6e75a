//! Independent reference computations used to cross-check the main algorithms.
//!
//! Nothing here calls into the Smith-form or homology code: the algebraic
//! oracles work by determinants, exhaustive enumeration, or by expanding a
//! series matrix into a matrix over `F_p` and doing Gaussian elimination.

use std::collections::HashSet;

use crate::chain_complex::{ChainComplex, ChainMap, Grading};
use crate::coeff_ring::TruncatedSeries;
use crate::fg_module::{FinModule, SeriesMatrix};
use crate::fp;

fn det(m: &[Vec<TruncatedSeries>]) -> TruncatedSeries {
    let k = m.len();
    let (p, n) = (m[0][0].modulus(), m[0][0].precision());
    let mut perm: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    let mut sign = true;
    let term = |perm: &[usize]| {
        let mut t = TruncatedSeries::one(p, n);
        for (i, &j) in perm.iter().enumerate() {
            t = &t * &m[i][j];
        }
        t
    };
    let mut acc = term(&perm);
    // Heap's algorithm: every step is a single transposition.
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 { perm.swap(0, i) } else { perm.swap(c[i], i) }
            sign = !sign;
            let t = term(&perm);
            acc = if sign { &acc + &t } else { &acc - &t };
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    acc
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Smith exponents from determinantal ideals: `e_1 + … + e_k` is the least valuation of a `k × k` minor.
/// Stops at the first `k` whose minors all vanish to the working precision.
pub fn smith_exponents_from_minors(m: &SeriesMatrix) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = 0usize;
    for k in 1..=m.rows().min(m.cols()) {
        let mut best: Option<usize> = None;
        for rows in combinations(m.rows(), k) {
            for cols in combinations(m.cols(), k) {
                let minor: Vec<Vec<TruncatedSeries>> =
                    rows.iter().map(|&i| cols.iter().map(|&j| m[(i, j)].clone()).collect()).collect();
                if let Some(v) = det(&minor).valuation().finite() {
                    best = Some(best.map_or(v, |b: usize| b.min(v)));
                }
            }
        }
        let Some(dk) = best else { break };
        out.push(dk - prev);
        prev = dk;
    }
    out
}

pub fn vector_key(v: &[TruncatedSeries]) -> Vec<u32> {
    v.iter().flat_map(|s| s.coeffs().iter().copied()).collect()
}

/// Every vector of the given length over `F_p[x]/(x^n)`.
pub fn all_vectors(p: u32, n: usize, len: usize) -> Vec<Vec<TruncatedSeries>> {
    let total = (p as usize).pow((n * len) as u32);
    (0..total)
        .map(|mut code| {
            (0..len)
                .map(|_| {
                    let c: Vec<i64> = (0..n)
                        .map(|_| {
                            let d = code % p as usize;
                            code /= p as usize;
                            d as i64
                        })
                        .collect();
                    TruncatedSeries::from_coeffs(&c, p, n).expect("valid ring")
                })
                .collect()
        })
        .collect()
}

/// The full column span of `m`, enumerated element by element.
pub fn exhaustive_span(m: &SeriesMatrix) -> HashSet<Vec<u32>> {
    let (p, n) = (m.modulus(), m.precision());
    all_vectors(p, n, m.cols())
        .into_iter()
        .map(|y| {
            let mut out = vec![TruncatedSeries::zero(p, n); m.rows()];
            for (i, o) in out.iter_mut().enumerate() {
                for (j, yj) in y.iter().enumerate() {
                    *o = &*o + &(&m[(i, j)] * yj);
                }
            }
            vector_key(&out)
        })
        .collect()
}

/// Matrix over `F_p` of a series matrix acting on `(F_p[x]/(x^l))^cols`, coefficient-major per entry.
pub fn expand(m: &SeriesMatrix, l: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; m.cols() * l]; m.rows() * l];
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let c = m[(i, j)].coeffs();
            for a in 0..l {
                for b in 0..=a {
                    if a - b < c.len() {
                        out[i * l + a][j * l + b] = c[a - b];
                    }
                }
            }
        }
    }
    out
}

fn block(c: &ChainComplex, from: u8, to: u8) -> SeriesMatrix {
    let index = |j: u8| -> Vec<usize> {
        (0..c.len())
            .filter(|&i| c.grading() == Grading::Ungraded || c.generators()[i].degree == j)
            .collect()
    };
    c.differential().submatrix(&index(to), &index(from))
}

/// `(dim H_0, dim H_1)` of `C ⊗ F_p[x]/(x^l)` as `F_p`-vector spaces.
pub fn homology_dims_mod_x_power(c: &ChainComplex, l: usize) -> (usize, usize) {
    let p = c.modulus();
    let dim = |j: u8| -> usize {
        let other = if c.grading() == Grading::Ungraded { 0 } else { 1 - j };
        let out = expand(&block(c, j, other), l);
        let inn = expand(&block(c, other, j), l);
        let n = block(c, j, j).cols() * l;
        n - fp::rank(&out, p) - fp::rank(&inn, p)
    };
    match c.grading() {
        Grading::Z2 => (dim(0), dim(1)),
        Grading::Ungraded => (dim(0), 0),
    }
}

/// Universal-coefficient prediction of `dim H_j(C ⊗ R/x^l)` from `H_j` and the other degree.
pub fn uct_dim(here: &FinModule, other: &FinModule, l: usize) -> usize {
    here.dim_mod_x_power(l) + other.torsion.iter().map(|&e| e.min(l)).sum::<usize>()
}

/// Whether `f` induces an isomorphism on `H(- ⊗ R/x^N)` in every degree, by elimination over `F_p`.
pub fn induces_iso_mod_x_powers(f: &ChainMap) -> bool {
    let l = f.source.precision();
    let p = f.source.modulus();
    let degrees: &[u8] = if f.source.grading() == Grading::Ungraded { &[0] } else { &[0, 1] };
    degrees.iter().all(|&j| {
        let other = if f.source.grading() == Grading::Ungraded { 0 } else { 1 - j };
        let idx = |c: &ChainComplex, j: u8| -> Vec<usize> {
            (0..c.len())
                .filter(|&i| c.grading() == Grading::Ungraded || c.generators()[i].degree == j)
                .collect()
        };
        let (sc, tc) = (&f.source, &f.target);
        let s_out = expand(&block(sc, j, other), l);
        let s_in = expand(&block(sc, other, j), l);
        let t_out = expand(&block(tc, j, other), l);
        let t_in = expand(&block(tc, other, j), l);
        let fj = expand(&f.matrix.submatrix(&idx(tc, j), &idx(sc, j)), l);
        let ns = idx(sc, j).len() * l;
        let nt = idx(tc, j).len() * l;
        let zs = fp::kernel(&s_out, ns, p);
        let bs = fp::rank(&s_in, p);
        let hs = zs.len() - bs;
        let ht = nt - fp::rank(&t_out, p) - fp::rank(&t_in, p);
        if hs != ht {
            return false;
        }
        let mut cols = fp::columns(&t_in, t_in.first().map_or(0, Vec::len));
        let bt = fp::rank_of_columns(&cols, p);
        cols.extend(zs.iter().map(|z| fp::mul_vec(&fj, z, p)));
        fp::rank_of_columns(&cols, p) - bt == ht
    })
}

/// Integral homology `(rank, torsion order)` of a complex with one `Z` in each degree,
/// given `a[k] = ∂: C_k → C_{k−1}` (with `a[0] = 0`).
pub fn homology_of_rank_one_complex(a: &[i64]) -> Vec<(usize, u64)> {
    (0..a.len())
        .map(|k| {
            if a[k] != 0 {
                return (0, 1);
            }
            match a.get(k + 1).copied().unwrap_or(0) {
                0 => (1, 1),
                next => (0, next.unsigned_abs()),
            }
        })
        .collect()
}

/// Integral homology of the `top`-skeleton of `B(Z/p)` with its standard cells:
/// `Z` in degree 0, `Z/p` in odd degrees below the top, and `Z` on top when `top` is odd.
pub fn lens_space_homology(p: i64, top: usize) -> Vec<(usize, u64)> {
    (0..=top)
        .map(|k| match (k, k % 2) {
            (0, _) => (1, 1),
            (k, 1) if k == top => (1, 1),
            (_, 1) => (0, p as u64),
            _ => (0, 1),
        })
        .collect()
}

/// `CZ` of `diag(e^{2πi a_j t})` for `a_j ∉ Z`: `Σ (2⌊a_j⌋ + 1)`.
pub fn cz_diagonal(a: &[f64]) -> i64 {
    a.iter().map(|x| 2 * x.floor() as i64 + 1).sum()
}

/// First grid point in `[lo, hi]` where `f` is defined and non-negative.
pub fn first_nonnegative_on_grid(f: impl Fn(f64) -> Option<i64>, lo: f64, hi: f64, step: f64) -> Option<f64> {
    let count = ((hi - lo) / step).floor() as usize;
    (0..=count).map(|k| lo + k as f64 * step).find(|&s| f(s).is_some_and(|m| m >= 0))
}
