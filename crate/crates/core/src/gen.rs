//! Seeded random instances: matrices, complexes with known homology, chain maps.

use rand::Rng;

use crate::chain_complex::{mapping_cone, ChainComplex, ChainMap, Generator, GradedFinModule, Grading};
use crate::coeff_ring::TruncatedSeries;
use crate::error::Result;
use crate::fg_module::SeriesMatrix;

pub fn random_series<R: Rng>(rng: &mut R, p: u32, n: usize) -> TruncatedSeries {
    let c: Vec<i64> = (0..n).map(|_| rng.random_range(0..p as i64)).collect();
    TruncatedSeries::from_coeffs(&c, p, n).expect("valid ring")
}

pub fn random_unit<R: Rng>(rng: &mut R, p: u32, n: usize) -> TruncatedSeries {
    let mut s = random_series(rng, p, n);
    while !s.is_unit() {
        s = random_series(rng, p, n);
    }
    s
}

/// Zero with probability `1 - density`, otherwise `x^v · unit` with small `v`.
pub fn random_sparse_series<R: Rng>(rng: &mut R, p: u32, n: usize, density: f64) -> TruncatedSeries {
    if !rng.random_bool(density) {
        return TruncatedSeries::zero(p, n);
    }
    let v = rng.random_range(0..=3.min(n - 1));
    random_unit(rng, p, n).shift_up(v)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, p: u32, n: usize, density: f64) -> SeriesMatrix {
    let entries = (0..rows * cols).map(|_| random_sparse_series(rng, p, n, density)).collect();
    SeriesMatrix::from_entries(rows, cols, entries, p, n).expect("valid ring")
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize, p: u32, n: usize) -> Vec<TruncatedSeries> {
    (0..len).map(|_| random_series(rng, p, n)).collect()
}

/// Product of a unit lower-triangular, an upper-triangular with unit diagonal and a permutation.
pub fn random_unimodular<R: Rng>(rng: &mut R, size: usize, p: u32, n: usize) -> SeriesMatrix {
    let mut l = SeriesMatrix::identity(size, p, n);
    let mut u = SeriesMatrix::zeros(size, size, p, n);
    for i in 0..size {
        for j in 0..size {
            if i > j {
                l[(i, j)] = random_sparse_series(rng, p, n, 0.6);
            } else if i == j {
                u[(i, j)] = random_unit(rng, p, n);
            } else {
                u[(i, j)] = random_sparse_series(rng, p, n, 0.6);
            }
        }
    }
    let mut perm: Vec<usize> = (0..size).collect();
    for i in (1..size).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut pm = SeriesMatrix::zeros(size, size, p, n);
    for (i, &j) in perm.iter().enumerate() {
        pm[(i, j)] = TruncatedSeries::one(p, n);
    }
    l.mul(&u).and_then(|a| a.mul(&pm)).expect("square factors")
}

/// `P · diag(x^e) · Q` with random unimodular `P`, `Q`.
pub fn matrix_with_smith_form<R: Rng>(rng: &mut R, rows: usize, cols: usize, exps: &[usize], p: u32, n: usize) -> SeriesMatrix {
    let mut d = SeriesMatrix::zeros(rows, cols, p, n);
    for (i, &e) in exps.iter().enumerate() {
        d[(i, i)] = TruncatedSeries::monomial(1, e, p, n);
    }
    let a = random_unimodular(rng, rows, p, n);
    let b = random_unimodular(rng, cols, p, n);
    a.mul(&d).and_then(|m| m.mul(&b)).expect("compatible shapes")
}

/// Invertible matrix preserving the degree of every generator.
pub fn random_graded_unimodular<R: Rng>(rng: &mut R, gens: &[Generator], p: u32, n: usize) -> SeriesMatrix {
    let mut out = SeriesMatrix::zeros(gens.len(), gens.len(), p, n);
    for j in [0u8, 1] {
        let idx: Vec<usize> = (0..gens.len()).filter(|&i| gens[i].degree == j).collect();
        let block = random_unimodular(rng, idx.len(), p, n);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &k) in idx.iter().enumerate() {
                out[(i, k)] = block[(a, b)].clone();
            }
        }
    }
    out
}

/// Role of a generator of a standard complex: free, or one end of `b -> x^e a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Free,
    Head { tail: usize, e: usize },
    Tail { head: usize, e: usize },
}

/// A complex `P · S · P^{-1}` for a standard complex `S`, with its homology as fixed by construction.
#[derive(Clone, Debug)]
pub struct RandomComplex {
    pub complex: ChainComplex,
    pub expected: GradedFinModule,
    /// Roles of the generators of `S`.
    pub roles: Vec<Role>,
    pub basis: SeriesMatrix,
    pub basis_inv: SeriesMatrix,
}

impl RandomComplex {
    /// The same complex re-based by a further graded automorphism `Q`, so that `Q` is the comparison map.
    pub fn rebase(&self, q: &SeriesMatrix) -> Result<RandomComplex> {
        let basis = q.mul(&self.basis)?;
        let basis_inv = self.basis_inv.mul(&q.inverse()?)?;
        Ok(RandomComplex {
            complex: self.complex.conjugate(q)?,
            expected: self.expected.clone(),
            roles: self.roles.clone(),
            basis,
            basis_inv,
        })
    }
}

/// Piece of a standard complex: a free generator, or `b -> x^e a` with `a` in degree `deg`.
#[derive(Clone, Copy, Debug)]
pub enum Piece {
    Free { deg: u8 },
    Arrow { deg: u8, e: usize },
}

/// Direct sum of the pieces, conjugated by a random graded change of basis.
pub fn complex_from_pieces<R: Rng>(rng: &mut R, pieces: &[Piece], p: u32, n: usize, grading: Grading) -> RandomComplex {
    let graded = grading == Grading::Z2;
    let deg = |d: u8| if graded { d % 2 } else { 0 };
    let mut gens = Vec::new();
    let mut roles = Vec::new();
    let mut expected = GradedFinModule::default();
    for (k, piece) in pieces.iter().enumerate() {
        match *piece {
            Piece::Arrow { deg: d, e } if e < n => {
                let a = gens.len();
                gens.push(Generator::new(format!("a{k}"), deg(d)));
                gens.push(Generator::new(format!("b{k}"), deg(d + 1)));
                roles.push(Role::Head { tail: a + 1, e });
                roles.push(Role::Tail { head: a, e });
                if e >= 1 {
                    let m = if deg(d) == 0 { &mut expected.even } else { &mut expected.odd };
                    m.torsion.push(e);
                }
            }
            Piece::Arrow { deg: d, .. } => {
                for (suffix, dd) in [("a", d), ("b", d + 1)] {
                    gens.push(Generator::new(format!("{suffix}{k}"), deg(dd)));
                    roles.push(Role::Free);
                    let m = if deg(dd) == 0 { &mut expected.even } else { &mut expected.odd };
                    m.free_rank += 1;
                }
            }
            Piece::Free { deg: d } => {
                gens.push(Generator::new(format!("g{k}"), deg(d)));
                roles.push(Role::Free);
                let m = if deg(d) == 0 { &mut expected.even } else { &mut expected.odd };
                m.free_rank += 1;
            }
        }
    }
    expected.even.torsion.sort_unstable();
    expected.odd.torsion.sort_unstable();

    let mut perm: Vec<usize> = (0..gens.len()).collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let mut pos = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        pos[old] = new;
    }
    let gens: Vec<Generator> = perm.iter().map(|&i| gens[i].clone()).collect();
    let roles: Vec<Role> = perm
        .iter()
        .map(|&i| match roles[i] {
            Role::Free => Role::Free,
            Role::Head { tail, e } => Role::Head { tail: pos[tail], e },
            Role::Tail { head, e } => Role::Tail { head: pos[head], e },
        })
        .collect();
    let mut d = SeriesMatrix::zeros(gens.len(), gens.len(), p, n);
    for (i, r) in roles.iter().enumerate() {
        if let Role::Tail { head, e } = *r {
            d[(head, i)] = TruncatedSeries::monomial(1, e, p, n);
        }
    }
    let std = ChainComplex::new(gens.clone(), d, grading).expect("standard complex");
    let basis = if graded {
        random_graded_unimodular(rng, &gens, p, n)
    } else {
        random_unimodular(rng, gens.len(), p, n)
    };
    let basis_inv = basis.inverse().expect("unimodular");
    let complex = std.conjugate(&basis).expect("invertible change of basis");
    RandomComplex { complex, expected, roles, basis, basis_inv }
}

/// Random standard pieces on `size` generators, conjugated.
pub fn random_complex<R: Rng>(rng: &mut R, p: u32, n: usize, size: usize) -> RandomComplex {
    random_complex_graded(rng, p, n, size, Grading::Z2)
}

pub fn random_complex_graded<R: Rng>(rng: &mut R, p: u32, n: usize, size: usize, grading: Grading) -> RandomComplex {
    let mut pieces = Vec::new();
    let mut left = size;
    while left > 0 {
        let deg = rng.random_range(0..2u8);
        if left >= 2 && rng.random_bool(0.65) {
            pieces.push(Piece::Arrow { deg, e: rng.random_range(0..=3.min(n)) });
            left -= 2;
        } else {
            pieces.push(Piece::Free { deg });
            left -= 1;
        }
    }
    complex_from_pieces(rng, &pieces, p, n, grading)
}

fn degree_ok(target: &ChainComplex, source: &ChainComplex, i: usize, j: usize, degree: u8) -> bool {
    target.grading() == Grading::Ungraded
        || target.generators()[i].degree == (source.generators()[j].degree + degree) % 2
}

/// Random chain map between standard complexes, entry by entry from the allowed piece-to-piece maps.
fn standard_chain_map<R: Rng>(rng: &mut R, c: &RandomComplex, d: &RandomComplex, density: f64) -> SeriesMatrix {
    let (p, n) = (c.complex.modulus(), c.complex.precision());
    let mut f = SeriesMatrix::zeros(d.roles.len(), c.roles.len(), p, n);
    let same = |i: usize, j: usize| degree_ok(&d.complex, &c.complex, i, j, 0);
    for j in 0..c.roles.len() {
        for i in 0..d.roles.len() {
            if !same(i, j) {
                continue;
            }
            match (c.roles[j], d.roles[i]) {
                (Role::Free | Role::Tail { .. }, Role::Free | Role::Head { .. }) => {
                    f[(i, j)] = random_sparse_series(rng, p, n, density);
                }
                (Role::Tail { head: ha, e }, Role::Tail { head: hb, e: e2 }) if same(hb, ha) => {
                    if !rng.random_bool(density) {
                        continue;
                    }
                    let t = random_series(rng, p, n);
                    let (alpha, beta) = if e2 >= e { (t.shift_up(e2 - e), t) } else { (t.clone(), t.shift_up(e - e2)) };
                    f[(i, j)] = &f[(i, j)] + &beta;
                    f[(hb, ha)] = &f[(hb, ha)] + &alpha;
                }
                _ => {}
            }
        }
    }
    f
}

/// Random chain map `c -> d`: a standard map transported to the given bases plus a null-homotopic term.
pub fn random_chain_map<R: Rng>(rng: &mut R, c: &RandomComplex, d: &RandomComplex) -> Result<ChainMap> {
    let phi = standard_chain_map(rng, c, d, 0.5);
    let f = d.basis.mul(&phi)?.mul(&c.basis_inv)?;
    let h = random_map(rng, &c.complex, &d.complex, 1, 0.3).matrix;
    let null = d.complex.differential().mul(&h)?.add(&h.mul(c.complex.differential())?)?;
    ChainMap::new(c.complex.clone(), d.complex.clone(), 0, f.add(&null)?)
}

/// Random map of the given degree without any equation imposed.
pub fn random_map<R: Rng>(rng: &mut R, c: &ChainComplex, d: &ChainComplex, degree: u8, density: f64) -> ChainMap {
    let (p, n) = (c.modulus(), c.precision());
    let mut f = SeriesMatrix::zeros(d.len(), c.len(), p, n);
    for i in 0..d.len() {
        for j in 0..c.len() {
            if degree_ok(d, c, i, j, degree) {
                f[(i, j)] = random_sparse_series(rng, p, n, density);
            }
        }
    }
    ChainMap::new(c.clone(), d.clone(), degree, f).expect("degree respected")
}

/// `f = Q · x^a (1 + x φ)` into a re-based copy of `c`; the cone of `f` is x-torsion with bound `a`.
pub fn torsion_cone_map<R: Rng>(rng: &mut R, c: &RandomComplex, a: usize) -> Result<(RandomComplex, ChainMap)> {
    let (p, n) = (c.complex.modulus(), c.complex.precision());
    let phi = random_chain_map(rng, c, c)?;
    let x = TruncatedSeries::monomial(1, 1, p, n);
    let xa = TruncatedSeries::monomial(1, a, p, n);
    let inner = SeriesMatrix::identity(c.complex.len(), p, n).add(&phi.matrix.scale(&x))?.scale(&xa);
    let q = if c.complex.grading() == Grading::Z2 {
        random_graded_unimodular(rng, c.complex.generators(), p, n)
    } else {
        random_unimodular(rng, c.complex.len(), p, n)
    };
    let target = c.rebase(&q)?;
    let f = ChainMap::new(c.complex.clone(), target.complex.clone(), 0, q.mul(&inner)?)?;
    Ok((target, f))
}

/// Cone of a random chain map, with the target block as the subcomplex.
pub fn random_filtered_complex<R: Rng>(rng: &mut R, p: u32, n: usize) -> (ChainComplex, Vec<usize>) {
    let (na, nb) = (rng.random_range(1..=4), rng.random_range(1..=4));
    let a = random_complex(rng, p, n, na);
    let b = random_complex(rng, p, n, nb);
    let f = random_chain_map(rng, &b, &a).expect("chain map");
    let cone = mapping_cone(&f).expect("chain map");
    (cone, (0..a.complex.len()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain_complex::homology;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constructed_homology_is_observed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in [2u32, 3, 5] {
            for _ in 0..10 {
                let r = random_complex(&mut rng, p, 8, 7);
                assert!(homology(&r.complex).same_invariants(&r.expected));
            }
        }
    }

    #[test]
    fn chain_maps_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let c = random_complex(&mut rng, 3, 8, 5);
            let d = random_complex(&mut rng, 3, 8, 5);
            assert!(random_chain_map(&mut rng, &c, &d).unwrap().is_chain_map());
            let (_, f) = torsion_cone_map(&mut rng, &c, 2).unwrap();
            assert!(f.is_chain_map());
            let h = homology(&crate::chain_complex::mapping_cone(&f).unwrap());
            assert!(crate::chain_complex::is_x_torsion(&h).0);
        }
    }
}
