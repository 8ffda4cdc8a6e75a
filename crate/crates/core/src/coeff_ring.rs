//! Exact arithmetic in `F_p` and in the truncated power series ring `F_p[[x]]/(x^N)`.
//!
//! Every [`TruncatedSeries`] carries its own modulus and precision. Binary
//! operations on values with different `p` or `N` are structural errors in the
//! checked entry points ([`series_add`], [`series_mul`], ...). The operator
//! impls (`&a + &b`, `&a * &b`) are for code that has already validated its
//! inputs, and panic on a mismatch.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: usize = 16;

/// Moduli are limited to primes below this bound.
pub const PRIME_BOUND: u32 = 1 << 16;

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u32) -> Result<()> {
    if p >= PRIME_BOUND || !is_prime(p) {
        return Err(Error::Domain(format!("modulus {p} is not a prime below 2^16")));
    }
    Ok(())
}

#[inline]
fn reduce(v: i64, p: u32) -> u32 {
    v.rem_euclid(p as i64) as u32
}

#[inline]
fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

fn pow_mod(mut base: u32, mut exp: u64, p: u32) -> u32 {
    let mut acc = 1u32 % p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue modulo a prime.
#[inline]
pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, (p - 2) as u64, p)
}

/// A residue class in `Z/pZ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u32,
    p: u32,
}

impl FieldElem {
    pub fn new(value: i64, p: u32) -> Result<Self> {
        check_prime(p)?;
        Ok(Self { value: reduce(value, p), p })
    }

    pub(crate) fn raw(value: u32, p: u32) -> Self {
        Self { value: value % p, p }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inverse(self) -> Option<Self> {
        (self.value != 0).then(|| Self::raw(inv_mod(self.value, self.p), self.p))
    }

    pub fn pow(self, exp: u64) -> Self {
        Self::raw(pow_mod(self.value, exp, self.p), self.p)
    }
}

impl Add for FieldElem {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.p, rhs.p, "mixed moduli");
        Self::raw((self.value + rhs.value) % self.p, self.p)
    }
}

impl Sub for FieldElem {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        assert_eq!(self.p, rhs.p, "mixed moduli");
        Self::raw((self.value + self.p - rhs.value) % self.p, self.p)
    }
}

impl Mul for FieldElem {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.p, rhs.p, "mixed moduli");
        Self::raw(mul_mod(self.value, rhs.value, self.p), self.p)
    }
}

impl Neg for FieldElem {
    type Output = Self;
    fn neg(self) -> Self {
        Self::raw((self.p - self.value) % self.p, self.p)
    }
}

/// x-adic valuation; `Infinite` marks a series whose stored coefficients all vanish.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(usize),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<usize> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// An element of `F_p[[x]]` known modulo `x^N`; `coeffs[j]` is the coefficient of `x^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncatedSeries {
    p: u32,
    coeffs: Vec<u32>,
}

impl TruncatedSeries {
    pub fn zero(p: u32, precision: usize) -> Self {
        assert!(precision >= 1, "precision must be at least 1");
        Self { p, coeffs: vec![0; precision] }
    }

    pub fn one(p: u32, precision: usize) -> Self {
        Self::constant(1, p, precision)
    }

    pub fn constant(c: i64, p: u32, precision: usize) -> Self {
        let mut s = Self::zero(p, precision);
        s.coeffs[0] = reduce(c, p);
        s
    }

    /// `c * x^k`, which is zero when `k >= precision`.
    pub fn monomial(c: i64, k: usize, p: u32, precision: usize) -> Self {
        let mut s = Self::zero(p, precision);
        if k < precision {
            s.coeffs[k] = reduce(c, p);
        }
        s
    }

    /// Builds a series from integer coefficients, reducing each modulo `p`.
    /// Shorter inputs are padded with zeros; longer inputs are an error.
    pub fn from_coeffs(coeffs: &[i64], p: u32, precision: usize) -> Result<Self> {
        check_prime(p)?;
        if precision == 0 {
            return Err(Error::Structural("precision must be at least 1".into()));
        }
        if coeffs.len() > precision {
            return Err(Error::Structural(format!(
                "{} coefficients do not fit precision {precision}",
                coeffs.len()
            )));
        }
        let mut s = Self::zero(p, precision);
        for (dst, &c) in s.coeffs.iter_mut().zip(coeffs) {
            *dst = reduce(c, p);
        }
        Ok(s)
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> FieldElem {
        FieldElem::raw(self.coeffs.get(j).copied().unwrap_or(0), self.p)
    }

    pub fn constant_term(&self) -> u32 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0] == 1 && self.coeffs[1..].iter().all(|&c| c == 0)
    }

    pub fn valuation(&self) -> Valuation {
        self.coeffs
            .iter()
            .position(|&c| c != 0)
            .map_or(Valuation::Infinite, Valuation::Finite)
    }

    pub fn is_unit(&self) -> bool {
        self.coeffs[0] != 0
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Structural(format!("moduli {} and {} differ", self.p, other.p)));
        }
        if self.precision() != other.precision() {
            return Err(Error::Structural(format!(
                "precisions {} and {} differ",
                self.precision(),
                other.precision()
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: u32) -> Self {
        let p = self.p;
        Self { p, coeffs: self.coeffs.iter().map(|&a| mul_mod(a, c, p)).collect() }
    }

    /// Multiplication by `x^k`.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.precision();
        let mut out = Self::zero(self.p, n);
        for j in k..n {
            out.coeffs[j] = self.coeffs[j - k];
        }
        out
    }

    /// Division by `x^k`; the top `k` coefficients of the result are unknown and set to zero.
    pub fn shift_down(&self, k: usize) -> Self {
        let n = self.precision();
        let mut out = Self::zero(self.p, n);
        for j in k..n {
            out.coeffs[j - k] = self.coeffs[j];
        }
        out
    }

    /// Image in `R/(x^e)`, kept at the same precision with coefficients of `x^j`, `j >= e`, cleared.
    pub fn reduce_mod_x_power(&self, e: usize) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut().skip(e) {
            *c = 0;
        }
        out
    }

    /// Reduction to a coarser precision.
    pub fn truncate(&self, precision: usize) -> Self {
        assert!(precision >= 1 && precision <= self.precision());
        Self { p: self.p, coeffs: self.coeffs[..precision].to_vec() }
    }

    /// `u` with `self = x^v * u`, `u` a unit; `None` for the zero series.
    /// The top `v` coefficients of `u` are unknown and set to zero.
    pub fn unit_part(&self) -> Option<(usize, Self)> {
        let v = self.valuation().finite()?;
        Some((v, self.shift_down(v)))
    }

    pub fn inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotAUnit(self.valuation().finite().unwrap_or(self.precision())));
        }
        let p = self.p;
        let n = self.precision();
        let a0_inv = inv_mod(self.coeffs[0], p);
        let mut b = vec![0u32; n];
        b[0] = a0_inv;
        for k in 1..n {
            let mut acc = 0u64;
            for j in 1..=k {
                acc += self.coeffs[j] as u64 * b[k - j] as u64;
                acc %= p as u64;
            }
            b[k] = mul_mod((p - acc as u32) % p, a0_inv, p);
        }
        Ok(Self { p, coeffs: b })
    }

    fn add_unchecked(&self, other: &Self) -> Self {
        let p = self.p;
        Self {
            p,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| (a + b) % p).collect(),
        }
    }

    fn sub_unchecked(&self, other: &Self) -> Self {
        let p = self.p;
        Self {
            p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| (a + p - b) % p)
                .collect(),
        }
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let p = self.p as u64;
        let n = self.precision();
        let mut out = vec![0u64; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs[..n - i].iter().enumerate() {
                out[i + j] = (out[i + j] + a as u64 * b as u64) % p;
            }
        }
        Self { p: self.p, coeffs: out.into_iter().map(|c| c as u32).collect() }
    }

    /// `self - q * other` in place.
    pub(crate) fn sub_mul_assign(&mut self, q: &Self, other: &Self) {
        let p = self.p as u64;
        let n = self.precision();
        for (i, &a) in q.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs[..n - i].iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let prod = (a as u64 * b as u64) % p;
                let cur = self.coeffs[i + j] as u64;
                self.coeffs[i + j] = ((cur + p - prod) % p) as u32;
            }
        }
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (j, c) {
                (0, _) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, _) => write!(f, "{c}x")?,
                (_, 1) => write!(f, "x^{j}")?,
                _ => write!(f, "{c}x^{j}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(x^{})", self.precision())
    }
}

pub fn series_add(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    a.same_ring(b)?;
    Ok(a.add_unchecked(b))
}

pub fn series_sub(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    a.same_ring(b)?;
    Ok(a.sub_unchecked(b))
}

pub fn series_mul(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<TruncatedSeries> {
    a.same_ring(b)?;
    Ok(a.mul_unchecked(b))
}

pub fn series_invert(a: &TruncatedSeries) -> Result<TruncatedSeries> {
    a.inverse()
}

pub fn valuation(a: &TruncatedSeries) -> Valuation {
    a.valuation()
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn add(self, rhs: Self) -> TruncatedSeries {
        series_add(self, rhs).expect("series from different rings")
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn sub(self, rhs: Self) -> TruncatedSeries {
        series_sub(self, rhs).expect("series from different rings")
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn mul(self, rhs: Self) -> TruncatedSeries {
        series_mul(self, rhs).expect("series from different rings")
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;
    fn neg(self) -> TruncatedSeries {
        let p = self.p;
        TruncatedSeries { p, coeffs: self.coeffs.iter().map(|&c| (p - c) % p).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(c: &[i64], p: u32, n: usize) -> TruncatedSeries {
        TruncatedSeries::from_coeffs(c, p, n).unwrap()
    }

    // Untruncated product, cut at `n` afterwards.
    fn schoolbook(a: &[i64], b: &[i64], p: i64, n: usize) -> Vec<i64> {
        let mut out = vec![0i64; a.len() + b.len()];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out.iter().take(n).map(|c| c.rem_euclid(p)).collect()
    }

    #[test]
    fn field_rejects_composite() {
        assert!(FieldElem::new(1, 4).is_err());
        assert!(FieldElem::new(1, 65537).is_err());
        let a = FieldElem::new(-1, 5).unwrap();
        assert_eq!(a.value(), 4);
        assert_eq!((a * a.inverse().unwrap()).value(), 1);
    }

    #[test]
    fn additive_inverse_and_identity() {
        for p in [2u32, 3, 5, 7] {
            let pm = p as i64 - 1;
            let a = s(&[1, 1], p, 6);
            assert!(series_add(&a, &s(&[pm, pm], p, 6)).unwrap().is_zero());
            assert_eq!(series_add(&a, &TruncatedSeries::zero(p, 6)).unwrap(), a);
        }
    }

    #[test]
    fn add_over_f2_is_xor() {
        let sum = series_add(&s(&[1, 1], 2, 4), &s(&[1, 0, 0, 1], 2, 4)).unwrap();
        assert_eq!(sum.coeffs(), &[0, 1, 0, 1]);
    }

    #[test]
    fn mismatch_is_structural() {
        assert!(matches!(series_add(&s(&[1], 2, 4), &s(&[1], 3, 4)), Err(Error::Structural(_))));
        assert!(matches!(series_mul(&s(&[1], 2, 4), &s(&[1], 2, 5)), Err(Error::Structural(_))));
    }

    #[test]
    fn products() {
        let sq = series_mul(&s(&[1, 1], 2, 8), &s(&[1, 1], 2, 8)).unwrap();
        assert_eq!(sq, s(&[1, 0, 1], 2, 8));

        let top = TruncatedSeries::monomial(1, 7, 3, 8);
        let x = TruncatedSeries::monomial(1, 1, 3, 8);
        assert!(series_mul(&top, &x).unwrap().is_zero());

        let prod = series_mul(&s(&[1, 1], 3, 5), &s(&[1, 2, 1], 3, 5)).unwrap();
        let expected = schoolbook(&[1, 1], &[1, 2, 1], 3, 5);
        assert_eq!(expected, vec![1, 0, 0, 1, 0]);
        assert_eq!(prod, s(&expected, 3, 5));
    }

    #[test]
    fn inversion() {
        assert!(TruncatedSeries::one(5, 4).inverse().unwrap().is_one());
        assert_eq!(s(&[1, 1], 2, 4).inverse().unwrap(), s(&[1, 1, 1, 1], 2, 4));
        assert_eq!(series_invert(&s(&[0, 1], 3, 4)), Err(Error::NotAUnit(1)));
    }

    #[test]
    fn valuations() {
        assert_eq!(TruncatedSeries::zero(2, 8).valuation(), Valuation::Infinite);
        assert_eq!(s(&[0, 0, 0, 1, 0, 1], 2, 8).valuation(), Valuation::Finite(3));
        assert!(Valuation::Finite(100) < Valuation::Infinite);
    }

    #[test]
    fn display() {
        assert_eq!(s(&[1, 0, 2, 1], 3, 4).to_string(), "1 + 2x^2 + x^3 + O(x^4)");
    }

    fn arb_series(p: u32, n: usize) -> impl Strategy<Value = TruncatedSeries> {
        proptest::collection::vec(0..p as i64, n).prop_map(move |c| s(&c, p, n))
    }

    fn arb_ring() -> impl Strategy<Value = (u32, usize)> {
        (prop_oneof![Just(2u32), Just(3), Just(5), Just(7)], 1usize..12)
    }

    proptest! {
        #[test]
        fn ring_axioms((p, n) in arb_ring(), seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || {
                let c: Vec<i64> = (0..n).map(|_| rng.random_range(0..p as i64)).collect();
                s(&c, p, n)
            };
            let (a, b, c) = (draw(), draw(), draw());
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert!((&a + &(-&a)).is_zero());
        }

        #[test]
        fn valuation_is_additive(a in arb_series(3, 10), b in arb_series(3, 10)) {
            if let (Some(va), Some(vb)) = (a.valuation().finite(), b.valuation().finite()) {
                if va + vb < 10 {
                    prop_assert_eq!((&a * &b).valuation(), Valuation::Finite(va + vb));
                }
            }
        }

        #[test]
        fn unit_times_monomial(u in arb_series(5, 9), k in 0usize..9) {
            let mut u = u;
            if !u.is_unit() {
                u = &u + &TruncatedSeries::one(5, 9);
                if !u.is_unit() { u = &u + &TruncatedSeries::one(5, 9); }
            }
            let xk = TruncatedSeries::monomial(1, k, 5, 9);
            prop_assert_eq!((&u * &xk).valuation(), Valuation::Finite(k));
        }

        #[test]
        fn inverse_is_two_sided(a in arb_series(7, 8)) {
            prop_assume!(a.is_unit());
            let b = a.inverse().unwrap();
            prop_assert!((&a * &b).is_one());
            prop_assert!((&b * &a).is_one());
        }
    }
}
