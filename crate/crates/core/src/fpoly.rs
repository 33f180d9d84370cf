//! Prime fields and dense univariate polynomials over them.
//!
//! Two field backends share one interface: [`Fp64`] for word-sized primes
//! (the small-prime sieve and CRT work) and [`FpBig`] for arbitrary
//! primes (Phase B on survivors of any size). Polynomials are little-endian
//! coefficient vectors kept trimmed, so the zero polynomial is empty.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

use crate::modular::{add_mod, inv_mod, mul_mod, pow_mod, sub_mod};

pub trait PrimeField: Clone + Debug + Send + Sync {
    type Elem: Clone + PartialEq + Eq + Debug + Send + Sync;

    fn characteristic(&self) -> BigUint;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn lift_u64(&self, v: u64) -> Self::Elem;
    fn lift_bigint(&self, v: &BigInt) -> Self::Elem;
    fn to_biguint(&self, a: &Self::Elem) -> BigUint;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.sub(&self.zero(), a)
    }

    fn pow(&self, a: &Self::Elem, e: &BigUint) -> Self::Elem {
        let mut r = self.one();
        for i in (0..e.bits()).rev() {
            r = self.mul(&r, &r);
            if e.bit(i) {
                r = self.mul(&r, a);
            }
        }
        r
    }

    /// Product of two coefficient vectors (untrimmed inputs allowed).
    fn poly_mul(&self, a: &[Self::Elem], b: &[Self::Elem]) -> Vec<Self::Elem> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if self.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] = self.add(&out[i + j], &self.mul(x, y));
            }
        }
        out
    }

    /// Remainder of `a` modulo a monic polynomial `m` of degree >= 1.
    fn poly_rem_monic(&self, a: &[Self::Elem], m: &[Self::Elem]) -> Vec<Self::Elem> {
        let dm = m.len() - 1;
        let mut r = a.to_vec();
        if r.len() <= dm {
            return r;
        }
        for top in (dm..r.len()).rev() {
            let c = r[top].clone();
            if self.is_zero(&c) {
                continue;
            }
            let shift = top - dm;
            for (j, mj) in m.iter().enumerate().take(dm) {
                r[shift + j] = self.sub(&r[shift + j], &self.mul(&c, mj));
            }
            r[top] = self.zero();
        }
        r.truncate(dm);
        r
    }
}

/// `F_p` for a word-sized prime `p < 2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fp64 {
    p: u64,
}

impl Fp64 {
    pub fn new(p: u64) -> Self {
        assert!((2..(1 << 63)).contains(&p), "word field modulus out of range");
        Fp64 { p }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    // products of reduced residues fit in 64 bits
    fn is_half_word(&self) -> bool {
        self.p < (1 << 32)
    }
}

impl PrimeField for Fp64 {
    type Elem = u64;

    fn characteristic(&self) -> BigUint {
        BigUint::from(self.p)
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn lift_u64(&self, v: u64) -> u64 {
        v % self.p
    }
    fn lift_bigint(&self, v: &BigInt) -> u64 {
        let r = (v.magnitude() % self.p).to_u64().expect("reduced residue");
        if v.sign() == Sign::Minus {
            sub_mod(0, r, self.p)
        } else {
            r
        }
    }
    fn to_biguint(&self, a: &u64) -> BigUint {
        BigUint::from(*a)
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        add_mod(*a, *b, self.p)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        sub_mod(*a, *b, self.p)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.p)
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            inv_mod(*a, self.p)
        }
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn pow(&self, a: &u64, e: &BigUint) -> u64 {
        match e.to_u64() {
            Some(e) => pow_mod(*a, e, self.p),
            None => {
                // Fermat: exponents only matter modulo p - 1 for units
                if *a == 0 {
                    return if e.is_zero() { 1 } else { 0 };
                }
                let r = (e % (self.p - 1)).to_u64().expect("reduced exponent");
                pow_mod(*a, r, self.p)
            }
        }
    }

    fn poly_mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let p = self.p;
        if !self.is_half_word() {
            let mut out = vec![0u64; a.len() + b.len() - 1];
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate() {
                    out[i + j] = add_mod(out[i + j], mul_mod(x, y, p), p);
                }
            }
            return out;
        }
        let mut acc = vec![0u128; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                acc[i + j] += (x * y) as u128;
            }
        }
        acc.into_iter().map(|v| (v % p as u128) as u64).collect()
    }

    fn poly_rem_monic(&self, a: &[u64], m: &[u64]) -> Vec<u64> {
        let dm = m.len() - 1;
        if a.len() <= dm {
            return a.to_vec();
        }
        let p = self.p;
        if !self.is_half_word() {
            let mut r = a.to_vec();
            for top in (dm..r.len()).rev() {
                let c = r[top];
                if c == 0 {
                    continue;
                }
                let shift = top - dm;
                for j in 0..dm {
                    r[shift + j] = sub_mod(r[shift + j], mul_mod(c, m[j], p), p);
                }
            }
            r.truncate(dm);
            return r;
        }
        // Lazy reduction: add c * (p - m_j) and reduce a slot only when it
        // becomes the leading coefficient.
        let neg_m: Vec<u64> = m[..dm].iter().map(|&v| (p - v) % p).collect();
        let mut r: Vec<u128> = a.iter().map(|&v| v as u128).collect();
        for top in (dm..r.len()).rev() {
            let c = (r[top] % p as u128) as u64;
            if c == 0 {
                continue;
            }
            let shift = top - dm;
            for j in 0..dm {
                r[shift + j] += (c * neg_m[j]) as u128;
            }
        }
        r.truncate(dm);
        r.into_iter().map(|v| (v % p as u128) as u64).collect()
    }
}

/// `F_p` for an arbitrary prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpBig {
    p: BigUint,
}

impl FpBig {
    pub fn new(p: BigUint) -> Self {
        assert!(p > BigUint::one(), "field modulus must exceed 1");
        FpBig { p }
    }
}

impl PrimeField for FpBig {
    type Elem = BigUint;

    fn characteristic(&self) -> BigUint {
        self.p.clone()
    }
    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one()
    }
    fn lift_u64(&self, v: u64) -> BigUint {
        BigUint::from(v) % &self.p
    }
    fn lift_bigint(&self, v: &BigInt) -> BigUint {
        let r = v.magnitude() % &self.p;
        if v.sign() == Sign::Minus && !r.is_zero() {
            &self.p - r
        } else {
            r
        }
    }
    fn to_biguint(&self, a: &BigUint) -> BigUint {
        a.clone()
    }
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.p {
            s - &self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.p - b + a
        }
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        a * b % &self.p
    }
    fn inv(&self, a: &BigUint) -> Option<BigUint> {
        if a.is_zero() {
            return None;
        }
        let e = &self.p - BigUint::from(2u32);
        Some(a.modpow(&e, &self.p))
    }
    fn is_zero(&self, a: &BigUint) -> bool {
        a.is_zero()
    }
    fn pow(&self, a: &BigUint, e: &BigUint) -> BigUint {
        a.modpow(e, &self.p)
    }
}

/// Polynomial helpers over a [`PrimeField`].
pub mod poly {
    use super::*;

    pub fn trim<F: PrimeField>(f: &F, mut a: Vec<F::Elem>) -> Vec<F::Elem> {
        while a.last().is_some_and(|c| f.is_zero(c)) {
            a.pop();
        }
        a
    }

    pub fn degree<E>(a: &[E]) -> Option<usize> {
        a.len().checked_sub(1)
    }

    pub fn from_u64s<F: PrimeField>(f: &F, c: &[u64]) -> Vec<F::Elem> {
        trim(f, c.iter().map(|&v| f.lift_u64(v)).collect())
    }

    pub fn from_bigints<F: PrimeField>(f: &F, c: &[BigInt]) -> Vec<F::Elem> {
        trim(f, c.iter().map(|v| f.lift_bigint(v)).collect())
    }

    pub fn add<F: PrimeField>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        let n = a.len().max(b.len());
        let z = f.zero();
        let out = (0..n)
            .map(|i| f.add(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        trim(f, out)
    }

    pub fn sub<F: PrimeField>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        let n = a.len().max(b.len());
        let z = f.zero();
        let out = (0..n)
            .map(|i| f.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        trim(f, out)
    }

    pub fn mul<F: PrimeField>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        trim(f, f.poly_mul(a, b))
    }

    pub fn scale<F: PrimeField>(f: &F, a: &[F::Elem], c: &F::Elem) -> Vec<F::Elem> {
        trim(f, a.iter().map(|x| f.mul(x, c)).collect())
    }

    pub fn monic<F: PrimeField>(f: &F, a: &[F::Elem]) -> Vec<F::Elem> {
        match a.last() {
            None => Vec::new(),
            Some(lc) => {
                let inv = f.inv(lc).expect("nonzero leading coefficient");
                scale(f, a, &inv)
            }
        }
    }

    pub fn eval<F: PrimeField>(f: &F, a: &[F::Elem], x: &F::Elem) -> F::Elem {
        a.iter()
            .rev()
            .fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
    }

    /// Quotient and remainder by a nonzero divisor.
    pub fn divrem<F: PrimeField>(
        f: &F,
        a: &[F::Elem],
        b: &[F::Elem],
    ) -> (Vec<F::Elem>, Vec<F::Elem>) {
        let db = degree(b).expect("division by the zero polynomial");
        let mut r = trim(f, a.to_vec());
        if r.len() <= db {
            return (Vec::new(), r);
        }
        let lc_inv = f.inv(&b[db]).expect("nonzero leading coefficient");
        let mut q = vec![f.zero(); r.len() - db];
        for top in (db..r.len()).rev() {
            let c = f.mul(&r[top], &lc_inv);
            if f.is_zero(&c) {
                continue;
            }
            let shift = top - db;
            for j in 0..=db {
                r[shift + j] = f.sub(&r[shift + j], &f.mul(&c, &b[j]));
            }
            q[shift] = c;
        }
        r.truncate(db);
        (trim(f, q), trim(f, r))
    }

    pub fn rem<F: PrimeField>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        divrem(f, a, b).1
    }

    /// Monic greatest common divisor (empty when both inputs are zero).
    pub fn gcd<F: PrimeField>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> Vec<F::Elem> {
        let mut a = trim(f, a.to_vec());
        let mut b = trim(f, b.to_vec());
        while !b.is_empty() {
            let r = rem(f, &a, &b);
            a = b;
            b = r;
        }
        monic(f, &a)
    }

    /// `base^e mod m` for monic `m` of degree >= 1.
    pub fn powmod<F: PrimeField>(
        f: &F,
        base: &[F::Elem],
        e: &BigUint,
        m: &[F::Elem],
    ) -> Vec<F::Elem> {
        let base = trim(f, f.poly_rem_monic(base, m));
        let mut r = trim(f, f.poly_rem_monic(&[f.one()], m));
        for i in (0..e.bits()).rev() {
            r = trim(f, f.poly_rem_monic(&f.poly_mul(&r, &r), m));
            if e.bit(i) {
                r = trim(f, f.poly_rem_monic(&f.poly_mul(&r, &base), m));
            }
        }
        r
    }

    /// `a * b mod m` for monic `m`.
    pub fn mulmod<F: PrimeField>(
        f: &F,
        a: &[F::Elem],
        b: &[F::Elem],
        m: &[F::Elem],
    ) -> Vec<F::Elem> {
        trim(f, f.poly_rem_monic(&f.poly_mul(a, b), m))
    }

    /// Resultant over the field by the Euclidean recurrence
    /// `Res(A, B) = (-1)^(deg A deg B) lc(B)^(deg A - deg R) Res(B, R)`.
    pub fn resultant<F: PrimeField>(f: &F, a: &[F::Elem], b: &[F::Elem]) -> F::Elem {
        let mut a = trim(f, a.to_vec());
        let mut b = trim(f, b.to_vec());
        if a.is_empty() || b.is_empty() {
            return f.zero();
        }
        let mut acc = f.one();
        loop {
            let da = a.len() - 1;
            let db = b.len() - 1;
            if db == 0 {
                return f.mul(&acc, &f.pow(&b[0], &BigUint::from(da)));
            }
            let r = rem(f, &a, &b);
            if r.is_empty() {
                return f.zero();
            }
            let dr = r.len() - 1;
            if (da * db) % 2 == 1 {
                acc = f.neg(&acc);
            }
            acc = f.mul(&acc, &f.pow(&b[db], &BigUint::from(da - dr)));
            a = b;
            b = r;
        }
    }
}
