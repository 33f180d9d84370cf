//! Dense integer polynomials and exact resultants.
//!
//! The primary resultant is multi-modular: residues modulo word primes below
//! `2^62`, recombined by CRT, with the prime budget fixed in advance from the
//! Hadamard bound `|Res(A, B)| <= ||A||^deg B * ||B||^deg A`. The
//! subresultant PRS over `Z` is kept as an independent cross-check.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::sync::OnceLock;

use crate::error::{domain, integrity, Result};
use crate::fpoly::{poly, Fp64, PrimeField};
use crate::modular::{inv_mod, is_prime_u64, mul_mod};

/// Little-endian integer polynomial; the zero polynomial is empty.
pub type ZPoly = Vec<BigInt>;

pub fn trim(mut a: ZPoly) -> ZPoly {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

pub fn from_i64s(c: &[i64]) -> ZPoly {
    trim(c.iter().map(|&v| BigInt::from(v)).collect())
}

pub fn degree(a: &[BigInt]) -> Option<usize> {
    a.len().checked_sub(1)
}

pub fn add(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    trim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&z) + b.get(i).unwrap_or(&z))
            .collect(),
    )
}

pub fn sub(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    trim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z))
            .collect(),
    )
}

pub fn mul(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

pub fn scale(a: &[BigInt], c: &BigInt) -> ZPoly {
    trim(a.iter().map(|x| x * c).collect())
}

pub fn eval_f64(a: &[BigInt], x: f64) -> f64 {
    a.iter()
        .rev()
        .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
}

fn norm_sq_bits(a: &[BigInt]) -> u64 {
    let s: BigInt = a.iter().map(|c| c * c).sum();
    s.bits()
}

/// Bits sufficient to hold `2 |Res(a, b)| + 1`.
pub fn hadamard_bound_bits(a: &[BigInt], b: &[BigInt]) -> u64 {
    let da = degree(a).unwrap_or(0) as u64;
    let db = degree(b).unwrap_or(0) as u64;
    (db * norm_sq_bits(a) + da * norm_sq_bits(b)).div_ceil(2) + 2
}

/// Word primes used for CRT work, descending from `2^62`.
pub(crate) fn crt_primes() -> impl Iterator<Item = u64> {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    let cached = CACHE.get_or_init(|| {
        ((1u64 << 61)..(1u64 << 62))
            .rev()
            .step_by(2)
            .filter(|&p| is_prime_u64(p))
            .take(1024)
            .collect()
    });
    cached.iter().copied()
}

fn reduce_poly(a: &[BigInt], p: u64) -> Vec<u64> {
    let f = Fp64::new(p);
    a.iter().map(|c| f.lift_bigint(c)).collect()
}

/// Incremental CRT accumulator; `push` order is part of the result only
/// through the final symmetric lift, which is order independent.
pub(crate) struct Crt {
    value: BigUint,
    modulus: BigUint,
}

impl Crt {
    pub fn new() -> Self {
        Crt {
            value: BigUint::zero(),
            modulus: BigUint::one(),
        }
    }

    pub fn push(&mut self, residue: u64, p: u64) {
        let cur = (&self.value % p).to_u64().unwrap();
        let m_mod_p = (&self.modulus % p).to_u64().unwrap();
        let inv = inv_mod(m_mod_p, p).expect("CRT moduli are coprime");
        let diff = (residue + p - cur) % p;
        let t = mul_mod(diff, inv, p);
        self.value += &self.modulus * t;
        self.modulus *= p;
    }

    pub fn modulus_bits(&self) -> u64 {
        self.modulus.bits()
    }

    /// Representative in `(-M/2, M/2]`.
    pub fn symmetric(&self) -> BigInt {
        let half = &self.modulus >> 1;
        if self.value > half {
            BigInt::from(self.value.clone()) - BigInt::from(self.modulus.clone())
        } else {
            BigInt::from(self.value.clone())
        }
    }
}

/// Exact `Res(a, b)` by CRT over word primes.
pub fn resultant(a: &[BigInt], b: &[BigInt]) -> Result<BigInt> {
    let a = trim(a.to_vec());
    let b = trim(b.to_vec());
    if a.is_empty() || b.is_empty() {
        return Err(domain!("resultant of the zero polynomial"));
    }
    let bits = hadamard_bound_bits(&a, &b);
    let lca = a.last().unwrap();
    let lcb = b.last().unwrap();
    // primes dividing a leading coefficient change the degree mod p
    let mut primes = Vec::new();
    let mut budget = 0u64;
    for p in crt_primes() {
        if (lca % p).is_zero() || (lcb % p).is_zero() {
            continue;
        }
        primes.push(p);
        budget += 61;
        if budget > bits {
            break;
        }
    }
    let residues: Vec<u64> = primes
        .par_iter()
        .map(|&p| {
            let f = Fp64::new(p);
            poly::resultant(&f, &reduce_poly(&a, p), &reduce_poly(&b, p))
        })
        .collect();
    let mut crt = Crt::new();
    for (&r, &p) in residues.iter().zip(&primes) {
        crt.push(r, p);
    }
    if crt.modulus_bits() <= bits {
        return Err(integrity!("CRT prime budget exhausted for a {bits}-bit resultant"));
    }
    Ok(crt.symmetric())
}

/// Pseudo-remainder `lc(b)^(deg a - deg b + 1) a mod b`.
pub fn pseudo_rem(a: &[BigInt], b: &[BigInt]) -> ZPoly {
    let db = degree(b).expect("pseudo-division by zero");
    let mut r = trim(a.to_vec());
    if r.len() <= db {
        return r;
    }
    let lcb = b[db].clone();
    let mut e = r.len() - db;
    while r.len() > db {
        let top = r.len() - 1;
        let c = r[top].clone();
        let shift = top - db;
        for x in r.iter_mut() {
            *x *= &lcb;
        }
        for j in 0..=db {
            r[shift + j] -= &c * &b[j];
        }
        r = trim(r);
        e -= 1;
    }
    let f = num_traits::pow(lcb, e);
    scale(&r, &f)
}

fn content(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// `Res(a, b)` via the subresultant PRS over `Z`.
pub fn resultant_subresultant(a: &[BigInt], b: &[BigInt]) -> Result<BigInt> {
    let mut a = trim(a.to_vec());
    let mut b = trim(b.to_vec());
    if a.is_empty() || b.is_empty() {
        return Err(domain!("resultant of the zero polynomial"));
    }
    let mut s = BigInt::one();
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
        if (a.len() - 1) % 2 == 1 && (b.len() - 1) % 2 == 1 {
            s = -s;
        }
    }
    let ca = content(&a);
    let cb = content(&b);
    let t = num_traits::pow(ca.clone(), b.len() - 1) * num_traits::pow(cb.clone(), a.len() - 1);
    a = a.iter().map(|c| c / &ca).collect();
    b = b.iter().map(|c| c / &cb).collect();
    let mut g = BigInt::one();
    let mut h = BigInt::one();
    loop {
        let da = a.len() - 1;
        let db = b.len() - 1;
        if db == 0 {
            let lcb = b[0].clone();
            // h^(1 - da) * lcb^da
            let res = if da == 0 {
                h.clone()
            } else {
                num_traits::pow(lcb, da) / num_traits::pow(h.clone(), da - 1)
            };
            return Ok(s * t * res);
        }
        let delta = da - db;
        if da % 2 == 1 && db % 2 == 1 {
            s = -s;
        }
        let r = pseudo_rem(&a, &b);
        if r.is_empty() {
            return Ok(BigInt::zero());
        }
        a = b;
        let divisor = &g * num_traits::pow(h.clone(), delta);
        b = r.iter().map(|c| c / &divisor).collect();
        g = a.last().unwrap().clone();
        h = if delta == 0 {
            h
        } else {
            num_traits::pow(g.clone(), delta) / num_traits::pow(h.clone(), delta - 1)
        };
    }
}

pub fn is_zero_poly(a: &[BigInt]) -> bool {
    a.iter().all(|c| c.is_zero())
}

pub fn max_abs_coeff(a: &[BigInt]) -> BigInt {
    a.iter().map(|c| c.abs()).max().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn resultant_examples() {
        let r = resultant(&from_i64s(&[1, 0, 1]), &from_i64s(&[-1, 1])).unwrap();
        assert_eq!(r, BigInt::from(2));
        let phi4 = from_i64s(&[1, 0, 1]);
        assert_eq!(resultant(&phi4, &phi4).unwrap(), BigInt::zero());
        let r = resultant(&from_i64s(&[-2, 0, 1]), &from_i64s(&[-3, 0, 1])).unwrap();
        assert_eq!(r, BigInt::one());
        assert!(resultant(&[], &phi4).is_err());
    }

    #[test]
    fn subresultant_examples() {
        let r = resultant_subresultant(&from_i64s(&[1, 0, 1]), &from_i64s(&[-1, 1])).unwrap();
        assert_eq!(r, BigInt::from(2));
        let r = resultant_subresultant(&from_i64s(&[-2, 0, 1]), &from_i64s(&[-3, 0, 1])).unwrap();
        assert_eq!(r, BigInt::one());
        // Res(x - a, x - b) = a - b ... sign: Res(x-3, x-5) = (3 - 5) = -2
        let r = resultant_subresultant(&from_i64s(&[-3, 1]), &from_i64s(&[-5, 1])).unwrap();
        assert_eq!(r, BigInt::from(-2));
        assert_eq!(resultant(&from_i64s(&[-3, 1]), &from_i64s(&[-5, 1])).unwrap(), BigInt::from(-2));
    }

    #[test]
    fn constant_arguments() {
        // Res(c, b) = c^deg b
        let r = resultant(&from_i64s(&[3]), &from_i64s(&[1, 2, 1])).unwrap();
        assert_eq!(r, BigInt::from(9));
        let r = resultant_subresultant(&from_i64s(&[3]), &from_i64s(&[1, 2, 1])).unwrap();
        assert_eq!(r, BigInt::from(9));
    }

    #[test]
    fn leading_coefficient_divisible_by_crt_prime() {
        let p = crt_primes().next().unwrap() as i64;
        let a = vec![BigInt::from(1), BigInt::from(p)];
        let b = from_i64s(&[5, 0, 1]);
        assert_eq!(
            resultant(&a, &b).unwrap(),
            resultant_subresultant(&a, &b).unwrap()
        );
    }

    fn arb_poly() -> impl Strategy<Value = ZPoly> {
        prop::collection::vec(-1_000_000i64..=1_000_000, 1..=17)
            .prop_map(|v| from_i64s(&v))
            .prop_filter("nonzero", |p| !p.is_empty())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn crt_matches_subresultant(a in arb_poly(), b in arb_poly()) {
            prop_assert_eq!(resultant(&a, &b).unwrap(), resultant_subresultant(&a, &b).unwrap());
        }
    }
}
