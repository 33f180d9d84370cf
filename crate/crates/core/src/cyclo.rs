//! Exact arithmetic in `Z[zeta_m]` (`m` a power of two) and in the ring of
//! integers `Z[x]/(g_k)` of the real subfield, where `x = zeta + zeta^-1`.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, integrity, Result};
use crate::ntt;
use crate::tower::TowerLevel;
use crate::zpoly::{self, ZPoly};

/// Below this length products use schoolbook negacyclic convolution.
pub const NTT_THRESHOLD: usize = 64;

/// An element of `Z[zeta_m]` in the power basis `1, zeta, ..., zeta^(m/2 - 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CycInt {
    m: u64,
    coeffs: Vec<BigInt>,
}

fn check_modulus(m: u64) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(domain!("cyclotomic modulus {m} must be a power of two >= 2"));
    }
    Ok(())
}

impl CycInt {
    /// Builds an element from coefficients of `zeta^i` for any `i`, folding
    /// with `zeta^(m/2) = -1`.
    pub fn from_coeffs(m: u64, raw: Vec<BigInt>) -> Result<Self> {
        check_modulus(m)?;
        let half = (m / 2) as usize;
        let mut coeffs = vec![BigInt::zero(); half];
        for (i, c) in raw.into_iter().enumerate() {
            let e = i % m as usize;
            if e < half {
                coeffs[e] += c;
            } else {
                coeffs[e - half] -= c;
            }
        }
        Ok(CycInt { m, coeffs })
    }

    pub fn from_i64s(m: u64, raw: &[i64]) -> Result<Self> {
        Self::from_coeffs(m, raw.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn zero(m: u64) -> Result<Self> {
        Self::from_coeffs(m, Vec::new())
    }

    pub fn constant(m: u64, c: BigInt) -> Result<Self> {
        Self::from_coeffs(m, vec![c])
    }

    pub fn one(m: u64) -> Result<Self> {
        Self::constant(m, BigInt::one())
    }

    /// `c * zeta^e` for any exponent `e`.
    pub fn monomial(m: u64, e: u64, c: BigInt) -> Result<Self> {
        check_modulus(m)?;
        let mut raw = vec![BigInt::zero(); m as usize];
        raw[(e % m) as usize] = c;
        Self::from_coeffs(m, raw)
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational integer this element equals, if it lies in `Z`.
    pub fn as_integer(&self) -> Option<&BigInt> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.m != other.m {
            return Err(domain!(
                "mismatched cyclotomic moduli {} and {}",
                self.m,
                other.m
            ));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(CycInt {
            m: self.m,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(CycInt {
            m: self.m,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = if self.coeffs.len() < NTT_THRESHOLD {
            ntt::negacyclic_mul_schoolbook(&self.coeffs, &other.coeffs)
        } else {
            ntt::negacyclic_mul(&self.coeffs, &other.coeffs)
        };
        Ok(CycInt { m: self.m, coeffs })
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        CycInt {
            m: self.m,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Exact division of every coefficient, if `d` divides all of them.
    pub fn exact_div(&self, d: &BigInt) -> Option<Self> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(d);
            if !r.is_zero() {
                return None;
            }
            coeffs.push(q);
        }
        Some(CycInt { m: self.m, coeffs })
    }

    /// The automorphism `zeta -> zeta^t`.
    pub fn galois_apply(&self, t: u64) -> Result<Self> {
        if t.is_multiple_of(2) {
            return Err(domain!("galois exponent {t} is not coprime to {}", self.m));
        }
        let m = self.m;
        let mut raw = vec![BigInt::zero(); m as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = ((i as u128 * t as u128) % m as u128) as usize;
            raw[e] += c;
        }
        Self::from_coeffs(m, raw)
    }

    /// Complex conjugation, `zeta -> zeta^-1`.
    pub fn conj(&self) -> Self {
        self.galois_apply(self.m - 1)
            .expect("m - 1 is odd for m a power of two")
    }

    /// The representing polynomial of degree `< m/2`.
    pub fn to_poly(&self) -> ZPoly {
        zpoly::trim(self.coeffs.clone())
    }

    /// Floating-point image under `zeta -> exp(2 pi i t / m)`.
    pub fn embed(&self, t: u64) -> (f64, f64) {
        let m = self.m as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let ang = 2.0 * std::f64::consts::PI * ((i as u64 * t) % self.m) as f64 / m;
            let v = c.to_f64().unwrap_or(f64::NAN);
            re += v * ang.cos();
            im += v * ang.sin();
        }
        (re, im)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr for &CycInt {
            type Output = CycInt;
            fn $method(self, rhs: &CycInt) -> CycInt {
                self.$inner(rhs).expect("mismatched cyclotomic moduli")
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        CycInt {
            m: self.m,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

/// `Phi_m(x) = x^(m/2) + 1`.
pub fn cyclotomic_poly(m: u64) -> Result<ZPoly> {
    check_modulus(m)?;
    let mut p = vec![BigInt::zero(); (m / 2 + 1) as usize];
    p[0] = BigInt::one();
    p[(m / 2) as usize] = BigInt::one();
    Ok(p)
}

/// `Nm_{Q(zeta_m)/Q}(a) = Res(Phi_m, A)`, signed. `Phi_m` is monic, so no
/// leading-coefficient correction is needed.
pub fn field_norm(a: &CycInt) -> Result<BigInt> {
    if a.is_zero() {
        return Ok(BigInt::zero());
    }
    if let Some(c) = a.as_integer() {
        return Ok(num_traits::pow(c.clone(), (a.m / 2) as usize));
    }
    zpoly::resultant(&cyclotomic_poly(a.m)?, &a.to_poly())
}

/// The norm as the product of all `m/2` conjugates, computed in `Z[zeta_m]`.
pub fn field_norm_by_conjugates(a: &CycInt) -> Result<BigInt> {
    let mut acc = CycInt::one(a.m)?;
    for t in (1..a.m).step_by(2) {
        acc = acc.try_mul(&a.galois_apply(t)?)?;
    }
    acc.as_integer()
        .cloned()
        .ok_or_else(|| integrity!("conjugate product is not a rational integer"))
}

fn minpoly_cache() -> &'static Mutex<HashMap<u32, Arc<ZPoly>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<ZPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Minimal polynomial `g_k` of `zeta_{2^k} + zeta_{2^k}^-1`:
/// `g_3 = x^2 - 2` and `g_{k+1}(x) = g_k(x^2 - 2)`.
pub fn minimal_polynomial(k: u32) -> Result<Arc<ZPoly>> {
    TowerLevel::new(k)?;
    if let Some(g) = minpoly_cache().lock().unwrap().get(&k) {
        return Ok(g.clone());
    }
    let g = if k == 3 {
        zpoly::from_i64s(&[-2, 0, 1])
    } else {
        let prev = minimal_polynomial(k - 1)?;
        let sub = zpoly::from_i64s(&[-2, 0, 1]);
        // Horner evaluation of prev at x^2 - 2
        let mut acc: ZPoly = Vec::new();
        for c in prev.iter().rev() {
            acc = zpoly::add(&zpoly::mul(&acc, &sub), std::slice::from_ref(c));
        }
        acc
    };
    let g = Arc::new(g);
    minpoly_cache().lock().unwrap().insert(k, g.clone());
    Ok(g)
}

/// Reduce modulo a monic polynomial without division.
pub fn reduce_monic(a: &[BigInt], g: &[BigInt]) -> ZPoly {
    let dg = g.len() - 1;
    let mut r = a.to_vec();
    while r.len() > dg {
        let top = r.len() - 1;
        let c = r[top].clone();
        if !c.is_zero() {
            let shift = top - dg;
            for j in 0..dg {
                r[shift + j] -= &c * &g[j];
            }
        }
        r.pop();
    }
    zpoly::trim(r)
}

/// An element of `Z[x]/(g_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealElt {
    k: u32,
    coeffs: Vec<BigInt>,
}

impl RealElt {
    pub fn from_poly(k: u32, p: &[BigInt]) -> Result<Self> {
        let g = minimal_polynomial(k)?;
        let n = g.len() - 1;
        let mut coeffs = reduce_monic(p, &g);
        coeffs.resize(n, BigInt::zero());
        Ok(RealElt { k, coeffs })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Coefficients of `x^i`, length exactly `2^(k-2)`.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn to_poly(&self) -> ZPoly {
        zpoly::trim(self.coeffs.clone())
    }

    pub fn mul(&self, other: &RealElt) -> Result<Self> {
        if self.k != other.k {
            return Err(domain!("mismatched levels {} and {}", self.k, other.k));
        }
        RealElt::from_poly(self.k, &zpoly::mul(&self.coeffs, &other.coeffs))
    }

    /// `Nm_{K_k^+/Q}` as `Res(g_k, P)`.
    pub fn norm(&self) -> Result<BigInt> {
        let p = self.to_poly();
        if p.is_empty() {
            return Ok(BigInt::zero());
        }
        zpoly::resultant(&minimal_polynomial(self.k)?, &p)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        zpoly::eval_f64(&self.coeffs, x)
    }
}

/// `V_a(x)` with `V_1 = 1`, `V_2 = x`, `V_(j+1) = x V_j - V_(j-1)`, reduced
/// modulo `g` after each step. `V_a(zeta + zeta^-1) = (zeta^a - zeta^-a)/(zeta - zeta^-1)`.
pub fn chebyshev_quotient(a: u64, g: &[BigInt]) -> ZPoly {
    let mut prev: ZPoly = Vec::new();
    let mut cur: ZPoly = vec![BigInt::one()];
    for _ in 1..a {
        let mut shifted = vec![BigInt::zero()];
        shifted.extend(cur.iter().cloned());
        let next = reduce_monic(&zpoly::sub(&shifted, &prev), g);
        prev = cur;
        cur = next;
    }
    reduce_monic(&cur, g)
}

/// The cyclotomic unit `xi_a = (zeta^a - zeta^-a)/(zeta - zeta^-1)` of the
/// real subfield, for odd `1 < a < 2^k`.
pub fn cyclotomic_unit(k: u32, a: u64) -> Result<RealElt> {
    let level = TowerLevel::new(k)?;
    if a.is_multiple_of(2) || a <= 1 || a >= level.conductor() {
        return Err(domain!("cyclotomic unit index a = {a} must be odd in (1, 2^{k})"));
    }
    let g = minimal_polynomial(k)?;
    RealElt::from_poly(k, &chebyshev_quotient(a, &g))
}

/// True iff `Nm(xi_a) = +-1`.
pub fn unit_norm_check(k: u32, a: u64) -> Result<bool> {
    let xi = cyclotomic_unit(k, a)?;
    Ok(xi.norm()?.abs().is_one())
}
