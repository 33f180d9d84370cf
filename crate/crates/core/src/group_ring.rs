//! The group ring `F_l[G]` of a cyclic group `G = <sigma>` of order `n`,
//! with the character idempotents `e_j = n^-1 * sum_i chi_j(sigma^i)^-1 sigma^i`.
//!
//! Only the case `l = 1 (mod n)` is handled here, where every character
//! value lies in `F_l`. Elements are coefficient vectors indexed by the
//! exponent of `sigma`; multiplication is cyclic convolution.

use std::ops::{Add, Mul};

use crate::error::{domain, Error, Result};
use crate::modular::{inv_mod, is_prime_u64, mul_mod, pow_mod};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRingElt {
    modulus: u64,
    coeffs: Vec<u64>,
}

impl GroupRingElt {
    pub fn new(modulus: u64, coeffs: Vec<u64>) -> Result<Self> {
        let n = coeffs.len() as u64;
        if n == 0 {
            return Err(domain!("group ring of the empty group"));
        }
        if modulus < 3 || !is_prime_u64(modulus) {
            return Err(domain!("group ring modulus {modulus} is not an odd prime"));
        }
        if n.is_multiple_of(modulus) {
            return Err(domain!("gcd(l, n) != 1 for l = {modulus}, n = {n}"));
        }
        let coeffs = coeffs.into_iter().map(|c| c % modulus).collect();
        Ok(GroupRingElt { modulus, coeffs })
    }

    pub fn zero(modulus: u64, n: usize) -> Result<Self> {
        Self::new(modulus, vec![0; n])
    }

    pub fn one(modulus: u64, n: usize) -> Result<Self> {
        Self::sigma_power(modulus, n, 0)
    }

    /// The basis element `sigma^i`.
    pub fn sigma_power(modulus: u64, n: usize, i: usize) -> Result<Self> {
        let mut c = vec![0; n];
        c[i % n] = 1;
        Self::new(modulus, c)
    }

    /// Multiply by a scalar of `F_l`.
    pub fn scale(&self, c: u64) -> Self {
        let c = c % self.modulus;
        GroupRingElt {
            modulus: self.modulus,
            coeffs: self
                .coeffs
                .iter()
                .map(|&a| mul_mod(a, c, self.modulus))
                .collect(),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    fn check_compatible(&self, other: &Self) {
        assert_eq!(self.modulus, other.modulus, "group ring modulus mismatch");
        assert_eq!(self.order(), other.order(), "group order mismatch");
    }
}

impl Add for &GroupRingElt {
    type Output = GroupRingElt;

    fn add(self, rhs: &GroupRingElt) -> GroupRingElt {
        self.check_compatible(rhs);
        let p = self.modulus;
        GroupRingElt {
            modulus: p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(&a, &b)| (a + b) % p)
                .collect(),
        }
    }
}

impl Mul for &GroupRingElt {
    type Output = GroupRingElt;

    fn mul(self, rhs: &GroupRingElt) -> GroupRingElt {
        self.check_compatible(rhs);
        let p = self.modulus;
        let n = self.order();
        let mut out = vec![0u64; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                let idx = (i + j) % n;
                out[idx] = (out[idx] + mul_mod(a, b, p)) % p;
            }
        }
        GroupRingElt { modulus: p, coeffs: out }
    }
}

/// The smallest positive primitive `n`-th root of unity modulo prime `l`.
pub fn smallest_primitive_root_of_unity(n: u64, l: u64) -> Result<u64> {
    if !(l - 1).is_multiple_of(n) {
        return Err(Error::UnsupportedEmbedding(format!(
            "l = {l} is not 1 mod n = {n}"
        )));
    }
    let prime_factors: Vec<u64> = {
        let mut fs = Vec::new();
        let mut r = n;
        let mut d = 2;
        while d * d <= r {
            if r.is_multiple_of(d) {
                fs.push(d);
                while r.is_multiple_of(d) {
                    r /= d;
                }
            }
            d += 1;
        }
        if r > 1 {
            fs.push(r);
        }
        fs
    };
    (1..l)
        .find(|&w| pow_mod(w, n, l) == 1 && prime_factors.iter().all(|&q| pow_mod(w, n / q, l) != 1))
        .ok_or_else(|| Error::Integrity(format!("no primitive {n}-th root mod {l}")))
}

fn check_embedding(n: u64, l: u64) -> Result<()> {
    if l < 3 || !is_prime_u64(l) {
        return Err(domain!("l = {l} is not an odd prime"));
    }
    if n == 0 || n.is_multiple_of(l) {
        return Err(domain!("gcd(l, n) != 1 for l = {l}, n = {n}"));
    }
    if !(l - 1).is_multiple_of(n) {
        return Err(Error::UnsupportedEmbedding(format!(
            "character values of order {n} do not lie in F_{l}"
        )));
    }
    Ok(())
}

/// `chi_j(sigma^i) = w^(i*j)` where `w` is the smallest primitive `n`-th root.
pub fn character_value(j: u64, i: u64, n: u64, l: u64) -> Result<u64> {
    check_embedding(n, l)?;
    let w = smallest_primitive_root_of_unity(n, l)?;
    Ok(pow_mod(w, (i * j) % n, l))
}

/// The idempotent `e_{chi_j}` in `F_l[Z/n]`.
pub fn idempotent(j: u64, n: u64, l: u64) -> Result<GroupRingElt> {
    check_embedding(n, l)?;
    let w = smallest_primitive_root_of_unity(n, l)?;
    let n_inv = inv_mod(n % l, l).expect("n invertible mod l");
    let w_inv = inv_mod(w, l).expect("root of unity is a unit");
    let coeffs = (0..n)
        .map(|i| mul_mod(n_inv, pow_mod(w_inv, (i * j) % n, l), l))
        .collect();
    GroupRingElt::new(l, coeffs)
}

/// The norm element `N = 1 + sigma^(n/2)` of the index-2 subgroup.
pub fn norm_element(n: u64, l: u64) -> Result<GroupRingElt> {
    if !n.is_multiple_of(2) {
        return Err(domain!("norm element needs even group order, got {n}"));
    }
    let one = GroupRingElt::one(l, n as usize)?;
    let half = GroupRingElt::sigma_power(l, n as usize, (n / 2) as usize)?;
    Ok(&one + &half)
}

/// The scalar by which `N = 1 + sigma^(n/2)` acts on `e_{chi_j}`:
/// `1 + chi_j(sigma)^(n/2)`, i.e. 2 when `ord(chi_j) | n/2` and 0 otherwise.
pub fn norm_element_action(j: u64, n: u64, l: u64) -> Result<u64> {
    check_embedding(n, l)?;
    if !n.is_multiple_of(2) {
        return Err(domain!("norm element needs even group order, got {n}"));
    }
    let w = smallest_primitive_root_of_unity(n, l)?;
    Ok((1 + pow_mod(w, (j * (n / 2)) % n, l)) % l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_character_averages() {
        let e = idempotent(0, 4, 5).unwrap();
        assert_eq!(e.coeffs(), &[4, 4, 4, 4]);
    }

    #[test]
    fn idempotency_small() {
        let e = idempotent(1, 4, 5).unwrap();
        assert_eq!(&e * &e, e);
    }

    #[test]
    fn completeness_n8() {
        let mut sum = GroupRingElt::zero(17, 8).unwrap();
        for j in 0..8 {
            sum = &sum + &idempotent(j, 8, 17).unwrap();
        }
        assert_eq!(sum, GroupRingElt::one(17, 8).unwrap());
    }

    #[test]
    fn norm_element_scalars() {
        assert_eq!(norm_element_action(0, 8, 17).unwrap(), 2);
        assert_eq!(norm_element_action(1, 8, 17).unwrap(), 0);
        assert_eq!(norm_element_action(2, 8, 17).unwrap(), 2);
        // explicit convolution of N with e_{chi_2}
        let nrm = norm_element(8, 17).unwrap();
        let e2 = idempotent(2, 8, 17).unwrap();
        assert_eq!(&nrm * &e2, e2.scale(2));
    }

    #[test]
    fn smallest_roots() {
        assert_eq!(smallest_primitive_root_of_unity(4, 5).unwrap(), 2);
        assert_eq!(smallest_primitive_root_of_unity(8, 17).unwrap(), 2);
        assert_eq!(smallest_primitive_root_of_unity(16, 17).unwrap(), 3);
    }

    #[test]
    fn embedding_errors() {
        assert!(matches!(idempotent(1, 4, 7), Err(Error::UnsupportedEmbedding(_))));
        assert!(matches!(idempotent(1, 4, 9), Err(Error::Domain(_))));
        assert!(GroupRingElt::new(5, vec![1; 5]).is_err());
    }
}
