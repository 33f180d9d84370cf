//! Negacyclic convolution `Z[x]/(x^L + 1)` through number-theoretic
//! transforms modulo several word primes, recombined by CRT.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::Signed;
use rayon::prelude::*;

use crate::fpoly::{Fp64, PrimeField};
use crate::modular::{inv_mod, mul_mod, ntt_friendly_primes, pow_mod};
use crate::zpoly::Crt;

/// Transform lengths up to `2^(MAX_LOG_LEN)`; the primes are `1 mod 2^(MAX_LOG_LEN + 1)`.
pub const MAX_LOG_LEN: u32 = 19;

struct NttPrime {
    p: u64,
    // primitive 2^(MAX_LOG_LEN + 1)-th root of unity
    root: u64,
}

const ROOT_ORDER: u64 = 1 << (MAX_LOG_LEN + 1);

fn primes() -> &'static [NttPrime] {
    static PRIMES: OnceLock<Vec<NttPrime>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        ntt_friendly_primes(96, MAX_LOG_LEN + 1)
            .into_iter()
            .map(|p| {
                // any quadratic non-residue raised to (p-1)/2^e has order 2^e
                let x = (2..p)
                    .find(|&x| pow_mod(x, (p - 1) / 2, p) == p - 1)
                    .unwrap();
                NttPrime {
                    p,
                    root: pow_mod(x, (p - 1) / ROOT_ORDER, p),
                }
            })
            .collect()
    })
}

fn bit_reverse(a: &mut [u64]) {
    let n = a.len();
    let mut j = 0;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
}

/// In-place cyclic transform of length `a.len()` with primitive root `w`.
fn transform(a: &mut [u64], w: u64, p: u64) {
    let n = a.len();
    bit_reverse(a);
    let mut len = 2;
    while len <= n {
        let wl = pow_mod(w, (n / len) as u64, p);
        for start in (0..n).step_by(len) {
            let mut t = 1u64;
            for i in 0..len / 2 {
                let u = a[start + i];
                let v = mul_mod(a[start + i + len / 2], t, p);
                a[start + i] = if u + v >= p { u + v - p } else { u + v };
                a[start + i + len / 2] = if u >= v { u - v } else { u + p - v };
                t = mul_mod(t, wl, p);
            }
        }
        len <<= 1;
    }
}

fn negacyclic_mod(a: &[u64], b: &[u64], prime: &NttPrime) -> Vec<u64> {
    let p = prime.p;
    let n = a.len();
    let psi = pow_mod(prime.root, ROOT_ORDER / (2 * n as u64), p);
    let omega = mul_mod(psi, psi, p);
    let mut fa = Vec::with_capacity(n);
    let mut fb = Vec::with_capacity(n);
    let mut tw = 1u64;
    for i in 0..n {
        fa.push(mul_mod(a[i], tw, p));
        fb.push(mul_mod(b[i], tw, p));
        tw = mul_mod(tw, psi, p);
    }
    transform(&mut fa, omega, p);
    transform(&mut fb, omega, p);
    for i in 0..n {
        fa[i] = mul_mod(fa[i], fb[i], p);
    }
    let omega_inv = inv_mod(omega, p).unwrap();
    transform(&mut fa, omega_inv, p);
    let n_inv = inv_mod(n as u64, p).unwrap();
    let psi_inv = inv_mod(psi, p).unwrap();
    let mut tw = n_inv;
    for x in fa.iter_mut() {
        *x = mul_mod(*x, tw, p);
        tw = mul_mod(tw, psi_inv, p);
    }
    fa
}

/// `a * b mod (x^L + 1)` for equal power-of-two lengths `L`.
pub fn negacyclic_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len();
    assert_eq!(n, b.len(), "negacyclic operands must have equal length");
    assert!(n.is_power_of_two(), "negacyclic length must be a power of two");
    assert!(n.trailing_zeros() <= MAX_LOG_LEN, "transform length too large");
    let bits = |v: &[BigInt]| v.iter().map(|c| c.abs().bits()).max().unwrap_or(0);
    // |c_i| <= L * max|a| * max|b|, plus one bit for the sign
    let need = bits(a) + bits(b) + n.trailing_zeros() as u64 + 2;
    let count = need.div_ceil(61) as usize;
    let table = primes();
    assert!(count <= table.len(), "coefficients too large for the NTT prime table");
    let residues: Vec<Vec<u64>> = table[..count]
        .par_iter()
        .map(|prime| {
            let f = Fp64::new(prime.p);
            let ra: Vec<u64> = a.iter().map(|c| f.lift_bigint(c)).collect();
            let rb: Vec<u64> = b.iter().map(|c| f.lift_bigint(c)).collect();
            negacyclic_mod(&ra, &rb, prime)
        })
        .collect();
    (0..n)
        .map(|i| {
            let mut crt = Crt::new();
            for (r, prime) in residues.iter().zip(table) {
                crt.push(r[i], prime.p);
            }
            crt.symmetric()
        })
        .collect()
}

/// Schoolbook negacyclic product, the reference path for small lengths.
pub fn negacyclic_mul_schoolbook(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len();
    assert_eq!(n, b.len(), "negacyclic operands must have equal length");
    let mut out = vec![BigInt::default(); n];
    for (i, x) in a.iter().enumerate() {
        if x.sign() == num_bigint::Sign::NoSign {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            let prod = x * y;
            if i + j < n {
                out[i + j] += prod;
            } else {
                out[i + j - n] -= prod;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wraparound() {
        let n = 8;
        let mut a = vec![BigInt::from(0); n];
        let mut b = vec![BigInt::from(0); n];
        a[n - 1] = BigInt::from(1);
        b[1] = BigInt::from(1);
        let c = negacyclic_mul(&a, &b);
        assert_eq!(c[0], BigInt::from(-1));
        assert!(c[1..].iter().all(|x| *x == BigInt::from(0)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn transform_matches_schoolbook(
            log_len in 0u32..8,
            seed in any::<u64>(),
            big in any::<bool>(),
        ) {
            use rand::{Rng, SeedableRng};
            let n = 1usize << log_len;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let gen = |rng: &mut rand_chacha::ChaCha8Rng| -> BigInt {
                let v = BigInt::from(rng.gen_range(-1_000_000_000i64..1_000_000_000));
                if big { v.pow(7) } else { v }
            };
            let a: Vec<BigInt> = (0..n).map(|_| gen(&mut rng)).collect();
            let b: Vec<BigInt> = (0..n).map(|_| gen(&mut rng)).collect();
            prop_assert_eq!(negacyclic_mul(&a, &b), negacyclic_mul_schoolbook(&a, &b));
        }
    }
}
