//! Level constants of the 2-power cyclotomic tower, the decomposition
//! `(Z/2^k)^x = <-1> x <5>`, and Dirichlet characters of 2-power modulus.
//!
//! Character values are never represented as complex numbers. A value is an
//! exponent `e` in `Z/m` meaning `zeta_m^e`, with `-1 = zeta_m^(m/2)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Highest level for which the dense discrete-log table is built.
pub const TABLE_MAX_LEVEL: u32 = 16;

/// Highest level supported by the word-sized residue arithmetic.
pub const MAX_LEVEL: u32 = 40;

/// Constants attached to level `k` of the tower: `K_k = Q(zeta_{2^k})` and
/// its maximal real subfield of degree `n = 2^(k-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TowerLevel {
    k: u32,
}

impl TowerLevel {
    pub fn new(k: u32) -> Result<Self> {
        if !(3..=MAX_LEVEL).contains(&k) {
            return Err(domain!("tower level k = {k} outside [3, {MAX_LEVEL}]"));
        }
        Ok(TowerLevel { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Degree of the real subfield, `2^(k-2)`.
    pub fn degree(&self) -> u64 {
        1 << (self.k - 2)
    }

    /// Conductor `2^k`.
    pub fn conductor(&self) -> u64 {
        1 << self.k
    }

    /// Order of the character values, `2^(k-2)`; equal to the degree.
    pub fn char_order(&self) -> u64 {
        self.degree()
    }

    /// `2^(k-1)`, the modulus of the congruence filter.
    pub fn half_conductor(&self) -> u64 {
        1 << (self.k - 1)
    }

    fn mask(&self) -> u64 {
        self.conductor() - 1
    }

    /// Odd `j` in `[1, m)`: the indices of the full-order characters.
    pub fn full_order_indices(&self) -> impl Iterator<Item = u64> {
        (1..self.char_order()).step_by(2)
    }

    /// One representative per conjugate pair `{j, m - j}`.
    pub fn conjugate_pair_representatives(&self) -> impl Iterator<Item = u64> {
        let m = self.char_order();
        (1..m / 2).step_by(2)
    }
}

/// `a = (-1)^epsilon * 5^s (mod 2^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TwoAdicDecomp {
    pub epsilon: u8,
    pub s: u64,
}

fn inverse_mod_pow2(a: u64, mask: u64) -> u64 {
    // Newton iteration; each step doubles the number of correct bits.
    let mut x = a;
    for _ in 0..6 {
        x = x.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(x)));
    }
    x & mask
}

/// Decompose an odd residue by bitwise lifting of the discrete log base 5.
pub fn two_adic_decompose(a: u64, level: TowerLevel) -> Result<TwoAdicDecomp> {
    if a.is_multiple_of(2) {
        return Err(domain!("two-adic decomposition of even residue {a}"));
    }
    let mask = level.mask();
    let a = a & mask;
    let epsilon = if a % 4 == 1 { 0 } else { 1 };
    let mut x = if epsilon == 0 { a } else { a.wrapping_neg() & mask };
    // 5^(2^i) = 1 + 2^(i+2) (mod 2^(i+3)), so bit i of s is read off mod 2^(i+3).
    let inv5 = inverse_mod_pow2(5, mask);
    let mut inv5_pow = inv5; // 5^(-2^i)
    let mut s = 0u64;
    for i in 0..(level.k() - 2) {
        let low = (1u64 << (i + 3)) - 1;
        if x & low != 1 {
            s |= 1 << i;
            x = x.wrapping_mul(inv5_pow) & mask;
        }
        inv5_pow = inv5_pow.wrapping_mul(inv5_pow) & mask;
    }
    debug_assert_eq!(x, 1);
    Ok(TwoAdicDecomp { epsilon, s })
}

/// Inverse of [`two_adic_decompose`].
pub fn two_adic_compose(d: TwoAdicDecomp, level: TowerLevel) -> u64 {
    let mask = level.mask();
    let mut r = 1u64;
    let mut b = 5u64;
    let mut e = d.s;
    while e > 0 {
        if e & 1 == 1 {
            r = r.wrapping_mul(b) & mask;
        }
        b = b.wrapping_mul(b) & mask;
        e >>= 1;
    }
    if d.epsilon == 1 {
        r.wrapping_neg() & mask
    } else {
        r
    }
}

/// Dense lookup of the decomposition of every odd residue of one level.
#[derive(Debug, Clone)]
pub struct TwoAdicTable {
    level: TowerLevel,
    // index a / 2 for odd a
    entries: Vec<TwoAdicDecomp>,
}

impl TwoAdicTable {
    pub fn new(level: TowerLevel) -> Result<Self> {
        if level.k() > TABLE_MAX_LEVEL {
            return Err(domain!("no dense table above level {TABLE_MAX_LEVEL}"));
        }
        let f = level.conductor();
        let mut entries = vec![TwoAdicDecomp { epsilon: 0, s: 0 }; (f / 2) as usize];
        let mask = level.mask();
        let mut p = 1u64;
        for s in 0..level.degree() {
            entries[(p / 2) as usize] = TwoAdicDecomp { epsilon: 0, s };
            let neg = p.wrapping_neg() & mask;
            entries[(neg / 2) as usize] = TwoAdicDecomp { epsilon: 1, s };
            p = (p * 5) & mask;
        }
        Ok(TwoAdicTable { level, entries })
    }

    pub fn level(&self) -> TowerLevel {
        self.level
    }

    pub fn get(&self, a: u64) -> Result<TwoAdicDecomp> {
        if a.is_multiple_of(2) {
            return Err(domain!("two-adic decomposition of even residue {a}"));
        }
        Ok(self.entries[((a & self.level.mask()) / 2) as usize])
    }
}

/// A Dirichlet character modulo `2^k`, determined by `chi(-1) = (-1)^parity`
/// and `chi(5) = zeta_m^u` with `m = 2^(k-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirichletChar {
    pub level: TowerLevel,
    pub odd: bool,
    pub u: u64,
}

impl DirichletChar {
    pub fn new(level: TowerLevel, odd: bool, u: u64) -> Self {
        DirichletChar {
            level,
            odd,
            u: u % level.char_order(),
        }
    }

    /// All `2^(k-1)` characters of the level.
    pub fn all(level: TowerLevel) -> impl Iterator<Item = DirichletChar> {
        let m = level.char_order();
        [false, true]
            .into_iter()
            .flat_map(move |odd| (0..m).map(move |u| DirichletChar::new(level, odd, u)))
    }

    pub fn is_trivial(&self) -> bool {
        !self.odd && self.u == 0
    }

    pub fn inverse(&self) -> Self {
        DirichletChar::new(self.level, self.odd, self.level.char_order() - self.u)
    }

    /// Exponent of `chi(a)` in `Z/m` given the decomposition of `a`.
    pub fn eval_decomp(&self, d: TwoAdicDecomp) -> u64 {
        let m = self.level.char_order();
        let from_five = ((self.u as u128 * d.s as u128) % m as u128) as u64;
        let from_sign = if self.odd && d.epsilon == 1 { m / 2 } else { 0 };
        (from_five + from_sign) % m
    }

    /// Exponent of `chi(a)`, or `None` when `a` is even.
    pub fn eval(&self, a: i64) -> Option<u64> {
        if a.rem_euclid(2) == 0 {
            return None;
        }
        let r = a.rem_euclid(self.level.conductor() as i64) as u64;
        let d = two_adic_decompose(r, self.level).expect("odd residue");
        Some(self.eval_decomp(d))
    }

    /// Order of the character as a group element.
    pub fn order(&self) -> u64 {
        let m = self.level.char_order();
        let u_order = if self.u == 0 {
            1
        } else {
            m / num_integer::gcd(self.u, m)
        };
        if self.odd {
            u_order.max(2)
        } else {
            u_order
        }
    }
}

/// An odd character of conductor exactly `2^k` whose restriction to `<5>`
/// has full order: `psi_j(5) = zeta_m^j`, `j` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OddPrimitiveCharacter {
    level: TowerLevel,
    j: u64,
}

impl OddPrimitiveCharacter {
    pub fn new(level: TowerLevel, j: u64) -> Result<Self> {
        let m = level.char_order();
        if j == 0 || j >= m || j.is_multiple_of(2) {
            return Err(domain!("character index j = {j} must be odd in [1, {m})"));
        }
        Ok(OddPrimitiveCharacter { level, j })
    }

    pub fn level(&self) -> TowerLevel {
        self.level
    }

    pub fn j(&self) -> u64 {
        self.j
    }

    pub fn as_dirichlet(&self) -> DirichletChar {
        DirichletChar::new(self.level, true, self.j)
    }

    /// `psi^t` for `t` odd; again odd and primitive.
    pub fn power(&self, t: u64) -> Result<Self> {
        let m = self.level.char_order();
        OddPrimitiveCharacter::new(self.level, (self.j * (t % m)) % m)
    }
}

/// Value of `psi(a)` as an exponent of `zeta_m`; `None` encodes `psi(a) = 0`.
pub fn char_eval(psi: &OddPrimitiveCharacter, a: i64) -> Option<u64> {
    psi.as_dirichlet().eval(a)
}

/// Exponent of 2 in the discriminant of the real subfield at level `k`:
/// `(k-1) * 2^(k-2) - 1`.
pub fn discriminant_log2(k: u32) -> Result<u64> {
    let level = TowerLevel::new(k)?;
    Ok((k as u64 - 1) * level.degree() - 1)
}

/// `log10` of the Minkowski bound `n!/n^n * sqrt(|disc|)` (totally real).
pub fn minkowski_bound_log10(k: u32) -> Result<f64> {
    let level = TowerLevel::new(k)?;
    let n = level.degree() as f64;
    let ln_fact: f64 = (2..=level.degree()).map(|i| (i as f64).ln()).sum();
    let ln_disc = discriminant_log2(k)? as f64 * std::f64::consts::LN_2;
    Ok((ln_fact - n * n.ln() + 0.5 * ln_disc) / std::f64::consts::LN_10)
}
