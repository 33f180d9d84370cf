//! First generalized Bernoulli numbers of characters of 2-power conductor,
//! their norms, and the size bounds used to budget Phase A.
//!
//! All values are carried as the integral multiple `2^k * B_1` in `Z[zeta_m]`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cyclo::{self, CycInt};
use crate::error::{domain, integrity, Error, Result};
use crate::modular::inv_mod;
use crate::tower::{
    DirichletChar, OddPrimitiveCharacter, TowerLevel, TwoAdicTable, TABLE_MAX_LEVEL,
};
use crate::zpoly;

/// Levels above this use the conjugate-product norm only in tests.
pub const CONJUGATE_CROSSCHECK_MAX_LEVEL: u32 = 6;

/// `2^k * B_{1,psi}` as an element of `Z[zeta_m]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledBernoulli {
    pub psi: OddPrimitiveCharacter,
    pub scaled: CycInt,
    pub scale_log2: u32,
}

impl ScaledBernoulli {
    /// `|B|^2 <= 4^(k-2)` at every complex embedding, decided exactly.
    pub fn within_size_bound(&self) -> Result<bool> {
        let k = self.scale_log2;
        let bound = BigInt::one() << (2 * (2 * k - 2));
        square_bounded_by(&self.scaled, &bound)
    }
}

fn table_for(level: TowerLevel) -> Result<TwoAdicTable> {
    if level.k() > TABLE_MAX_LEVEL {
        return Err(domain!(
            "Bernoulli sums are tabulated only up to level {TABLE_MAX_LEVEL}"
        ));
    }
    TwoAdicTable::new(level)
}

/// `sum chi(a) * a` over odd `0 < a < 2^k`.
pub fn scaled_bernoulli(chi: &DirichletChar) -> Result<CycInt> {
    let level = chi.level;
    let table = table_for(level)?;
    let m = level.char_order();
    let mut raw = vec![BigInt::zero(); m as usize];
    for a in (1..level.conductor()).step_by(2) {
        let e = chi.eval_decomp(table.get(a)?);
        raw[e as usize] += a;
    }
    CycInt::from_coeffs(m, raw)
}

/// `sum psi(a) * (2a - 2^k)` over odd `0 < a <= 2^(k-1)`, valid for odd `psi`.
fn paired_scaled_bernoulli(chi: &DirichletChar, table: &TwoAdicTable) -> Result<CycInt> {
    let level = chi.level;
    let f = level.conductor() as i64;
    let m = level.char_order();
    let mut raw = vec![BigInt::zero(); m as usize];
    for a in (1..=level.half_conductor()).step_by(2) {
        let e = chi.eval_decomp(table.get(a)?);
        raw[e as usize] += 2 * a as i64 - f;
    }
    CycInt::from_coeffs(m, raw)
}

pub fn compute_bernoulli(psi: &OddPrimitiveCharacter) -> Result<ScaledBernoulli> {
    let level = psi.level();
    let chi = psi.as_dirichlet();
    let table = table_for(level)?;
    let direct = scaled_bernoulli(&chi)?;
    let paired = paired_scaled_bernoulli(&chi, &table)?;
    if direct != paired {
        return Err(integrity!(
            "direct and paired Bernoulli sums disagree at k = {}, j = {}",
            level.k(),
            psi.j()
        ));
    }
    Ok(ScaledBernoulli {
        psi: *psi,
        scaled: direct,
        scale_log2: level.k(),
    })
}

/// `|Nm_{Q(zeta_m)/Q}(B_{1,psi_j})|`, an integer because `2^k B` has norm
/// divisible by `2^(k * phi(m))`.
pub fn bernoulli_norm(k: u32, j: u64) -> Result<BigUint> {
    let level = TowerLevel::new(k)?;
    let psi = OddPrimitiveCharacter::new(level, j)?;
    norm_of(&compute_bernoulli(&psi)?)
}

/// The norm of `B` by resultant, cross-checked against the conjugate product
/// at small levels.
pub fn norm_of(b: &ScaledBernoulli) -> Result<BigUint> {
    let k = b.scale_log2;
    let raw = cyclo::field_norm(&b.scaled)?;
    if k <= CONJUGATE_CROSSCHECK_MAX_LEVEL {
        let check = cyclo::field_norm_by_conjugates(&b.scaled)?;
        if check != raw {
            return Err(integrity!(
                "resultant and conjugate-product norms disagree at k = {k}"
            ));
        }
    }
    descale_norm(k, &raw)
}

/// Removes the `2^(k * phi(m))` scaling from a norm of `2^k B`.
pub fn descale_norm(k: u32, raw: &BigInt) -> Result<BigUint> {
    let level = TowerLevel::new(k)?;
    let shift = k as u64 * (level.char_order() / 2);
    let mag = raw.magnitude();
    if mag.is_zero() {
        return Err(Error::NormVanishes { k });
    }
    if mag.trailing_zeros().unwrap_or(0) < shift {
        return Err(integrity!(
            "scaled Bernoulli norm is not divisible by 2^{shift} at k = {k}"
        ));
    }
    Ok(mag >> shift)
}

/// True iff every full-order odd character of level `k` has the same norm.
pub fn orbit_invariance_check(k: u32) -> Result<bool> {
    let level = TowerLevel::new(k)?;
    let m = level.char_order();
    let first = bernoulli_norm(k, 1)?;
    for j in (3..m).step_by(2) {
        if bernoulli_norm(k, j)? != first {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `sum |B_{1,chi}|^2` over all odd characters modulo `2^k`, exactly.
pub fn second_moment_total(k: u32) -> Result<BigRational> {
    let level = TowerLevel::new(k)?;
    let m = level.char_order();
    let mut acc = CycInt::zero(m)?;
    for u in 0..m {
        let b = scaled_bernoulli(&DirichletChar::new(level, true, u))?;
        acc = &acc + &(&b * &b.conj());
    }
    let total = acc
        .as_integer()
        .cloned()
        .ok_or_else(|| integrity!("second moment is not rational at k = {k}"))?;
    Ok(BigRational::new(total, BigInt::one() << (2 * k)))
}

/// `(2^(2k-2) + 2^(k-1)) / 12`, the closed form the second moment is compared with.
pub fn second_moment_closed_form(k: u32) -> BigRational {
    let num = (BigInt::one() << (2 * k - 2)) + (BigInt::one() << (k - 1));
    BigRational::new(num, BigInt::from(12))
}

/// `log10` of the three norm bounds, with `N = 2^(k-3)` conjugate pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub k: u32,
    /// `2^((k-2) N)`, from the size of each conjugate.
    pub worst_case_log10: f64,
    /// `(2^(k-1)/3)^(N/2)`.
    pub second_moment_log10: f64,
    /// `(2^k/3)^(N/2)`, the mean-square constant without the pairing refinement.
    pub second_moment_proven_log10: f64,
    /// `(sqrt(f)/pi * (ln(f)/2 + 1))^N`.
    pub functional_eq_log10: f64,
}

/// Decimal digits of the largest integer below `10^x`.
pub fn digits_below(log10: f64) -> u64 {
    log10.floor() as u64 + 1
}

impl BoundReport {
    pub fn worst_case_digits(&self) -> u64 {
        digits_below(self.worst_case_log10)
    }
    pub fn second_moment_digits(&self) -> u64 {
        digits_below(self.second_moment_log10)
    }
    pub fn second_moment_proven_digits(&self) -> u64 {
        digits_below(self.second_moment_proven_log10)
    }
    pub fn functional_eq_digits(&self) -> u64 {
        digits_below(self.functional_eq_log10)
    }
}

pub fn bounds_report(k: u32) -> Result<BoundReport> {
    let level = TowerLevel::new(k)?;
    let pairs = (level.degree() / 2) as f64;
    let f = level.conductor() as f64;
    let log2 = std::f64::consts::LOG10_2;
    let louboutin = f.sqrt() / std::f64::consts::PI * (0.5 * f.ln() + 1.0);
    Ok(BoundReport {
        k,
        worst_case_log10: (k as f64 - 2.0) * pairs * log2,
        second_moment_log10: pairs / 2.0 * ((k as f64 - 1.0) * log2 - 3f64.log10()),
        second_moment_proven_log10: pairs / 2.0 * (k as f64 * log2 - 3f64.log10()),
        functional_eq_log10: pairs * louboutin.log10(),
    })
}

/// Characteristic polynomial over `Q` of `a` in `Z[zeta_m]`, i.e.
/// `prod_t (y - sigma_t(a))`, by interpolating `Res(Phi_m, y0 - A)`.
pub fn characteristic_polynomial(a: &CycInt) -> Result<Vec<BigInt>> {
    let m = a.modulus();
    let d = (m / 2) as usize;
    let phi = cyclo::cyclotomic_poly(m)?;
    let mut xs = Vec::with_capacity(d + 1);
    let mut ys = Vec::with_capacity(d + 1);
    for y0 in 0..=d as i64 {
        let shifted = &CycInt::constant(m, BigInt::from(y0))? - a;
        let v = if shifted.is_zero() {
            BigInt::zero()
        } else {
            zpoly::resultant(&phi, &shifted.to_poly())?
        };
        xs.push(BigInt::from(y0));
        ys.push(v);
    }
    let coeffs = interpolate(&xs, &ys);
    let mut out = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        if !c.is_integer() {
            return Err(integrity!("characteristic polynomial is not integral"));
        }
        out.push(c.to_integer());
    }
    out.resize(d + 1, BigInt::zero());
    Ok(out)
}

/// Newton interpolation through `(xs[i], ys[i])`, returned in the monomial basis.
fn interpolate(xs: &[BigInt], ys: &[BigInt]) -> Vec<BigRational> {
    let n = xs.len();
    let mut dd: Vec<BigRational> = ys.iter().map(|y| BigRational::from(y.clone())).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            let num = &dd[i] - &dd[i - 1];
            let den = BigRational::from(&xs[i] - &xs[i - level]);
            dd[i] = num / den;
        }
    }
    let mut poly = vec![BigRational::zero(); n];
    for i in (0..n).rev() {
        // poly = poly * (y - xs[i]) + dd[i]
        let mut next = vec![BigRational::zero(); n];
        for (e, c) in poly.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if e + 1 < n {
                next[e + 1] += c;
            }
            next[e] -= c * BigRational::from(xs[i].clone());
        }
        next[0] += &dd[i];
        poly = next;
    }
    poly
}

/// True iff a real-rooted polynomial has only non-negative roots: its
/// coefficients alternate weakly in sign.
fn roots_nonnegative(p: &[BigInt]) -> bool {
    let d = p.len() - 1;
    p.iter().enumerate().all(|(i, c)| {
        let flip = (d - i) % 2 == 1;
        if flip {
            !c.is_positive()
        } else {
            !c.is_negative()
        }
    })
}

/// Exactly decides `|sigma(a)|^2 <= bound` for every embedding `sigma`.
pub fn square_bounded_by(a: &CycInt, bound: &BigInt) -> Result<bool> {
    let m = a.modulus();
    let gap = &CycInt::constant(m, bound.clone())? - &(a * &a.conj());
    Ok(roots_nonnegative(&characteristic_polynomial(&gap)?))
}

/// `chi(theta_k)` with `theta_k = 2^-k sum a * sigma_a^-1`, scaled by `2^k`:
/// the coefficient `a` sits on the group element `a^-1 mod 2^k`.
pub fn stickelberger_eval_scaled(chi: &DirichletChar) -> Result<CycInt> {
    let level = chi.level;
    let f = level.conductor();
    let table = table_for(level)?;
    let m = level.char_order();
    let mut raw = vec![BigInt::zero(); m as usize];
    for a in (1..f).step_by(2) {
        let inv = inv_mod(a, f).ok_or_else(|| integrity!("{a} not invertible mod {f}"))?;
        raw[chi.eval_decomp(table.get(inv)?) as usize] += a;
    }
    CycInt::from_coeffs(m, raw)
}

/// True iff `chi(theta_k) = B_{1, chi^-1}` for the character `chi`.
pub fn stickelberger_eval_check(chi: &DirichletChar) -> Result<bool> {
    Ok(stickelberger_eval_scaled(chi)? == scaled_bernoulli(&chi.inverse())?)
}

/// `B_1` as a floating-point complex number under `zeta_m -> exp(2 pi i / m)`.
pub fn bernoulli_f64(b: &ScaledBernoulli) -> (f64, f64) {
    let (re, im) = b.scaled.embed(1);
    let scale = (1u64 << b.scale_log2).to_f64().unwrap_or(f64::INFINITY);
    (re / scale, im / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(k: u32) -> TowerLevel {
        TowerLevel::new(k).unwrap()
    }

    fn psi(k: u32, j: u64) -> OddPrimitiveCharacter {
        OddPrimitiveCharacter::new(lvl(k), j).unwrap()
    }

    #[test]
    fn small_bernoulli_values() {
        let b3 = compute_bernoulli(&psi(3, 1)).unwrap();
        assert_eq!(b3.scaled, CycInt::from_i64s(2, &[-8]).unwrap());
        let b4 = compute_bernoulli(&psi(4, 1)).unwrap();
        assert_eq!(b4.scaled, CycInt::from_i64s(4, &[-16, -16]).unwrap());
        assert_eq!(bernoulli_f64(&b4), (-1.0, -1.0));
    }

    #[test]
    fn bernoulli_by_enumeration() {
        // direct float evaluation of (1/f) sum psi(a) a with psi(a) = exp(2 pi i e / m)
        for k in 3..=8u32 {
            let m = lvl(k).char_order();
            for j in (1..m).step_by(2) {
                let p = psi(k, j);
                let (mut re, mut im) = (0.0, 0.0);
                for a in (1..(1i64 << k)).step_by(2) {
                    let e = char_eval(&p, a).unwrap() as f64;
                    let ang = 2.0 * std::f64::consts::PI * e / m as f64;
                    re += a as f64 * ang.cos();
                    im += a as f64 * ang.sin();
                }
                let f = (1u64 << k) as f64;
                let (br, bi) = bernoulli_f64(&compute_bernoulli(&p).unwrap());
                assert!((br - re / f).abs() < 1e-9 && (bi - im / f).abs() < 1e-9);
            }
        }
    }

    use crate::tower::char_eval;

    #[test]
    fn small_norms() {
        assert_eq!(bernoulli_norm(3, 1).unwrap(), BigUint::from(1u32));
        assert_eq!(bernoulli_norm(4, 1).unwrap(), BigUint::from(2u32));
        assert_eq!(bernoulli_norm(4, 3).unwrap(), BigUint::from(2u32));
        assert_eq!(bernoulli_norm(5, 1).unwrap(), BigUint::from(8u32));
        assert_eq!(bernoulli_norm(6, 1).unwrap(), BigUint::from(2176u32));
        assert_eq!(bernoulli_norm(7, 1).unwrap(), BigUint::from(692_092_928u64));
        assert!(bernoulli_norm(4, 2).is_err());
    }

    #[test]
    fn descaling_errors() {
        assert!(matches!(descale_norm(5, &BigInt::zero()), Err(Error::NormVanishes { k: 5 })));
        assert!(matches!(descale_norm(4, &BigInt::from(3)), Err(Error::Integrity(_))));
    }

    #[test]
    fn orbit_invariance_small_levels() {
        for k in 3..=7 {
            assert!(orbit_invariance_check(k).unwrap(), "k={k}");
        }
    }

    #[test]
    fn conjugation_consistency() {
        for k in 3..=8u32 {
            let m = lvl(k).char_order();
            let b = compute_bernoulli(&psi(k, 1)).unwrap();
            for t in (1..m).step_by(2) {
                let moved = b.scaled.galois_apply(t).unwrap();
                let direct = compute_bernoulli(&psi(k, 1).power(t).unwrap()).unwrap();
                assert_eq!(moved, direct.scaled, "k={k} t={t}");
            }
        }
    }

    #[test]
    fn even_characters_vanish() {
        for k in 3..=8u32 {
            for chi in DirichletChar::all(lvl(k)).filter(|c| !c.odd && !c.is_trivial()) {
                assert!(scaled_bernoulli(&chi).unwrap().is_zero(), "k={k} u={}", chi.u);
            }
        }
    }

    #[test]
    fn second_moment_by_brute_force() {
        // k = 3: chi_4 gives B = -1/2, the conductor-8 odd character gives -1
        assert_eq!(
            second_moment_total(3).unwrap(),
            BigRational::new(BigInt::from(5), BigInt::from(4))
        );
        for k in 3..=8u32 {
            // float oracle: sum of |B|^2 over odd characters
            let m = lvl(k).char_order();
            let mut total = 0.0;
            for u in 0..m {
                let b = scaled_bernoulli(&DirichletChar::new(lvl(k), true, u)).unwrap();
                let (re, im) = b.embed(1);
                total += (re * re + im * im) / 4f64.powi(k as i32);
            }
            let exact = second_moment_total(k).unwrap().to_f64().unwrap();
            assert!((exact - total).abs() < 1e-9 * total.max(1.0));
        }
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(
            second_moment_closed_form(3),
            BigRational::new(BigInt::from(5), BigInt::from(3))
        );
        assert_eq!(second_moment_closed_form(4), BigRational::from(BigInt::from(6)));
        assert_eq!(
            second_moment_closed_form(5),
            BigRational::new(BigInt::from(68), BigInt::from(3))
        );
    }

    #[test]
    fn bound_digits() {
        let r = bounds_report(10).unwrap();
        assert_eq!(
            (r.worst_case_digits(), r.second_moment_digits(), r.functional_eq_digits()),
            (309, 143, 213)
        );
        assert!(bounds_report(9).unwrap().second_moment_digits() <= 63);
        assert!(bounds_report(12).unwrap().second_moment_digits() <= 726);
        for k in 4..=12 {
            let r = bounds_report(k).unwrap();
            assert!(r.second_moment_log10 <= r.functional_eq_log10, "k={k}");
            assert!(r.functional_eq_log10 <= r.worst_case_log10, "k={k}");
            assert!(r.second_moment_log10 <= r.second_moment_proven_log10);
        }
    }

    #[test]
    fn characteristic_polynomial_examples() {
        // 1 + i has characteristic polynomial y^2 - 2y + 2
        let a = CycInt::from_i64s(4, &[1, 1]).unwrap();
        assert_eq!(characteristic_polynomial(&a).unwrap(), zpoly::from_i64s(&[2, -2, 1]));
        let c = CycInt::from_i64s(8, &[3]).unwrap();
        assert_eq!(
            characteristic_polynomial(&c).unwrap(),
            zpoly::from_i64s(&[81, -108, 54, -12, 1])
        );
    }

    #[test]
    fn size_bound_is_exact() {
        // |1 + i|^2 = 2
        let a = CycInt::from_i64s(4, &[1, 1]).unwrap();
        assert!(square_bounded_by(&a, &BigInt::from(2)).unwrap());
        assert!(!square_bounded_by(&a, &BigInt::from(1)).unwrap());
        for k in 3..=8u32 {
            let m = lvl(k).char_order();
            for j in (1..m).step_by(2) {
                assert!(compute_bernoulli(&psi(k, j)).unwrap().within_size_bound().unwrap());
            }
        }
    }

    #[test]
    fn norms_below_worst_case() {
        for k in 4..=7u32 {
            let bound = bounds_report(k).unwrap().worst_case_log10;
            let n = bernoulli_norm(k, 1).unwrap();
            assert!(n.to_f64().unwrap().log10() <= bound);
        }
    }

    #[test]
    fn stickelberger_matches_bernoulli() {
        for k in 3..=7u32 {
            for chi in DirichletChar::all(lvl(k)).filter(|c| !c.is_trivial()) {
                assert!(stickelberger_eval_check(&chi).unwrap());
            }
        }
        let odd = psi(3, 1).as_dirichlet();
        let b = stickelberger_eval_scaled(&odd).unwrap();
        assert_eq!(b, CycInt::from_i64s(2, &[-8]).unwrap());
    }
}
