//! Phase B: power-residue tests of the cyclotomic unit `xi_5` at the primes
//! above `l`, the small-prime sieve, and the auxiliary-annihilator check.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclo::{self, minimal_polynomial};
use crate::error::{domain, integrity, Result};
use crate::fpoly::{poly, Fp64, FpBig, PrimeField};
use crate::modular::{is_prime_u64, is_probable_prime, pow_mod, MR_SEED};
use crate::primes::primes_in;
use crate::tower::{two_adic_decompose, TowerLevel};

/// Seed for equal-degree splitting.
pub const SPLIT_SEED: u64 = 0x5350_4c49_545f_5345;

/// Order of the Frobenius of an odd prime `l` in `Gal(K_k^+/Q)`, the residue
/// degree of `l` in the real subfield.
pub fn frobenius_order(l: &BigUint, k: u32) -> Result<u64> {
    let level = TowerLevel::new(k)?;
    let f = level.conductor();
    let r = (l % f).to_u64().expect("reduced below 2^k");
    if r.is_multiple_of(2) {
        return Err(domain!("residue degree needs an odd prime, got {l}"));
    }
    let s = two_adic_decompose(r, level)?.s;
    let n = level.degree();
    Ok(if s == 0 { 1 } else { n / num_integer::gcd(s, n) })
}

/// `1` when `l = 1 (mod 2^(k-1))`, `2` when `l = -1`; the power of `l` whose
/// predecessor is divisible by `2^(k-1)` in the residue exponent.
pub fn exponent_degree(l: &BigUint, k: u32) -> Result<u32> {
    let half = BigUint::one() << (k - 1);
    let r = l % &half;
    if r.is_one() {
        Ok(1)
    } else if r == &half - 1u32 {
        Ok(2)
    } else {
        Err(domain!("{l} is not +-1 modulo 2^{}", k - 1))
    }
}

/// `(l^e - 1) / 2^(k-1)` for the exponent degree `e`.
pub fn residue_exponent(l: &BigUint, k: u32) -> Result<BigUint> {
    let e = exponent_degree(l, k)?;
    let num = l.pow(e) - 1u32;
    let half = BigUint::one() << (k - 1);
    if !(&num % &half).is_zero() {
        return Err(integrity!("residue exponent is not integral for {l}"));
    }
    Ok(num / half)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WieferichVerdict {
    Passes,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorOutcome {
    /// Monic irreducible factor of `g_k` mod `l`, low degree first.
    #[serde(with = "crate::serde_dec::vec")]
    pub factor: Vec<BigUint>,
    /// `xi_5^t` reduced modulo the factor.
    #[serde(with = "crate::serde_dec::vec")]
    pub value: Vec<BigUint>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WieferichReport {
    pub k: u32,
    #[serde(with = "crate::serde_dec")]
    pub prime: BigUint,
    /// Degree of each prime above `l` in the real subfield.
    pub residue_degree: u64,
    /// `e` in the exponent `(l^e - 1)/2^(k-1)`.
    pub exponent_degree: u32,
    #[serde(with = "crate::serde_dec")]
    pub exponent_t: BigUint,
    pub shortcut_used: bool,
    /// Present when the shortcut was bypassed or failed.
    pub per_factor: Vec<FactorOutcome>,
    pub verdict: WieferichVerdict,
    /// Index into `per_factor` of the first factor giving 1.
    pub failing_factor: Option<usize>,
}

impl WieferichReport {
    pub fn passes(&self) -> bool {
        self.verdict == WieferichVerdict::Passes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMode {
    /// `gcd(xi_5^t - 1, g_k) = 1`, with per-factor fallback only on failure.
    #[default]
    Shortcut,
    /// Per-factor evaluation only.
    Fallback,
}

fn check_prime(l: &BigUint, k: u32) -> Result<()> {
    TowerLevel::new(k)?;
    if *l < BigUint::from(3u32) || !is_probable_prime(l, MR_SEED) {
        return Err(domain!("{l} is not an odd prime"));
    }
    exponent_degree(l, k).map(|_| ())
}

fn canonical<F: PrimeField>(f: &F, mut factors: Vec<Vec<F::Elem>>) -> Vec<Vec<F::Elem>> {
    factors.sort_by_key(|g| {
        let mut key: Vec<BigUint> = g.iter().map(|c| f.to_biguint(c)).collect();
        key.reverse();
        (g.len(), key)
    });
    factors
}

/// Splits a squarefree product of distinct monic irreducibles of degree `d`
/// (odd characteristic) into its factors.
fn equal_degree_split<F: PrimeField>(
    f: &F,
    g: &[F::Elem],
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<F::Elem>> {
    let deg = g.len() - 1;
    if deg == d {
        return vec![g.to_vec()];
    }
    let q = f.characteristic();
    let e = (q.pow(d as u32) - 1u32) >> 1;
    loop {
        let a: Vec<F::Elem> = (0..deg)
            .map(|_| f.lift_u64(rng.gen::<u64>()))
            .collect();
        let a = poly::trim(f, a);
        if a.is_empty() {
            continue;
        }
        let h = poly::sub(f, &poly::powmod(f, &a, &e, g), &[f.one()]);
        let u = poly::gcd(f, &h, g);
        let du = u.len().saturating_sub(1);
        if du > 0 && du < deg {
            let (v, _) = poly::divrem(f, g, &u);
            let mut out = equal_degree_split(f, &u, d, rng);
            out.extend(equal_degree_split(f, &v, d, rng));
            return out;
        }
    }
}

fn factor_minpoly_in<F: PrimeField>(f: &F, k: u32, degree: usize, seed: u64) -> Result<Vec<Vec<F::Elem>>> {
    let g = poly::from_bigints(f, &minimal_polynomial(k)?);
    let x = vec![f.zero(), f.one()];
    let q = f.characteristic();
    let frob = poly::powmod(f, &x, &q.pow(degree as u32), &g);
    if frob != x {
        return Err(integrity!("g_{k} has factors of degree > {degree} modulo {q}"));
    }
    if degree == 2 {
        let lin = poly::powmod(f, &x, &q, &g);
        if poly::gcd(f, &poly::sub(f, &lin, &x), &g).len() > 1 {
            return Err(integrity!("g_{k} has linear factors modulo {q}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = canonical(f, equal_degree_split(f, &g, degree, &mut rng));
    let product = factors
        .iter()
        .fold(vec![f.one()], |acc, h| poly::mul(f, &acc, h));
    if product != g || factors.iter().any(|h| h.len() != degree + 1) {
        return Err(integrity!("factorization of g_{k} modulo {q} does not reconstruct"));
    }
    Ok(factors)
}

fn to_big<F: PrimeField>(f: &F, a: &[F::Elem]) -> Vec<BigUint> {
    a.iter().map(|c| f.to_biguint(c)).collect()
}

/// Monic irreducible factors of `g_k` modulo `l`, sorted canonically.
pub fn factor_minpoly_mod(k: u32, l: &BigUint) -> Result<Vec<Vec<BigUint>>> {
    factor_minpoly_mod_seeded(k, l, SPLIT_SEED)
}

pub fn factor_minpoly_mod_seeded(k: u32, l: &BigUint, seed: u64) -> Result<Vec<Vec<BigUint>>> {
    check_prime(l, k)?;
    let degree = frobenius_order(l, k)? as usize;
    match l.to_u64() {
        Some(p) if p < 1 << 63 => {
            let f = Fp64::new(p);
            Ok(factor_minpoly_in(&f, k, degree, seed)?
                .iter()
                .map(|h| to_big(&f, h))
                .collect())
        }
        _ => {
            let f = FpBig::new(l.clone());
            Ok(factor_minpoly_in(&f, k, degree, seed)?
                .iter()
                .map(|h| to_big(&f, h))
                .collect())
        }
    }
}

struct Setup<F: PrimeField> {
    g: Vec<F::Elem>,
    xi: Vec<F::Elem>,
    t: BigUint,
}

fn setup<F: PrimeField>(f: &F, k: u32, l: &BigUint) -> Result<Setup<F>> {
    let g_int = minimal_polynomial(k)?;
    let g = poly::from_bigints(f, &g_int);
    let xi = poly::from_bigints(f, &cyclo::chebyshev_quotient(5, &g_int));
    Ok(Setup {
        g,
        xi,
        t: residue_exponent(l, k)?,
    })
}

fn shortcut_passes<F: PrimeField>(f: &F, s: &Setup<F>) -> bool {
    let w = poly::powmod(f, &s.xi, &s.t, &s.g);
    let w1 = poly::sub(f, &w, &[f.one()]);
    poly::gcd(f, &w1, &s.g).len() == 1
}

fn per_factor<F: PrimeField>(
    f: &F,
    s: &Setup<F>,
    k: u32,
    degree: usize,
    seed: u64,
) -> Result<Vec<FactorOutcome>> {
    let factors = factor_minpoly_in(f, k, degree, seed)?;
    Ok(factors
        .iter()
        .map(|h| {
            let value = if degree == 1 {
                // evaluate at the root -h[0]
                let root = f.neg(&h[0]);
                let v = poly::eval(f, &s.xi, &root);
                let p = f.pow(&v, &s.t);
                poly::trim(f, vec![p])
            } else {
                poly::powmod(f, &s.xi, &s.t, h)
            };
            let passed = value != vec![f.one()];
            FactorOutcome {
                factor: to_big(f, h),
                value: to_big(f, &value),
                passed,
            }
        })
        .collect())
}

fn run_test<F: PrimeField>(f: &F, k: u32, l: &BigUint, mode: TestMode, seed: u64) -> Result<WieferichReport> {
    let s = setup(f, k, l)?;
    let degree = frobenius_order(l, k)?;
    let mut report = WieferichReport {
        k,
        prime: l.clone(),
        residue_degree: degree,
        exponent_degree: exponent_degree(l, k)?,
        exponent_t: s.t.clone(),
        shortcut_used: mode == TestMode::Shortcut,
        per_factor: Vec::new(),
        verdict: WieferichVerdict::Passes,
        failing_factor: None,
    };
    if mode == TestMode::Shortcut && shortcut_passes(f, &s) {
        return Ok(report);
    }
    report.per_factor = per_factor(f, &s, k, degree as usize, seed)?;
    report.failing_factor = report.per_factor.iter().position(|o| !o.passed);
    if report.failing_factor.is_some() {
        report.verdict = WieferichVerdict::Inconclusive;
    } else if mode == TestMode::Shortcut {
        return Err(integrity!(
            "shortcut and per-factor tests disagree at k = {k}, l = {l}"
        ));
    }
    Ok(report)
}

/// Tests whether `xi_5^t != 1` modulo every prime above `l`.
pub fn wieferich_test(k: u32, l: &BigUint, mode: TestMode) -> Result<WieferichReport> {
    wieferich_test_seeded(k, l, mode, SPLIT_SEED)
}

pub fn wieferich_test_seeded(k: u32, l: &BigUint, mode: TestMode, seed: u64) -> Result<WieferichReport> {
    check_prime(l, k)?;
    match l.to_u64() {
        Some(p) if p < 1 << 63 => run_test(&Fp64::new(p), k, l, mode, seed),
        _ => run_test(&FpBig::new(l.clone()), k, l, mode, seed),
    }
}

/// Both predicates for one prime: `(shortcut passes, every factor passes)`.
pub fn cross_check(k: u32, l: u64, seed: u64) -> Result<(bool, bool)> {
    let lb = BigUint::from(l);
    check_prime(&lb, k)?;
    let f = Fp64::new(l);
    let s = setup(&f, k, &lb)?;
    let degree = frobenius_order(&lb, k)? as usize;
    let short = shortcut_passes(&f, &s);
    let full = per_factor(&f, &s, k, degree, seed)?.iter().all(|o| o.passed);
    Ok((short, full))
}

/// Integers `c * 2^(k-1) +- 1` in `[lo, hi)`, ascending.
pub fn enumerate_candidates(k: u32, lo: u64, hi: u64) -> impl Iterator<Item = u64> {
    let step = 1u64 << (k - 1);
    let start = lo / step;
    (start..=hi / step + 1)
        .flat_map(move |c| {
            let base = c * step;
            [base.checked_sub(1), base.checked_add(1)]
        })
        .flatten()
        .filter(move |&v| v >= lo && v < hi)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveSummary {
    pub k: u32,
    pub lo: u64,
    pub hi: u64,
    pub primes_tested: u64,
    /// Non-passing reports, ascending by prime.
    pub failures: Vec<WieferichReport>,
    /// Primes where the shortcut and per-factor predicates disagree.
    pub disagreements: Vec<u64>,
    /// Ranges taken from a checkpoint rather than recomputed.
    pub resumed: Vec<(u64, u64, u64)>,
}

impl SieveSummary {
    pub fn failure_count(&self) -> u64 {
        self.failures.len() as u64 + self.resumed.iter().map(|r| r.2).sum::<u64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveOptions {
    /// Also run the per-factor predicate on every prime and compare.
    pub cross_check: bool,
    pub seed: u64,
    /// Width of one unit of parallel work and of one checkpoint line.
    pub block: u64,
}

impl Default for SieveOptions {
    fn default() -> Self {
        SieveOptions {
            cross_check: false,
            seed: SPLIT_SEED,
            block: 1 << 20,
        }
    }
}

fn admissible_primes(k: u32, lo: u64, hi: u64) -> Vec<u64> {
    let step = 1u64 << (k - 1);
    let sparse = step >= 64;
    if sparse {
        enumerate_candidates(k, lo, hi).filter(|&v| is_prime_u64(v)).collect()
    } else {
        primes_in(lo, hi)
            .into_iter()
            .filter(|&p| p > 2 && (p % step == 1 || p % step == step - 1))
            .collect()
    }
}

fn sieve_block(k: u32, lo: u64, hi: u64, opts: &SieveOptions) -> Result<SieveSummary> {
    let primes = admissible_primes(k, lo, hi);
    let results: Vec<Result<(u64, Option<WieferichReport>, bool)>> = primes
        .par_iter()
        .map(|&p| {
            let lb = BigUint::from(p);
            let report = wieferich_test_seeded(k, &lb, TestMode::Shortcut, opts.seed)?;
            let disagree = if opts.cross_check {
                let (a, b) = cross_check(k, p, opts.seed)?;
                a != b
            } else {
                false
            };
            Ok((p, (!report.passes()).then_some(report), disagree))
        })
        .collect();
    let mut summary = SieveSummary {
        k,
        lo,
        hi,
        primes_tested: primes.len() as u64,
        ..SieveSummary::default()
    };
    for r in results {
        let (p, fail, disagree) = r?;
        if let Some(rep) = fail {
            summary.failures.push(rep);
        }
        if disagree {
            summary.disagreements.push(p);
        }
    }
    Ok(summary)
}

fn merge(into: &mut SieveSummary, part: SieveSummary) {
    into.primes_tested += part.primes_tested;
    into.failures.extend(part.failures);
    into.disagreements.extend(part.disagreements);
    into.resumed.extend(part.resumed);
}

/// Runs the Wieferich test on every prime `l = +-1 (mod 2^(k-1))` in `[lo, hi)`.
pub fn fk_sieve(k: u32, lo: u64, hi: u64, opts: &SieveOptions) -> Result<SieveSummary> {
    fk_sieve_with_checkpoint(k, lo, hi, opts, None)
}

fn read_checkpoint(path: &Path, k: u32) -> Result<Vec<(u64, u64, u64)>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for line in BufReader::new(std::fs::File::open(path)?).lines() {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let parsed: Option<Vec<u64>> = fields.iter().map(|s| s.parse().ok()).collect();
        match parsed.as_deref() {
            Some([kk, lo, hi, fails]) => {
                if *kk == k as u64 {
                    out.push((*lo, *hi, *fails));
                }
            }
            _ => return Err(crate::Error::Parse(format!("bad checkpoint line: {line}"))),
        }
    }
    Ok(out)
}

/// As [`fk_sieve`], skipping blocks already listed in the checkpoint file and
/// appending one line `k lo hi failures` per completed block.
pub fn fk_sieve_with_checkpoint(
    k: u32,
    lo: u64,
    hi: u64,
    opts: &SieveOptions,
    checkpoint: Option<&Path>,
) -> Result<SieveSummary> {
    TowerLevel::new(k)?;
    if k < 3 || lo >= hi {
        return Ok(SieveSummary {
            k,
            lo,
            hi,
            ..SieveSummary::default()
        });
    }
    let done = match checkpoint {
        Some(p) => read_checkpoint(p, k)?,
        None => Vec::new(),
    };
    let block = opts.block.max(1);
    let mut total = SieveSummary {
        k,
        lo,
        hi,
        ..SieveSummary::default()
    };
    let mut start = lo;
    let mut pending = Vec::new();
    while start < hi {
        let end = start.saturating_add(block).min(hi);
        if let Some(&rec) = done.iter().find(|r| r.0 == start && r.1 == end) {
            total.resumed.push(rec);
        } else {
            pending.push((start, end));
        }
        start = end;
    }
    for (a, b) in pending {
        let part = sieve_block(k, a, b, opts)?;
        if let Some(p) = checkpoint {
            let mut file = OpenOptions::new().create(true).append(true).open(p)?;
            writeln!(file, "{k} {a} {b} {}", part.failures.len())?;
        }
        merge(&mut total, part);
    }
    total.failures.sort_by(|x, y| x.prime.cmp(&y.prime));
    total.disagreements.sort_unstable();
    Ok(total)
}

/// Smallest element of multiplicative order `2^k` modulo the prime `q`.
pub fn smallest_element_of_order(q: u64, k: u32) -> Result<u64> {
    let order = 1u64 << k;
    if !(q - 1).is_multiple_of(order) {
        return Err(domain!("{q} is not 1 modulo 2^{k}"));
    }
    (2..q)
        .find(|&g| pow_mod(g, order, q) == 1 && pow_mod(g, order / 2, q) != 1)
        .ok_or_else(|| integrity!("no element of order 2^{k} modulo {q}"))
}

/// Projection `sum_a c_a zeta_m^(-j s(a))` of the annihilator attached to `q`,
/// where `c_a = floor(a * (eta^a mod q) / q)` over odd `0 < a < 2^k`.
pub fn thaine_projection(k: u32, q: u64, j: u64) -> Result<Vec<BigInt>> {
    let level = TowerLevel::new(k)?;
    if !is_prime_u64(q) {
        return Err(domain!("{q} is not prime"));
    }
    let eta = smallest_element_of_order(q, k)?;
    let m = level.char_order();
    let mut raw = vec![BigInt::zero(); m as usize];
    for a in (1..level.conductor()).step_by(2) {
        let c = (a as u128 * pow_mod(eta, a, q) as u128 / q as u128) as u64;
        let s = two_adic_decompose(a, level)?.s;
        let e = (m - (j % m) * s % m) % m;
        raw[e as usize] += c;
    }
    Ok(cyclo::CycInt::from_coeffs(m, raw)?.to_poly())
}

/// True iff the two projections and `Phi_m` are coprime modulo `l`.
pub fn thaine_check(k: u32, q1: u64, q2: u64, j: u64, l: &BigUint) -> Result<bool> {
    if q1 == q2 {
        return Err(domain!("auxiliary primes must differ"));
    }
    if !is_probable_prime(l, MR_SEED) || *l < BigUint::from(3u32) {
        return Err(domain!("{l} is not an odd prime"));
    }
    let p1 = thaine_projection(k, q1, j)?;
    let p2 = thaine_projection(k, q2, j)?;
    let phi = cyclo::cyclotomic_poly(TowerLevel::new(k)?.char_order())?;
    fn coprime<F: PrimeField>(f: &F, a: &[BigInt], b: &[BigInt], c: &[BigInt]) -> bool {
        let g = poly::gcd(f, &poly::from_bigints(f, a), &poly::from_bigints(f, c));
        let g = poly::gcd(f, &g, &poly::from_bigints(f, b));
        g.len() == 1
    }
    Ok(match l.to_u64() {
        Some(p) if p < 1 << 63 => coprime(&Fp64::new(p), &p1, &p2, &phi),
        _ => coprime(&FpBig::new(l.clone()), &p1, &p2, &phi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn frobenius_orders() {
        // order of 3 in (Z/32)^x / {+-1}, by direct enumeration
        let mut x = 3u64;
        let mut ord = 1;
        while x != 1 && x != 31 {
            x = x * 3 % 32;
            ord += 1;
        }
        assert_eq!(frobenius_order(&b(3), 5).unwrap(), ord);
        assert!(ord >= 4);
        assert_eq!(frobenius_order(&b(17), 4).unwrap(), 1);
        assert_eq!(frobenius_order(&b(7), 4).unwrap(), 2);
        assert_eq!(frobenius_order(&b(31), 4).unwrap(), 1);
        assert_eq!(frobenius_order(&b(257), 9).unwrap(), 2);
        assert!(frobenius_order(&b(2), 4).is_err());
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(residue_exponent(&b(17), 4).unwrap(), b(2));
        assert_eq!(residue_exponent(&b(7), 4).unwrap(), b(6));
        assert_eq!(exponent_degree(&b(7), 4).unwrap(), 2);
        assert!(residue_exponent(&b(11), 4).is_err());
    }

    fn roots_by_scan(k: u32, l: u64) -> Vec<u64> {
        let g = minimal_polynomial(k).unwrap();
        let f = Fp64::new(l);
        let gp = poly::from_bigints(&f, &g);
        (0..l).filter(|&r| poly::eval(&f, &gp, &r) == 0).collect()
    }

    #[test]
    fn minpoly_roots() {
        let fs = factor_minpoly_mod(4, &b(17)).unwrap();
        let mut roots: Vec<u64> = fs.iter().map(|h| (17 - h[0].to_u64().unwrap()) % 17).collect();
        roots.sort();
        assert_eq!(roots, vec![5, 8, 9, 12]);
        assert_eq!(roots, roots_by_scan(4, 17));
        let fs = factor_minpoly_mod(3, &b(7)).unwrap();
        let mut roots: Vec<u64> = fs.iter().map(|h| (7 - h[0].to_u64().unwrap()) % 7).collect();
        roots.sort();
        assert_eq!(roots, vec![3, 4]);
    }

    #[test]
    fn minpoly_factorization_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 50 {
            let k = rng.gen_range(3..=6u32);
            let l = rng.gen_range(3..10_000u64);
            let lb = b(l);
            if !is_prime_u64(l) || exponent_degree(&lb, k).is_err() {
                continue;
            }
            let fs = factor_minpoly_mod(k, &lb).unwrap();
            let f = Fp64::new(l);
            let deg = frobenius_order(&lb, k).unwrap() as usize;
            let mut prod = vec![1u64];
            for h in &fs {
                assert_eq!(h.len(), deg + 1);
                let hp: Vec<u64> = h.iter().map(|c| c.to_u64().unwrap()).collect();
                prod = poly::mul(&f, &prod, &hp);
            }
            assert_eq!(prod, poly::from_bigints(&f, &minimal_polynomial(k).unwrap()));
            done += 1;
        }
    }

    #[test]
    fn micro_oracle() {
        let r = wieferich_test(4, &b(17), TestMode::Fallback).unwrap();
        assert!(r.passes());
        assert_eq!(r.exponent_t, b(2));
        let mut vals: Vec<u64> = r.per_factor.iter().map(|o| o.value[0].to_u64().unwrap()).collect();
        vals.sort();
        vals.dedup();
        assert_eq!(vals, vec![8, 15]);
        assert!(wieferich_test(4, &b(17), TestMode::Shortcut).unwrap().passes());
    }

    #[test]
    fn shortcut_and_fallback_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut done = 0;
        while done < 100 {
            let k = rng.gen_range(3..=6u32);
            let l = rng.gen_range(3..100_000u64);
            if !is_prime_u64(l) || exponent_degree(&b(l), k).is_err() {
                continue;
            }
            let (a, c) = cross_check(k, l, SPLIT_SEED).unwrap();
            assert_eq!(a, c, "k={k} l={l}");
            let s = wieferich_test(k, &b(l), TestMode::Shortcut).unwrap();
            let f = wieferich_test(k, &b(l), TestMode::Fallback).unwrap();
            assert_eq!(s.verdict, f.verdict);
            done += 1;
        }
    }

    #[test]
    fn rejects_bad_primes() {
        assert!(wieferich_test(4, &b(15), TestMode::Shortcut).is_err());
        assert!(wieferich_test(4, &b(11), TestMode::Shortcut).is_err());
        assert!(wieferich_test(4, &b(2), TestMode::Shortcut).is_err());
    }

    #[test]
    fn large_prime_uses_big_field() {
        let l: BigUint = "170141183460469231731687303715884105727".parse().unwrap();
        // 2^127 - 1 = -1 mod 2^k for every k
        let r = wieferich_test(5, &l, TestMode::Shortcut).unwrap();
        assert_eq!(r.exponent_degree, 2);
        assert_eq!(r.residue_degree, 1);
    }

    #[test]
    fn root_set_is_galois_stable() {
        // sigma_a sends 2cos(t) to 2cos(a t), i.e. r to C_a(r) with C_0 = 2,
        // C_1 = x, C_(i+1) = x C_i - C_(i-1); x -> x^2 - 2 maps onto level k-1
        for (k, l) in [(4u32, 17u64), (5, 97), (6, 193), (6, 257)] {
            let roots = roots_by_scan(k, l);
            assert_eq!(roots.len() as u64, 1 << (k - 2));
            for a in (3..(1u64 << k)).step_by(2) {
                for &r in &roots {
                    let (mut c0, mut c1) = (2 % l, r);
                    for _ in 1..a {
                        let next = ((r as u128 * c1 as u128 + (l - c0) as u128) % l as u128) as u64;
                        c0 = c1;
                        c1 = next;
                    }
                    assert!(roots.contains(&c1));
                }
            }
            let lower = roots_by_scan(k - 1, l);
            for &r in &roots {
                assert_eq!(pow_mod(r, l, l), r);
                assert!(lower.contains(&((r * r + l - 2) % l)));
            }
        }
    }

    #[test]
    fn candidate_enumeration() {
        for k in 3..=9u32 {
            let all: Vec<u64> = enumerate_candidates(k, 0, 1 << (k + 2)).collect();
            let half = 1u64 << (k - 1);
            assert_eq!(all.iter().filter(|&&v| v % half == 1).count(), 8);
            assert_eq!(all.iter().filter(|&&v| v % half == half - 1).count(), 8);
            assert!(all.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn small_sieve() {
        let s = fk_sieve(4, 3, 100, &SieveOptions { cross_check: true, ..Default::default() }).unwrap();
        let tested = admissible_primes(4, 3, 100);
        for p in [7, 17, 23, 31, 41, 47, 71, 73, 79, 89, 97] {
            assert!(tested.contains(&p));
        }
        assert_eq!(s.primes_tested, tested.len() as u64);
        assert!(s.disagreements.is_empty());
    }

    #[test]
    fn checkpoint_resume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.txt");
        let opts = SieveOptions { block: 5000, ..Default::default() };
        let first = fk_sieve_with_checkpoint(6, 3, 20_000, &opts, Some(&path)).unwrap();
        let lines = std::fs::read_to_string(&path).unwrap();
        assert_eq!(lines.lines().count(), 4);
        let again = fk_sieve_with_checkpoint(6, 3, 20_000, &opts, Some(&path)).unwrap();
        assert_eq!(again.primes_tested, 0);
        assert_eq!(again.failure_count(), first.failure_count());
        assert_eq!(std::fs::read_to_string(&path).unwrap(), lines);
    }

    #[test]
    fn annihilator_inputs() {
        assert_eq!(smallest_element_of_order(17, 4).unwrap(), 3);
        assert!(smallest_element_of_order(19, 4).is_err());
        assert!(thaine_check(4, 17, 17, 1, &b(7)).is_err());
        let a = thaine_check(4, 17, 97, 1, &b(7)).unwrap();
        assert_eq!(a, thaine_check(4, 17, 97, 1, &b(7)).unwrap());
    }
}
