//! Integer factorization: trial division, Brent's variant of Pollard rho, and
//! an optional external backend process.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, integrity, Result};
use crate::modular::{is_probable_prime, MR_SEED};
use crate::primes::small_primes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorMethod {
    Trial,
    Rho,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeFactor {
    #[serde(with = "crate::serde_dec")]
    pub prime: BigUint,
    pub exponent: u32,
    pub method: FactorMethod,
}

/// `input = prod prime^exponent * unresolved_cofactor`, with the cofactor
/// either 1 or a number that failed a primality test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorizationResult {
    #[serde(with = "crate::serde_dec")]
    pub input: BigUint,
    pub factors: Vec<PrimeFactor>,
    #[serde(with = "crate::serde_dec")]
    pub unresolved_cofactor: BigUint,
}

impl FactorizationResult {
    pub fn is_complete(&self) -> bool {
        self.unresolved_cofactor.is_one()
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|f| &f.prime)
    }

    pub fn product(&self) -> BigUint {
        self.factors.iter().fold(self.unresolved_cofactor.clone(), |acc, f| {
            acc * f.prime.pow(f.exponent)
        })
    }

    /// Reconstruction, primality of every listed prime, and compositeness of
    /// the cofactor.
    pub fn validate(&self, seed: u64) -> Result<()> {
        if self.product() != self.input {
            return Err(integrity!("factorization does not reconstruct {}", self.input));
        }
        for f in &self.factors {
            if f.exponent == 0 || !is_probable_prime(&f.prime, seed) {
                return Err(integrity!("listed factor {} is not a prime power", f.prime));
            }
        }
        let c = &self.unresolved_cofactor;
        if c.is_zero() || (!c.is_one() && is_probable_prime(c, seed)) {
            return Err(integrity!("unresolved cofactor {c} is not composite"));
        }
        Ok(())
    }
}

/// Limits and backend for [`factor`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorConfig {
    pub trial_bound: u64,
    /// Brent iterations per rho attempt.
    pub rho_iterations: u64,
    /// Number of distinct polynomial constants tried per composite.
    pub rho_attempts: u64,
    /// Wall-clock limit for rho, in seconds.
    pub budget_secs: f64,
    pub backend: Option<PathBuf>,
    pub backend_timeout_secs: f64,
    pub seed: u64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            trial_bound: 1_000_000,
            rho_iterations: 1 << 22,
            rho_attempts: 16,
            budget_secs: 120.0,
            backend: None,
            backend_timeout_secs: 3600.0,
            seed: MR_SEED,
        }
    }
}

/// Brent rho on a word-sized composite.
fn rho_u64(n: u64, c: u64, max_iter: u64, stop: &dyn Fn() -> bool) -> Option<u64> {
    let mulm = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let f = |x: u64| ((mulm(x, x) as u128 + c as u128) % n as u128) as u64;
    let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
    let (mut x, mut ys);
    let mut iters = 0u64;
    loop {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        loop {
            ys = y;
            let batch = 128.min(r - k);
            for _ in 0..batch {
                y = f(y);
                q = mulm(q, x.abs_diff(y));
            }
            iters += batch;
            let g = q.gcd(&n);
            k += batch;
            if g != 1 {
                if g != n {
                    return Some(g);
                }
                // backtrack one step at a time
                loop {
                    ys = f(ys);
                    let g = x.abs_diff(ys).gcd(&n);
                    if g != 1 {
                        return (g != n).then_some(g);
                    }
                }
            }
            if k >= r || iters >= max_iter {
                break;
            }
        }
        if iters >= max_iter || stop() {
            return None;
        }
        r *= 2;
    }
}

/// Brent rho on an arbitrary composite.
fn rho_big(n: &BigUint, c: u64, max_iter: u64, stop: &dyn Fn() -> bool) -> Option<BigUint> {
    if let Some(small) = n.to_u64() {
        return rho_u64(small, c, max_iter, stop).map(BigUint::from);
    }
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    let (mut y, mut r, mut q) = (BigUint::from(2u32), 1u64, BigUint::one());
    let mut x;
    let mut ys;
    let mut iters = 0u64;
    loop {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        loop {
            ys = y.clone();
            let batch = 128.min(r - k);
            for _ in 0..batch {
                y = f(&y);
                q = q * diff(&x, &y) % n;
            }
            iters += batch;
            k += batch;
            let g = q.gcd(n);
            if !g.is_one() {
                if &g != n {
                    return Some(g);
                }
                loop {
                    ys = f(&ys);
                    let g = diff(&x, &ys).gcd(n);
                    if !g.is_one() {
                        return (&g != n).then_some(g);
                    }
                }
            }
            if k >= r || iters >= max_iter {
                break;
            }
        }
        if iters >= max_iter || stop() {
            return None;
        }
        r *= 2;
    }
}

/// Runs rho attempts with constants `1..=attempts` in parallel. The lowest
/// successful constant wins, so the split is independent of scheduling;
/// attempts with larger constants stop once a smaller one has succeeded.
fn rho_split(n: &BigUint, cfg: &FactorConfig, deadline: Instant) -> Option<BigUint> {
    let best = AtomicU64::new(u64::MAX);
    let results: Vec<Option<BigUint>> = (1..=cfg.rho_attempts)
        .into_par_iter()
        .map(|c| {
            let stop = || best.load(Ordering::Relaxed) < c || Instant::now() >= deadline;
            if stop() {
                return None;
            }
            let r = rho_big(n, c, cfg.rho_iterations, &stop);
            if r.is_some() {
                best.fetch_min(c, Ordering::Relaxed);
            }
            r
        })
        .collect();
    results.into_iter().flatten().next()
}

/// Asks the external backend to factor `n`. Returned factors are each checked
/// for primality and divisibility; anything else is discarded.
pub fn external_factor(n: &BigUint, path: &PathBuf, timeout: Duration, seed: u64) -> Result<Vec<BigUint>> {
    let mut child = Command::new(path)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()?;
    {
        let mut stdin = child.stdin.take().expect("piped stdin");
        // a backend that exits early closes the pipe
        let _ = writeln!(stdin, "{n}");
    }
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let start = Instant::now();
    let status = loop {
        if let Some(st) = child.try_wait()? {
            break Some(st);
        }
        if start.elapsed() >= timeout {
            let _ = child.kill();
            let _ = child.wait();
            break None;
        }
        std::thread::sleep(Duration::from_millis(10));
    };
    let text = reader.join().unwrap_or_default();
    match status {
        Some(st) if st.success() => {}
        Some(_) => return Err(domain!("factor backend reported failure")),
        None => return Err(domain!("factor backend timed out")),
    }
    let mut rest = n.clone();
    let mut out = Vec::new();
    for token in text.split_whitespace() {
        let Ok(p) = token.parse::<BigUint>() else { continue };
        if p > BigUint::one() && (&rest % &p).is_zero() && is_probable_prime(&p, seed) {
            rest /= &p;
            out.push(p);
        }
    }
    Ok(out)
}

struct Collector {
    primes: Vec<(BigUint, FactorMethod)>,
    unresolved: Vec<BigUint>,
}

impl Collector {
    fn push_prime(&mut self, p: BigUint, m: FactorMethod) {
        self.primes.push((p, m));
    }
}

fn strip(n: &mut BigUint, p: &BigUint) -> u32 {
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return e;
        }
        *n = q;
        e += 1;
    }
}

/// Factors `n >= 1` within the configured limits.
pub fn factor(n: &BigUint, cfg: &FactorConfig) -> Result<FactorizationResult> {
    if n.is_zero() {
        return Err(domain!("cannot factor zero"));
    }
    let deadline = Instant::now() + Duration::from_secs_f64(cfg.budget_secs.max(0.0));
    let mut col = Collector {
        primes: Vec::new(),
        unresolved: Vec::new(),
    };
    let mut rest = n.clone();
    for p in small_primes(cfg.trial_bound.max(3)) {
        let pb = BigUint::from(p);
        if &pb * &pb > rest {
            break;
        }
        for _ in 0..strip(&mut rest, &pb) {
            col.push_prime(pb.clone(), FactorMethod::Trial);
        }
    }
    let mut stack = Vec::new();
    if !rest.is_one() {
        if is_probable_prime(&rest, cfg.seed) {
            col.push_prime(rest, FactorMethod::Trial);
        } else {
            stack.push(rest);
        }
    }
    let mut stuck = Vec::new();
    while let Some(c) = stack.pop() {
        match rho_split(&c, cfg, deadline) {
            Some(d) => {
                let e = &c / &d;
                for part in [d, e] {
                    if is_probable_prime(&part, cfg.seed) {
                        col.push_prime(part, FactorMethod::Rho);
                    } else {
                        stack.push(part);
                    }
                }
            }
            None => stuck.push(c),
        }
    }
    for c in stuck {
        let Some(path) = &cfg.backend else {
            col.unresolved.push(c);
            continue;
        };
        let timeout = Duration::from_secs_f64(cfg.backend_timeout_secs.max(0.0));
        let found = external_factor(&c, path, timeout, cfg.seed).unwrap_or_default();
        let mut left = c;
        for p in found {
            left /= &p;
            col.push_prime(p, FactorMethod::External);
        }
        if !left.is_one() {
            if is_probable_prime(&left, cfg.seed) {
                col.push_prime(left, FactorMethod::External);
            } else {
                col.unresolved.push(left);
            }
        }
    }
    finish(n, col, cfg.seed)
}

fn finish(n: &BigUint, mut col: Collector, seed: u64) -> Result<FactorizationResult> {
    col.primes.sort();
    let mut factors: Vec<PrimeFactor> = Vec::new();
    for (p, m) in col.primes {
        match factors.last_mut() {
            Some(last) if last.prime == p => {
                last.exponent += 1;
                last.method = last.method.min(m);
            }
            _ => factors.push(PrimeFactor {
                prime: p,
                exponent: 1,
                method: m,
            }),
        }
    }
    let unresolved_cofactor = col.unresolved.iter().fold(BigUint::one(), |a, b| a * b);
    let result = FactorizationResult {
        input: n.clone(),
        factors,
        unresolved_cofactor,
    };
    result.validate(seed)?;
    Ok(result)
}
