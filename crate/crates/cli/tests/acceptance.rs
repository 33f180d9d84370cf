//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINABLE` are computed in full and reported
//! as FAIL; the target exits nonzero only if the observed failures differ
//! from that list.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use weber_core::bernoulli::{
    bounds_report, compute_bernoulli, orbit_invariance_check, scaled_bernoulli,
    second_moment_total, stickelberger_eval_check,
};
use weber_core::certificate::{Certificate, Verdict};
use weber_core::group_ring::{
    character_value, idempotent, norm_element, norm_element_action, GroupRingElt,
};
use weber_core::tower::DirichletChar;
use weber_core::wieferich::{fk_sieve, wieferich_test, SieveOptions, TestMode};
use weber_core::{OddPrimitiveCharacter, TowerLevel};

/// Criteria whose stated outcome is contradicted by exact computation.
const KNOWN_UNATTAINABLE: &[u32] = &[2, 5, 9];

type Outcome = Result<String, String>;
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn weber(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_weber"))
        .args(args)
        .output()
        .expect("spawn weber");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn within(limit: Duration, start: Instant) -> std::result::Result<(), String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(())
    } else {
        Err(format!("took {:.1}s, limit {}s", t.as_secs_f64(), limit.as_secs()))
    }
}

fn load(path: &Path) -> std::result::Result<Certificate, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    Certificate::from_json(&text).map_err(|e| e.to_string())
}

struct Workdir {
    _dir: tempfile::TempDir,
    first: PathBuf,
    second: PathBuf,
}

impl Workdir {
    fn new() -> Self {
        let dir = tempfile::tempdir().expect("tempdir");
        let first = dir.path().join("run1");
        let second = dir.path().join("run2");
        std::fs::create_dir_all(&first).unwrap();
        std::fs::create_dir_all(&second).unwrap();
        Workdir { _dir: dir, first, second }
    }

    fn cert(&self, run: &Path, k: u32) -> PathBuf {
        run.join(format!("cert-k{k}.json"))
    }
}

fn c1_k7_norm() -> Outcome {
    let start = Instant::now();
    let (code, out, err) = weber(&["bernoulli-norm", "--k", "7"]);
    if code != 0 {
        return Err(format!("exit {code}: {err}"));
    }
    if !out.lines().any(|l| l == "norm = 692092928") {
        return Err(format!("unexpected norm in output:\n{out}"));
    }
    if !out.lines().any(|l| l == "factorization = 2^15 * 21121") {
        return Err("factorization is not 2^15 * 21121".into());
    }
    let odd_part: u64 = out
        .lines()
        .find_map(|l| l.strip_prefix("factorization = 2^15 * "))
        .and_then(|s| s.parse().ok())
        .ok_or("odd factor not found")?;
    if odd_part % 64 != 1 {
        return Err(format!("{odd_part} is not 1 mod 64"));
    }
    within(Duration::from_secs(60), start)?;
    Ok(format!("692092928 = 2^15 * 21121 in {:.2}s", start.elapsed().as_secs_f64()))
}

fn verify_into(dir: &Path, k: u32) -> std::result::Result<i32, String> {
    let path = dir.join(format!("cert-k{k}.json"));
    let (code, _, err) = weber(&["verify", "--k", &k.to_string(), "--out", path.to_str().unwrap()]);
    if code == 1 {
        return Err(format!("verify --k {k} errored: {err}"));
    }
    Ok(code)
}

fn c2_empty_survivors(w: &Workdir) -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    for k in 4..=7 {
        verify_into(&w.first, k)?;
        let cert = load(&w.cert(&w.first, k))?;
        let survivors = cert
            .phase_a
            .candidates
            .as_ref()
            .map(|c| c.survivors.len())
            .ok_or_else(|| format!("k={k}: norm vanished"))?;
        if survivors != 0 {
            problems.push(format!("k={k}: {survivors} survivors"));
        }
        if let Verdict::Inconclusive(reasons) = &cert.verdict {
            problems.push(format!("k={k}: inconclusive ({})", reasons.join("; ")));
        }
    }
    within(Duration::from_secs(300), start)?;
    if problems.is_empty() {
        Ok("k=4..7 verified with empty survivor sets".into())
    } else {
        Err(problems.join(" | "))
    }
}

fn c3_k9_digits(w: &Workdir) -> Outcome {
    let start = Instant::now();
    verify_into(&w.first, 9)?;
    let cert = load(&w.cert(&w.first, 9))?;
    let digits = cert.phase_a.norm_digits;
    if digits != cert.phase_a.norm.to_string().len() {
        return Err("recorded digit count is wrong".into());
    }
    if digits > 63 {
        return Err(format!("{digits} digits > 63"));
    }
    within(Duration::from_secs(1800), start)?;
    Ok(format!("{digits} digits (<= 63)"))
}

fn c4_bounds_k10() -> Outcome {
    let r = bounds_report(10).map_err(|e| e.to_string())?;
    let got = (r.worst_case_digits(), r.second_moment_digits(), r.functional_eq_digits());
    if got == (309, 143, 213) {
        Ok(format!("{got:?}"))
    } else {
        Err(format!("{got:?} != (309, 143, 213)"))
    }
}

fn c5_second_moment() -> Outcome {
    let mut bad = Vec::new();
    for k in 3..=6u32 {
        let got = second_moment_total(k).map_err(|e| e.to_string())?;
        let want = BigRational::new(
            BigInt::from((1u64 << (2 * k - 2)) + (1u64 << (k - 1))),
            BigInt::from(12),
        );
        if got != want {
            bad.push(format!("k={k}: {got} != {want}"));
        }
    }
    if bad.is_empty() {
        Ok("closed form holds for k=3..6".into())
    } else {
        Err(bad.join(", "))
    }
}

fn c6_vanishing_and_size() -> Outcome {
    let mut even = 0;
    let mut odd = 0;
    for k in 3..=6u32 {
        let level = TowerLevel::new(k).map_err(|e| e.to_string())?;
        for chi in DirichletChar::all(level).filter(|c| !c.odd && !c.is_trivial()) {
            if !scaled_bernoulli(&chi).map_err(|e| e.to_string())?.is_zero() {
                return Err(format!("k={k}: even character {chi:?} has B_1 != 0"));
            }
            even += 1;
        }
        for j in (1..level.char_order()).step_by(2) {
            let psi = OddPrimitiveCharacter::new(level, j).map_err(|e| e.to_string())?;
            let b = compute_bernoulli(&psi).map_err(|e| e.to_string())?;
            if !b.within_size_bound().map_err(|e| e.to_string())? {
                return Err(format!("k={k}, j={j}: |B_1| exceeds 2^(k-2)"));
            }
            odd += 1;
        }
    }
    Ok(format!("{even} even characters vanish, {odd} odd primitive within bound"))
}

fn c7_orbit_invariance() -> Outcome {
    for k in 4..=7 {
        if !orbit_invariance_check(k).map_err(|e| e.to_string())? {
            return Err(format!("norms differ across the orbit at k={k}"));
        }
    }
    Ok("k=4..7 exhaustive".into())
}

fn c8_micro_oracle() -> Outcome {
    let r = wieferich_test(4, &BigUint::from(17u32), TestMode::Fallback).map_err(|e| e.to_string())?;
    if !r.passes() {
        return Err("k=4, l=17 does not pass".into());
    }
    let values: BTreeSet<u32> = r
        .per_factor
        .iter()
        .map(|o| match o.value.as_slice() {
            [v] => u32::try_from(v).unwrap_or(u32::MAX),
            _ => u32::MAX,
        })
        .collect();
    if values == BTreeSet::from([8, 15]) {
        Ok("per-root values {8, 15} mod 17".into())
    } else {
        Err(format!("per-root values {values:?}"))
    }
}

fn c9_sieve_slice() -> Outcome {
    let start = Instant::now();
    let opts = SieveOptions { cross_check: true, ..SieveOptions::default() };
    let s = fk_sieve(9, 3, 1_000_000, &opts).map_err(|e| e.to_string())?;
    within(Duration::from_secs(600), start)?;
    let summary = format!(
        "{} primes, {} failures, {} disagreements, {:.1}s",
        s.primes_tested,
        s.failure_count(),
        s.disagreements.len(),
        start.elapsed().as_secs_f64()
    );
    if s.failure_count() == 0 && s.disagreements.is_empty() {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn c10_idempotents() -> Outcome {
    for (n, l) in [(4u64, 5u64), (8, 17), (16, 17)] {
        let size = n as usize;
        let err = |e: weber_core::Error| e.to_string();
        let es: Vec<GroupRingElt> = (0..n).map(|j| idempotent(j, n, l)).collect::<Result<_, _>>().map_err(err)?;
        let zero = GroupRingElt::zero(l, size).map_err(err)?;
        let sigma = GroupRingElt::sigma_power(l, size, 1).map_err(err)?;
        let nrm = norm_element(n, l).map_err(err)?;
        let mut sum = zero.clone();
        for (i, e) in es.iter().enumerate() {
            if &(e * e) != e {
                return Err(format!("(n,l)=({n},{l}): e_{i} not idempotent"));
            }
            for (j, f) in es.iter().enumerate() {
                if i != j && e * f != zero {
                    return Err(format!("(n,l)=({n},{l}): e_{i} e_{j} != 0"));
                }
            }
            let chi = character_value(i as u64, 1, n, l).map_err(err)?;
            if &sigma * e != e.scale(chi) {
                return Err(format!("(n,l)=({n},{l}): sigma e_{i} != chi(sigma) e_{i}"));
            }
            let scalar = norm_element_action(i as u64, n, l).map_err(err)?;
            let want = if i % 2 == 1 { 0 } else { 2 };
            if scalar != want || &nrm * e != e.scale(want) {
                return Err(format!("(n,l)=({n},{l}): norm element acts on e_{i} by {scalar}"));
            }
            sum = &sum + e;
        }
        if sum != GroupRingElt::one(l, size).map_err(err)? {
            return Err(format!("(n,l)=({n},{l}): idempotents do not sum to 1"));
        }
    }
    Ok("idempotency, orthogonality, completeness, eigenvalues, norm scalars".into())
}

fn c11_stickelberger() -> Outcome {
    let mut count = 0;
    for k in 3..=6u32 {
        let level = TowerLevel::new(k).map_err(|e| e.to_string())?;
        for chi in DirichletChar::all(level).filter(|c| c.odd) {
            if !stickelberger_eval_check(&chi).map_err(|e| e.to_string())? {
                return Err(format!("k={k}: mismatch for {chi:?}"));
            }
            count += 1;
        }
    }
    Ok(format!("{count} odd characters"))
}

fn c12_audit_roundtrip(w: &Workdir) -> Outcome {
    let levels = [4u32, 5, 6, 7, 9];
    for &k in &levels {
        let first = w.cert(&w.first, k);
        if !first.exists() {
            verify_into(&w.first, k)?;
        }
        verify_into(&w.second, k)?;
        let path = first.to_str().unwrap();
        let (code, out, err) = weber(&["audit", "--cert", path]);
        if code != 0 {
            return Err(format!("audit k={k} exit {code}: {out}{err}"));
        }
        let a = load(&first)?;
        let b = load(&w.cert(&w.second, k))?;
        let (ca, cb) = (a.canonical_json().map_err(|e| e.to_string())?, b.canonical_json().map_err(|e| e.to_string())?);
        if ca != cb {
            return Err(format!("k={k}: reruns differ outside timings"));
        }
        let reread = Certificate::from_json(&a.to_json().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if reread != a {
            return Err(format!("k={k}: JSON round-trip changed the certificate"));
        }
    }
    Ok(format!("levels {levels:?}: audits consistent, reruns identical"))
}

fn main() {
    let w = Workdir::new();
    let criteria: Vec<Criterion> = vec![
        (1, "k=7 norm reproduction", Box::new(c1_k7_norm)),
        (2, "empty survivor sets and verified verdict for k=4..7", Box::new(|| c2_empty_survivors(&w))),
        (3, "k=9 norm digit count", Box::new(|| c3_k9_digits(&w))),
        (4, "bound digit counts at k=10", Box::new(c4_bounds_k10)),
        (5, "second-moment closed form", Box::new(c5_second_moment)),
        (6, "even vanishing and odd size bound", Box::new(c6_vanishing_and_size)),
        (7, "Galois-orbit norm invariance", Box::new(c7_orbit_invariance)),
        (8, "Wieferich micro-oracle", Box::new(c8_micro_oracle)),
        (9, "k=9 sieve slice [3, 10^6)", Box::new(c9_sieve_slice)),
        (10, "idempotent algebra", Box::new(c10_idempotents)),
        (11, "Stickelberger evaluation", Box::new(c11_stickelberger)),
        (12, "certificate audit round-trip", Box::new(|| c12_audit_roundtrip(&w))),
    ];
    let mut failed = BTreeSet::new();
    for (n, name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail}"),
            Err(why) => {
                println!("FAIL {n:>2} {name}: {why}");
                failed.insert(*n);
            }
        }
    }
    let known: BTreeSet<u32> = KNOWN_UNATTAINABLE.iter().copied().collect();
    let passed = criteria.len() - failed.len();
    println!("{passed}/{} criteria pass", criteria.len());
    if failed != known {
        let unexpected: Vec<_> = failed.difference(&known).collect();
        let recovered: Vec<_> = known.difference(&failed).collect();
        println!("unexpected failures: {unexpected:?}; known failures now passing: {recovered:?}");
        std::process::exit(1);
    }
}
