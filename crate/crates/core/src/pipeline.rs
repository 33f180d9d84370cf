//! Per-level orchestration: Phase A, Phase B and the small-prime sieve slice,
//! assembled into a [`Certificate`].

use std::time::Instant;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bernoulli::{compute_bernoulli, norm_of};
use crate::candidates::assemble_candidates;
use crate::certificate::{
    decide_verdict, Certificate, Dependency, PhaseA, PipelineConfig, SieveRecord, Timings,
    SCHEMA_VERSION,
};
use crate::cyclo::CycInt;
use crate::error::{domain, Error, Result};
use crate::tower::{OddPrimitiveCharacter, TowerLevel};
use crate::wieferich::{fk_sieve, wieferich_test_seeded, SieveOptions, TestMode, WieferichReport};

pub const MIN_VERIFY_LEVEL: u32 = 4;
pub const MAX_VERIFY_LEVEL: u32 = 12;

/// The character index used for Phase A.
pub const PHASE_A_J: u64 = 1;

fn check_level(k: u32) -> Result<()> {
    if !(MIN_VERIFY_LEVEL..=MAX_VERIFY_LEVEL).contains(&k) {
        return Err(domain!(
            "verification runs at levels {MIN_VERIFY_LEVEL}..={MAX_VERIFY_LEVEL}, got {k}"
        ));
    }
    Ok(())
}

pub fn scaled_digest(b: &CycInt) -> String {
    let mut h = Sha256::new();
    h.update(format!("m={};", b.modulus()));
    for c in b.coeffs() {
        h.update(c.to_string());
        h.update(",");
    }
    hex::encode(h.finalize())
}

struct PhaseAOutcome {
    phase_a: PhaseA,
    secs: f64,
    factor_secs: f64,
}

fn run_phase_a(k: u32, config: &PipelineConfig) -> Result<PhaseAOutcome> {
    let start = Instant::now();
    let psi = OddPrimitiveCharacter::new(TowerLevel::new(k)?, PHASE_A_J)?;
    let b = compute_bernoulli(&psi)?;
    let digest = scaled_digest(&b.scaled);
    let norm = match norm_of(&b) {
        Ok(n) => n,
        Err(Error::NormVanishes { .. }) => {
            return Ok(PhaseAOutcome {
                phase_a: PhaseA {
                    j: PHASE_A_J,
                    scaled_digest: digest,
                    norm: BigUint::default(),
                    norm_digits: 1,
                    candidates: None,
                },
                secs: start.elapsed().as_secs_f64(),
                factor_secs: 0.0,
            })
        }
        Err(e) => return Err(e),
    };
    let factor_start = Instant::now();
    let candidates = assemble_candidates(k, &norm, &config.factor, config.sieve_threshold)?;
    let factor_secs = factor_start.elapsed().as_secs_f64();
    Ok(PhaseAOutcome {
        phase_a: PhaseA {
            j: PHASE_A_J,
            scaled_digest: digest,
            norm_digits: norm.to_string().len(),
            norm,
            candidates: Some(candidates),
        },
        secs: start.elapsed().as_secs_f64(),
        factor_secs,
    })
}

fn run_sieve(k: u32, config: &PipelineConfig) -> Result<Option<(SieveRecord, f64)>> {
    let Some((lo, hi)) = config.small_prime_range else {
        return Ok(None);
    };
    let start = Instant::now();
    let opts = SieveOptions {
        seed: config.split_seed,
        ..SieveOptions::default()
    };
    let s = fk_sieve(k, lo, hi, &opts)?;
    let failing_primes = s
        .failures
        .iter()
        .map(|r| u64::try_from(&r.prime).expect("sieve primes are word-sized"))
        .collect();
    Ok(Some((
        SieveRecord {
            lo,
            hi,
            primes_tested: s.primes_tested,
            failures: s.failure_count(),
            failing_primes,
            disagreements: s.disagreements,
        },
        start.elapsed().as_secs_f64(),
    )))
}

fn assumptions_for(k: u32, config: &PipelineConfig) -> Vec<String> {
    let t = config.sieve_threshold;
    let half = 1u64 << (k - 1);
    let covered = match config.small_prime_range {
        None => 0,
        Some((lo, hi)) if lo <= 3 => hi,
        Some(_) => 0,
    };
    if covered > t {
        return Vec::new();
    }
    vec![format!(
        "no prime l in [{covered}, {t}] with l = +-1 mod {half} divides h_{k}^+ (small-prime sieve bound, not recomputed)"
    )]
}

/// Runs Phase A and the sieve slice concurrently, then Phase B on survivors.
pub fn verify_level(k: u32, config: &PipelineConfig, dependency: Dependency) -> Result<Certificate> {
    check_level(k)?;
    let start = Instant::now();
    let (a, sieve) = rayon::join(|| run_phase_a(k, config), || run_sieve(k, config));
    let a = a?;
    let sieve = sieve?;
    let phase_b_start = Instant::now();
    let survivors: Vec<BigUint> = a
        .phase_a
        .candidates
        .as_ref()
        .map(|c| c.survivors.clone())
        .unwrap_or_default();
    let phase_b: Vec<WieferichReport> = survivors
        .par_iter()
        .map(|l| wieferich_test_seeded(k, l, TestMode::Shortcut, config.split_seed))
        .collect::<Result<_>>()?;
    let phase_b_secs = phase_b_start.elapsed().as_secs_f64();
    let (sieve_record, sieve_secs) = match sieve {
        Some((r, s)) => (Some(r), s),
        None => (None, 0.0),
    };
    let verdict = decide_verdict(&a.phase_a, &phase_b, sieve_record.as_ref(), config);
    Ok(Certificate {
        schema_version: SCHEMA_VERSION,
        k,
        config: config.clone(),
        dependency,
        assumptions: assumptions_for(k, config),
        phase_a: a.phase_a,
        phase_b,
        small_prime_sieve: sieve_record,
        verdict,
        timings: Timings {
            phase_a_secs: a.secs,
            factor_secs: a.factor_secs,
            phase_b_secs,
            sieve_secs,
            total_secs: start.elapsed().as_secs_f64(),
        },
    })
}

/// The dependency recorded for the first level of a run.
pub fn base_dependency(k: u32, config: &PipelineConfig) -> Dependency {
    let statement = config
        .base_assumption
        .clone()
        .unwrap_or_else(|| format!("h_{}^+ = 1 (assumed)", k - 1));
    Dependency::Assumption {
        level: k - 1,
        statement,
    }
}

/// Levels `k_from..=k_to` in order, stopping after the first inconclusive one.
pub fn verify_tower(k_from: u32, k_to: u32, config: &PipelineConfig) -> Result<Vec<Certificate>> {
    if k_from > k_to {
        return Err(domain!("empty level range {k_from}..={k_to}"));
    }
    check_level(k_from)?;
    check_level(k_to)?;
    let mut out: Vec<Certificate> = Vec::new();
    let mut dep = base_dependency(k_from, config);
    for k in k_from..=k_to {
        let cert = verify_level(k, config, dep)?;
        let verified = cert.verdict.is_verified();
        dep = Dependency::Certificate {
            level: k,
            digest: cert.digest()?,
        };
        out.push(cert);
        if !verified {
            break;
        }
    }
    Ok(out)
}

/// One named check of the exhaustive small-level suite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfTestItem {
    pub name: String,
    pub passed: bool,
}

/// Exhaustive internal-consistency checks at levels `k <= 6`.
pub fn selftest() -> Vec<SelfTestItem> {
    use crate::bernoulli::{
        orbit_invariance_check, scaled_bernoulli, stickelberger_eval_check,
    };
    use crate::cyclo::{field_norm, field_norm_by_conjugates, unit_norm_check};
    use crate::group_ring::{idempotent, norm_element_action, GroupRingElt};
    use crate::tower::{two_adic_compose, two_adic_decompose, DirichletChar};

    let mut items = Vec::new();
    let mut check = |name: &str, f: &dyn Fn() -> Result<bool>| {
        items.push(SelfTestItem {
            name: name.to_string(),
            passed: f().unwrap_or(false),
        });
    };
    let levels = 3..=6u32;
    check("two-adic decomposition round-trips", &|| {
        for k in levels.clone() {
            let level = TowerLevel::new(k)?;
            for a in (1..level.conductor()).step_by(2) {
                if two_adic_compose(two_adic_decompose(a, level)?, level) != a {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    });
    check("idempotents are complete and orthogonal", &|| {
        for (n, l) in [(4u64, 5u64), (8, 17), (16, 17)] {
            let es: Vec<GroupRingElt> = (0..n).map(|j| idempotent(j, n, l)).collect::<Result<_>>()?;
            let mut sum = GroupRingElt::zero(l, n as usize)?;
            for (i, e) in es.iter().enumerate() {
                sum = &sum + e;
                for (j, f) in es.iter().enumerate() {
                    let p = e * f;
                    let want = if i == j { e.clone() } else { GroupRingElt::zero(l, n as usize)? };
                    if p != want {
                        return Ok(false);
                    }
                }
            }
            if sum != GroupRingElt::one(l, n as usize)? {
                return Ok(false);
            }
            for j in 0..n {
                let full = j % 2 == 1;
                let want = if full { 0 } else { 2 };
                if norm_element_action(j, n, l)? != want {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    });
    check("cyclotomic units have norm +-1", &|| {
        for k in levels.clone() {
            for a in (3..(1u64 << k)).step_by(2) {
                if !unit_norm_check(k, a)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    });
    check("paired and direct Bernoulli sums agree", &|| {
        for k in levels.clone() {
            let level = TowerLevel::new(k)?;
            for j in (1..level.char_order()).step_by(2) {
                compute_bernoulli(&OddPrimitiveCharacter::new(level, j)?)?;
            }
        }
        Ok(true)
    });
    check("even nontrivial characters have B_1 = 0", &|| {
        for k in levels.clone() {
            for chi in DirichletChar::all(TowerLevel::new(k)?).filter(|c| !c.odd && !c.is_trivial()) {
                if !scaled_bernoulli(&chi)?.is_zero() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    });
    check("odd primitive characters satisfy |B_1| <= 2^(k-2)", &|| {
        for k in levels.clone() {
            let level = TowerLevel::new(k)?;
            for j in (1..level.char_order()).step_by(2) {
                if !compute_bernoulli(&OddPrimitiveCharacter::new(level, j)?)?.within_size_bound()? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    });
    check("Stickelberger evaluation matches B_1 of the inverse", &|| {
        for k in levels.clone() {
            for chi in DirichletChar::all(TowerLevel::new(k)?).filter(|c| !c.is_trivial()) {
                if !stickelberger_eval_check(&chi)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    });
    check("Galois orbits share one norm", &|| {
        for k in levels.clone() {
            if !orbit_invariance_check(k)? {
                return Ok(false);
            }
        }
        Ok(true)
    });
    check("resultant and conjugate-product norms agree", &|| {
        for k in levels.clone() {
            let level = TowerLevel::new(k)?;
            for j in (1..level.char_order()).step_by(2) {
                let b = compute_bernoulli(&OddPrimitiveCharacter::new(level, j)?)?;
                if field_norm(&b.scaled)? != field_norm_by_conjugates(&b.scaled)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    });
    items
}
