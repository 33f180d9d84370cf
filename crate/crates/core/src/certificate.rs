//! Versioned, auditable records of one level's verification.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::candidates::{candidates_from_factorization, CandidateSet};
use crate::error::Result;
use crate::factor::FactorConfig;
use crate::wieferich::{frobenius_order, residue_exponent, WieferichReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Configuration recorded in every certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Primes at or below this are left to the small-prime sieve.
    pub sieve_threshold: u64,
    /// Sieve slice `[lo, hi)` run alongside Phase A; `None` skips it and
    /// records the small-prime range as an assumption.
    pub small_prime_range: Option<(u64, u64)>,
    pub factor: FactorConfig,
    /// Seed for equal-degree splitting in Phase B and the sieve.
    pub split_seed: u64,
    /// Statement cited for level `k_from - 1` by a tower run.
    pub base_assumption: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sieve_threshold: crate::candidates::DEFAULT_SIEVE_THRESHOLD,
            small_prime_range: Some((3, 1_000_000)),
            factor: FactorConfig::default(),
            split_seed: crate::wieferich::SPLIT_SEED,
            base_assumption: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Dependency {
    /// The previous level was verified in the same run.
    Certificate { level: u32, digest: String },
    /// The previous level's class number is taken as given.
    Assumption { level: u32, statement: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseA {
    pub j: u64,
    /// SHA-256 of the scaled Bernoulli coefficients in decimal.
    pub scaled_digest: String,
    #[serde(with = "crate::serde_dec")]
    pub norm: BigUint,
    pub norm_digits: usize,
    /// Absent when the norm vanishes.
    pub candidates: Option<CandidateSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveRecord {
    pub lo: u64,
    pub hi: u64,
    pub primes_tested: u64,
    pub failures: u64,
    pub failing_primes: Vec<u64>,
    pub disagreements: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reasons", rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Inconclusive(Vec<String>),
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub phase_a_secs: f64,
    pub factor_secs: f64,
    pub phase_b_secs: f64,
    pub sieve_secs: f64,
    pub total_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub k: u32,
    pub config: PipelineConfig,
    pub dependency: Dependency,
    /// Facts taken as given rather than computed.
    pub assumptions: Vec<String>,
    pub phase_a: PhaseA,
    pub phase_b: Vec<WieferichReport>,
    pub small_prime_sieve: Option<SieveRecord>,
    pub verdict: Verdict,
    pub timings: Timings,
}

impl Certificate {
    /// JSON with timings zeroed; identical across reruns with the same config.
    pub fn canonical_json(&self) -> Result<String> {
        let mut c = self.clone();
        c.timings = Timings::default();
        Ok(serde_json::to_string_pretty(&c)?)
    }

    pub fn digest(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical_json()?.as_bytes())))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// The verdict implied by a certificate's recorded data.
pub fn decide_verdict(
    phase_a: &PhaseA,
    phase_b: &[WieferichReport],
    sieve: Option<&SieveRecord>,
    config: &PipelineConfig,
) -> Verdict {
    let mut reasons = Vec::new();
    match &phase_a.candidates {
        None => reasons.push("Bernoulli norm vanishes".to_string()),
        Some(c) => {
            if let Some(u) = &c.unresolved {
                reasons.push(format!("unresolved cofactor {u}"));
            }
            for l in &c.survivors {
                match phase_b.iter().find(|r| &r.prime == l) {
                    None => reasons.push(format!("survivor {l} was not tested")),
                    Some(r) if !r.passes() => {
                        reasons.push(format!("Wieferich test inconclusive for {l}"))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    match (config.small_prime_range, sieve) {
        (Some(_), None) => reasons.push("small-prime sieve slice missing".to_string()),
        (Some((lo, hi)), Some(s)) => {
            if (s.lo, s.hi) != (lo, hi) {
                reasons.push(format!("sieve covered [{}, {}) instead of [{lo}, {hi})", s.lo, s.hi));
            }
            if s.failures > 0 {
                reasons.push(format!(
                    "small-prime sieve found {} primes failing the Wieferich test",
                    s.failures
                ));
            }
            if !s.disagreements.is_empty() {
                reasons.push("sieve shortcut and per-factor tests disagree".to_string());
            }
        }
        (None, _) => {}
    }
    if reasons.is_empty() {
        Verdict::Verified
    } else {
        Verdict::Inconclusive(reasons)
    }
}

/// Outcome of re-validating a certificate from its own data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub k: u32,
    pub recorded: Verdict,
    pub recomputed: Verdict,
    pub problems: Vec<String>,
}

impl AuditReport {
    pub fn consistent(&self) -> bool {
        self.problems.is_empty() && self.recorded == self.recomputed
    }
}

/// Re-checks reconstruction, primality, filters, Phase B exponents and the
/// verdict rule without recomputing the norm or rerunning any test.
pub fn audit(cert: &Certificate) -> AuditReport {
    let mut problems = Vec::new();
    let k = cert.k;
    if cert.schema_version != SCHEMA_VERSION {
        problems.push(format!("unknown schema version {}", cert.schema_version));
    }
    let expected_dep_level = k.saturating_sub(1);
    let dep_level = match &cert.dependency {
        Dependency::Certificate { level, .. } | Dependency::Assumption { level, .. } => *level,
    };
    if dep_level != expected_dep_level {
        problems.push(format!("dependency names level {dep_level}, expected {expected_dep_level}"));
    }
    let pa = &cert.phase_a;
    if pa.norm_digits != pa.norm.to_string().len() {
        problems.push("recorded digit count does not match the norm".to_string());
    }
    if let Some(c) = &pa.candidates {
        let f = &c.factorization;
        if f.input != pa.norm || c.norm != pa.norm {
            problems.push("factorization input differs from the norm".to_string());
        }
        if let Err(e) = f.validate(cert.config.factor.seed) {
            problems.push(e.to_string());
        }
        match candidates_from_factorization(k, f.clone(), c.sieve_threshold) {
            Ok(again) => {
                if again != *c {
                    problems.push("re-applied filters give a different candidate set".to_string());
                }
            }
            Err(e) => problems.push(e.to_string()),
        }
        if c.sieve_threshold != cert.config.sieve_threshold {
            problems.push("candidate threshold differs from the configuration".to_string());
        }
    } else if pa.norm != BigUint::default() {
        problems.push("nonzero norm without a candidate set".to_string());
    }
    for r in &cert.phase_b {
        if r.k != k {
            problems.push(format!("Wieferich report for {} has level {}", r.prime, r.k));
        }
        match residue_exponent(&r.prime, k) {
            Ok(t) if t == r.exponent_t => {}
            _ => problems.push(format!("exponent for {} does not recompute", r.prime)),
        }
        match frobenius_order(&r.prime, k) {
            Ok(f) if f == r.residue_degree => {}
            _ => problems.push(format!("residue degree for {} does not recompute", r.prime)),
        }
        let any_fail = r.per_factor.iter().any(|o| !o.passed);
        if r.passes() && any_fail {
            problems.push(format!("report for {} passes with a failing factor", r.prime));
        }
    }
    if let Some(s) = &cert.small_prime_sieve {
        if s.failures != s.failing_primes.len() as u64 {
            problems.push("sieve failure count does not match the listed primes".to_string());
        }
    }
    let recomputed = decide_verdict(pa, &cert.phase_b, cert.small_prime_sieve.as_ref(), &cert.config);
    AuditReport {
        k,
        recorded: cert.verdict.clone(),
        recomputed,
        problems,
    }
}
