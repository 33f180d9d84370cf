//! Phase A back half: factor the Bernoulli norm and keep the prime factors
//! that could divide the class number.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::factor::{factor, FactorConfig, FactorizationResult};
use crate::tower::TowerLevel;

/// Primes up to this bound are covered by the small-prime sieve.
pub const DEFAULT_SIEVE_THRESHOLD: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterReason {
    /// `l = +-1 mod 2^(k-1)` but `l` is at most the sieve threshold.
    BelowSieveBound,
    /// `l != +-1 mod 2^(k-1)`.
    CongruenceFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredPrime {
    #[serde(with = "crate::serde_dec")]
    pub prime: BigUint,
    pub reason: FilterReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub k: u32,
    #[serde(with = "crate::serde_dec")]
    pub norm: BigUint,
    pub sieve_threshold: u64,
    pub factorization: FactorizationResult,
    #[serde(with = "crate::serde_dec::vec")]
    pub survivors: Vec<BigUint>,
    pub filtered_out: Vec<FilteredPrime>,
    #[serde(with = "crate::serde_dec::option")]
    pub unresolved: Option<BigUint>,
}

/// `l = +-1 (mod 2^(k-1))`.
pub fn is_admissible(l: &BigUint, k: u32) -> bool {
    let modulus = BigUint::from(1u64) << (k - 1);
    let r = (l % &modulus).to_u64().unwrap_or(u64::MAX);
    let mm = (&modulus - 1u32).to_u64().unwrap_or(u64::MAX);
    r == 1 || r == mm
}

/// Splits primes into survivors and exclusions with reasons. The congruence
/// condition is checked first.
pub fn congruence_filter(
    primes: &[BigUint],
    k: u32,
    threshold: u64,
) -> Result<(Vec<BigUint>, Vec<FilteredPrime>)> {
    TowerLevel::new(k)?;
    let bound = BigUint::from(threshold);
    let mut survivors = Vec::new();
    let mut filtered = Vec::new();
    for p in primes {
        let reason = if !is_admissible(p, k) {
            Some(FilterReason::CongruenceFailed)
        } else if *p <= bound {
            Some(FilterReason::BelowSieveBound)
        } else {
            None
        };
        match reason {
            Some(reason) => filtered.push(FilteredPrime {
                prime: p.clone(),
                reason,
            }),
            None => survivors.push(p.clone()),
        }
    }
    Ok((survivors, filtered))
}

pub fn assemble_candidates(
    k: u32,
    norm: &BigUint,
    factor_cfg: &FactorConfig,
    threshold: u64,
) -> Result<CandidateSet> {
    TowerLevel::new(k)?;
    if norm.is_zero() {
        return Err(Error::NormVanishes { k });
    }
    let factorization = factor(norm, factor_cfg)?;
    candidates_from_factorization(k, factorization, threshold)
}

/// The candidate set implied by an already validated factorization.
pub fn candidates_from_factorization(
    k: u32,
    factorization: FactorizationResult,
    threshold: u64,
) -> Result<CandidateSet> {
    if factorization.input.is_zero() {
        return Err(domain!("factorization of zero"));
    }
    let primes: Vec<BigUint> = factorization.primes().cloned().collect();
    let (survivors, filtered_out) = congruence_filter(&primes, k, threshold)?;
    let unresolved = (!factorization.is_complete()).then(|| factorization.unresolved_cofactor.clone());
    Ok(CandidateSet {
        k,
        norm: factorization.input.clone(),
        sieve_threshold: threshold,
        factorization,
        survivors,
        filtered_out,
        unresolved,
    })
}
