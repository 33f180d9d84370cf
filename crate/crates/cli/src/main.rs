use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::json;

use weber_core::bernoulli::{bernoulli_norm, bounds_report, BoundReport};
use weber_core::certificate::{audit, Certificate, PipelineConfig};
use weber_core::factor::{factor, FactorConfig, FactorizationResult};
use weber_core::pipeline::{base_dependency, selftest, verify_level, verify_tower};
use weber_core::wieferich::{
    fk_sieve_with_checkpoint, wieferich_test_seeded, SieveOptions, TestMode, SPLIT_SEED,
};
use weber_core::{Error, Result};

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;

#[derive(Parser)]
#[command(name = "weber", version, about = "Class-number verification for the 2-power cyclotomic tower")]
struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized polynomial splitting.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of B_{1,psi_j}, its factorization and the size bounds.
    BernoulliNorm {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        j: u64,
        /// Wall-clock budget for factoring, in seconds.
        #[arg(long, default_value_t = 120.0)]
        budget: f64,
        #[arg(long)]
        factor_backend: Option<PathBuf>,
        /// Print the norm without factoring it.
        #[arg(long)]
        no_factor: bool,
    },
    /// Wieferich test on every prime +-1 mod 2^(k-1) in [from, to).
    Sieve {
        #[arg(long)]
        k: u32,
        #[arg(long = "from")]
        lo: u64,
        #[arg(long = "to")]
        hi: u64,
        /// Resume file with one line "k lo hi failures" per finished block.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Worker threads for this run.
        #[arg(long)]
        jobs: Option<usize>,
        /// Also run the per-factor test on every prime and compare.
        #[arg(long)]
        cross_check: bool,
        #[arg(long, default_value_t = 1 << 20)]
        block: u64,
    },
    /// Wieferich test for one prime.
    Wieferich {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        prime: BigUint,
        /// Evaluate factor by factor instead of the gcd shortcut.
        #[arg(long)]
        fallback: bool,
    },
    /// Full verification of level k, or of the tower from --tower-from to k.
    Verify {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        tower_from: Option<u32>,
        #[arg(long)]
        factor_backend: Option<PathBuf>,
        /// Wall-clock budget for factoring, in seconds.
        #[arg(long, default_value_t = 120.0)]
        budget: f64,
        /// Certificate path; tower runs insert "-k<level>" before the extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Upper end of the small-prime sieve slice.
        #[arg(long, default_value_t = 1_000_000)]
        sieve_to: u64,
        /// Skip the sieve slice and record the small-prime range as assumed.
        #[arg(long)]
        no_sieve: bool,
        /// Primes at or below this are left to the small-prime sieve.
        #[arg(long, default_value_t = weber_core::candidates::DEFAULT_SIEVE_THRESHOLD)]
        threshold: u64,
        /// Statement cited for the level below the first one verified.
        #[arg(long)]
        assume: Option<String>,
    },
    /// Worst-case, second-moment and functional-equation norm bounds.
    Bounds {
        #[arg(long)]
        k: u32,
    },
    /// Re-validate a certificate from its own data.
    Audit {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Exhaustive consistency checks at levels k <= 6.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn factorization_string(f: &FactorizationResult) -> String {
    let mut parts: Vec<String> = f
        .factors
        .iter()
        .map(|p| {
            if p.exponent == 1 {
                p.prime.to_string()
            } else {
                format!("{}^{}", p.prime, p.exponent)
            }
        })
        .collect();
    if !f.is_complete() {
        parts.push(format!("[{}]", f.unresolved_cofactor));
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join(" * ")
    }
}

fn bounds_lines(r: &BoundReport) -> Vec<String> {
    vec![
        format!("worst-case bound        < 10^{} ({} digits)", r.worst_case_log10.floor() as u64 + 1, r.worst_case_digits()),
        format!("second-moment bound     < 10^{} ({} digits)", r.second_moment_log10.floor() as u64 + 1, r.second_moment_digits()),
        format!("  with 2^k/3 constant   < 10^{} ({} digits)", r.second_moment_proven_log10.floor() as u64 + 1, r.second_moment_proven_digits()),
        format!("functional-eq bound     < 10^{} ({} digits)", r.functional_eq_log10.floor() as u64 + 1, r.functional_eq_digits()),
    ]
}

fn bounds_json(r: &BoundReport) -> serde_json::Value {
    json!({
        "k": r.k,
        "worst_case_log10": r.worst_case_log10,
        "second_moment_log10": r.second_moment_log10,
        "second_moment_proven_log10": r.second_moment_proven_log10,
        "functional_eq_log10": r.functional_eq_log10,
        "digits": {
            "worst_case": r.worst_case_digits(),
            "second_moment": r.second_moment_digits(),
            "second_moment_proven": r.second_moment_proven_digits(),
            "functional_eq": r.functional_eq_digits(),
        }
    })
}

fn out_path(base: &Path, k: u32, tower: bool) -> PathBuf {
    if !tower {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("certificate");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}-k{k}.{ext}"),
        None => format!("{stem}-k{k}"),
    };
    base.with_file_name(name)
}

fn run(cli: &Cli) -> Result<u8> {
    let split_seed = cli.seed.unwrap_or(SPLIT_SEED);
    match &cli.command {
        Command::BernoulliNorm { k, j, budget, factor_backend, no_factor } => {
            let norm = match bernoulli_norm(*k, *j) {
                Ok(n) => n,
                Err(Error::NormVanishes { k }) => {
                    if cli.json {
                        print_json(&json!({ "k": k, "j": j, "norm": "0", "vanishes": true }));
                    } else {
                        println!("Bernoulli norm vanishes at k = {k}");
                    }
                    return Ok(EXIT_INCONCLUSIVE);
                }
                Err(e) => return Err(e),
            };
            let bounds = bounds_report(*k)?;
            let fact = if *no_factor {
                None
            } else {
                let cfg = FactorConfig {
                    budget_secs: *budget,
                    backend: factor_backend.clone(),
                    ..FactorConfig::default()
                };
                Some(factor(&norm, &cfg)?)
            };
            if cli.json {
                print_json(&json!({
                    "k": k,
                    "j": j,
                    "norm": norm.to_string(),
                    "digits": norm.to_string().len(),
                    "factorization": fact,
                    "bounds": bounds_json(&bounds),
                }));
            } else {
                println!("k = {k}, j = {j}");
                println!("norm = {norm}");
                println!("digits = {}", norm.to_string().len());
                if let Some(f) = &fact {
                    println!("factorization = {}", factorization_string(f));
                    if !f.is_complete() {
                        println!("unresolved cofactor = {} (composite)", f.unresolved_cofactor);
                    }
                }
                for line in bounds_lines(&bounds) {
                    println!("{line}");
                }
            }
            Ok(EXIT_OK)
        }
        Command::Sieve { k, lo, hi, checkpoint, jobs, cross_check, block } => {
            let opts = SieveOptions {
                cross_check: *cross_check,
                seed: split_seed,
                block: *block,
            };
            let run = || fk_sieve_with_checkpoint(*k, *lo, *hi, &opts, checkpoint.as_deref());
            let summary = match jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(*n)
                    .build()
                    .map_err(|e| Error::Io(e.to_string()))?
                    .install(run)?,
                None => run()?,
            };
            let failing: Vec<String> = summary.failures.iter().map(|r| r.prime.to_string()).collect();
            if cli.json {
                print_json(&json!({
                    "k": k,
                    "lo": lo,
                    "hi": hi,
                    "primes_tested": summary.primes_tested,
                    "failures": summary.failure_count(),
                    "failing_primes": failing,
                    "disagreements": summary.disagreements,
                    "resumed_blocks": summary.resumed.len(),
                }));
            } else {
                println!("k = {k}, range [{lo}, {hi})");
                println!("primes tested = {}", summary.primes_tested);
                println!("resumed blocks = {}", summary.resumed.len());
                println!("failures = {}", summary.failure_count());
                if *cross_check {
                    println!("shortcut/per-factor disagreements = {}", summary.disagreements.len());
                }
                if !failing.is_empty() {
                    let shown: Vec<&str> = failing.iter().take(20).map(String::as_str).collect();
                    let more = if failing.len() > 20 { " ..." } else { "" };
                    println!("failing primes: {}{more}", shown.join(" "));
                }
            }
            Ok(if summary.failure_count() == 0 && summary.disagreements.is_empty() {
                EXIT_OK
            } else {
                EXIT_INCONCLUSIVE
            })
        }
        Command::Wieferich { k, prime, fallback } => {
            let mode = if *fallback { TestMode::Fallback } else { TestMode::Shortcut };
            let r = wieferich_test_seeded(*k, prime, mode, split_seed)?;
            if cli.json {
                print_json(&serde_json::to_value(&r)?);
            } else {
                println!("k = {k}, l = {prime}");
                println!("residue degree = {}", r.residue_degree);
                println!("exponent t = (l^{} - 1)/2^{} = {}", r.exponent_degree, k - 1, r.exponent_t);
                println!("path = {}", if r.shortcut_used { "shortcut" } else { "per-factor" });
                for (i, o) in r.per_factor.iter().enumerate() {
                    let show = |v: &[BigUint]| {
                        v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
                    };
                    println!(
                        "factor {i}: [{}] -> [{}] {}",
                        show(&o.factor),
                        show(&o.value),
                        if o.passed { "ok" } else { "FAILS" }
                    );
                }
                println!("verdict = {}", if r.passes() { "passes" } else { "inconclusive" });
            }
            Ok(if r.passes() { EXIT_OK } else { EXIT_INCONCLUSIVE })
        }
        Command::Verify {
            k,
            tower_from,
            factor_backend,
            budget,
            out,
            sieve_to,
            no_sieve,
            threshold,
            assume,
        } => {
            let config = PipelineConfig {
                sieve_threshold: *threshold,
                small_prime_range: (!*no_sieve).then_some((3, *sieve_to)),
                factor: FactorConfig {
                    budget_secs: *budget,
                    backend: factor_backend.clone(),
                    ..FactorConfig::default()
                },
                split_seed,
                base_assumption: assume.clone(),
            };
            let certs: Vec<Certificate> = match tower_from {
                Some(from) => verify_tower(*from, *k, &config)?,
                None => vec![verify_level(*k, &config, base_dependency(*k, &config))?],
            };
            let tower = tower_from.is_some();
            if let Some(base) = out {
                for c in &certs {
                    std::fs::write(out_path(base, c.k, tower), c.to_json()? + "\n")?;
                }
            }
            if cli.json {
                let docs: Vec<serde_json::Value> = certs
                    .iter()
                    .map(serde_json::to_value)
                    .collect::<std::result::Result<_, _>>()?;
                print_json(&serde_json::Value::Array(docs));
            } else {
                for c in &certs {
                    let surv = c
                        .phase_a
                        .candidates
                        .as_ref()
                        .map(|s| s.survivors.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "))
                        .unwrap_or_default();
                    println!("k = {}", c.k);
                    println!("  norm = {} ({} digits)", c.phase_a.norm, c.phase_a.norm_digits);
                    if let Some(cs) = &c.phase_a.candidates {
                        println!("  factorization = {}", factorization_string(&cs.factorization));
                    }
                    println!("  survivors = {{{surv}}}");
                    if let Some(s) = &c.small_prime_sieve {
                        println!("  sieve [{}, {}): {} primes, {} failures", s.lo, s.hi, s.primes_tested, s.failures);
                    }
                    match &c.verdict {
                        weber_core::certificate::Verdict::Verified => println!("  verdict = verified"),
                        weber_core::certificate::Verdict::Inconclusive(rs) => {
                            println!("  verdict = inconclusive");
                            for r in rs {
                                println!("    - {r}");
                            }
                        }
                    }
                }
            }
            let all_verified = certs.iter().all(|c| c.verdict.is_verified())
                && certs.last().map(|c| c.k) == Some(*k);
            Ok(if all_verified { EXIT_OK } else { EXIT_INCONCLUSIVE })
        }
        Command::Bounds { k } => {
            let r = bounds_report(*k)?;
            if cli.json {
                print_json(&bounds_json(&r));
            } else {
                println!("k = {k}");
                for line in bounds_lines(&r) {
                    println!("{line}");
                }
            }
            Ok(EXIT_OK)
        }
        Command::Audit { cert } => {
            let text = std::fs::read_to_string(cert)?;
            let c = Certificate::from_json(&text)?;
            let report = audit(&c);
            if cli.json {
                print_json(&serde_json::to_value(&report)?);
            } else {
                println!("k = {}", report.k);
                println!("recorded verdict   = {:?}", report.recorded);
                println!("recomputed verdict = {:?}", report.recomputed);
                for p in &report.problems {
                    println!("problem: {p}");
                }
                println!("{}", if report.consistent() { "consistent" } else { "INCONSISTENT" });
            }
            Ok(if report.consistent() { EXIT_OK } else { EXIT_ERROR })
        }
        Command::Selftest => {
            let items = selftest();
            let ok = items.iter().all(|i| i.passed);
            if cli.json {
                print_json(&serde_json::to_value(&items)?);
            } else {
                for i in &items {
                    println!("{} {}", if i.passed { "ok  " } else { "FAIL" }, i.name);
                }
            }
            Ok(if ok { EXIT_OK } else { EXIT_ERROR })
        }
    }
}
