use std::process::Command;

fn weber(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_weber"))
        .args(args)
        .output()
        .expect("spawn weber");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn bernoulli_norm_json() {
    let (code, out) = weber(&["--json", "bernoulli-norm", "--k", "6"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["norm"], "2176");
    assert_eq!(v["bounds"]["k"], 6);
    let primes: Vec<&str> = v["factorization"]["factors"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["prime"].as_str().unwrap())
        .collect();
    assert_eq!(primes, ["2", "17"]);
}

#[test]
fn wieferich_exit_codes() {
    assert_eq!(weber(&["wieferich", "--k", "4", "--prime", "17"]).0, 0);
    assert_eq!(weber(&["wieferich", "--k", "4", "--prime", "17", "--fallback"]).0, 0);
    // 7 is -1 mod 8 but the unit is an 8th power residue there.
    let (code, out) = weber(&["wieferich", "--k", "4", "--prime", "7"]);
    assert_eq!(code, 2, "{out}");
    // not +-1 mod 8
    assert_eq!(weber(&["wieferich", "--k", "4", "--prime", "11"]).0, 1);
}

#[test]
fn sieve_checkpoint_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("ckpt.txt");
    let ck = ckpt.to_str().unwrap();
    let args = ["--json", "sieve", "--k", "6", "--from", "3", "--to", "5000", "--block", "1000", "--checkpoint", ck];
    let (code1, out1) = weber(&args);
    let (code2, out2) = weber(&args);
    assert_eq!(code1, code2);
    let a: serde_json::Value = serde_json::from_str(&out1).unwrap();
    let b: serde_json::Value = serde_json::from_str(&out2).unwrap();
    assert_eq!(a["resumed_blocks"], 0);
    assert_eq!(b["resumed_blocks"], 5);
    assert_eq!(a["failures"], b["failures"]);
    assert!(std::fs::read_to_string(&ckpt).unwrap().lines().count() >= 5);
}

#[test]
fn verify_audit_and_tamper_detection() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("c.json");
    let path = cert.to_str().unwrap();
    let (code, out) = weber(&["verify", "--k", "6", "--no-sieve", "--out", path]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("verdict = verified"));
    assert_eq!(weber(&["audit", "--cert", path]).0, 0);

    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    v["phase_a"]["candidates"]["factorization"]["factors"][1]["prime"] = "19".into();
    std::fs::write(&cert, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(weber(&["audit", "--cert", path]).0, 1);
}

#[test]
fn tower_writes_one_certificate_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("tower.json");
    let (code, out) = weber(&[
        "verify", "--k", "7", "--tower-from", "5", "--no-sieve", "--out", base.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}");
    for k in 5..=7 {
        let p = dir.path().join(format!("tower-k{k}.json"));
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
        let kind = &v["dependency"]["kind"];
        assert_eq!(kind, if k == 5 { "assumption" } else { "certificate" });
    }
}

#[test]
fn bounds_and_selftest() {
    let (code, out) = weber(&["--json", "bounds", "--k", "10"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["digits"]["second_moment"], 143);
    let (code, out) = weber(&["selftest"]);
    assert_eq!(code, 0, "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn bad_arguments_exit_nonzero() {
    assert_ne!(weber(&["bernoulli-norm", "--k", "2"]).0, 0);
    assert_ne!(weber(&["audit", "--cert", "/nonexistent/cert.json"]).0, 0);
}
