//! Drives the built binary end to end through a temp state file.

use std::path::PathBuf;
use std::process::{Command, Output};

struct Harness {
    state: PathBuf,
}

impl Harness {
    fn new(tag: &str) -> Self {
        let state = std::env::temp_dir().join(format!("idmsim-cli-test-{tag}-{}.state", std::process::id()));
        let _ = std::fs::remove_file(&state);
        Self { state }
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_idmsim"))
            .arg("--state")
            .arg(&self.state)
            .args(args)
            .output()
            .expect("binary runs")
    }

    fn ok(&self, args: &[&str]) -> String {
        let output = self.run(args);
        assert!(
            output.status.success(),
            "command {:?} failed:\n{}{}",
            args,
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
        String::from_utf8(output.stdout).unwrap()
    }
}

impl Drop for Harness {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.state);
    }
}

#[test]
fn scenario_run_exits_zero_and_reports_pass() {
    let h = Harness::new("scenario");
    let out = h.ok(&["scenario", "run", "1"]);
    assert!(out.contains("scenario result: PASS"), "{out}");
    assert!(out.contains("privacy scan: PASS"), "{out}");

    // state persisted: the audit over the saved state still balances
    let audit = h.ok(&["audit", "balances"]);
    assert!(audit.contains("peg: OK"), "{audit}");
    assert!(audit.contains("global conservation: OK"), "{audit}");
}

#[test]
fn scenario_denial_variants_pass() {
    for flag in ["--deny-issuance", "--deny-verification"] {
        let h = Harness::new(&format!("deny{}", flag.len()));
        let out = h.ok(&["scenario", "run", "1", flag]);
        assert!(out.contains("scenario result: PASS"), "{flag}: {out}");
    }
}

#[test]
fn manual_flow_through_subcommands() {
    let h = Harness::new("manual");
    h.ok(&["account", "create", "issuer"]);
    h.ok(&["account", "create", "user"]);
    h.ok(&["account", "mirror", "issuer"]);
    h.ok(&["account", "mirror", "user"]);
    h.ok(&["account", "fund", "issuer", "--drops", "10000000"]);
    h.ok(&["account", "fund", "user", "--drops", "10000000"]);
    h.ok(&["issuer", "register", "issuer"]);
    let out = h.ok(&[
        "attest", "issue",
        "--issuer", "issuer",
        "--subject", "user",
        "--attribute", "age",
        "--predicate", "is over 18 years of age",
    ]);
    assert!(out.contains("session 1"), "{out}");

    let inbox = h.ok(&["inbox", "list", "--account", "user"]);
    assert!(inbox.contains("issuance consent"), "{inbox}");

    h.ok(&["attest", "respond", "--session", "1", "--confirm"]);
    let status = h.ok(&["attest", "status", "--session", "1"]);
    assert!(status.contains("state:   reimbursed"), "{status}");

    let show = h.ok(&["account", "show", "user"]);
    assert!(show.contains("attestation refs: 1"), "{show}");

    let log = h.ok(&["ledger", "inspect", "--chain", "idm"]);
    assert!(log.lines().any(|l| l.starts_with("tx ") && l.contains("memo=") && !l.contains("memo=-")));
}

#[test]
fn privacy_scan_exit_codes() {
    let h = Harness::new("privacy");
    h.ok(&["scenario", "run", "1"]);

    let clean = h.run(&["privacy", "scan", "--forbidden", "31 hectares"]);
    assert!(clean.status.success());

    // positive control: the disclosed predicate is on chain, so the scanner
    // must flag it and exit nonzero
    let leaked = h.run(&["privacy", "scan", "--forbidden", "more than 20"]);
    assert_eq!(leaked.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&leaked.stdout).contains("LEAKED"));
}

#[test]
fn corrupted_state_file_fails_audit_with_exit_two() {
    let h = Harness::new("corrupt");
    h.ok(&["scenario", "run", "1"]);

    let text = std::fs::read_to_string(&h.state).unwrap();
    let target = text
        .lines()
        .find(|l| l.starts_with("account ") && l.contains("idxrp=1400000"))
        .expect("fee pool line")
        .to_string();
    let corrupted = text.replace(&target, &target.replace("idxrp=1400000", "idxrp=1400001"));
    std::fs::write(&h.state, corrupted).unwrap();

    let audit = h.run(&["audit", "balances"]);
    assert_eq!(audit.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&audit.stdout).contains("PEG_VIOLATION"));
}

#[test]
fn state_save_and_load_round_trip() {
    let h = Harness::new("state");
    h.ok(&["account", "create", "alice"]);
    let copy = h.state.with_extension("copy");
    h.ok(&["state", "save", copy.to_str().unwrap()]);
    h.ok(&["account", "create", "bob"]);
    h.ok(&["state", "load", copy.to_str().unwrap()]);
    // bob is gone again after the load
    let out = h.run(&["account", "show", "bob"]);
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_file(copy);
}
