//! End-to-end protocol behavior: session state machines, fallback economics,
//! fault injection through the canonical state file, and determinism.

mod support;

use idmsim_core::bridge::ConversionKind;
use idmsim_core::chain::{Asset, ChainId, TxKind};
use idmsim_core::crypto::verify;
use idmsim_core::error::{ProtocolError, SimError};
use idmsim_core::issuance::IssuanceState;
use idmsim_core::messaging::ConsentAnswer;
use idmsim_core::scenario::ScenarioVariant;
use idmsim_core::sim::{SimConfig, Simulation};

fn fresh() -> Simulation {
    Simulation::new(SimConfig::default()).unwrap()
}

/// Create, mirror, and fund the standard three actors.
fn setup_actors(sim: &mut Simulation) {
    for label in ["issuer", "subject", "verifier"] {
        sim.create_account(label).unwrap();
        sim.mirror(label).unwrap();
        sim.fund(label, 10_000_000).unwrap();
    }
    sim.register_issuer("issuer").unwrap();
}

fn run_issuance(sim: &mut Simulation) -> u64 {
    let issuer = sim.resolve("issuer").unwrap();
    let subject = sim.resolve("subject").unwrap();
    let session = sim
        .issue_attestation(&issuer, &subject, "attr", "above the disclosed threshold")
        .unwrap();
    sim.respond_issuance(session, &subject, ConsentAnswer::Approve).unwrap();
    session
}

#[test]
fn unregistered_issuer_rejected_before_any_prompt() {
    let mut sim = fresh();
    for label in ["rogue", "subject"] {
        sim.create_account(label).unwrap();
        sim.mirror(label).unwrap();
        sim.fund(label, 10_000_000).unwrap();
    }
    let rogue = sim.resolve("rogue").unwrap();
    let subject = sim.resolve("subject").unwrap();
    let err = sim.issue_attestation(&rogue, &subject, "attr", "predicate");
    assert!(matches!(err, Err(SimError::Protocol(ProtocolError::UnregisteredIssuer(_)))));
    assert!(sim.inbox("subject").unwrap().is_empty());
}

#[test]
fn broke_subject_rejected_at_initiation_nothing_mutated() {
    let mut sim = fresh();
    for label in ["issuer", "pauper"] {
        sim.create_account(label).unwrap();
        sim.mirror(label).unwrap();
    }
    sim.fund("issuer", 10_000_000).unwrap();
    sim.register_issuer("issuer").unwrap();
    let before = sim.to_state_text();

    let issuer = sim.resolve("issuer").unwrap();
    let pauper = sim.resolve("pauper").unwrap();
    let err = sim.issue_attestation(&issuer, &pauper, "attr", "predicate");
    match err {
        Err(SimError::Protocol(ProtocolError::InsufficientFunds { party, .. })) => {
            assert_eq!(party, "subject");
        }
        other => panic!("expected subject fund failure, got {other:?}"),
    }
    assert!(sim.inbox("pauper").unwrap().is_empty());
    // nothing moved: only ledger close indices may differ
    let after = sim.to_state_text();
    let strip = |s: &str| {
        s.lines().filter(|l| !l.starts_with("close_index=")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(strip(&before), strip(&after));
}

#[test]
fn statement_nonces_are_unique_per_issuer_subject_pair() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    let first = run_issuance(&mut sim);
    let second = run_issuance(&mut sim);
    let a = &sim.issuance_session(first).unwrap().statement;
    let b = &sim.issuance_session(second).unwrap().statement;
    assert_ne!(a.nonce, b.nonce);
    assert_ne!(a.canonical_bytes(), b.canonical_bytes());
}

#[test]
fn anchored_memo_carries_predicate_never_raw_attribute() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    let issuer = sim.resolve("issuer").unwrap();
    let subject = sim.resolve("subject").unwrap();
    let session = sim
        .issue_attestation(&issuer, &subject, "wheat-hectares", "owns more than 20 hectares of wheat")
        .unwrap();
    sim.respond_issuance(session, &subject, ConsentAnswer::Approve).unwrap();

    // positive control: the predicate is on chain and the scanner sees it
    let scan = sim.privacy_scan(&["more than 20".to_string()]);
    assert!(!scan.pass);
    // the raw attribute value stays off chain
    assert!(sim.privacy_scan(&["31 hectares".to_string()]).pass);
}

#[test]
fn signature_cross_check_matrix_over_a_scenario_run() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    let session_id = run_issuance(&mut sim);
    let session = sim.issuance_session(session_id).unwrap();

    let message = session.statement.canonical_bytes();
    let issuer_pub = sim.sidechain.accounts.get(&session.issuer).unwrap().public;
    let subject_pub = sim.sidechain.accounts.get(&session.subject).unwrap().public;
    let issuer_sig = session.issuer_sig.as_ref().unwrap();
    let user_sig = session.user_sig.as_ref().unwrap();

    // only the matching (key, signature) pairs verify
    assert!(verify(&issuer_pub, &message, issuer_sig));
    assert!(verify(&subject_pub, &message, user_sig));
    assert!(!verify(&subject_pub, &message, issuer_sig));
    assert!(!verify(&issuer_pub, &message, user_sig));
}

#[test]
fn verification_appends_only_gas_and_conversion_entries() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    run_issuance(&mut sim);
    let refs = sim.attestation_refs("subject").unwrap();
    let verifier = sim.resolve("verifier").unwrap();
    let subject = sim.resolve("subject").unwrap();

    let xrpl_before = sim.xrpl.ledger.entries().len();
    let side_before = sim.sidechain.ledger.entries().len();
    let vsession = sim.request_verification(&verifier, refs[0]).unwrap();
    sim.respond_verification(vsession, &subject, ConsentAnswer::Approve).unwrap();

    let lock = sim.xrpl.lock.clone();
    for entry in &sim.xrpl.ledger.entries()[xrpl_before..] {
        // the only main-chain traffic is bridge custody movement
        assert!(entry.tx.from == lock || entry.tx.to == lock, "unexpected xrpl tx");
    }
    for entry in &sim.sidechain.ledger.entries()[side_before..] {
        match entry.tx.kind {
            TxKind::Transfer => {
                assert_eq!(entry.tx.asset, Asset::IdXrp, "verification moved non-gas value");
                assert!(entry.tx.memo.is_none(), "verification wrote a memo");
            }
            TxKind::BridgeIn | TxKind::BridgeOut | TxKind::Wrap | TxKind::Unwrap => {}
        }
    }
}

#[test]
fn broke_verifier_falls_back_through_bridge_then_wrap() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    run_issuance(&mut sim);
    let refs = sim.attestation_refs("subject").unwrap();

    let verifier = sim.resolve("verifier").unwrap();
    let vsession = sim.request_verification(&verifier, refs[0]).unwrap();
    let session = sim.verification_session(vsession).unwrap();
    assert_eq!(
        session.verifier_journal.kinds(),
        vec![ConversionKind::BridgeIn, ConversionKind::Wrap]
    );
}

#[test]
fn repeated_denied_issuance_strictly_drains_the_issuer() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    let issuer = sim.resolve("issuer").unwrap();
    let subject = sim.resolve("subject").unwrap();

    let mut last_net = sim.net_of("issuer").unwrap();
    for round in 0..4 {
        let session = sim
            .issue_attestation(&issuer, &subject, "attr", "above the disclosed threshold")
            .unwrap();
        sim.respond_issuance(session, &subject, ConsentAnswer::Deny).unwrap();
        let net = sim.net_of("issuer").unwrap();
        assert!(net < last_net, "round {round}: spam issuance did not cost the issuer");
        last_net = net;
        sim.verify_invariants().unwrap();
    }
}

#[test]
fn third_party_cannot_answer_a_consent_prompt() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    let issuer = sim.resolve("issuer").unwrap();
    let subject = sim.resolve("subject").unwrap();
    let session = sim
        .issue_attestation(&issuer, &subject, "attr", "above the disclosed threshold")
        .unwrap();
    let intruder = sim.resolve("verifier").unwrap();
    let err = sim.respond_issuance(session, &intruder, ConsentAnswer::Approve);
    assert!(matches!(err, Err(SimError::Protocol(ProtocolError::NotSubject))));
    // the prompt is still open for the real subject
    sim.respond_issuance(session, &subject, ConsentAnswer::Approve).unwrap();
}

#[test]
fn denial_penalty_cannot_run_twice() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    let issuer = sim.resolve("issuer").unwrap();
    let subject = sim.resolve("subject").unwrap();
    let session = sim
        .issue_attestation(&issuer, &subject, "attr", "above the disclosed threshold")
        .unwrap();
    sim.respond_issuance(session, &subject, ConsentAnswer::Deny).unwrap();
    assert_eq!(sim.issuance_session(session).unwrap().state, IssuanceState::Penalized);
    assert!(matches!(
        sim.apply_denial_penalty(session),
        Err(SimError::Protocol(ProtocolError::WrongState(_)))
    ));
}

#[test]
fn tampered_memo_fails_signature_checks_in_the_report() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    run_issuance(&mut sim);

    // corrupt one predicate byte inside the anchored memo via the state file
    let state = sim.to_state_text();
    let needle = hex::encode("above the disclosed threshold");
    let tampered_hex = hex::encode("abXve the disclosed threshold");
    let tampered_line = state
        .lines()
        .find(|l| l.starts_with("tx ") && l.contains(&needle))
        .expect("anchor tx present")
        .to_string();
    let state = state.replace(&tampered_line, &tampered_line.replace(&needle, &tampered_hex));
    let mut sim = Simulation::from_state_text(&state).unwrap();

    let refs = sim.attestation_refs("subject").unwrap();
    let verifier = sim.resolve("verifier").unwrap();
    let subject = sim.resolve("subject").unwrap();
    let vsession = sim.request_verification(&verifier, refs[0]).unwrap();
    sim.respond_verification(vsession, &subject, ConsentAnswer::Approve).unwrap();
    let report = sim.verification_report(vsession).unwrap();
    assert!(!report.issuer_sig_valid);
    assert!(!report.user_sig_valid);
    assert_eq!(report.statement.predicate, "abXve the disclosed threshold");
}

#[test]
fn corrupted_balance_flags_peg_violation() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    run_issuance(&mut sim);
    assert!(sim.audit().peg_ok);

    let state = sim.to_state_text();
    // inflate the fee pool's IdXRP by editing the state file directly
    let fee_pool = sim.sidechain.fee_pool.text().to_string();
    let target = state
        .lines()
        .find(|l| l.starts_with("account ") && l.contains(&fee_pool) && l.contains("idxrp="))
        .expect("fee pool account line")
        .to_string();
    let corrupted_line = target.replace("idxrp=", "idxrp=9");
    let corrupted = state.replace(&target, &corrupted_line);

    let sim = Simulation::from_state_text(&corrupted).unwrap();
    let audit = sim.audit();
    assert!(!audit.peg_ok, "peg check missed the injected corruption");
    assert!(audit.render().contains("PEG_VIOLATION"));
    assert!(matches!(sim.verify_invariants(), Err(SimError::InvariantViolation(_))));
}

#[test]
fn same_seed_and_commands_reproduce_identical_state_files() {
    let run = || {
        let mut sim = fresh();
        setup_actors(&mut sim);
        run_issuance(&mut sim);
        let refs = sim.attestation_refs("subject").unwrap();
        let verifier = sim.resolve("verifier").unwrap();
        let subject = sim.resolve("subject").unwrap();
        let vsession = sim.request_verification(&verifier, refs[0]).unwrap();
        sim.respond_verification(vsession, &subject, ConsentAnswer::Approve).unwrap();
        sim.to_state_text()
    };
    assert_eq!(run(), run());
}

#[test]
fn different_seed_changes_every_address() {
    let a = Simulation::new(SimConfig { rng_seed: 1, ..SimConfig::default() }).unwrap();
    let b = Simulation::new(SimConfig { rng_seed: 2, ..SimConfig::default() }).unwrap();
    assert_ne!(a.xrpl.genesis, b.xrpl.genesis);
    assert_ne!(a.xrpl.lock, b.xrpl.lock);
}

#[test]
fn scenario_deny_variants_hold_invariants_and_replay() {
    for (id, variant) in [
        (1, ScenarioVariant::DenyIssuance),
        (1, ScenarioVariant::DenyVerification),
        (2, ScenarioVariant::DenyIssuance),
        (2, ScenarioVariant::DenyVerification),
    ] {
        let mut sim = fresh();
        let outcome = sim.run_scenario(id, variant).unwrap();
        assert!(outcome.ok(), "scenario {id} {}: {:?}", variant.name(), outcome.failures);
        sim.verify_invariants().unwrap();
        support::assert_replay_matches(&sim, &format!("scenario {id} {}", variant.name()));
    }
}

#[test]
fn ledger_logs_survive_state_round_trip() {
    let mut sim = fresh();
    sim.run_scenario(1, ScenarioVariant::Honest).unwrap();
    let xrpl_log = sim.export_log(ChainId::Xrpl);
    let side_log = sim.export_log(ChainId::IdmSidechain);
    let reloaded = Simulation::from_state_text(&sim.to_state_text()).unwrap();
    assert_eq!(reloaded.export_log(ChainId::Xrpl), xrpl_log);
    assert_eq!(reloaded.export_log(ChainId::IdmSidechain), side_log);
}

#[test]
fn low_level_ops_walk_the_full_state_machine() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    let issuer = sim.resolve("issuer").unwrap();
    let subject = sim.resolve("subject").unwrap();

    let session = sim.initiate_issuance(&issuer, &subject, "attr", "above threshold").unwrap();
    assert_eq!(sim.issuance_session(session).unwrap().state, IssuanceState::Initiated);

    sim.ic_sign(session).unwrap();
    let s = sim.issuance_session(session).unwrap();
    assert_eq!(s.state, IssuanceState::AwaitingConsent);
    assert!(s.issuer_sig.is_some());
    // signing twice is a state error
    assert!(matches!(
        sim.ic_sign(session),
        Err(SimError::Protocol(ProtocolError::WrongState(_)))
    ));

    // the prompt carries exactly the canonical statement bytes
    let s = sim.issuance_session(session).unwrap();
    let prompt = sim.mailbox.get(s.prompt_id.unwrap()).unwrap();
    match &prompt.payload {
        idmsim_core::messaging::PromptPayload::Issuance { statement } => {
            assert_eq!(statement, &s.statement.canonical_bytes());
        }
        other => panic!("unexpected payload {other:?}"),
    }

    sim.user_respond(session, &subject, ConsentAnswer::Approve).unwrap();
    assert_eq!(sim.issuance_session(session).unwrap().state, IssuanceState::Confirmed);

    sim.anchor_attestation(session).unwrap();
    assert_eq!(sim.issuance_session(session).unwrap().state, IssuanceState::Anchored);

    sim.execute_reimbursement(session).unwrap();
    assert_eq!(sim.issuance_session(session).unwrap().state, IssuanceState::Reimbursed);
    assert_eq!(sim.net_of("issuer").unwrap(), 0);
    sim.verify_invariants().unwrap();
}

#[test]
fn verification_prompt_names_verifier_and_tx_not_statement_content() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    run_issuance(&mut sim);
    let refs = sim.attestation_refs("subject").unwrap();
    let verifier = sim.resolve("verifier").unwrap();
    let vsession = sim.request_verification(&verifier, refs[0]).unwrap();

    let session = sim.verification_session(vsession).unwrap();
    let prompt = sim.mailbox.get(session.prompt_id.unwrap()).unwrap();
    match &prompt.payload {
        idmsim_core::messaging::PromptPayload::Verification { verifier: v, attestation_tx } => {
            assert_eq!(*v, verifier);
            assert_eq!(*attestation_tx, refs[0]);
        }
        other => panic!("unexpected payload {other:?}"),
    }
}

#[test]
fn bogus_attestation_id_rejected() {
    let mut sim = fresh();
    setup_actors(&mut sim);
    let verifier = sim.resolve("verifier").unwrap();
    let bogus = idmsim_core::chain::TxId([0xAB; 32]);
    assert!(matches!(
        sim.request_verification(&verifier, bogus),
        Err(SimError::Protocol(ProtocolError::UnknownAttestation(_)))
    ));
}

#[test]
fn fresh_state_audit_shows_zero_deltas_everywhere() {
    let sim = fresh();
    let audit = sim.audit();
    assert!(audit.all_ok());
    for row in &audit.rows {
        assert_eq!(row.net, 0, "fresh account {} has nonzero delta", row.address);
    }
}

#[test]
fn zeroed_gas_schedule_rejected() {
    let mut config = SimConfig::default();
    config.gas.gas_price = 0;
    assert!(matches!(Simulation::new(config), Err(SimError::Config(_))));

    let config = SimConfig { consent_deadline: 0, ..SimConfig::default() };
    assert!(matches!(Simulation::new(config), Err(SimError::Config(_))));
}
