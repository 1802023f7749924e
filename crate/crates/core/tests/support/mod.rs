//! Shared test support: an independent replay oracle over the exported
//! canonical logs, and a randomized protocol driver.
//!
//! The oracle deliberately re-implements balance bookkeeping from scratch —
//! it parses the text export and applies plain arithmetic per entry kind,
//! never touching the library's apply path — so agreement with the library's
//! balance map is a real cross-check.
#![allow(dead_code)] // each test target uses a different subset

use std::collections::BTreeMap;

use idmsim_core::chain::ChainId;
use idmsim_core::error::SimError;
use idmsim_core::messaging::ConsentAnswer;
use idmsim_core::sim::Simulation;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct OracleAccount {
    xrp: u64,
    idxrp: u64,
    seq: u64,
}

/// Re-execute an exported chain log and render the resulting balance map in
/// the library's canonical format.
pub fn replay_balance_map(log: &str) -> Result<String, String> {
    let mut accounts: BTreeMap<String, OracleAccount> = BTreeMap::new();

    for line in log.lines() {
        if let Some(rest) = line.strip_prefix("genesis ") {
            let mut parts = rest.split_whitespace();
            let addr = parts.next().ok_or("genesis line missing address")?.to_string();
            let xrp_field = parts.next().ok_or("genesis line missing balance")?;
            let xrp = xrp_field
                .strip_prefix("xrp=")
                .and_then(|v| v.parse::<u64>().ok())
                .ok_or("bad genesis balance")?;
            accounts.entry(addr).or_default().xrp = xrp;
        } else if let Some(rest) = line.strip_prefix("account ") {
            accounts.entry(rest.trim().to_string()).or_default();
        } else if line.starts_with("tx ") {
            let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
            for token in line.split_whitespace() {
                if let Some((k, v)) = token.split_once('=') {
                    fields.insert(k, v);
                }
            }
            let get = |key: &str| -> Result<&str, String> {
                fields.get(key).copied().ok_or(format!("tx line missing {key}"))
            };
            let kind = get("kind")?;
            let from = get("from")?.to_string();
            let to = get("to")?.to_string();
            let asset = get("asset")?;
            let amount: u64 = get("amount")?.parse().map_err(|_| "bad amount")?;

            let sub = |balance: &mut u64| -> Result<(), String> {
                *balance = balance.checked_sub(amount).ok_or("oracle underflow")?;
                Ok(())
            };
            match kind {
                "transfer" => {
                    if from != to {
                        let sender = accounts.get_mut(&from).ok_or("unknown sender")?;
                        match asset {
                            "xrp" => sub(&mut sender.xrp)?,
                            "idxrp" => sub(&mut sender.idxrp)?,
                            other => return Err(format!("bad asset {other}")),
                        }
                        let recipient = accounts.get_mut(&to).ok_or("unknown recipient")?;
                        match asset {
                            "xrp" => recipient.xrp += amount,
                            "idxrp" => recipient.idxrp += amount,
                            _ => unreachable!(),
                        }
                    }
                }
                "bridge_in" => {
                    accounts.get_mut(&to).ok_or("unknown recipient")?.xrp += amount;
                }
                "bridge_out" => {
                    sub(&mut accounts.get_mut(&from).ok_or("unknown sender")?.xrp)?;
                }
                "wrap" => {
                    let account = accounts.get_mut(&from).ok_or("unknown account")?;
                    sub(&mut account.xrp)?;
                    account.idxrp += amount;
                }
                "unwrap" => {
                    let account = accounts.get_mut(&from).ok_or("unknown account")?;
                    sub(&mut account.idxrp)?;
                    account.xrp += amount;
                }
                other => return Err(format!("unknown tx kind {other}")),
            }
            accounts.get_mut(&from).ok_or("unknown sender")?.seq += 1;
        }
    }

    let mut out = String::new();
    for (addr, account) in &accounts {
        out.push_str(&format!(
            "{} xrp={} idxrp={} seq={}\n",
            addr, account.xrp, account.idxrp, account.seq
        ));
    }
    Ok(out)
}

/// Replay both chains of a simulation and demand byte-identical balance maps.
pub fn assert_replay_matches(sim: &Simulation, context: &str) {
    for chain in [ChainId::Xrpl, ChainId::IdmSidechain] {
        let log = sim.export_log(chain);
        let replayed = replay_balance_map(&log)
            .unwrap_or_else(|e| panic!("{context}: replay failed on {}: {e}", chain.name()));
        let actual = sim.balance_map(chain);
        assert_eq!(
            replayed,
            actual,
            "{context}: replayed balance map diverges on {}",
            chain.name()
        );
    }
}

/// Randomized protocol driver. Applies one random operation; protocol-level
/// rejections (insufficient funds, wrong state) are expected outcomes and are
/// swallowed — the caller checks invariants after every step.
pub struct RandomDriver {
    pub actors: Vec<String>,
    pub issuers: Vec<String>,
}

impl RandomDriver {
    pub fn setup(sim: &mut Simulation, rng: &mut ChaCha8Rng, tag: u64) -> Self {
        let actors: Vec<String> = (0..3).map(|i| format!("actor-{tag}-{i}")).collect();
        for actor in &actors {
            sim.create_account(actor).unwrap();
            sim.mirror(actor).unwrap();
            let funding = rng.gen_range(0..4u32);
            if funding > 0 {
                sim.fund(actor, funding as u64 * 2_000_000).unwrap();
            }
        }
        let issuers = vec![actors[0].clone()];
        sim.register_issuer(&issuers[0]).unwrap();
        Self { actors, issuers }
    }

    pub fn step(&self, sim: &mut Simulation, rng: &mut ChaCha8Rng) {
        let pick = |rng: &mut ChaCha8Rng, v: &[String]| v[rng.gen_range(0..v.len())].clone();
        let op = rng.gen_range(0..10u32);
        let outcome: Result<(), SimError> = match op {
            0 => sim.fund(&pick(rng, &self.actors), rng.gen_range(0..3_000_000)).map(|_| ()),
            1 => {
                let from = pick(rng, &self.actors);
                let to = pick(rng, &self.actors);
                sim.transfer(&from, &to, rng.gen_range(0..1_000_000)).map(|_| ())
            }
            2 => sim.bridge_in(&pick(rng, &self.actors), rng.gen_range(0..2_000_000)),
            3 => sim.bridge_out(&pick(rng, &self.actors), rng.gen_range(0..2_000_000)),
            4 => sim.wrap_balance(&pick(rng, &self.actors), rng.gen_range(0..1_500_000)),
            5 => sim.unwrap_balance(&pick(rng, &self.actors), rng.gen_range(0..1_500_000)),
            6 => {
                sim.close_ledgers(rng.gen_range(1..4));
                Ok(())
            }
            7 | 8 => self.random_issuance(sim, rng),
            _ => self.random_verification(sim, rng),
        };
        // Rejections leave state untouched by contract; that is itself under test.
        let _ = outcome;
    }

    fn random_issuance(&self, sim: &mut Simulation, rng: &mut ChaCha8Rng) -> Result<(), SimError> {
        let issuer = sim.resolve(&pick_str(rng, &self.issuers))?;
        let subject = sim.resolve(&pick_str(rng, &self.actors))?;
        if issuer == subject {
            return Ok(());
        }
        let attribute = format!("attr-{}", rng.gen_range(0..5u32));
        let session = sim.issue_attestation(
            &issuer,
            &subject,
            &attribute,
            "holds more than the disclosed threshold",
        )?;
        match rng.gen_range(0..3u32) {
            0 => sim.respond_issuance(session, &subject, ConsentAnswer::Approve),
            1 => sim.respond_issuance(session, &subject, ConsentAnswer::Deny),
            _ => {
                // let the prompt rot past its deadline
                sim.close_ledgers(sim.config.consent_deadline + 1);
                Ok(())
            }
        }
    }

    fn random_verification(
        &self,
        sim: &mut Simulation,
        rng: &mut ChaCha8Rng,
    ) -> Result<(), SimError> {
        let subject_name = pick_str(rng, &self.actors);
        let refs = sim.attestation_refs(&subject_name)?;
        if refs.is_empty() {
            return Ok(());
        }
        let subject = sim.resolve(&subject_name)?;
        let verifier = sim.resolve(&pick_str(rng, &self.actors))?;
        let tx = refs[rng.gen_range(0..refs.len())];
        let session = sim.request_verification(&verifier, tx)?;
        match rng.gen_range(0..3u32) {
            0 => sim.respond_verification(session, &subject, ConsentAnswer::Approve),
            1 => sim.respond_verification(session, &subject, ConsentAnswer::Deny),
            _ => {
                sim.close_ledgers(sim.config.consent_deadline + 1);
                Ok(())
            }
        }
    }
}

fn pick_str(rng: &mut ChaCha8Rng, v: &[String]) -> String {
    v[rng.gen_range(0..v.len())].clone()
}
