//! Canonical text persistence for the whole simulation: one file, stable
//! field ordering, hex/base58 payloads. Saving and reloading reproduces
//! byte-identical subsequent runs, which also makes golden-file tests and
//! fault injection (edit a balance, tamper a memo) straightforward.
//!
//! Loading does not re-validate signatures or replay transactions; the
//! replay oracle and the audit are the integrity checks over persisted
//! history.

use std::collections::{BTreeMap, BTreeSet};

use crate::bridge::{Bridge, ConversionJournal, ConversionKind, JournalEntry};
use crate::chain::{
    AccountState, AccountTable, Asset, ChainId, Drops, Ledger, LedgerEntry, SignedTransaction,
    TxId, TxKind,
};
use crate::crypto::{Address, KeyPair, Signature, Statement};
use crate::error::SimError;
use crate::issuance::{IssuanceSession, IssuanceState};
use crate::messaging::{
    ConsentAnswer, Mailbox, Prompt, PromptKind, PromptPayload, PromptStatus,
};
use crate::sidechain::{GasPhase, GasReceipt, GasSchedule, SidechainChain};
use crate::sim::{SimConfig, Simulation};
use crate::verification::{VerificationReport, VerificationSession, VerificationState};
use crate::xrpl::XrplChain;

const HEADER: &str = "idmsim-state v1";

fn bad(msg: impl Into<String>) -> SimError {
    SimError::BadStateFile(msg.into())
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn render_journal(journal: &ConversionJournal) -> String {
    if journal.entries.is_empty() {
        return "-".to_string();
    }
    journal
        .entries
        .iter()
        .map(|e| format!("{}:{}:{}", e.kind.name(), e.account.text(), e.drops))
        .collect::<Vec<_>>()
        .join(",")
}

fn render_receipts(receipts: &[GasReceipt]) -> String {
    if receipts.is_empty() {
        return "-".to_string();
    }
    receipts
        .iter()
        .map(|r| format!("{}:{}:{}:{}", r.phase.name(), r.payer.text(), r.units, r.cost_drops))
        .collect::<Vec<_>>()
        .join(",")
}

fn render_opt_receipt(receipt: &Option<GasReceipt>) -> String {
    match receipt {
        None => "-".to_string(),
        Some(r) => format!("{}:{}:{}:{}", r.phase.name(), r.payer.text(), r.units, r.cost_drops),
    }
}

fn opt_hex(bytes: Option<&[u8]>) -> String {
    match bytes {
        None => "-".to_string(),
        Some(b) => hex::encode(b),
    }
}

fn opt_txid(id: &Option<TxId>) -> String {
    match id {
        None => "-".to_string(),
        Some(id) => id.to_hex(),
    }
}

fn opt_u64(value: &Option<u64>) -> String {
    match value {
        None => "-".to_string(),
        Some(v) => v.to_string(),
    }
}

fn render_answer(answer: &Option<ConsentAnswer>) -> &'static str {
    match answer {
        None => "-",
        Some(ConsentAnswer::Approve) => "approve",
        Some(ConsentAnswer::Deny) => "deny",
    }
}

fn render_account_line(addr: &str, state: &AccountState) -> String {
    let refs = if state.attestation_refs.is_empty() {
        "-".to_string()
    } else {
        state
            .attestation_refs
            .iter()
            .map(TxId::to_hex)
            .collect::<Vec<_>>()
            .join(",")
    };
    format!(
        "account addr={} pub={} xrp={} idxrp={} seq={} refs={}",
        addr,
        hex::encode(state.public),
        state.xrp,
        state.idxrp,
        state.sequence,
        refs
    )
}

impl Simulation {
    /// Serialize the whole simulation to the canonical text format.
    pub fn to_state_text(&self) -> String {
        let mut out = String::new();
        out.push_str(HEADER);
        out.push('\n');

        out.push_str("[config]\n");
        let gas = &self.config.gas;
        out.push_str(&format!("ic_issue_units={}\n", gas.ic_issue_units));
        out.push_str(&format!("ic_reimburse_units={}\n", gas.ic_reimburse_units));
        out.push_str(&format!("vc_request_units={}\n", gas.vc_request_units));
        out.push_str(&format!("vc_execute_units={}\n", gas.vc_execute_units));
        out.push_str(&format!("gas_price={}\n", gas.gas_price));
        out.push_str(&format!("consent_deadline={}\n", self.config.consent_deadline));
        out.push_str(&format!("genesis_funding={}\n", self.config.genesis_funding));
        out.push_str(&format!("xrpl_supply={}\n", self.config.xrpl_supply));
        out.push_str(&format!("rng_seed={}\n", self.config.rng_seed));

        out.push_str("[keys]\n");
        for (addr, kp) in &self.keys {
            out.push_str(&format!("key addr={} secret={}\n", addr, hex::encode(kp.secret_bytes())));
        }

        out.push_str("[labels]\n");
        for (label, addr) in &self.labels {
            out.push_str(&format!("label name={label} addr={addr}\n"));
        }

        out.push_str("[baselines]\n");
        for (addr, drops) in &self.baselines {
            out.push_str(&format!("baseline addr={addr} drops={drops}\n"));
        }

        out.push_str("[bridge]\n");
        out.push_str(&format!("wrapped={}\n", self.bridge.wrapped_drops));

        out.push_str("[xrpl]\n");
        out.push_str(&format!("genesis={}\n", self.xrpl.genesis.text()));
        out.push_str(&format!("lock={}\n", self.xrpl.lock.text()));
        out.push_str(&format!("close_index={}\n", self.xrpl.ledger.close_index()));
        for addr in self.xrpl.accounts.creation_order() {
            let address = Address::from_text(addr).expect("valid stored address");
            let state = self.xrpl.accounts.get(&address).expect("listed account exists");
            out.push_str(&render_account_line(addr, state));
            out.push('\n');
        }
        for entry in self.xrpl.ledger.entries() {
            out.push_str(&crate::chain::render_tx_line(entry));
            out.push('\n');
        }

        out.push_str("[sidechain]\n");
        out.push_str(&format!("authority={}\n", self.sidechain.authority.text()));
        out.push_str(&format!("fee_pool={}\n", self.sidechain.fee_pool.text()));
        out.push_str(&format!("admin={}\n", self.sidechain.admin.text()));
        out.push_str(&format!("total_gas_charged={}\n", self.sidechain.total_gas_charged()));
        for issuer in self.sidechain.registry() {
            out.push_str(&format!("registry={issuer}\n"));
        }
        out.push_str(&format!("close_index={}\n", self.sidechain.ledger.close_index()));
        for addr in self.sidechain.accounts.creation_order() {
            let address = Address::from_text(addr).expect("valid stored address");
            let state = self.sidechain.accounts.get(&address).expect("listed account exists");
            out.push_str(&render_account_line(addr, state));
            out.push('\n');
        }
        for entry in self.sidechain.ledger.entries() {
            out.push_str(&crate::chain::render_tx_line(entry));
            out.push('\n');
        }

        out.push_str("[counters]\n");
        out.push_str(&format!("next_session={}\n", self.next_session));
        for (key, value) in &self.nonces {
            out.push_str(&format!("nonce key={key} value={value}\n"));
        }

        out.push_str("[prompts]\n");
        for prompt in self.mailbox.all() {
            let status = match prompt.status {
                PromptStatus::Open => "open".to_string(),
                PromptStatus::Answered(a) => format!("answered:{}", a.name()),
                PromptStatus::Expired => "expired".to_string(),
            };
            let payload = match &prompt.payload {
                PromptPayload::Issuance { statement } => format!("issuance:{}", hex::encode(statement)),
                PromptPayload::Verification { verifier, attestation_tx } => {
                    format!("verification:{}:{}", verifier.text(), attestation_tx.to_hex())
                }
            };
            out.push_str(&format!(
                "prompt id={} to={} kind={} session={} created={} deadline={} status={} payload={}\n",
                prompt.id,
                prompt.to.text(),
                prompt.kind.name(),
                prompt.session_id,
                prompt.created_at,
                prompt.deadline,
                status,
                payload
            ));
        }

        out.push_str("[issuance]\n");
        for session in self.issuance_sessions.values() {
            out.push_str(&format!(
                "isession id={} issuer={} subject={} state={} statement={} issuer_sig={} user_sig={} prompt={} response={} timed_out={} anchor_side={} anchor_xrpl={} anchored_li={} issuer_journal={} subject_journal={} receipts={}\n",
                session.id,
                session.issuer.text(),
                session.subject.text(),
                session.state.name(),
                hex::encode(session.statement.canonical_bytes()),
                opt_hex(session.issuer_sig.as_ref().map(Signature::der)),
                opt_hex(session.user_sig.as_ref().map(Signature::der)),
                opt_u64(&session.prompt_id),
                render_answer(&session.response),
                u8::from(session.timed_out),
                opt_txid(&session.anchor_side_tx),
                opt_txid(&session.anchor_xrpl_tx),
                opt_u64(&session.anchored_ledger_index),
                render_journal(&session.issuer_journal),
                render_journal(&session.subject_journal),
                render_receipts(&session.gas_receipts),
            ));
        }

        out.push_str("[verification]\n");
        for session in self.verification_sessions.values() {
            let report = match &session.report {
                None => "-".to_string(),
                Some(r) => format!(
                    "{}:{}:{}:{}:{}:{}:{}",
                    hex::encode(r.statement.canonical_bytes()),
                    r.issuer_identity.text(),
                    r.subject_identity.text(),
                    u8::from(r.issuer_sig_valid),
                    u8::from(r.user_sig_valid),
                    r.anchor_tx.to_hex(),
                    r.ledger_index
                ),
            };
            out.push_str(&format!(
                "vsession id={} verifier={} tx={} subject={} state={} pre_gas={} post_gas={} verifier_journal={} subject_journal={} prompt={} response={} timed_out={} report={}\n",
                session.id,
                session.verifier.text(),
                session.attestation_tx.to_hex(),
                session.subject.text(),
                session.state.name(),
                render_opt_receipt(&session.pre_approval_gas),
                render_opt_receipt(&session.post_approval_gas),
                render_journal(&session.verifier_journal),
                render_journal(&session.subject_journal),
                opt_u64(&session.prompt_id),
                render_answer(&session.response),
                u8::from(session.timed_out),
                report
            ));
        }

        out
    }

    /// Reconstruct a simulation from the canonical text format.
    pub fn from_state_text(text: &str) -> Result<Simulation, SimError> {
        Parser::new(text)?.build()
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

fn fields(line: &str) -> BTreeMap<&str, &str> {
    let mut map = BTreeMap::new();
    for token in line.split_whitespace() {
        if let Some((key, value)) = token.split_once('=') {
            map.insert(key, value);
        }
    }
    map
}

fn req<'a>(map: &BTreeMap<&str, &'a str>, key: &str, line: &str) -> Result<&'a str, SimError> {
    map.get(key).copied().ok_or_else(|| bad(format!("missing field {key} in line {line:?}")))
}

fn parse_u64(value: &str, what: &str) -> Result<u64, SimError> {
    value.parse().map_err(|_| bad(format!("bad integer {value:?} for {what}")))
}

fn parse_addr(value: &str) -> Result<Address, SimError> {
    Address::from_text(value).map_err(|e| bad(format!("bad address {value:?}: {e}")))
}

fn parse_hex(value: &str, what: &str) -> Result<Vec<u8>, SimError> {
    hex::decode(value).map_err(|_| bad(format!("bad hex for {what}")))
}

fn parse_opt_txid(value: &str) -> Result<Option<TxId>, SimError> {
    if value == "-" {
        return Ok(None);
    }
    TxId::from_hex(value).map(Some).ok_or_else(|| bad(format!("bad tx id {value:?}")))
}

fn parse_opt_u64(value: &str, what: &str) -> Result<Option<u64>, SimError> {
    if value == "-" {
        return Ok(None);
    }
    parse_u64(value, what).map(Some)
}

fn parse_answer(value: &str) -> Result<Option<ConsentAnswer>, SimError> {
    match value {
        "-" => Ok(None),
        "approve" => Ok(Some(ConsentAnswer::Approve)),
        "deny" => Ok(Some(ConsentAnswer::Deny)),
        other => Err(bad(format!("bad consent answer {other:?}"))),
    }
}

fn parse_journal(value: &str) -> Result<ConversionJournal, SimError> {
    let mut journal = ConversionJournal::new();
    if value == "-" {
        return Ok(journal);
    }
    for part in value.split(',') {
        let mut pieces = part.splitn(3, ':');
        let kind = pieces
            .next()
            .and_then(ConversionKind::parse)
            .ok_or_else(|| bad(format!("bad journal entry {part:?}")))?;
        let account = parse_addr(pieces.next().ok_or_else(|| bad("journal missing account"))?)?;
        let drops = parse_u64(pieces.next().ok_or_else(|| bad("journal missing drops"))?, "journal")?;
        journal.entries.push(JournalEntry { kind, account, drops });
    }
    Ok(journal)
}

fn parse_receipt(part: &str) -> Result<GasReceipt, SimError> {
    let mut pieces = part.splitn(4, ':');
    let phase = pieces
        .next()
        .and_then(GasPhase::parse)
        .ok_or_else(|| bad(format!("bad gas receipt {part:?}")))?;
    let payer = parse_addr(pieces.next().ok_or_else(|| bad("receipt missing payer"))?)?;
    let units = parse_u64(pieces.next().ok_or_else(|| bad("receipt missing units"))?, "receipt")?;
    let cost = parse_u64(pieces.next().ok_or_else(|| bad("receipt missing cost"))?, "receipt")?;
    Ok(GasReceipt { payer, units, cost_drops: cost, phase })
}

fn parse_receipts(value: &str) -> Result<Vec<GasReceipt>, SimError> {
    if value == "-" {
        return Ok(Vec::new());
    }
    value.split(',').map(parse_receipt).collect()
}

fn parse_opt_receipt(value: &str) -> Result<Option<GasReceipt>, SimError> {
    if value == "-" {
        return Ok(None);
    }
    parse_receipt(value).map(Some)
}

fn parse_account_line(line: &str) -> Result<(String, AccountState), SimError> {
    let map = fields(line);
    let addr = req(&map, "addr", line)?.to_string();
    let public_bytes = parse_hex(req(&map, "pub", line)?, "account public key")?;
    let public: [u8; 33] =
        public_bytes.try_into().map_err(|_| bad("account public key is not 33 bytes"))?;
    let mut state = AccountState::new(public);
    state.xrp = parse_u64(req(&map, "xrp", line)?, "xrp")?;
    state.idxrp = parse_u64(req(&map, "idxrp", line)?, "idxrp")?;
    state.sequence = parse_u64(req(&map, "seq", line)?, "seq")?;
    let refs = req(&map, "refs", line)?;
    if refs != "-" {
        for part in refs.split(',') {
            state.attestation_refs.push(
                TxId::from_hex(part).ok_or_else(|| bad(format!("bad ref {part:?}")))?,
            );
        }
    }
    Ok((addr, state))
}

fn parse_tx_line(chain: ChainId, line: &str) -> Result<LedgerEntry, SimError> {
    let map = fields(line);
    let tx_id =
        TxId::from_hex(req(&map, "id", line)?).ok_or_else(|| bad("bad tx id"))?;
    let ledger_index = parse_u64(req(&map, "li", line)?, "ledger index")?;
    let kind = TxKind::parse(req(&map, "kind", line)?).ok_or_else(|| bad("bad tx kind"))?;
    let from = parse_addr(req(&map, "from", line)?)?;
    let to = parse_addr(req(&map, "to", line)?)?;
    let asset = Asset::parse(req(&map, "asset", line)?).ok_or_else(|| bad("bad asset"))?;
    let amount = parse_u64(req(&map, "amount", line)?, "amount")?;
    let sequence = parse_u64(req(&map, "seq", line)?, "sequence")?;
    let memo_field = req(&map, "memo", line)?;
    let memo = if memo_field == "-" { None } else { Some(parse_hex(memo_field, "memo")?) };
    let signature = Signature::from_der(parse_hex(req(&map, "sig", line)?, "signature")?);
    let _ = chain;
    Ok(LedgerEntry {
        tx: SignedTransaction { tx_id, kind, from, to, asset, amount, sequence, memo, signature },
        ledger_index,
    })
}

struct ChainSection {
    close_index: u64,
    accounts: Vec<(String, AccountState)>,
    entries: Vec<LedgerEntry>,
    scalars: BTreeMap<String, String>,
    registry: BTreeSet<String>,
}

impl ChainSection {
    fn new() -> Self {
        Self {
            close_index: 0,
            accounts: Vec::new(),
            entries: Vec::new(),
            scalars: BTreeMap::new(),
            registry: BTreeSet::new(),
        }
    }

    fn scalar(&self, key: &str) -> Result<&str, SimError> {
        self.scalars
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| bad(format!("missing {key} in chain section")))
    }
}

struct Parser {
    config: SimConfig,
    keys: BTreeMap<String, KeyPair>,
    labels: BTreeMap<String, String>,
    baselines: BTreeMap<String, Drops>,
    wrapped: Drops,
    xrpl: ChainSection,
    sidechain: ChainSection,
    next_session: u64,
    nonces: BTreeMap<String, u64>,
    mailbox: Mailbox,
    issuance: BTreeMap<u64, IssuanceSession>,
    verification: BTreeMap<u64, VerificationSession>,
}

impl Parser {
    fn new(text: &str) -> Result<Self, SimError> {
        let mut lines = text.lines();
        if lines.next() != Some(HEADER) {
            return Err(bad("missing or unsupported header"));
        }

        let mut parser = Parser {
            config: SimConfig::default(),
            keys: BTreeMap::new(),
            labels: BTreeMap::new(),
            baselines: BTreeMap::new(),
            wrapped: 0,
            xrpl: ChainSection::new(),
            sidechain: ChainSection::new(),
            next_session: 0,
            nonces: BTreeMap::new(),
            mailbox: Mailbox::new(),
            issuance: BTreeMap::new(),
            verification: BTreeMap::new(),
        };

        let mut section = String::new();
        let mut config_raw: BTreeMap<String, u64> = BTreeMap::new();
        for line in lines {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].to_string();
                continue;
            }
            match section.as_str() {
                "config" => {
                    let (key, value) =
                        line.split_once('=').ok_or_else(|| bad(format!("bad config line {line:?}")))?;
                    config_raw.insert(key.to_string(), parse_u64(value, key)?);
                }
                "keys" => {
                    let map = fields(line);
                    let addr = req(&map, "addr", line)?.to_string();
                    let secret = parse_hex(req(&map, "secret", line)?, "secret")?;
                    let seed: [u8; 32] =
                        secret.try_into().map_err(|_| bad("secret is not 32 bytes"))?;
                    let kp = KeyPair::generate(seed).map_err(|e| bad(format!("bad key: {e}")))?;
                    if kp.address().text() != addr {
                        return Err(bad(format!("key does not match address {addr}")));
                    }
                    parser.keys.insert(addr, kp);
                }
                "labels" => {
                    let map = fields(line);
                    parser.labels.insert(
                        req(&map, "name", line)?.to_string(),
                        req(&map, "addr", line)?.to_string(),
                    );
                }
                "baselines" => {
                    let map = fields(line);
                    parser.baselines.insert(
                        req(&map, "addr", line)?.to_string(),
                        parse_u64(req(&map, "drops", line)?, "baseline")?,
                    );
                }
                "bridge" => {
                    let (key, value) =
                        line.split_once('=').ok_or_else(|| bad("bad bridge line"))?;
                    if key == "wrapped" {
                        parser.wrapped = parse_u64(value, "wrapped")?;
                    }
                }
                "xrpl" => Self::chain_line(&mut parser.xrpl, ChainId::Xrpl, line)?,
                "sidechain" => {
                    Self::chain_line(&mut parser.sidechain, ChainId::IdmSidechain, line)?
                }
                "counters" => {
                    if let Some(rest) = line.strip_prefix("next_session=") {
                        parser.next_session = parse_u64(rest, "next_session")?;
                    } else {
                        let map = fields(line);
                        parser.nonces.insert(
                            req(&map, "key", line)?.to_string(),
                            parse_u64(req(&map, "value", line)?, "nonce")?,
                        );
                    }
                }
                "prompts" => parser.parse_prompt(line)?,
                "issuance" => parser.parse_issuance(line)?,
                "verification" => parser.parse_verification(line)?,
                other => return Err(bad(format!("unknown section {other:?}"))),
            }
        }

        parser.config = SimConfig {
            gas: GasSchedule {
                ic_issue_units: *config_raw.get("ic_issue_units").ok_or_else(|| bad("missing ic_issue_units"))?,
                ic_reimburse_units: *config_raw.get("ic_reimburse_units").ok_or_else(|| bad("missing ic_reimburse_units"))?,
                vc_request_units: *config_raw.get("vc_request_units").ok_or_else(|| bad("missing vc_request_units"))?,
                vc_execute_units: *config_raw.get("vc_execute_units").ok_or_else(|| bad("missing vc_execute_units"))?,
                gas_price: *config_raw.get("gas_price").ok_or_else(|| bad("missing gas_price"))?,
            },
            consent_deadline: *config_raw.get("consent_deadline").ok_or_else(|| bad("missing consent_deadline"))?,
            genesis_funding: *config_raw.get("genesis_funding").ok_or_else(|| bad("missing genesis_funding"))?,
            xrpl_supply: *config_raw.get("xrpl_supply").ok_or_else(|| bad("missing xrpl_supply"))?,
            rng_seed: *config_raw.get("rng_seed").ok_or_else(|| bad("missing rng_seed"))?,
        };
        Ok(parser)
    }

    fn chain_line(section: &mut ChainSection, chain: ChainId, line: &str) -> Result<(), SimError> {
        if line.starts_with("account ") {
            section.accounts.push(parse_account_line(line)?);
        } else if line.starts_with("tx ") {
            section.entries.push(parse_tx_line(chain, line)?);
        } else if let Some(rest) = line.strip_prefix("close_index=") {
            section.close_index = parse_u64(rest, "close_index")?;
        } else if let Some(rest) = line.strip_prefix("registry=") {
            section.registry.insert(rest.to_string());
        } else if let Some((key, value)) = line.split_once('=') {
            section.scalars.insert(key.to_string(), value.to_string());
        } else {
            return Err(bad(format!("bad chain line {line:?}")));
        }
        Ok(())
    }

    fn parse_prompt(&mut self, line: &str) -> Result<(), SimError> {
        let map = fields(line);
        let kind = match req(&map, "kind", line)? {
            "issuance" => PromptKind::IssuanceConsent,
            "verification" => PromptKind::VerificationConsent,
            other => return Err(bad(format!("bad prompt kind {other:?}"))),
        };
        let status_field = req(&map, "status", line)?;
        let status = match status_field {
            "open" => PromptStatus::Open,
            "expired" => PromptStatus::Expired,
            "answered:approve" => PromptStatus::Answered(ConsentAnswer::Approve),
            "answered:deny" => PromptStatus::Answered(ConsentAnswer::Deny),
            other => return Err(bad(format!("bad prompt status {other:?}"))),
        };
        let payload_field = req(&map, "payload", line)?;
        let payload = if let Some(rest) = payload_field.strip_prefix("issuance:") {
            PromptPayload::Issuance { statement: parse_hex(rest, "prompt payload")? }
        } else if let Some(rest) = payload_field.strip_prefix("verification:") {
            let (verifier, tx) =
                rest.split_once(':').ok_or_else(|| bad("bad verification payload"))?;
            PromptPayload::Verification {
                verifier: parse_addr(verifier)?,
                attestation_tx: TxId::from_hex(tx).ok_or_else(|| bad("bad payload tx id"))?,
            }
        } else {
            return Err(bad(format!("bad prompt payload {payload_field:?}")));
        };
        self.mailbox.restore(Prompt {
            id: parse_u64(req(&map, "id", line)?, "prompt id")?,
            to: parse_addr(req(&map, "to", line)?)?,
            kind,
            payload,
            session_id: parse_u64(req(&map, "session", line)?, "session")?,
            created_at: parse_u64(req(&map, "created", line)?, "created")?,
            deadline: parse_u64(req(&map, "deadline", line)?, "deadline")?,
            status,
        });
        Ok(())
    }

    fn parse_issuance(&mut self, line: &str) -> Result<(), SimError> {
        let map = fields(line);
        let id = parse_u64(req(&map, "id", line)?, "session id")?;
        let statement_bytes = parse_hex(req(&map, "statement", line)?, "statement")?;
        let statement = Statement::decode(&statement_bytes)
            .map_err(|e| bad(format!("bad statement: {e}")))?;
        let issuer_sig = req(&map, "issuer_sig", line)?;
        let user_sig = req(&map, "user_sig", line)?;
        let session = IssuanceSession {
            id,
            issuer: parse_addr(req(&map, "issuer", line)?)?,
            subject: parse_addr(req(&map, "subject", line)?)?,
            statement,
            state: IssuanceState::parse(req(&map, "state", line)?)
                .ok_or_else(|| bad("bad issuance state"))?,
            issuer_sig: if issuer_sig == "-" {
                None
            } else {
                Some(Signature::from_der(parse_hex(issuer_sig, "issuer sig")?))
            },
            user_sig: if user_sig == "-" {
                None
            } else {
                Some(Signature::from_der(parse_hex(user_sig, "user sig")?))
            },
            issuer_journal: parse_journal(req(&map, "issuer_journal", line)?)?,
            subject_journal: parse_journal(req(&map, "subject_journal", line)?)?,
            gas_receipts: parse_receipts(req(&map, "receipts", line)?)?,
            prompt_id: parse_opt_u64(req(&map, "prompt", line)?, "prompt id")?,
            response: parse_answer(req(&map, "response", line)?)?,
            timed_out: req(&map, "timed_out", line)? == "1",
            anchor_side_tx: parse_opt_txid(req(&map, "anchor_side", line)?)?,
            anchor_xrpl_tx: parse_opt_txid(req(&map, "anchor_xrpl", line)?)?,
            anchored_ledger_index: parse_opt_u64(req(&map, "anchored_li", line)?, "anchored li")?,
        };
        self.issuance.insert(id, session);
        Ok(())
    }

    fn parse_verification(&mut self, line: &str) -> Result<(), SimError> {
        let map = fields(line);
        let id = parse_u64(req(&map, "id", line)?, "session id")?;
        let report_field = req(&map, "report", line)?;
        let report = if report_field == "-" {
            None
        } else {
            let parts: Vec<&str> = report_field.split(':').collect();
            if parts.len() != 7 {
                return Err(bad("bad report encoding"));
            }
            let statement = Statement::decode(&parse_hex(parts[0], "report statement")?)
                .map_err(|e| bad(format!("bad report statement: {e}")))?;
            Some(VerificationReport {
                statement,
                issuer_identity: parse_addr(parts[1])?,
                subject_identity: parse_addr(parts[2])?,
                issuer_sig_valid: parts[3] == "1",
                user_sig_valid: parts[4] == "1",
                anchor_tx: TxId::from_hex(parts[5]).ok_or_else(|| bad("bad report tx"))?,
                ledger_index: parse_u64(parts[6], "report index")?,
            })
        };
        let session = VerificationSession {
            id,
            verifier: parse_addr(req(&map, "verifier", line)?)?,
            attestation_tx: TxId::from_hex(req(&map, "tx", line)?)
                .ok_or_else(|| bad("bad attestation tx"))?,
            subject: parse_addr(req(&map, "subject", line)?)?,
            state: VerificationState::parse(req(&map, "state", line)?)
                .ok_or_else(|| bad("bad verification state"))?,
            pre_approval_gas: parse_opt_receipt(req(&map, "pre_gas", line)?)?,
            post_approval_gas: parse_opt_receipt(req(&map, "post_gas", line)?)?,
            verifier_journal: parse_journal(req(&map, "verifier_journal", line)?)?,
            subject_journal: parse_journal(req(&map, "subject_journal", line)?)?,
            prompt_id: parse_opt_u64(req(&map, "prompt", line)?, "prompt id")?,
            response: parse_answer(req(&map, "response", line)?)?,
            timed_out: req(&map, "timed_out", line)? == "1",
            report,
        };
        self.verification.insert(id, session);
        Ok(())
    }

    fn build(self) -> Result<Simulation, SimError> {
        let genesis = parse_addr(self.xrpl.scalar("genesis")?)?;
        let lock = parse_addr(self.xrpl.scalar("lock")?)?;
        let authority = parse_addr(self.sidechain.scalar("authority")?)?;
        let fee_pool = parse_addr(self.sidechain.scalar("fee_pool")?)?;
        let admin = parse_addr(self.sidechain.scalar("admin")?)?;
        let total_gas =
            parse_u64(self.sidechain.scalar("total_gas_charged")?, "total_gas_charged")?;
        let xrpl = XrplChain::restore(
            Ledger::restore(ChainId::Xrpl, self.xrpl.close_index, self.xrpl.entries),
            AccountTable::restore(self.xrpl.accounts),
            genesis,
            lock,
            self.config.xrpl_supply,
        );
        let sidechain = SidechainChain::restore(
            Ledger::restore(ChainId::IdmSidechain, self.sidechain.close_index, self.sidechain.entries),
            AccountTable::restore(self.sidechain.accounts),
            authority,
            fee_pool,
            admin,
            self.sidechain.registry,
            total_gas,
        );
        Ok(Simulation {
            config: self.config,
            xrpl,
            sidechain,
            bridge: Bridge { wrapped_drops: self.wrapped },
            mailbox: self.mailbox,
            issuance_sessions: self.issuance,
            verification_sessions: self.verification,
            keys: self.keys,
            labels: self.labels,
            baselines: self.baselines,
            next_session: self.next_session,
            nonces: self.nonces,
        })
    }
}
