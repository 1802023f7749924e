//! The simulation owner: both ledgers, the bridge, the consent mailbox, the
//! protocol sessions, account labels and keys, auditing, log export, and the
//! privacy scan. All mutations serialize through one `Simulation` value; a
//! ledger close (and prompt-expiry sweep) runs after every public mutating
//! operation, standing in for consensus rounds.

use std::collections::BTreeMap;

use crate::bridge::{self, Bridge, BridgeSigners, ConversionJournal};
use crate::chain::{Asset, ChainId, Drops, TxId};
use crate::crypto::{sha512_half, Address, KeyPair};
use crate::error::{ProtocolError, SimError};
use crate::issuance::IssuanceSession;
use crate::messaging::{ConsentAnswer, Mailbox, Prompt, PromptKind};
use crate::sidechain::{GasSchedule, SidechainChain};
use crate::verification::VerificationSession;
use crate::xrpl::XrplChain;

/// Run-wide configuration. Gas numbers and funding amounts are defaults, not
/// protocol constants; the 0.3 XRP coupling lives in the issuance protocol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub gas: GasSchedule,
    /// Ledger closes a consent prompt stays open for.
    pub consent_deadline: u64,
    /// Default per-actor grant used by the scenario runners.
    pub genesis_funding: Drops,
    /// Total XRP minted into the genesis account at ledger creation.
    pub xrpl_supply: Drops,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            gas: GasSchedule::default(),
            consent_deadline: 10,
            genesis_funding: 10_000_000,
            xrpl_supply: 100_000_000_000,
            rng_seed: 42,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        self.gas.validate().map_err(SimError::Config)?;
        if self.consent_deadline == 0 {
            return Err(SimError::Config("consent_deadline must be > 0".into()));
        }
        Ok(())
    }
}

/// The whole world. Dropping and reloading it through the canonical state
/// file reproduces byte-identical subsequent runs.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub config: SimConfig,
    pub xrpl: XrplChain,
    pub sidechain: SidechainChain,
    pub bridge: Bridge,
    pub mailbox: Mailbox,
    pub issuance_sessions: BTreeMap<u64, IssuanceSession>,
    pub verification_sessions: BTreeMap<u64, VerificationSession>,
    pub(crate) keys: BTreeMap<String, KeyPair>,
    pub(crate) labels: BTreeMap<String, String>,
    pub(crate) baselines: BTreeMap<String, Drops>,
    pub(crate) next_session: u64,
    pub(crate) nonces: BTreeMap<String, u64>,
}

/// Deterministic per-role key material derived from the run seed.
fn derive_seed(rng_seed: u64, label: &str) -> [u8; 32] {
    let mut counter = 0u64;
    loop {
        let mut input = Vec::with_capacity(label.len() + 24);
        input.extend_from_slice(b"idmsim-key");
        input.extend_from_slice(&rng_seed.to_be_bytes());
        input.extend_from_slice(label.as_bytes());
        input.extend_from_slice(&counter.to_be_bytes());
        let seed = sha512_half(&input);
        if KeyPair::generate(seed).is_ok() {
            return seed;
        }
        counter += 1;
    }
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        config.validate()?;
        let genesis = KeyPair::generate(derive_seed(config.rng_seed, "genesis")).expect("derived");
        let lock = KeyPair::generate(derive_seed(config.rng_seed, "bridge-lock")).expect("derived");
        let authority =
            KeyPair::generate(derive_seed(config.rng_seed, "bridge-authority")).expect("derived");
        let fee_pool = KeyPair::generate(derive_seed(config.rng_seed, "fee-pool")).expect("derived");

        let xrpl = XrplChain::new(&genesis, &lock, config.xrpl_supply);
        let sidechain = SidechainChain::new(&authority, &fee_pool, genesis.address());

        let mut keys = BTreeMap::new();
        let mut labels = BTreeMap::new();
        let mut baselines = BTreeMap::new();
        for (label, kp) in [
            ("genesis", &genesis),
            ("bridge-lock", &lock),
            ("bridge-authority", &authority),
            ("fee-pool", &fee_pool),
        ] {
            keys.insert(kp.address().text().to_string(), kp.clone());
            labels.insert(label.to_string(), kp.address().text().to_string());
        }
        baselines.insert(genesis.address().text().to_string(), config.xrpl_supply);

        Ok(Self {
            config,
            xrpl,
            sidechain,
            bridge: Bridge::new(),
            mailbox: Mailbox::new(),
            issuance_sessions: BTreeMap::new(),
            verification_sessions: BTreeMap::new(),
            keys,
            labels,
            baselines,
            next_session: 0,
            nonces: BTreeMap::new(),
        })
    }

    // -- naming ------------------------------------------------------------

    /// Resolve a label or a literal address string.
    pub fn resolve(&self, name: &str) -> Result<Address, SimError> {
        if let Some(addr) = self.labels.get(name) {
            return Address::from_text(addr).map_err(SimError::Crypto);
        }
        Address::from_text(name).map_err(|_| SimError::UnknownName(name.to_string()))
    }

    pub fn label_of(&self, address: &Address) -> Option<&str> {
        self.labels
            .iter()
            .find(|(_, addr)| addr.as_str() == address.text())
            .map(|(label, _)| label.as_str())
    }

    pub fn labels(&self) -> impl Iterator<Item = (&String, &String)> {
        self.labels.iter()
    }

    pub(crate) fn keypair(&self, address: &Address) -> Result<&KeyPair, SimError> {
        self.keys
            .get(address.text())
            .ok_or_else(|| SimError::UnknownName(address.text().to_string()))
    }

    fn is_system(&self, address: &Address) -> bool {
        *address == self.xrpl.genesis
            || *address == self.xrpl.lock
            || *address == self.sidechain.authority
            || *address == self.sidechain.fee_pool
    }

    // -- account lifecycle ---------------------------------------------------

    /// Create a labeled main-chain account with a key derived from the run
    /// seed, starting with zero balance.
    pub fn create_account(&mut self, label: &str) -> Result<Address, SimError> {
        if label.is_empty()
            || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(SimError::Config(format!(
                "label {label:?} must be alphanumeric with '-' or '_'"
            )));
        }
        if self.labels.contains_key(label) {
            return Err(SimError::DuplicateLabel(label.to_string()));
        }
        let seed = derive_seed(self.config.rng_seed, &format!("account:{label}"));
        let kp = KeyPair::generate(seed).expect("derived");
        let address = self.xrpl.create_account(*kp.public()).map_err(SimError::Chain)?;
        self.keys.insert(address.text().to_string(), kp);
        self.labels.insert(label.to_string(), address.text().to_string());
        self.finish_step();
        Ok(address)
    }

    /// Mirror a main-chain account onto the sidechain.
    pub fn mirror(&mut self, name: &str) -> Result<(), SimError> {
        let address = self.resolve(name)?;
        self.sidechain.mirror_account(&self.xrpl, &address).map_err(SimError::Chain)?;
        self.finish_step();
        Ok(())
    }

    /// Grant XRP from the genesis account; counts toward the audit baseline.
    pub fn fund(&mut self, name: &str, drops: Drops) -> Result<TxId, SimError> {
        let address = self.resolve(name)?;
        if self.is_system(&address) {
            return Err(SimError::Config("cannot fund a system account".into()));
        }
        let genesis = self.xrpl.genesis.clone();
        let signer = self.keypair(&genesis)?.clone();
        let tx = self.xrpl.transfer_xrp(&genesis, &address, drops, &signer, None)?;
        *self.baselines.entry(address.text().to_string()).or_insert(0) += drops;
        self.finish_step();
        Ok(tx)
    }

    /// Plain user-level XRP transfer on the main chain.
    pub fn transfer(&mut self, from: &str, to: &str, drops: Drops) -> Result<TxId, SimError> {
        let from = self.resolve(from)?;
        let to = self.resolve(to)?;
        if self.is_system(&from) || self.is_system(&to) {
            return Err(SimError::Config("system accounts cannot transact directly".into()));
        }
        let signer = self.keypair(&from)?.clone();
        let tx = self.xrpl.transfer_xrp(&from, &to, drops, &signer, None)?;
        self.finish_step();
        Ok(tx)
    }

    /// Plain user-level sidechain transfer in either asset.
    pub fn sidechain_transfer(
        &mut self,
        from: &str,
        to: &str,
        asset: Asset,
        drops: Drops,
    ) -> Result<TxId, SimError> {
        let from = self.resolve(from)?;
        let to = self.resolve(to)?;
        if self.is_system(&from) || self.is_system(&to) {
            return Err(SimError::Config("system accounts cannot transact directly".into()));
        }
        let signer = self.keypair(&from)?.clone();
        let tx = self
            .sidechain
            .apply_kind(crate::chain::TxKind::Transfer, &from, &to, asset, drops, &signer, None)?;
        self.finish_step();
        Ok(tx)
    }

    pub fn register_issuer(&mut self, name: &str) -> Result<(), SimError> {
        let admin = self.xrpl.genesis.clone();
        self.register_issuer_by(admin.text(), name)
    }

    pub fn register_issuer_by(&mut self, caller: &str, name: &str) -> Result<(), SimError> {
        let caller = self.resolve(caller)?;
        let issuer = self.resolve(name)?;
        if !self.sidechain.accounts.contains(&issuer) {
            return Err(ProtocolError::UnknownSubject(issuer.text().to_string()).into());
        }
        self.sidechain.register_issuer(&caller, &issuer)?;
        self.finish_step();
        Ok(())
    }

    // -- bridge operations ---------------------------------------------------

    pub(crate) fn signer_keys(
        &self,
        account: &Address,
    ) -> Result<(KeyPair, KeyPair, KeyPair), SimError> {
        let account_kp = self.keypair(account)?.clone();
        let lock_kp = self.keypair(&self.xrpl.lock)?.clone();
        let authority_kp = self.keypair(&self.sidechain.authority)?.clone();
        Ok((account_kp, lock_kp, authority_kp))
    }

    pub fn bridge_in(&mut self, name: &str, drops: Drops) -> Result<(), SimError> {
        let address = self.resolve(name)?;
        let (a, l, au) = self.signer_keys(&address)?;
        let signers = BridgeSigners { account: &a, lock: &l, authority: &au };
        bridge::bridge_to_sidechain(&mut self.xrpl, &mut self.sidechain, &address, drops, &signers)?;
        self.finish_step();
        Ok(())
    }

    pub fn bridge_out(&mut self, name: &str, drops: Drops) -> Result<(), SimError> {
        let address = self.resolve(name)?;
        let (a, l, au) = self.signer_keys(&address)?;
        let signers = BridgeSigners { account: &a, lock: &l, authority: &au };
        bridge::bridge_from_sidechain(&mut self.xrpl, &mut self.sidechain, &address, drops, &signers)?;
        self.finish_step();
        Ok(())
    }

    pub fn wrap_balance(&mut self, name: &str, drops: Drops) -> Result<(), SimError> {
        let address = self.resolve(name)?;
        let kp = self.keypair(&address)?.clone();
        bridge::wrap(&mut self.bridge, &mut self.sidechain, &address, drops, &kp)?;
        self.finish_step();
        Ok(())
    }

    pub fn unwrap_balance(&mut self, name: &str, drops: Drops) -> Result<(), SimError> {
        let address = self.resolve(name)?;
        let kp = self.keypair(&address)?.clone();
        bridge::unwrap(&mut self.bridge, &mut self.sidechain, &address, drops, &kp)?;
        self.finish_step();
        Ok(())
    }

    /// Run the IdXRP fallback chain for an account and return the journal.
    pub fn ensure_funds_for(&mut self, name: &str, required: Drops) -> Result<ConversionJournal, SimError> {
        let address = self.resolve(name)?;
        let journal = self.run_ensure(&address, required)?;
        self.finish_step();
        Ok(journal)
    }

    /// Reverse a journal previously produced by `ensure_funds_for`.
    pub fn reverse_journal(&mut self, journal: &ConversionJournal) -> Result<(), SimError> {
        let account = match journal.entries.first() {
            Some(entry) => entry.account.clone(),
            None => {
                self.finish_step();
                return Ok(());
            }
        };
        let (a, l, au) = self.signer_keys(&account)?;
        let signers = BridgeSigners { account: &a, lock: &l, authority: &au };
        bridge::reverse(&mut self.bridge, &mut self.xrpl, &mut self.sidechain, journal, &signers)?;
        self.finish_step();
        Ok(())
    }

    pub(crate) fn run_ensure(
        &mut self,
        account: &Address,
        required: Drops,
    ) -> Result<ConversionJournal, SimError> {
        let (a, l, au) = self.signer_keys(account)?;
        let signers = BridgeSigners { account: &a, lock: &l, authority: &au };
        Ok(bridge::ensure_funds(
            &mut self.bridge,
            &mut self.xrpl,
            &mut self.sidechain,
            account,
            required,
            &signers,
        )?)
    }

    pub(crate) fn run_reverse(&mut self, journal: &ConversionJournal) -> Result<(), SimError> {
        let account = match journal.entries.first() {
            Some(entry) => entry.account.clone(),
            None => return Ok(()),
        };
        let (a, l, au) = self.signer_keys(&account)?;
        let signers = BridgeSigners { account: &a, lock: &l, authority: &au };
        bridge::reverse(&mut self.bridge, &mut self.xrpl, &mut self.sidechain, journal, &signers)?;
        Ok(())
    }

    // -- time ---------------------------------------------------------------

    /// Current logical time: the sidechain close index.
    pub fn current_index(&self) -> u64 {
        self.sidechain.ledger.close_index()
    }

    /// Close both ledgers `count` times, expiring overdue consent prompts.
    pub fn close_ledgers(&mut self, count: u64) {
        for _ in 0..count {
            self.finish_step();
        }
    }

    /// One deterministic close on both chains followed by the expiry sweep.
    /// Every public mutating operation ends here.
    pub(crate) fn finish_step(&mut self) {
        self.xrpl.ledger.close();
        self.sidechain.ledger.close();
        let now = self.sidechain.ledger.close_index();
        let expired = self.mailbox.expire(now);
        for prompt in expired {
            // Expiry routes a denial with the same accounting as an explicit
            // deny. A missing session can only come from a hand-edited state
            // file; the prompt is already marked expired, nothing else to do.
            let _ = self.route_expiry(&prompt);
        }
    }

    fn route_expiry(&mut self, prompt: &Prompt) -> Result<(), SimError> {
        match prompt.kind {
            PromptKind::IssuanceConsent => self.issuance_timeout(prompt.session_id),
            PromptKind::VerificationConsent => self.verification_timeout(prompt.session_id),
        }
    }

    // -- statements -----------------------------------------------------------

    pub(crate) fn next_nonce(&mut self, issuer: &Address, subject: &Address) -> u64 {
        let key = format!("{}|{}", issuer.text(), subject.text());
        let counter = self.nonces.entry(key).or_insert(0);
        *counter += 1;
        *counter
    }

    pub(crate) fn next_session_id(&mut self) -> u64 {
        self.next_session += 1;
        self.next_session
    }

    // -- views ----------------------------------------------------------------

    pub fn balances(&self, name: &str) -> Result<(Drops, Drops, Drops), SimError> {
        let address = self.resolve(name)?;
        let main = self.xrpl.balance(&address).unwrap_or(0);
        let (side_xrp, idxrp) = match self.sidechain.accounts.get(&address) {
            Ok(account) => (account.xrp, account.idxrp),
            Err(_) => (0, 0),
        };
        Ok((main, side_xrp, idxrp))
    }

    pub fn attestation_refs(&self, name: &str) -> Result<Vec<TxId>, SimError> {
        let address = self.resolve(name)?;
        Ok(self.sidechain.accounts.get(&address)?.attestation_refs.clone())
    }

    pub fn inbox(&self, name: &str) -> Result<Vec<&Prompt>, SimError> {
        let address = self.resolve(name)?;
        Ok(self.mailbox.inbox(&address))
    }

    /// Answer a prompt from the inbox, routing to the owning session.
    pub fn respond_prompt(
        &mut self,
        prompt_id: u64,
        responder: &str,
        answer: ConsentAnswer,
    ) -> Result<(), SimError> {
        let responder = self.resolve(responder)?;
        let prompt = self.mailbox.get(prompt_id)?.clone();
        match prompt.kind {
            PromptKind::IssuanceConsent => {
                self.respond_issuance(prompt.session_id, &responder, answer)
            }
            PromptKind::VerificationConsent => {
                self.respond_verification(prompt.session_id, &responder, answer)
            }
        }
    }

    // -- audit ------------------------------------------------------------------

    pub fn audit(&self) -> AuditReport {
        let mut addresses: Vec<String> = Vec::new();
        for (addr, _) in self.xrpl.accounts.iter() {
            addresses.push(addr.clone());
        }
        for (addr, _) in self.sidechain.accounts.iter() {
            if !addresses.contains(addr) {
                addresses.push(addr.clone());
            }
        }
        addresses.sort();

        let mut rows = Vec::new();
        for addr_text in addresses {
            let address = Address::from_text(&addr_text).expect("table holds valid addresses");
            let xrp = self.xrpl.balance(&address).unwrap_or(0);
            let (side_xrp, idxrp) = match self.sidechain.accounts.get(&address) {
                Ok(a) => (a.xrp, a.idxrp),
                Err(_) => (0, 0),
            };
            let baseline = self.baselines.get(&addr_text).copied().unwrap_or(0);
            let total = xrp as i128 + side_xrp as i128 + idxrp as i128;
            rows.push(AccountRow {
                label: self.label_of(&address).map(str::to_string),
                address: addr_text,
                xrp,
                side_xrp,
                idxrp,
                baseline,
                net: total - baseline as i128,
                system: self.is_system(&address),
            });
        }

        let lock_balance = self.xrpl.lock_balance();
        let idxrp_supply = self.sidechain.idxrp_supply();
        let side_xrp_supply = self.sidechain.side_xrp_supply();
        let xrpl_total = self.xrpl.total_drops();
        let global_total = (xrpl_total - lock_balance) + side_xrp_supply + idxrp_supply;
        let genesis_supply = self.xrpl.genesis_supply();

        let refs_ok = self.check_attestation_refs();
        AuditReport {
            rows,
            lock_balance,
            fee_pool_idxrp: self.sidechain.fee_pool_balance(),
            total_gas_charged: self.sidechain.total_gas_charged(),
            idxrp_supply,
            side_xrp_supply,
            wrapped_drops: self.bridge.wrapped_drops,
            xrpl_total,
            global_total,
            genesis_supply,
            peg_ok: idxrp_supply == self.bridge.wrapped_drops,
            backing_ok: lock_balance == side_xrp_supply + idxrp_supply,
            main_conservation_ok: xrpl_total == genesis_supply,
            global_conservation_ok: global_total == genesis_supply,
            fee_pool_ok: self.sidechain.fee_pool_balance() == self.sidechain.total_gas_charged(),
            refs_ok,
        }
    }

    /// Every recorded ref must resolve to a double-signed attestation whose
    /// subject is that account, valid under the on-record keys.
    fn check_attestation_refs(&self) -> bool {
        for (addr_text, account) in self.sidechain.accounts.iter() {
            for tx_id in &account.attestation_refs {
                let Some(entry) = self.sidechain.ledger.find(tx_id) else {
                    return false;
                };
                let Some(memo) = entry.tx.memo.as_deref() else {
                    return false;
                };
                let Ok(attestation) = crate::crypto::Attestation::decode_memo(memo) else {
                    return false;
                };
                if attestation.statement.subject.text() != addr_text {
                    return false;
                }
                let Ok(issuer_account) = self.sidechain.accounts.get(&attestation.statement.issuer)
                else {
                    return false;
                };
                let (issuer_ok, user_ok) =
                    attestation.verify(&issuer_account.public, &account.public);
                if !issuer_ok || !user_ok {
                    return false;
                }
            }
        }
        true
    }

    pub fn verify_invariants(&self) -> Result<(), SimError> {
        let audit = self.audit();
        for (ok, name) in [
            (audit.peg_ok, "PEG_VIOLATION"),
            (audit.backing_ok, "BACKING_VIOLATION"),
            (audit.main_conservation_ok, "MAIN_CONSERVATION_VIOLATION"),
            (audit.global_conservation_ok, "GLOBAL_CONSERVATION_VIOLATION"),
            (audit.fee_pool_ok, "FEE_POOL_MISMATCH"),
            (audit.refs_ok, "BAD_ATTESTATION_REF"),
        ] {
            if !ok {
                return Err(SimError::InvariantViolation(name.to_string()));
            }
        }
        Ok(())
    }

    // -- privacy scan -------------------------------------------------------------

    /// Scan every serialized ledger entry on both chains for forbidden byte
    /// strings (raw attribute values that must never reach a chain).
    pub fn privacy_scan(&self, forbidden: &[String]) -> PrivacyScanReport {
        let mut patterns = Vec::new();
        let mut findings = Vec::new();
        for pattern in forbidden {
            let needle = pattern.as_bytes();
            let mut found = false;
            for (chain, ledger) in
                [("xrpl", &self.xrpl.ledger), ("idm", &self.sidechain.ledger)]
            {
                for entry in ledger.entries() {
                    let bytes = crate::chain::tx_signing_bytes(
                        ledger.chain,
                        entry.tx.kind,
                        &entry.tx.from,
                        &entry.tx.to,
                        entry.tx.asset,
                        entry.tx.amount,
                        entry.tx.sequence,
                        entry.tx.memo.as_deref(),
                    );
                    if contains_subslice(&bytes, needle) {
                        found = true;
                        findings.push(PrivacyFinding {
                            pattern: pattern.clone(),
                            chain,
                            tx_id: entry.tx.tx_id.to_hex(),
                        });
                    }
                }
            }
            patterns.push((pattern.clone(), found));
        }
        let pass = patterns.iter().all(|(_, found)| !found);
        PrivacyScanReport { patterns, findings, pass }
    }

    // -- export --------------------------------------------------------------------

    /// Canonical line-delimited log for one chain: genesis allocation,
    /// account registry in creation order, then one transaction per line.
    pub fn export_log(&self, chain: ChainId) -> String {
        let (ledger, table) = match chain {
            ChainId::Xrpl => (&self.xrpl.ledger, &self.xrpl.accounts),
            ChainId::IdmSidechain => (&self.sidechain.ledger, &self.sidechain.accounts),
        };
        let mut out = String::new();
        out.push_str(&format!("chain {}\n", chain.name()));
        out.push_str(&format!("close_index {}\n", ledger.close_index()));
        if chain == ChainId::Xrpl {
            out.push_str(&format!(
                "genesis {} xrp={}\n",
                self.xrpl.genesis.text(),
                self.xrpl.genesis_supply()
            ));
        }
        for addr in table.creation_order() {
            out.push_str(&format!("account {addr}\n"));
        }
        for entry in ledger.entries() {
            out.push_str(&crate::chain::render_tx_line(entry));
            out.push('\n');
        }
        out
    }

    /// Canonical balance map for one chain, the replay oracle's target.
    pub fn balance_map(&self, chain: ChainId) -> String {
        match chain {
            ChainId::Xrpl => self.xrpl.accounts.balance_map(),
            ChainId::IdmSidechain => self.sidechain.accounts.balance_map(),
        }
    }
}

fn contains_subslice(haystack: &[u8], needle: &[u8]) -> bool {
    if needle.is_empty() {
        return false;
    }
    haystack.windows(needle.len()).any(|window| window == needle)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AccountRow {
    pub label: Option<String>,
    pub address: String,
    pub xrp: Drops,
    pub side_xrp: Drops,
    pub idxrp: Drops,
    pub baseline: Drops,
    pub net: i128,
    pub system: bool,
}

/// Per-account balances plus the peg, backing, and conservation checks.
#[derive(Clone, Debug)]
pub struct AuditReport {
    pub rows: Vec<AccountRow>,
    pub lock_balance: Drops,
    pub fee_pool_idxrp: Drops,
    pub total_gas_charged: Drops,
    pub idxrp_supply: Drops,
    pub side_xrp_supply: Drops,
    pub wrapped_drops: Drops,
    pub xrpl_total: Drops,
    pub global_total: Drops,
    pub genesis_supply: Drops,
    pub peg_ok: bool,
    pub backing_ok: bool,
    pub main_conservation_ok: bool,
    pub global_conservation_ok: bool,
    pub fee_pool_ok: bool,
    pub refs_ok: bool,
}

impl AuditReport {
    pub fn all_ok(&self) -> bool {
        self.peg_ok
            && self.backing_ok
            && self.main_conservation_ok
            && self.global_conservation_ok
            && self.fee_pool_ok
            && self.refs_ok
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("account                                  xrp          side-xrp     idxrp        net\n");
        for row in &self.rows {
            let name = match &row.label {
                Some(label) => format!("{label} ({})", row.address),
                None => row.address.clone(),
            };
            out.push_str(&format!(
                "{:<40} {:<12} {:<12} {:<12} {}\n",
                truncate(&name, 40),
                row.xrp,
                row.side_xrp,
                row.idxrp,
                row.net
            ));
        }
        out.push_str(&format!(
            "peg: {} (idxrp_supply={} wrapped={})\n",
            if self.peg_ok { "OK" } else { "PEG_VIOLATION" },
            self.idxrp_supply,
            self.wrapped_drops
        ));
        out.push_str(&format!(
            "backing: {} (lock={} sidechain_value={})\n",
            if self.backing_ok { "OK" } else { "BACKING_VIOLATION" },
            self.lock_balance,
            self.side_xrp_supply + self.idxrp_supply
        ));
        out.push_str(&format!(
            "main-chain conservation: {} (total={} supply={})\n",
            if self.main_conservation_ok { "OK" } else { "MAIN_CONSERVATION_VIOLATION" },
            self.xrpl_total,
            self.genesis_supply
        ));
        out.push_str(&format!(
            "global conservation: {} (total={} supply={})\n",
            if self.global_conservation_ok { "OK" } else { "GLOBAL_CONSERVATION_VIOLATION" },
            self.global_total,
            self.genesis_supply
        ));
        out.push_str(&format!(
            "fee pool: {} (pool={} receipts={})\n",
            if self.fee_pool_ok { "OK" } else { "FEE_POOL_MISMATCH" },
            self.fee_pool_idxrp,
            self.total_gas_charged
        ));
        out.push_str(&format!(
            "attestation refs: {}\n",
            if self.refs_ok { "OK" } else { "BAD_ATTESTATION_REF" }
        ));
        out
    }
}

fn truncate(s: &str, max: usize) -> String {
    if s.len() <= max {
        s.to_string()
    } else {
        format!("{}…", &s[..max.saturating_sub(1)])
    }
}

#[derive(Clone, Debug)]
pub struct PrivacyFinding {
    pub pattern: String,
    pub chain: &'static str,
    pub tx_id: String,
}

#[derive(Clone, Debug)]
pub struct PrivacyScanReport {
    /// (pattern, found-on-chain)
    pub patterns: Vec<(String, bool)>,
    pub findings: Vec<PrivacyFinding>,
    pub pass: bool,
}

impl PrivacyScanReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (pattern, found) in &self.patterns {
            out.push_str(&format!(
                "{}: {:?}\n",
                if *found { "LEAKED" } else { "clean" },
                pattern
            ));
        }
        out.push_str(if self.pass { "privacy scan: PASS\n" } else { "privacy scan: FAIL\n" });
        out
    }
}
