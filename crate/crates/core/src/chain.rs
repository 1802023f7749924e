//! Shared append-only ledger machinery: transactions, per-account sequence
//! numbers, deterministic hashing, and ledger close.
//!
//! Both chains use the same transaction shape and apply rules. Replaying a
//! ledger's entries from its genesis allocation reproduces every balance
//! exactly; nothing mutates balances outside `apply_transaction`. There is no
//! base fee on either chain — transfers move exactly their amount.

use std::collections::{BTreeMap, BTreeSet};

use crate::canon::CanonWriter;
use crate::crypto::{sha512_half, verify, Address, KeyPair, Signature};
use crate::error::ChainError;

/// Drops are the universal unit: 1 XRP = 1,000,000 drops.
pub type Drops = u64;

/// SHA-512-half of the canonical transaction encoding.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TxId(pub [u8; 32]);

impl TxId {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let bytes = hex::decode(s).ok()?;
        let arr: [u8; 32] = bytes.try_into().ok()?;
        Some(Self(arr))
    }
}

impl std::fmt::Display for TxId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl std::fmt::Debug for TxId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ChainId {
    Xrpl,
    IdmSidechain,
}

impl ChainId {
    pub fn code(self) -> u8 {
        match self {
            ChainId::Xrpl => 0,
            ChainId::IdmSidechain => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChainId::Xrpl => "xrpl",
            ChainId::IdmSidechain => "idm",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Asset {
    Xrp,
    IdXrp,
}

impl Asset {
    pub fn code(self) -> u8 {
        match self {
            Asset::Xrp => 0,
            Asset::IdXrp => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Asset::Xrp => "xrp",
            Asset::IdXrp => "idxrp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "xrp" => Some(Asset::Xrp),
            "idxrp" => Some(Asset::IdXrp),
            _ => None,
        }
    }
}

/// What a ledger entry does to balances. Plain value movement is `Transfer`;
/// the other kinds are the bridge's lock-mirror and wrap operations on the
/// sidechain, recorded on the ledger so that replay reproduces balances.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TxKind {
    /// Debit sender, credit recipient in `asset`.
    Transfer,
    /// Credit `to` with sidechain XRP backed by main-chain lock custody.
    BridgeIn,
    /// Debit `from`'s sidechain XRP; the lock releases custody on the main chain.
    BridgeOut,
    /// Convert `amount` of the account's sidechain XRP into IdXRP.
    Wrap,
    /// Convert `amount` of the account's IdXRP back into sidechain XRP.
    Unwrap,
}

impl TxKind {
    pub fn code(self) -> u8 {
        match self {
            TxKind::Transfer => 0,
            TxKind::BridgeIn => 1,
            TxKind::BridgeOut => 2,
            TxKind::Wrap => 3,
            TxKind::Unwrap => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TxKind::Transfer => "transfer",
            TxKind::BridgeIn => "bridge_in",
            TxKind::BridgeOut => "bridge_out",
            TxKind::Wrap => "wrap",
            TxKind::Unwrap => "unwrap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "transfer" => Some(TxKind::Transfer),
            "bridge_in" => Some(TxKind::BridgeIn),
            "bridge_out" => Some(TxKind::BridgeOut),
            "wrap" => Some(TxKind::Wrap),
            "unwrap" => Some(TxKind::Unwrap),
            _ => None,
        }
    }
}

/// A validated transaction. The memo carries canonical attestation bytes on
/// issuance transactions and is empty otherwise.
#[derive(Clone, Debug)]
pub struct SignedTransaction {
    pub tx_id: TxId,
    pub kind: TxKind,
    pub from: Address,
    pub to: Address,
    pub asset: Asset,
    pub amount: Drops,
    pub sequence: u64,
    pub memo: Option<Vec<u8>>,
    pub signature: Signature,
}

/// Canonical bytes of everything except the id and signature; both the tx id
/// and the signature are computed over this.
#[allow(clippy::too_many_arguments)]
pub fn tx_signing_bytes(
    chain: ChainId,
    kind: TxKind,
    from: &Address,
    to: &Address,
    asset: Asset,
    amount: Drops,
    sequence: u64,
    memo: Option<&[u8]>,
) -> Vec<u8> {
    let mut w = CanonWriter::new();
    w.byte(chain.code())
        .byte(kind.code())
        .text(from.text())
        .text(to.text())
        .byte(asset.code())
        .uint(amount)
        .uint(sequence);
    match memo {
        None => {
            w.byte(0);
        }
        Some(bytes) => {
            w.byte(1);
            w.chunk(bytes);
        }
    }
    w.finish()
}

pub fn tx_hash(signing_bytes: &[u8]) -> TxId {
    TxId(sha512_half(signing_bytes))
}

/// Build and sign a transaction for the given chain with the sender's key.
#[allow(clippy::too_many_arguments)]
pub fn build_signed_tx(
    chain: ChainId,
    kind: TxKind,
    from: &Address,
    to: &Address,
    asset: Asset,
    amount: Drops,
    sequence: u64,
    memo: Option<Vec<u8>>,
    signer: &KeyPair,
) -> SignedTransaction {
    let bytes = tx_signing_bytes(chain, kind, from, to, asset, amount, sequence, memo.as_deref());
    SignedTransaction {
        tx_id: tx_hash(&bytes),
        kind,
        from: from.clone(),
        to: to.clone(),
        asset,
        amount,
        sequence,
        memo,
        signature: signer.sign(&bytes),
    }
}

// ---------------------------------------------------------------------------
// Accounts
// ---------------------------------------------------------------------------

/// Balance-carrying account state shared by both chains. Main-chain accounts
/// never hold IdXRP or attestation refs; the fields simply stay empty there.
#[derive(Clone, Debug)]
pub struct AccountState {
    pub public: [u8; 33],
    pub xrp: Drops,
    pub idxrp: Drops,
    pub sequence: u64,
    pub attestation_refs: Vec<TxId>,
}

impl AccountState {
    pub fn new(public: [u8; 33]) -> Self {
        Self { public, xrp: 0, idxrp: 0, sequence: 0, attestation_refs: Vec::new() }
    }

    pub fn balance(&self, asset: Asset) -> Drops {
        match asset {
            Asset::Xrp => self.xrp,
            Asset::IdXrp => self.idxrp,
        }
    }

    fn credit(&mut self, asset: Asset, amount: Drops) -> Result<(), ChainError> {
        let slot = match asset {
            Asset::Xrp => &mut self.xrp,
            Asset::IdXrp => &mut self.idxrp,
        };
        *slot = slot.checked_add(amount).ok_or(ChainError::Overflow)?;
        Ok(())
    }

    fn debit(&mut self, asset: Asset, amount: Drops) -> Result<(), ChainError> {
        let slot = match asset {
            Asset::Xrp => &mut self.xrp,
            Asset::IdXrp => &mut self.idxrp,
        };
        *slot = slot.checked_sub(amount).ok_or(ChainError::InsufficientFunds {
            needed: amount,
            available: *slot,
        })?;
        Ok(())
    }
}

/// Deterministically ordered account map, keyed by address text.
#[derive(Clone, Debug, Default)]
pub struct AccountTable {
    accounts: BTreeMap<String, AccountState>,
    /// Creation order, for reproducible exports.
    creation_order: Vec<String>,
}

impl AccountTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild a table from persisted rows in creation order.
    pub(crate) fn restore(rows: Vec<(String, AccountState)>) -> Self {
        let mut table = Self::new();
        for (addr, state) in rows {
            table.creation_order.push(addr.clone());
            table.accounts.insert(addr, state);
        }
        table
    }

    pub fn create(&mut self, address: &Address, public: [u8; 33]) -> Result<(), ChainError> {
        if self.accounts.contains_key(address.text()) {
            return Err(ChainError::DuplicateAccount(address.text().to_string()));
        }
        self.accounts.insert(address.text().to_string(), AccountState::new(public));
        self.creation_order.push(address.text().to_string());
        Ok(())
    }

    pub fn contains(&self, address: &Address) -> bool {
        self.accounts.contains_key(address.text())
    }

    pub fn get(&self, address: &Address) -> Result<&AccountState, ChainError> {
        self.accounts
            .get(address.text())
            .ok_or_else(|| ChainError::UnknownAccount(address.text().to_string()))
    }

    pub fn get_mut(&mut self, address: &Address) -> Result<&mut AccountState, ChainError> {
        self.accounts
            .get_mut(address.text())
            .ok_or_else(|| ChainError::UnknownAccount(address.text().to_string()))
    }

    /// Iterate in address order.
    pub fn iter(&self) -> impl Iterator<Item = (&String, &AccountState)> {
        self.accounts.iter()
    }

    pub fn creation_order(&self) -> &[String] {
        &self.creation_order
    }

    pub fn total(&self, asset: Asset) -> Drops {
        self.accounts.values().map(|a| a.balance(asset)).sum()
    }

    /// Canonical one-line-per-account balance rendering, sorted by address.
    pub fn balance_map(&self) -> String {
        let mut out = String::new();
        for (addr, state) in &self.accounts {
            out.push_str(&format!(
                "{} xrp={} idxrp={} seq={}\n",
                addr, state.xrp, state.idxrp, state.sequence
            ));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Ledger
// ---------------------------------------------------------------------------

/// A finalized entry plus the close index it was finalized in.
#[derive(Clone, Debug)]
pub struct LedgerEntry {
    pub tx: SignedTransaction,
    pub ledger_index: u64,
}

/// Append-only validated transaction history for one chain.
#[derive(Clone, Debug)]
pub struct Ledger {
    pub chain: ChainId,
    entries: Vec<LedgerEntry>,
    close_index: u64,
    seen: BTreeSet<[u8; 32]>,
}

impl Ledger {
    pub fn new(chain: ChainId) -> Self {
        Self { chain, entries: Vec::new(), close_index: 0, seen: BTreeSet::new() }
    }

    /// Rebuild a ledger from persisted entries without re-validating them;
    /// the replay oracle is the integrity check for persisted history.
    pub(crate) fn restore(chain: ChainId, close_index: u64, entries: Vec<LedgerEntry>) -> Self {
        let seen = entries.iter().map(|e| e.tx.tx_id.0).collect();
        Self { chain, entries, close_index, seen }
    }

    pub fn close_index(&self) -> u64 {
        self.close_index
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn find(&self, tx_id: &TxId) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.tx.tx_id == *tx_id)
    }

    /// Advance the close index; all pending entries become final.
    /// With validation done at apply time this close is deterministic and
    /// instant, standing in for the few-second consensus round.
    pub fn close(&mut self) -> u64 {
        self.close_index += 1;
        self.close_index
    }
}

/// Validate and apply one transaction: signature, duplicate, sequence, and
/// funds checks, then the balance mutation for its kind. The ledger and the
/// account table stay untouched on any rejection.
pub fn apply_transaction(
    table: &mut AccountTable,
    ledger: &mut Ledger,
    tx: SignedTransaction,
) -> Result<TxId, ChainError> {
    let signing_bytes = tx_signing_bytes(
        ledger.chain,
        tx.kind,
        &tx.from,
        &tx.to,
        tx.asset,
        tx.amount,
        tx.sequence,
        tx.memo.as_deref(),
    );
    if tx_hash(&signing_bytes) != tx.tx_id {
        return Err(ChainError::BadSignature);
    }
    let sender = table.get(&tx.from)?;
    if !verify(&sender.public, &signing_bytes, &tx.signature) {
        return Err(ChainError::BadSignature);
    }
    if ledger.seen.contains(&tx.tx_id.0) {
        return Err(ChainError::DuplicateTx(tx.tx_id.to_hex()));
    }
    let expected = sender.sequence + 1;
    if tx.sequence != expected {
        return Err(ChainError::BadSequence { expected, got: tx.sequence });
    }

    // Validate funds and targets fully before mutating anything.
    match tx.kind {
        TxKind::Transfer => {
            if sender.balance(tx.asset) < tx.amount {
                return Err(ChainError::InsufficientFunds {
                    needed: tx.amount,
                    available: sender.balance(tx.asset),
                });
            }
            table.get(&tx.to)?;
        }
        TxKind::BridgeIn => {
            if tx.asset != Asset::Xrp {
                return Err(ChainError::UnsupportedAsset);
            }
            table.get(&tx.to)?;
        }
        TxKind::BridgeOut => {
            if tx.asset != Asset::Xrp {
                return Err(ChainError::UnsupportedAsset);
            }
            if sender.xrp < tx.amount {
                return Err(ChainError::InsufficientFunds {
                    needed: tx.amount,
                    available: sender.xrp,
                });
            }
        }
        TxKind::Wrap => {
            if tx.from != tx.to {
                return Err(ChainError::UnsupportedOp);
            }
            if sender.xrp < tx.amount {
                return Err(ChainError::InsufficientFunds {
                    needed: tx.amount,
                    available: sender.xrp,
                });
            }
        }
        TxKind::Unwrap => {
            if tx.from != tx.to {
                return Err(ChainError::UnsupportedOp);
            }
            if sender.idxrp < tx.amount {
                return Err(ChainError::InsufficientFunds {
                    needed: tx.amount,
                    available: sender.idxrp,
                });
            }
        }
    }

    match tx.kind {
        TxKind::Transfer => {
            table.get_mut(&tx.from)?.debit(tx.asset, tx.amount)?;
            table.get_mut(&tx.to)?.credit(tx.asset, tx.amount)?;
        }
        TxKind::BridgeIn => {
            table.get_mut(&tx.to)?.credit(Asset::Xrp, tx.amount)?;
        }
        TxKind::BridgeOut => {
            table.get_mut(&tx.from)?.debit(Asset::Xrp, tx.amount)?;
        }
        TxKind::Wrap => {
            let account = table.get_mut(&tx.from)?;
            account.debit(Asset::Xrp, tx.amount)?;
            account.credit(Asset::IdXrp, tx.amount)?;
        }
        TxKind::Unwrap => {
            let account = table.get_mut(&tx.from)?;
            account.debit(Asset::IdXrp, tx.amount)?;
            account.credit(Asset::Xrp, tx.amount)?;
        }
    }

    table.get_mut(&tx.from)?.sequence += 1;
    ledger.seen.insert(tx.tx_id.0);
    let id = tx.tx_id;
    // Entries finalize in the next close.
    let ledger_index = ledger.close_index + 1;
    ledger.entries.push(LedgerEntry { tx, ledger_index });
    Ok(id)
}

/// Canonical line rendering of one entry, used by the log export, the ledger
/// inspect command, and the replay oracle.
pub fn render_tx_line(entry: &LedgerEntry) -> String {
    let tx = &entry.tx;
    let memo = match &tx.memo {
        None => "-".to_string(),
        Some(bytes) => hex::encode(bytes),
    };
    format!(
        "tx id={} li={} kind={} from={} to={} asset={} amount={} seq={} memo={} sig={}",
        tx.tx_id.to_hex(),
        entry.ledger_index,
        tx.kind.name(),
        tx.from.text(),
        tx.to.text(),
        tx.asset.name(),
        tx.amount,
        tx.sequence,
        memo,
        hex::encode(tx.signature.der()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (AccountTable, Ledger, KeyPair, KeyPair) {
        let alice = KeyPair::generate([0x11; 32]).unwrap();
        let bob = KeyPair::generate([0x22; 32]).unwrap();
        let mut table = AccountTable::new();
        table.create(&alice.address(), *alice.public()).unwrap();
        table.create(&bob.address(), *bob.public()).unwrap();
        table.get_mut(&alice.address()).unwrap().xrp = 10_000_000;
        (table, Ledger::new(ChainId::Xrpl), alice, bob)
    }

    fn transfer(
        table: &mut AccountTable,
        ledger: &mut Ledger,
        from: &KeyPair,
        to: &Address,
        amount: Drops,
    ) -> Result<TxId, ChainError> {
        let seq = table.get(&from.address()).unwrap().sequence + 1;
        let tx = build_signed_tx(
            ledger.chain,
            TxKind::Transfer,
            &from.address(),
            to,
            Asset::Xrp,
            amount,
            seq,
            None,
            from,
        );
        apply_transaction(table, ledger, tx)
    }

    #[test]
    fn encoding_is_deterministic_and_sequence_sensitive() {
        let (_, _, alice, bob) = setup();
        let a = tx_signing_bytes(
            ChainId::Xrpl, TxKind::Transfer, &alice.address(), &bob.address(),
            Asset::Xrp, 300_000, 1, None,
        );
        let b = tx_signing_bytes(
            ChainId::Xrpl, TxKind::Transfer, &alice.address(), &bob.address(),
            Asset::Xrp, 300_000, 1, None,
        );
        assert_eq!(a, b);
        let c = tx_signing_bytes(
            ChainId::Xrpl, TxKind::Transfer, &alice.address(), &bob.address(),
            Asset::Xrp, 300_000, 2, None,
        );
        assert_ne!(tx_hash(&a), tx_hash(&c));
    }

    #[test]
    fn transfer_moves_exactly_the_amount() {
        let (mut table, mut ledger, alice, bob) = setup();
        transfer(&mut table, &mut ledger, &alice, &bob.address(), 300_000).unwrap();
        assert_eq!(table.get(&alice.address()).unwrap().xrp, 9_700_000);
        assert_eq!(table.get(&bob.address()).unwrap().xrp, 300_000);
        // no fee beyond the transfer itself
        assert_eq!(table.total(Asset::Xrp), 10_000_000);
    }

    #[test]
    fn zero_transfer_applies_without_balance_change() {
        let (mut table, mut ledger, alice, bob) = setup();
        transfer(&mut table, &mut ledger, &alice, &bob.address(), 0).unwrap();
        assert_eq!(table.get(&alice.address()).unwrap().xrp, 10_000_000);
        assert_eq!(ledger.entries().len(), 1);
    }

    #[test]
    fn self_transfer_keeps_balances() {
        let (mut table, mut ledger, alice, _) = setup();
        transfer(&mut table, &mut ledger, &alice, &alice.address(), 500).unwrap();
        assert_eq!(table.get(&alice.address()).unwrap().xrp, 10_000_000);
        assert_eq!(ledger.entries().len(), 1);
    }

    #[test]
    fn overdraft_rejected_and_ledger_unchanged() {
        let (mut table, mut ledger, alice, bob) = setup();
        let err = transfer(&mut table, &mut ledger, &alice, &bob.address(), 10_000_001);
        assert!(matches!(err, Err(ChainError::InsufficientFunds { .. })));
        assert_eq!(ledger.entries().len(), 0);
        assert_eq!(table.get(&alice.address()).unwrap().sequence, 0);
    }

    #[test]
    fn duplicate_tx_rejected() {
        let (mut table, mut ledger, alice, bob) = setup();
        let tx = build_signed_tx(
            ledger.chain, TxKind::Transfer, &alice.address(), &bob.address(),
            Asset::Xrp, 100, 1, None, &alice,
        );
        apply_transaction(&mut table, &mut ledger, tx.clone()).unwrap();
        let err = apply_transaction(&mut table, &mut ledger, tx);
        assert!(matches!(err, Err(ChainError::DuplicateTx(_))));
    }

    #[test]
    fn stale_sequence_rejected() {
        let (mut table, mut ledger, alice, bob) = setup();
        transfer(&mut table, &mut ledger, &alice, &bob.address(), 100).unwrap();
        let tx = build_signed_tx(
            ledger.chain, TxKind::Transfer, &alice.address(), &bob.address(),
            Asset::Xrp, 101, 1, None, &alice,
        );
        let err = apply_transaction(&mut table, &mut ledger, tx);
        assert!(matches!(err, Err(ChainError::BadSequence { expected: 2, got: 1 })));
    }

    #[test]
    fn foreign_signature_rejected() {
        let (mut table, mut ledger, alice, bob) = setup();
        // bob signs a transfer out of alice's account
        let tx = build_signed_tx(
            ledger.chain, TxKind::Transfer, &alice.address(), &bob.address(),
            Asset::Xrp, 100, 1, None, &bob,
        );
        let err = apply_transaction(&mut table, &mut ledger, tx);
        assert_eq!(err, Err(ChainError::BadSignature));
    }

    #[test]
    fn close_increments_from_one() {
        let mut ledger = Ledger::new(ChainId::Xrpl);
        assert_eq!(ledger.close(), 1);
        assert_eq!(ledger.close(), 2);
    }

    #[test]
    fn memo_travels_with_the_tx() {
        let (mut table, mut ledger, alice, bob) = setup();
        let tx = build_signed_tx(
            ledger.chain, TxKind::Transfer, &alice.address(), &bob.address(),
            Asset::Xrp, 100, 1, Some(b"payload".to_vec()), &alice,
        );
        let id = apply_transaction(&mut table, &mut ledger, tx).unwrap();
        let entry = ledger.find(&id).unwrap();
        assert_eq!(entry.tx.memo.as_deref(), Some(&b"payload"[..]));
    }
}
