//! The identity sidechain: mirrored accounts with dual balances (sidechain
//! XRP and IdXRP), attestation references, flat per-operation gas metering
//! paid in IdXRP to a fee pool, and the trust-anchor issuer registry.

use std::collections::BTreeSet;

use crate::chain::{
    apply_transaction, build_signed_tx, AccountTable, Asset, ChainId, Drops, Ledger, TxId, TxKind,
};
use crate::crypto::{Address, Attestation, KeyPair};
use crate::error::{ChainError, ProtocolError};
use crate::xrpl::XrplChain;

/// Flat gas units per contract operation plus the IdXRP price per unit.
/// Defaults are configuration, not protocol constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GasSchedule {
    pub ic_issue_units: u64,
    pub ic_reimburse_units: u64,
    pub vc_request_units: u64,
    pub vc_execute_units: u64,
    /// IdXRP drops per gas unit.
    pub gas_price: u64,
}

impl Default for GasSchedule {
    fn default() -> Self {
        Self {
            ic_issue_units: 50_000,
            ic_reimburse_units: 20_000,
            vc_request_units: 30_000,
            vc_execute_units: 40_000,
            gas_price: 10,
        }
    }
}

impl GasSchedule {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("ic_issue_units", self.ic_issue_units),
            ("ic_reimburse_units", self.ic_reimburse_units),
            ("vc_request_units", self.vc_request_units),
            ("vc_execute_units", self.vc_execute_units),
            ("gas_price", self.gas_price),
        ];
        for (name, value) in fields {
            if value == 0 {
                return Err(format!("gas schedule field {name} must be > 0"));
            }
        }
        Ok(())
    }

    pub fn ic_issue_cost(&self) -> Drops {
        self.ic_issue_units * self.gas_price
    }

    pub fn ic_reimburse_cost(&self) -> Drops {
        self.ic_reimburse_units * self.gas_price
    }

    pub fn vc_request_cost(&self) -> Drops {
        self.vc_request_units * self.gas_price
    }

    pub fn vc_execute_cost(&self) -> Drops {
        self.vc_execute_units * self.gas_price
    }
}

/// Which protocol phase a gas charge belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GasPhase {
    IssuerPhase,
    PreApproval,
    PostApproval,
    Reimbursement,
}

impl GasPhase {
    pub fn name(self) -> &'static str {
        match self {
            GasPhase::IssuerPhase => "issuer_phase",
            GasPhase::PreApproval => "pre_approval",
            GasPhase::PostApproval => "post_approval",
            GasPhase::Reimbursement => "reimbursement",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "issuer_phase" => Some(GasPhase::IssuerPhase),
            "pre_approval" => Some(GasPhase::PreApproval),
            "post_approval" => Some(GasPhase::PostApproval),
            "reimbursement" => Some(GasPhase::Reimbursement),
            _ => None,
        }
    }
}

/// Record of one gas charge; cost is always exactly units x price.
#[derive(Clone, Debug)]
pub struct GasReceipt {
    pub payer: Address,
    pub units: u64,
    pub cost_drops: Drops,
    pub phase: GasPhase,
}

/// The IDM sidechain state. The bridge authority account signs bridge credit
/// entries; the fee pool collects every gas payment (a pool rather than a
/// burn, so conservation stays checkable).
#[derive(Clone, Debug)]
pub struct SidechainChain {
    pub ledger: Ledger,
    pub accounts: AccountTable,
    pub authority: Address,
    pub fee_pool: Address,
    /// Registry admin; only this identity may register issuers.
    pub admin: Address,
    registry: BTreeSet<String>,
    total_gas_charged: Drops,
}

impl SidechainChain {
    pub fn new(authority: &KeyPair, fee_pool: &KeyPair, admin: Address) -> Self {
        let mut accounts = AccountTable::new();
        accounts.create(&authority.address(), *authority.public()).expect("fresh table");
        accounts.create(&fee_pool.address(), *fee_pool.public()).expect("fresh table");
        Self {
            ledger: Ledger::new(ChainId::IdmSidechain),
            accounts,
            authority: authority.address(),
            fee_pool: fee_pool.address(),
            admin,
            registry: BTreeSet::new(),
            total_gas_charged: 0,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn restore(
        ledger: Ledger,
        accounts: AccountTable,
        authority: Address,
        fee_pool: Address,
        admin: Address,
        registry: BTreeSet<String>,
        total_gas_charged: Drops,
    ) -> Self {
        Self { ledger, accounts, authority, fee_pool, admin, registry, total_gas_charged }
    }

    /// Mirror an existing main-chain account: same address and key, zero
    /// balances, no attestation refs.
    pub fn mirror_account(&mut self, xrpl: &XrplChain, address: &Address) -> Result<(), ChainError> {
        let main = xrpl
            .accounts
            .get(address)
            .map_err(|_| ChainError::UnknownAccount(address.text().to_string()))?;
        self.accounts.create(address, main.public)
    }

    /// Append an attestation reference to the subject's account. The
    /// transaction must exist here, decode as an attestation memo, and name
    /// this account as its subject.
    pub fn record_attestation_ref(
        &mut self,
        address: &Address,
        tx_id: TxId,
    ) -> Result<(), ProtocolError> {
        let entry = self
            .ledger
            .find(&tx_id)
            .ok_or_else(|| ProtocolError::UnknownTx(tx_id.to_hex()))?;
        let memo = entry
            .tx
            .memo
            .as_deref()
            .ok_or_else(|| ProtocolError::UnknownTx(tx_id.to_hex()))?;
        let attestation =
            Attestation::decode_memo(memo).map_err(|_| ProtocolError::UnknownTx(tx_id.to_hex()))?;
        if attestation.statement.subject != *address {
            return Err(ProtocolError::SubjectMismatch);
        }
        let account = self
            .accounts
            .get_mut(address)
            .map_err(|_| ProtocolError::UnknownSubject(address.text().to_string()))?;
        if account.attestation_refs.contains(&tx_id) {
            return Err(ProtocolError::DuplicateRef);
        }
        account.attestation_refs.push(tx_id);
        Ok(())
    }

    /// Charge `units` of gas to `payer`: an IdXRP transfer to the fee pool.
    /// Callers are expected to have run the bridge fallback first.
    pub fn charge_gas(
        &mut self,
        payer: &Address,
        units: u64,
        phase: GasPhase,
        gas_price: u64,
        signer: &KeyPair,
    ) -> Result<GasReceipt, ProtocolError> {
        let cost = units * gas_price;
        if cost > 0 {
            let available = self
                .accounts
                .get(payer)
                .map_err(|_| ProtocolError::UnknownSubject(payer.text().to_string()))?
                .idxrp;
            if available < cost {
                return Err(ProtocolError::InsufficientIdXrp { needed: cost, available });
            }
            let fee_pool = self.fee_pool.clone();
            self.transfer_idxrp(payer, &fee_pool, cost, signer, None)
                .map_err(|_| ProtocolError::InsufficientIdXrp { needed: cost, available })?;
        }
        self.total_gas_charged += cost;
        Ok(GasReceipt { payer: payer.clone(), units, cost_drops: cost, phase })
    }

    pub fn register_issuer(&mut self, caller: &Address, issuer: &Address) -> Result<(), ProtocolError> {
        if *caller != self.admin {
            return Err(ProtocolError::Unauthorized);
        }
        self.registry.insert(issuer.text().to_string());
        Ok(())
    }

    pub fn is_registered_issuer(&self, address: &Address) -> bool {
        self.registry.contains(address.text())
    }

    pub fn registry(&self) -> impl Iterator<Item = &String> {
        self.registry.iter()
    }

    pub fn transfer_idxrp(
        &mut self,
        from: &Address,
        to: &Address,
        drops: Drops,
        signer: &KeyPair,
        memo: Option<Vec<u8>>,
    ) -> Result<TxId, ChainError> {
        self.apply_kind(TxKind::Transfer, from, to, Asset::IdXrp, drops, signer, memo)
    }

    pub fn transfer_side_xrp(
        &mut self,
        from: &Address,
        to: &Address,
        drops: Drops,
        signer: &KeyPair,
    ) -> Result<TxId, ChainError> {
        self.apply_kind(TxKind::Transfer, from, to, Asset::Xrp, drops, signer, None)
    }

    /// Build, sign, and apply one sidechain entry of any kind.
    #[allow(clippy::too_many_arguments)]
    pub fn apply_kind(
        &mut self,
        kind: TxKind,
        from: &Address,
        to: &Address,
        asset: Asset,
        drops: Drops,
        signer: &KeyPair,
        memo: Option<Vec<u8>>,
    ) -> Result<TxId, ChainError> {
        let sequence = self.accounts.get(from)?.sequence + 1;
        let tx = build_signed_tx(
            ChainId::IdmSidechain,
            kind,
            from,
            to,
            asset,
            drops,
            sequence,
            memo,
            signer,
        );
        apply_transaction(&mut self.accounts, &mut self.ledger, tx)
    }

    pub fn idxrp_supply(&self) -> Drops {
        self.accounts.total(Asset::IdXrp)
    }

    pub fn side_xrp_supply(&self) -> Drops {
        self.accounts.total(Asset::Xrp)
    }

    pub fn fee_pool_balance(&self) -> Drops {
        self.accounts.get(&self.fee_pool).map(|a| a.idxrp).unwrap_or(0)
    }

    pub fn total_gas_charged(&self) -> Drops {
        self.total_gas_charged
    }
}
