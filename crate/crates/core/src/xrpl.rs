//! The main-chain instance: XRP accounts, transfers, and the bridge lock
//! account that escrows XRP backing all sidechain value.

use crate::chain::{
    apply_transaction, build_signed_tx, AccountTable, Asset, ChainId, Drops, Ledger, TxId, TxKind,
};
use crate::crypto::{Address, KeyPair};
use crate::error::ChainError;

/// The XRP Ledger. Only XRP transfers exist here; the total held across all
/// accounts, the genesis account, and the lock account never changes.
#[derive(Clone, Debug)]
pub struct XrplChain {
    pub ledger: Ledger,
    pub accounts: AccountTable,
    pub genesis: Address,
    pub lock: Address,
    genesis_supply: Drops,
}

impl XrplChain {
    pub fn new(genesis: &KeyPair, lock: &KeyPair, supply: Drops) -> Self {
        let mut accounts = AccountTable::new();
        accounts.create(&genesis.address(), *genesis.public()).expect("fresh table");
        accounts.create(&lock.address(), *lock.public()).expect("fresh table");
        accounts.get_mut(&genesis.address()).expect("created").xrp = supply;
        Self {
            ledger: Ledger::new(ChainId::Xrpl),
            accounts,
            genesis: genesis.address(),
            lock: lock.address(),
            genesis_supply: supply,
        }
    }

    pub fn genesis_supply(&self) -> Drops {
        self.genesis_supply
    }

    pub(crate) fn restore(
        ledger: Ledger,
        accounts: AccountTable,
        genesis: Address,
        lock: Address,
        genesis_supply: Drops,
    ) -> Self {
        Self { ledger, accounts, genesis, lock, genesis_supply }
    }

    /// Register a new account with zero balance and sequence 0.
    pub fn create_account(&mut self, public: [u8; 33]) -> Result<Address, ChainError> {
        let address = crate::crypto::derive_address(&public)
            .map_err(|_| ChainError::UnknownAccount("invalid public key".into()))?;
        self.accounts.create(&address, public)?;
        Ok(address)
    }

    /// Transfer XRP between accounts, signed by the sender's key.
    pub fn transfer_xrp(
        &mut self,
        from: &Address,
        to: &Address,
        drops: Drops,
        signer: &KeyPair,
        memo: Option<Vec<u8>>,
    ) -> Result<TxId, ChainError> {
        let sequence = self.accounts.get(from)?.sequence + 1;
        let tx = build_signed_tx(
            ChainId::Xrpl,
            TxKind::Transfer,
            from,
            to,
            Asset::Xrp,
            drops,
            sequence,
            memo,
            signer,
        );
        apply_transaction(&mut self.accounts, &mut self.ledger, tx)
    }

    /// Pre-flight a transfer without mutating anything.
    pub fn can_transfer(&self, from: &Address, to: &Address, drops: Drops) -> Result<(), ChainError> {
        let sender = self.accounts.get(from)?;
        self.accounts.get(to)?;
        if sender.xrp < drops {
            return Err(ChainError::InsufficientFunds { needed: drops, available: sender.xrp });
        }
        Ok(())
    }

    pub fn balance(&self, address: &Address) -> Result<Drops, ChainError> {
        Ok(self.accounts.get(address)?.xrp)
    }

    pub fn lock_balance(&self) -> Drops {
        self.accounts.get(&self.lock).map(|a| a.xrp).unwrap_or(0)
    }

    /// Sum over every account including genesis and lock.
    pub fn total_drops(&self) -> Drops {
        self.accounts.total(Asset::Xrp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> (XrplChain, KeyPair, KeyPair) {
        let genesis = KeyPair::generate([0xA0; 32]).unwrap();
        let lock = KeyPair::generate([0xA1; 32]).unwrap();
        let xrpl = XrplChain::new(&genesis, &lock, 1_000_000_000);
        (xrpl, genesis, lock)
    }

    #[test]
    fn new_account_starts_empty() {
        let (mut xrpl, _, _) = chain();
        let user = KeyPair::generate([0x33; 32]).unwrap();
        let addr = xrpl.create_account(*user.public()).unwrap();
        assert_eq!(xrpl.balance(&addr).unwrap(), 0);
        assert_eq!(xrpl.accounts.get(&addr).unwrap().sequence, 0);
    }

    #[test]
    fn duplicate_account_rejected() {
        let (mut xrpl, _, _) = chain();
        let user = KeyPair::generate([0x33; 32]).unwrap();
        xrpl.create_account(*user.public()).unwrap();
        assert!(matches!(
            xrpl.create_account(*user.public()),
            Err(ChainError::DuplicateAccount(_))
        ));
    }

    #[test]
    fn genesis_funding_arithmetic() {
        let (mut xrpl, genesis, _) = chain();
        let user = KeyPair::generate([0x33; 32]).unwrap();
        let addr = xrpl.create_account(*user.public()).unwrap();
        let g = xrpl.genesis.clone();
        xrpl.transfer_xrp(&g, &addr, 10_000_000, &genesis, None).unwrap();
        assert_eq!(xrpl.balance(&addr).unwrap(), 10_000_000);
        assert_eq!(xrpl.total_drops(), 1_000_000_000);
    }

    #[test]
    fn unfunded_sender_rejected() {
        let (mut xrpl, _, _) = chain();
        let user = KeyPair::generate([0x33; 32]).unwrap();
        let addr = xrpl.create_account(*user.public()).unwrap();
        let g = xrpl.genesis.clone();
        let err = xrpl.transfer_xrp(&addr, &g, 1, &user, None);
        assert!(matches!(err, Err(ChainError::InsufficientFunds { .. })));
    }

    #[test]
    fn total_is_conserved_across_transfers() {
        let (mut xrpl, genesis, _) = chain();
        let a = KeyPair::generate([0x33; 32]).unwrap();
        let b = KeyPair::generate([0x34; 32]).unwrap();
        let addr_a = xrpl.create_account(*a.public()).unwrap();
        let addr_b = xrpl.create_account(*b.public()).unwrap();
        let g = xrpl.genesis.clone();
        xrpl.transfer_xrp(&g, &addr_a, 5_000_000, &genesis, None).unwrap();
        xrpl.transfer_xrp(&addr_a, &addr_b, 300_000, &a, None).unwrap();
        xrpl.transfer_xrp(&addr_b, &addr_a, 150_000, &b, None).unwrap();
        assert_eq!(xrpl.total_drops(), 1_000_000_000);
    }
}
