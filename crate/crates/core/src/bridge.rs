//! Cross-chain asset movement and wrap/unwrap with a journal that makes
//! every conversion exactly reversible.
//!
//! Custody model: bridging in moves XRP from the owner's main-chain account
//! into the lock account and credits the same amount of sidechain XRP, so
//! the lock always holds exactly the sidechain's total value. Wrapping
//! earmarks part of that locked custody as IdXRP backing; `wrapped_drops`
//! tracks the earmark and must equal the IdXRP supply at every step.
//! Conversions are exact-amount (precisely the shortfall), which keeps
//! reversal arithmetic unambiguous.

use crate::chain::{Asset, Drops, TxKind};
use crate::crypto::{Address, KeyPair};
use crate::error::BridgeError;
use crate::sidechain::SidechainChain;
use crate::xrpl::XrplChain;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConversionKind {
    BridgeIn,
    BridgeOut,
    Wrap,
    Unwrap,
}

impl ConversionKind {
    pub fn name(self) -> &'static str {
        match self {
            ConversionKind::BridgeIn => "bridge_in",
            ConversionKind::BridgeOut => "bridge_out",
            ConversionKind::Wrap => "wrap",
            ConversionKind::Unwrap => "unwrap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bridge_in" => Some(ConversionKind::BridgeIn),
            "bridge_out" => Some(ConversionKind::BridgeOut),
            "wrap" => Some(ConversionKind::Wrap),
            "unwrap" => Some(ConversionKind::Unwrap),
            _ => None,
        }
    }

    fn inverse(self) -> Self {
        match self {
            ConversionKind::BridgeIn => ConversionKind::BridgeOut,
            ConversionKind::BridgeOut => ConversionKind::BridgeIn,
            ConversionKind::Wrap => ConversionKind::Unwrap,
            ConversionKind::Unwrap => ConversionKind::Wrap,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JournalEntry {
    pub kind: ConversionKind,
    pub account: Address,
    pub drops: Drops,
}

/// Ordered record of the conversions run for one party in one session.
/// Reversal applies the inverse kinds in reverse order.
#[derive(Clone, Debug, Default)]
pub struct ConversionJournal {
    pub entries: Vec<JournalEntry>,
}

impl ConversionJournal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn kinds(&self) -> Vec<ConversionKind> {
        self.entries.iter().map(|e| e.kind).collect()
    }
}

/// Bridge custody state: which addresses play the lock and credit-authority
/// roles, and how much locked XRP is earmarked as IdXRP backing.
#[derive(Clone, Debug)]
pub struct Bridge {
    pub wrapped_drops: Drops,
}

impl Bridge {
    pub fn new() -> Self {
        Self { wrapped_drops: 0 }
    }
}

impl Default for Bridge {
    fn default() -> Self {
        Self::new()
    }
}

/// Keys the bridge needs to sign with: the moving account, the lock, and the
/// sidechain credit authority.
pub struct BridgeSigners<'a> {
    pub account: &'a KeyPair,
    pub lock: &'a KeyPair,
    pub authority: &'a KeyPair,
}

/// Move `drops` of main-chain XRP into lock custody and credit the same
/// amount of sidechain XRP. Zero drops is a recorded no-op.
pub fn bridge_to_sidechain(
    xrpl: &mut XrplChain,
    side: &mut SidechainChain,
    account: &Address,
    drops: Drops,
    signers: &BridgeSigners<'_>,
) -> Result<JournalEntry, BridgeError> {
    if drops > 0 {
        xrpl.can_transfer(account, &xrpl.lock.clone(), drops)?;
        side.accounts.get(account)?;
        let lock = xrpl.lock.clone();
        xrpl.transfer_xrp(account, &lock, drops, signers.account, None)?;
        let authority = side.authority.clone();
        side.apply_kind(TxKind::BridgeIn, &authority, account, Asset::Xrp, drops, signers.authority, None)?;
    }
    Ok(JournalEntry { kind: ConversionKind::BridgeIn, account: account.clone(), drops })
}

/// Release `drops` of lock custody back to the owner's main-chain account,
/// burning the matching sidechain XRP.
pub fn bridge_from_sidechain(
    xrpl: &mut XrplChain,
    side: &mut SidechainChain,
    account: &Address,
    drops: Drops,
    signers: &BridgeSigners<'_>,
) -> Result<JournalEntry, BridgeError> {
    if drops > 0 {
        let available = side.accounts.get(account)?.xrp;
        if available < drops {
            return Err(BridgeError::Chain(crate::error::ChainError::InsufficientFunds {
                needed: drops,
                available,
            }));
        }
        xrpl.can_transfer(&xrpl.lock.clone(), account, drops)?;
        let authority = side.authority.clone();
        side.apply_kind(TxKind::BridgeOut, account, &authority, Asset::Xrp, drops, signers.account, None)?;
        let lock = xrpl.lock.clone();
        xrpl.transfer_xrp(&lock, account, drops, signers.lock, None)?;
    }
    Ok(JournalEntry { kind: ConversionKind::BridgeOut, account: account.clone(), drops })
}

/// Convert sidechain XRP to IdXRP 1:1, earmarking locked custody as backing.
pub fn wrap(
    bridge: &mut Bridge,
    side: &mut SidechainChain,
    account: &Address,
    drops: Drops,
    signer: &KeyPair,
) -> Result<JournalEntry, BridgeError> {
    if drops > 0 {
        side.apply_kind(TxKind::Wrap, account, account, Asset::Xrp, drops, signer, None)?;
        bridge.wrapped_drops += drops;
    }
    Ok(JournalEntry { kind: ConversionKind::Wrap, account: account.clone(), drops })
}

/// Convert IdXRP back to sidechain XRP, releasing the earmark.
pub fn unwrap(
    bridge: &mut Bridge,
    side: &mut SidechainChain,
    account: &Address,
    drops: Drops,
    signer: &KeyPair,
) -> Result<JournalEntry, BridgeError> {
    if drops > 0 {
        side.apply_kind(TxKind::Unwrap, account, account, Asset::IdXrp, drops, signer, None)?;
        bridge.wrapped_drops = bridge
            .wrapped_drops
            .checked_sub(drops)
            .ok_or(BridgeError::ReversalUnderflow)?;
    }
    Ok(JournalEntry { kind: ConversionKind::Unwrap, account: account.clone(), drops })
}

/// Raise the account's IdXRP to at least `required`, falling back in order:
/// existing IdXRP, then wrapping sidechain XRP, then bridging from the main
/// chain and wrapping. Converts exactly the shortfall and journals exactly
/// the steps taken; an account that already has enough gets an empty journal.
pub fn ensure_funds(
    bridge: &mut Bridge,
    xrpl: &mut XrplChain,
    side: &mut SidechainChain,
    account: &Address,
    required: Drops,
    signers: &BridgeSigners<'_>,
) -> Result<ConversionJournal, BridgeError> {
    let mut journal = ConversionJournal::new();
    let state = side.accounts.get(account)?;
    if state.idxrp >= required {
        return Ok(journal);
    }
    let mut need = required - state.idxrp;

    let from_side_xrp = need.min(state.xrp);
    if from_side_xrp > 0 {
        journal.entries.push(wrap(bridge, side, account, from_side_xrp, signers.account)?);
        need -= from_side_xrp;
    }

    if need > 0 {
        let on_main = xrpl.balance(account)?;
        if on_main < need {
            // roll back the partial wrap so a failed fallback mutates nothing
            for entry in journal.entries.iter().rev() {
                unwrap(bridge, side, &entry.account, entry.drops, signers.account)?;
            }
            return Err(BridgeError::InsufficientFundsEverywhere { shortfall: need - on_main });
        }
        journal.entries.push(bridge_to_sidechain(xrpl, side, account, need, signers)?);
        journal.entries.push(wrap(bridge, side, account, need, signers.account)?);
    }
    Ok(journal)
}

/// Check whether `ensure_funds` would succeed without touching anything.
/// `reserved_main` is main-chain XRP the account must keep for direct
/// transfers and therefore cannot bridge.
pub fn simulate_ensure_funds(
    xrpl: &XrplChain,
    side: &SidechainChain,
    account: &Address,
    required: Drops,
    reserved_main: Drops,
) -> Result<(), BridgeError> {
    let state = side.accounts.get(account)?;
    let on_main = xrpl.balance(account)?;
    if on_main < reserved_main {
        return Err(BridgeError::InsufficientFundsEverywhere {
            shortfall: reserved_main - on_main,
        });
    }
    let bridgeable = on_main - reserved_main;
    let available = state.idxrp as u128 + state.xrp as u128 + bridgeable as u128;
    if available < required as u128 {
        return Err(BridgeError::InsufficientFundsEverywhere {
            shortfall: (required as u128 - available) as u64,
        });
    }
    Ok(())
}

/// Undo a journal: inverse operations applied in reverse order. Only valid
/// when the converted value is still in place; anything else is an
/// accounting bug surfaced as `ReversalUnderflow`.
pub fn reverse(
    bridge: &mut Bridge,
    xrpl: &mut XrplChain,
    side: &mut SidechainChain,
    journal: &ConversionJournal,
    signers: &BridgeSigners<'_>,
) -> Result<(), BridgeError> {
    for entry in journal.entries.iter().rev() {
        let result = match entry.kind.inverse() {
            ConversionKind::BridgeOut => {
                bridge_from_sidechain(xrpl, side, &entry.account, entry.drops, signers)
            }
            ConversionKind::BridgeIn => {
                bridge_to_sidechain(xrpl, side, &entry.account, entry.drops, signers)
            }
            ConversionKind::Unwrap => unwrap(bridge, side, &entry.account, entry.drops, signers.account),
            ConversionKind::Wrap => wrap(bridge, side, &entry.account, entry.drops, signers.account),
        };
        result.map_err(|_| BridgeError::ReversalUnderflow)?;
    }
    Ok(())
}
