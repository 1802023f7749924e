//! Error types, grouped by subsystem.

use thiserror::Error;

/// Key, point, and address failures.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    /// Seed is zero or not below the secp256k1 group order.
    #[error("seed does not reduce to a usable nonzero scalar")]
    InvalidSeed,
    #[error("not a valid compressed secp256k1 point")]
    InvalidPoint,
    #[error("invalid secret key")]
    InvalidKey,
    #[error("malformed address: {0}")]
    BadAddress(String),
    #[error("malformed statement or attestation encoding: {0}")]
    BadEncoding(String),
}

/// Ledger-level transaction rejections.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("signature does not verify for the sender")]
    BadSignature,
    #[error("bad sequence: expected {expected}, got {got}")]
    BadSequence { expected: u64, got: u64 },
    #[error("insufficient funds: need {needed} drops, have {available}")]
    InsufficientFunds { needed: u64, available: u64 },
    #[error("transaction {0} already applied")]
    DuplicateTx(String),
    #[error("account {0} already exists")]
    DuplicateAccount(String),
    #[error("unknown account {0}")]
    UnknownAccount(String),
    #[error("asset not supported on this chain")]
    UnsupportedAsset,
    #[error("operation not supported on this chain")]
    UnsupportedOp,
    #[error("balance overflow")]
    Overflow,
}

/// Cross-chain conversion failures.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BridgeError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("insufficient funds across all sources: short {shortfall} drops")]
    InsufficientFundsEverywhere { shortfall: u64 },
    /// Reversing a journal found less balance than the journal recorded.
    /// Must never occur in a valid run.
    #[error("reversal underflow: accounting bug")]
    ReversalUnderflow,
}

/// Contract (issuer/verifier) protocol rejections.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("issuer {0} is not in the issuer registry")]
    UnregisteredIssuer(String),
    #[error("subject {0} has no sidechain account")]
    UnknownSubject(String),
    #[error("unknown session {0}")]
    UnknownSession(u64),
    #[error("{party} cannot cover the required funds: short {shortfall} drops")]
    InsufficientFunds { party: String, shortfall: u64 },
    #[error("insufficient IdXRP: need {needed}, have {available}")]
    InsufficientIdXrp { needed: u64, available: u64 },
    #[error("operation not allowed in state {0}")]
    WrongState(String),
    #[error("responder is not the statement subject")]
    NotSubject,
    #[error("consent deadline passed; treated as denial")]
    ConsentTimeout,
    #[error("no anchored attestation at transaction {0}")]
    UnknownAttestation(String),
    #[error("attestation memo does not decode: {0}")]
    MalformedAttestation(String),
    #[error("transaction {0} not found on the sidechain")]
    UnknownTx(String),
    #[error("attestation subject does not match the account")]
    SubjectMismatch,
    #[error("attestation reference already recorded")]
    DuplicateRef,
    #[error("caller is not the registry admin")]
    Unauthorized,
}

/// Consent mailbox rejections.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MessagingError {
    #[error("unknown account {0}")]
    UnknownAccount(String),
    #[error("unknown prompt {0}")]
    UnknownPrompt(u64),
    #[error("responder is not the prompt recipient")]
    NotRecipient,
    #[error("prompt already answered")]
    AlreadyAnswered,
    #[error("prompt expired")]
    Expired,
}

/// Top-level simulator error.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Messaging(#[from] MessagingError),
    #[error("unknown account or label {0}")]
    UnknownName(String),
    #[error("label {0} already in use")]
    DuplicateLabel(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("bad state file: {0}")]
    BadStateFile(String),
    #[error("{0}")]
    Config(String),
}
