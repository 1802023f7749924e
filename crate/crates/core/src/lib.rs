//! Deterministic dual-ledger simulator for attestation-based, attribute-based
//! identity management.
//!
//! The library models two coupled chains — a Ripple-style main ledger holding
//! XRP and an EVM-style identity sidechain holding mirrored accounts, wrapped
//! IdXRP, and the two identity contracts (issuer and verifier) — plus the
//! bridge that moves and wraps value between them. Everything is in-process,
//! single-writer, and byte-reproducible: the same seed and command sequence
//! always produce the same ledgers.

pub mod bridge;
pub mod canon;
pub mod chain;
pub mod crypto;
pub mod error;
pub mod issuance;
pub mod messaging;
pub mod scenario;
pub mod sidechain;
pub mod sim;
pub mod state_io;
pub mod verification;
pub mod xrpl;
