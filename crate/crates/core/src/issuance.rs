//! The issuer contract (IC) state machine: statement intake, issuer signing,
//! user consent, double-signed attestation anchoring with the coupled 0.3 XRP
//! transfer on the main chain, reimbursement, and the denial penalty.
//!
//! Funding is escrow-style: both parties are pre-checked at initiation so the
//! reimbursement phase cannot strand a half-issued attestation. The coupled
//! main-chain and sidechain anchor transfers are atomic at the session level:
//! both validate before either applies, or the session fails with the
//! issuer's conversions rolled back.

use crate::bridge::ConversionJournal;
use crate::chain::{Drops, TxId};
use crate::crypto::{Address, Attestation, Signature, Statement};
use crate::error::{ProtocolError, SimError};
use crate::messaging::{ConsentAnswer, PromptKind, PromptPayload};
use crate::sidechain::{GasPhase, GasReceipt};
use crate::sim::Simulation;

/// Every attestation issuance is coupled with a 0.3 XRP transfer; the same
/// amount rides the sidechain issuance transaction as IdXRP.
pub const ANCHOR_TRANSFER_DROPS: Drops = 300_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum IssuanceState {
    Initiated,
    IssuerSigned,
    AwaitingConsent,
    Confirmed,
    Denied,
    Anchored,
    Reimbursed,
    Penalized,
    Failed,
}

impl IssuanceState {
    pub fn name(self) -> &'static str {
        match self {
            IssuanceState::Initiated => "initiated",
            IssuanceState::IssuerSigned => "issuer_signed",
            IssuanceState::AwaitingConsent => "awaiting_consent",
            IssuanceState::Confirmed => "confirmed",
            IssuanceState::Denied => "denied",
            IssuanceState::Anchored => "anchored",
            IssuanceState::Reimbursed => "reimbursed",
            IssuanceState::Penalized => "penalized",
            IssuanceState::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "initiated" => Some(IssuanceState::Initiated),
            "issuer_signed" => Some(IssuanceState::IssuerSigned),
            "awaiting_consent" => Some(IssuanceState::AwaitingConsent),
            "confirmed" => Some(IssuanceState::Confirmed),
            "denied" => Some(IssuanceState::Denied),
            "anchored" => Some(IssuanceState::Anchored),
            "reimbursed" => Some(IssuanceState::Reimbursed),
            "penalized" => Some(IssuanceState::Penalized),
            "failed" => Some(IssuanceState::Failed),
            _ => None,
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, IssuanceState::Reimbursed | IssuanceState::Penalized | IssuanceState::Failed)
    }
}

/// One issuance flow. Balance mutations happen only inside session steps.
#[derive(Clone, Debug)]
pub struct IssuanceSession {
    pub id: u64,
    pub issuer: Address,
    pub subject: Address,
    pub statement: Statement,
    pub state: IssuanceState,
    pub issuer_sig: Option<Signature>,
    pub user_sig: Option<Signature>,
    pub issuer_journal: ConversionJournal,
    pub subject_journal: ConversionJournal,
    pub gas_receipts: Vec<GasReceipt>,
    pub prompt_id: Option<u64>,
    pub response: Option<ConsentAnswer>,
    pub timed_out: bool,
    pub anchor_side_tx: Option<TxId>,
    pub anchor_xrpl_tx: Option<TxId>,
    pub anchored_ledger_index: Option<u64>,
}

impl Simulation {
    pub fn issuance_session(&self, id: u64) -> Result<&IssuanceSession, SimError> {
        self.issuance_sessions
            .get(&id)
            .ok_or_else(|| ProtocolError::UnknownSession(id).into())
    }

    fn issuance_session_mut(&mut self, id: u64) -> Result<&mut IssuanceSession, SimError> {
        self.issuance_sessions
            .get_mut(&id)
            .ok_or_else(|| ProtocolError::UnknownSession(id).into())
    }

    fn wrong_state(state: IssuanceState) -> SimError {
        ProtocolError::WrongState(state.name().to_string()).into()
    }

    // -- initiation ---------------------------------------------------------

    /// Open an issuance session. Both parties are fund-checked up front
    /// (fail fast, nothing mutated on rejection); the issuer's IdXRP fallback
    /// conversions execute immediately and are journaled for later reversal.
    pub fn initiate_issuance(
        &mut self,
        issuer: &Address,
        subject: &Address,
        attribute: &str,
        predicate: &str,
    ) -> Result<u64, SimError> {
        let id = self.initiate_issuance_impl(issuer, subject, attribute, predicate)?;
        self.finish_step();
        Ok(id)
    }

    pub(crate) fn initiate_issuance_impl(
        &mut self,
        issuer: &Address,
        subject: &Address,
        attribute: &str,
        predicate: &str,
    ) -> Result<u64, SimError> {
        if !self.sidechain.is_registered_issuer(issuer) {
            return Err(ProtocolError::UnregisteredIssuer(issuer.text().to_string()).into());
        }
        if !self.sidechain.accounts.contains(subject) {
            return Err(ProtocolError::UnknownSubject(subject.text().to_string()).into());
        }

        let gas = self.config.gas.clone();
        // Issuer must cover the 0.3 XRP main-chain anchor plus, in IdXRP, the
        // sidechain anchor and the issuance-phase gas.
        let issuer_idxrp_need = ANCHOR_TRANSFER_DROPS + gas.ic_issue_cost();
        crate::bridge::simulate_ensure_funds(
            &self.xrpl,
            &self.sidechain,
            issuer,
            issuer_idxrp_need,
            ANCHOR_TRANSFER_DROPS,
        )
        .map_err(|e| match e {
            crate::error::BridgeError::InsufficientFundsEverywhere { shortfall } => {
                SimError::Protocol(ProtocolError::InsufficientFunds {
                    party: "issuer".into(),
                    shortfall,
                })
            }
            other => SimError::Bridge(other),
        })?;
        // Subject must be able to reimburse: 0.3 XRP back on the main chain
        // plus 0.3 XRP and the issuer's full gas bill in IdXRP.
        let subject_idxrp_need =
            ANCHOR_TRANSFER_DROPS + gas.ic_issue_cost() + gas.ic_reimburse_cost();
        crate::bridge::simulate_ensure_funds(
            &self.xrpl,
            &self.sidechain,
            subject,
            subject_idxrp_need,
            ANCHOR_TRANSFER_DROPS,
        )
        .map_err(|e| match e {
            crate::error::BridgeError::InsufficientFundsEverywhere { shortfall } => {
                SimError::Protocol(ProtocolError::InsufficientFunds {
                    party: "subject".into(),
                    shortfall,
                })
            }
            other => SimError::Bridge(other),
        })?;

        let issuer_journal = self.run_ensure(issuer, issuer_idxrp_need)?;

        let statement = Statement {
            subject: subject.clone(),
            issuer: issuer.clone(),
            attribute_name: attribute.to_string(),
            predicate: predicate.to_string(),
            nonce: self.next_nonce(issuer, subject),
            issued_at: self.current_index(),
        };
        let id = self.next_session_id();
        self.issuance_sessions.insert(
            id,
            IssuanceSession {
                id,
                issuer: issuer.clone(),
                subject: subject.clone(),
                statement,
                state: IssuanceState::Initiated,
                issuer_sig: None,
                user_sig: None,
                issuer_journal,
                subject_journal: ConversionJournal::new(),
                gas_receipts: Vec::new(),
                prompt_id: None,
                response: None,
                timed_out: false,
                anchor_side_tx: None,
                anchor_xrpl_tx: None,
                anchored_ledger_index: None,
            },
        );
        Ok(id)
    }

    // -- issuer signature and consent prompt ---------------------------------

    /// The IC signs the statement with the issuer's account key, then prompts
    /// the subject to confirm or deny it.
    pub fn ic_sign(&mut self, session_id: u64) -> Result<(), SimError> {
        self.ic_sign_impl(session_id)?;
        self.finish_step();
        Ok(())
    }

    pub(crate) fn ic_sign_impl(&mut self, session_id: u64) -> Result<(), SimError> {
        let session = self.issuance_session(session_id)?;
        if session.state != IssuanceState::Initiated {
            return Err(Self::wrong_state(session.state));
        }
        let issuer = session.issuer.clone();
        let subject = session.subject.clone();
        let statement_bytes = session.statement.canonical_bytes();

        let sig = self.keypair(&issuer)?.sign(&statement_bytes);
        let session = self.issuance_session_mut(session_id)?;
        session.issuer_sig = Some(sig);
        session.state = IssuanceState::IssuerSigned;

        let created = self.current_index();
        let deadline = created + self.config.consent_deadline;
        let prompt_id = self.mailbox.send(
            subject,
            PromptKind::IssuanceConsent,
            PromptPayload::Issuance { statement: statement_bytes },
            session_id,
            created,
            deadline,
        );
        let session = self.issuance_session_mut(session_id)?;
        session.prompt_id = Some(prompt_id);
        session.state = IssuanceState::AwaitingConsent;
        Ok(())
    }

    // -- user response --------------------------------------------------------

    /// Record the subject's confirm/deny. Confirming adds the user signature;
    /// denying immediately runs the penalty path.
    pub fn user_respond(
        &mut self,
        session_id: u64,
        responder: &Address,
        answer: ConsentAnswer,
    ) -> Result<(), SimError> {
        self.user_respond_impl(session_id, responder, answer)?;
        self.finish_step();
        Ok(())
    }

    pub(crate) fn user_respond_impl(
        &mut self,
        session_id: u64,
        responder: &Address,
        answer: ConsentAnswer,
    ) -> Result<(), SimError> {
        let session = self.issuance_session(session_id)?;
        if session.state != IssuanceState::AwaitingConsent {
            return Err(Self::wrong_state(session.state));
        }
        if session.subject != *responder {
            return Err(ProtocolError::NotSubject.into());
        }
        let prompt_id = session.prompt_id.expect("awaiting consent implies a prompt");
        let now = self.current_index();
        match self.mailbox.respond(prompt_id, responder, answer, now) {
            Ok(_) => {}
            Err(crate::error::MessagingError::Expired) => {
                // Deadline passed without a sweep yet; route the denial now.
                self.issuance_timeout(session_id)?;
                return Err(ProtocolError::ConsentTimeout.into());
            }
            Err(crate::error::MessagingError::NotRecipient) => {
                return Err(ProtocolError::NotSubject.into());
            }
            Err(other) => return Err(other.into()),
        }

        let session = self.issuance_session_mut(session_id)?;
        session.response = Some(answer);
        match answer {
            ConsentAnswer::Approve => {
                let subject = session.subject.clone();
                let statement_bytes = session.statement.canonical_bytes();
                let sig = self.keypair(&subject)?.sign(&statement_bytes);
                let session = self.issuance_session_mut(session_id)?;
                session.user_sig = Some(sig);
                session.state = IssuanceState::Confirmed;
            }
            ConsentAnswer::Deny => {
                session.state = IssuanceState::Denied;
                self.apply_denial_penalty_impl(session_id)?;
            }
        }
        Ok(())
    }

    /// Prompt expiry: same accounting as an explicit denial. Best effort —
    /// a session that cannot complete the penalty is marked failed.
    pub(crate) fn issuance_timeout(&mut self, session_id: u64) -> Result<(), SimError> {
        let session = self.issuance_session(session_id)?;
        if session.state != IssuanceState::AwaitingConsent {
            return Ok(());
        }
        let session = self.issuance_session_mut(session_id)?;
        session.timed_out = true;
        session.state = IssuanceState::Denied;
        if self.apply_denial_penalty_impl(session_id).is_err() {
            self.issuance_session_mut(session_id)?.state = IssuanceState::Failed;
        }
        Ok(())
    }

    // -- anchoring --------------------------------------------------------------

    /// Submit the double-signed attestation: a sidechain IdXRP transaction
    /// carrying the attestation bytes in its memo plus the corresponding
    /// 0.3 XRP main-chain transfer, gas to the issuer, and the reference on
    /// the subject's account. Returns (sidechain tx, main-chain tx).
    pub fn anchor_attestation(&mut self, session_id: u64) -> Result<(TxId, TxId), SimError> {
        let ids = self.anchor_attestation_impl(session_id)?;
        self.finish_step();
        Ok(ids)
    }

    pub(crate) fn anchor_attestation_impl(
        &mut self,
        session_id: u64,
    ) -> Result<(TxId, TxId), SimError> {
        let session = self.issuance_session(session_id)?;
        if session.state != IssuanceState::Confirmed {
            return Err(Self::wrong_state(session.state));
        }
        let issuer = session.issuer.clone();
        let subject = session.subject.clone();
        let attestation = Attestation {
            statement: session.statement.clone(),
            issuer_sig: session.issuer_sig.clone().expect("confirmed implies issuer sig"),
            user_sig: session.user_sig.clone().expect("confirmed implies user sig"),
            anchor_tx: None,
        };
        let memo = attestation.encode_memo();
        let gas = self.config.gas.clone();

        // Validate both legs plus the gas charge before applying anything.
        let issuer_side = self.sidechain.accounts.get(&issuer)?;
        let idxrp_needed = ANCHOR_TRANSFER_DROPS + gas.ic_issue_cost();
        let issuer_funded = issuer_side.idxrp >= idxrp_needed
            && self.xrpl.can_transfer(&issuer, &subject, ANCHOR_TRANSFER_DROPS).is_ok()
            && self.sidechain.accounts.contains(&subject);
        if !issuer_funded {
            // Atomicity: nothing applied; fail the session and roll back the
            // issuer's conversions as far as they go.
            let journal = self.issuance_session(session_id)?.issuer_journal.clone();
            let _ = self.run_reverse(&journal);
            self.issuance_session_mut(session_id)?.state = IssuanceState::Failed;
            return Err(ProtocolError::InsufficientFunds {
                party: "issuer".into(),
                shortfall: idxrp_needed.saturating_sub(
                    self.sidechain.accounts.get(&issuer).map(|a| a.idxrp).unwrap_or(0),
                ),
            }
            .into());
        }

        let issuer_kp = self.keypair(&issuer)?.clone();
        let side_tx = self.sidechain.transfer_idxrp(
            &issuer,
            &subject,
            ANCHOR_TRANSFER_DROPS,
            &issuer_kp,
            Some(memo),
        )?;
        let xrpl_tx =
            self.xrpl.transfer_xrp(&issuer, &subject, ANCHOR_TRANSFER_DROPS, &issuer_kp, None)?;
        let receipt = self.sidechain.charge_gas(
            &issuer,
            gas.ic_issue_units,
            GasPhase::IssuerPhase,
            gas.gas_price,
            &issuer_kp,
        )?;
        self.sidechain.record_attestation_ref(&subject, side_tx)?;

        let anchored_index = self
            .sidechain
            .ledger
            .find(&side_tx)
            .map(|entry| entry.ledger_index)
            .expect("just applied");
        let session = self.issuance_session_mut(session_id)?;
        session.gas_receipts.push(receipt);
        session.anchor_side_tx = Some(side_tx);
        session.anchor_xrpl_tx = Some(xrpl_tx);
        session.anchored_ledger_index = Some(anchored_index);
        session.state = IssuanceState::Anchored;
        Ok((side_tx, xrpl_tx))
    }

    // -- reimbursement -------------------------------------------------------------

    /// The subject pays back the 0.3 XRP on the main chain and, in IdXRP, the
    /// 0.3 XRP plus the issuer's full gas bill; the reimbursement-phase gas is
    /// charged to the issuer out of that inflow, and the issuer's fallback
    /// conversions are reversed, leaving the issuer exactly where it started.
    pub fn execute_reimbursement(&mut self, session_id: u64) -> Result<(), SimError> {
        self.execute_reimbursement_impl(session_id)?;
        self.finish_step();
        Ok(())
    }

    pub(crate) fn execute_reimbursement_impl(&mut self, session_id: u64) -> Result<(), SimError> {
        let session = self.issuance_session(session_id)?;
        if session.state != IssuanceState::Anchored {
            return Err(Self::wrong_state(session.state));
        }
        let issuer = session.issuer.clone();
        let subject = session.subject.clone();
        let gas = self.config.gas.clone();
        let reimburse_total =
            ANCHOR_TRANSFER_DROPS + gas.ic_issue_cost() + gas.ic_reimburse_cost();

        // The initiation pre-check promised this cannot fail; verify anyway
        // so a violation surfaces as an error, not a corrupt ledger.
        self.xrpl.can_transfer(&subject, &issuer, ANCHOR_TRANSFER_DROPS)?;
        crate::bridge::simulate_ensure_funds(
            &self.xrpl,
            &self.sidechain,
            &subject,
            reimburse_total,
            ANCHOR_TRANSFER_DROPS,
        )
        .map_err(|e| match e {
            crate::error::BridgeError::InsufficientFundsEverywhere { shortfall } => {
                SimError::Protocol(ProtocolError::InsufficientFunds {
                    party: "subject".into(),
                    shortfall,
                })
            }
            other => SimError::Bridge(other),
        })?;

        let subject_kp = self.keypair(&subject)?.clone();
        let issuer_kp = self.keypair(&issuer)?.clone();
        self.xrpl.transfer_xrp(&subject, &issuer, ANCHOR_TRANSFER_DROPS, &subject_kp, None)?;
        let subject_journal = self.run_ensure(&subject, reimburse_total)?;
        self.sidechain.transfer_idxrp(&subject, &issuer, reimburse_total, &subject_kp, None)?;
        let receipt = self.sidechain.charge_gas(
            &issuer,
            gas.ic_reimburse_units,
            GasPhase::Reimbursement,
            gas.gas_price,
            &issuer_kp,
        )?;

        let issuer_journal = self.issuance_session(session_id)?.issuer_journal.clone();
        self.run_reverse(&issuer_journal)?;

        let session = self.issuance_session_mut(session_id)?;
        session.subject_journal = subject_journal;
        session.gas_receipts.push(receipt);
        session.state = IssuanceState::Reimbursed;
        Ok(())
    }

    // -- denial penalty ----------------------------------------------------------------

    /// A denial costs the issuer: 0.3 XRP on the main chain and 0.3 XRP as
    /// IdXRP on the sidechain, both paid to the user, plus the issuance-phase
    /// gas. The issuer's conversions are not reversed — the converted value
    /// now belongs to the user and the fee pool. Spam issuance therefore
    /// strictly drains the issuer.
    pub fn apply_denial_penalty(&mut self, session_id: u64) -> Result<(), SimError> {
        self.apply_denial_penalty_impl(session_id)?;
        self.finish_step();
        Ok(())
    }

    pub(crate) fn apply_denial_penalty_impl(&mut self, session_id: u64) -> Result<(), SimError> {
        let session = self.issuance_session(session_id)?;
        if session.state != IssuanceState::Denied {
            return Err(Self::wrong_state(session.state));
        }
        let issuer = session.issuer.clone();
        let subject = session.subject.clone();
        let gas = self.config.gas.clone();

        let issuer_kp = self.keypair(&issuer)?.clone();
        self.xrpl.transfer_xrp(&issuer, &subject, ANCHOR_TRANSFER_DROPS, &issuer_kp, None)?;
        self.sidechain.transfer_idxrp(
            &issuer,
            &subject,
            ANCHOR_TRANSFER_DROPS,
            &issuer_kp,
            None,
        )?;
        let receipt = self.sidechain.charge_gas(
            &issuer,
            gas.ic_issue_units,
            GasPhase::IssuerPhase,
            gas.gas_price,
            &issuer_kp,
        )?;

        let session = self.issuance_session_mut(session_id)?;
        session.gas_receipts.push(receipt);
        session.state = IssuanceState::Penalized;
        Ok(())
    }

    // -- composites ---------------------------------------------------------------------

    /// The issuer's single action: initiate the session and let the IC sign
    /// and dispatch the consent prompt.
    pub fn issue_attestation(
        &mut self,
        issuer: &Address,
        subject: &Address,
        attribute: &str,
        predicate: &str,
    ) -> Result<u64, SimError> {
        let id = self.initiate_issuance_impl(issuer, subject, attribute, predicate)?;
        self.ic_sign_impl(id)?;
        self.finish_step();
        Ok(id)
    }

    /// The subject's single action: answer the consent prompt. On a confirm
    /// the IC continues automatically through anchoring and reimbursement.
    pub fn respond_issuance(
        &mut self,
        session_id: u64,
        responder: &Address,
        answer: ConsentAnswer,
    ) -> Result<(), SimError> {
        self.user_respond_impl(session_id, responder, answer)?;
        if self.issuance_session(session_id)?.state == IssuanceState::Confirmed {
            self.anchor_attestation_impl(session_id)?;
            self.execute_reimbursement_impl(session_id)?;
        }
        self.finish_step();
        Ok(())
    }
}
