//! The verifier contract (VC) state machine: consent-gated attestation
//! lookup, dual signature verification, report assembly, and the
//! approve/deny gas economics.
//!
//! The gas split point is the user's approval: the request-phase units are
//! borne by the verifier (and reimbursed by the subject on approval), the
//! execution-phase units by the subject. A denial leaves the verifier's
//! request gas with the fee pool — spam verification attempts cost the
//! verifier. Verification itself appends nothing to either ledger beyond
//! the gas, fallback-conversion, and reimbursement IdXRP entries; the report
//! is an off-chain value returned to the verifier.

use crate::bridge::ConversionJournal;
use crate::chain::TxId;
use crate::crypto::{Address, Attestation, Statement};
use crate::error::{ProtocolError, SimError};
use crate::messaging::{ConsentAnswer, PromptKind, PromptPayload};
use crate::sidechain::{GasPhase, GasReceipt};
use crate::sim::Simulation;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum VerificationState {
    Requested,
    AwaitingConsent,
    Approved,
    DeniedByUser,
    Completed,
    Failed,
}

impl VerificationState {
    pub fn name(self) -> &'static str {
        match self {
            VerificationState::Requested => "requested",
            VerificationState::AwaitingConsent => "awaiting_consent",
            VerificationState::Approved => "approved",
            VerificationState::DeniedByUser => "denied_by_user",
            VerificationState::Completed => "completed",
            VerificationState::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "requested" => Some(VerificationState::Requested),
            "awaiting_consent" => Some(VerificationState::AwaitingConsent),
            "approved" => Some(VerificationState::Approved),
            "denied_by_user" => Some(VerificationState::DeniedByUser),
            "completed" => Some(VerificationState::Completed),
            "failed" => Some(VerificationState::Failed),
            _ => None,
        }
    }
}

/// One verification flow. Before approval the session exposes only the
/// attestation transaction id, never statement content.
#[derive(Clone, Debug)]
pub struct VerificationSession {
    pub id: u64,
    pub verifier: Address,
    pub attestation_tx: TxId,
    pub subject: Address,
    pub state: VerificationState,
    pub pre_approval_gas: Option<GasReceipt>,
    pub post_approval_gas: Option<GasReceipt>,
    pub verifier_journal: ConversionJournal,
    pub subject_journal: ConversionJournal,
    pub prompt_id: Option<u64>,
    pub response: Option<ConsentAnswer>,
    pub timed_out: bool,
    pub report: Option<VerificationReport>,
}

/// What the verifier learns: the disclosed statement, both identities (this
/// chain shares identities openly — issuer reputation is the trust basis),
/// the signature verification results, and where the attestation is anchored.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub statement: Statement,
    pub issuer_identity: Address,
    pub subject_identity: Address,
    pub issuer_sig_valid: bool,
    pub user_sig_valid: bool,
    pub anchor_tx: TxId,
    pub ledger_index: u64,
}

impl VerificationReport {
    pub fn render(&self) -> String {
        format!(
            "attestation {}\n  anchored at ledger index {}\n  issuer:  {}\n  subject: {}\n  attribute: {}\n  predicate: {:?}\n  issuer signature valid: {}\n  user signature valid:   {}\n",
            self.anchor_tx,
            self.ledger_index,
            self.issuer_identity,
            self.subject_identity,
            self.statement.attribute_name,
            self.statement.predicate,
            self.issuer_sig_valid,
            self.user_sig_valid,
        )
    }
}

impl Simulation {
    pub fn verification_session(&self, id: u64) -> Result<&VerificationSession, SimError> {
        self.verification_sessions
            .get(&id)
            .ok_or_else(|| ProtocolError::UnknownSession(id).into())
    }

    fn verification_session_mut(&mut self, id: u64) -> Result<&mut VerificationSession, SimError> {
        self.verification_sessions
            .get_mut(&id)
            .ok_or_else(|| ProtocolError::UnknownSession(id).into())
    }

    fn wrong_vstate(state: VerificationState) -> SimError {
        ProtocolError::WrongState(state.name().to_string()).into()
    }

    // -- request -----------------------------------------------------------

    /// Trigger the VC. Computation does not start: the request-phase gas is
    /// metered against the verifier and a consent prompt goes to the subject
    /// naming the verifier and the attestation transaction.
    pub fn request_verification(
        &mut self,
        verifier: &Address,
        attestation_tx: TxId,
    ) -> Result<u64, SimError> {
        let id = self.request_verification_impl(verifier, attestation_tx)?;
        self.finish_step();
        Ok(id)
    }

    pub(crate) fn request_verification_impl(
        &mut self,
        verifier: &Address,
        attestation_tx: TxId,
    ) -> Result<u64, SimError> {
        if !self.sidechain.accounts.contains(verifier) {
            return Err(ProtocolError::UnknownSubject(verifier.text().to_string()).into());
        }
        // The tx must be an anchored issuance: present, memo decodes, and
        // referenced on the subject's account.
        let entry = self
            .sidechain
            .ledger
            .find(&attestation_tx)
            .ok_or_else(|| ProtocolError::UnknownAttestation(attestation_tx.to_hex()))?;
        let memo = entry
            .tx
            .memo
            .as_deref()
            .ok_or_else(|| ProtocolError::UnknownAttestation(attestation_tx.to_hex()))?;
        let attestation = Attestation::decode_memo(memo)
            .map_err(|_| ProtocolError::UnknownAttestation(attestation_tx.to_hex()))?;
        let subject = attestation.statement.subject.clone();
        let subject_account = self
            .sidechain
            .accounts
            .get(&subject)
            .map_err(|_| ProtocolError::UnknownAttestation(attestation_tx.to_hex()))?;
        if !subject_account.attestation_refs.contains(&attestation_tx) {
            return Err(ProtocolError::UnknownAttestation(attestation_tx.to_hex()).into());
        }

        let gas = self.config.gas.clone();
        let verifier_journal = self.run_ensure(verifier, gas.vc_request_cost())?;
        let verifier_kp = self.keypair(verifier)?.clone();
        let receipt = self.sidechain.charge_gas(
            verifier,
            gas.vc_request_units,
            GasPhase::PreApproval,
            gas.gas_price,
            &verifier_kp,
        )?;

        let created = self.current_index();
        let deadline = created + self.config.consent_deadline;
        let id = self.next_session_id();
        let prompt_id = self.mailbox.send(
            subject.clone(),
            PromptKind::VerificationConsent,
            PromptPayload::Verification { verifier: verifier.clone(), attestation_tx },
            id,
            created,
            deadline,
        );

        self.verification_sessions.insert(
            id,
            VerificationSession {
                id,
                verifier: verifier.clone(),
                attestation_tx,
                subject,
                state: VerificationState::AwaitingConsent,
                pre_approval_gas: Some(receipt),
                post_approval_gas: None,
                verifier_journal,
                subject_journal: ConversionJournal::new(),
                prompt_id: Some(prompt_id),
                response: None,
                timed_out: false,
                report: None,
            },
        );
        Ok(id)
    }

    // -- consent -------------------------------------------------------------

    /// The subject approves or denies the verifier's access. A denial leaves
    /// the verifier's request gas with the fee pool and reverses nothing.
    pub fn user_consent(
        &mut self,
        session_id: u64,
        responder: &Address,
        answer: ConsentAnswer,
    ) -> Result<(), SimError> {
        self.user_consent_impl(session_id, responder, answer)?;
        self.finish_step();
        Ok(())
    }

    pub(crate) fn user_consent_impl(
        &mut self,
        session_id: u64,
        responder: &Address,
        answer: ConsentAnswer,
    ) -> Result<(), SimError> {
        let session = self.verification_session(session_id)?;
        if session.state != VerificationState::AwaitingConsent {
            return Err(Self::wrong_vstate(session.state));
        }
        if session.subject != *responder {
            return Err(ProtocolError::NotSubject.into());
        }
        let prompt_id = session.prompt_id.expect("awaiting consent implies a prompt");
        let now = self.current_index();
        match self.mailbox.respond(prompt_id, responder, answer, now) {
            Ok(_) => {}
            Err(crate::error::MessagingError::Expired) => {
                self.verification_timeout(session_id)?;
                return Err(ProtocolError::ConsentTimeout.into());
            }
            Err(crate::error::MessagingError::NotRecipient) => {
                return Err(ProtocolError::NotSubject.into());
            }
            Err(other) => return Err(other.into()),
        }

        let session = self.verification_session_mut(session_id)?;
        session.response = Some(answer);
        session.state = match answer {
            ConsentAnswer::Approve => VerificationState::Approved,
            ConsentAnswer::Deny => VerificationState::DeniedByUser,
        };
        Ok(())
    }

    /// Prompt expiry accounts identically to an explicit denial.
    pub(crate) fn verification_timeout(&mut self, session_id: u64) -> Result<(), SimError> {
        let session = self.verification_session(session_id)?;
        if session.state != VerificationState::AwaitingConsent {
            return Ok(());
        }
        let session = self.verification_session_mut(session_id)?;
        session.timed_out = true;
        session.state = VerificationState::DeniedByUser;
        Ok(())
    }

    // -- execution ------------------------------------------------------------

    /// Load the anchored attestation, verify both signatures against the
    /// on-record keys, settle the gas split, and return the report.
    pub fn execute_verification(&mut self, session_id: u64) -> Result<VerificationReport, SimError> {
        let report = self.execute_verification_impl(session_id)?;
        self.finish_step();
        Ok(report)
    }

    pub(crate) fn execute_verification_impl(
        &mut self,
        session_id: u64,
    ) -> Result<VerificationReport, SimError> {
        let session = self.verification_session(session_id)?;
        if session.state != VerificationState::Approved {
            return Err(Self::wrong_vstate(session.state));
        }
        let verifier = session.verifier.clone();
        let subject = session.subject.clone();
        let attestation_tx = session.attestation_tx;

        let entry = self
            .sidechain
            .ledger
            .find(&attestation_tx)
            .ok_or_else(|| ProtocolError::UnknownAttestation(attestation_tx.to_hex()))?;
        let ledger_index = entry.ledger_index;
        let memo = entry
            .tx
            .memo
            .as_deref()
            .ok_or_else(|| ProtocolError::MalformedAttestation("memo missing".into()))?;
        let attestation = match Attestation::decode_memo(memo) {
            Ok(attestation) => attestation,
            Err(e) => {
                self.verification_session_mut(session_id)?.state = VerificationState::Failed;
                return Err(ProtocolError::MalformedAttestation(e.to_string()).into());
            }
        };
        let issuer_identity = attestation.statement.issuer.clone();
        let subject_identity = attestation.statement.subject.clone();
        let issuer_public = match self.sidechain.accounts.get(&issuer_identity) {
            Ok(account) => account.public,
            Err(_) => {
                self.verification_session_mut(session_id)?.state = VerificationState::Failed;
                return Err(ProtocolError::MalformedAttestation(
                    "issuer identity has no on-record key".into(),
                )
                .into());
            }
        };
        let subject_public = match self.sidechain.accounts.get(&subject_identity) {
            Ok(account) => account.public,
            Err(_) => {
                self.verification_session_mut(session_id)?.state = VerificationState::Failed;
                return Err(ProtocolError::MalformedAttestation(
                    "subject identity has no on-record key".into(),
                )
                .into());
            }
        };
        let (issuer_sig_valid, user_sig_valid) =
            attestation.verify(&issuer_public, &subject_public);

        // From approval onward the subject bears the cost: the execution gas
        // plus reimbursing the verifier's request gas.
        let gas = self.config.gas.clone();
        let needed = gas.vc_execute_cost() + gas.vc_request_cost();
        if crate::bridge::simulate_ensure_funds(&self.xrpl, &self.sidechain, &subject, needed, 0)
            .is_err()
        {
            // The verifier's request gas stays spent, as on a denial.
            self.verification_session_mut(session_id)?.state = VerificationState::Failed;
            return Err(ProtocolError::InsufficientFunds {
                party: "subject".into(),
                shortfall: needed,
            }
            .into());
        }
        let subject_journal = self.run_ensure(&subject, needed)?;
        let subject_kp = self.keypair(&subject)?.clone();
        let receipt = self.sidechain.charge_gas(
            &subject,
            gas.vc_execute_units,
            GasPhase::PostApproval,
            gas.gas_price,
            &subject_kp,
        )?;
        self.sidechain.transfer_idxrp(
            &subject,
            &verifier,
            gas.vc_request_cost(),
            &subject_kp,
            None,
        )?;
        let verifier_journal = self.verification_session(session_id)?.verifier_journal.clone();
        self.run_reverse(&verifier_journal)?;

        let report = VerificationReport {
            statement: attestation.statement,
            issuer_identity,
            subject_identity,
            issuer_sig_valid,
            user_sig_valid,
            anchor_tx: attestation_tx,
            ledger_index,
        };
        let session = self.verification_session_mut(session_id)?;
        session.subject_journal = subject_journal;
        session.post_approval_gas = Some(receipt);
        session.report = Some(report.clone());
        session.state = VerificationState::Completed;
        Ok(report)
    }

    // -- composites ------------------------------------------------------------

    /// The subject's single action: answer the verification prompt. On an
    /// approval the VC continues straight into execution.
    pub fn respond_verification(
        &mut self,
        session_id: u64,
        responder: &Address,
        answer: ConsentAnswer,
    ) -> Result<(), SimError> {
        self.user_consent_impl(session_id, responder, answer)?;
        if self.verification_session(session_id)?.state == VerificationState::Approved {
            self.execute_verification_impl(session_id)?;
        }
        self.finish_step();
        Ok(())
    }

    /// The verification report, available once the session completed.
    pub fn verification_report(&self, session_id: u64) -> Result<&VerificationReport, SimError> {
        let session = self.verification_session(session_id)?;
        session
            .report
            .as_ref()
            .ok_or_else(|| Self::wrong_vstate(session.state))
    }
}
