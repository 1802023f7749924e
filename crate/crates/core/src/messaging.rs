//! The prompt/response channel between the contracts and users — an
//! in-process mailbox standing in for the Ripple messaging system.

use std::collections::BTreeMap;

use crate::chain::TxId;
use crate::crypto::Address;
use crate::error::MessagingError;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PromptKind {
    IssuanceConsent,
    VerificationConsent,
}

impl PromptKind {
    pub fn name(self) -> &'static str {
        match self {
            PromptKind::IssuanceConsent => "issuance",
            PromptKind::VerificationConsent => "verification",
        }
    }
}

/// What the recipient gets to see. A verification prompt names the verifier
/// and the attestation transaction, never anyone's statement content.
#[derive(Clone, Debug)]
pub enum PromptPayload {
    Issuance { statement: Vec<u8> },
    Verification { verifier: Address, attestation_tx: TxId },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConsentAnswer {
    Approve,
    Deny,
}

impl ConsentAnswer {
    pub fn name(self) -> &'static str {
        match self {
            ConsentAnswer::Approve => "approve",
            ConsentAnswer::Deny => "deny",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PromptStatus {
    Open,
    Answered(ConsentAnswer),
    Expired,
}

/// One consent request. Exactly one response or one expiry happens per prompt.
#[derive(Clone, Debug)]
pub struct Prompt {
    pub id: u64,
    pub to: Address,
    pub kind: PromptKind,
    pub payload: PromptPayload,
    pub session_id: u64,
    pub created_at: u64,
    /// Last ledger index at which a response is still accepted.
    pub deadline: u64,
    pub status: PromptStatus,
}

#[derive(Clone, Debug, Default)]
pub struct Mailbox {
    prompts: BTreeMap<u64, Prompt>,
    next_id: u64,
}

impl Mailbox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn send(
        &mut self,
        to: Address,
        kind: PromptKind,
        payload: PromptPayload,
        session_id: u64,
        created_at: u64,
        deadline: u64,
    ) -> u64 {
        self.next_id += 1;
        let id = self.next_id;
        self.prompts.insert(
            id,
            Prompt { id, to, kind, payload, session_id, created_at, deadline, status: PromptStatus::Open },
        );
        id
    }

    pub fn get(&self, id: u64) -> Result<&Prompt, MessagingError> {
        self.prompts.get(&id).ok_or(MessagingError::UnknownPrompt(id))
    }

    /// Record a response. The answer routes to the owning session at the
    /// simulation layer; this only validates recipient, uniqueness, and the
    /// deadline.
    pub fn respond(
        &mut self,
        id: u64,
        responder: &Address,
        answer: ConsentAnswer,
        now: u64,
    ) -> Result<&Prompt, MessagingError> {
        let prompt = self.prompts.get_mut(&id).ok_or(MessagingError::UnknownPrompt(id))?;
        if prompt.to != *responder {
            return Err(MessagingError::NotRecipient);
        }
        match prompt.status {
            PromptStatus::Answered(_) => return Err(MessagingError::AlreadyAnswered),
            PromptStatus::Expired => return Err(MessagingError::Expired),
            PromptStatus::Open => {}
        }
        if now > prompt.deadline {
            return Err(MessagingError::Expired);
        }
        prompt.status = PromptStatus::Answered(answer);
        Ok(prompt)
    }

    /// Expire every open prompt whose deadline has passed; returns them for
    /// denial routing.
    pub fn expire(&mut self, now: u64) -> Vec<Prompt> {
        let mut expired = Vec::new();
        for prompt in self.prompts.values_mut() {
            if prompt.status == PromptStatus::Open && now > prompt.deadline {
                prompt.status = PromptStatus::Expired;
                expired.push(prompt.clone());
            }
        }
        expired
    }

    pub fn inbox(&self, account: &Address) -> Vec<&Prompt> {
        self.prompts.values().filter(|p| p.to == *account).collect()
    }

    pub fn all(&self) -> impl Iterator<Item = &Prompt> {
        self.prompts.values()
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    /// Re-insert a persisted prompt; used by state load.
    pub fn restore(&mut self, prompt: Prompt) {
        self.next_id = self.next_id.max(prompt.id);
        self.prompts.insert(prompt.id, prompt);
    }
}
