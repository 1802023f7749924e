//! Python bindings for the dual-ledger identity attestation simulator.
//!
//! Exposes the simulation owner as a `Simulation` class plus a few
//! stateless crypto helpers. Everything runs in-process and deterministically:
//! the same seed and call sequence always produce the same ledgers.
//!
//! Usage from Python:
//!
//!     from idmsim import Simulation
//!     sim = Simulation(seed=42)
//!     sim.create_account("issuer"); sim.mirror("issuer"); sim.fund("issuer", 10_000_000)
//!     ...
//!     outcome = Simulation(seed=7).run_scenario(1)
//!     assert outcome["ok"]

// the pymethods expansion trips useless_conversion on this clippy version
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use idmsim_core::chain::{ChainId, TxId};
use idmsim_core::crypto::{self, KeyPair, Signature};
use idmsim_core::error::SimError;
use idmsim_core::messaging::{ConsentAnswer, PromptPayload, PromptStatus};
use idmsim_core::scenario::ScenarioVariant;
use idmsim_core::sidechain::GasSchedule;
use idmsim_core::sim::{SimConfig, Simulation as CoreSimulation};
use idmsim_core::verification::VerificationReport;

fn to_py_err(err: SimError) -> PyErr {
    match &err {
        SimError::InvariantViolation(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn parse_chain(name: &str) -> PyResult<ChainId> {
    match name {
        "xrpl" => Ok(ChainId::Xrpl),
        "idm" => Ok(ChainId::IdmSidechain),
        other => Err(PyValueError::new_err(format!("unknown chain {other:?}"))),
    }
}

fn parse_txid(hex_id: &str) -> PyResult<TxId> {
    TxId::from_hex(hex_id)
        .ok_or_else(|| PyValueError::new_err("transaction id must be 64 hex chars"))
}

fn parse_seed(seed_hex: &str) -> PyResult<[u8; 32]> {
    let bytes = hex::decode(seed_hex).map_err(|e| PyValueError::new_err(e.to_string()))?;
    bytes
        .try_into()
        .map_err(|_| PyValueError::new_err("seed must be 32 bytes of hex"))
}

fn answer(approve: bool) -> ConsentAnswer {
    if approve {
        ConsentAnswer::Approve
    } else {
        ConsentAnswer::Deny
    }
}

fn report_dict<'py>(py: Python<'py>, report: &VerificationReport) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new_bound(py);
    dict.set_item("issuer", report.issuer_identity.text())?;
    dict.set_item("subject", report.subject_identity.text())?;
    dict.set_item("attribute", &report.statement.attribute_name)?;
    dict.set_item("predicate", &report.statement.predicate)?;
    dict.set_item("issuer_sig_valid", report.issuer_sig_valid)?;
    dict.set_item("user_sig_valid", report.user_sig_valid)?;
    dict.set_item("anchor_tx", report.anchor_tx.to_hex())?;
    dict.set_item("ledger_index", report.ledger_index)?;
    Ok(dict)
}

/// The dual-ledger simulation: main chain, identity sidechain, bridge,
/// consent mailbox, and both contract state machines behind one owner.
#[pyclass]
struct Simulation {
    inner: CoreSimulation,
}

#[pymethods]
impl Simulation {
    /// Create a fresh simulation. Gas units and funding are configurable;
    /// defaults match the CLI.
    #[new]
    #[pyo3(signature = (
        seed = 42,
        gas_price = 10,
        ic_issue_units = 50_000,
        ic_reimburse_units = 20_000,
        vc_request_units = 30_000,
        vc_execute_units = 40_000,
        consent_deadline = 10,
        genesis_funding = 10_000_000,
        xrpl_supply = 100_000_000_000,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        seed: u64,
        gas_price: u64,
        ic_issue_units: u64,
        ic_reimburse_units: u64,
        vc_request_units: u64,
        vc_execute_units: u64,
        consent_deadline: u64,
        genesis_funding: u64,
        xrpl_supply: u64,
    ) -> PyResult<Self> {
        let config = SimConfig {
            gas: GasSchedule {
                ic_issue_units,
                ic_reimburse_units,
                vc_request_units,
                vc_execute_units,
                gas_price,
            },
            consent_deadline,
            genesis_funding,
            xrpl_supply,
            rng_seed: seed,
        };
        Ok(Self { inner: CoreSimulation::new(config).map_err(to_py_err)? })
    }

    // -- accounts ---------------------------------------------------------

    /// Create a labeled main-chain account; returns its address.
    fn create_account(&mut self, label: &str) -> PyResult<String> {
        Ok(self.inner.create_account(label).map_err(to_py_err)?.text().to_string())
    }

    /// Mirror a main-chain account onto the sidechain.
    fn mirror(&mut self, name: &str) -> PyResult<()> {
        self.inner.mirror(name).map_err(to_py_err)
    }

    /// Grant XRP from the genesis account.
    fn fund(&mut self, name: &str, drops: u64) -> PyResult<String> {
        Ok(self.inner.fund(name, drops).map_err(to_py_err)?.to_hex())
    }

    fn register_issuer(&mut self, name: &str) -> PyResult<()> {
        self.inner.register_issuer(name).map_err(to_py_err)
    }

    /// (main-chain XRP, sidechain XRP, IdXRP) in drops.
    fn balances(&self, name: &str) -> PyResult<(u64, u64, u64)> {
        self.inner.balances(name).map_err(to_py_err)
    }

    /// Total value across both chains minus what the account was granted.
    fn net_of(&self, name: &str) -> PyResult<i128> {
        self.inner.net_of(name).map_err(to_py_err)
    }

    fn address_of(&self, name: &str) -> PyResult<String> {
        Ok(self.inner.resolve(name).map_err(to_py_err)?.text().to_string())
    }

    // -- bridge -------------------------------------------------------------

    fn bridge_in(&mut self, name: &str, drops: u64) -> PyResult<()> {
        self.inner.bridge_in(name, drops).map_err(to_py_err)
    }

    fn bridge_out(&mut self, name: &str, drops: u64) -> PyResult<()> {
        self.inner.bridge_out(name, drops).map_err(to_py_err)
    }

    fn wrap(&mut self, name: &str, drops: u64) -> PyResult<()> {
        self.inner.wrap_balance(name, drops).map_err(to_py_err)
    }

    fn unwrap(&mut self, name: &str, drops: u64) -> PyResult<()> {
        self.inner.unwrap_balance(name, drops).map_err(to_py_err)
    }

    /// Run the IdXRP fallback chain; returns the journal as
    /// [(kind, account, drops)].
    fn ensure_funds(&mut self, name: &str, required: u64) -> PyResult<Vec<(String, String, u64)>> {
        let journal = self.inner.ensure_funds_for(name, required).map_err(to_py_err)?;
        Ok(journal
            .entries
            .iter()
            .map(|e| (e.kind.name().to_string(), e.account.text().to_string(), e.drops))
            .collect())
    }

    // -- issuance -------------------------------------------------------------

    /// Initiate an issuance; the contract signs with the issuer's key and
    /// prompts the subject. Returns the session id.
    fn issue_attestation(
        &mut self,
        issuer: &str,
        subject: &str,
        attribute: &str,
        predicate: &str,
    ) -> PyResult<u64> {
        let issuer = self.inner.resolve(issuer).map_err(to_py_err)?;
        let subject = self.inner.resolve(subject).map_err(to_py_err)?;
        self.inner
            .issue_attestation(&issuer, &subject, attribute, predicate)
            .map_err(to_py_err)
    }

    /// Answer the issuance consent prompt as the subject. Confirming runs
    /// anchoring and reimbursement automatically.
    fn respond_issuance(&mut self, session: u64, confirm: bool) -> PyResult<()> {
        let subject = self.inner.issuance_session(session).map_err(to_py_err)?.subject.clone();
        self.inner.respond_issuance(session, &subject, answer(confirm)).map_err(to_py_err)
    }

    fn issuance_state(&self, session: u64) -> PyResult<String> {
        Ok(self.inner.issuance_session(session).map_err(to_py_err)?.state.name().to_string())
    }

    /// Anchored attestation transaction ids for an account.
    fn attestation_refs(&self, name: &str) -> PyResult<Vec<String>> {
        Ok(self
            .inner
            .attestation_refs(name)
            .map_err(to_py_err)?
            .iter()
            .map(TxId::to_hex)
            .collect())
    }

    // -- verification ---------------------------------------------------------

    /// Trigger the verifier contract for an anchored attestation (hex tx id).
    fn request_verification(&mut self, verifier: &str, attestation_tx: &str) -> PyResult<u64> {
        let verifier = self.inner.resolve(verifier).map_err(to_py_err)?;
        let tx = parse_txid(attestation_tx)?;
        self.inner.request_verification(&verifier, tx).map_err(to_py_err)
    }

    /// Answer the verification consent prompt as the subject. Approving runs
    /// the verification automatically.
    fn respond_verification(&mut self, session: u64, approve: bool) -> PyResult<()> {
        let subject =
            self.inner.verification_session(session).map_err(to_py_err)?.subject.clone();
        self.inner.respond_verification(session, &subject, answer(approve)).map_err(to_py_err)
    }

    fn verification_state(&self, session: u64) -> PyResult<String> {
        Ok(self
            .inner
            .verification_session(session)
            .map_err(to_py_err)?
            .state
            .name()
            .to_string())
    }

    /// The verification report of a completed session.
    fn verification_report<'py>(&self, py: Python<'py>, session: u64) -> PyResult<Bound<'py, PyDict>> {
        let report = self.inner.verification_report(session).map_err(to_py_err)?;
        report_dict(py, report)
    }

    // -- consent inbox ----------------------------------------------------------

    /// Open and answered prompts for an account.
    fn inbox<'py>(&self, py: Python<'py>, name: &str) -> PyResult<Bound<'py, PyList>> {
        let prompts = self.inner.inbox(name).map_err(to_py_err)?;
        let list = PyList::empty_bound(py);
        for prompt in prompts {
            let dict = PyDict::new_bound(py);
            dict.set_item("id", prompt.id)?;
            dict.set_item("kind", prompt.kind.name())?;
            dict.set_item("session", prompt.session_id)?;
            dict.set_item("deadline", prompt.deadline)?;
            dict.set_item(
                "status",
                match prompt.status {
                    PromptStatus::Open => "open".to_string(),
                    PromptStatus::Answered(a) => format!("answered:{}", a.name()),
                    PromptStatus::Expired => "expired".to_string(),
                },
            )?;
            if let PromptPayload::Verification { verifier, attestation_tx } = &prompt.payload {
                dict.set_item("verifier", verifier.text())?;
                dict.set_item("attestation_tx", attestation_tx.to_hex())?;
            }
            list.append(dict)?;
        }
        Ok(list)
    }

    /// Answer a prompt by id on behalf of `account`.
    fn respond_prompt(&mut self, prompt: u64, account: &str, approve: bool) -> PyResult<()> {
        self.inner.respond_prompt(prompt, account, answer(approve)).map_err(to_py_err)
    }

    // -- time, audit, export ------------------------------------------------------

    /// Close both ledgers `count` times, expiring overdue consent prompts.
    #[pyo3(signature = (count = 1))]
    fn close_ledgers(&mut self, count: u64) {
        self.inner.close_ledgers(count);
    }

    fn current_index(&self) -> u64 {
        self.inner.current_index()
    }

    /// Balance, peg, and conservation audit as a dict.
    fn audit<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let audit = self.inner.audit();
        let dict = PyDict::new_bound(py);
        dict.set_item("ok", audit.all_ok())?;
        dict.set_item("peg_ok", audit.peg_ok)?;
        dict.set_item("backing_ok", audit.backing_ok)?;
        dict.set_item("main_conservation_ok", audit.main_conservation_ok)?;
        dict.set_item("global_conservation_ok", audit.global_conservation_ok)?;
        dict.set_item("fee_pool_ok", audit.fee_pool_ok)?;
        dict.set_item("refs_ok", audit.refs_ok)?;
        dict.set_item("lock_balance", audit.lock_balance)?;
        dict.set_item("idxrp_supply", audit.idxrp_supply)?;
        dict.set_item("fee_pool", audit.fee_pool_idxrp)?;
        let rows = PyList::empty_bound(py);
        for row in &audit.rows {
            let entry = PyDict::new_bound(py);
            entry.set_item("label", row.label.clone())?;
            entry.set_item("address", &row.address)?;
            entry.set_item("xrp", row.xrp)?;
            entry.set_item("side_xrp", row.side_xrp)?;
            entry.set_item("idxrp", row.idxrp)?;
            entry.set_item("net", row.net)?;
            rows.append(entry)?;
        }
        dict.set_item("rows", rows)?;
        Ok(dict)
    }

    /// Raise RuntimeError naming the first violated invariant, if any.
    fn verify_invariants(&self) -> PyResult<()> {
        self.inner.verify_invariants().map_err(to_py_err)
    }

    /// Scan every ledger entry for forbidden byte strings; returns
    /// {pattern: found}.
    fn privacy_scan<'py>(
        &self,
        py: Python<'py>,
        forbidden: Vec<String>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let report = self.inner.privacy_scan(&forbidden);
        let dict = PyDict::new_bound(py);
        for (pattern, found) in &report.patterns {
            dict.set_item(pattern, *found)?;
        }
        Ok(dict)
    }

    /// Canonical line-delimited transaction log ("xrpl" or "idm").
    fn export_log(&self, chain: &str) -> PyResult<String> {
        Ok(self.inner.export_log(parse_chain(chain)?))
    }

    /// Canonical balance map ("xrpl" or "idm").
    fn balance_map(&self, chain: &str) -> PyResult<String> {
        Ok(self.inner.balance_map(parse_chain(chain)?))
    }

    // -- scenarios -------------------------------------------------------------

    /// Run a scripted scenario (1 or 2) on a fresh simulation.
    /// variant: "honest", "deny-issuance", or "deny-verification".
    #[pyo3(signature = (id, variant = "honest"))]
    fn run_scenario<'py>(
        &mut self,
        py: Python<'py>,
        id: u8,
        variant: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let variant = match variant {
            "honest" => ScenarioVariant::Honest,
            "deny-issuance" => ScenarioVariant::DenyIssuance,
            "deny-verification" => ScenarioVariant::DenyVerification,
            other => return Err(PyValueError::new_err(format!("unknown variant {other:?}"))),
        };
        let outcome = self.inner.run_scenario(id, variant).map_err(to_py_err)?;
        let dict = PyDict::new_bound(py);
        dict.set_item("ok", outcome.ok())?;
        dict.set_item("scenario", outcome.scenario)?;
        dict.set_item("variant", outcome.variant.name())?;
        dict.set_item("fee_pool", outcome.fee_pool)?;
        dict.set_item("privacy_pass", outcome.privacy.pass)?;
        dict.set_item("failures", outcome.failures.clone())?;
        let nets = PyDict::new_bound(py);
        for (label, net) in &outcome.nets {
            nets.set_item(label, *net)?;
        }
        dict.set_item("nets", nets)?;
        let reports = PyList::empty_bound(py);
        for report in &outcome.reports {
            reports.append(report_dict(py, report)?)?;
        }
        dict.set_item("reports", reports)?;
        Ok(dict)
    }

    // -- persistence --------------------------------------------------------------

    /// The canonical state text; feed it to `Simulation.from_state_text`.
    fn to_state_text(&self) -> String {
        self.inner.to_state_text()
    }

    #[staticmethod]
    fn from_state_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: CoreSimulation::from_state_text(text).map_err(to_py_err)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        std::fs::write(path, self.inner.to_state_text())
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Self::from_state_text(&text)
    }

    fn __repr__(&self) -> String {
        format!(
            "Simulation(seed={}, ledger_index={}, issuance_sessions={}, verification_sessions={})",
            self.inner.config.rng_seed,
            self.inner.current_index(),
            self.inner.issuance_sessions.len(),
            self.inner.verification_sessions.len(),
        )
    }
}

// -- stateless crypto helpers -----------------------------------------------

/// Derive (compressed public key hex, address) from a 32-byte hex seed.
#[pyfunction]
fn keypair_from_seed(seed_hex: &str) -> PyResult<(String, String)> {
    let kp = KeyPair::generate(parse_seed(seed_hex)?)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((hex::encode(kp.public()), kp.address().text().to_string()))
}

/// Sign a message with a hex seed; returns the DER signature as hex.
#[pyfunction]
fn sign(seed_hex: &str, message: &[u8]) -> PyResult<String> {
    let kp = KeyPair::generate(parse_seed(seed_hex)?)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(hex::encode(kp.sign(message).der()))
}

/// Verify a DER signature (hex) for a compressed public key (hex) over a
/// message. Malformed inputs return False.
#[pyfunction]
fn verify(public_hex: &str, message: &[u8], signature_hex: &str) -> bool {
    let Ok(public_bytes) = hex::decode(public_hex) else {
        return false;
    };
    let Ok(public): Result<[u8; 33], _> = public_bytes.try_into() else {
        return false;
    };
    let Ok(der) = hex::decode(signature_hex) else {
        return false;
    };
    crypto::verify(&public, message, &Signature::from_der(der))
}

#[pymodule]
fn idmsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Simulation>()?;
    m.add_function(wrap_pyfunction!(keypair_from_seed, m)?)?;
    m.add_function(wrap_pyfunction!(sign, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
