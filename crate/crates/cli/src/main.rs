//! Command-line driver for the dual-ledger identity attestation simulator.
//!
//! State persists between invocations in a canonical text file (default
//! `idmsim.state`, override with `--state`). Every mutating command loads,
//! applies exactly one simulation operation, and saves back.
//!
//! Exit codes: 0 success, 1 protocol error, 2 invariant violation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use idmsim_core::chain::{ChainId, TxId};
use idmsim_core::error::SimError;
use idmsim_core::messaging::{ConsentAnswer, PromptPayload};
use idmsim_core::scenario::ScenarioVariant;
use idmsim_core::sidechain::GasSchedule;
use idmsim_core::sim::{SimConfig, Simulation};

#[derive(Parser)]
#[command(name = "idmsim", about = "Dual-ledger identity attestation simulator", version)]
struct Cli {
    /// State file read and written by every command.
    #[arg(long, global = true, default_value = "idmsim.state")]
    state: PathBuf,

    /// Optional key=value config file applied when creating a fresh state.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Account lifecycle on the main chain and the sidechain.
    Account {
        #[command(subcommand)]
        command: AccountCommand,
    },
    /// Issuer registry administration.
    Issuer {
        #[command(subcommand)]
        command: IssuerCommand,
    },
    /// Attestation issuance (the issuer contract).
    Attest {
        #[command(subcommand)]
        command: AttestCommand,
    },
    /// Attestation verification (the verifier contract).
    Verify {
        #[command(subcommand)]
        command: VerifyCommand,
    },
    /// Consent prompt inbox.
    Inbox {
        #[command(subcommand)]
        command: InboxCommand,
    },
    /// Ledger inspection and closes.
    Ledger {
        #[command(subcommand)]
        command: LedgerCommand,
    },
    /// Balance, peg, and conservation audit.
    Audit {
        #[command(subcommand)]
        command: AuditCommand,
    },
    /// Scan chain history for forbidden raw-attribute bytes.
    Privacy {
        #[command(subcommand)]
        command: PrivacyCommand,
    },
    /// Run a scripted end-to-end scenario on a fresh state.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
    /// Save or load the canonical state file.
    State {
        #[command(subcommand)]
        command: StateCommand,
    },
    /// Move value across the bridge or between wrapped and unwrapped form.
    Bridge {
        #[command(subcommand)]
        command: BridgeCommand,
    },
}

#[derive(Subcommand)]
enum AccountCommand {
    /// Create a labeled main-chain account.
    Create { label: String },
    /// Mirror a main-chain account onto the sidechain.
    Mirror { name: String },
    /// Grant XRP from the genesis account.
    Fund {
        name: String,
        #[arg(long)]
        drops: u64,
    },
    /// Show balances and attestation refs.
    Show { name: String },
}

#[derive(Subcommand)]
enum IssuerCommand {
    /// Add an account to the issuer registry (admin only).
    Register {
        name: String,
        /// Registering authority; defaults to the genesis/admin account.
        #[arg(long)]
        by: Option<String>,
    },
}

#[derive(Subcommand)]
enum AttestCommand {
    /// Initiate an issuance: the contract signs with the issuer's key and
    /// prompts the subject for consent.
    Issue(IssueArgs),
    /// Answer the consent prompt for an issuance session. Confirming runs
    /// anchoring and reimbursement automatically.
    Respond {
        #[arg(long)]
        session: u64,
        #[command(flatten)]
        answer: AnswerFlags,
    },
    /// Show an issuance session.
    Status {
        #[arg(long)]
        session: u64,
    },
}

#[derive(Args)]
struct IssueArgs {
    #[arg(long)]
    issuer: String,
    #[arg(long)]
    subject: String,
    #[arg(long)]
    attribute: String,
    #[arg(long)]
    predicate: String,
}

#[derive(Args)]
struct AnswerFlags {
    /// Confirm / approve.
    #[arg(long, conflicts_with = "deny", visible_alias = "approve")]
    confirm: bool,
    #[arg(long)]
    deny: bool,
}

impl AnswerFlags {
    fn answer(&self) -> Result<ConsentAnswer, String> {
        match (self.confirm, self.deny) {
            (true, false) => Ok(ConsentAnswer::Approve),
            (false, true) => Ok(ConsentAnswer::Deny),
            _ => Err("pass exactly one of --confirm/--approve or --deny".into()),
        }
    }
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Trigger the verifier contract for an anchored attestation.
    Request {
        #[arg(long)]
        verifier: String,
        /// Attestation transaction id (hex).
        #[arg(long)]
        attestation: String,
    },
    /// Answer the consent prompt for a verification session. Approving runs
    /// the verification automatically.
    Consent {
        #[arg(long)]
        session: u64,
        #[command(flatten)]
        answer: AnswerFlags,
    },
    /// Print the verification report of a completed session.
    Report {
        #[arg(long)]
        session: u64,
    },
}

#[derive(Subcommand)]
enum InboxCommand {
    /// List prompts for an account.
    List {
        #[arg(long)]
        account: String,
    },
    /// Answer a prompt by id.
    Respond {
        #[arg(long)]
        prompt: u64,
        /// Responder account (defaults to the prompt recipient).
        #[arg(long)]
        account: Option<String>,
        #[command(flatten)]
        answer: AnswerFlags,
    },
}

#[derive(Subcommand)]
enum LedgerCommand {
    /// Print a chain's canonical transaction log.
    Inspect {
        #[arg(long, value_parser = parse_chain)]
        chain: ChainId,
    },
    /// Advance both chains by closing ledgers (expires overdue prompts).
    Close {
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
}

#[derive(Subcommand)]
enum AuditCommand {
    /// Per-account balances, net deltas, peg and conservation checks.
    Balances {
        /// Also render session conversion journals.
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Subcommand)]
enum PrivacyCommand {
    /// Scan every ledger entry for the given byte strings.
    Scan {
        #[arg(long, required = true, num_args = 1..)]
        forbidden: Vec<String>,
    },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// Run scenario 1 or 2.
    Run {
        id: u8,
        /// Script the subject to deny the issuance consent.
        #[arg(long, conflicts_with = "deny_verification")]
        deny_issuance: bool,
        /// Script the subject to deny the verification consent.
        #[arg(long)]
        deny_verification: bool,
    },
}

#[derive(Subcommand)]
enum StateCommand {
    /// Write the current state to PATH.
    Save { path: PathBuf },
    /// Replace the current state with the one at PATH.
    Load { path: PathBuf },
}

#[derive(Subcommand)]
enum BridgeCommand {
    /// Move XRP from the main chain into sidechain custody.
    In {
        name: String,
        #[arg(long)]
        drops: u64,
    },
    /// Move sidechain XRP back to the main chain.
    Out {
        name: String,
        #[arg(long)]
        drops: u64,
    },
    /// Wrap sidechain XRP into IdXRP.
    Wrap {
        name: String,
        #[arg(long)]
        drops: u64,
    },
    /// Unwrap IdXRP into sidechain XRP.
    Unwrap {
        name: String,
        #[arg(long)]
        drops: u64,
    },
}

fn parse_chain(s: &str) -> Result<ChainId, String> {
    match s {
        "xrpl" => Ok(ChainId::Xrpl),
        "idm" => Ok(ChainId::IdmSidechain),
        other => Err(format!("unknown chain {other:?} (expected xrpl or idm)")),
    }
}

fn load_config(path: &PathBuf) -> Result<SimConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("read {path:?}: {e}"))?;
    let mut config = SimConfig::default();
    let mut gas = GasSchedule::default();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| format!("bad config line {line:?}"))?;
        let value: u64 =
            value.trim().parse().map_err(|_| format!("bad value in config line {line:?}"))?;
        match key.trim() {
            "ic_issue_units" => gas.ic_issue_units = value,
            "ic_reimburse_units" => gas.ic_reimburse_units = value,
            "vc_request_units" => gas.vc_request_units = value,
            "vc_execute_units" => gas.vc_execute_units = value,
            "gas_price" => gas.gas_price = value,
            "consent_deadline" => config.consent_deadline = value,
            "genesis_funding" => config.genesis_funding = value,
            "xrpl_supply" => config.xrpl_supply = value,
            "rng_seed" => config.rng_seed = value,
            other => return Err(format!("unknown config key {other:?}")),
        }
    }
    config.gas = gas;
    Ok(config)
}

struct App {
    sim: Simulation,
    state_path: PathBuf,
}

impl App {
    fn open(cli: &Cli) -> Result<Self, String> {
        let sim = if cli.state.exists() {
            let text = std::fs::read_to_string(&cli.state)
                .map_err(|e| format!("read {:?}: {e}", cli.state))?;
            Simulation::from_state_text(&text).map_err(|e| e.to_string())?
        } else {
            let config = match &cli.config {
                Some(path) => load_config(path)?,
                None => SimConfig::default(),
            };
            Simulation::new(config).map_err(|e| e.to_string())?
        };
        Ok(Self { sim, state_path: cli.state.clone() })
    }

    fn save(&self) -> Result<(), String> {
        std::fs::write(&self.state_path, self.sim.to_state_text())
            .map_err(|e| format!("write {:?}: {e}", self.state_path))
    }
}

/// 0 = success, 1 = protocol error, 2 = invariant violation.
fn exit_code_for(err: &SimError) -> u8 {
    match err {
        SimError::InvariantViolation(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<u8, (String, u8)> {
    let mut app = App::open(&cli).map_err(|e| (e, 1))?;
    let mut code = 0u8;

    macro_rules! sim_try {
        ($expr:expr) => {
            $expr.map_err(|e: SimError| (e.to_string(), exit_code_for(&e)))?
        };
    }

    match cli.command {
        Command::Account { command } => match command {
            AccountCommand::Create { label } => {
                let address = sim_try!(app.sim.create_account(&label));
                println!("created {label} -> {address}");
            }
            AccountCommand::Mirror { name } => {
                sim_try!(app.sim.mirror(&name));
                println!("mirrored {name} onto the sidechain");
            }
            AccountCommand::Fund { name, drops } => {
                let tx = sim_try!(app.sim.fund(&name, drops));
                println!("funded {name} with {drops} drops (tx {tx})");
            }
            AccountCommand::Show { name } => {
                let (xrp, side_xrp, idxrp) = sim_try!(app.sim.balances(&name));
                let address = sim_try!(app.sim.resolve(&name));
                println!("{name} ({address})");
                println!("  xrpl xrp:      {xrp}");
                println!("  sidechain xrp: {side_xrp}");
                println!("  idxrp:         {idxrp}");
                if let Ok(refs) = app.sim.attestation_refs(&name) {
                    println!("  attestation refs: {}", refs.len());
                    for tx in refs {
                        println!("    {tx}");
                    }
                }
            }
        },
        Command::Issuer { command } => match command {
            IssuerCommand::Register { name, by } => {
                match by {
                    Some(caller) => sim_try!(app.sim.register_issuer_by(&caller, &name)),
                    None => sim_try!(app.sim.register_issuer(&name)),
                }
                println!("registered issuer {name}");
            }
        },
        Command::Attest { command } => match command {
            AttestCommand::Issue(args) => {
                let issuer = sim_try!(app.sim.resolve(&args.issuer));
                let subject = sim_try!(app.sim.resolve(&args.subject));
                let session = sim_try!(app.sim.issue_attestation(
                    &issuer,
                    &subject,
                    &args.attribute,
                    &args.predicate
                ));
                println!("issuance session {session} awaiting consent from {}", args.subject);
            }
            AttestCommand::Respond { session, answer } => {
                let answer = answer.answer().map_err(|e| (e, 1))?;
                let subject = sim_try!(app.sim.issuance_session(session)).subject.clone();
                sim_try!(app.sim.respond_issuance(session, &subject, answer));
                let state = sim_try!(app.sim.issuance_session(session)).state;
                println!("issuance session {session}: {}", state.name());
            }
            AttestCommand::Status { session } => {
                let s = sim_try!(app.sim.issuance_session(session));
                println!("issuance session {session}");
                println!("  issuer:  {}", s.issuer);
                println!("  subject: {}", s.subject);
                println!("  state:   {}", s.state.name());
                if let Some(tx) = &s.anchor_side_tx {
                    println!("  sidechain anchor: {tx}");
                }
                if let Some(tx) = &s.anchor_xrpl_tx {
                    println!("  xrpl anchor:      {tx}");
                }
            }
        },
        Command::Verify { command } => match command {
            VerifyCommand::Request { verifier, attestation } => {
                let verifier_addr = sim_try!(app.sim.resolve(&verifier));
                let tx = TxId::from_hex(&attestation)
                    .ok_or_else(|| ("attestation id is not 64 hex chars".to_string(), 1))?;
                let session = sim_try!(app.sim.request_verification(&verifier_addr, tx));
                println!("verification session {session} awaiting the subject's consent");
            }
            VerifyCommand::Consent { session, answer } => {
                let answer = answer.answer().map_err(|e| (e, 1))?;
                let subject = sim_try!(app.sim.verification_session(session)).subject.clone();
                sim_try!(app.sim.respond_verification(session, &subject, answer));
                let state = sim_try!(app.sim.verification_session(session)).state;
                println!("verification session {session}: {}", state.name());
            }
            VerifyCommand::Report { session } => {
                let s = sim_try!(app.sim.verification_session(session));
                match &s.report {
                    Some(report) => print!("{}", report.render()),
                    None => {
                        // pre-approval opacity: only the tx id and state
                        println!("verification session {session}: {}", s.state.name());
                        println!("  attestation tx: {}", s.attestation_tx);
                        return Err(("no report: session not completed".to_string(), 1));
                    }
                }
            }
        },
        Command::Inbox { command } => match command {
            InboxCommand::List { account } => {
                let prompts = sim_try!(app.sim.inbox(&account));
                if prompts.is_empty() {
                    println!("inbox empty for {account}");
                }
                for prompt in prompts {
                    let what = match &prompt.payload {
                        PromptPayload::Issuance { .. } => "issuance consent".to_string(),
                        PromptPayload::Verification { verifier, attestation_tx } => {
                            format!("verification consent: {verifier} wants attestation {attestation_tx}")
                        }
                    };
                    println!(
                        "prompt {} [{:?}] session {} deadline {}: {what}",
                        prompt.id, prompt.status, prompt.session_id, prompt.deadline
                    );
                }
            }
            InboxCommand::Respond { prompt, account, answer } => {
                let answer = answer.answer().map_err(|e| (e, 1))?;
                let responder = match account {
                    Some(name) => name,
                    None => sim_try!(app.sim.mailbox.get(prompt).map_err(SimError::from))
                        .to
                        .text()
                        .to_string(),
                };
                sim_try!(app.sim.respond_prompt(prompt, &responder, answer));
                println!("prompt {prompt} answered: {}", answer.name());
            }
        },
        Command::Ledger { command } => match command {
            LedgerCommand::Inspect { chain } => {
                print!("{}", app.sim.export_log(chain));
            }
            LedgerCommand::Close { count } => {
                app.sim.close_ledgers(count);
                println!(
                    "closed {count}: xrpl at {}, idm at {}",
                    app.sim.xrpl.ledger.close_index(),
                    app.sim.sidechain.ledger.close_index()
                );
            }
        },
        Command::Audit { command } => match command {
            AuditCommand::Balances { verbose } => {
                let audit = app.sim.audit();
                print!("{}", audit.render());
                if verbose {
                    for session in app.sim.issuance_sessions.values() {
                        println!(
                            "issuance {} [{}] issuer journal: {:?}",
                            session.id,
                            session.state.name(),
                            session.issuer_journal.kinds()
                        );
                        println!(
                            "issuance {} subject journal: {:?}",
                            session.id,
                            session.subject_journal.kinds()
                        );
                    }
                    for session in app.sim.verification_sessions.values() {
                        println!(
                            "verification {} [{}] verifier journal: {:?}",
                            session.id,
                            session.state.name(),
                            session.verifier_journal.kinds()
                        );
                        println!(
                            "verification {} subject journal: {:?}",
                            session.id,
                            session.subject_journal.kinds()
                        );
                    }
                }
                if !audit.all_ok() {
                    return Err(("audit found invariant violations".to_string(), 2));
                }
            }
        },
        Command::Privacy { command } => match command {
            PrivacyCommand::Scan { forbidden } => {
                let report = app.sim.privacy_scan(&forbidden);
                print!("{}", report.render());
                if !report.pass {
                    code = 1;
                }
            }
        },
        Command::Scenario { command } => match command {
            ScenarioCommand::Run { id, deny_issuance, deny_verification } => {
                let variant = if deny_issuance {
                    ScenarioVariant::DenyIssuance
                } else if deny_verification {
                    ScenarioVariant::DenyVerification
                } else {
                    ScenarioVariant::Honest
                };
                let outcome = sim_try!(app.sim.run_scenario(id, variant));
                print!("{}", outcome.render());
                if !outcome.ok() {
                    return Err(("scenario invariants violated".to_string(), 2));
                }
            }
        },
        Command::State { command } => match command {
            StateCommand::Save { path } => {
                std::fs::write(&path, app.sim.to_state_text())
                    .map_err(|e| (format!("write {path:?}: {e}"), 1))?;
                println!("state saved to {}", path.display());
            }
            StateCommand::Load { path } => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| (format!("read {path:?}: {e}"), 1))?;
                app.sim =
                    Simulation::from_state_text(&text).map_err(|e| (e.to_string(), 1))?;
                println!("state loaded from {}", path.display());
            }
        },
        Command::Bridge { command } => match command {
            BridgeCommand::In { name, drops } => {
                sim_try!(app.sim.bridge_in(&name, drops));
                println!("bridged {drops} drops to the sidechain for {name}");
            }
            BridgeCommand::Out { name, drops } => {
                sim_try!(app.sim.bridge_out(&name, drops));
                println!("bridged {drops} drops back to the main chain for {name}");
            }
            BridgeCommand::Wrap { name, drops } => {
                sim_try!(app.sim.wrap_balance(&name, drops));
                println!("wrapped {drops} drops as IdXRP for {name}");
            }
            BridgeCommand::Unwrap { name, drops } => {
                sim_try!(app.sim.unwrap_balance(&name, drops));
                println!("unwrapped {drops} drops for {name}");
            }
        },
    }

    app.save().map_err(|e| (e, 1))?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((message, code)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
