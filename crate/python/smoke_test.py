#!/usr/bin/env python3
"""Smoke test for the idmsim Python bindings.

Drives the full protocol from Python: accounts, issuance with consent,
verification, denial economics, the audit invariants, and determinism.

The module is found either on the normal import path (after `maturin
develop`) or straight out of the cargo target directory — run
`cargo build -p idmsim-py [--release]` first in that case.
"""

import shutil
import sys
import tempfile
from pathlib import Path


def import_idmsim():
    try:
        import idmsim  # noqa: F401
        return idmsim
    except ImportError:
        pass
    repo = Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        built = repo / "target" / profile / "libidmsim.so"
        if built.exists():
            staging = Path(tempfile.mkdtemp(prefix="idmsim-py-"))
            shutil.copy(built, staging / "idmsim.so")
            sys.path.insert(0, str(staging))
            import idmsim
            return idmsim
    sys.exit("idmsim module not found: run `maturin develop` or `cargo build -p idmsim-py`")


def main():
    idmsim = import_idmsim()
    print(f"idmsim {idmsim.__version__}")

    # crypto helpers
    public, address = idmsim.keypair_from_seed("01" * 32)
    assert address == "rUaRcsApnVHudsdLD2mut2qCKWq6iLRT2D", address
    signature = idmsim.sign("01" * 32, b"hello ledger")
    assert idmsim.verify(public, b"hello ledger", signature)
    assert not idmsim.verify(public, b"hello ledgers", signature)

    # scripted scenario
    sim = idmsim.Simulation(seed=42)
    outcome = sim.run_scenario(1)
    assert outcome["ok"], outcome["failures"]
    assert outcome["nets"]["federal-income"] == 0
    assert outcome["nets"]["rex"] == -1_400_000
    assert outcome["fee_pool"] == 1_400_000
    assert outcome["reports"][0]["predicate"] == "owns more than 20 hectares of wheat"
    assert outcome["privacy_pass"]
    sim.verify_invariants()
    print("scenario 1:", outcome["nets"])

    # manual flow: issuance with consent, then verification
    sim = idmsim.Simulation(seed=7)
    for name in ("issuer", "alice", "service"):
        sim.create_account(name)
        sim.mirror(name)
        sim.fund(name, 10_000_000)
    sim.register_issuer("issuer")

    session = sim.issue_attestation("issuer", "alice", "age", "is over 18 years of age")
    prompts = sim.inbox("alice")
    assert prompts and prompts[0]["kind"] == "issuance"
    sim.respond_issuance(session, confirm=True)
    assert sim.issuance_state(session) == "reimbursed"

    refs = sim.attestation_refs("alice")
    assert len(refs) == 1
    vsession = sim.request_verification("service", refs[0])
    sim.respond_verification(vsession, approve=True)
    report = sim.verification_report(vsession)
    assert report["issuer_sig_valid"] and report["user_sig_valid"]
    assert report["predicate"] == "is over 18 years of age"
    print("manual flow report:", report["predicate"])

    # the issuer is made whole; the subject pays exactly the gas bill
    assert sim.net_of("issuer") == 0
    assert sim.net_of("service") == 0
    assert sim.net_of("alice") == -1_400_000
    audit = sim.audit()
    assert audit["ok"], audit

    # denial penalizes the issuer
    denial = idmsim.Simulation(seed=9).run_scenario(1, variant="deny-issuance")
    assert denial["ok"], denial["failures"]
    assert denial["nets"]["federal-income"] == -(600_000 + 500_000)
    assert denial["nets"]["rex"] == 600_000
    print("denial economics:", denial["nets"])

    # privacy: the predicate is on chain, the raw attribute is not
    scan = sim.privacy_scan(["is over 18", "23 years old"])
    assert scan["is over 18"] is True
    assert scan["23 years old"] is False

    # determinism: same seed and calls, byte-identical state
    def replayable():
        s = idmsim.Simulation(seed=5)
        s.create_account("a")
        s.mirror("a")
        s.fund("a", 2_000_000)
        s.bridge_in("a", 500_000)
        s.wrap("a", 200_000)
        return s.to_state_text()

    assert replayable() == replayable()

    # state round-trip continues identically
    text = sim.to_state_text()
    clone = idmsim.Simulation.from_state_text(text)
    assert clone.to_state_text() == text
    assert clone.balances("alice") == sim.balances("alice")

    print("smoke test passed")


if __name__ == "__main__":
    main()
