"""Tests for protocol sessions: the trusted-party oracle, in-process and TCP runs."""

import json
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from jubilee.core.mechanism import OutcomeFlag, TypeProfile, settle
from jubilee.errors import EXIT_OK, EXIT_TIMEOUT, ConfigError, MalformedMessageError, PremiseError, SupportError
from jubilee.models.schemas import ProtocolSettings
from jubilee.protocol.circuit import SettlementCircuit
from jubilee.protocol.fixedpoint import PRIME
from jubilee.protocol.messages import MessageKind
from jubilee.protocol.parties import ROUND_OUTCOME
from jubilee.protocol.session import ProtocolTranscript, ideal_run, mpc_run, run_party
from tests.conftest import make_params

REPO_ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def example_run(example_params):
    return mpc_run(example_params, TypeProfile.of(0.3, 0.6), ProtocolSettings(seed=1))


class TestIdealRun:
    def test_matches_settle(self, example_params):
        profile = TypeProfile.of(0.3, 0.6)
        outcome, transcript = ideal_run(example_params, profile)
        assert outcome == settle(example_params, profile)
        assert transcript.backend == "ideal"

    def test_messages(self, example_params):
        _, transcript = ideal_run(example_params, TypeProfile.of(0.3, 0.6))
        kinds = [m.kind for m in transcript.messages]
        assert kinds.count(MessageKind.REPORT) == 2
        assert kinds.count(MessageKind.OUTCOME) == 3
        assert all(m.receiver == "trusted-party" for m in transcript.messages[:2])


class TestSecretSharedRun:
    def test_example_outcome(self, example_run):
        outcome, transcript = example_run
        assert outcome.solvent
        assert outcome.transfers == pytest.approx((0.5, 0.5), abs=1e-5)
        assert outcome.forgiveness == pytest.approx((0.5, 0.5), abs=1e-5)
        assert outcome.pivotal == ()
        assert transcript.backend == "mpc"
        assert len(transcript.opened_transfers()) == 6

    def test_bankrupt_opens_no_transfers(self):
        params = make_params(A=1.0)
        outcome, transcript = mpc_run(params, TypeProfile.of(0.99, 0.99), ProtocolSettings(seed=2))
        assert not outcome.solvent
        assert outcome.transfers == (0.0, 0.0)
        assert transcript.opened_transfers() == []
        assert any("no transfer values" in note for note in transcript.leakage_notes)

    def test_tie_is_flagged(self, plain_params):
        outcome, _ = mpc_run(plain_params, TypeProfile.of(0.25, 0.25), ProtocolSettings(seed=3))
        assert outcome.solvent
        assert outcome.has_flag(OutcomeFlag.QUANTIZATION_BAND)

    def test_clamped_high(self):
        params = make_params(A=3.0, alpha=0.0)
        outcome, _ = mpc_run(params, TypeProfile.of(0.1, 0.2), ProtocolSettings(seed=4))
        assert outcome.has_flag(OutcomeFlag.PIVOTAL_CLAMPED_HIGH)
        assert outcome.transfers == pytest.approx((1.0, 1.0), abs=1e-5)

    def test_deterministic_for_a_seed(self, example_params):
        profile = TypeProfile.of(0.3, 0.6)
        first = mpc_run(example_params, profile, ProtocolSettings(seed=5))[1]
        second = mpc_run(example_params, profile, ProtocolSettings(seed=5))[1]
        assert first.to_jsonl() == second.to_jsonl()

    def test_different_seeds_differ(self, example_params):
        profile = TypeProfile.of(0.3, 0.6)
        first = mpc_run(example_params, profile, ProtocolSettings(seed=5))[1]
        second = mpc_run(example_params, profile, ProtocolSettings(seed=6))[1]
        assert first.session_id != second.session_id
        assert first.messages[0].body != second.messages[0].body

    def test_input_outside_support(self, example_params):
        with pytest.raises(SupportError):
            mpc_run(example_params, TypeProfile.of(0.3, 1.6))

    def test_three_creditors_unsupported(self, three_creditor_params):
        with pytest.raises(PremiseError):
            mpc_run(three_creditor_params, TypeProfile.of(0.1, 0.2, 0.3))


class TestPrivacy:
    def test_inputs_never_travel_in_the_clear(self, example_run, example_params):
        _, transcript = example_run
        codec = SettlementCircuit.from_params(example_params).codec
        secrets_ = {str(codec.encode(0.3)), str(codec.encode(0.6))}
        for message in transcript.messages:
            assert not secrets_ & set(message.body.get("values", []))

    def test_evaluators_never_see_the_outcome(self, example_run):
        _, transcript = example_run
        for evaluator in ("evaluator-1", "evaluator-2"):
            assert all(m.round != ROUND_OUTCOME for m in transcript.messages_to(evaluator))

    def test_affine_disclosure_noted(self, plain_params):
        _, transcript = mpc_run(plain_params, TypeProfile.of(0.1, 0.2), ProtocolSettings(seed=7))
        assert any("affine" in note for note in transcript.leakage_notes)

    def test_constant_transfer_discloses_nothing(self, example_run):
        _, transcript = example_run
        assert not any("affine" in note for note in transcript.leakage_notes)


class TestTranscript:
    def test_jsonl_round_trip(self, example_run):
        _, transcript = example_run
        loaded = ProtocolTranscript.from_jsonl(transcript.to_jsonl())
        assert loaded.to_jsonl() == transcript.to_jsonl()
        assert loaded.outcome == transcript.outcome

    def test_last_line_is_outcome(self, example_run):
        _, transcript = example_run
        record = json.loads(transcript.to_jsonl().splitlines()[-1])
        assert record["record"] == "outcome"
        assert record["backend"] == "mpc"

    def test_records_config_hash_and_seed(self, example_params):
        _, transcript = mpc_run(
            example_params, TypeProfile.of(0.3, 0.6), ProtocolSettings(seed=4), config_hash="ab" * 32
        )
        record = json.loads(transcript.to_jsonl().splitlines()[-1])
        assert record["config_hash"] == "ab" * 32
        assert record["seed"] == 4
        loaded = ProtocolTranscript.from_jsonl(transcript.to_jsonl())
        assert (loaded.config_hash, loaded.seed) == ("ab" * 32, 4)

    def test_save_and_load(self, example_run, tmp_path):
        _, transcript = example_run
        path = tmp_path / "session.jsonl"
        transcript.save(path)
        assert ProtocolTranscript.load(path).session_id == transcript.session_id

    def test_empty(self):
        with pytest.raises(MalformedMessageError):
            ProtocolTranscript.from_jsonl("")

    def test_missing_outcome_record(self, example_run):
        _, transcript = example_run
        lines = transcript.to_jsonl().splitlines()[:-1]
        with pytest.raises(MalformedMessageError):
            ProtocolTranscript.from_jsonl("\n".join(lines))


class TestTcp:
    def test_in_process(self, example_params, tcp_endpoints):
        settings = ProtocolSettings(transport="tcp", endpoints=tcp_endpoints, seed=1, timeout_s=5.0)
        outcome, transcript = mpc_run(example_params, TypeProfile.of(0.3, 0.6), settings)
        assert outcome.solvent
        assert outcome.transfers == pytest.approx((0.5, 0.5), abs=1e-5)
        local = mpc_run(example_params, TypeProfile.of(0.3, 0.6), ProtocolSettings(seed=1))[1]
        assert transcript.to_jsonl() == local.to_jsonl()

    def test_parties_write_their_views(self, example_params, tcp_endpoints, tmp_path):
        settings = ProtocolSettings(transport="tcp", endpoints=tcp_endpoints, seed=2, timeout_s=10.0)
        inputs = {"creditor-1": 0.3, "creditor-2": 0.6}
        roles = ["creditor-1", "creditor-2", "evaluator-1", "evaluator-2", "debtor"]
        with ThreadPoolExecutor(max_workers=len(roles)) as pool:
            codes = list(
                pool.map(
                    lambda role: run_party(
                        role, example_params, settings, tmp_path, inputs.get(role), config_hash="cd" * 32
                    ),
                    roles,
                )
            )
        assert codes == [EXIT_OK] * len(roles)
        for role in roles:
            document = json.loads((tmp_path / f"{role}.outcome.json").read_text())
            assert document["config_hash"] == "cd" * 32
            assert document["seed"] == 2
            view = ProtocolTranscript.load(tmp_path / f"{role}.transcript.jsonl")
            assert (view.config_hash, view.seed) == ("cd" * 32, 2)
        debtor = json.loads((tmp_path / "debtor.outcome.json").read_text())
        assert debtor["outcome"]["transfers"] == pytest.approx([0.5, 0.5], abs=1e-5)

    def test_lonely_evaluator_times_out(self, example_params, tcp_endpoints, tmp_path):
        settings = ProtocolSettings(transport="tcp", endpoints=tcp_endpoints, seed=0, timeout_s=0.3)
        assert run_party("evaluator-1", example_params, settings, tmp_path) == EXIT_TIMEOUT
        assert not list(tmp_path.iterdir())

    def test_party_needs_tcp(self, example_params, tmp_path):
        with pytest.raises(ConfigError):
            run_party("debtor", example_params, ProtocolSettings(), tmp_path)

    def test_party_needs_a_session(self, example_params, tcp_endpoints, tmp_path):
        settings = ProtocolSettings(transport="tcp", endpoints=tcp_endpoints, seed=None)
        with pytest.raises(ConfigError):
            run_party("debtor", example_params, settings, tmp_path)

    def test_creditor_needs_input(self, example_params, tcp_endpoints, tmp_path):
        settings = ProtocolSettings(transport="tcp", endpoints=tcp_endpoints)
        with pytest.raises(ConfigError):
            run_party("creditor-1", example_params, settings, tmp_path)

    def test_unknown_role(self, example_params, tcp_endpoints, tmp_path):
        settings = ProtocolSettings(transport="tcp", endpoints=tcp_endpoints)
        with pytest.raises(ConfigError):
            run_party("auditor-1", example_params, settings, tmp_path)


@pytest.mark.slow
class TestManySessions:
    SESSIONS = 1000

    @pytest.fixture(scope="class")
    def sessions(self):
        params = make_params(A=1.5, alpha=0.5)
        circuit = SettlementCircuit.from_params(params)
        rng = np.random.default_rng(2024)
        runs = []
        for seed, theta in enumerate(rng.random((self.SESSIONS, 2))):
            profile = TypeProfile.of(*theta)
            outcome, transcript = mpc_run(params, profile, ProtocolSettings(seed=seed))
            ideal, _ = ideal_run(params, profile)
            runs.append((theta, outcome, ideal, transcript))
        return circuit, runs

    def test_agrees_with_trusted_party(self, sessions):
        circuit, runs = sessions
        checked = 0
        for theta, outcome, ideal, _ in runs:
            if circuit.in_quantization_band(*theta):
                continue
            checked += 1
            assert outcome.solvent == ideal.solvent
            assert outcome.transfers == pytest.approx(ideal.transfers, abs=1e-5)
        assert checked > 0.99 * self.SESSIONS

    @pytest.fixture(scope="class")
    def fixed_input_shares(self):
        """Share creditor-1 sends evaluator-1 in sessions that differ only in their seed."""
        params = make_params(A=1.5, alpha=0.5)
        profile = TypeProfile.of(0.3, 0.6)
        shares = []
        for seed in range(self.SESSIONS):
            _, transcript = mpc_run(params, profile, ProtocolSettings(seed=seed))
            (share,) = [
                m.field_values()[0]
                for m in transcript.messages
                if m.kind is MessageKind.SHARE and m.sender == "creditor-1" and m.receiver == "evaluator-1"
            ]
            shares.append(share)
        return shares

    def test_evaluator_shares_look_uniform(self, fixed_input_shares):
        counts = np.bincount([v * 10 // PRIME for v in fixed_input_shares], minlength=10)
        assert stats.chisquare(counts).pvalue > 0.001

    def test_evaluator_shares_do_not_repeat(self, fixed_input_shares):
        assert len(set(fixed_input_shares)) == self.SESSIONS


@pytest.mark.slow
def test_five_processes(tmp_path, tcp_endpoints):
    config = {"protocol": {"transport": "tcp", "endpoints": tcp_endpoints, "seed": 3, "timeout_s": 30.0}}
    config_path = tmp_path / "session.json"
    config_path.write_text(json.dumps(config))
    out = tmp_path / "out"
    out.mkdir()

    base = [sys.executable, "-m", "jubilee", "--quiet", "--config", str(config_path), "--out", str(out), "protocol"]
    commands = [
        [*base, "--role", "creditor", "--index", "1", "--input", "0.3"],
        [*base, "--role", "creditor", "--index", "2", "--input", "0.6"],
        [*base, "--role", "evaluator", "--index", "1"],
        [*base, "--role", "evaluator", "--index", "2"],
        [*base, "--role", "debtor"],
    ]
    processes = [subprocess.Popen(cmd, cwd=REPO_ROOT) for cmd in commands]
    codes = [p.wait(timeout=90) for p in processes]
    assert codes == [EXIT_OK] * 5

    document = json.loads((out / "debtor.outcome.json").read_text())
    assert document["seed"] == 3
    assert len(document["config_hash"]) == 64
    assert document["outcome"]["solvent"] is True
    assert document["outcome"]["transfers"] == pytest.approx([0.5, 0.5], abs=1e-5)
    creditor_view = ProtocolTranscript.load(out / "creditor-1.transcript.jsonl")
    assert creditor_view.outcome.transfers == pytest.approx((0.5, 0.5), abs=1e-5)
