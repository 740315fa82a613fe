"""
Protocol sessions: the trusted-party oracle, the secret-shared run and the
single-party entry point for distributed deployments.
"""

from __future__ import annotations

import json
import logging
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

from jubilee.core.mechanism import MarketParams, Outcome, OutcomeFlag, TypeProfile, check_profile, settle
from jubilee.errors import (
    EXIT_OK,
    ConfigError,
    JubileeError,
    MalformedMessageError,
    PartyTimeoutError,
    ProtocolError,
)
from jubilee.io import atomic_write_text
from jubilee.models.schemas import ProtocolSettings
from jubilee.protocol.circuit import SettlementCircuit
from jubilee.protocol.fixedpoint import Evaluator, FieldRandomness
from jubilee.protocol.messages import TRUSTED_PARTY, Message, MessageKind, PartyRole, decode_payload, session_roles
from jubilee.protocol.parties import CreditorParty, DebtorParty, EvaluatorParty, Party
from jubilee.protocol.transport import LocalNetwork, TcpTransport, Transport

logger = logging.getLogger(__name__)

Backend = Literal["ideal", "mpc"]


def session_id_for(seed: int | None) -> str:
    """Deterministic id for seeded sessions, random otherwise."""
    return f"jubilee-{seed:016x}" if seed is not None else f"jubilee-{uuid.uuid4().hex}"


class ProtocolTranscript(BaseModel):
    """Ordered message log of one session together with its outcome."""

    model_config = ConfigDict(frozen=True)

    session_id: str
    backend: Backend
    n: int = Field(default=2, ge=2)
    messages: tuple[Message, ...] = ()
    outcome: Outcome
    leakage_notes: tuple[str, ...] = ()
    config_hash: str | None = None
    seed: int | None = None

    @classmethod
    def ordered(cls, messages: list[Message], **fields: Any) -> ProtocolTranscript:
        n = fields.get("n", 2)
        return cls(messages=tuple(sorted(messages, key=lambda m: m.sort_key(n))), **fields)

    def messages_to(self, receiver: str) -> list[Message]:
        return [m for m in self.messages if m.receiver == receiver]

    def opened_transfers(self) -> list[Message]:
        """Transfer reveals; empty for a bankrupt session."""
        from jubilee.protocol.parties import ROUND_TRANSFER

        return [m for m in self.messages if m.kind is MessageKind.REVEAL and m.round == ROUND_TRANSFER]

    def to_jsonl(self) -> str:
        lines = [json.dumps(m.to_wire(), sort_keys=True, separators=(",", ":")) for m in self.messages]
        record = {
            "record": "outcome",
            "session": self.session_id,
            "backend": self.backend,
            "n": self.n,
            "outcome": self.outcome.model_dump(mode="json"),
            "leakage_notes": list(self.leakage_notes),
            "config_hash": self.config_hash,
            "seed": self.seed,
        }
        lines.append(json.dumps(record, sort_keys=True, separators=(",", ":")))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> ProtocolTranscript:
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise MalformedMessageError("empty transcript")
        try:
            record = json.loads(lines[-1])
        except json.JSONDecodeError as e:
            raise MalformedMessageError(f"transcript outcome line is not JSON: {e}") from e
        if record.get("record") != "outcome":
            raise MalformedMessageError("transcript must end with its outcome record")
        messages = [decode_payload(line.encode("utf-8")) for line in lines[:-1]]
        return cls(
            session_id=record["session"],
            backend=record["backend"],
            n=record.get("n", 2),
            messages=tuple(messages),
            outcome=Outcome.model_validate(record["outcome"]),
            leakage_notes=tuple(record.get("leakage_notes", ())),
            config_hash=record.get("config_hash"),
            seed=record.get("seed"),
        )

    def save(self, path: Path) -> None:
        atomic_write_text(path, self.to_jsonl())

    @classmethod
    def load(cls, path: Path) -> ProtocolTranscript:
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))


def ideal_run(
    params: MarketParams, profile: TypeProfile, session_id: str = "ideal"
) -> tuple[Outcome, ProtocolTranscript]:
    """
    Settle through a trusted party that sees every report.

    The transcript records the reports and instructions the trusted party
    exchanges; it serves as the oracle for the secret-shared run.
    """
    outcome = settle(params, profile)
    creditors = [PartyRole.creditor(i + 1).name for i in range(params.n)]
    messages = [
        Message(
            session=session_id,
            sender=name,
            receiver=TRUSTED_PARTY,
            kind=MessageKind.REPORT,
            body={"round": 1, "theta": theta},
        )
        for name, theta in zip(creditors, profile.theta, strict=True)
    ]
    instruction = {"round": 2, "outcome": outcome.model_dump(mode="json")}
    for receiver in (*creditors, PartyRole.debtor().name):
        messages.append(
            Message(session=session_id, sender=TRUSTED_PARTY, receiver=receiver, kind=MessageKind.OUTCOME, body=instruction)
        )
    transcript = ProtocolTranscript.ordered(
        messages,
        session_id=session_id,
        backend="ideal",
        n=params.n,
        outcome=outcome,
        leakage_notes=("trusted party learns every reported type",),
    )
    return outcome, transcript


def _randomness(seed: int | None, role: PartyRole) -> FieldRandomness:
    if seed is None:
        return FieldRandomness(None)
    rank = [r.name for r in session_roles(2)].index(role.name)
    return FieldRandomness([seed, rank])


def build_party(
    role: PartyRole,
    circuit: SettlementCircuit,
    transport: Transport,
    seed: int | None,
    theta: float | None = None,
) -> Party:
    """Instantiate the state machine for ``role``."""
    match role.kind.value:
        case "creditor":
            if theta is None:
                raise ConfigError(f"{role} needs an input type")
            assert role.index is not None
            if role.index not in (1, 2):
                raise ConfigError(f"the secret-shared session has creditor-1 and creditor-2, not {role}")
            return CreditorParty(role.index, theta, circuit, transport, _randomness(seed, role))
        case "evaluator":
            return EvaluatorParty(Evaluator(role.name), circuit, transport, _randomness(seed, role))
        case _:
            return DebtorParty(circuit, transport)


def _run_parties(parties: list[Party], on_failure: Any) -> list[Outcome]:
    errors: list[BaseException] = []

    def run(party: Party) -> Outcome | None:
        try:
            return party.run()
        except BaseException as e:
            errors.append(e)
            logger.debug("%s failed: %s", party.name, e)
            on_failure(e if isinstance(e, ProtocolError) else ProtocolError(f"{party.name} failed: {e}"))
            return None

    with ThreadPoolExecutor(max_workers=len(parties), thread_name_prefix="party") as pool:
        results = list(pool.map(run, parties))
    if errors:
        # a timeout elsewhere is usually a consequence of the first real failure
        primary = [e for e in errors if not isinstance(e, PartyTimeoutError)]
        raise (primary or errors)[0]
    return [r for r in results if r is not None]


def mpc_run(
    params: MarketParams,
    profile: TypeProfile,
    settings: ProtocolSettings | None = None,
    config_hash: str | None = None,
) -> tuple[Outcome, ProtocolTranscript]:
    """
    Settle without a trusted party: two creditors, two evaluators, one debtor.

    All five parties run as threads of this process, over the in-process
    network or over TCP on ``settings.endpoints``.
    ``config_hash`` and the protocol seed are recorded in the transcript.
    """
    settings = settings or ProtocolSettings()
    check_profile(params, profile)
    circuit = SettlementCircuit.from_params(params, settings.fractional_bits)
    session = settings.session_id or session_id_for(settings.seed)
    roles = session_roles(2)

    transports: list[Transport]
    if settings.transport == "tcp":
        transports = [TcpTransport(r.name, session, settings.endpoints, settings.timeout_s) for r in roles]
    else:
        network = LocalNetwork(session, settings.timeout_s)
        transports = [network.endpoint(r.name) for r in roles]

    def fail_all(error: ProtocolError) -> None:
        for transport in transports:
            transport.inbox.fail(error)

    inputs = dict(zip((r.name for r in roles[:2]), profile.theta, strict=True))
    try:
        for transport in transports:
            transport.start()
        parties = [
            build_party(r, circuit, t, settings.seed, inputs.get(r.name)) for r, t in zip(roles, transports, strict=True)
        ]
        results = _run_parties(parties, fail_all)
    finally:
        for transport in transports:
            transport.close()

    outcome = results[-1]
    if circuit.in_quantization_band(*profile.theta):
        flags = {*outcome.flags, OutcomeFlag.QUANTIZATION_BAND}
        outcome = outcome.model_copy(update={"flags": tuple(sorted(flags, key=lambda f: f.value))})
    debtor = parties[-1]
    assert isinstance(debtor, DebtorParty)
    sent = [m for party in parties for m in party.log if m.sender == party.name]
    transcript = ProtocolTranscript.ordered(
        sent,
        session_id=session,
        backend="mpc",
        outcome=outcome,
        leakage_notes=tuple(debtor.notes),
        config_hash=config_hash,
        seed=settings.seed,
    )
    return outcome, transcript


def run_party(
    role: str,
    params: MarketParams,
    settings: ProtocolSettings,
    out_dir: Path,
    theta: float | None = None,
    config_hash: str | None = None,
) -> int:
    """
    Take part in one TCP session as ``role`` and return an exit code.

    Writes ``<role>.transcript.jsonl`` (this party's view) and
    ``<role>.outcome.json`` under ``out_dir``.
    """
    try:
        party_role = PartyRole.parse(role)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if settings.transport != "tcp":
        raise ConfigError("a single party can only join a session over the tcp transport")
    if settings.seed is None and settings.session_id is None:
        raise ConfigError("unseeded sessions need protocol.session_id so every party joins the same session")

    circuit = SettlementCircuit.from_params(params, settings.fractional_bits)
    session = settings.session_id or session_id_for(settings.seed)
    transport = TcpTransport(party_role.name, session, settings.endpoints, settings.timeout_s)
    party = build_party(party_role, circuit, transport, settings.seed, theta)

    try:
        with transport:
            outcome = party.run()
    except JubileeError as e:
        logger.error("%s: %s", party_role, e)
        return e.exit_code

    notes: tuple[str, ...] = tuple(party.notes) if isinstance(party, DebtorParty) else ()
    if not notes:
        final = [m for m in party.log if m.kind is MessageKind.OUTCOME and "leakage_notes" in m.body]
        notes = tuple(final[0].body["leakage_notes"]) if final else ()
    view = ProtocolTranscript.ordered(
        party.log,
        session_id=session,
        backend="mpc",
        outcome=outcome,
        leakage_notes=notes,
        config_hash=config_hash,
        seed=settings.seed,
    )
    view.save(out_dir / f"{party_role}.transcript.jsonl")
    document = {
        "config_hash": config_hash,
        "seed": settings.seed,
        "session": session,
        "role": party_role.name,
        "outcome": outcome.model_dump(mode="json"),
    }
    atomic_write_text(out_dir / f"{party_role}.outcome.json", json.dumps(document, indent=2) + "\n")
    logger.info("%s finished session %s", party_role, session)
    return EXIT_OK
