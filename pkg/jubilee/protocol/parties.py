"""
Protocol parties as sequential state machines.

Rounds:

1. each creditor splits its encoded type between the evaluators
2. the evaluators exchange mask contributions
3. the evaluators open the masked solvency value to the debtor
4. the debtor announces the decision to the evaluators
5. (solvent only) masked clamping values are opened, bits announced
6. (solvent only) transfer shares are opened to the debtor and each creditor
7. the debtor sends the outcome to the creditors
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Any

from jubilee.core.mechanism import Outcome, OutcomeFlag
from jubilee.errors import MalformedMessageError, SupportError
from jubilee.protocol.circuit import MASK_BOUND, SettlementCircuit, combine_mask
from jubilee.protocol.fixedpoint import Evaluator, FieldRandomness, reconstruct, share_input
from jubilee.protocol.messages import Message, MessageKind, PartyRole, field_body
from jubilee.protocol.transport import Transport

logger = logging.getLogger(__name__)

ROUND_SHARE = 1
ROUND_MASK = 2
ROUND_SOLVENCY = 3
ROUND_DECISION = 4
ROUND_CLAMP = 5
ROUND_TRANSFER = 6
ROUND_OUTCOME = 7

E1 = PartyRole.evaluator(1).name
E2 = PartyRole.evaluator(2).name
DEBTOR = PartyRole.debtor().name
CREDITORS = (PartyRole.creditor(1).name, PartyRole.creditor(2).name)
MASK_COUNT = 3


def leakage_notes(circuit: SettlementCircuit, solvent: bool, clamped_high: tuple[bool, ...] = ()) -> list[str]:
    """What each party learns beyond its own input and output."""
    notes = ["debtor learns the sign and a mask-scaled magnitude of tau - (theta_1 + theta_2)"]
    if not solvent:
        notes.append("bankrupt: no transfer values were opened")
        return notes
    bits = ", ".join(f"creditor-{i + 1}={int(b)}" for i, b in enumerate(clamped_high))
    notes.append(f"debtor and evaluators learn the clamped-high bit of each creditor ({bits})")
    for i, clamped in enumerate(clamped_high):
        _, slope = circuit.economy.transfer_coefficients(clamped)
        other = 2 - i
        if slope != 0.0:
            notes.append(
                f"transfer t_{i + 1} is affine in theta_{other} with slope {slope:g}: "
                f"creditor-{i + 1} and the debtor can recover theta_{other} from it"
            )
    return notes


class Party(ABC):
    """One participant; keeps every message it sends or receives."""

    def __init__(self, role: PartyRole, transport: Transport) -> None:
        self.role = role
        self.transport = transport
        self.log: list[Message] = []

    @property
    def name(self) -> str:
        return self.role.name

    def send(self, receiver: str, kind: MessageKind, body: dict[str, Any]) -> None:
        message = Message(session=self.transport.session, sender=self.name, receiver=receiver, kind=kind, body=body)
        self.transport.send(message)
        self.log.append(message)

    def receive(self, round_number: int, sender: str, kind: MessageKind) -> Message:
        message = self.transport.receive(round_number, sender, kind)
        self.log.append(message)
        return message

    @abstractmethod
    def run(self) -> Outcome:
        """Take part in one session and return this party's view of the outcome."""


class CreditorParty(Party):
    def __init__(
        self,
        index: int,
        theta: float,
        circuit: SettlementCircuit,
        transport: Transport,
        randomness: FieldRandomness,
    ) -> None:
        super().__init__(PartyRole.creditor(index), transport)
        econ = circuit.economy
        if not econ.lo <= theta <= econ.hi:
            raise SupportError(f"{self.name} input {theta} outside support [{econ.lo}, {econ.hi}]")
        self.index = index
        self.theta = theta
        self.circuit = circuit
        self.randomness = randomness

    def run(self) -> Outcome:
        first, second = share_input(self.theta, self.circuit.codec, self.randomness)
        self.send(E1, MessageKind.SHARE, field_body(ROUND_SHARE, [first.value]))
        self.send(E2, MessageKind.SHARE, field_body(ROUND_SHARE, [second.value]))
        logger.debug("%s shared its input", self.name)

        final = self.receive(ROUND_OUTCOME, DEBTOR, MessageKind.OUTCOME)
        outcome = Outcome.model_validate(final.body["outcome"])
        if outcome.solvent:
            shares = [self.receive(ROUND_TRANSFER, e, MessageKind.REVEAL).field_values()[0] for e in (E1, E2)]
            own = self.circuit.decode_transfer(reconstruct(*shares))
            announced = outcome.transfers[self.index - 1]
            if abs(own - announced) > self.circuit.transfer_tolerance():
                raise MalformedMessageError(
                    f"{self.name} reconstructed transfer {own:.9g}, debtor announced {announced:.9g}"
                )
        return outcome


class EvaluatorParty(Party):
    def __init__(
        self,
        evaluator: Evaluator,
        circuit: SettlementCircuit,
        transport: Transport,
        randomness: FieldRandomness,
    ) -> None:
        super().__init__(PartyRole.parse(evaluator.value), transport)
        self.evaluator = evaluator
        self.peer = E2 if evaluator is Evaluator.E1 else E1
        self.circuit = circuit
        self.randomness = randomness

    def _masks(self) -> list[int]:
        own = [self.randomness.below(MASK_BOUND) for _ in range(MASK_COUNT)]
        self.send(self.peer, MessageKind.MASK, field_body(ROUND_MASK, own))
        theirs = self.receive(ROUND_MASK, self.peer, MessageKind.MASK).field_values()
        if len(theirs) != MASK_COUNT:
            raise MalformedMessageError(f"{self.peer} sent {len(theirs)} mask contributions, expected {MASK_COUNT}")
        return [combine_mask(a, b) for a, b in zip(own, theirs, strict=True)]

    def run(self) -> Outcome:
        circuit, ev = self.circuit, self.evaluator
        x1, x2 = (self.receive(ROUND_SHARE, c, MessageKind.SHARE).field_values()[0] for c in CREDITORS)
        solvency_mask, *clamp_masks = self._masks()

        opened = circuit.masked(circuit.solvency_share(ev, x1, x2), solvency_mask)
        self.send(DEBTOR, MessageKind.REVEAL, field_body(ROUND_SOLVENCY, [opened]))
        solvent = bool(self.receive(ROUND_DECISION, DEBTOR, MessageKind.OUTCOME).body["solvent"])
        if not solvent:
            return Outcome(solvent=False, pivotal=(), transfers=(), forgiveness=())

        others = (x2, x1)
        masked = [circuit.masked(circuit.clamp_share(ev, x), m) for x, m in zip(others, clamp_masks, strict=True)]
        self.send(DEBTOR, MessageKind.REVEAL, field_body(ROUND_CLAMP, masked))
        clamped = [bool(b) for b in self.receive(ROUND_CLAMP, DEBTOR, MessageKind.OUTCOME).body["clamped_high"]]

        shares = [circuit.transfer_share(ev, x, c) for x, c in zip(others, clamped, strict=True)]
        self.send(DEBTOR, MessageKind.REVEAL, field_body(ROUND_TRANSFER, shares))
        for creditor, value in zip(CREDITORS, shares, strict=True):
            self.send(creditor, MessageKind.REVEAL, field_body(ROUND_TRANSFER, [value]))
        return Outcome(solvent=True, pivotal=(), transfers=(), forgiveness=())


class DebtorParty(Party):
    """Session coordinator: opens masked values and announces decisions."""

    def __init__(self, circuit: SettlementCircuit, transport: Transport) -> None:
        super().__init__(PartyRole.debtor(), transport)
        self.circuit = circuit
        self.notes: list[str] = []

    def _open(self, round_number: int) -> list[int]:
        first, second = (self.receive(round_number, e, MessageKind.REVEAL).field_values() for e in (E1, E2))
        if len(first) != len(second):
            raise MalformedMessageError(f"evaluators opened {len(first)} and {len(second)} values in round {round_number}")
        return [reconstruct(a, b) for a, b in zip(first, second, strict=True)]

    def run(self) -> Outcome:
        circuit = self.circuit
        (opened,) = self._open(ROUND_SOLVENCY)
        solvent = circuit.non_negative(opened)
        for e in (E1, E2):
            self.send(e, MessageKind.OUTCOME, {"round": ROUND_DECISION, "solvent": solvent})
        logger.info("session %s: %s", self.transport.session, "solvent" if solvent else "bankrupt")

        d = circuit.economy.d
        flags: list[OutcomeFlag] = []
        if solvent:
            clamped = tuple(circuit.non_negative(v) for v in self._open(ROUND_CLAMP))
            for e in (E1, E2):
                self.send(e, MessageKind.OUTCOME, {"round": ROUND_CLAMP, "clamped_high": list(clamped)})
            transfers = tuple(circuit.decode_transfer(v) for v in self._open(ROUND_TRANSFER))
            forgiveness = tuple(d - t for t in transfers)
            if any(t > d for t in transfers):
                flags.append(OutcomeFlag.TRANSFER_EXCEEDS_DEBT)
            if any(clamped):
                flags.append(OutcomeFlag.PIVOTAL_CLAMPED_HIGH)
        else:
            clamped = ()
            transfers = forgiveness = (0.0, 0.0)

        outcome = Outcome(
            solvent=solvent,
            pivotal=(),
            transfers=transfers,
            forgiveness=forgiveness,
            flags=tuple(sorted(flags, key=lambda f: f.value)),
        )
        self.notes = leakage_notes(circuit, solvent, clamped)
        body = {"round": ROUND_OUTCOME, "outcome": outcome.model_dump(mode="json"), "leakage_notes": self.notes}
        for creditor in CREDITORS:
            self.send(creditor, MessageKind.OUTCOME, body)
        return outcome
