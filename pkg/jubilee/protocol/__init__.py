"""Secret-shared settlement without a trusted party."""

from jubilee.protocol.circuit import SettlementCircuit
from jubilee.protocol.fixedpoint import FixedPointCodec, Share, reconstruct, share, share_input
from jubilee.protocol.messages import Message, MessageKind, PartyRole
from jubilee.protocol.session import ProtocolTranscript, ideal_run, mpc_run, run_party, session_id_for

__all__ = [
    "FixedPointCodec",
    "Message",
    "MessageKind",
    "PartyRole",
    "ProtocolTranscript",
    "SettlementCircuit",
    "Share",
    "ideal_run",
    "mpc_run",
    "reconstruct",
    "run_party",
    "session_id_for",
    "share",
    "share_input",
]
