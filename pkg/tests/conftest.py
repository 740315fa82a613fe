"""Shared fixtures: the economies most tests run on."""

import socket

import pytest

from jubilee.core.distributions import TypeDistribution
from jubilee.core.mechanism import MarketParams, RevisionSpec
from jubilee.core.quadrature import QuadratureSpec
from jubilee.models.schemas import VerificationSettings


def make_params(A=2.0, alpha=1.0, n=2, D=2.0, lo=0.0, hi=1.0):
    revision = RevisionSpec.linear(alpha) if alpha > 0 else RevisionSpec()
    return MarketParams(D=D, n=n, A=A, distribution=TypeDistribution.uniform(lo, hi), revision=revision)


@pytest.fixture
def example_params():
    """Two creditors, uniform types on [0, 1], D = 2, A = 2, alpha = 1."""
    return make_params()


@pytest.fixture
def plain_params():
    """Two creditors, uniform types on [0, 1], D = 2, A = 1, no revision."""
    return make_params(A=1.0, alpha=0.0)


@pytest.fixture
def three_creditor_params():
    return make_params(A=2.5, alpha=0.5, n=3, D=3.0)


@pytest.fixture
def fast_settings():
    """Coarser grids that keep the suite quick without loosening tolerances."""
    return VerificationSettings(ic_grid=21, envelope_grid=21, monotonicity_grid=51)


@pytest.fixture
def mc_quad():
    return QuadratureSpec.monte_carlo(samples=20_000, seed=3)


@pytest.fixture
def tcp_endpoints():
    """Loopback endpoints on free ports for every role of a two-creditor session."""
    from jubilee.protocol.messages import session_roles

    sockets = []
    for _ in session_roles(2):
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.bind(("127.0.0.1", 0))
        sockets.append(sock)
    endpoints = {
        role.name: f"127.0.0.1:{sock.getsockname()[1]}" for role, sock in zip(session_roles(2), sockets)
    }
    for sock in sockets:
        sock.close()
    return endpoints
