from __future__ import annotations

from core.consensus.client import Client
from core.domain.interfaces import Authenticator, Node, NodeEnv
from core.infrastructure.crypto import KeyedAuthenticator, NullAuthenticator
from core.simulation.engine import NodeEnvironment, Simulation
from core.simulation.scenario import Scenario


def test_authenticators_satisfy_protocol():
    assert isinstance(KeyedAuthenticator(4, 3, b"k"), Authenticator)
    assert isinstance(NullAuthenticator(4, 3), Authenticator)


def test_fake_and_simulated_environments_satisfy_protocol(fake_env):
    assert isinstance(fake_env, NodeEnv)
    sim = Simulation(Scenario())
    assert isinstance(NodeEnvironment(sim, "r0"), NodeEnv)


def test_state_machines_satisfy_node(cluster, auth, fake_env):
    assert all(isinstance(r, Node) for r in cluster.replicas)
    assert isinstance(Client(0, 4, 1, auth, fake_env), Node)
