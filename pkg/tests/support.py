"""Shared builders for randomized test systems and network designs."""
from __future__ import annotations

import numpy as np

L1_GOLDEN = np.array([
    [4.0, -1.0, -1.0, 0.0, -1.0, -1.0],
    [-1.0, 3.0, -1.0, 0.0, 0.0, 0.0],
    [-1.0, -1.0, 4.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, -1.0, 4.0, -1.0, 0.0],
    [-1.0, 0.0, 0.0, -1.0, 3.0, -1.0],
    [-1.0, 0.0, 0.0, 0.0, -1.0, 3.0],
])

from h2contain import (
    AgentModel,
    LeaderModel,
    build_graph,
    design_heterogeneous,
    design_homogeneous,
    laplacian_partition,
)


def random_hurwitz(rng, n, min_decay=0.3, max_decay=1.3):
    """Random stable matrix: shift a dense random matrix left of the axis."""
    a = rng.normal(size=(n, n))
    shift = float(np.max(np.linalg.eigvals(a).real)) + rng.uniform(min_decay, max_decay)
    return a - shift * np.eye(n)


def random_spd(rng, n, semidefinite=False):
    b = rng.normal(size=(n, n))
    out = b @ b.T
    if not semidefinite:
        out = out + 0.1 * np.eye(n)
    return out


def random_valid_graph(rng, max_followers=8, max_leaders=3, min_followers=2):
    """Random topology satisfying the validity assumptions."""
    m = int(rng.integers(min_followers, max_followers + 1))
    leaders = int(rng.integers(1, max_leaders + 1))
    edges = []
    order = rng.permutation(m) + 1
    for a, b in zip(order[:-1], order[1:]):  # random spanning chain
        edges.append((int(a), int(b)))
    for _ in range(int(rng.integers(0, m))):
        a, b = rng.choice(m, size=2, replace=False) + 1
        edges.append((int(a), int(b)))
    for leader in range(m + 1, m + leaders + 1):
        targets = rng.choice(m, size=int(rng.integers(1, 3)), replace=False) + 1
        for target in targets:
            edges.append((leader, int(target)))
    return build_graph(m, leaders, edges)


def random_homog_model(rng, n_max=3):
    """Random plant satisfying the strict regularity structure.

    Measured output is scalar with D1 = [1 0 0] and a disturbance whose
    first channel never enters the state (D1 E' = 0, D1 D1' = 1); the
    performance output has a zero bottom row with D2 = [0 0 1]' (D2'C2 = 0,
    D2'D2 = 1).
    """
    n = int(rng.integers(2, n_max + 1))
    while True:
        a = rng.normal(size=(n, n))
        b = rng.normal(size=(n, 1))
        c1 = np.hstack([np.ones((1, 1)), rng.normal(size=(1, n - 1))])
        c2 = np.vstack([rng.normal(size=(2, n)), np.zeros((1, n))])
        d1 = np.array([[1.0, 0.0, 0.0]])
        d2 = np.array([[0.0], [0.0], [1.0]])
        e = np.hstack([np.zeros((n, 1)), 0.3 * rng.normal(size=(n, 2))])
        model = AgentModel(A=a, B=b, C1=c1, C2=c2, D1=d1, D2=d2, E=e)
        try:
            return model.require_stabilizable_detectable()
        except ValueError:
            continue


def random_homog_design(rng, max_followers=5):
    """Random plant + topology with gains accepted at a comfortable gamma."""
    model = random_homog_model(rng)
    graph = random_valid_graph(rng, max_followers=max_followers)
    part = laplacian_partition(graph)
    probe = design_homogeneous(model, part, gamma=1.0)
    gains = design_homogeneous(model, part, gamma=1.5 * probe.bound + 1e-9)
    assert gains.accepted
    return model, part, gains


def heterog_leader():
    return LeaderModel(S=[[0.0, 1.0], [0.0, 0.0]], R=[[1.0, 1.0], [0.0, 1.0]])


def heterog_agent(b, a=2.0, c=1.0, e=(0.2, 0.0, 0.2)):
    """Third-order follower from the structured family with exact regulation.

    The input gain and the velocity-coupling term share the value ``b``,
    which is exactly what makes the regulator equations solvable against
    the double-integrator leader.
    """
    return AgentModel(
        A=[[0.0, 1.0, 0.0], [0.0, 0.0, c], [0.0, -b, -a]],
        B=[[0.0], [0.0], [b]],
        C1=[[1.0, 2.0, 1.0]],
        C2=[[1.0, 1.0, 0.0], [0.0, 0.0, 0.0]],
        D1=[[1.0, 0.0]],
        D2=[[0.0], [1.0]],
        E=[[0.0, e[0]], [0.0, e[1]], [0.0, e[2]]],
    )


def random_heterog_family(rng, max_followers=4, max_leaders=2):
    graph = random_valid_graph(rng, max_followers=max_followers,
                               max_leaders=max_leaders)
    agents = tuple(
        heterog_agent(
            b=float(rng.uniform(0.5, 3.0)),
            a=float(rng.uniform(1.0, 3.0)),
            c=float(rng.uniform(0.5, 2.0)),
            e=tuple(rng.uniform(-0.5, 0.5, size=3)),
        )
        for _ in range(graph.num_followers)
    )
    return agents, heterog_leader(), laplacian_partition(graph)


def random_heterog_design(rng, max_followers=4, max_leaders=2):
    agents, leader, part = random_heterog_family(rng, max_followers, max_leaders)
    probe = design_heterogeneous(agents, leader, part, gamma=1.0)
    worst = max(d.trace_bound for d in probe.agents)
    gamma = 1.5 * worst * part.num_followers * part.lambdaM ** 2
    gains = design_heterogeneous(agents, leader, part, gamma=gamma)
    assert gains.accepted
    return agents, leader, part, gains
