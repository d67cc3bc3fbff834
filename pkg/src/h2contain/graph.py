"""Communication topology for leader-follower networks.

Followers carry labels 1..M and exchange information over a connected,
simple, undirected subgraph; leaders carry labels M+1..N and only send,
never receive.  The graph Laplacian then has zero rows for the leaders
and partitions into the follower-follower block ``L1`` (symmetric positive
definite) and the follower-leader block ``L2``.  Each row of ``-L1^-1 L2``
is a set of convex-combination weights over the leaders, which is what
turns leader states into per-follower hull targets.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .errors import (
    DimensionMismatch,
    EdgeIntoLeader,
    FollowersDisconnected,
    IsolatedLeader,
    SelfLoop,
)

__all__ = [
    "CommGraph",
    "LaplacianPartition",
    "build_graph",
    "laplacian_partition",
    "hull_point",
]


@dataclass(frozen=True)
class CommGraph:
    """Validated leader-follower topology (1-based node labels)."""

    num_followers: int
    num_leaders: int
    follower_edges: tuple  # canonical (i, j) with i < j, both followers
    leader_edges: tuple    # (leader, follower), directed leader -> follower

    @property
    def num_agents(self) -> int:
        return self.num_followers + self.num_leaders

    def adjacency(self) -> np.ndarray:
        """N x N adjacency with a[i, j] = 1 iff node j+1 sends to node i+1."""
        n = self.num_agents
        adj = np.zeros((n, n))
        for i, j in self.follower_edges:
            adj[i - 1, j - 1] = 1.0
            adj[j - 1, i - 1] = 1.0
        for leader, follower in self.leader_edges:
            adj[follower - 1, leader - 1] = 1.0
        return adj


@dataclass(frozen=True)
class LaplacianPartition:
    """Laplacian blocks and the spectral data used throughout the design."""

    L: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    hull_coeffs: np.ndarray = field(repr=False)

    @property
    def num_followers(self) -> int:
        return self.L1.shape[0]

    @property
    def num_leaders(self) -> int:
        return self.L2.shape[1]

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambdaM(self) -> float:
        return float(self.eigenvalues[-1])


def build_graph(num_followers: int, num_leaders: int, edges) -> CommGraph:
    """Validate a topology against the standing connectivity assumptions.

    ``edges`` is an iterable of 1-based label pairs.  A pair of follower
    labels is an undirected follower edge (either order); a pair
    (leader, follower) is a directed information link from the leader.
    Anything that would let a leader receive information is rejected.
    """
    if num_followers < 1 or num_leaders < 1:
        raise ValueError("need at least one follower and one leader")
    n = num_followers + num_leaders

    follower_edges = set()
    leader_edges = set()
    for edge in edges:
        u, v = int(edge[0]), int(edge[1])
        if not (1 <= u <= n and 1 <= v <= n):
            raise ValueError(f"edge ({u}, {v}) uses labels outside 1..{n}")
        if u == v:
            raise SelfLoop(f"edge ({u}, {v}) is a self-loop")
        u_leader = u > num_followers
        v_leader = v > num_followers
        if v_leader:
            kind = "leader-leader" if u_leader else "follower-leader"
            raise EdgeIntoLeader(
                f"{kind} edge ({u}, {v}) terminates at leader {v};"
                " leaders receive no information"
            )
        if u_leader:
            leader_edges.add((u, v))
        else:
            follower_edges.add((min(u, v), max(u, v)))

    # follower subgraph connectivity (breadth-first from node 1)
    if num_followers > 1:
        neighbors = {i: set() for i in range(1, num_followers + 1)}
        for i, j in follower_edges:
            neighbors[i].add(j)
            neighbors[j].add(i)
        seen = {1}
        frontier = [1]
        while frontier:
            node = frontier.pop()
            for other in neighbors[node]:
                if other not in seen:
                    seen.add(other)
                    frontier.append(other)
        if len(seen) != num_followers:
            missing = sorted(set(range(1, num_followers + 1)) - seen)
            raise FollowersDisconnected(
                f"follower subgraph is disconnected; unreachable followers {missing}"
            )

    linked = {leader for leader, _ in leader_edges}
    for leader in range(num_followers + 1, n + 1):
        if leader not in linked:
            raise IsolatedLeader(f"leader {leader} has no edge to any follower")

    return CommGraph(
        num_followers=num_followers,
        num_leaders=num_leaders,
        follower_edges=tuple(sorted(follower_edges)),
        leader_edges=tuple(sorted(leader_edges)),
    )


def laplacian_partition(graph: CommGraph) -> LaplacianPartition:
    """Laplacian L = D - A, its (L1, L2) partition, spectrum, and hull weights."""
    adj = graph.adjacency()
    lap = np.diag(adj.sum(axis=1)) - adj
    m = graph.num_followers
    l1 = lap[:m, :m]
    l2 = lap[:m, m:]

    eigenvalues, u = matcore.eig_sym(l1)
    if eigenvalues[0] <= 1e-12:
        raise FollowersDisconnected(
            f"L1 is not positive definite (min eigenvalue {eigenvalues[0]:.3e})"
        )
    hull_coeffs = -np.linalg.solve(l1, l2)

    row_gap = np.max(np.abs(hull_coeffs.sum(axis=1) - 1.0))
    if row_gap > 1e-10:
        raise ValueError(f"hull coefficient rows do not sum to 1 (gap {row_gap:.3e})")
    if hull_coeffs.min() < -1e-10:
        raise ValueError(
            f"hull coefficients have a negative entry ({hull_coeffs.min():.3e})"
        )

    return LaplacianPartition(
        L=lap, L1=l1, L2=l2, eigenvalues=eigenvalues, U=u, hull_coeffs=hull_coeffs
    )


def hull_point(partition: LaplacianPartition, leader_states) -> np.ndarray:
    """Map stacked leader states to each follower's instantaneous hull target.

    ``leader_states`` stacks (N - M) leader vectors of a common size k; the
    result stacks the M convex combinations ``(hull_coeffs kron I_k) @ states``.
    A trailing batch axis is allowed for whole trajectories.
    """
    states = np.asarray(leader_states, dtype=float)
    vector = states.ndim == 1
    if vector:
        states = states.reshape(-1, 1)
    num_leaders = partition.num_leaders
    if states.ndim != 2 or states.shape[0] % num_leaders != 0:
        raise DimensionMismatch(
            f"leader block of length {states.shape[0]} is not divisible by"
            f" {num_leaders} leaders"
        )
    k = states.shape[0] // num_leaders
    out = np.kron(partition.hull_coeffs, np.eye(k)) @ states
    return out.ravel() if vector else out
