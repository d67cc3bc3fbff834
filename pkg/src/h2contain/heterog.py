"""Heterogeneous output-containment design pipeline.

Followers may have different dynamics and state dimensions; all share the
output dimension of the leader exosystem (S, R).  Each follower runs a
Luenberger observer, a reference system that synchronizes onto the hull of
the leader states, and an output-regulation feedback built from the
per-agent regulator solution (Pi_i, Gamma_i).  Observer and feedback gains
come from independent per-agent Riccati designs, accepted when every
per-agent cost term stays below gamma / (M * lambdaM^2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import matcore
from .errors import (
    CertificateFailed,
    InvalidSpectrum,
    RegulatorInfeasible,
    ThresholdExceeded,
)
from .graph import LaplacianPartition
from .h2 import ClosedLoopSystem
from .homog import AgentModel, CertificateCheck, CertificateReport, check_regularity

__all__ = [
    "LeaderModel",
    "RegulatorSolution",
    "AgentGains",
    "HeterogGains",
    "solve_regulator",
    "design_heterogeneous",
    "assemble_error_system",
    "agent_closed_loop",
    "verify_heterog_certificate",
]


@dataclass(frozen=True)
class LeaderModel:
    """Leader exosystem dx/dt = S x, z = R x.

    (R, S) must be observable and every eigenvalue of S must lie on the
    imaginary axis: a drifting or decaying exosystem would need an extra
    coupling gain in the reference systems, which this library does not
    implement.
    """

    S: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        s = matcore.as_matrix(self.S, "S")
        r = matcore.as_matrix(self.R, "R")
        if s.shape[0] != s.shape[1]:
            raise ValueError(f"S must be square, got {s.shape}")
        if r.shape[1] != s.shape[0]:
            raise ValueError(f"R has {r.shape[1]} columns, expected {s.shape[0]}")
        if not matcore.is_detectable(r, s):
            raise ValueError("(R, S) is not observable")
        worst = float(np.max(np.abs(np.linalg.eigvals(s).real)))
        if worst > 1e-8 * (1.0 + float(np.linalg.norm(s))):
            raise InvalidSpectrum(
                "leader dynamics must have all eigenvalues on the imaginary axis"
                f" (largest |Re| = {worst:.3e}); off-axis exosystems require an"
                " additional reference-coupling gain that is out of scope here"
            )
        object.__setattr__(self, "S", s)
        object.__setattr__(self, "R", r)

    @property
    def r(self) -> int:
        return self.S.shape[0]

    @property
    def p(self) -> int:
        return self.R.shape[0]


@dataclass(frozen=True)
class RegulatorSolution:
    """Solution (Pi, Gamma) of the per-agent regulator equations."""

    Pi: np.ndarray
    Gamma: np.ndarray
    residual: float


@dataclass(frozen=True)
class AgentGains:
    """Per-agent design output: gains, Riccati solutions, regulator solution."""

    F: np.ndarray
    G: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    Pi: np.ndarray
    Gamma: np.ndarray
    trace_bound: float


@dataclass(frozen=True)
class HeterogGains:
    """Per-agent designs plus the shared acceptance threshold."""

    agents: tuple
    gamma: float
    threshold: float
    delta: float
    eta: float
    accepted: bool
    rejected_agents: tuple

    def require_accepted(self) -> "HeterogGains":
        if not self.accepted:
            raise ThresholdExceeded(self.rejected_agents, self.threshold)
        return self


def solve_regulator(agent: AgentModel, leader: LeaderModel,
                    rtol: float = 1e-8) -> RegulatorSolution:
    """Solve A Pi + B Gamma = Pi S and C2 Pi + D2 Gamma = R for (Pi, Gamma).

    Both matrix equations are stacked into one linear system in the
    column-major vectorizations of Pi (n x r) and Gamma (m x r) and solved
    by minimum-norm least squares.  A residual above
    ``rtol * (1 + ||R||_F)`` means the agent cannot reproduce the leader
    output and raises ``RegulatorInfeasible``.
    """
    if agent.p != leader.p:
        raise ValueError(
            f"agent output dimension {agent.p} differs from leader's {leader.p}"
        )
    n, m, r = agent.n, agent.m, leader.r
    eye_r = np.eye(r)
    dyn = np.hstack([
        np.kron(eye_r, agent.A) - np.kron(leader.S.T, np.eye(n)),
        np.kron(eye_r, agent.B),
    ])
    out = np.hstack([np.kron(eye_r, agent.C2), np.kron(eye_r, agent.D2)])
    coef = np.vstack([dyn, out])
    rhs = np.concatenate([np.zeros(n * r), leader.R.flatten(order="F")])
    sol, residual = matcore.solve_lsq(coef, rhs)
    if residual > rtol * (1.0 + float(np.linalg.norm(leader.R))):
        raise RegulatorInfeasible(
            f"regulator equations are inconsistent (residual {residual:.3e});"
            " the agent cannot track the leader output"
        )
    pi = sol[: n * r].reshape((n, r), order="F")
    gamma = sol[n * r:].reshape((m, r), order="F")
    return RegulatorSolution(Pi=pi, Gamma=gamma, residual=residual)


def _validate_group(agents, leader: LeaderModel, partition: LaplacianPartition):
    if len(agents) != partition.num_followers:
        raise ValueError(
            f"{len(agents)} agents for {partition.num_followers} followers"
        )
    for i, agent in enumerate(agents, start=1):
        if agent.p != leader.p:
            raise ValueError(
                f"agent {i} output dimension {agent.p} differs from leader's"
                f" {leader.p}"
            )


def design_heterogeneous(
    agents,
    leader: LeaderModel,
    partition: LaplacianPartition,
    gamma: float,
    delta: float = 1e-3,
    eta: float = 1e-3,
    strict_identity: bool = True,
) -> HeterogGains:
    """Per-agent observer/feedback design certified against gamma.

    For each agent, P_i solves A'P + PA - P B R2^-1 B' P + C2'C2 + delta I = 0
    and Q_i solves A Q + Q A' - Q C1' R1^-1 C1 Q + E E' + eta I = 0, giving
    F_i = -R2^-1 B' P_i and G_i = -Q_i C1' R1^-1.  The per-agent cost term is
    tr(C1 Q P Q C1' R1^-1) + tr(C2 Q C2'); the design is accepted iff every
    term is below gamma / (M lambdaM^2).  A rejected design is still
    returned, flagged with the offending agents.
    """
    if gamma <= 0.0 or delta <= 0.0 or eta <= 0.0:
        raise ValueError("gamma, delta, eta must be positive")
    _validate_group(agents, leader, partition)

    m_followers = partition.num_followers
    threshold = gamma / (m_followers * partition.lambdaM ** 2)

    designs = []
    rejected = []
    for index, agent in enumerate(agents):
        agent.require_stabilizable_detectable()
        check_regularity(agent, strict_identity=strict_identity)
        regulator = solve_regulator(agent, leader)
        r1_inv = np.linalg.inv(agent.D1 @ agent.D1.T)
        r2_inv = np.linalg.inv(agent.D2.T @ agent.D2)
        n = agent.n
        p_mat, _ = matcore.solve_care(
            agent.A,
            agent.B @ r2_inv @ agent.B.T,
            agent.C2.T @ agent.C2 + delta * np.eye(n),
        )
        q_mat, _ = matcore.solve_care(
            agent.A.T,
            agent.C1.T @ r1_inv @ agent.C1,
            agent.E @ agent.E.T + eta * np.eye(n),
        )
        trace_bound = (
            float(np.trace(agent.C1 @ q_mat @ p_mat @ q_mat @ agent.C1.T @ r1_inv))
            + float(np.trace(agent.C2 @ q_mat @ agent.C2.T))
        )
        if trace_bound >= threshold:
            rejected.append(index)
        designs.append(AgentGains(
            F=-(r2_inv @ agent.B.T @ p_mat),
            G=-q_mat @ agent.C1.T @ r1_inv,
            P=p_mat, Q=q_mat,
            Pi=regulator.Pi, Gamma=regulator.Gamma,
            trace_bound=trace_bound,
        ))
    return HeterogGains(
        agents=tuple(designs), gamma=gamma, threshold=threshold,
        delta=delta, eta=eta,
        accepted=not rejected, rejected_agents=tuple(rejected),
    )


def _blockdiag(mats) -> np.ndarray:
    return scipy.linalg.block_diag(*mats)


def assemble_error_system(
    agents,
    leader: LeaderModel,
    partition: LaplacianPartition,
    gains: HeterogGains,
) -> ClosedLoopSystem:
    """Controlled error system of the heterogeneous network.

    State ordering: observer errors (x - w) per agent, regulation errors
    (x - Pi v) per agent, then reference synchronization errors per agent.
    """
    _validate_group(agents, leader, partition)
    m = partition.num_followers
    r = leader.r
    p = leader.p
    a = _blockdiag([agent.A for agent in agents])
    b = _blockdiag([agent.B for agent in agents])
    c1 = _blockdiag([agent.C1 for agent in agents])
    c2 = _blockdiag([agent.C2 for agent in agents])
    d1 = _blockdiag([agent.D1 for agent in agents])
    d2 = _blockdiag([agent.D2 for agent in agents])
    e = _blockdiag([agent.E for agent in agents])
    f = _blockdiag([design.F for design in gains.agents])
    g = _blockdiag([design.G for design in gains.agents])
    pi = _blockdiag([design.Pi for design in gains.agents])

    n_total = a.shape[0]
    sync = np.kron(np.eye(m), leader.S) - np.kron(partition.L1, np.eye(r))
    a_o = np.block([
        [a + g @ c1, np.zeros((n_total, n_total)), np.zeros((n_total, m * r))],
        [-b @ f, a + b @ f, pi],
        [np.zeros((m * r, 2 * n_total)), sync],
    ])
    e_o = np.vstack([e + g @ d1, e, np.zeros((m * r, e.shape[1]))])
    l1p = np.kron(partition.L1, np.eye(p))
    c_o = np.hstack([-l1p @ (d2 @ f), l1p @ (c2 + d2 @ f), np.kron(np.eye(m), leader.R)])
    return ClosedLoopSystem(
        A=a_o, E=e_o, C=c_o,
        state_labels=(
            f"{m} observer errors, {m} regulation errors,"
            f" {m} reference sync errors ({r} each)"
        ),
    )


def agent_closed_loop(agent: AgentModel, design: AgentGains) -> ClosedLoopSystem:
    """Decoupled per-agent observer loop whose H2 cost certifies the network."""
    bf = agent.B @ design.F
    gc1 = design.G @ agent.C1
    a = np.block([
        [agent.A, bf],
        [-gc1, agent.A + bf + gc1],
    ])
    e = np.vstack([agent.E, -design.G @ agent.D1])
    c = np.hstack([agent.C2, agent.D2 @ design.F])
    return ClosedLoopSystem(A=a, E=e, C=c, state_labels="agent state, observer state")


def verify_heterog_certificate(
    agents,
    leader: LeaderModel,
    partition: LaplacianPartition,
    gains: HeterogGains,
    gamma: float | None = None,
    strict: bool = True,
) -> CertificateReport:
    """Re-check stability and threshold conditions for a heterogeneous design."""
    if gamma is None:
        gamma = gains.gamma
    threshold = gamma / (partition.num_followers * partition.lambdaM ** 2)
    checks = []
    for i, (agent, design) in enumerate(zip(agents, gains.agents), start=1):
        worst = matcore.max_real_eig(agent.A + agent.B @ design.F)
        checks.append(CertificateCheck(
            name=f"feedback_stability_agent_{i}", value=worst, limit=0.0,
            passed=worst < 0.0,
        ))
        worst = matcore.max_real_eig(agent.A + design.G @ agent.C1)
        checks.append(CertificateCheck(
            name=f"observer_stability_agent_{i}", value=worst, limit=0.0,
            passed=worst < 0.0,
        ))
        r1_inv = np.linalg.inv(agent.D1 @ agent.D1.T)
        recomputed = (
            float(np.trace(agent.C1 @ design.Q @ design.P @ design.Q
                           @ agent.C1.T @ r1_inv))
            + float(np.trace(agent.C2 @ design.Q @ agent.C2.T))
        )
        gap = abs(recomputed - design.trace_bound)
        scale = 1e-10 * (1.0 + abs(recomputed))
        checks.append(CertificateCheck(
            name=f"trace_recompute_agent_{i}", value=gap, limit=scale,
            passed=gap <= scale,
        ))
        checks.append(CertificateCheck(
            name=f"threshold_agent_{i}", value=design.trace_bound,
            limit=threshold, passed=design.trace_bound < threshold,
        ))

    sync = (np.kron(np.eye(partition.num_followers), leader.S)
            - np.kron(partition.L1, np.eye(leader.r)))
    worst = matcore.max_real_eig(sync)
    checks.append(CertificateCheck(
        name="reference_sync_stability", value=worst, limit=0.0, passed=worst < 0.0,
    ))
    clp = assemble_error_system(agents, leader, partition, gains)
    worst = matcore.max_real_eig(clp.A)
    checks.append(CertificateCheck(
        name="network_stability", value=worst, limit=0.0, passed=worst < 0.0,
    ))

    report = CertificateReport(checks=tuple(checks))
    if strict and not report.ok:
        failed = ", ".join(
            f"{c.name} (value {c.value:.6g}, limit {c.limit:.6g})"
            for c in report.failures()
        )
        raise CertificateFailed(f"certificate violated: {failed}", report=report)
    return report
