"""Time-domain simulation of the controlled agent networks.

The full network (leaders, followers, protocol states) is one LTI system
driven by the stacked follower disturbances, so a simulation run assembles
the network matrices once and steps them with classical RK4 at a fixed
step.  Disturbances are held constant over each step (sampled at the step
start), which makes every step the exact RK4 update of an affine system
and keeps runs bit-reproducible for a given seed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NonFiniteState
from .graph import LaplacianPartition
from .heterog import HeterogGains, LeaderModel
from .homog import AgentModel, HomogGains

__all__ = [
    "DisturbanceSpec",
    "SimulationTrace",
    "ContainmentMetrics",
    "simulate_homogeneous",
    "simulate_heterogeneous",
    "containment_metrics",
    "write_trace_csv",
]

DIVERGENCE_LIMIT = 1e9


@dataclass(frozen=True)
class DisturbanceSpec:
    """Disturbance model: none, or seeded uniform piecewise-constant noise.

    ``bounded-white`` draws i.i.d. uniform values on [-amplitude, amplitude]
    per channel, held constant over ``sample_dt`` (defaults to the simulation
    step).  The same (seed, sample_dt) always reproduces the same signal.
    """

    kind: str = "zero"
    amplitude: float = 0.0
    seed: int = 0
    sample_dt: float | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "bounded-white"):
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be nonnegative")
        if self.sample_dt is not None and self.sample_dt <= 0.0:
            raise ValueError("sample_dt must be positive")

    def realize(self, channels: int, times: np.ndarray, dt: float) -> np.ndarray:
        """Sampled disturbance values at the given step-start times."""
        if self.kind == "zero" or self.amplitude == 0.0:
            return np.zeros((times.size, channels))
        hold = self.sample_dt if self.sample_dt is not None else dt
        num_holds = int(np.floor(times[-1] / hold + 1e-9)) + 1
        rng = np.random.default_rng(self.seed)
        values = rng.uniform(-self.amplitude, self.amplitude,
                             size=(num_holds, channels))
        idx = np.minimum((times / hold + 1e-9).astype(int), num_holds - 1)
        return values[idx]


@dataclass(frozen=True)
class SimulationTrace:
    """Time-indexed record of one network run (uniform grid, flat stacking)."""

    times: np.ndarray
    follower_states: np.ndarray       # (K, total follower state dim)
    leader_states: np.ndarray         # (K, total leader state dim)
    protocol_states: np.ndarray       # (K, total observer/protocol state dim)
    reference_states: np.ndarray | None   # (K, M*r) reference systems, or None
    performance_output: np.ndarray    # (K, M*p) graph-weighted disagreement
    hull_trajectory: np.ndarray       # (K, M*k) per-follower hull targets
    tracked_trajectory: np.ndarray    # (K, M*k) the signal that must reach the hull
    reference_hull: np.ndarray | None  # (K, M*r) hull of leader states, or None
    disturbance_record: np.ndarray    # (K, total disturbance dim)


@dataclass(frozen=True)
class ContainmentMetrics:
    """Endpoint containment diagnostics of a trace."""

    final_hull_error: float
    final_eps_norm: float
    decay_ratio: float


def _stacked(x0, count: int, dim: int, name: str) -> np.ndarray:
    arr = np.asarray(x0, dtype=float)
    if arr.shape == (count, dim):
        arr = arr.reshape(count * dim)
    if arr.shape != (count * dim,):
        raise DimensionMismatch(
            f"{name} must stack {count} vectors of size {dim}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _rk4_operators(a: np.ndarray, e: np.ndarray, dt: float):
    """One-step RK4 operators for dx/dt = a x + e d with d held over the step."""
    ah = a * dt
    ah2 = ah @ ah
    phi = np.eye(a.shape[0]) + ah + ah2 / 2.0 + ah2 @ ah / 6.0 + ah2 @ ah2 / 24.0
    psi = (dt * (np.eye(a.shape[0]) + ah / 2.0 + ah2 / 6.0 + ah2 @ ah / 24.0)) @ e
    return phi, psi


def _integrate(a, e, z0, d_record, dt) -> np.ndarray:
    steps = d_record.shape[0] - 1
    phi, psi = _rk4_operators(a, e, dt)
    states = np.empty((steps + 1, z0.size))
    states[0] = z0
    z = z0
    for k in range(steps):
        z = phi @ z + psi @ d_record[k]
        if np.abs(z).max() > DIVERGENCE_LIMIT:
            raise NonFiniteState(
                f"state magnitude exceeded {DIVERGENCE_LIMIT:.0e} at t ="
                f" {(k + 1) * dt:.6g}"
            )
        states[k + 1] = z
    return states


def _grid(T: float, dt: float) -> np.ndarray:
    if dt <= 0.0 or T < dt:
        raise ValueError("need dt > 0 and T >= dt")
    steps = int(round(T / dt))
    return np.arange(steps + 1) * dt


def _per_follower(stacked: np.ndarray, m: int) -> np.ndarray:
    # (K, m*k) -> (K, m, k)
    return stacked.reshape(stacked.shape[0], m, -1)


def _mix(coupling: np.ndarray, blocks: np.ndarray) -> np.ndarray:
    # row-mix (K, m, k) agent blocks through an (m', m) coupling matrix
    return np.einsum("ij,kjl->kil", coupling, blocks)


def simulate_homogeneous(
    model: AgentModel,
    partition: LaplacianPartition,
    gains: HomogGains,
    x0_followers,
    x0_leaders,
    w0=None,
    disturbance: DisturbanceSpec | None = None,
    T: float = 30.0,
    dt: float = 1e-3,
) -> SimulationTrace:
    """Integrate the homogeneous network under the designed protocol.

    Leaders run autonomously; each follower applies u_i = F w_i where the
    protocol state w_i is driven by relative protocol disagreements through
    F and by relative measured outputs through G.  The trace records the
    follower/leader/protocol states, the performance output, the hull of
    the leader states as the per-follower target, and the disturbance.
    """
    if disturbance is None:
        disturbance = DisturbanceSpec()
    m = partition.num_followers
    num_leaders = partition.num_leaders
    n = model.n
    times = _grid(T, dt)

    xl0 = _stacked(x0_leaders, num_leaders, n, "x0_leaders")
    xf0 = _stacked(x0_followers, m, n, "x0_followers")
    w0 = np.zeros(m * n) if w0 is None else _stacked(w0, m, n, "w0")

    # network state z = [x_l; x_f; w]
    nl, nf = num_leaders * n, m * n
    sl = slice(0, nl)
    sf = slice(nl, nl + nf)
    sw = slice(nl + nf, nl + 2 * nf)
    bf = model.B @ gains.F
    gc1 = gains.G @ model.C1
    a_net = np.zeros((nl + 2 * nf, nl + 2 * nf))
    a_net[sl, sl] = np.kron(np.eye(num_leaders), model.A)
    a_net[sf, sf] = np.kron(np.eye(m), model.A)
    a_net[sf, sw] = np.kron(np.eye(m), bf)
    a_net[sw, sl] = np.kron(-partition.L2, gc1)
    a_net[sw, sf] = np.kron(-partition.L1, gc1)
    a_net[sw, sw] = np.kron(np.eye(m), model.A + gc1) + np.kron(partition.L1, bf)
    e_net = np.zeros((nl + 2 * nf, m * model.q))
    e_net[sf, :] = np.kron(np.eye(m), model.E)
    e_net[sw, :] = np.kron(-partition.L1, gains.G @ model.D1)

    d_record = disturbance.realize(m * model.q, times, dt)
    states = _integrate(a_net, e_net, np.concatenate([xl0, xf0, w0]), d_record, dt)

    xl = states[:, sl]
    xf = states[:, sf]
    w = states[:, sw]
    u3 = _per_follower(w, m) @ gains.F.T
    zf3 = _per_follower(xf, m) @ model.C2.T + u3 @ model.D2.T
    zl3 = _per_follower(xl, num_leaders) @ model.C2.T
    eps3 = _mix(partition.L1, zf3) + _mix(partition.L2, zl3)
    hull3 = _mix(partition.hull_coeffs, _per_follower(xl, num_leaders))

    k = states.shape[0]
    return SimulationTrace(
        times=times,
        follower_states=xf,
        leader_states=xl,
        protocol_states=w,
        reference_states=None,
        performance_output=eps3.reshape(k, -1),
        hull_trajectory=hull3.reshape(k, -1),
        tracked_trajectory=xf,
        reference_hull=None,
        disturbance_record=d_record,
    )


def simulate_heterogeneous(
    agents,
    leader: LeaderModel,
    partition: LaplacianPartition,
    gains: HeterogGains,
    x0_followers,
    x0_leaders,
    w0=None,
    v0=None,
    disturbance: DisturbanceSpec | None = None,
    T: float = 30.0,
    dt: float = 1e-3,
) -> SimulationTrace:
    """Integrate the heterogeneous network under the designed protocol.

    Each follower runs a Luenberger observer w_i, a reference system v_i
    synchronizing onto the hull of the leader states, and applies
    u_i = F_i (w_i - Pi_i v_i) + Gamma_i v_i.  The tracked signal is the
    follower output z_f; the hull target is formed from the leader outputs.
    """
    if disturbance is None:
        disturbance = DisturbanceSpec()
    m = partition.num_followers
    num_leaders = partition.num_leaders
    if len(agents) != m:
        raise DimensionMismatch(f"{len(agents)} agents for {m} followers")
    r, p = leader.r, leader.p
    times = _grid(T, dt)

    dims = [agent.n for agent in agents]
    nf = sum(dims)
    nl = num_leaders * r
    if np.asarray(x0_followers, dtype=float).size != nf:
        raise DimensionMismatch(
            f"x0_followers must stack states of sizes {dims}"
        )
    xf0 = np.asarray(x0_followers, dtype=float).reshape(nf)
    xl0 = _stacked(x0_leaders, num_leaders, r, "x0_leaders")
    w0 = np.zeros(nf) if w0 is None else np.asarray(w0, dtype=float).reshape(nf)
    v0 = np.zeros(m * r) if v0 is None else _stacked(v0, m, r, "v0")

    bd = scipy.linalg.block_diag
    a = bd(*[agent.A for agent in agents])
    b = bd(*[agent.B for agent in agents])
    c1 = bd(*[agent.C1 for agent in agents])
    c2 = bd(*[agent.C2 for agent in agents])
    d1 = bd(*[agent.D1 for agent in agents])
    d2 = bd(*[agent.D2 for agent in agents])
    e = bd(*[agent.E for agent in agents])
    f = bd(*[design.F for design in gains.agents])
    g = bd(*[design.G for design in gains.agents])
    feedfwd = bd(*[design.Gamma - design.F @ design.Pi for design in gains.agents])

    # network state z = [x_l; x_f; w; v]
    total = nl + 2 * nf + m * r
    sl = slice(0, nl)
    sf = slice(nl, nl + nf)
    sw = slice(nl + nf, nl + 2 * nf)
    sv = slice(nl + 2 * nf, total)
    a_net = np.zeros((total, total))
    a_net[sl, sl] = np.kron(np.eye(num_leaders), leader.S)
    a_net[sf, sf] = a
    a_net[sf, sw] = b @ f
    a_net[sf, sv] = b @ feedfwd
    a_net[sw, sf] = -g @ c1
    a_net[sw, sw] = a + g @ c1 + b @ f
    a_net[sw, sv] = b @ feedfwd
    a_net[sv, sl] = np.kron(-partition.L2, np.eye(r))
    a_net[sv, sv] = np.kron(np.eye(m), leader.S) - np.kron(partition.L1, np.eye(r))
    e_net = np.zeros((total, e.shape[1]))
    e_net[sf, :] = e
    e_net[sw, :] = -g @ d1

    d_record = disturbance.realize(e.shape[1], times, dt)
    states = _integrate(a_net, e_net,
                        np.concatenate([xl0, xf0, w0, v0]), d_record, dt)

    xl = states[:, sl]
    xf = states[:, sf]
    w = states[:, sw]
    v = states[:, sv]
    u = w @ f.T + v @ feedfwd.T
    zf = xf @ c2.T + u @ d2.T
    zl3 = _per_follower(xl, num_leaders) @ leader.R.T
    eps3 = _mix(partition.L1, _per_follower(zf, m)) + _mix(partition.L2, zl3)
    hull_z = _mix(partition.hull_coeffs, zl3)
    hull_v = _mix(partition.hull_coeffs, _per_follower(xl, num_leaders))

    k = states.shape[0]
    return SimulationTrace(
        times=times,
        follower_states=xf,
        leader_states=xl,
        protocol_states=w,
        reference_states=v,
        performance_output=eps3.reshape(k, -1),
        hull_trajectory=hull_z.reshape(k, -1),
        tracked_trajectory=zf,
        reference_hull=hull_v.reshape(k, -1),
        disturbance_record=d_record,
    )


def containment_metrics(trace: SimulationTrace) -> ContainmentMetrics:
    """Endpoint hull error, performance-output norm, and error decay ratio."""
    gap = trace.tracked_trajectory - trace.hull_trajectory
    initial = float(np.linalg.norm(gap[0]))
    final = float(np.linalg.norm(gap[-1]))
    if initial > 0.0:
        decay = final / initial
    else:
        decay = 0.0 if final == 0.0 else float("inf")
    return ContainmentMetrics(
        final_hull_error=final,
        final_eps_norm=float(np.linalg.norm(trace.performance_output[-1])),
        decay_ratio=decay,
    )


def _columns(trace: SimulationTrace):
    groups = [
        ("xf", trace.follower_states),
        ("xl", trace.leader_states),
        ("w", trace.protocol_states),
    ]
    if trace.reference_states is not None:
        groups.append(("v", trace.reference_states))
    groups.append(("eps", trace.performance_output))
    groups.append(("omega", trace.hull_trajectory))
    if trace.tracked_trajectory is not trace.follower_states:
        groups.append(("zf", trace.tracked_trajectory))
    if trace.reference_hull is not None:
        groups.append(("omega_v", trace.reference_hull))
    groups.append(("d", trace.disturbance_record))
    return groups


def write_trace_csv(trace: SimulationTrace, path) -> None:
    """Write the trace as RFC-4180 CSV: header row, time column first."""
    groups = _columns(trace)
    header = ["time"]
    for prefix, arr in groups:
        header.extend(f"{prefix}_{j + 1}" for j in range(arr.shape[1]))
    data = np.hstack([trace.times.reshape(-1, 1)] + [arr for _, arr in groups])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", newline="\r\n",
               header=",".join(header), comments="")
