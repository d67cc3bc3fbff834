"""H2 norm evaluation of assembled closed-loop error systems.

The authoritative path solves the controllability Gramian; an independent
impulse-response quadrature (RK4 state propagation + composite Simpson)
exists as a cross-check oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import HorizonTooShort, NotHurwitz

__all__ = ["ClosedLoopSystem", "H2Result", "h2_norm", "h2_norm_quadrature"]


@dataclass(frozen=True)
class ClosedLoopSystem:
    """State-space triple (A, E, C) of a disturbance-to-performance channel."""

    A: np.ndarray
    E: np.ndarray
    C: np.ndarray
    state_labels: str = ""

    def __post_init__(self):
        a = matcore.as_matrix(self.A, "A")
        e = matcore.as_matrix(self.E, "E")
        c = matcore.as_matrix(self.C, "C")
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"A must be square, got {a.shape}")
        if e.shape[0] != a.shape[0] or c.shape[1] != a.shape[0]:
            raise ValueError(
                f"inconsistent shapes: A {a.shape}, E {e.shape}, C {c.shape}"
            )
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "E", e)
        object.__setattr__(self, "C", c)

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    def is_stable(self, margin: float = 0.0) -> bool:
        return matcore.is_hurwitz(self.A, margin)


@dataclass(frozen=True)
class H2Result:
    """H2 norm of the impulse response C exp(A t) E, with cost = norm**2."""

    norm: float
    cost: float
    gramian_trace: float
    method: str


def h2_norm(clp: ClosedLoopSystem) -> H2Result:
    """Gramian-based H2 norm: sqrt(tr(C X C')) with A X + X A' + E E' = 0."""
    if not clp.is_stable():
        raise NotHurwitz("closed-loop matrix is not Hurwitz; the H2 norm is infinite")
    x, _ = matcore.solve_lyapunov(clp.A, clp.E @ clp.E.T)
    trace = float(np.trace(clp.C @ x @ clp.C.T))
    cost = max(trace, 0.0)
    return H2Result(norm=float(np.sqrt(cost)), cost=cost, gramian_trace=trace,
                    method="gramian")


def h2_norm_quadrature(
    clp: ClosedLoopSystem,
    horizon: float | None = None,
    dt: float | None = None,
    tail_rtol: float = 1e-6,
) -> H2Result:
    """Independent H2 estimate by integrating the impulse-response energy.

    Every column of E is propagated through dx/dt = A x with classical RK4
    and ||C x(t)||^2 is accumulated with composite Simpson weights.  The
    default horizon covers eight of the slowest time constants with 40000
    steps.  Raises ``HorizonTooShort`` when the estimated tail exceeds
    ``tail_rtol`` of the accumulated integral.
    """
    if not clp.is_stable():
        raise NotHurwitz("closed-loop matrix is not Hurwitz; the H2 norm is infinite")
    decay = abs(matcore.max_real_eig(clp.A))
    if horizon is None:
        horizon = 8.0 / decay
    if dt is None:
        dt = horizon / 40000.0
    steps = int(round(horizon / dt))
    steps += steps % 2  # Simpson needs an even interval count
    h = horizon / steps

    # RK4 for a linear autonomous system collapses to one step operator
    ah = clp.A * h
    ah2 = ah @ ah
    phi = np.eye(clp.state_dim) + ah + ah2 / 2.0 + ah2 @ ah / 6.0 + ah2 @ ah2 / 24.0

    state = clp.E.copy()
    energy = np.empty(steps + 1)
    energy[0] = np.sum((clp.C @ state) ** 2)
    for k in range(1, steps + 1):
        state = phi @ state
        energy[k] = np.sum((clp.C @ state) ** 2)

    weights = np.ones(steps + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    integral = h / 3.0 * float(weights @ energy)

    tail = energy[-1] / (2.0 * decay)
    if integral > 0.0 and tail > tail_rtol * integral:
        raise HorizonTooShort(
            f"estimated tail {tail:.3e} exceeds {tail_rtol:.1e} of the"
            f" accumulated integral {integral:.3e}; increase the horizon"
        )
    cost = max(integral, 0.0)
    return H2Result(norm=float(np.sqrt(cost)), cost=cost, gramian_trace=cost,
                    method="quadrature")
