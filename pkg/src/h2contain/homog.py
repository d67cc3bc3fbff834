"""Homogeneous state-containment design pipeline.

All followers and leaders share one LTI plant.  The distributed protocol is
an observer-style dynamic output feedback with gains F (state feedback on
the protocol state) and G (output injection).  The pipeline: check the
regularity conditions, pick the coupling parameter c_p from the follower
Laplacian spectrum, synthesize P and Q from slightly perturbed Riccati
equations, form F = -c_p R2^-1 B' P and G = -Q C1' R1^-1, certify the
trace bound against the cost budget gamma, and assemble the controlled
error system for H2 analysis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import (
    BoundExceedsGamma,
    CertificateFailed,
    CpOutOfRange,
    InvalidSpectrum,
    RegularityViolation,
)
from .graph import LaplacianPartition
from .h2 import ClosedLoopSystem

__all__ = [
    "AgentModel",
    "HomogGains",
    "CertificateCheck",
    "CertificateReport",
    "check_regularity",
    "default_cp",
    "cp_case",
    "design_homogeneous",
    "assemble_error_system",
    "modal_closed_loop",
    "verify_homog_certificate",
]

CASE_1 = "case-1"
CASE_2 = "case-2"
OUT_OF_RANGE = "out-of-range"


@dataclass(frozen=True)
class AgentModel:
    """One LTI plant with disturbance, measured output, and performance output.

    dx/dt = A x + B u + E d
    y     = C1 x + D1 d   (measured)
    z     = C2 x + D2 u   (performance)

    (A, B) must be stabilizable and (C1, A) detectable.
    """

    A: np.ndarray
    B: np.ndarray
    C1: np.ndarray
    C2: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        mats = {name: matcore.as_matrix(getattr(self, name), name)
                for name in ("A", "B", "C1", "C2", "D1", "D2", "E")}
        a = mats["A"]
        if a.shape[0] != a.shape[1]:
            raise ValueError(f"A must be square, got {a.shape}")
        n = a.shape[0]
        m = mats["B"].shape[1]
        q = mats["E"].shape[1]
        r = mats["C1"].shape[0]
        p = mats["C2"].shape[0]
        expected = {
            "B": (n, m), "C1": (r, n), "C2": (p, n),
            "D1": (r, q), "D2": (p, m), "E": (n, q),
        }
        for name, shape in expected.items():
            if mats[name].shape != shape:
                raise ValueError(
                    f"{name} has shape {mats[name].shape}, expected {shape}"
                )
        for name, mat in mats.items():
            object.__setattr__(self, name, mat)

    def require_stabilizable_detectable(self) -> "AgentModel":
        """Gate used by the design entry points; see the PBH tests."""
        if not matcore.is_stabilizable(self.A, self.B):
            raise ValueError("(A, B) is not stabilizable")
        if not matcore.is_detectable(self.C1, self.A):
            raise ValueError("(C1, A) is not detectable")
        return self

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def q(self) -> int:
        return self.E.shape[1]

    @property
    def r(self) -> int:
        return self.C1.shape[0]

    @property
    def p(self) -> int:
        return self.C2.shape[0]


@dataclass(frozen=True)
class HomogGains:
    """Designed protocol gains plus the certificate data behind them."""

    F: np.ndarray
    G: np.ndarray
    c_p: float
    P: np.ndarray
    Q: np.ndarray
    delta: float
    eta: float
    gamma: float
    bound: float
    case: str
    accepted: bool

    def require_accepted(self) -> "HomogGains":
        if not self.accepted:
            raise BoundExceedsGamma(self.bound, self.gamma)
        return self


def check_regularity(model: AgentModel, strict_identity: bool = True,
                     tol: float = 1e-10) -> dict:
    """Verify the disturbance/feedthrough regularity conditions.

    Always requires D1 E' = 0 and D2' C2 = 0.  With ``strict_identity`` the
    products D1 D1' and D2' D2 must equal the identity; otherwise positive
    definiteness suffices.  Returns the measured deviations per condition
    and raises ``RegularityViolation`` naming the first failed one.
    """
    deviations = {
        "D1_E_orthogonal": float(np.max(np.abs(model.D1 @ model.E.T))),
        "D2_C2_orthogonal": float(np.max(np.abs(model.D2.T @ model.C2))),
    }
    r1 = model.D1 @ model.D1.T
    r2 = model.D2.T @ model.D2
    if strict_identity:
        deviations["D1_D1T_identity"] = float(np.max(np.abs(r1 - np.eye(model.r))))
        deviations["D2T_D2_identity"] = float(np.max(np.abs(r2 - np.eye(model.m))))
        for name, value in deviations.items():
            if value > tol:
                raise RegularityViolation(f"{name} fails: deviation {value:.3e}")
    else:
        for name in ("D1_E_orthogonal", "D2_C2_orthogonal"):
            if deviations[name] > tol:
                raise RegularityViolation(f"{name} fails: deviation {deviations[name]:.3e}")
        min1 = float(np.linalg.eigvalsh(0.5 * (r1 + r1.T))[0])
        min2 = float(np.linalg.eigvalsh(0.5 * (r2 + r2.T))[0])
        deviations["D1_D1T_min_eig"] = min1
        deviations["D2T_D2_min_eig"] = min2
        if min1 <= tol:
            raise RegularityViolation(f"D1 D1' is singular (min eigenvalue {min1:.3e})")
        if min2 <= tol:
            raise RegularityViolation(f"D2' D2 is singular (min eigenvalue {min2:.3e})")
    return deviations


def default_cp(lambda1: float, lambdaM: float) -> float:
    """Closed-form coupling parameter 2 / ((l1 + lM)(l1^2 + lM^2)).

    This is the choice that maximizes the quadratic-coefficient margin of
    the design Riccati equation in both parameter cases simultaneously.
    """
    if not (0.0 < lambda1 <= lambdaM):
        raise InvalidSpectrum(
            f"need 0 < lambda1 <= lambdaM, got {lambda1:.6g}, {lambdaM:.6g}"
        )
    return 2.0 / ((lambda1 + lambdaM) * (lambda1 ** 2 + lambdaM ** 2))


def cp_case(c_p: float, lambda1: float, lambdaM: float) -> str:
    """Classify c_p into the two admissible design cases.

    Case 1 covers 0 < c_p < c_p*; case 2 covers c_p* <= c_p < 2 / lambdaM^3
    (the boundary c_p* belongs to case 2, where both Riccati coefficients
    coincide).  Everything else is out of range.
    """
    star = default_cp(lambda1, lambdaM)
    if 0.0 < c_p < star:
        return CASE_1
    if star <= c_p < 2.0 / lambdaM ** 3:
        return CASE_2
    return OUT_OF_RANGE


def design_homogeneous(
    model: AgentModel,
    partition: LaplacianPartition,
    gamma: float,
    c_p: float | None = None,
    delta: float = 1e-3,
    eta: float = 1e-3,
    strict_identity: bool = True,
) -> HomogGains:
    """Synthesize protocol gains certified against the cost budget gamma.

    P solves  A'P + PA + (c_p^2 l^4 - 2 c_p l) P B R2^-1 B' P
              + lambdaM^4 C2'C2 + delta I = 0
    with l = lambda1 in case 1 and l = lambdaM in case 2, and Q solves the
    filter equation  A Q + Q A' - Q C1' R1^-1 C1 Q + (1/lambda1^2) E E'
    + eta I = 0  (R1 = D1 D1', R2 = D2' D2; both identity in strict mode).
    The certified bound is M [tr(C1 Q P Q C1' R1^-1) + lambdaM^4 tr(C2 Q C2')]
    and the design is accepted iff it is below gamma; a rejected design is
    still returned, flagged, for diagnosis.
    """
    if gamma <= 0.0 or delta <= 0.0 or eta <= 0.0:
        raise ValueError("gamma, delta, eta must be positive")
    model.require_stabilizable_detectable()
    check_regularity(model, strict_identity=strict_identity)

    lambda1 = partition.lambda1
    lambda_m = partition.lambdaM
    if c_p is None:
        c_p = default_cp(lambda1, lambda_m)
    case = cp_case(c_p, lambda1, lambda_m)
    if case == OUT_OF_RANGE:
        raise CpOutOfRange(
            f"c_p = {c_p:.6g} outside (0, {2.0 / lambda_m ** 3:.6g})"
        )
    lam = lambda1 if case == CASE_1 else lambda_m

    r1 = model.D1 @ model.D1.T
    r2 = model.D2.T @ model.D2
    r1_inv = np.linalg.inv(r1)
    r2_inv = np.linalg.inv(r2)

    coeff = 2.0 * c_p * lam - c_p ** 2 * lam ** 4  # positive inside the case ranges
    n = model.n
    p_mat, _ = matcore.solve_care(
        model.A,
        coeff * (model.B @ r2_inv @ model.B.T),
        lambda_m ** 4 * (model.C2.T @ model.C2) + delta * np.eye(n),
    )
    q_mat, _ = matcore.solve_care(
        model.A.T,
        model.C1.T @ r1_inv @ model.C1,
        (model.E @ model.E.T) / lambda1 ** 2 + eta * np.eye(n),
    )

    f = -c_p * (r2_inv @ model.B.T @ p_mat)
    g = -q_mat @ model.C1.T @ r1_inv

    m_followers = partition.num_followers
    bound = m_followers * (
        float(np.trace(model.C1 @ q_mat @ p_mat @ q_mat @ model.C1.T @ r1_inv))
        + lambda_m ** 4 * float(np.trace(model.C2 @ q_mat @ model.C2.T))
    )
    return HomogGains(
        F=f, G=g, c_p=float(c_p), P=p_mat, Q=q_mat,
        delta=delta, eta=eta, gamma=gamma,
        bound=bound, case=case, accepted=bool(bound < gamma),
    )


def assemble_error_system(
    model: AgentModel,
    partition: LaplacianPartition,
    gains: HomogGains,
) -> ClosedLoopSystem:
    """Controlled error system from stacked disagreement variables.

    State ordering: first the M follower-state disagreements, then the M
    protocol-state disagreements.
    """
    l1 = partition.L1
    m = partition.num_followers
    eye_m = np.eye(m)
    bf = model.B @ gains.F
    gc1 = gains.G @ model.C1
    gd1 = gains.G @ model.D1
    a_o = np.block([
        [np.kron(eye_m, model.A), np.kron(eye_m, bf)],
        [np.kron(-l1, gc1), np.kron(eye_m, model.A + gc1) + np.kron(l1, bf)],
    ])
    e_o = np.vstack([np.kron(l1, model.E), np.kron(-(l1 @ l1), gd1)])
    c_o = np.hstack([np.kron(eye_m, model.C2), np.kron(eye_m, model.D2 @ gains.F)])
    return ClosedLoopSystem(
        A=a_o, E=e_o, C=c_o,
        state_labels=(
            f"{m} follower-state disagreements ({model.n} each),"
            f" then {m} protocol-state disagreements"
        ),
    )


def modal_closed_loop(
    model: AgentModel,
    gains: HomogGains,
    lam: float,
    lambda1: float,
) -> ClosedLoopSystem:
    """Decoupled closed loop for one follower-Laplacian eigenvalue.

    These M independent systems certify the networked design: the network
    cost never exceeds the sum of their individual costs.
    """
    bf = model.B @ gains.F
    gc1 = gains.G @ model.C1
    a = np.block([
        [model.A, lam * bf],
        [-gc1, model.A + gc1 + lam * bf],
    ])
    e = np.vstack([model.E / lambda1, -gains.G @ model.D1])
    c = np.hstack([lam ** 2 * model.C2, lam ** 2 * (model.D2 @ gains.F)])
    return ClosedLoopSystem(A=a, E=e, C=c, state_labels="modal state, modal protocol state")


@dataclass(frozen=True)
class CertificateCheck:
    name: str
    value: float
    limit: float
    passed: bool


@dataclass(frozen=True)
class CertificateReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> tuple:
        return tuple(check for check in self.checks if not check.passed)


def _negativity_margin(mat: np.ndarray) -> tuple[float, float]:
    """Max eigenvalue and the scale-relative strict-negativity limit."""
    top = float(np.linalg.eigvalsh(0.5 * (mat + mat.T))[-1])
    limit = -1e-9 * (1.0 + float(np.linalg.norm(mat)))
    return top, limit


def verify_homog_certificate(
    model: AgentModel,
    partition: LaplacianPartition,
    gains: HomogGains,
    gamma: float | None = None,
    strict: bool = True,
) -> CertificateReport:
    """Re-check every certificate condition for the supplied gains.

    Per follower-Laplacian eigenvalue l_i this verifies the quadratic matrix
    inequality in P, Hurwitzness of A + l_i B F, the shared filter inequality
    in Q, Hurwitzness of A + G C1, and finally the eigenvalue-resolved trace
    sum against gamma.  With ``strict`` a failure raises
    ``CertificateFailed``; otherwise the full report is returned.
    """
    if gamma is None:
        gamma = gains.gamma
    r1_inv = np.linalg.inv(model.D1 @ model.D1.T)
    lambda1 = partition.lambda1
    checks = []

    trace_p = float(np.trace(
        model.C1 @ gains.Q @ gains.P @ gains.Q @ model.C1.T @ r1_inv))
    trace_c2 = float(np.trace(model.C2 @ gains.Q @ model.C2.T))
    trace_sum = 0.0
    for i, lam in enumerate(partition.eigenvalues, start=1):
        closed = model.A + lam * (model.B @ gains.F)
        out = lam ** 2 * (model.C2 + model.D2 @ gains.F)
        lmi = closed.T @ gains.P + gains.P @ closed + out.T @ out
        top, limit = _negativity_margin(lmi)
        checks.append(CertificateCheck(
            name=f"P_inequality_mode_{i}", value=top, limit=limit,
            passed=top < limit,
        ))
        worst = matcore.max_real_eig(closed)
        checks.append(CertificateCheck(
            name=f"stability_mode_{i}", value=worst, limit=0.0,
            passed=worst < 0.0,
        ))
        trace_sum += trace_p + lam ** 4 * trace_c2

    q_ineq = (
        model.A @ gains.Q + gains.Q @ model.A.T
        - gains.Q @ model.C1.T @ r1_inv @ model.C1 @ gains.Q
        + (model.E @ model.E.T) / lambda1 ** 2
    )
    top, limit = _negativity_margin(q_ineq)
    checks.append(CertificateCheck(
        name="Q_inequality", value=top, limit=limit, passed=top < limit,
    ))
    worst = matcore.max_real_eig(model.A + gains.G @ model.C1)
    checks.append(CertificateCheck(
        name="observer_stability", value=worst, limit=0.0, passed=worst < 0.0,
    ))
    checks.append(CertificateCheck(
        name="trace_sum", value=trace_sum, limit=gamma, passed=trace_sum < gamma,
    ))

    report = CertificateReport(checks=tuple(checks))
    if strict and not report.ok:
        failed = ", ".join(
            f"{c.name} (value {c.value:.6g}, limit {c.limit:.6g})"
            for c in report.failures()
        )
        raise CertificateFailed(f"certificate violated: {failed}", report=report)
    return report
