"""Design reports: one payload, two renderings.

The machine rendering is JSON with full-precision floats (shortest
round-tripping representation, so read + re-serialize is byte-identical);
the human rendering prints the same numbers at 6 significant digits.
"""
from __future__ import annotations

import json

import numpy as np

__all__ = ["build_homog_report", "build_heterog_report", "render_json", "render_text"]

REPORT_SCHEMA_VERSION = 1


def _mat(arr) -> list:
    return np.asarray(arr, dtype=float).tolist()


def _conditions(cert_report) -> list:
    return [
        {"name": c.name, "value": float(c.value), "limit": float(c.limit),
         "passed": bool(c.passed)}
        for c in cert_report.checks
    ]


def build_homog_report(gains, cert_report, h2_result) -> dict:
    return {
        "report_schema_version": REPORT_SCHEMA_VERSION,
        "mode": "homogeneous",
        "accepted": bool(gains.accepted and cert_report.ok),
        "gamma": float(gains.gamma),
        "sqrt_gamma": float(np.sqrt(gains.gamma)),
        "h2_norm": float(h2_result.norm),
        "h2_cost": float(h2_result.cost),
        "certificate": {
            "bound": float(gains.bound),
            "bound_limit": float(gains.gamma),
            "case": gains.case,
            "conditions": _conditions(cert_report),
        },
        "gains": {
            "c_p": float(gains.c_p),
            "delta": float(gains.delta),
            "eta": float(gains.eta),
            "F": _mat(gains.F),
            "G": _mat(gains.G),
            "P": _mat(gains.P),
            "Q": _mat(gains.Q),
        },
    }


def build_heterog_report(gains, cert_report, h2_result) -> dict:
    return {
        "report_schema_version": REPORT_SCHEMA_VERSION,
        "mode": "heterogeneous",
        "accepted": bool(gains.accepted and cert_report.ok),
        "gamma": float(gains.gamma),
        "sqrt_gamma": float(np.sqrt(gains.gamma)),
        "h2_norm": float(h2_result.norm),
        "h2_cost": float(h2_result.cost),
        "certificate": {
            "threshold": float(gains.threshold),
            "trace_bounds": [float(a.trace_bound) for a in gains.agents],
            "rejected_agents": [i + 1 for i in gains.rejected_agents],
            "conditions": _conditions(cert_report),
        },
        "gains": {
            "delta": float(gains.delta),
            "eta": float(gains.eta),
            "agents": [
                {
                    "F": _mat(a.F), "G": _mat(a.G),
                    "P": _mat(a.P), "Q": _mat(a.Q),
                    "Pi": _mat(a.Pi), "Gamma": _mat(a.Gamma),
                    "trace_bound": float(a.trace_bound),
                }
                for a in gains.agents
            ],
        },
    }


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def _fmt(x) -> str:
    return f"{x:.6g}"


def _fmt_matrix(rows, indent="    ") -> str:
    return "\n".join(
        indent + "[" + "  ".join(_fmt(v) for v in row) + "]" for row in rows
    )


def render_text(payload: dict) -> str:
    """Human-readable rendering of a design report (6 significant digits)."""
    lines = [
        f"mode:        {payload['mode']}",
        f"accepted:    {'yes' if payload['accepted'] else 'no'}",
        f"gamma:       {_fmt(payload['gamma'])}   sqrt(gamma): {_fmt(payload['sqrt_gamma'])}",
        f"H2 norm:     {_fmt(payload['h2_norm'])}   cost: {_fmt(payload['h2_cost'])}",
    ]
    cert = payload["certificate"]
    if payload["mode"] == "homogeneous":
        lines.append(
            f"bound:       {_fmt(cert['bound'])} (limit {_fmt(cert['bound_limit'])},"
            f" {cert['case']})"
        )
        gains = payload["gains"]
        lines.append(f"c_p:         {_fmt(gains['c_p'])}"
                     f"   delta: {_fmt(gains['delta'])}   eta: {_fmt(gains['eta'])}")
        lines.append("F:")
        lines.append(_fmt_matrix(gains["F"]))
        lines.append("G:")
        lines.append(_fmt_matrix(gains["G"]))
    else:
        lines.append(f"threshold:   {_fmt(cert['threshold'])}")
        lines.append("trace bounds: "
                     + "  ".join(_fmt(v) for v in cert["trace_bounds"]))
        if cert["rejected_agents"]:
            lines.append("rejected agents: "
                         + ", ".join(str(i) for i in cert["rejected_agents"]))
        for i, agent in enumerate(payload["gains"]["agents"], start=1):
            lines.append(f"agent {i}:")
            lines.append("  F:")
            lines.append(_fmt_matrix(agent["F"], indent="      "))
            lines.append("  G:")
            lines.append(_fmt_matrix(agent["G"], indent="      "))
    total = len(cert["conditions"])
    failed = [c["name"] for c in cert["conditions"] if not c["passed"]]
    if failed:
        lines.append(f"certificate: {total - len(failed)}/{total} conditions passed;"
                     f" FAILED: {', '.join(failed)}")
    else:
        lines.append(f"certificate: all {total} conditions passed")
    return "\n".join(lines) + "\n"
