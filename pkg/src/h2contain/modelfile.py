"""JSON model files: the on-disk description of a containment problem.

Schema (version 1, row-major matrix arrays, unknown keys rejected)::

    {
      "schema_version": 1,
      "mode": "homogeneous" | "heterogeneous",
      "graph": {"num_followers": M, "num_leaders": L, "edges": [[u, v], ...]},
      "plant": {"A": ..., "B": ..., "C1": ..., "C2": ...,
                "D1": ..., "D2": ..., "E": ...},              # homogeneous
      "agents": [{...plant fields...}, ...],                   # heterogeneous
      "leader": {"S": ..., "R": ...},                          # heterogeneous
      "design": {"gamma": g, "delta": d, "eta": e, "c_p": c},  # c_p optional
      "simulation": {                                          # optional
        "T": t, "dt": h,
        "x0_followers": [[...], ...], "x0_leaders": [[...], ...],
        "w0": [[...], ...],                                    # optional, default 0
        "v0": [[...], ...],                                    # heterogeneous, optional
        "disturbance": {"kind": "zero" | "bounded-white",
                        "amplitude": a, "seed": s, "sample_dt": h}
      }
    }

Malformed JSON raises ``ModelParseError``; everything else that is wrong
raises ``ModelInvariantError`` with a pointer to the offending field.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import H2ContainError, ModelInvariantError, ModelParseError
from .graph import CommGraph, LaplacianPartition, build_graph, laplacian_partition
from .heterog import LeaderModel
from .homog import AgentModel
from .sim import DisturbanceSpec

__all__ = ["DesignSettings", "SimulationSettings", "ModelFile", "load_model"]

SCHEMA_VERSION = 1

HOMOGENEOUS = "homogeneous"
HETEROGENEOUS = "heterogeneous"

_PLANT_KEYS = ("A", "B", "C1", "C2", "D1", "D2", "E")


@dataclass(frozen=True)
class DesignSettings:
    gamma: float
    delta: float = 1e-3
    eta: float = 1e-3
    c_p: float | None = None


@dataclass(frozen=True)
class SimulationSettings:
    T: float
    dt: float
    x0_followers: np.ndarray
    x0_leaders: np.ndarray
    w0: np.ndarray | None
    v0: np.ndarray | None
    disturbance: DisturbanceSpec


@dataclass(frozen=True)
class ModelFile:
    mode: str
    graph: CommGraph
    partition: LaplacianPartition
    plant: AgentModel | None
    agents: tuple | None
    leader: LeaderModel | None
    design: DesignSettings
    simulation: SimulationSettings | None


def _expect_dict(value, pointer):
    if not isinstance(value, dict):
        raise ModelInvariantError(pointer, f"expected an object, got {type(value).__name__}")
    return value


def _check_keys(obj: dict, pointer: str, required, optional=()):
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ModelInvariantError(pointer, f"unknown keys {sorted(unknown)}")
    for key in required:
        if key not in obj:
            raise ModelInvariantError(pointer, f"missing required key {key!r}")


def _number(obj, key, pointer, optional=False, default=None):
    if key not in obj:
        if optional:
            return default
        raise ModelInvariantError(pointer, f"missing required key {key!r}")
    value = obj[key]
    if value is None and optional:
        return default
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelInvariantError(f"{pointer}.{key}", "expected a number")
    return float(value)


def _matrix(value, pointer) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(
        isinstance(row, list) and row for row in value
    ):
        raise ModelInvariantError(pointer, "expected a non-empty array of rows")
    width = len(value[0])
    for i, row in enumerate(value):
        if len(row) != width:
            raise ModelInvariantError(pointer, f"row {i} has {len(row)} entries, expected {width}")
        for j, entry in enumerate(row):
            if isinstance(entry, bool) or not isinstance(entry, (int, float)):
                raise ModelInvariantError(pointer, f"entry [{i}][{j}] is not a number")
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ModelInvariantError(pointer, "matrix has non-finite entries")
    return arr


def _plant(obj, pointer) -> AgentModel:
    obj = _expect_dict(obj, pointer)
    _check_keys(obj, pointer, required=_PLANT_KEYS)
    mats = {key: _matrix(obj[key], f"{pointer}.{key}") for key in _PLANT_KEYS}
    try:
        return AgentModel(**mats).require_stabilizable_detectable()
    except (ValueError, H2ContainError) as exc:
        raise ModelInvariantError(pointer, str(exc)) from exc


def _graph(obj, pointer):
    obj = _expect_dict(obj, pointer)
    _check_keys(obj, pointer, required=("num_followers", "num_leaders", "edges"))
    for key in ("num_followers", "num_leaders"):
        if not isinstance(obj[key], int) or isinstance(obj[key], bool):
            raise ModelInvariantError(f"{pointer}.{key}", "expected an integer")
    edges = obj["edges"]
    if not isinstance(edges, list):
        raise ModelInvariantError(f"{pointer}.edges", "expected a list of pairs")
    pairs = []
    for i, edge in enumerate(edges):
        if (not isinstance(edge, list) or len(edge) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in edge)):
            raise ModelInvariantError(f"{pointer}.edges[{i}]", "expected an integer pair")
        pairs.append((edge[0], edge[1]))
    try:
        g = build_graph(obj["num_followers"], obj["num_leaders"], pairs)
        return g, laplacian_partition(g)
    except (ValueError, H2ContainError) as exc:
        raise ModelInvariantError(pointer, str(exc)) from exc


def _design(obj, pointer) -> DesignSettings:
    obj = _expect_dict(obj, pointer)
    _check_keys(obj, pointer, required=("gamma",), optional=("delta", "eta", "c_p"))
    gamma = _number(obj, "gamma", pointer)
    delta = _number(obj, "delta", pointer, optional=True, default=1e-3)
    eta = _number(obj, "eta", pointer, optional=True, default=1e-3)
    c_p = _number(obj, "c_p", pointer, optional=True)
    if gamma <= 0 or delta <= 0 or eta <= 0:
        raise ModelInvariantError(pointer, "gamma, delta, eta must be positive")
    return DesignSettings(gamma=gamma, delta=delta, eta=eta, c_p=c_p)


def _disturbance(obj, pointer) -> DisturbanceSpec:
    obj = _expect_dict(obj, pointer)
    _check_keys(obj, pointer, required=("kind",),
                optional=("amplitude", "seed", "sample_dt"))
    kind = obj["kind"]
    if kind not in ("zero", "bounded-white"):
        raise ModelInvariantError(f"{pointer}.kind", f"unknown kind {kind!r}")
    seed = obj.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ModelInvariantError(f"{pointer}.seed", "expected a nonnegative integer")
    try:
        return DisturbanceSpec(
            kind=kind,
            amplitude=_number(obj, "amplitude", pointer, optional=True, default=0.0),
            seed=seed,
            sample_dt=_number(obj, "sample_dt", pointer, optional=True),
        )
    except ValueError as exc:
        raise ModelInvariantError(pointer, str(exc)) from exc


def _simulation(obj, pointer, mode) -> SimulationSettings:
    obj = _expect_dict(obj, pointer)
    optional = ("w0", "disturbance") + (("v0",) if mode == HETEROGENEOUS else ())
    _check_keys(obj, pointer, required=("T", "dt", "x0_followers", "x0_leaders"),
                optional=optional)
    t_final = _number(obj, "T", pointer)
    dt = _number(obj, "dt", pointer)
    if dt <= 0 or t_final < dt:
        raise ModelInvariantError(pointer, "need dt > 0 and T >= dt")
    x0f = _matrix(obj["x0_followers"], f"{pointer}.x0_followers")
    x0l = _matrix(obj["x0_leaders"], f"{pointer}.x0_leaders")
    w0 = _matrix(obj["w0"], f"{pointer}.w0") if "w0" in obj else None
    v0 = _matrix(obj["v0"], f"{pointer}.v0") if "v0" in obj else None
    dist = (_disturbance(obj["disturbance"], f"{pointer}.disturbance")
            if "disturbance" in obj else DisturbanceSpec())
    return SimulationSettings(T=t_final, dt=dt, x0_followers=x0f, x0_leaders=x0l,
                              w0=w0, v0=v0, disturbance=dist)


def load_model(path) -> ModelFile:
    """Load and fully validate a model file.

    Raises ``ModelParseError`` for unreadable/malformed JSON and
    ``ModelInvariantError`` (with a section/field pointer) for anything
    that parses but violates the schema or the model invariants.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ModelParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ModelParseError(f"{path} is not valid JSON: {exc}") from exc

    root = _expect_dict(raw, "$")
    if root.get("schema_version") != SCHEMA_VERSION:
        raise ModelInvariantError(
            "schema_version",
            f"expected {SCHEMA_VERSION}, got {root.get('schema_version')!r}",
        )
    mode = root.get("mode")
    if mode not in (HOMOGENEOUS, HETEROGENEOUS):
        raise ModelInvariantError("mode", f"expected 'homogeneous' or 'heterogeneous', got {mode!r}")

    plant_keys = ("plant",) if mode == HOMOGENEOUS else ("agents", "leader")
    _check_keys(root, "$", required=("schema_version", "mode", "graph", "design") + plant_keys,
                optional=("simulation",))

    comm_graph, partition = _graph(root["graph"], "graph")

    plant = None
    agents = None
    leader = None
    if mode == HOMOGENEOUS:
        plant = _plant(root["plant"], "plant")
    else:
        if not isinstance(root["agents"], list) or not root["agents"]:
            raise ModelInvariantError("agents", "expected a non-empty list of plants")
        if len(root["agents"]) != comm_graph.num_followers:
            raise ModelInvariantError(
                "agents",
                f"{len(root['agents'])} agents for {comm_graph.num_followers} followers",
            )
        agents = tuple(_plant(item, f"agents[{i}]")
                       for i, item in enumerate(root["agents"]))
        leader_obj = _expect_dict(root["leader"], "leader")
        _check_keys(leader_obj, "leader", required=("S", "R"))
        try:
            leader = LeaderModel(
                S=_matrix(leader_obj["S"], "leader.S"),
                R=_matrix(leader_obj["R"], "leader.R"),
            )
        except (ValueError, H2ContainError) as exc:
            raise ModelInvariantError("leader", str(exc)) from exc
        for i, agent in enumerate(agents):
            if agent.p != leader.p:
                raise ModelInvariantError(
                    f"agents[{i}]",
                    f"output dimension {agent.p} differs from leader's {leader.p}",
                )

    design = _design(root["design"], "design")
    simulation = (_simulation(root["simulation"], "simulation", mode)
                  if "simulation" in root else None)
    return ModelFile(
        mode=mode, graph=comm_graph, partition=partition,
        plant=plant, agents=agents, leader=leader,
        design=design, simulation=simulation,
    )
