"""H2-suboptimal containment control for linear multi-agent systems.

Designs distributed dynamic output feedback protocols that drive follower
states (homogeneous networks) or follower outputs (heterogeneous networks)
into the convex hull spanned by multiple leaders, with the closed-loop H2
cost certified below a user-chosen budget.
"""
from . import errors
from .graph import CommGraph, LaplacianPartition, build_graph, hull_point, laplacian_partition
from .h2 import ClosedLoopSystem, H2Result, h2_norm, h2_norm_quadrature
from .heterog import (
    AgentGains,
    HeterogGains,
    LeaderModel,
    RegulatorSolution,
    design_heterogeneous,
    solve_regulator,
    verify_heterog_certificate,
)
from .homog import (
    AgentModel,
    HomogGains,
    check_regularity,
    cp_case,
    default_cp,
    design_homogeneous,
    verify_homog_certificate,
)
from .modelfile import ModelFile, load_model
from .sim import (
    ContainmentMetrics,
    DisturbanceSpec,
    SimulationTrace,
    containment_metrics,
    simulate_heterogeneous,
    simulate_homogeneous,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "CommGraph",
    "LaplacianPartition",
    "build_graph",
    "laplacian_partition",
    "hull_point",
    "ClosedLoopSystem",
    "H2Result",
    "h2_norm",
    "h2_norm_quadrature",
    "AgentModel",
    "HomogGains",
    "check_regularity",
    "default_cp",
    "cp_case",
    "design_homogeneous",
    "verify_homog_certificate",
    "LeaderModel",
    "RegulatorSolution",
    "AgentGains",
    "HeterogGains",
    "solve_regulator",
    "design_heterogeneous",
    "verify_heterog_certificate",
    "ModelFile",
    "load_model",
    "DisturbanceSpec",
    "SimulationTrace",
    "ContainmentMetrics",
    "simulate_homogeneous",
    "simulate_heterogeneous",
    "containment_metrics",
    "write_trace_csv",
    "__version__",
]
