"""Randomized rumor spreading (Push, Pull, Push&Pull) with and without FIFO
message buffers."""

from . import _backend
from .bounds import (
    BoundConstants,
    BoundsReport,
    bounds_report,
    pull_general_upper,
    pull_recursion,
    pull_regular_upper,
    push_complete_estimate,
    star_chain_lower,
)
from .classical import run_classical
from .coupling import CouplingReport, run_coupled
from .engine import (
    Message,
    MessageKind,
    Model,
    NodeState,
    Protocol,
    RunConfig,
    TieBreak,
    Trace,
    run,
    step,
)
from .experiment import ExperimentPlan, Summary, run_experiment, scaling_fit
from .graph import (
    Graph,
    GraphError,
    GraphSpec,
    LoadProfile,
    bfs_layers,
    diameter,
    generate,
    load_profile,
)
from .tape import ChoiceTape

__version__ = "0.1.0"
BACKEND = _backend.name()
