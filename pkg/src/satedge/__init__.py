"""Energy-aware task offloading simulator for satellite-terrestrial edge
computing.

The package models a network of multi-antenna base stations, low-orbit
satellites carrying edge servers, and ground/space user terminals that
offload computing tasks over non-orthogonal uplinks and laser links.  An
alternating optimizer picks each task's serving node, the receive
beamformers, transmit powers, and compute splits to minimize weighted
total energy under per-task deadlines, and a harness reproduces the
comparative Monte-Carlo studies against five baseline policies.
"""

from .costmodel import CostReport, Plan, TaskSpec, check_feasibility, evaluate_plan
from .errors import SatEdgeError, ScenarioInfeasible
from .geometry import GeometrySample, build_walker, sample_geometry, slant_range
from .harness import build_experiment, run_experiment, summarize
from .instance import NetworkInstance, sample_instance
from .linkrate import Beamformers, SicOrder, max_sinr_receiver, sic_order
from .optimizer import IterationTrace, run_algorithm1
from .scenario import ConstellationConfig, ScenarioConfig, from_overrides, load_scenario

__version__ = "0.1.0"

__all__ = [
    "Beamformers", "ConstellationConfig", "CostReport", "GeometrySample",
    "IterationTrace", "NetworkInstance", "Plan", "SatEdgeError",
    "ScenarioConfig", "ScenarioInfeasible", "SicOrder", "TaskSpec",
    "build_experiment", "build_walker", "check_feasibility", "evaluate_plan",
    "from_overrides", "load_scenario", "max_sinr_receiver", "run_algorithm1",
    "run_experiment", "sample_geometry", "sample_instance", "sic_order",
    "slant_range", "summarize", "__version__",
]
