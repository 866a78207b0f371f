"""Decentralized multi-agent route learning with expert-demonstration mixing."""

__version__ = "0.1.0"

from .env import AgentSpec, EnvState, Observation, RouteEnv, StepResult, edge_score
from .fixtures import grid_graph, hilly_graph, line_graph, write_graph
from .graph import Edge, GraphError, RoadGraph, load_graph
from .losses import (
    alpha_weight,
    advantages,
    bootstrapped_returns,
    clipped_surrogate,
    mixed_policy_objective,
    standardize,
    total_policy_objective,
    value_loss,
)
from .trajectory import Trajectory, Transition, dtw_distance, traj_to_feature_seq
from .training import TrainConfig, Trainer, evaluate, generate_agent_specs, rollout

__all__ = [
    "AgentSpec", "EnvState", "Observation", "RouteEnv", "StepResult", "edge_score",
    "grid_graph", "hilly_graph", "line_graph", "write_graph",
    "Edge", "GraphError", "RoadGraph", "load_graph",
    "alpha_weight", "advantages", "bootstrapped_returns", "clipped_surrogate",
    "mixed_policy_objective", "standardize", "total_policy_objective", "value_loss",
    "Trajectory", "Transition", "dtw_distance", "traj_to_feature_seq",
    "TrainConfig", "Trainer", "evaluate", "generate_agent_specs", "rollout",
]
