"""Expert demonstrations: instruction sets, route checking, execution.

Route proposals arrive as per-agent waypoint lists (from a language-model
endpoint, the shortest-path oracle, or the logit route sampler), are
validated edge-by-edge, compiled to action indices, and replayed in the
environment to produce expert-source trajectories.  Proposals that fail
validation count against the validity rate and, by default, are replaced
by the oracle route so every agent always has an expert trajectory.
"""
from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .env import AgentSpec, RouteEnv
from .graph import RoadGraph
from .trajectory import EXPERT_SOURCE, Trajectory, Transition

MOVE_TO = "MoveTo"
LOGIT_CANDIDATES = 8

LogProbFn = Callable[[int, np.ndarray, np.ndarray, int], float]


@dataclass(frozen=True)
class Instruction:
    command: str
    parameter: int
    agent_id: int


@dataclass
class ExecutableSet:
    """Per-agent instruction sequences; every agent has one, possibly empty."""

    sequences: dict[int, tuple[Instruction, ...]]
    fallback_agents: frozenset[int] = frozenset()

    def waypoints(self, spec: AgentSpec) -> list[int]:
        return [spec.start] + [inst.parameter for inst in self.sequences[spec.agent_id]]


@dataclass
class ParsedRoutes:
    """Raw per-agent waypoint proposals extracted from model text."""

    waypoints: dict[int, list[int]]
    errors: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class DemoQualityRecord:
    token_count: int
    validity_rate: float  # percentage in [0, 100]
    mean_reward: float
    mean_dtw: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.validity_rate <= 100.0:
            raise ValueError(f"validity rate {self.validity_rate} outside [0, 100]")


# -- parsing -------------------------------------------------------------------

_FENCE_RE = re.compile(r"```[a-zA-Z]*\n?|```")


def _extract_mapping(text: str) -> dict | None:
    cleaned = _FENCE_RE.sub("", text)
    start = cleaned.find("{")
    if start < 0:
        return None
    depth = 0
    for i in range(start, len(cleaned)):
        if cleaned[i] == "{":
            depth += 1
        elif cleaned[i] == "}":
            depth -= 1
            if depth == 0:
                fragment = cleaned[start : i + 1]
                for parse in (json.loads, ast.literal_eval):
                    try:
                        value = parse(fragment)
                    except (ValueError, SyntaxError):
                        continue
                    if isinstance(value, dict):
                        return value
                return None
    return None


def parse_instructions(text: str, n_agents: int, graph: RoadGraph) -> ParsedRoutes:
    """Extract per-agent waypoint lists from raw model output.

    Accepts a strict JSON object or a Python-style single-quoted mapping.
    Problems (no mapping, unknown agent, unknown junction, malformed list)
    are recorded as error strings carrying the offending fragment; they
    feed the validity-rate accounting instead of raising.
    """
    result = ParsedRoutes(waypoints={})
    mapping = _extract_mapping(text)
    if mapping is None:
        result.errors.append(f"no parsable agent-route mapping in: {text[:120]!r}")
        return result
    for key, value in mapping.items():
        try:
            agent_id = int(key)
        except (TypeError, ValueError):
            result.errors.append(f"unparsable agent id {key!r}")
            continue
        if not 0 <= agent_id < n_agents:
            result.errors.append(f"unknown agent id {agent_id}")
            continue
        if not isinstance(value, (list, tuple)):
            result.errors.append(f"agent {agent_id}: route is not a list: {value!r}")
            continue
        waypoints = []
        bad = None
        for item in value:
            if isinstance(item, bool) or not isinstance(item, int):
                bad = f"agent {agent_id}: non-integer waypoint {item!r}"
                break
            if item not in graph.nodes:
                bad = f"agent {agent_id}: unknown junction {item}"
                break
            waypoints.append(item)
        if bad is not None:
            result.errors.append(bad)
            continue
        result.waypoints[agent_id] = waypoints
    return result


# -- validation / compilation ----------------------------------------------------

def validate_route(graph: RoadGraph, spec: AgentSpec, waypoints: Sequence[int]) -> bool:
    """True iff the waypoints run start -> dest along existing directed edges."""
    if len(waypoints) < 2:
        return False
    if waypoints[0] != spec.start or waypoints[-1] != spec.dest:
        return False
    for u, v in zip(waypoints, waypoints[1:]):
        if u not in graph.nodes or graph.edge_between(u, v) is None:
            return False
    return True


def compile_to_actions(graph: RoadGraph, spec: AgentSpec, waypoints: Sequence[int]) -> list[int]:
    """Map each consecutive junction pair to its outgoing-edge index."""
    if not validate_route(graph, spec, waypoints):
        raise ValueError(f"agent {spec.agent_id}: waypoints {list(waypoints)} do not form a valid route")
    actions = []
    for u, v in zip(waypoints, waypoints[1:]):
        out = graph.out_edges(u)
        actions.append(next(i for i, e in enumerate(out) if e.dst == v))
    return actions


def instructions_for(agent_id: int, waypoints: Sequence[int], spec: AgentSpec) -> tuple[Instruction, ...]:
    body = list(waypoints)
    if body and body[0] == spec.start:
        body = body[1:]  # start junction is implied
    return tuple(Instruction(MOVE_TO, j, agent_id) for j in body)


def prepare_executable(
    graph: RoadGraph,
    specs: Sequence[AgentSpec],
    parsed: ParsedRoutes,
    fallback: str = "oracle",
) -> tuple[ExecutableSet, dict[int, bool]]:
    """Turn raw proposals into an executable set, substituting bad routes.

    Returns the set plus a per-agent validity flag for the proposals as
    given (fallback substitutions still count as invalid proposals).
    """
    if fallback not in ("oracle", "skip"):
        raise ValueError(f"unknown fallback policy {fallback!r}")
    sequences: dict[int, tuple[Instruction, ...]] = {}
    fallback_agents = set()
    valid: dict[int, bool] = {}
    for spec in specs:
        waypoints = parsed.waypoints.get(spec.agent_id)
        ok = waypoints is not None and validate_route(graph, spec, waypoints)
        valid[spec.agent_id] = ok
        if ok:
            sequences[spec.agent_id] = instructions_for(spec.agent_id, waypoints, spec)
        elif fallback == "oracle":
            sp = graph.shortest_path(spec.start, spec.dest)
            assert sp is not None  # guaranteed by spec validation
            sequences[spec.agent_id] = instructions_for(spec.agent_id, sp[1], spec)
            fallback_agents.add(spec.agent_id)
        else:
            sequences[spec.agent_id] = ()
            fallback_agents.add(spec.agent_id)
    return ExecutableSet(sequences, frozenset(fallback_agents)), valid


def validity_rate(valid_flags: Sequence[bool]) -> float:
    """Percentage of valid proposals; exact, e.g. 3 of 4 -> 75.0."""
    flags = list(valid_flags)
    if not flags:
        return 0.0
    return 100.0 * sum(flags) / len(flags)


# -- offline experts ---------------------------------------------------------------

def oracle_expert(graph: RoadGraph, specs: Sequence[AgentSpec]) -> ExecutableSet:
    """Shortest-path routes for every agent; always valid."""
    sequences = {}
    for spec in specs:
        sp = graph.shortest_path(spec.start, spec.dest)
        if sp is None:
            raise ValueError(f"agent {spec.agent_id}: destination unreachable")
        sequences[spec.agent_id] = instructions_for(spec.agent_id, sp[1], spec)
    return ExecutableSet(sequences)


def logit_expert(
    graph: RoadGraph,
    specs: Sequence[AgentSpec],
    temperature: float,
    rng: np.random.Generator,
) -> ExecutableSet:
    """Sample routes with probability proportional to exp(-cost / temperature).

    Candidates are up to 8 loopless shortest paths per agent; low
    temperature concentrates on the cheapest route.
    """
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    sequences = {}
    for spec in specs:
        candidates = graph.k_shortest_paths(spec.start, spec.dest, LOGIT_CANDIDATES)
        if not candidates:
            raise ValueError(f"agent {spec.agent_id}: no route to destination")
        costs = np.array([c for c, _ in candidates])
        logits = -costs / temperature
        logits -= logits.max()
        probs = np.exp(logits)
        probs /= probs.sum()
        chosen = candidates[rng.choice(len(candidates), p=probs)][1]
        sequences[spec.agent_id] = instructions_for(spec.agent_id, chosen, spec)
    return ExecutableSet(sequences)


# -- execution ----------------------------------------------------------------------

def execute_demos(
    graph: RoadGraph,
    specs: Sequence[AgentSpec],
    executable: ExecutableSet,
    *,
    policy_logp: LogProbFn | None = None,
    seed: int = 0,
    step_limit: int = 200,
    env_kwargs: dict | None = None,
) -> dict[int, Trajectory]:
    """Replay compiled instruction sets from the initial state.

    Records, per executed action, the current policy's log-probability of
    that action (uniform over valid actions when no policy is supplied).
    Agents whose sequence is empty contribute a single-point trajectory.
    """
    env = RouteEnv(graph, specs, step_limit=step_limit, **(env_kwargs or {}))
    state, observations = env.reset(seed=seed)
    plans = {spec.agent_id: compile_to_actions(graph, spec, executable.waypoints(spec))
             if executable.sequences[spec.agent_id] else []
             for spec in specs}
    if any(not plan for plan in plans.values()):
        # agents without instructions sit the episode out as spectators
        state = replace(state, done=tuple(
            state.done[i] or not plans[i] for i in range(env.n_agents)))
    cursor = {i: 0 for i in plans}
    transitions: dict[int, list[Transition]] = {i: [] for i in plans}
    paths = {spec.agent_id: [spec.start] for spec in specs}
    terminal_obs = {i: observations[i] for i in plans}
    arrived = {i: False for i in plans}
    terminated = {i: False for i in plans}

    def pending(i: int) -> bool:
        return not state.done[i] and cursor[i] < len(plans[i])

    while any(pending(i) for i in plans) and not env.episode_done(state):
        actions: list[int | None] = [None] * env.n_agents
        acting = []
        for i in plans:
            if env.active(state, i) and pending(i):
                actions[i] = plans[i][cursor[i]]
                acting.append(i)
        if not acting:
            # nobody can act yet (e.g. waiting on depart times): let time pass
            state, result = env.step(state, actions)
            continue
        prev_obs = {i: env.observe(state, i) for i in acting}
        state, result = env.step(state, actions)
        for i in acting:
            obs = prev_obs[i]
            action = actions[i]
            assert action is not None
            if policy_logp is None:
                logp = float(np.log(1.0 / obs.mask.sum()))
            else:
                logp = policy_logp(i, obs.vector, obs.mask, action)
            transitions[i].append(Transition(obs, action, float(result.rewards[i]), logp))
            paths[i].append(state.positions[i])
            cursor[i] += 1
            terminal_obs[i] = result.observations[i]
            if state.done[i]:
                arrived[i] = state.arrived[i]
                terminated[i] = True

    return {
        i: Trajectory(
            source=EXPERT_SOURCE,
            agent_id=i,
            transitions=transitions[i],
            terminal_obs=terminal_obs[i],
            junction_path=paths[i],
            arrived=arrived[i],
            terminated=terminated[i],
            fallback_used=i in executable.fallback_agents,
        )
        for i in plans
    }
