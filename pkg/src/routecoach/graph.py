"""Directed weighted road graphs with planar junction coordinates.

Junction ids are dense integers starting at 0.  Outgoing edges of every
junction are kept in a fixed order (ascending destination id) so that the
i-th outgoing edge is well defined everywhere an action index refers to one.
"""
from __future__ import annotations

import json
from heapq import heappop, heappush
from typing import Iterable, NamedTuple

INF = float("inf")


class GraphError(ValueError):
    """Invalid graph structure or graph file contents."""


class Edge(NamedTuple):
    src: int
    dst: int
    length: float


class RoadGraph:
    """Immutable directed graph; build once, then treat as read-only.

    ``max_out_degree`` is the ``m`` that sizes action and observation
    vectors for environments running on this graph.
    """

    def __init__(self, nodes: dict[int, tuple[float, float]], edges: Iterable[Edge]):
        self.nodes: dict[int, tuple[float, float]] = dict(nodes)
        self.edges: tuple[Edge, ...] = tuple(Edge(int(e[0]), int(e[1]), float(e[2])) for e in edges)
        seen: set[tuple[int, int]] = set()
        for e in self.edges:
            if e.src not in self.nodes:
                raise GraphError(f"edge {e.src}->{e.dst} references missing junction {e.src}")
            if e.dst not in self.nodes:
                raise GraphError(f"edge {e.src}->{e.dst} references missing junction {e.dst}")
            if e.length <= 0:
                raise GraphError(f"edge {e.src}->{e.dst} has non-positive length {e.length}")
            if (e.src, e.dst) in seen:
                raise GraphError(f"duplicate edge {e.src}->{e.dst}")
            seen.add((e.src, e.dst))
        adjacency: dict[int, list[Edge]] = {j: [] for j in self.nodes}
        for e in self.edges:
            adjacency[e.src].append(e)
        self._adjacency = {j: tuple(sorted(out, key=lambda e: e.dst)) for j, out in adjacency.items()}
        self.max_out_degree = max((len(out) for out in self._adjacency.values()), default=0)
        self._dist_cache: dict[int, dict[int, float]] = {}
        self._diameter: float | None = None

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def out_edges(self, junction: int) -> tuple[Edge, ...]:
        return self._adjacency[junction]

    def edge_between(self, src: int, dst: int) -> Edge | None:
        for e in self._adjacency.get(src, ()):
            if e.dst == dst:
                return e
        return None

    # -- shortest paths ----------------------------------------------------

    def shortest_path(self, a: int, b: int) -> tuple[float, list[int]] | None:
        """Exact shortest directed path from ``a`` to ``b`` by summed length.

        Ties in length are broken by lexicographic comparison of the
        junction-id sequence, making the result deterministic.  Returns
        ``None`` when ``b`` is unreachable from ``a``.
        """
        if a not in self.nodes or b not in self.nodes:
            raise GraphError(f"unknown junction in shortest_path({a}, {b})")
        frontier: list[tuple[float, tuple[int, ...]]] = [(0.0, (a,))]
        settled: set[int] = set()
        while frontier:
            dist, path = heappop(frontier)
            node = path[-1]
            if node in settled:
                continue
            settled.add(node)
            if node == b:
                return dist, list(path)
            for e in self._adjacency[node]:
                if e.dst not in settled:
                    heappush(frontier, (dist + e.length, path + (e.dst,)))
        return None

    def distances_from(self, src: int) -> dict[int, float]:
        """Shortest-path distance from ``src`` to every junction (inf if unreachable)."""
        if src not in self.nodes:
            raise GraphError(f"unknown junction {src}")
        dist = {j: INF for j in self.nodes}
        dist[src] = 0.0
        frontier = [(0.0, src)]
        while frontier:
            d, node = heappop(frontier)
            if d > dist[node]:
                continue
            for e in self._adjacency[node]:
                nd = d + e.length
                if nd < dist[e.dst]:
                    dist[e.dst] = nd
                    heappush(frontier, (nd, e.dst))
        return dist

    def distances_to(self, dest: int) -> dict[int, float]:
        """Shortest-path distance from every junction to ``dest``.

        Unreachable junctions map to ``inf``.  Cached per destination.
        """
        if dest in self._dist_cache:
            return self._dist_cache[dest]
        if dest not in self.nodes:
            raise GraphError(f"unknown junction {dest}")
        reverse: dict[int, list[tuple[int, float]]] = {j: [] for j in self.nodes}
        for e in self.edges:
            reverse[e.dst].append((e.src, e.length))
        dist = {j: INF for j in self.nodes}
        dist[dest] = 0.0
        frontier = [(0.0, dest)]
        while frontier:
            d, node = heappop(frontier)
            if d > dist[node]:
                continue
            for src, length in reverse[node]:
                nd = d + length
                if nd < dist[src]:
                    dist[src] = nd
                    heappush(frontier, (nd, src))
        self._dist_cache[dest] = dist
        return dist

    @property
    def diameter(self) -> float:
        """Largest finite shortest-path distance over all ordered pairs."""
        if self._diameter is None:
            best = 0.0
            for dest in self.nodes:
                for d in self.distances_to(dest).values():
                    if d != INF and d > best:
                        best = d
            self._diameter = best
        return self._diameter

    def k_shortest_paths(self, a: int, b: int, k: int) -> list[tuple[float, list[int]]]:
        """Up to ``k`` loopless paths from ``a`` to ``b``, cheapest first.

        Yen's algorithm on top of :meth:`shortest_path`; ordering of
        equal-cost paths is lexicographic, so the result is deterministic.
        """
        first = self.shortest_path(a, b)
        if first is None:
            return []
        paths: list[tuple[float, list[int]]] = [first]
        candidates: list[tuple[float, tuple[int, ...]]] = []
        seen = {tuple(first[1])}
        while len(paths) < k:
            _, prev_path = paths[-1]
            for i in range(len(prev_path) - 1):
                spur_node = prev_path[i]
                root = prev_path[: i + 1]
                root_cost = 0.0
                for u, v in zip(root, root[1:]):
                    edge = self.edge_between(u, v)
                    assert edge is not None
                    root_cost += edge.length
                banned_edges = set()
                for cost, path in paths:
                    if list(path[: i + 1]) == list(root):
                        banned_edges.add((path[i], path[i + 1]))
                banned_nodes = set(root[:-1])
                spur = self._restricted_shortest(spur_node, b, banned_nodes, banned_edges)
                if spur is None:
                    continue
                spur_cost, spur_path = spur
                total = tuple(root[:-1]) + tuple(spur_path)
                if total not in seen:
                    seen.add(total)
                    heappush(candidates, (root_cost + spur_cost, total))
            if not candidates:
                break
            cost, path = heappop(candidates)
            paths.append((cost, list(path)))
        return paths

    def _restricted_shortest(
        self,
        a: int,
        b: int,
        banned_nodes: set[int],
        banned_edges: set[tuple[int, int]],
    ) -> tuple[float, list[int]] | None:
        frontier: list[tuple[float, tuple[int, ...]]] = [(0.0, (a,))]
        settled: set[int] = set()
        while frontier:
            dist, path = heappop(frontier)
            node = path[-1]
            if node in settled:
                continue
            settled.add(node)
            if node == b:
                return dist, list(path)
            for e in self._adjacency[node]:
                if e.dst in settled or e.dst in banned_nodes or (e.src, e.dst) in banned_edges:
                    continue
                heappush(frontier, (dist + e.length, path + (e.dst,)))
        return None

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "nodes": [{"id": j, "x": x, "y": y} for j, (x, y) in sorted(self.nodes.items())],
            "edges": [{"from": e.src, "to": e.dst, "length": e.length} for e in self.edges],
        }
        return json.dumps(doc, indent=2)


def load_graph(text: str) -> RoadGraph:
    """Parse the JSON graph format into a validated :class:`RoadGraph`.

    Format: ``{"nodes": [{"id", "x", "y"}, ...], "edges": [{"from", "to",
    "length"}, ...]}`` with dense integer ids starting at 0.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"graph file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise GraphError("graph file must be an object with 'nodes' and 'edges'")
    nodes: dict[int, tuple[float, float]] = {}
    for entry in doc["nodes"]:
        try:
            nodes[int(entry["id"])] = (float(entry["x"]), float(entry["y"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"bad node entry {entry!r}") from exc
    if sorted(nodes) != list(range(len(nodes))):
        raise GraphError("junction ids must be dense integers starting at 0")
    edges = []
    for entry in doc["edges"]:
        try:
            edges.append(Edge(int(entry["from"]), int(entry["to"]), float(entry["length"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"bad edge entry {entry!r}") from exc
    return RoadGraph(nodes, edges)
