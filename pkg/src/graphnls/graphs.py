"""Connected metric graphs with the geometric queries the peaked ansatz needs.

A metric graph is a finite collection of intervals (edges) glued at
vertices.  Edges of infinite length are admitted in the description
format and are truncated to a finite length at build time, with a
homogeneous Dirichlet condition imposed at the artificial endpoint.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import yaml

from .errors import (
    DanglingEndpoint,
    DisconnectedGraph,
    NonpositiveEdgeLength,
    OverlappingPeaks,
)


@dataclass(frozen=True)
class Edge:
    """One interval of the graph, parametrized by arc length from `src`."""

    id: str
    src: str
    dst: str
    length: float
    truncated: bool = False

    @property
    def is_loop(self) -> bool:
        return self.src == self.dst


@dataclass(frozen=True)
class MetricGraph:
    """Immutable connected metric graph.

    Vertices are string ids.  Edge order is the declaration order and is
    the order used everywhere downstream (star enumeration, kernel-mode
    signs), so it is part of the graph's identity.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    truncation_length: float | None = None

    def edge(self, edge_id: str) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    def degree(self, v: str) -> int:
        # a self-loop contributes both of its ends
        return sum((e.src == v) + (e.dst == v) for e in self.edges)

    def incident(self, v: str) -> list[tuple[Edge, bool]]:
        """Edge-ends at `v` in declaration order.

        Returns (edge, oriented_away) pairs where oriented_away is True
        when the edge's own coordinate increases away from `v`.  A
        self-loop at `v` appears twice, once per end.
        """
        out = []
        for e in self.edges:
            if e.src == v:
                out.append((e, True))
            if e.dst == v:
                out.append((e, False))
        return out

    @property
    def dirichlet_vertices(self) -> frozenset[str]:
        """Artificial endpoints of truncated edges (pinned to zero)."""
        return frozenset(e.dst for e in self.edges if e.truncated)

    @property
    def is_compact(self) -> bool:
        return not any(e.truncated for e in self.edges)

    @property
    def total_length(self) -> float:
        return sum(e.length for e in self.edges)


@dataclass(frozen=True)
class StarNeighborhood:
    """The star of edge-ends around a peak vertex with its taper radius."""

    center: str
    incident_edges: tuple[tuple[str, bool], ...]
    degree: int
    radius: float


_TOP_KEYS = {"vertices", "edges", "truncation"}
_EDGE_KEYS = {"id", "from", "to", "length"}


def _parse_length(raw, edge_id: str, truncation: float | None) -> tuple[float, bool]:
    if isinstance(raw, str):
        if raw.strip().lower() != "inf":
            raise ValueError(f"edge {edge_id!r}: length must be a number or 'inf'")
        raw = math.inf
    if not isinstance(raw, (int, float)) or isinstance(raw, bool):
        raise ValueError(f"edge {edge_id!r}: length must be a number or 'inf'")
    val = float(raw)
    if math.isinf(val):
        if truncation is None:
            raise ValueError(
                f"edge {edge_id!r} is unbounded but no 'truncation' was given"
            )
        return truncation, True
    if not val > 0.0 or math.isnan(val):
        raise NonpositiveEdgeLength(f"edge {edge_id!r} has length {val}")
    return val, False


def build_graph(text: str) -> MetricGraph:
    """Build a validated MetricGraph from its textual description.

    The description is a strict YAML document::

        vertices: [c, a, b]
        edges:
          - {id: e1, from: c, to: a, length: 1.0}
          - {id: e2, from: c, to: b, length: "inf"}
        truncation: 20.0

    Unknown fields are rejected at every level.  `truncation` is
    required exactly when some edge has length "inf"; each unbounded
    edge is replaced by an interval of that length whose far endpoint
    gets a homogeneous Dirichlet condition.
    """
    doc = yaml.safe_load(text)
    if not isinstance(doc, dict):
        raise ValueError("graph description must be a mapping")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ValueError(f"unknown top-level fields: {sorted(unknown)}")
    if "vertices" not in doc or "edges" not in doc:
        raise ValueError("graph description needs 'vertices' and 'edges'")

    raw_vertices = doc["vertices"]
    if not isinstance(raw_vertices, list) or not raw_vertices:
        raise ValueError("'vertices' must be a non-empty list")
    vertices = tuple(str(v) for v in raw_vertices)
    if len(set(vertices)) != len(vertices):
        raise ValueError("duplicate vertex ids")

    truncation = doc.get("truncation")
    if truncation is not None:
        if not isinstance(truncation, (int, float)) or isinstance(truncation, bool):
            raise ValueError("'truncation' must be a positive number")
        truncation = float(truncation)
        if not truncation > 0.0:
            raise ValueError("'truncation' must be a positive number")

    raw_edges = doc["edges"]
    if not isinstance(raw_edges, list):
        raise ValueError("'edges' must be a list")
    vset = set(vertices)
    edges: list[Edge] = []
    seen_ids: set[str] = set()
    for entry in raw_edges:
        if not isinstance(entry, dict):
            raise ValueError("each edge must be a mapping")
        bad = set(entry) - _EDGE_KEYS
        if bad:
            raise ValueError(f"unknown edge fields: {sorted(bad)}")
        missing = _EDGE_KEYS - set(entry)
        if missing:
            raise ValueError(f"edge missing fields: {sorted(missing)}")
        eid = str(entry["id"])
        if eid in seen_ids:
            raise ValueError(f"duplicate edge id {eid!r}")
        seen_ids.add(eid)
        src, dst = str(entry["from"]), str(entry["to"])
        for endpoint in (src, dst):
            if endpoint not in vset:
                raise DanglingEndpoint(
                    f"edge {eid!r} references undeclared vertex {endpoint!r}"
                )
        length, truncated = _parse_length(entry["length"], eid, truncation)
        if truncated:
            if src == dst:
                raise ValueError(f"edge {eid!r}: an unbounded edge cannot be a loop")
            edges.append(Edge(eid, src, dst, length, truncated=True))
        else:
            edges.append(Edge(eid, src, dst, length))

    # the far end of a truncated edge models a point at infinity: nothing
    # else may attach there
    for e in edges:
        if e.truncated:
            others = [
                f.id
                for f in edges
                if f is not e and e.dst in (f.src, f.dst)
            ]
            if others:
                raise ValueError(
                    f"truncation endpoint {e.dst!r} of edge {e.id!r} is also "
                    f"used by {others}"
                )

    g = MetricGraph(vertices, tuple(edges), truncation)
    _check_connected(g)
    return g


def load_graph(path) -> MetricGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return build_graph(fh.read())


def _check_connected(g: MetricGraph) -> None:
    if len(g.vertices) == 1 and not g.edges:
        raise DisconnectedGraph("a single vertex with no edges has degree 0")
    adj: dict[str, set[str]] = {v: set() for v in g.vertices}
    for e in g.edges:
        adj[e.src].add(e.dst)
        adj[e.dst].add(e.src)
    seen = {g.vertices[0]}
    stack = [g.vertices[0]]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    missing = set(g.vertices) - seen
    if missing:
        raise DisconnectedGraph(f"unreachable vertices: {sorted(missing)}")
    for v in g.vertices:
        if g.degree(v) == 0:
            raise DisconnectedGraph(f"vertex {v!r} has degree 0")


def vertex_distances(g: MetricGraph, source: str) -> dict[str, float]:
    """Shortest-path distance from `source` to every vertex (Dijkstra)."""
    dist = {v: math.inf for v in g.vertices}
    dist[source] = 0.0
    heap: list[tuple[float, str]] = [(0.0, source)]
    while heap:
        d, v = heapq.heappop(heap)
        if d > dist[v]:
            continue
        for e, away in g.incident(v):
            w = e.dst if away else e.src
            nd = d + e.length
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def graph_distance(g: MetricGraph, v: str, w: str) -> float:
    return vertex_distances(g, v)[w]


def metric_ball(
    g: MetricGraph, v: str, r: float
) -> dict[str, tuple[tuple[float, float], ...]]:
    """Open ball of radius r around vertex v, as per-edge intervals.

    Intervals are half-open subsets of [0, length] in each edge's own
    arc-length coordinate (measured from the edge's `from` endpoint).  A
    ball can enter an edge from both ends; the two pieces are merged
    when they meet.
    """
    if not r > 0.0:
        raise ValueError("ball radius must be positive")
    dist = vertex_distances(g, v)
    out: dict[str, tuple[tuple[float, float], ...]] = {}
    for e in g.edges:
        reach_src = r - dist[e.src]
        reach_dst = r - dist[e.dst]
        pieces: list[tuple[float, float]] = []
        if reach_src > 0.0:
            pieces.append((0.0, min(e.length, reach_src)))
        if reach_dst > 0.0:
            lo = max(0.0, e.length - reach_dst)
            if pieces and lo <= pieces[0][1]:
                pieces = [(0.0, e.length)]
            else:
                pieces.append((lo, e.length))
        if pieces:
            out[e.id] = tuple(pieces)
    return out


def odd_degree_vertices(g: MetricGraph, min_degree: int = 3) -> list[str]:
    """Vertices with odd degree >= min_degree, the eligible peak sites."""
    return [
        v
        for v in g.vertices
        if g.degree(v) % 2 == 1 and g.degree(v) >= min_degree
    ]


def star_neighborhood(
    g: MetricGraph, center: str, mode: str = "single"
) -> StarNeighborhood:
    """The full star at `center` with its taper radius.

    The radius is min |e|/2 over incident edges in single-peak mode and
    min |e|/4 in multi-peak mode.  An incident self-loop sends two rays
    from the center into the same interval, so it enters the minimum
    with half its usual share.
    """
    if mode not in ("single", "multi"):
        raise ValueError(f"unknown star mode {mode!r}")
    inc = g.incident(center)
    if not inc:
        raise ValueError(f"vertex {center!r} has no incident edges")
    divisor = 2.0 if mode == "single" else 4.0
    radius = math.inf
    for e, _ in inc:
        share = e.length / (2.0 * divisor) if e.is_loop else e.length / divisor
        radius = min(radius, share)
    return StarNeighborhood(
        center=center,
        incident_edges=tuple((e.id, away) for e, away in inc),
        degree=len(inc),
        radius=radius,
    )


def insert_midpoints(g: MetricGraph, peaks: list[str]) -> MetricGraph:
    """Split every edge joining two distinct peak vertices at its midpoint.

    Returns a new graph where each such edge `e` becomes `e__a`,
    `e__b` glued at a fresh degree-2 vertex `e__mid`.  Needed so that
    two peaks sharing an edge get disjoint support balls.
    """
    peak_set = set(peaks)
    new_vertices = list(g.vertices)
    new_edges: list[Edge] = []
    for e in g.edges:
        if (
            not e.is_loop
            and e.src in peak_set
            and e.dst in peak_set
        ):
            mid = f"{e.id}__mid"
            if mid in new_vertices:
                raise ValueError(f"vertex id {mid!r} already taken")
            new_vertices.append(mid)
            half = e.length / 2.0
            new_edges.append(Edge(f"{e.id}__a", e.src, mid, half))
            new_edges.append(Edge(f"{e.id}__b", mid, e.dst, half))
        else:
            new_edges.append(e)
    return MetricGraph(tuple(new_vertices), tuple(new_edges), g.truncation_length)


def check_disjoint_peak_balls(
    g: MetricGraph, stars: list[StarNeighborhood]
) -> None:
    """Raise OverlappingPeaks unless all 2*radius balls are pairwise disjoint."""
    for i in range(len(stars)):
        di = vertex_distances(g, stars[i].center)
        for j in range(i + 1, len(stars)):
            gap = 2.0 * stars[i].radius + 2.0 * stars[j].radius
            if di[stars[j].center] < gap - 1e-12:
                raise OverlappingPeaks(
                    f"support balls of peaks {stars[i].center!r} and "
                    f"{stars[j].center!r} overlap "
                    f"(distance {di[stars[j].center]:.6g} < {gap:.6g})"
                )
