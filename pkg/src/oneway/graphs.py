"""Open graphs: a simple graph plus input/output designations and angles.

Vertices are small non-negative integers.  Edges are stored as sorted pairs.
Every non-output vertex carries a measurement angle; outputs never do.
Construction only normalises; call validate() for a report, or use
parse_graph, which rejects broken files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

from .angles import Angle

__all__ = [
    "OpenGraph",
    "Stabilizer",
    "validate",
    "stabilizer_of",
    "odd_neighborhood",
    "parse_graph",
    "parse_graph_with_sets",
    "emit_graph",
]


@dataclass(frozen=True)
class OpenGraph:
    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    inputs: frozenset[int]
    outputs: frozenset[int]
    angles: dict[int, Angle] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(sorted(set(self.vertices))))
        object.__setattr__(
            self,
            "edges",
            frozenset((min(a, b), max(a, b)) for a, b in self.edges),
        )
        object.__setattr__(self, "inputs", frozenset(self.inputs))
        object.__setattr__(self, "outputs", frozenset(self.outputs))

    @cached_property
    def neighbors(self) -> dict[int, frozenset[int]]:
        nbrs: dict[int, set[int]] = {v: set() for v in self.vertices}
        for a, b in self.edges:
            nbrs[a].add(b)
            nbrs[b].add(a)
        return {v: frozenset(s) for v, s in nbrs.items()}

    @property
    def measured(self) -> frozenset[int]:
        return frozenset(self.vertices) - self.outputs


def validate(graph: OpenGraph) -> list[str]:
    """Invariant report; empty list means the graph is well-formed."""
    problems: list[str] = []
    vs = set(graph.vertices)
    if any(v < 0 for v in vs):
        problems.append("vertex ids must be non-negative integers")
    for a, b in sorted(graph.edges):
        if a == b:
            problems.append(f"self-loop on {a}")
        elif a not in vs or b not in vs:
            problems.append(f"edge {a}-{b} uses unknown vertex")
    if not graph.inputs <= vs:
        problems.append("inputs must be vertices")
    if not graph.outputs <= vs:
        problems.append("outputs must be vertices")
    measured = vs - graph.outputs
    missing = measured - set(graph.angles)
    if missing:
        problems.append(f"missing angles for measured vertices {sorted(missing)}")
    extra = set(graph.angles) - measured
    if extra:
        problems.append(f"angles given for unmeasured vertices {sorted(extra)}")
    return problems


@dataclass(frozen=True)
class Stabilizer:
    """X on one vertex, Z on each of its neighbors; fixes the graph state."""

    vertex: int
    z_support: frozenset[int]

    @property
    def x_support(self) -> frozenset[int]:
        return frozenset({self.vertex})


def stabilizer_of(graph: OpenGraph, j: int) -> Stabilizer:
    if j not in graph.neighbors:
        raise ValueError(f"vertex {j} not in graph")
    if j in graph.inputs:
        raise ValueError(f"vertex {j} is an input; it carries no prepared stabilizer")
    return Stabilizer(j, graph.neighbors[j])


def odd_neighborhood(graph: OpenGraph, subset: frozenset[int] | set[int]) -> frozenset[int]:
    """Vertices adjacent to an odd number of members of ``subset``.

    Linear over symmetric difference: Odd(S ^ T) == Odd(S) ^ Odd(T); equals
    the Z-support of the product of the members' stabilizers.
    """
    counts: dict[int, int] = {}
    for s in subset:
        if s not in graph.neighbors:
            raise ValueError(f"vertex {s} not in graph")
        for n in graph.neighbors[s]:
            counts[n] = counts.get(n, 0) + 1
    return frozenset(v for v, c in counts.items() if c % 2 == 1)


def parse_graph(text: str) -> OpenGraph:
    """Read the key/value graph format, rejecting invalid graphs.

    Keys: vertices, edges (``a-b`` pairs), inputs, outputs,
    angles (``v=expr`` pairs), correcting_sets (``v={a,b}`` pairs, optional;
    use parse_graph_with_sets to receive them).  ``#`` starts a comment.
    """
    graph, _ = parse_graph_with_sets(text)
    return graph


def parse_graph_with_sets(text: str) -> tuple[OpenGraph, dict[int, frozenset[int]] | None]:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ValueError(f"line {lineno}: expected 'key: value', got {line!r}")
        key, value = line.split(":", 1)
        key = key.strip()
        if key in fields:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value.strip()

    for required in ("vertices", "edges", "inputs", "outputs"):
        if required not in fields:
            raise ValueError(f"missing key {required!r}")

    def ints(value: str) -> list[int]:
        return [int(tok) for tok in value.split()] if value else []

    vertices = tuple(ints(fields["vertices"]))
    edges = set()
    for tok in fields["edges"].split():
        a, sep, b = tok.partition("-")
        if not sep:
            raise ValueError(f"bad edge {tok!r}")
        edges.add((int(a), int(b)))
    inputs = frozenset(ints(fields["inputs"]))
    outputs = frozenset(ints(fields["outputs"]))

    angles: dict[int, Angle] = {}
    for tok in fields.get("angles", "").split():
        v, sep, expr = tok.partition("=")
        if not sep:
            raise ValueError(f"bad angle assignment {tok!r}")
        angles[int(v)] = Angle.parse(expr)

    sets: dict[int, frozenset[int]] | None = None
    if "correcting_sets" in fields:
        sets = {}
        for tok in fields["correcting_sets"].split():
            v, sep, body = tok.partition("=")
            if not sep or not (body.startswith("{") and body.endswith("}")):
                raise ValueError(f"bad correcting set {tok!r}")
            members = frozenset(int(x) for x in body[1:-1].split(",") if x)
            sets[int(v)] = members

    graph = OpenGraph(vertices, frozenset(edges), inputs, outputs, angles)
    problems = validate(graph)
    if problems:
        raise ValueError("; ".join(problems))
    return graph, sets


def emit_graph(graph: OpenGraph, sets: dict[int, frozenset[int]] | None = None) -> str:
    lines = [
        "vertices: " + " ".join(str(v) for v in graph.vertices),
        "edges: " + " ".join(f"{a}-{b}" for a, b in sorted(graph.edges)),
        "inputs: " + " ".join(str(v) for v in sorted(graph.inputs)),
        "outputs: " + " ".join(str(v) for v in sorted(graph.outputs)),
    ]
    if graph.angles:
        lines.append(
            "angles: "
            + " ".join(f"{v}={graph.angles[v].text()}" for v in sorted(graph.angles))
        )
    if sets is not None:
        lines.append(
            "correcting_sets: "
            + " ".join(
                "{}={{{}}}".format(v, ",".join(str(m) for m in sorted(sets[v])))
                for v in sorted(sets)
            )
        )
    return "\n".join(lines) + "\n"
