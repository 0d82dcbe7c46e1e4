"""Circuit representation over the three-gate set {J(theta), CZ, CX}.

Wires mirror graph vertices and carry their preparation (input state or |+>)
and fate (output or measured).  Gates are kept in program order, left to
right.  The time-sliced view groups an extended circuit's gates into
entangling, measurement-unitary, and correction rounds.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .angles import Angle
from .determinism import CorrectionStructure

__all__ = [
    "Gate",
    "Wire",
    "Circuit",
    "TimeSlicedView",
    "j_matrix",
    "slice_circuit",
    "emit_text",
    "parse_text",
    "digest",
]


@dataclass(frozen=True)
class Gate:
    kind: str  # "J" | "CZ" | "CX"
    wires: tuple[int, ...]
    angle: Angle | None = None

    def __post_init__(self) -> None:
        if self.kind == "J":
            if len(self.wires) != 1 or self.angle is None:
                raise ValueError("J gate needs one wire and an angle")
        elif self.kind == "CZ":
            if len(self.wires) != 2 or self.wires[0] == self.wires[1]:
                raise ValueError("CZ needs two distinct wires")
            if self.angle is not None:
                raise ValueError("CZ carries no angle")
            object.__setattr__(self, "wires", tuple(sorted(self.wires)))
        elif self.kind == "CX":
            if len(self.wires) != 2 or self.wires[0] == self.wires[1]:
                raise ValueError("CX needs distinct control and target")
            if self.angle is not None:
                raise ValueError("CX carries no angle")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")

    @property
    def control(self) -> int:
        assert self.kind == "CX"
        return self.wires[0]

    @property
    def target(self) -> int:
        assert self.kind == "CX"
        return self.wires[1]

    def text(self) -> str:
        if self.kind == "J":
            assert self.angle is not None
            return f"J({self.angle.text()}) {self.wires[0]}"
        return f"{self.kind} {self.wires[0]} {self.wires[1]}"


@dataclass(frozen=True)
class Wire:
    id: int
    init: str  # "input" | "plus"
    terminal: str  # "output" | "measured"

    def __post_init__(self) -> None:
        if self.init not in ("input", "plus"):
            raise ValueError(f"bad wire init {self.init!r}")
        if self.terminal not in ("output", "measured"):
            raise ValueError(f"bad wire terminal {self.terminal!r}")


@dataclass(frozen=True)
class Circuit:
    wires: tuple[Wire, ...]
    gates: tuple[Gate, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "wires", tuple(sorted(self.wires, key=lambda w: w.id)))
        object.__setattr__(self, "gates", tuple(self.gates))
        ids = [w.id for w in self.wires]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate wire ids")
        declared = set(ids)
        for g in self.gates:
            if not set(g.wires) <= declared:
                raise ValueError(f"gate {g.text()} uses undeclared wire")

    def wire(self, wire_id: int) -> Wire:
        for w in self.wires:
            if w.id == wire_id:
                return w
        raise KeyError(wire_id)

    def gates_on(self, wire_id: int) -> list[int]:
        return [k for k, g in enumerate(self.gates) if wire_id in g.wires]


def j_matrix(angle: Angle | float) -> np.ndarray:
    """(1/sqrt(2)) [[1, e^{i theta}], [1, -e^{i theta}]]; j_matrix(0) is Hadamard."""
    theta = angle.to_radians() if isinstance(angle, Angle) else float(angle)
    phase = np.exp(1j * theta)
    return np.array([[1.0, phase], [1.0, -phase]], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class TimeSlicedView:
    """Gate indices grouped as E_1, J_1, C_1, ..., E_d, J_d, C_d.

    Entangling slices past the first are always empty for freshly built
    extended circuits; they exist so rewrites have a place to park CZs
    migrating forward.
    """

    depth: int
    slices: tuple[tuple[int, ...], ...]  # length 3*depth (or 1 when nothing measured)

    def entangle(self, round_: int) -> tuple[int, ...]:
        return self.slices[3 * round_]

    def j_slice(self, round_: int) -> tuple[int, ...]:
        return self.slices[3 * round_ + 1]

    def corrections(self, round_: int) -> tuple[int, ...]:
        return self.slices[3 * round_ + 2]


def slice_circuit(circuit: Circuit, structure: CorrectionStructure) -> TimeSlicedView:
    """Partition an extended circuit's gate list into time slices.

    The circuit must follow the extend module's layout: entangling CZs, then
    per measurement round its J gates followed by its correction gates.
    """
    gates = circuit.gates
    n = len(gates)
    pos = 0
    while pos < n and gates[pos].kind == "CZ":
        pos += 1
    # Correction CZs are indistinguishable from entangling ones by kind
    # alone: the first J gate ends E_1.  Rounds then alternate J / correction
    # blocks keyed by which wires are measured in each round.
    slices: list[tuple[int, ...]] = [tuple(range(pos))]
    if not structure.layers:
        if pos != n:
            raise ValueError("gates after entangling round in a measurement-free circuit")
        return TimeSlicedView(0, tuple(slices))

    for round_, layer in enumerate(structure.layers):
        j_indices: list[int] = []
        expect = sorted(layer)
        for wire_id in expect:
            if pos >= n or gates[pos].kind != "J" or gates[pos].wires[0] != wire_id:
                raise ValueError(
                    f"round {round_ + 1}: expected J on wire {wire_id} at gate {pos}"
                )
            j_indices.append(pos)
            pos += 1
        corr: list[int] = []
        while pos < n and gates[pos].kind != "J":
            g = gates[pos]
            controller = g.wires[0] if g.kind == "CX" else None
            if g.kind == "CZ" and not (set(g.wires) & layer):
                raise ValueError(f"correction CZ {g.text()} touches no round-{round_ + 1} wire")
            if controller is not None and controller not in layer:
                raise ValueError(f"correction {g.text()} controlled outside round {round_ + 1}")
            corr.append(pos)
            pos += 1
        if round_ == 0:
            slices.extend([tuple(j_indices), tuple(corr)])
        else:
            slices.extend([(), tuple(j_indices), tuple(corr)])
    if pos != n:
        raise ValueError("trailing gates not covered by any round")

    counts: dict[int, int] = {}
    for g in gates:
        if g.kind == "CX":
            counts[g.control] = counts.get(g.control, 0) + 1
    for i, gset in structure.correcting_sets.items():
        if counts.get(i, 0) != len(gset):
            raise ValueError(f"wire {i} controls {counts.get(i, 0)} CX gates, wants {len(gset)}")
    return TimeSlicedView(len(structure.layers), tuple(slices))


def emit_text(circuit: Circuit) -> str:
    lines = [f"wire {w.id} {w.init} {w.terminal}" for w in circuit.wires]
    lines.extend(g.text() for g in circuit.gates)
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> Circuit:
    wires: list[Wire] = []
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        try:
            if fields[0] == "wire":
                _, wid, init, terminal = fields
                wires.append(Wire(int(wid), init, terminal))
            elif fields[0].startswith("J(") and fields[0].endswith(")"):
                if len(fields) != 2:
                    raise ValueError("J line needs exactly one wire")
                expr, wid = fields[0][2:-1], fields[1]
                gates.append(Gate("J", (int(wid),), Angle.parse(expr)))
            elif fields[0] in ("CZ", "CX"):
                kind, a, b = fields
                gates.append(Gate(kind, (int(a), int(b))))
            else:
                raise ValueError(f"unrecognized line {line!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return Circuit(tuple(wires), tuple(gates))


def digest(circuit: Circuit) -> str:
    return hashlib.sha256(emit_text(circuit).encode()).hexdigest()[:16]
