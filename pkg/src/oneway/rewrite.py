"""Directed circuit identities and the wire-stripping drivers.

A rewrite site is a tuple of ascending gate indices.  Conceptually the site
gates are gathered at the last index (each one commuting rightward past the
non-site gates in between), the identity is applied there, and the
replacement block is spliced in.  Positions therefore shift by exactly
len(site) - 1 to the left of the insertion point, which keeps traces
replayable.

Identity catalogue, written in program order (left gate acts first):

  cz-commute   [CZ jk; CX ij; CZ ik] == [CX ij; CZ jk]   (and mirrored
               arrangements; the CZ touching the control is consumed and the
               other two swap relative order)
  cz-to-cx     [CZ jk; CZ ik] == [CZ jk; CX ij]          (wire j fresh |+>)
  cx-commute   [CX jk; CX ij; CX ik] == [CX ij; CX jk]   (and mirrored)
  jgate        [CZ ij; J(t) i; CX ij] == J(t) on j       (wire j fresh |+>,
               wire i measured and otherwise finished; j inherits i's start)
  peephole     equal CZ or CX pairs cancel
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .circuits import Circuit, Gate, TimeSlicedView, Wire, digest
from .determinism import CorrectionStructure

__all__ = [
    "RewriteStep",
    "SimplificationTrace",
    "RewriteError",
    "FlowSimplifyError",
    "GflowSearchExhausted",
    "apply_cz_commute",
    "apply_cz_to_cx",
    "apply_cx_commute",
    "apply_jgate",
    "apply_peephole",
    "replay",
    "trace_text",
    "simplify_flow",
    "simplify_gflow",
]


class RewriteError(ValueError):
    """Site does not match the rule, or gathering it is obstructed."""


class FlowSimplifyError(RuntimeError):
    """The flow driver hit a circuit it could not strip (invalid input)."""


class GflowSearchExhausted(RuntimeError):
    """No special-CX designation succeeded within the attempt budget."""

    def __init__(self, attempts: int, partial: "SimplificationTrace"):
        super().__init__(f"gflow designation search exhausted after {attempts} attempts")
        self.attempts = attempts
        self.partial = partial


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    consumed: tuple[int, ...]
    produced: tuple[Gate, ...]
    wire_removed: int | None = None

    def text(self) -> str:
        line = (
            f"{self.rule} consumed={','.join(str(k) for k in self.consumed)}"
            f" produced={','.join(g.text() for g in self.produced)}"
        )
        if self.wire_removed is not None:
            line += f" removed-wire={self.wire_removed}"
        return line


@dataclass(frozen=True)
class SimplificationTrace:
    steps: tuple[RewriteStep, ...]
    initial_digest: str
    final_digest: str


def trace_text(trace: SimplificationTrace) -> str:
    return "".join(step.text() + "\n" for step in trace.steps)


def _commutes(a: Gate, b: Gate) -> bool:
    """Sound syntactic test; False only means "do not reorder"."""
    if not set(a.wires) & set(b.wires):
        return True
    if a.kind == "J" or b.kind == "J":
        return False
    if a.kind == "CZ" and b.kind == "CZ":
        return True
    if a.kind == "CZ":
        return b.wires[1] not in a.wires
    if b.kind == "CZ":
        return a.wires[1] not in b.wires
    return a.wires[1] != b.wires[0] and b.wires[1] != a.wires[0]


def _check_site(circuit: Circuit, site: tuple[int, ...]) -> None:
    if list(site) != sorted(set(site)):
        raise RewriteError(f"site indices must be strictly ascending, got {site}")
    if site and not (0 <= site[0] and site[-1] < len(circuit.gates)):
        raise RewriteError(f"site {site} out of range")


def _check_gather(circuit: Circuit, site: tuple[int, ...]) -> None:
    """Each site gate must commute past the non-site gates it crosses."""
    in_site = set(site)
    gates = circuit.gates
    for p in site[:-1]:
        for q in range(p + 1, site[-1]):
            if q in in_site:
                continue
            if not _commutes(gates[p], gates[q]):
                raise RewriteError(
                    f"gate {gates[q].text()} at {q} blocks gathering {gates[p].text()} from {p}"
                )


def _splice(circuit: Circuit, site: tuple[int, ...], produced: tuple[Gate, ...]) -> Circuit:
    insert_at = site[-1] - (len(site) - 1)
    kept = [g for k, g in enumerate(circuit.gates) if k not in set(site)]
    return Circuit(circuit.wires, tuple(kept[:insert_at]) + produced + tuple(kept[insert_at:]))


def apply_cz_commute(circuit: Circuit, site: tuple[int, ...]) -> tuple[Circuit, RewriteStep]:
    """Either direction of the CZ/CX commutation identity.

    Three gates: the CZ sharing the control wire is consumed, the other two
    swap order.  Two gates (a CX and the CZ on its target): swap them and
    materialize the third gate; this direction grows the circuit and is
    never used by the drivers.
    """
    _check_site(circuit, site)
    gates = [circuit.gates[k] for k in site]
    cxs = [g for g in gates if g.kind == "CX"]
    czs = [g for g in gates if g.kind == "CZ"]
    if len(site) == 3:
        if len(cxs) != 1 or len(czs) != 2:
            raise RewriteError("need one CX and two CZ gates")
        cx = cxs[0]
        i, j = cx.control, cx.target
        partner = [g for g in czs if j in g.wires and i not in g.wires]
        eaten = [g for g in czs if i in g.wires and j not in g.wires]
        if len(partner) != 1 or len(eaten) != 1:
            raise RewriteError("CZ pair does not fit the commutation pattern")
        (k,) = set(partner[0].wires) - {j}
        if set(eaten[0].wires) != {i, k}:
            raise RewriteError("CZ pair does not share the third wire")
        _check_gather(circuit, site)
        first, second = (partner[0], cx) if gates.index(cx) < gates.index(partner[0]) else (cx, partner[0])
        produced = (first, second)
        step = RewriteStep("cz-commute", site, produced)
        return _splice(circuit, site, produced), step
    if len(site) == 2:
        if len(cxs) != 1 or len(czs) != 1:
            raise RewriteError("need one CX and one CZ gate")
        cx, cz = cxs[0], czs[0]
        i, j = cx.control, cx.target
        if j not in cz.wires or i in cz.wires:
            raise RewriteError("CZ must touch the CX target and avoid its control")
        (k,) = set(cz.wires) - {j}
        _check_gather(circuit, site)
        first, second = (cz, cx) if gates[0] is cx else (cx, cz)
        produced = (first, second, Gate("CZ", (i, k)))
        step = RewriteStep("cz-commute", site, produced)
        return _splice(circuit, site, produced), step
    raise RewriteError("site must have two or three gates")


def _require_fresh(circuit: Circuit, wire: int, before: int, site: set[int]) -> None:
    w = circuit.wire(wire)
    if w.init != "plus":
        raise RewriteError(f"wire {wire} is not |+>-initialized")
    for q in range(before):
        if q not in site and wire in circuit.gates[q].wires:
            raise RewriteError(
                f"wire {wire} is not fresh: touched by {circuit.gates[q].text()} at {q}"
            )


def apply_cz_to_cx(
    circuit: Circuit, site: tuple[int, ...], fresh: int | None = None
) -> tuple[Circuit, RewriteStep]:
    """Trade a CZ pair on a fresh |+> wire for a CX (or back).

    Forward: [CZ jk; CZ ik] with j fresh becomes [CZ jk; CX ij].  Reverse:
    [CZ jk; CX ij] with j fresh becomes [CZ jk; CZ ik].
    """
    _check_site(circuit, site)
    if len(site) != 2:
        raise RewriteError("site must have two gates")
    g0, g1 = (circuit.gates[k] for k in site)

    if g0.kind == "CZ" and g1.kind == "CZ":
        shared = set(g0.wires) & set(g1.wires)
        if len(shared) != 1:
            raise RewriteError("CZ pair must share exactly one wire")
        (k,) = shared
        others = (set(g0.wires) | set(g1.wires)) - {k}
        if fresh is None:
            candidates = []
            for cand in sorted(others):
                try:
                    _require_fresh(circuit, cand, site[-1], set(site))
                except RewriteError:
                    continue
                candidates.append(cand)
            if len(candidates) != 1:
                raise RewriteError(
                    f"fresh wire ambiguous or absent among {sorted(others)}; pass one explicitly"
                )
            fresh = candidates[0]
        if fresh not in others:
            raise RewriteError(f"wire {fresh} is not part of the site")
        (i,) = others - {fresh}
        _require_fresh(circuit, fresh, site[-1], set(site))
        _check_gather(circuit, site)
        produced = (Gate("CZ", (fresh, k)), Gate("CX", (i, fresh)))
        step = RewriteStep("cz-to-cx", site, produced)
        return _splice(circuit, site, produced), step

    if g0.kind == "CZ" and g1.kind == "CX":
        j = g1.target
        if j not in g0.wires or g1.control in g0.wires:
            raise RewriteError("CX target must sit on the CZ, its control must not")
        (k,) = set(g0.wires) - {j}
        i = g1.control
        _require_fresh(circuit, j, site[-1], set(site))
        _check_gather(circuit, site)
        produced = (Gate("CZ", (j, k)), Gate("CZ", (i, k)))
        step = RewriteStep("cz-to-cx", site, produced)
        return _splice(circuit, site, produced), step

    raise RewriteError("site must be a CZ pair or CZ followed by CX")


def _cx_word(gate_list: list[Gate], wires: list[int]) -> tuple[int, ...]:
    """GF(2) action of a CX-only sequence, as images of basis bit vectors."""
    index = {w: k for k, w in enumerate(wires)}
    images = [1 << k for k in range(len(wires))]  # column space over GF(2)
    state = list(images)
    for g in gate_list:
        c, t = index[g.control], index[g.target]
        state[t] ^= state[c]
    return tuple(state)


def apply_cx_commute(circuit: Circuit, site: tuple[int, ...]) -> tuple[Circuit, RewriteStep]:
    """Cancel the redundant CX in a triangle of CX gates.

    The site must be three CX gates on wires i, j, k shaped (i->j), (j->k),
    (i->k); the (i->k) gate is consumed and the other two are reordered so
    the overall linear action is unchanged (checked over GF(2), which is
    exact for CX-only circuits).
    """
    _check_site(circuit, site)
    if len(site) != 3:
        raise RewriteError("site must have three gates")
    gates = [circuit.gates[k] for k in site]
    if any(g.kind != "CX" for g in gates):
        raise RewriteError("all site gates must be CX")
    wires = sorted({w for g in gates for w in g.wires})
    if len(wires) != 3:
        raise RewriteError("site must span exactly three wires")

    want = _cx_word(gates, wires)
    for drop in range(3):
        rest = [g for k, g in enumerate(gates) if k != drop]
        a, b = rest
        if not (a.target == b.control or b.target == a.control):
            continue
        for candidate in ((a, b), (b, a)):
            if _cx_word(list(candidate), wires) == want:
                _check_gather(circuit, site)
                produced = candidate
                step = RewriteStep("cx-commute", site, produced)
                return _splice(circuit, site, produced), step
    raise RewriteError("CX triple does not reduce to a two-gate word")


def apply_peephole(circuit: Circuit, site: tuple[int, ...]) -> tuple[Circuit, RewriteStep]:
    """Cancel an equal CZ or CX pair separated only by commuting gates."""
    _check_site(circuit, site)
    if len(site) != 2:
        raise RewriteError("site must have two gates")
    g0, g1 = (circuit.gates[k] for k in site)
    if g0 != g1 or g0.kind == "J":
        raise RewriteError("site gates must be an equal CZ or CX pair")
    _check_gather(circuit, site)
    step = RewriteStep("peephole-cancel", site, ())
    return _splice(circuit, site, ()), step


def apply_jgate(circuit: Circuit, i: int, j: int) -> tuple[Circuit, RewriteStep]:
    """Collapse measured wire i onto its fresh partner j.

    Wire i must end [..., CZ ij, (commuting i-gates), J i, CX i->j]; wire j
    must be untouched |+> before the CX, up to gates that commute out past
    the CX.  Everything left on wire i is relabeled to j (it rides along
    through the teleportation), wire i disappears, and J picks up i's angle
    at the CX position.
    """
    gates = circuit.gates
    wi, wj = circuit.wire(i), circuit.wire(j)
    if wi.terminal != "measured":
        raise RewriteError(f"wire {i} is not a measured wire")
    if wj.init != "plus":
        raise RewriteError(f"wire {j} is not |+>-initialized")

    on_i = circuit.gates_on(i)
    if not on_i:
        raise RewriteError(f"wire {i} carries no gates")
    cx_pos = on_i[-1]
    cx = gates[cx_pos]
    if not (cx.kind == "CX" and cx.control == i and cx.target == j):
        raise RewriteError(f"leftover gate on wire {i}: last is {cx.text()}, want CX {i} {j}")

    j_positions = [k for k in on_i if gates[k].kind == "J"]
    if not j_positions:
        raise RewriteError(f"wire {i} carries no J gate")
    jg_pos = j_positions[-1]  # earlier J gates are inherited prefix content
    between = [k for k in on_i if jg_pos < k < cx_pos]
    if between:
        raise RewriteError(f"leftover gate on wire {i} between J and CX: {gates[between[0]].text()}")

    cz_candidates = [k for k in on_i if k < jg_pos and gates[k] == Gate("CZ", (i, j))]
    if not cz_candidates:
        raise RewriteError(f"no CZ {min(i, j)} {max(i, j)} precedes the J on wire {i}")
    cz_pos = cz_candidates[-1]

    for k in on_i:
        if k in (cz_pos, jg_pos, cx_pos):
            continue
        g = gates[k]
        if j in g.wires:
            raise RewriteError(f"gate {g.text()} touches both {i} and {j}; cannot relabel")
        if cz_pos < k < jg_pos and not _commutes(g, gates[cz_pos]):
            raise RewriteError(f"gate {g.text()} at {k} cannot slide before the CZ {i} {j}")

    site = {cz_pos, jg_pos, cx_pos}
    # A gate touching j inside the span may ride along if it commutes all
    # the way past the final CX (a CX sharing j as its target does); it is
    # reinserted right after the teleported J.  Scanning right to left lets
    # earlier riders skip over later ones, which keep their relative order.
    sliders: list[int] = []
    for q in range(cx_pos - 1, cz_pos, -1):
        g = gates[q]
        if q in site or j not in g.wires or i in g.wires:
            continue
        movable = all(
            r in sliders or _commutes(g, gates[r]) for r in range(q + 1, cx_pos + 1)
        )
        if movable:
            sliders.append(q)
    slid = set(sliders)
    for q in range(cx_pos):
        if q not in site and q not in slid and j in gates[q].wires:
            raise RewriteError(f"wire {j} is not fresh: {gates[q].text()} at {q}")

    theta = gates[jg_pos].angle
    assert theta is not None
    produced = Gate("J", (j,), theta)

    def relabel(g: Gate) -> Gate:
        if i not in g.wires:
            return g
        wires = tuple(j if w == i else w for w in g.wires)
        return Gate(g.kind, wires, g.angle)

    kept = [relabel(g) for k, g in enumerate(gates) if k not in site and k not in slid]
    insert_at = cx_pos - 2 - len(sliders)
    new_gates = (
        tuple(kept[:insert_at])
        + (produced,)
        + tuple(gates[q] for q in sorted(sliders))
        + tuple(kept[insert_at:])
    )
    new_wires = tuple(
        Wire(w.id, wi.init, w.terminal) if w.id == j else w
        for w in circuit.wires
        if w.id != i
    )
    step = RewriteStep("jgate", (cz_pos, jg_pos, cx_pos), (produced,), wire_removed=i)
    return Circuit(new_wires, new_gates), step


def _reapply(circuit: Circuit, st: RewriteStep) -> tuple[Circuit, RewriteStep]:
    """Run one recorded step against a circuit it may not have come from."""
    if st.rule == "jgate":
        assert st.wire_removed is not None
        return apply_jgate(circuit, st.wire_removed, st.produced[0].wires[0])
    if st.rule == "peephole-cancel":
        return apply_peephole(circuit, st.consumed)
    if st.rule == "cz-commute":
        return apply_cz_commute(circuit, st.consumed)
    if st.rule == "cx-commute":
        return apply_cx_commute(circuit, st.consumed)
    if st.rule == "cz-to-cx":
        cx_gates = [g for g in st.produced if g.kind == "CX"]
        fresh = cx_gates[0].target if cx_gates else None
        return apply_cz_to_cx(circuit, st.consumed, fresh=fresh)
    raise RewriteError(f"unknown rule {st.rule!r}")


def replay(circuit: Circuit, steps: tuple[RewriteStep, ...] | list[RewriteStep]) -> Circuit:
    """Re-run recorded steps; raises if any step no longer matches."""
    c = circuit
    for st in steps:
        c, redo = _reapply(c, st)
        if redo.produced != st.produced:
            raise RewriteError(f"replay diverged at step {st.text()}")
    return c


# --- drivers -----------------------------------------------------------------


class _Driver:
    """Shared mutable state for one simplification run."""

    def __init__(self, circuit: Circuit, verify_steps: bool, tol: float):
        self.circuit = circuit
        self.steps: list[RewriteStep] = []
        self.verify = verify_steps
        self.tol = tol
        self.input_order = [w.id for w in circuit.wires if w.init == "input"]

    def fire(self, result: tuple[Circuit, RewriteStep]) -> None:
        new_circuit, step = result
        if self.verify and len(self.circuit.wires) <= 12:
            self._check(new_circuit, step)
        self.circuit = new_circuit
        self.steps.append(step)
        if step.wire_removed is not None:
            inherited = step.produced[0].wires[0]
            self.input_order = [
                inherited if w == step.wire_removed else w for w in self.input_order
            ]

    def _check(self, new_circuit: Circuit, step: RewriteStep) -> None:
        from .simulate import basis_column_order, circuit_isometry, max_deviation

        before = circuit_isometry(self.circuit)
        after = circuit_isometry(new_circuit)
        order = self.input_order
        if step.wire_removed is not None:
            inherited = step.produced[0].wires[0]
            order_after = [inherited if w == step.wire_removed else w for w in order]
        else:
            order_after = order
        mb = before.matrix[:, basis_column_order(before.input_wires, order)]
        ma = after.matrix[:, basis_column_order(after.input_wires, order_after)]
        dev = max_deviation(mb, ma)
        if dev > self.tol:
            raise RewriteError(f"step {step.text()} drifted by {dev:.3g}")

    def j_position(self, wire: int) -> int | None:
        for k, g in enumerate(self.circuit.gates):
            if g.kind == "J" and g.wires[0] == wire:
                return k
        return None

    def cx_indices(self, control: int) -> list[int]:
        return [
            k
            for k, g in enumerate(self.circuit.gates)
            if g.kind == "CX" and g.control == control
        ]

    def measured_wires(self) -> set[int]:
        return {w.id for w in self.circuit.wires if w.terminal == "measured"}


def _peephole_pass(drv: _Driver) -> None:
    changed = True
    while changed:
        changed = False
        gates = drv.circuit.gates
        for q1 in range(len(gates)):
            g = gates[q1]
            if g.kind == "J":
                continue
            for q2 in range(q1 + 1, len(gates)):
                if gates[q2] == g:
                    drv.fire(apply_peephole(drv.circuit, (q1, q2)))
                    changed = True
                    break
                if not _commutes(g, gates[q2]):
                    break
            if changed:
                break


def _eliminate_corrections(drv: _Driver) -> None:
    """Strip every CZ sitting after the J of a measured wire it touches.

    Such a CZ is correction-shaped: it rides on the measured wire past its
    measurement unitary.  The commutation identity trades it for a forward
    move of a CZ on the corrector, exactly the slice-migration step.
    """
    while True:
        gates = drv.circuit.gates
        shaped = []
        for q, g in enumerate(gates):
            if g.kind != "CZ":
                continue
            controllers = []
            for m in sorted(g.wires):
                jm = drv.j_position(m)
                if m in drv.measured_wires() and jm is not None and jm < q:
                    controllers.append(m)
            if controllers:
                shaped.append((q, controllers))
        if not shaped:
            return
        # A fire re-emits its partner CZ just past the mover CX, so ordering
        # matters twice over: within one mover's span the rightmost CZ must go
        # first (a re-emission lands between the mover and anything left of
        # the consumed gate), and across movers the leftmost block must go
        # first (two blocks can share a partner, and only the earlier block
        # can reach it before it is relocated).  A blocked CZ is retried on a
        # later pass once others have moved.
        far = len(gates)

        def mover_position(entry: tuple[int, list[int]]) -> int:
            positions = [p for m in entry[1] for p in drv.cx_indices(m)]
            return min(positions) if positions else far

        shaped.sort(key=lambda e: (mover_position(e), -e[0]))
        for q, controllers in shaped:
            if _fire_correction_elimination(drv, q, controllers):
                break
        else:
            q = shaped[0][0]
            raise RewriteError(
                f"no commutation partner eliminates {drv.circuit.gates[q].text()} at {q}"
            )


def _fire_correction_elimination(drv: _Driver, q: int, controllers: list[int]) -> bool:
    gates = drv.circuit.gates
    # The mover CX may be controlled by either wire of the shaped CZ; the
    # measured side is the common case, but when the CZ pairs a measured
    # wire with its own corrector only the other side has a usable partner.
    movers = controllers + [w for w in sorted(gates[q].wires) if w not in controllers]
    for m in movers:
        for cx_idx in drv.cx_indices(m):
            target = gates[cx_idx].target
            (k,) = set(gates[q].wires) - {m}
            if k == target:
                continue  # degenerate: would need a CZ from the target to itself
            partners = [
                p
                for p, h in enumerate(gates)
                if p != q and h.kind == "CZ" and set(h.wires) == {target, k}
            ]
            for p in partners:
                site = tuple(sorted((p, cx_idx, q)))
                try:
                    drv.fire(apply_cz_commute(drv.circuit, site))
                    return True
                except RewriteError:
                    continue
    return False


def _cx_controlled_by(circuit: Circuit, control: int) -> list[int]:
    return [
        k
        for k, g in enumerate(circuit.gates)
        if g.kind == "CX" and g.control == control
    ]


def _j_index(circuit: Circuit, wire: int) -> int | None:
    for k, g in enumerate(circuit.gates):
        if g.kind == "J" and g.wires[0] == wire:
            return k
    return None


def _measured_ids(circuit: Circuit) -> set[int]:
    return {w.id for w in circuit.wires if w.terminal == "measured"}


def _unwanted_cxs(circuit: Circuit, order: list[int], targets: dict[int, int]) -> list[tuple[int, int, int]]:
    out = []
    for i in order:
        for k in _cx_controlled_by(circuit, i):
            if circuit.gates[k].target != targets[i]:
                out.append((k, i, circuit.gates[k].target))
    out.sort()
    return out


def _middles(circuit: Circuit, i: int, t: int) -> list[tuple[int, int]]:
    gates = circuit.gates
    return sorted(
        (gates[k].target, k) for k in _cx_controlled_by(circuit, i) if gates[k].target != t
    )


def _helper_indices(circuit: Circuit, m: int, t: int) -> list[int]:
    return [
        k
        for k, g in enumerate(circuit.gates)
        if g.kind == "CX" and g.control == m and g.target == t
    ]


_Result = tuple[Circuit, RewriteStep]


def _direct_candidates(circuit: Circuit, work: list[tuple[int, int, int]]):
    """CX triangles that erase an unwanted CX outright."""
    for u, i, t in work:
        for m, m_idx in _middles(circuit, i, t):
            for h in _helper_indices(circuit, m, t):
                try:
                    yield apply_cx_commute(circuit, tuple(sorted((h, m_idx, u))))
                except RewriteError:
                    pass


def _mint_candidates(circuit: Circuit, work: list[tuple[int, int, int]]):
    """CZ pairs that mint a missing helper CX onto a still-fresh wire."""
    for u, i, t in work:
        for m, _ in _middles(circuit, i, t):
            if _helper_indices(circuit, m, t):
                continue
            t_czs: dict[int, list[int]] = {}
            m_czs: dict[int, list[int]] = {}
            for k, g in enumerate(circuit.gates):
                if g.kind != "CZ":
                    continue
                if t in g.wires:
                    (c,) = set(g.wires) - {t}
                    t_czs.setdefault(c, []).append(k)
                if m in g.wires:
                    (c,) = set(g.wires) - {m}
                    m_czs.setdefault(c, []).append(k)
            for c in sorted(set(t_czs) & set(m_czs)):
                for kt in t_czs[c]:
                    for km in m_czs[c]:
                        try:
                            yield apply_cz_to_cx(
                                circuit, tuple(sorted((kt, km))), fresh=t
                            )
                        except RewriteError:
                            pass


def _fire_candidates(circuit: Circuit):
    """Commutations that carry a correction-shaped CZ off a measured wire."""
    measured = _measured_ids(circuit)
    for q, g in enumerate(circuit.gates):
        if g.kind != "CZ":
            continue
        shaped = False
        for m in g.wires:
            jm = _j_index(circuit, m)
            if m in measured and jm is not None and jm < q:
                shaped = True
        if not shaped:
            continue
        # either wire may drive the move; see _fire_correction_elimination
        for m in sorted(g.wires):
            (k,) = set(g.wires) - {m}
            for cx_idx in _cx_controlled_by(circuit, m):
                target = circuit.gates[cx_idx].target
                if k == target:
                    continue  # degenerate: would need a CZ from the target to itself
                for p, h in enumerate(circuit.gates):
                    if p != q and h.kind == "CZ" and set(h.wires) == {target, k}:
                        try:
                            yield apply_cz_commute(circuit, tuple(sorted((p, cx_idx, q))))
                        except RewriteError:
                            pass


def _hop_candidates(circuit: Circuit, work: list[tuple[int, int, int]]):
    """Commutations that walk a helper CX right past the CZ blocking it."""
    gates = circuit.gates
    seen_helpers: set[int] = set()
    for u, i, t in work:
        for m, _ in _middles(circuit, i, t):
            for h in _helper_indices(circuit, m, t):
                if h in seen_helpers:
                    continue
                seen_helpers.add(h)
                helper = gates[h]
                for q in range(h + 1, len(gates)):
                    g = gates[q]
                    if _commutes(helper, g):
                        continue
                    if g.kind == "CZ" and t in g.wires and m not in g.wires:
                        (y,) = set(g.wires) - {t}
                        for p, hh in enumerate(gates):
                            if p not in (h, q) and hh.kind == "CZ" and set(hh.wires) == {m, y}:
                                try:
                                    yield apply_cz_commute(circuit, tuple(sorted((h, q, p))))
                                except RewriteError:
                                    pass
                    break  # only the first blocker can move this helper


def _shift_candidates(circuit: Circuit, work: list[tuple[int, int, int]]):
    """Commutations that swap a CZ on the target past the unwanted CX itself."""
    gates = circuit.gates
    for u, i, t in work:
        eaten_by_y: dict[int, list[int]] = {}
        for e, g in enumerate(gates):
            if g.kind == "CZ" and i in g.wires:
                (y,) = set(g.wires) - {i}
                eaten_by_y.setdefault(y, []).append(e)
        for q, g in enumerate(gates):
            if g.kind != "CZ" or t not in g.wires or i in g.wires:
                continue
            (y,) = set(g.wires) - {t}
            for e in eaten_by_y.get(y, ()):
                if e == q:
                    continue
                try:
                    yield apply_cz_commute(circuit, tuple(sorted((q, u, e))))
                except RewriteError:
                    pass


class _PlanBudgetExceeded(Exception):
    pass


def _gflow_plan(
    circuit: Circuit,
    order: list[int],
    targets: dict[int, int],
    node_budget: int = 4000,
) -> tuple[list[RewriteStep] | None, tuple[list[RewriteStep], str]]:
    """Depth-first search for a step sequence that strips every measured wire.

    Moves are tried most-direct-first; visited circuits are pruned by digest.
    Once no unwanted CX remains, the deterministic tail (cancel pairs, clear
    correction CZs, collapse wires) is the goal test.  Returns the full plan
    or None, along with the deepest explored prefix for diagnostics.
    """
    seen = {digest(circuit)}
    nodes = 0
    best: tuple[list[RewriteStep], str] = ([], digest(circuit))

    def tail(c: Circuit) -> list[RewriteStep] | None:
        t_drv = _Driver(c, False, 0.0)
        try:
            _peephole_pass(t_drv)
            _eliminate_corrections(t_drv)
            _peephole_pass(t_drv)
            _extract_wires(t_drv, order, targets)
        except RewriteError:
            return None
        if t_drv.measured_wires():
            return None
        return list(t_drv.steps)

    def rec(c: Circuit, acc: list[RewriteStep]) -> list[RewriteStep] | None:
        nonlocal nodes, best
        work = _unwanted_cxs(c, order, targets)
        if not work:
            done = tail(c)
            return None if done is None else acc + done
        if len(acc) > len(best[0]):
            best = (list(acc), digest(c))
        candidates = itertools.chain(
            _direct_candidates(c, work),
            _mint_candidates(c, work),
            _fire_candidates(c),
            _hop_candidates(c, work),
            _shift_candidates(c, work),
        )
        for c2, step in candidates:
            d = digest(c2)
            if d in seen:
                continue
            seen.add(d)
            nodes += 1
            if nodes > node_budget:
                raise _PlanBudgetExceeded
            found = rec(c2, acc + [step])
            if found is not None:
                return found
        return None

    try:
        return rec(circuit, []), best
    except _PlanBudgetExceeded:
        return None, best


def _extract_wires(drv: _Driver, order: list[int], targets: dict[int, int]) -> None:
    for i in order:
        drv.fire(apply_jgate(drv.circuit, i, targets[i]))


def _layer_order(circuit: Circuit, view: TimeSlicedView) -> list[int]:
    order: list[int] = []
    for layer in range(view.depth):
        order.extend(sorted(circuit.gates[k].wires[0] for k in view.j_slice(layer)))
    return order


def _finish(drv: _Driver, initial: str) -> tuple[Circuit, SimplificationTrace]:
    trace = SimplificationTrace(tuple(drv.steps), initial, digest(drv.circuit))
    return drv.circuit, trace


def simplify_flow(
    circuit: Circuit,
    view: TimeSlicedView,
    *,
    verify_steps: bool = False,
    tol: float = 1e-9,
) -> tuple[Circuit, SimplificationTrace]:
    """Strip every measured wire of a flow-built extended circuit.

    Corrections are single-target, so no CX removal is needed: eliminate
    correction CZs (migrating entangler CZs forward in the same stroke),
    then collapse each measured wire onto its corrector in layer order.
    """
    initial = digest(circuit)
    drv = _Driver(circuit, verify_steps, tol)
    order = _layer_order(circuit, view)

    targets: dict[int, int] = {}
    for i in order:
        cxs = drv.cx_indices(i)
        if len(cxs) != 1:
            raise FlowSimplifyError(f"wire {i} has {len(cxs)} correction CXs; flow needs 1")
        targets[i] = circuit.gates[cxs[0]].target

    try:
        _eliminate_corrections(drv)
        _peephole_pass(drv)
        _extract_wires(drv, order, targets)
    except RewriteError as exc:
        raise FlowSimplifyError(str(exc)) from exc

    if drv.measured_wires():
        raise FlowSimplifyError(f"wires {sorted(drv.measured_wires())} were not removed")
    return _finish(drv, initial)


def simplify_gflow(
    circuit: Circuit,
    view: TimeSlicedView,
    structure: CorrectionStructure,
    *,
    budget: int | None = None,
    verify_steps: bool = True,
    tol: float = 1e-9,
) -> tuple[Circuit, SimplificationTrace]:
    """Search a special-CX designation and strip every measured wire.

    Each measured wire keeps one special CX (its eventual teleportation
    partner, necessarily a graph neighbor); the others are cancelled by the
    CX-triangle identity, minting helpers from CZ pairs where needed.
    Designations are tried in ascending-target order, injectively, within
    the attempt budget; per-step oracle checks guard every accepted rewrite
    on small circuits.
    """
    initial = digest(circuit)
    order = _layer_order(circuit, view)
    neighbors: dict[int, set[int]] = {i: set() for i in order}
    for k in view.entangle(0):
        a, b = circuit.gates[k].wires
        if a in neighbors:
            neighbors[a].add(b)
        if b in neighbors:
            neighbors[b].add(a)

    candidates: list[list[int]] = []
    for i in order:
        cand = sorted(structure.correcting_sets[i] & frozenset(neighbors[i]))
        if not cand:
            raise GflowSearchExhausted(
                0, SimplificationTrace((), initial, initial)
            )
        candidates.append(cand)

    total = 1
    for cand in candidates:
        total *= len(cand)
    cap = min(total, 10_000) if budget is None else budget

    attempts = 0
    last_partial = SimplificationTrace((), initial, initial)
    for assignment in itertools.product(*candidates):
        if len(set(assignment)) != len(assignment):
            continue
        if attempts >= cap:
            break
        attempts += 1
        targets = dict(zip(order, assignment))
        plan, deepest = _gflow_plan(circuit, order, targets)
        if plan is None:
            last_partial = SimplificationTrace(tuple(deepest[0]), initial, deepest[1])
            continue
        drv = _Driver(circuit, verify_steps, tol)
        try:
            for step in plan:
                drv.fire(_reapply(drv.circuit, step))
            return _finish(drv, initial)
        except RewriteError:
            last_partial = SimplificationTrace(
                tuple(drv.steps), initial, digest(drv.circuit)
            )
            continue
    raise GflowSearchExhausted(attempts, last_partial)
