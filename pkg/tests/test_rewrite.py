"""Rewrite rules, checked against their matrix identities first.

Every rule is an equality of gate words; the tests here pin those equalities
down as raw numpy facts (tolerance 1e-12) before exercising the site
machinery, so a regression in the rules cannot hide behind the oracle that
the drivers themselves use.
"""

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oneway import (
    Angle,
    Circuit,
    FlowSimplifyError,
    Gate,
    GflowSearchExhausted,
    OpenGraph,
    RewriteError,
    RewriteStep,
    Wire,
    apply_cx_commute,
    apply_cz_commute,
    apply_cz_to_cx,
    apply_jgate,
    apply_peephole,
    build_extended,
    circuit_isometry,
    digest,
    emit_text,
    find_flow,
    max_deviation,
    replay,
    simplify_flow,
    simplify_gflow,
    slice_circuit,
    trace_text,
    validate_gflow,
)
from oneway.rewrite import _commutes
from _oracle import cx_on, cz_on, j_of, j_on, plus_embedding
from conftest import load_fixture

TRIPLES = list(itertools.permutations((1, 2, 3)))


def test_cz_commute_is_a_matrix_identity():
    # circuit [CZ jk, CX ij, CZ ik] acts as [CX ij, CZ jk]
    for i, j, k in TRIPLES:
        order = (1, 2, 3)
        lhs = cz_on(i, k, order) @ cx_on(i, j, order) @ cz_on(j, k, order)
        rhs = cz_on(j, k, order) @ cx_on(i, j, order)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_cx_triangle_is_a_matrix_identity():
    # circuit [CX jk, CX ij, CX ik] acts as [CX ij, CX jk]
    for i, j, k in TRIPLES:
        order = (1, 2, 3)
        lhs = cx_on(i, k, order) @ cx_on(i, j, order) @ cx_on(j, k, order)
        rhs = cx_on(j, k, order) @ cx_on(i, j, order)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_cz_pair_to_cx_holds_on_plus():
    # circuit [CZ jk, CZ ik] acts as [CZ jk, CX ij] when wire j starts in |+>
    for i, j, k in TRIPLES:
        order = (1, 2, 3)
        emb = plus_embedding(j, order)
        lhs = cz_on(i, k, order) @ cz_on(j, k, order) @ emb
        rhs = cx_on(i, j, order) @ cz_on(j, k, order) @ emb
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_teleport_collapses_to_j():
    # <+|_i CX(i->j) J(theta)_i CZ(i,j) acting on psi_i (+)_j equals J(theta)
    for i, j in ((1, 2), (2, 1)):
        order = (1, 2)
        bra = plus_embedding(i, order).conj().T
        for theta in (0.0, np.pi / 4, -np.pi / 3, 1.234):
            got = bra @ cx_on(i, j, order) @ j_on(theta, i, order) @ cz_on(i, j, order)
            got = got @ plus_embedding(j, order)
            assert np.max(np.abs(got - j_of(theta))) <= 1e-12


@given(st.data())
def test_commutes_is_sound(data):
    order = (1, 2, 3)

    def gate(tag: str) -> Gate:
        kind = data.draw(st.sampled_from(["J", "CZ", "CX"]), label=f"kind {tag}")
        if kind == "J":
            return Gate("J", (data.draw(st.sampled_from(order), label=f"wire {tag}"),), Angle.exact(1, 4))
        pair = data.draw(st.permutations(order), label=f"pair {tag}")
        return Gate(kind, tuple(pair[:2]))

    a, b = gate("a"), gate("b")
    if _commutes(a, b):
        def lift(g: Gate) -> np.ndarray:
            if g.kind == "J":
                return j_on(np.pi / 4, g.wires[0], order)
            on = cz_on if g.kind == "CZ" else cx_on
            return on(g.wires[0], g.wires[1], order)

        ma, mb = lift(a), lift(b)
        assert np.max(np.abs(ma @ mb - mb @ ma)) <= 1e-12


def plain_wires(*ids: int) -> tuple[Wire, ...]:
    return tuple(Wire(i, "input", "output") for i in ids)


def assert_same_action(before: Circuit, after: Circuit) -> None:
    dev = max_deviation(circuit_isometry(before), circuit_isometry(after))
    assert dev <= 1e-12


def test_cz_commute_three_site():
    circ = Circuit(plain_wires(1, 2, 3), (Gate("CZ", (2, 3)), Gate("CX", (1, 2)), Gate("CZ", (1, 3))))
    out, step = apply_cz_commute(circ, (0, 1, 2))
    assert [g.text() for g in step.produced] == ["CX 1 2", "CZ 2 3"]
    assert_same_action(circ, out)

    # the consumed CZ first instead: produced order follows the survivors
    circ = Circuit(plain_wires(1, 2, 3), (Gate("CZ", (1, 3)), Gate("CX", (1, 2)), Gate("CZ", (2, 3))))
    out, step = apply_cz_commute(circ, (0, 1, 2))
    assert [g.text() for g in step.produced] == ["CZ 2 3", "CX 1 2"]
    assert_same_action(circ, out)


def test_cz_commute_gathers_across_commuting_gates():
    gates = (Gate("CZ", (2, 3)), Gate("CZ", (1, 4)), Gate("CX", (1, 2)), Gate("CZ", (1, 3)))
    circ = Circuit(plain_wires(1, 2, 3, 4), gates)
    out, step = apply_cz_commute(circ, (0, 2, 3))
    assert step.consumed == (0, 2, 3)
    assert_same_action(circ, out)


def test_cz_commute_rejections():
    circ = Circuit(plain_wires(1, 2, 3), (Gate("CZ", (2, 3)), Gate("J", (2,), Angle.exact(0)), Gate("CX", (1, 2)), Gate("CZ", (1, 3))))
    with pytest.raises(RewriteError, match="blocks gathering"):
        apply_cz_commute(circ, (0, 2, 3))
    circ = Circuit(plain_wires(1, 2, 3), (Gate("CZ", (1, 2)), Gate("CX", (1, 2)), Gate("CZ", (1, 3))))
    with pytest.raises(RewriteError, match="does not fit"):
        apply_cz_commute(circ, (0, 1, 2))
    circ = Circuit(plain_wires(1, 2, 3), (Gate("CX", (1, 2)), Gate("CZ", (1, 3))))
    with pytest.raises(RewriteError, match="touch the CX target"):
        apply_cz_commute(circ, (0, 1))
    with pytest.raises(RewriteError, match="strictly ascending"):
        apply_cz_commute(circ, (1, 0))


def test_cz_commute_reverse_direction_grows():
    circ = Circuit(plain_wires(1, 2, 3), (Gate("CX", (1, 2)), Gate("CZ", (2, 3))))
    out, step = apply_cz_commute(circ, (0, 1))
    assert len(step.produced) == 3
    assert step.produced[-1] == Gate("CZ", (1, 3))
    assert_same_action(circ, out)


def cz_to_cx_wires() -> tuple[Wire, ...]:
    return (Wire(1, "input", "output"), Wire(2, "plus", "output"), Wire(3, "input", "output"))


def test_cz_to_cx_forward():
    circ = Circuit(cz_to_cx_wires(), (Gate("CZ", (2, 3)), Gate("CZ", (1, 3))))
    out, step = apply_cz_to_cx(circ, (0, 1))
    assert [g.text() for g in step.produced] == ["CZ 2 3", "CX 1 2"]
    assert_same_action(circ, out)


def test_cz_to_cx_reverse():
    circ = Circuit(cz_to_cx_wires(), (Gate("CZ", (2, 3)), Gate("CX", (1, 2))))
    out, step = apply_cz_to_cx(circ, (0, 1))
    assert [g.text() for g in step.produced] == ["CZ 2 3", "CZ 1 3"]
    assert_same_action(circ, out)


def test_cz_to_cx_fresh_wire_selection():
    wires = (Wire(1, "plus", "output"), Wire(2, "plus", "output"), Wire(3, "input", "output"))
    circ = Circuit(wires, (Gate("CZ", (1, 3)), Gate("CZ", (2, 3))))
    with pytest.raises(RewriteError, match="ambiguous"):
        apply_cz_to_cx(circ, (0, 1))
    out, step = apply_cz_to_cx(circ, (0, 1), fresh=2)
    assert [g.text() for g in step.produced] == ["CZ 2 3", "CX 1 2"]
    assert_same_action(circ, out)
    out, step = apply_cz_to_cx(circ, (0, 1), fresh=1)
    assert [g.text() for g in step.produced] == ["CZ 1 3", "CX 2 1"]
    assert_same_action(circ, out)


def test_cz_to_cx_requires_freshness():
    circ = Circuit(
        cz_to_cx_wires(),
        (Gate("J", (2,), Angle.exact(0)), Gate("CZ", (2, 3)), Gate("CZ", (1, 3))),
    )
    with pytest.raises(RewriteError, match="not fresh"):
        apply_cz_to_cx(circ, (1, 2), fresh=2)


def test_cx_commute_cancels_the_chord():
    circ = Circuit(plain_wires(1, 2, 3), (Gate("CX", (2, 3)), Gate("CX", (1, 2)), Gate("CX", (1, 3))))
    out, step = apply_cx_commute(circ, (0, 1, 2))
    assert [g.text() for g in step.produced] == ["CX 1 2", "CX 2 3"]
    assert_same_action(circ, out)


def test_cx_commute_rejections():
    cyclic = Circuit(plain_wires(1, 2, 3), (Gate("CX", (1, 2)), Gate("CX", (2, 3)), Gate("CX", (3, 1))))
    with pytest.raises(RewriteError, match="does not reduce"):
        apply_cx_commute(cyclic, (0, 1, 2))
    mixed = Circuit(plain_wires(1, 2, 3), (Gate("CX", (1, 2)), Gate("CZ", (2, 3)), Gate("CX", (1, 3))))
    with pytest.raises(RewriteError, match="must be CX"):
        apply_cx_commute(mixed, (0, 1, 2))
    narrow = Circuit(plain_wires(1, 2), (Gate("CX", (1, 2)), Gate("CX", (2, 1)), Gate("CX", (1, 2))))
    with pytest.raises(RewriteError, match="three wires"):
        apply_cx_commute(narrow, (0, 1, 2))


def test_peephole_cancels_across_commuting_gates():
    circ = Circuit(plain_wires(1, 2, 3), (Gate("CZ", (1, 2)), Gate("CZ", (1, 3)), Gate("CZ", (1, 2))))
    out, step = apply_peephole(circ, (0, 2))
    assert step.produced == ()
    assert out.gates == (Gate("CZ", (1, 3)),)
    assert_same_action(circ, out)


def test_peephole_rejections():
    blocked = Circuit(plain_wires(1, 2), (Gate("CZ", (1, 2)), Gate("J", (1,), Angle.exact(0)), Gate("CZ", (1, 2))))
    with pytest.raises(RewriteError, match="blocks gathering"):
        apply_peephole(blocked, (0, 2))
    unequal = Circuit(plain_wires(1, 2, 3), (Gate("CZ", (1, 2)), Gate("CZ", (1, 3))))
    with pytest.raises(RewriteError, match="equal CZ or CX pair"):
        apply_peephole(unequal, (0, 1))
    jpair = Circuit(plain_wires(1,), (Gate("J", (1,), Angle.exact(0)), Gate("J", (1,), Angle.exact(0))))
    with pytest.raises(RewriteError, match="equal CZ or CX pair"):
        apply_peephole(jpair, (0, 1))


def teleport_wires() -> tuple[Wire, ...]:
    return (Wire(1, "input", "measured"), Wire(2, "plus", "output"))


def test_jgate_removes_the_measured_wire():
    theta = Angle.exact(1, 4)
    circ = Circuit(teleport_wires(), (Gate("CZ", (1, 2)), Gate("J", (1,), theta), Gate("CX", (1, 2))))
    out, step = apply_jgate(circ, 1, 2)
    assert step.wire_removed == 1
    assert out.wires == (Wire(2, "input", "output"),)
    assert out.gates == (Gate("J", (2,), theta),)
    got = circuit_isometry(out)
    assert got.matrix == pytest.approx(j_of(np.pi / 4), abs=1e-12)


def test_jgate_relabels_inherited_gates():
    wires = teleport_wires() + (Wire(3, "input", "output"),)
    circ = Circuit(
        wires,
        (Gate("CZ", (1, 2)), Gate("CZ", (1, 3)), Gate("J", (1,), Angle.exact(1, 2)), Gate("CX", (1, 2))),
    )
    out, _ = apply_jgate(circ, 1, 2)
    assert out.gates == (Gate("CZ", (2, 3)), Gate("J", (2,), Angle.exact(1, 2)))
    assert_same_action(circ, out)


def test_jgate_lets_target_cx_ride_along():
    wires = teleport_wires() + (Wire(3, "input", "output"),)
    circ = Circuit(
        wires,
        (Gate("CZ", (1, 2)), Gate("J", (1,), Angle.exact(1, 4)), Gate("CX", (3, 2)), Gate("CX", (1, 2))),
    )
    out, _ = apply_jgate(circ, 1, 2)
    assert out.gates == (Gate("J", (2,), Angle.exact(1, 4)), Gate("CX", (3, 2)))
    assert_same_action(circ, out)


def test_jgate_rejections():
    theta = Angle.exact(1, 4)
    ok = (Gate("CZ", (1, 2)), Gate("J", (1,), theta), Gate("CX", (1, 2)))
    not_measured = Circuit((Wire(1, "input", "output"), Wire(2, "plus", "output")), ok)
    with pytest.raises(RewriteError, match="not a measured wire"):
        apply_jgate(not_measured, 1, 2)
    not_plus = Circuit((Wire(1, "input", "measured"), Wire(2, "input", "output")), ok)
    with pytest.raises(RewriteError, match="not \\|\\+>-initialized"):
        apply_jgate(not_plus, 1, 2)

    wires3 = teleport_wires() + (Wire(3, "input", "output"),)
    leftover = Circuit(wires3, (Gate("CZ", (1, 2)), Gate("J", (1,), theta), Gate("CZ", (1, 3)), Gate("CX", (1, 2))))
    with pytest.raises(RewriteError, match="between J and CX"):
        apply_jgate(leftover, 1, 2)
    stale = Circuit(wires3, (Gate("CZ", (1, 2)), Gate("J", (1,), theta), Gate("CZ", (2, 3)), Gate("CX", (1, 2))))
    with pytest.raises(RewriteError, match="not fresh"):
        apply_jgate(stale, 1, 2)
    no_cz = Circuit(teleport_wires(), (Gate("J", (1,), theta), Gate("CX", (1, 2))))
    with pytest.raises(RewriteError, match="no CZ 1 2 precedes"):
        apply_jgate(no_cz, 1, 2)
    doubled = Circuit(teleport_wires(), (Gate("CZ", (1, 2)),) + ok)
    with pytest.raises(RewriteError, match="cannot relabel"):
        apply_jgate(doubled, 1, 2)


def test_step_and_trace_text():
    step = RewriteStep("jgate", (0, 1, 2), (Gate("J", (2,), Angle.exact(1, 4)),), wire_removed=1)
    assert step.text() == "jgate consumed=0,1,2 produced=J(1/4pi) 2 removed-wire=1"
    plain = RewriteStep("peephole-cancel", (3, 5), ())
    assert plain.text() == "peephole-cancel consumed=3,5 produced="


def path3_pipeline():
    graph, _ = load_fixture("path3")
    structure = find_flow(graph)
    ext = build_extended(graph, structure)
    return graph, structure, ext, slice_circuit(ext, structure)


def test_simplify_flow_on_a_path():
    _, _, ext, view = path3_pipeline()
    compact, trace = simplify_flow(ext, view)
    assert emit_text(compact) == "wire 3 input output\nJ(1/4pi) 3\nJ(1/2pi) 3\n"
    assert [s.rule for s in trace.steps] == ["cz-commute", "jgate", "jgate"]
    assert max_deviation(circuit_isometry(ext), circuit_isometry(compact)) <= 1e-9
    assert trace.initial_digest == digest(ext)
    assert trace.final_digest == digest(compact)


def test_replay_reproduces_the_compact_circuit():
    _, _, ext, view = path3_pipeline()
    compact, trace = simplify_flow(ext, view)
    again = replay(ext, trace.steps)
    assert again == compact
    assert digest(again) == trace.final_digest
    assert trace_text(trace).splitlines()[0].startswith("cz-commute consumed=")


def test_replay_diverges_on_a_different_circuit():
    graph, _ = load_fixture("path3")
    structure = find_flow(graph)
    ext = build_extended(graph, structure)
    _, trace = simplify_flow(ext, slice_circuit(ext, structure))

    bent = OpenGraph(
        graph.vertices, graph.edges, graph.inputs, graph.outputs,
        {1: Angle.exact(1, 2), 2: Angle.exact(1, 2)},
    )
    other = build_extended(bent, structure)
    with pytest.raises(RewriteError, match="replay diverged"):
        replay(other, trace.steps)
    with pytest.raises(RewriteError, match="unknown rule"):
        replay(ext, [RewriteStep("bogus", (), ())])


def flow_compile(graph: OpenGraph):
    structure = find_flow(graph)
    assert structure is not None
    ext = build_extended(graph, structure)
    compact, trace = simplify_flow(ext, slice_circuit(ext, structure))
    assert not any(w.terminal == "measured" for w in compact.wires)
    assert len(compact.wires) == len(graph.outputs)
    for step in trace.steps:
        assert len(step.produced) <= len(step.consumed)
    assert max_deviation(circuit_isometry(ext), circuit_isometry(compact)) <= 1e-9
    return compact, trace


def test_simplify_flow_on_the_strip(strip2x3):
    flow_compile(strip2x3)


def test_simplify_flow_when_a_correction_is_temporarily_blocked():
    # two pending correction CZs on one wire: the far one must fire first,
    # and the near one has to wait a pass for the re-emitted entangler
    graph = OpenGraph(
        (1, 2, 3, 4),
        frozenset({(1, 2), (1, 4), (2, 3)}),
        frozenset(),
        frozenset({1, 2}),
        {3: Angle.exact(1, 8), 4: Angle.exact(3, 8)},
    )
    flow_compile(graph)


def test_simplify_flow_when_two_movers_share_an_entangler():
    # the CZ between two corrector wires partners both of their correction
    # CZs; firing the later block first would strand the earlier one
    graph = OpenGraph(
        (1, 2, 3, 4, 5),
        frozenset({(1, 5), (2, 4), (3, 4), (4, 5)}),
        frozenset(),
        frozenset({2, 5}),
        {1: Angle.exact(1, 8), 3: Angle.exact(3, 8), 4: Angle.exact(5, 8)},
    )
    flow_compile(graph)


def test_simplify_flow_rejects_multi_target_corrections(example1):
    graph, sets = example1
    structure = validate_gflow(graph, sets)
    ext = build_extended(graph, structure)
    with pytest.raises(FlowSimplifyError, match="flow needs 1"):
        simplify_flow(ext, slice_circuit(ext, structure))


def test_simplify_gflow_strips_every_measured_wire(example1):
    graph, sets = example1
    structure = validate_gflow(graph, sets)
    ext = build_extended(graph, structure)
    compact, trace = simplify_gflow(ext, slice_circuit(ext, structure), structure)
    assert len(compact.wires) == 3
    assert sum(s.rule == "jgate" for s in trace.steps) == 2
    for step in trace.steps:
        assert len(step.produced) <= len(step.consumed)
    assert max_deviation(circuit_isometry(ext), circuit_isometry(compact)) <= 1e-9
    assert replay(ext, trace.steps) == compact


def test_simplify_gflow_budget_exhaustion():
    graph, sets = load_fixture("budget")
    structure = validate_gflow(graph, sets)
    ext = build_extended(graph, structure)
    view = slice_circuit(ext, structure)

    with pytest.raises(GflowSearchExhausted) as info:
        simplify_gflow(ext, view, structure, budget=1)
    exhausted = info.value
    assert exhausted.attempts == 1
    assert exhausted.partial.steps
    assert exhausted.partial.initial_digest == digest(ext)
    assert digest(replay(ext, exhausted.partial.steps)) == exhausted.partial.final_digest

    compact, _ = simplify_gflow(ext, view, structure)
    assert len(compact.wires) == len(graph.outputs)
    assert max_deviation(circuit_isometry(ext), circuit_isometry(compact)) <= 1e-9
