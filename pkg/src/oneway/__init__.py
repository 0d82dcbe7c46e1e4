"""Measurement patterns on graph states, compiled down to circuits."""

from .angles import Angle
from .graphs import (
    OpenGraph,
    Stabilizer,
    emit_graph,
    odd_neighborhood,
    parse_graph,
    parse_graph_with_sets,
    stabilizer_of,
    validate,
)
from .determinism import CorrectionStructure, find_flow, find_gflow, validate_gflow
from .circuits import (
    Circuit,
    Gate,
    TimeSlicedView,
    Wire,
    digest,
    emit_text,
    j_matrix,
    parse_text,
    slice_circuit,
)
from .extend import build_extended, correction_block
from .simulate import (
    Isometry,
    ProjectionError,
    StateVector,
    WireCapError,
    basis_column_order,
    circuit_isometry,
    equivalent,
    max_deviation,
    measured_wire_reduced_states,
    run_pattern,
)
from .rewrite import (
    FlowSimplifyError,
    GflowSearchExhausted,
    RewriteError,
    RewriteStep,
    SimplificationTrace,
    apply_cx_commute,
    apply_cz_commute,
    apply_cz_to_cx,
    apply_jgate,
    apply_peephole,
    replay,
    simplify_flow,
    simplify_gflow,
    trace_text,
)

__all__ = [
    "Angle",
    "OpenGraph",
    "Stabilizer",
    "emit_graph",
    "odd_neighborhood",
    "parse_graph",
    "parse_graph_with_sets",
    "stabilizer_of",
    "validate",
    "CorrectionStructure",
    "find_flow",
    "find_gflow",
    "validate_gflow",
    "Circuit",
    "Gate",
    "TimeSlicedView",
    "Wire",
    "digest",
    "emit_text",
    "j_matrix",
    "parse_text",
    "slice_circuit",
    "build_extended",
    "correction_block",
    "Isometry",
    "ProjectionError",
    "StateVector",
    "WireCapError",
    "basis_column_order",
    "circuit_isometry",
    "equivalent",
    "max_deviation",
    "measured_wire_reduced_states",
    "run_pattern",
    "FlowSimplifyError",
    "GflowSearchExhausted",
    "RewriteError",
    "RewriteStep",
    "SimplificationTrace",
    "apply_cx_commute",
    "apply_cz_commute",
    "apply_cz_to_cx",
    "apply_jgate",
    "apply_peephole",
    "replay",
    "simplify_flow",
    "simplify_gflow",
    "trace_text",
]

__version__ = "0.1.0"
