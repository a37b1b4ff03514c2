"""Exact-arithmetic workbench for linear systems of partial differential equations."""

from .arith import Field, RatFun, derive, field_arith, rational
from .dsl import SystemSpec, load_system, parse_system, print_system
from .errors import WorkbenchError
from .homology import (
    Presentation,
    Submodule,
    adjoint,
    cc_of_operator,
    compatibility_conditions,
    differential_rank,
    ext_modules,
    free_resolution,
    janet_sequence,
    resolve,
    short_resolution,
    torsion_submodule,
)
from .involution import (
    CompletionConfig,
    InvolutiveSystem,
    characters,
    complete_to_involution,
    first_order_reduction,
    hilbert_function,
    hilbert_polynomial,
    reduced_spencer_form,
)
from .jets import (
    JetSystem,
    SectionTruncation,
    delta_cohomology,
    project,
    prolong,
    sections_at_order,
    spencer_apply,
    symbol,
)
from .ore import OperatorMatrix, OreOperator, OreRing, compose, form_text
from .purity import (
    MonomialIdeal,
    characteristic_ideal,
    cyclic_codimension,
    embed_pure_module,
    localized_parametric_jets,
    monomial_ideal_ops,
    purity_test,
    relative_localization,
    relative_parametrization,
    restrict_to_classes,
)
from .report import Report, render_board

__version__ = "0.1.0"

__all__ = [
    "CompletionConfig",
    "Field",
    "InvolutiveSystem",
    "JetSystem",
    "MonomialIdeal",
    "OperatorMatrix",
    "OreOperator",
    "OreRing",
    "Presentation",
    "RatFun",
    "SectionTruncation",
    "Submodule",
    "SystemSpec",
    "WorkbenchError",
    "adjoint",
    "cc_of_operator",
    "characteristic_ideal",
    "characters",
    "compatibility_conditions",
    "complete_to_involution",
    "compose",
    "cyclic_codimension",
    "delta_cohomology",
    "derive",
    "differential_rank",
    "embed_pure_module",
    "ext_modules",
    "field_arith",
    "first_order_reduction",
    "form_text",
    "free_resolution",
    "hilbert_function",
    "hilbert_polynomial",
    "janet_sequence",
    "load_system",
    "localized_parametric_jets",
    "monomial_ideal_ops",
    "parse_system",
    "print_system",
    "project",
    "prolong",
    "purity_test",
    "rational",
    "reduced_spencer_form",
    "relative_localization",
    "relative_parametrization",
    "render_board",
    "Report",
    "resolve",
    "restrict_to_classes",
    "sections_at_order",
    "short_resolution",
    "spencer_apply",
    "symbol",
    "torsion_submodule",
]
