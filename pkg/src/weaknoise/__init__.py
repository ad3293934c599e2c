"""weaknoise: trade-offs between weak-noise estimation cost and outage
exponents for analog parameter transmission over AWGN.

The exponents module gives the closed-form/root-solved converse and
achievable exponent curves; lattices and scheme build the quantize-and-
lattice-code modulator they describe; sim measures finite-n outage
probabilities (with importance sampling for rare events) and empirical
exponents; cli ties everything into reproducible CSV experiments.
"""

from .cost import PowerCost
from .exponents import (
    LAMBDA_TIGHT_MAX,
    ExponentCurvePoint,
    TradeoffParams,
    converse_bound,
    converse_bound_exponent,
    curve_point,
    expurgated_exp,
    exponent_lower,
    exponent_upper,
    locus_length_budget,
    poltyrev_exp,
    poltyrev_inv,
    q_function,
    random_coding_exp,
    rate_achievable,
    rate_converse,
    solve_w,
    sphere_outage_prob,
)
from .lattices import (
    Codebook,
    EnumerationCapError,
    LatticeDef,
    build_codebook,
    codebook_to_csv,
    decode_codebook,
    enumerate_ball,
    make_lattice,
    nearest_point,
    nearest_point_scaled,
    nvnr,
    voronoi_escape_prob_zn,
)
from .scheme import (
    DecodeErrorOutage,
    ModScheme,
    ModulatorFn,
    SphereOutage,
    codeword_index,
    estimate,
    is_outage,
    locus_length,
    modulate,
    quantize,
    scheme_modulator,
)
from .sim import (
    SWEEP_COLUMNS,
    SimConfig,
    SimResult,
    build_u_grid,
    make_scheme,
    outage_for,
    result_row,
    run_importance_sampled,
    run_plain_mc,
    sweep_exponents,
)

__version__ = "0.1.0"

__all__ = [
    "PowerCost",
    "LAMBDA_TIGHT_MAX",
    "TradeoffParams",
    "ExponentCurvePoint",
    "solve_w",
    "rate_converse",
    "rate_achievable",
    "exponent_upper",
    "exponent_lower",
    "curve_point",
    "random_coding_exp",
    "expurgated_exp",
    "poltyrev_exp",
    "poltyrev_inv",
    "q_function",
    "sphere_outage_prob",
    "converse_bound",
    "converse_bound_exponent",
    "locus_length_budget",
    "LatticeDef",
    "Codebook",
    "EnumerationCapError",
    "make_lattice",
    "nearest_point",
    "nearest_point_scaled",
    "nvnr",
    "enumerate_ball",
    "build_codebook",
    "decode_codebook",
    "voronoi_escape_prob_zn",
    "codebook_to_csv",
    "DecodeErrorOutage",
    "SphereOutage",
    "ModScheme",
    "ModulatorFn",
    "quantize",
    "codeword_index",
    "modulate",
    "estimate",
    "is_outage",
    "locus_length",
    "scheme_modulator",
    "SimConfig",
    "SimResult",
    "SWEEP_COLUMNS",
    "build_u_grid",
    "outage_for",
    "make_scheme",
    "run_plain_mc",
    "run_importance_sampled",
    "result_row",
    "sweep_exponents",
]
