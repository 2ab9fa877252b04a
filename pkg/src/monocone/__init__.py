"""Coderivatives of set-valued operators and the monotonicity and convexity
checks built on them.

Exact rational arithmetic throughout the polyhedral path; sampled results
are always labelled as such.
"""
from .coderivative import (
    CoderivativeValue, coderivative, coderivative_shift, limiting_coderivative, regular_coderivative,
    second_order_combined, second_order_limiting,
)
from .convexity import (
    ConvexityVerdict, convexity_check_second_order, convexity_oracle_sampling, mean_value_inequality_test,
    strong_convexity_check, strong_modulus_estimate,
)
from .errors import *  # noqa: F401,F403
from .maxquad import MaxQuadFunction, ShiftedFunction, compile_subdifferential_graph, subdifferential
from .monotonicity import (
    DecisionConfig, Verdict, domain_convexity_probe, hypomonotonicity_estimate, maximality_decision,
    minty_surjectivity_test, pairwise_monotone_test, psd_coderivative_check, segment_chain_monotonicity,
    semilocal_hypomonotonicity,
)
from .operators import (
    AffineBox, GraphPoint, Inverse, MaxQuadSubdiff, PolyhedralGraphUnion, SampleConfig, ShiftDown,
    ShiftIdentity, compile_to_polyhedral, evaluate, graph_sample,
)
from .polyhedral import (
    HPolyhedron, PolyCone, cone_contains, cone_polar, regular_normal_cone, regular_normal_cone_union,
    support_min, vertex_ray_enumerate,
)
from .smooth import RationalMap
from .strata import FaceSignature, limiting_normal_cone_union, signature_realizable_near

__version__ = "0.1.0"
