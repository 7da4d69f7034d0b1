"""Numerical certification and falsification of generalized monotonicity
properties of vector fields on convex domains, including translation-line
sweeps and sampled Clarke Jacobian classification."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    AffineSlice,
    Box,
    ConvexDomain,
    DualLine,
    PropertyVerdict,
    TestMap,
    TolerancePolicy,
    VertexPolytope,
    ViolationWitness,
    domain_contains,
    domain_sample,
    parse_domain,
    segment_sample,
)
from .monotonicity import (  # noqa: F401
    PairEvaluation,
    StrongParams,
    falsify,
    hierarchy_check,
    pair_monotone,
    pair_pseudo,
    pair_quasi,
    pair_strict,
    pair_strong,
    segment_monotone,
)
from .jacobian import (  # noqa: F401
    MatrixHull,
    PsdReport,
    contradiction_probe,
    estimate_clarke,
    fd_jacobian,
    mvt_inclusion,
    psd_check,
)
from .translation import (  # noqa: F401
    counterexample_suite,
    is_orthogonal,
    line_orthogonal,
    proof_trace,
    proposition1_crosscheck,
    sweep,
    theorem1_check,
    translate,
)
from .registry import RegistryEntry, lookup, registry, resolve_map  # noqa: F401
