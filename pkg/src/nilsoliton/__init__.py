"""2-step nilpotent Lie algebras of type (p, q): derivations, stabilizers, Ricci tensors and nilsoliton flows."""

from .core import (
    NotTwoStepTypeError,
    RangeError,
    SkewTuple,
    SkewnessError,
    TwoStepAlgebra,
    TypeClass,
    bracket,
    build_algebra,
    classify_type,
    group_act,
    j_map,
    lie_act,
    sample_tuple,
)
from .derivations import DerivationBasis, check_ideal_structure, derivation_algebra, is_minimal_der
from .flow import FlowResult, certify_and_extract, minimal_vector_flow, moment_map
from .geometry import MetricData, SolitonCertificate, pullback_metric, ricci_2step, ricci_general, soliton_defect
from .kernel import SubspaceBasis, nullspace, project, subspace_equal
from .stabilizers import StabilizerReport, correspondence_check, lemma_check, stabilizer

__version__ = "0.1.0"
