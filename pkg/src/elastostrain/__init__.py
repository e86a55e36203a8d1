"""elastostrain package."""
from elastostrain.datamodel import (
    DeformationSpec,
    EstimatorConfig,
    InclusionSpec,
    LateralShiftMap,
    MethodTag,
    PhantomSpec,
    QualityRaw,
    RFFrame,
    ScattererField,
    StrainMap,
    TransducerSpec,
)
from elastostrain.errors import (
    ConfigurationError,
    DegenerateInputError,
    DegenerateROIError,
    DomainError,
    ElastostrainError,
    EstimationError,
    FrameMismatchError,
    RFFParseError,
)
from elastostrain.estimation import estimate_strain_map
from elastostrain.phantom import simulate_pair

__all__ = [
    "ConfigurationError",
    "DeformationSpec",
    "DegenerateInputError",
    "DegenerateROIError",
    "DomainError",
    "ElastostrainError",
    "EstimationError",
    "EstimatorConfig",
    "FrameMismatchError",
    "InclusionSpec",
    "LateralShiftMap",
    "MethodTag",
    "PhantomSpec",
    "QualityRaw",
    "RFFParseError",
    "RFFrame",
    "ScattererField",
    "StrainMap",
    "TransducerSpec",
    "estimate_strain_map",
    "simulate_pair",
]
