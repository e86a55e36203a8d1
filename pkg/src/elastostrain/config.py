"""
Run configuration.

A configuration document is a flat YAML mapping of dotted keys, for example

```yaml
deformation.applied_strain: 0.04
estimator.window_mm: 2.5
compare.seeds: [0, 1, 2]
```

Every key is optional; an empty document describes the reference experiment. Nested mappings
(`estimator: {window_mm: 2.5}`) are accepted too. Unknown keys are rejected with the key named.
"""
import logging
from pathlib import Path
from typing import Annotated, Any, Dict, List, Mapping, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from elastostrain.bmode import DEFAULT_DYNAMIC_RANGE_DB
from elastostrain.datamodel import (
    DeformationSpec,
    EstimatorConfig,
    Method,
    PhantomSpec,
    TransducerSpec,
)
from elastostrain.errors import ConfigurationError
from elastostrain.metrics import DEFAULT_ROI_HALF_WIDTH_MM, DEFAULT_ROI_PAIRS_MM

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class NoiseConfig(_Section):
    snr_db: float = 40.0
    pre_seed: Optional[int] = 1
    post_seed: Optional[int] = 2


class SimulateConfig(_Section):
    extra_column_shift: int = 0


class MetricsConfig(_Section):
    roi_half_width_mm: float = Field(DEFAULT_ROI_HALF_WIDTH_MM, gt=0)
    roi_pairs_mm: Tuple[Tuple[Tuple[float, float], Tuple[float, float]], ...] = DEFAULT_ROI_PAIRS_MM


AppliedStrain = Annotated[float, Field(ge=0, lt=1)]


class CompareConfig(_Section):
    """Applied-strain sweep comparing 1D and 1.5D variants of each method."""

    strains: Tuple[AppliedStrain, ...] = (0.02, 0.04, 0.06, 0.08, 0.12, 0.16)
    seeds: Tuple[int, ...] = (0, 1, 2, 3, 4)
    methods: Tuple[Method, ...] = ("gradient", "adaptive")
    probe_line: Optional[int] = None
    probe_window: Optional[int] = None
    probe_strain: Optional[AppliedStrain] = None
    extra_column_shift: int = 0
    workers: int = Field(1, ge=1)


class OutputConfig(_Section):
    directory: Path = Path("output")
    bmode_dynamic_range_db: float = Field(DEFAULT_DYNAMIC_RANGE_DB, gt=0)


class RunConfig(_Section):
    """
    Everything a simulate, estimate or compare run needs.

    >>> RunConfig().transducer.n_lines
    128
    >>> RunConfig.from_flat({"estimator.window_mm": 2.0}).estimator.window_mm
    2.0
    """

    phantom: PhantomSpec = Field(default_factory=PhantomSpec.reference)
    transducer: TransducerSpec = Field(default_factory=TransducerSpec)
    deformation: DeformationSpec = Field(default_factory=DeformationSpec)
    noise: NoiseConfig = Field(default_factory=NoiseConfig)
    simulate: SimulateConfig = Field(default_factory=SimulateConfig)
    estimator: EstimatorConfig = Field(default_factory=EstimatorConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    compare: CompareConfig = Field(default_factory=CompareConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @classmethod
    def from_flat(cls, flat: Mapping[str, Any]) -> "RunConfig":
        """
        Validate a mapping of dotted keys.

        :raises ConfigurationError: naming every offending key
        """
        nested = merge(cls().model_dump(mode="json"), unflatten(flat))
        try:
            return cls.model_validate(nested)
        except ValidationError as e:
            problems = [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()]
            raise ConfigurationError("invalid configuration: " + "; ".join(problems)) from e

    def to_flat(self) -> Dict[str, Any]:
        """Dotted-key view of every setting, as written by `dump_config`."""
        return flatten(self.model_dump(mode="json"))


def unflatten(flat: Mapping[str, Any]) -> Dict[str, Any]:
    """
    >>> unflatten({"a.b": 1, "a.c": 2, "d": 3})
    {'a': {'b': 1, 'c': 2}, 'd': 3}
    """
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        if not isinstance(key, str) or not key:
            raise ConfigurationError(f"configuration keys must be non-empty strings, got {key!r}")
        parts = key.split(".")
        node = nested
        for depth, part in enumerate(parts[:-1]):
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigurationError(f"key {key!r} conflicts with {'.'.join(parts[: depth + 1])!r}")
            node = child
        leaf = parts[-1]
        if isinstance(value, dict):
            existing = node.setdefault(leaf, {})
            if not isinstance(existing, dict):
                raise ConfigurationError(f"key {key!r} is given twice")
            existing.update(unflatten(value))
        elif leaf in node:
            raise ConfigurationError(f"key {key!r} is given twice")
        else:
            node[leaf] = value
    return nested


def merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    """
    Overlay `override` on `base`, descending into mappings present in both.

    >>> merge({"a": {"b": 1, "c": 2}}, {"a": {"c": 3}})
    {'a': {'b': 1, 'c': 3}}
    """
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def flatten(nested: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    """
    >>> flatten({"a": {"b": 1}, "c": [1, 2]})
    {'a.b': 1, 'c': [1, 2]}
    """
    flat: Dict[str, Any] = {}
    for key, value in nested.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten(value, f"{name}."))
        else:
            flat[name] = value
    return flat


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """
    Read a configuration document; None gives the defaults.

    :raises ConfigurationError: for unreadable YAML, a non-mapping document or invalid settings
    """
    if path is None:
        return RunConfig()
    try:
        document = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{path} is not valid YAML: {e}") from e
    except OSError as e:
        raise ConfigurationError(f"cannot read {path}: {e}") from e
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigurationError(f"{path} must contain a mapping of dotted keys, got {type(document).__name__}")
    config = RunConfig.from_flat(document)
    logger.info(f"loaded configuration from {path}")
    return config


def dump_config(config: RunConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(yaml.safe_dump(config.to_flat(), sort_keys=True))


def list_keys() -> List[str]:
    """
    All configurable dotted keys.

    >>> "estimator.lateral_radius_n" in list_keys()
    True
    """
    return sorted(RunConfig().to_flat())
