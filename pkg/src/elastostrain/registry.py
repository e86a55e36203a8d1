import importlib
import inspect
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Type

from elastostrain.datamodel import EstimatorConfig
from elastostrain.errors import ConfigurationError
from elastostrain.estimators.estimator import StrainEstimator

logger = logging.getLogger(__name__)

SUFFIXES = {StrainEstimator: "estimator"}


@dataclass
class Registry:
    implementation_classes: Dict[Type, Dict[str, Type]] = field(default_factory=dict)

    def register(self, name: str, category: Type, impl_class: Type[StrainEstimator]):
        if category not in self.implementation_classes:
            self.implementation_classes[category] = {}
        self.implementation_classes[category][name] = impl_class

    def handles(self, category: Type) -> List[str]:
        return sorted(self.implementation_classes.get(category, {}))

    def get_implementation_class(self, category: Type, name: str) -> Type[StrainEstimator]:
        if category not in self.implementation_classes:
            raise ConfigurationError(
                f"Unknown category: {category}\n" f"Known categories: {list(self.implementation_classes.keys())}"
            )
        if name not in self.implementation_classes[category]:
            raise ConfigurationError(f"Unknown handle: {name}\n" f"Known implementations: {self.handles(category)}")
        return self.implementation_classes[category][name]

    def create_instance(self, category: Type, handle: str, **kwargs) -> StrainEstimator:
        implementation_class = self.get_implementation_class(category, handle)
        return implementation_class(**kwargs)

    @classmethod
    def load_implementations(cls, package_path: str):
        """
        Register every concrete class in `package_path` whose name ends with a known suffix.

        A class is registered under its `method` attribute if it has one, otherwise under its
        lower-cased name with the suffix removed.
        """
        registry = cls()
        this_path = importlib.import_module(package_path).__file__
        if this_path is None:
            raise ValueError(f"Error: package {package_path} not found")
        package_dir = os.path.dirname(Path(this_path))
        for root, _dirs, files in os.walk(package_dir):
            for filename in files:
                if not filename.endswith(".py") or filename.startswith("__"):
                    continue
                filepath = os.path.join(root, filename)
                base = filepath.replace(package_dir, "").replace(os.sep, ".")[1:-3]
                module_name = f"{package_path}.{base}"
                try:
                    module = importlib.import_module(module_name)
                except ImportError as e:
                    logger.info(f"Error importing {module_name}: {e} - assuming not installed")
                    continue
                for name, obj in inspect.getmembers(module, inspect.isclass):
                    for t, suffix_name in SUFFIXES.items():
                        if name.lower().endswith(suffix_name) and issubclass(obj, t) and not inspect.isabstract(obj):
                            handle = getattr(obj, "method", name.lower().replace(suffix_name, ""))
                            registry.register(handle, t, obj)
        return registry


registry = Registry.load_implementations("elastostrain.estimators")


def get_estimator(handle: str, config: EstimatorConfig = EstimatorConfig()) -> StrainEstimator:
    """
    Get a strain estimator

    >>> from elastostrain.registry import get_estimator
    >>> type(get_estimator('adaptive'))
    <class 'elastostrain.estimators.adaptive.AdaptiveStretchingEstimator'>

    :param handle: "gradient" or "adaptive"
    :param config: window and search settings
    :return: a new estimator
    :raises ConfigurationError: for an unknown handle
    """
    return registry.create_instance(StrainEstimator, handle, config=config)


def estimator_handles() -> List[str]:
    """
    >>> estimator_handles()
    ['adaptive', 'gradient']
    """
    return registry.handles(StrainEstimator)
