import pytest

from elastostrain.datamodel import EstimatorConfig
from tests import OUTPUT_DIR, SMALL_CONFIG_YAML, small_pair


@pytest.fixture
def estimator_config() -> EstimatorConfig:
    return EstimatorConfig()


@pytest.fixture
def pair_2pct():
    return small_pair(applied_strain=0.02)


@pytest.fixture
def small_config_file(tmp_path):
    path = tmp_path / "small.yaml"
    path.write_text(SMALL_CONFIG_YAML)
    return path


@pytest.fixture
def output_dir(request):
    path = OUTPUT_DIR / request.node.name
    path.mkdir(parents=True, exist_ok=True)
    return path
