import pytest

from models.chain_models import ModelParams, Schedule


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: large chains or long drives; run with -m slow")


@pytest.fixture
def params():
    """Reference bottleneck chain, L = 41"""
    return ModelParams(ell=20, J=0.5, Jp=0.27)


@pytest.fixture
def small_params():
    """Shortest allowed chain, L = 5"""
    return ModelParams(ell=2, J=0.5, Jp=0.27)


@pytest.fixture
def medium_params():
    """Chain short enough for full drives in the fast suite, L = 11"""
    return ModelParams(ell=5, J=0.5, Jp=0.27)


@pytest.fixture
def fast_schedule():
    """Cubic ramp over T = 2"""
    return Schedule(2.0)


@pytest.fixture
def write_config(tmp_path):
    """Write configuration text to a temporary file and return its path"""
    def write(text, name="run.cfg"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)
    return write


@pytest.fixture
def output_dir(tmp_path):
    """Empty directory for result tables"""
    path = tmp_path / "results"
    return str(path)
