from models import __version__
from routes.experiments import EXPERIMENTS
from schemas.run_config import EXPERIMENTS as CONFIG_EXPERIMENTS


def test_simple():
    """A simple test to verify the package imports and registers every experiment"""
    assert __version__.count(".") == 2
    assert set(EXPERIMENTS) == set(CONFIG_EXPERIMENTS)
    for name, experiment in EXPERIMENTS.items():
        assert experiment.name == name
