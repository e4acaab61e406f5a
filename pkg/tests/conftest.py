import os
import tempfile
import hypothesis
import pytest
from src.model.params import ModelParams

# keep test logs out of the working tree
os.environ.setdefault(
    "NUCLEATION_LOGS", os.path.join(tempfile.gettempdir(), "nucleation-growth-lab-logs")
)
os.environ.setdefault("NUCLEATION_PROGRESS", "0")

hypothesis.settings.register_profile("default", deadline=None, max_examples=100)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=10)
hypothesis.settings.register_profile("thorough", deadline=None, max_examples=2000)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def params_1d():
    return ModelParams(dim=1, gammas=(0.5, 2.0), beta=3.0)


@pytest.fixture
def params_2d():
    return ModelParams(dim=2, gammas=(0.0, 1.0, 2.0), beta=3.0)
