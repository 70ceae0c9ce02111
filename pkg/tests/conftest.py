import cmath

import numpy as np
import pytest

from qgevrey import QBase
from qgevrey.config import load_shipped_config


@pytest.fixture(scope="session")
def base2():
    return QBase(2.0)


@pytest.fixture(scope="session")
def bases():
    """The three reference bases used by the theta identities."""
    return [QBase(2.0), QBase(1.5 * cmath.exp(0.2j)),
            QBase(3.0 * cmath.exp(-0.1j))]


@pytest.fixture(scope="session")
def demo_cfg():
    return load_shipped_config("demo")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240901)
