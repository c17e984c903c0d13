import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cadsec import make_bell_diagonal  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def random_states(rng, n):
    return [make_bell_diagonal(rng.dirichlet(np.ones(4))) for _ in range(n)]
