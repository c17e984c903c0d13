import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from cadsec.entropy import (
    binary_entropy,
    binary_entropy_array,
    shannon_entropy,
    spectrum_entropy,
    two_level_deficit,
    uniform_deficit,
)
from cadsec.errors import NotPositiveSemidefinite, OutOfRange


def test_binary_entropy_endpoints():
    assert binary_entropy(0) == 0.0
    assert binary_entropy(1) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0, abs=1e-15)


def test_binary_entropy_half_bit_root():
    root = brentq(lambda p: binary_entropy(p) - 0.5, 1e-6, 0.5, xtol=1e-14)
    assert root == pytest.approx(0.110028, abs=1e-5)
    assert binary_entropy(0.110028) == pytest.approx(0.5, abs=1e-5)


@pytest.mark.parametrize("p", [-0.1, 1.1, float("nan")])
def test_binary_entropy_rejects(p):
    with pytest.raises(OutOfRange):
        binary_entropy(p)


@given(st.floats(0, 1))
def test_binary_entropy_symmetric_and_bounded(p):
    h = binary_entropy(p)
    assert 0.0 <= h <= 1.0 + 1e-15
    assert h == pytest.approx(binary_entropy(1 - p), abs=1e-12)


def test_binary_entropy_array_keeps_tiny_tail():
    # -(1-e)log2(1-e) ~ e/ln2 must survive 1-e rounding to 1
    e = 1e-25
    expected = -e * math.log2(e) + e / math.log(2)
    assert binary_entropy_array(e) == pytest.approx(expected, rel=1e-12)


@given(st.floats(-1, 1))
def test_two_level_deficit_matches_direct(x):
    direct = 1.0 - binary_entropy((1 + x) / 2)
    assert two_level_deficit(x) == pytest.approx(direct, abs=1e-12)


def test_two_level_deficit_small_argument():
    x = 1e-100
    assert two_level_deficit(x) == pytest.approx(x * x / (2 * math.log(2)), rel=1e-12)


def test_shannon_entropy_near_deterministic():
    w = [1 - 3e-20, 1e-20, 2e-20]
    terms = [-x * math.log2(x) for x in w[1:]] + [3e-20 / math.log(2)]
    assert shannon_entropy(w) == pytest.approx(sum(terms), rel=1e-10)


def test_spectrum_entropy_clamps_roundoff_and_rejects_negative():
    assert spectrum_entropy([0.5, 0.5, -1e-14]) == pytest.approx(1.0)
    with pytest.raises(NotPositiveSemidefinite):
        spectrum_entropy([0.6, 0.5, -0.1])


@given(st.lists(st.floats(0.01, 1), min_size=2, max_size=8))
def test_uniform_deficit_matches_entropy(raw):
    a = np.asarray(raw) / np.sum(raw)
    d = a.size
    x = d * a - 1
    direct = math.log2(d) - spectrum_entropy(a)
    assert uniform_deficit(x) == pytest.approx(direct, abs=1e-12)
