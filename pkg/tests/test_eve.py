import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cadsec.errors import EmptyClass, NotPositiveSemidefinite
from cadsec.eve import (
    gu_eigenvalues,
    helstrom_error,
    log_helstrom_error,
    qubit_ensemble,
    qudit_ensemble,
    srm_success,
    srm_success_error_class,
)
from cadsec.states import (
    GeneralizedPauliChannel,
    bb84_attack_state,
    make_bell_diagonal,
    protocol_channel_d,
    sixstate_attack_state,
)
from conftest import random_states
from oracles import dense_gu_spectrum, qubit_eve_vectors, qudit_eve_vectors


def test_qubit_ensemble_examples():
    e = qubit_ensemble(make_bell_diagonal((1, 0, 0, 0)))
    assert (e.eps, e.lambda_eq) == (0, 1)
    e = qubit_ensemble(sixstate_attack_state(0.2))
    assert e.eps == pytest.approx(0.2)
    assert e.lambda_eq == pytest.approx(0.75)
    assert e.lambda_dif == pytest.approx(0, abs=1e-15)
    e = qubit_ensemble(bb84_attack_state(0.2, 0))
    assert e.lambda_eq == pytest.approx(0.5) and e.lambda_dif == 1


def test_qubit_ensemble_matches_explicit_overlaps(rng):
    for s in random_states(rng, 200):
        e = qubit_ensemble(s)
        v = qubit_eve_vectors(s.lambdas)
        n = {k: np.linalg.norm(x) for k, x in v.items()}
        assert e.eps == pytest.approx(n[0, 1] ** 2 + n[1, 0] ** 2, abs=1e-12)
        assert e.lambda_eq == pytest.approx(abs(v[0, 0] @ v[1, 1]) / n[0, 0] ** 2, abs=1e-12)
        assert e.lambda_dif == pytest.approx(abs(v[0, 1] @ v[1, 0]) / n[0, 1] ** 2, abs=1e-12)


def test_qudit_ensemble_matches_explicit_overlaps(rng):
    for d in (2, 3, 4, 5):
        p = rng.dirichlet(np.ones(d * d)).reshape(d, d)
        ens = qudit_ensemble(GeneralizedPauliChannel.from_matrix(p))
        vecs = qudit_eve_vectors(p)
        for j in range(d):
            ref = vecs[0, j]
            for m in range(d):
                other = vecs[m, (m + j) % d]
                expected = np.vdot(ref, other) / np.vdot(ref, ref)
                assert ens.overlap(j)[m] == pytest.approx(expected, abs=1e-12)
                assert ens.overlap(j)[(-m) % d] == pytest.approx(np.conj(ens.overlap(j)[m]), abs=1e-12)


def test_qudit_ensemble_reduces_to_qubit(rng):
    for s in random_states(rng, 200):
        q = qubit_ensemble(s)
        e = qudit_ensemble(s.to_channel())
        assert abs(e.overlap(0)[1]) == pytest.approx(q.lambda_eq, abs=1e-12)
        if q.eps > 0:
            assert abs(e.overlap(1)[1]) == pytest.approx(q.lambda_dif, abs=1e-12)


def test_qudit_ensemble_identity_and_symmetric_overlap():
    e = qudit_ensemble(GeneralizedPauliChannel.identity(3))
    assert np.allclose(e.overlap(0), 1)
    for d in (3, 5):
        F = 0.8
        e = qudit_ensemble(protocol_channel_d("d-plus-1-bases", d, F))
        v2 = ((d + 1) * F - 1) / d
        x2 = (1 - F) / (d * (d - 1))
        assert np.allclose(e.overlap(0)[1:], (v2 - x2) / F)


def test_helstrom_examples():
    assert helstrom_error(0, 1) == 0
    assert helstrom_error(1, 7) == 0.5
    assert helstrom_error(math.sqrt(0.5), 2) == pytest.approx(0.5 - math.sqrt(3) / 4, abs=1e-12)
    assert helstrom_error(math.sqrt(0.5), 2) == pytest.approx(0.0669873, abs=1e-7)


def test_helstrom_stable_far_below_underflow():
    c, N = 0.5, 600
    assert helstrom_error(c, N) == pytest.approx(c ** (2 * N) / 4, rel=1e-12)
    assert log_helstrom_error(0.1, 10**6) == pytest.approx(2e6 * math.log(0.1) - math.log(4), rel=1e-12)


def test_helstrom_monotone_on_grid():
    for c in np.linspace(0, 1, 101):
        vals = [helstrom_error(c, N) for N in range(1, 65)]
        assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_gu_eigenvalues_two_states():
    for c in (0.0, 0.3, 0.9, 1.0):
        for N in (1, 3):
            ev = np.sort(gu_eigenvalues([1, c], 2, N).eigenvalues)
            assert np.allclose(ev, sorted([(1 + c**N) / 2, (1 - c**N) / 2]), atol=1e-15)


def test_gu_eigenvalues_identical_states():
    rep = gu_eigenvalues(lambda m: 1.0, 5, 3)
    assert np.allclose(np.sort(rep.eigenvalues)[::-1], [1, 0, 0, 0, 0])
    assert rep.entropy_bits == pytest.approx(0, abs=1e-12)


def test_gu_eigenvalues_against_dense(rng):
    for d in range(2, 7):
        for _ in range(3):
            p = rng.dirichlet(np.ones(d * d)).reshape(d, d)
            ens = qudit_ensemble(GeneralizedPauliChannel.from_matrix(p))
            for j in range(d):
                rep = gu_eigenvalues(ens.overlap(j), d, 1)
                assert rep.eigenvalues.sum() == pytest.approx(1, abs=1e-9)
                dense = dense_gu_spectrum(p, j, 1)
                assert np.allclose(np.sort(rep.eigenvalues)[::-1], dense, atol=1e-12)


def test_gu_eigenvalues_rejects_non_gram():
    with pytest.raises(NotPositiveSemidefinite):
        gu_eigenvalues([1, 2, 2], 3, 1)


@given(st.floats(0, 1), st.integers(1, 64))
def test_srm_matches_helstrom_for_two_states(c, N):
    assert srm_success([1, c], 2, N) == pytest.approx(1 - helstrom_error(c, N), abs=1e-12)


def test_srm_limits():
    assert srm_success([1, 0, 0, 0], 4, 1) == pytest.approx(1)
    assert srm_success([1, 1, 1], 3, 2) == pytest.approx(1 / 3)


def test_srm_error_class():
    ens = qudit_ensemble(protocol_channel_d("d-plus-1-bases", 3, 0.7))
    assert srm_success_error_class(ens, 0, 2) == srm_success(ens.overlap(0), 3, 2)
    assert srm_success_error_class(ens, 1, 3) == pytest.approx(srm_success_error_class(ens, 2, 3), abs=1e-14)
    bb = qudit_ensemble(bb84_attack_state(0.2, 0).to_channel())
    assert srm_success_error_class(bb, 1, 4) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(EmptyClass):
        srm_success_error_class(qudit_ensemble(GeneralizedPauliChannel.identity(3)), 1, 1)


def test_srm_against_dense_pretty_good_measurement(rng):
    # Gram-matrix form of the square-root measurement: P = (1/d) sum_k (G^{1/2})_{kk}^2
    for d in (3, 4, 5):
        p = rng.dirichlet(np.ones(d * d)).reshape(d, d)
        ens = qudit_ensemble(GeneralizedPauliChannel.from_matrix(p))
        o = ens.overlap(0)
        for N in (1, 2, 5):
            G = np.array([[o[(k2 - k1) % d] ** N for k2 in range(d)] for k1 in range(d)])
            w, V = np.linalg.eigh(G)
            root = (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T
            assert srm_success(o, d, N) == pytest.approx(np.sum(np.abs(np.diag(root)) ** 2) / d, abs=1e-12)
