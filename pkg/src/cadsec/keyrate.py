"""Achievable key rates I(A:B) - chi(A:E) after CAD followed by one-way reconciliation.

All rates are in bits per accepted block.  For large blocks both mutual
informations approach their maximum, so rates are assembled from deficits
(see :mod:`cadsec.entropy`) rather than by subtracting two numbers near 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.special import expit, gammaln, xlogy

from .cad import _log_odds, cad_error, cad_statistics_d
from .entropy import (
    LN2,
    binary_entropy,
    binary_entropy_array,
    shannon_entropy,
    spectrum_entropy,
    two_level_deficit,
    uniform_deficit,
    xlogx_bits,
)
from .errors import BudgetExceeded, OutOfRange, OutsideAsymptoticRegime
from .eve import EveEnsembleD, EveEnsembleQubit, SpectrumReport, gu_offsets

__all__ = [
    "KeyRateReport",
    "PreprocParams",
    "binary_entropy",
    "coherent_bob_rate",
    "holevo_post_cad_d",
    "minimal_block_size",
    "minimal_block_size_d",
    "preproc_condition",
    "preproc_error_free_holevo",
    "preproc_params",
    "preproc_spectrum",
    "qubit_rates",
    "rate_asymptotic_qubit",
    "rate_post_cad_qubit",
    "rate_preprocessed",
]

COHERENT_BOB_MAX_N = 8


@dataclass(frozen=True)
class KeyRateReport:
    N: int
    i_ab: float
    i_ae: float
    rate: float
    method: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"N": self.N, "i_ab": self.i_ab, "i_ae": self.i_ae, "rate": self.rate,
                "method": self.method, **self.params}


def qubit_rates(ens: EveEnsembleQubit, Ns) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised (i_ab, i_ae, rate) after CAD on blocks of each size in ``Ns``."""
    Ns = np.asarray(Ns, dtype=float)
    lo = _log_odds(ens.eps)
    eps_n = expit(Ns * lo)
    keep = expit(-Ns * lo)
    g_eq = two_level_deficit(np.power(ens.lambda_eq, Ns))
    g_dif = two_level_deficit(np.power(ens.lambda_dif, Ns))
    h = binary_entropy_array(eps_n, keep)
    eve_deficit = keep * g_eq + eps_n * g_dif
    return 1.0 - h, 1.0 - eve_deficit, eve_deficit - h


def rate_post_cad_qubit(ens: EveEnsembleQubit, N: int) -> KeyRateReport:
    i_ab, i_ae, rate = (float(a[0]) for a in qubit_rates(ens, [N]))
    return KeyRateReport(N, i_ab, i_ae, rate, "exact", _qubit_params(ens))


def _qubit_params(ens: EveEnsembleQubit) -> dict:
    return {"eps": ens.eps, "lambda_eq": ens.lambda_eq, "lambda_dif": ens.lambda_dif}


def rate_asymptotic_qubit(ens: EveEnsembleQubit, N: int) -> KeyRateReport:
    """Leading large-N behaviour of both mutual informations."""
    eps_n = cad_error(ens.eps, N)
    a_eq, a_dif = ens.lambda_eq**N, ens.lambda_dif**N
    if max(eps_n, a_eq, a_dif) >= 0.1:
        raise OutsideAsymptoticRegime(
            f"N={N}: eps_N={eps_n:.3g}, Lambda_eq^N={a_eq:.3g}, Lambda_dif^N={a_dif:.3g} (need < 0.1)")
    ab_deficit = float(xlogx_bits(eps_n))
    ae_deficit = ens.lambda_eq ** (2 * N) / math.log(4.0)
    return KeyRateReport(N, 1.0 - ab_deficit, 1.0 - ae_deficit, ae_deficit - ab_deficit,
                         "asymptotic", _qubit_params(ens))


def minimal_block_size(ens: EveEnsembleQubit, N_max: int) -> int | None:
    """Smallest N <= N_max with a strictly positive rate, else None."""
    Ns = np.arange(1, N_max + 1)
    rate = qubit_rates(ens, Ns)[2]
    hits = np.flatnonzero(rate > 0)
    return int(Ns[hits[0]]) if hits.size else None


def holevo_post_cad_d(ens: EveEnsembleD, N: int) -> KeyRateReport:
    """Exact qudit rate after CAD on blocks of N.

    Given Alice's symbol, Eve's states of different error classes are
    orthogonal, so chi(A:E) = sum_j w_j S(sigma_j) where w are the post-CAD
    class weights and sigma_j the uniform mixture of class-j states.
    """
    stats = cad_statistics_d(ens.F, ens.D, N)
    w = stats.weights
    h_w = shannon_entropy(w)
    log_d = math.log2(ens.d)
    eve_deficit = 0.0
    for j in range(ens.d):
        if ens.present[j] and w[j] > 0:
            deficit = uniform_deficit(gu_offsets(ens.overlap(j), ens.d, N))
            eve_deficit += w[j] * min(deficit, log_d)
    return KeyRateReport(N, log_d - h_w, log_d - eve_deficit, eve_deficit - h_w, "exact",
                         {"d": ens.d, "F": ens.F, "D": [float(x) for x in ens.D]})


def minimal_block_size_d(ens: EveEnsembleD, N_max: int) -> int | None:
    for N in range(1, N_max + 1):
        if holevo_post_cad_d(ens, N).rate > 0:
            return N
    return None


@dataclass(frozen=True)
class PreprocParams:
    """Alice's binary symmetric pre-processing with flip probability q.

    u, v are the weights of Eve's agree/disagree states inside the state she
    holds when the processed bits agree; omega is the new error rate.
    """

    q: float
    u: float
    v: float
    omega: float


def preproc_params(ens: EveEnsembleQubit, q: float) -> PreprocParams:
    if not 0.0 <= q <= 0.5:
        raise OutOfRange(f"q={q!r} outside [0, 1/2]")
    e = ens.eps
    kept = (1 - q) * (1 - e)
    u = kept / (q * e + kept) if q * e + kept > 0 else 1.0
    return PreprocParams(q=q, u=u, v=1.0 - u, omega=(1 - q) * e + q * (1 - e))


def preproc_condition(ens: EveEnsembleQubit, q: float) -> bool:
    pp = preproc_params(ens, q)
    if pp.omega >= 1.0:
        return False
    lhs = pp.u * ens.lambda_eq**2 + pp.v * ens.lambda_dif**2
    return lhs > pp.omega / (1.0 - pp.omega)


def preproc_spectrum(pp: PreprocParams, ens: EveEnsembleQubit, N: int) -> SpectrumReport:
    """Spectrum of (rho_00^N + rho_11^N)/2, rho_ii = u[e_ii] + v[e_i,i+1].

    Levels u^r v^(N-r) (1 +- Lambda_eq^r Lambda_dif^(N-r)) / 2, each with
    multiplicity binomial(N, r); returned as 2(N+1) levels.
    """
    r = np.arange(N + 1)
    base = np.power(pp.u, r) * np.power(pp.v, N - r)
    y = np.power(ens.lambda_eq, r) * np.power(ens.lambda_dif, N - r)
    eig = np.concatenate((base * (1 + y) / 2, base * (1 - y) / 2))
    mult = np.exp(gammaln(N + 1) - gammaln(r + 1) - gammaln(N - r + 1))
    mult = np.rint(np.concatenate((mult, mult)))
    return SpectrumReport(eigenvalues=eig, entropy_bits=spectrum_entropy(eig, mult),
                          multiplicities=mult)


def preproc_error_free_holevo(pp: PreprocParams, ens: EveEnsembleQubit, N: int) -> float:
    """S(sigma_E) - N h(u): Eve's information when post-CAD errors are neglected."""
    return preproc_spectrum(pp, ens, N).entropy_bits - N * binary_entropy(pp.u)


def rate_preprocessed(ens: EveEnsembleQubit, q: float, N: int) -> KeyRateReport:
    """Exact rate when Alice flips each raw bit with probability q before CAD.

    Eve's accepted-block state splits into 2^N orthogonal sectors (which
    copies sit in the agree subspace).  In a sector with r agree-copies she
    holds one of two pure states with overlap Lambda_eq^r Lambda_dif^(N-r),
    so every entropy reduces to a two-state mixture.
    """
    pp = preproc_params(ens, q)
    e, w = ens.eps, pp.omega
    w_n = cad_error(w, N)
    keep_n = float(expit(-N * _log_odds(w)))
    # weights of Eve's agree-subspace state given a disagreement after pre-processing
    u_err = (1 - q) * e / w if w > 0 else 0.0
    v_err = 1.0 - u_err

    r = np.arange(N + 1, dtype=float)
    log_binom = gammaln(N + 1) - gammaln(r + 1) - gammaln(N - r + 1)
    with np.errstate(divide="ignore"):
        log_alpha = np.log(keep_n) + xlogy(r, pp.u) + xlogy(N - r, pp.v)
        log_beta = np.log(w_n) + xlogy(r, v_err) + xlogy(N - r, u_err)
    log_w = np.logaddexp(log_alpha, log_beta)
    finite = np.isfinite(log_w)
    y = np.power(ens.lambda_eq, r) * np.power(ens.lambda_dif, N - r)

    # 1 - z^2 = 4 alpha beta (1 - y^2) / (alpha + beta)^2
    one_minus_z2 = np.zeros_like(r)
    both = np.isfinite(log_alpha) & np.isfinite(log_beta)
    one_minus_z2[both] = np.exp(math.log(4.0) + log_alpha[both] + log_beta[both]
                                + np.log1p(-y[both] ** 2) - 2 * log_w[both])
    one_minus_z2 = np.clip(one_minus_z2, 0.0, 1.0)
    p_small = one_minus_z2 / (2.0 * (1.0 + np.sqrt(1.0 - one_minus_z2)))
    sector = np.zeros_like(r)
    sector[finite] = np.exp(log_binom[finite] + log_w[finite])
    per_sector = two_level_deficit(y) + binary_entropy_array(p_small)
    h_ab = binary_entropy_array(w_n, keep_n)
    rate = float(np.sum(sector * per_sector) - h_ab)
    i_ab = float(1.0 - h_ab)
    return KeyRateReport(N, i_ab, i_ab - rate, rate, "exact", {**_qubit_params(ens), "q": q})


def _explicit_eve_vectors(ens: EveEnsembleQubit) -> dict[tuple[int, int], np.ndarray]:
    l1, l2, l3, l4 = (math.sqrt(x) for x in ens.representative_lambdas())
    return {
        (0, 0): np.array([l1, l2, 0, 0]),
        (0, 1): np.array([0, 0, l3, l4]),
        (1, 0): np.array([0, 0, l3, -l4]),
        (1, 1): np.array([l1, -l2, 0, 0]),
    }


def _entropy_of(mat: np.ndarray) -> float:
    return spectrum_entropy(np.linalg.eigvalsh(mat))


def coherent_bob_rate(ens: EveEnsembleQubit, N: int) -> KeyRateReport:
    """Rate when Bob runs the coherent recurrence step instead of measuring first.

    Builds, for each value a of Alice's announced block, the explicit pure
    state sum_b |b>_B |e~_{a,b}>^N and evaluates both Holevo quantities.
    """
    if N > COHERENT_BOB_MAX_N:
        raise BudgetExceeded(f"N={N} exceeds the explicit-vector budget {COHERENT_BOB_MAX_N}")
    vecs = _explicit_eve_vectors(ens)
    blocks = {k: reduce(np.kron, [v] * N) for k, v in vecs.items()}
    psi = {a: np.vstack([blocks[a, 0], blocks[a, 1]]) for a in (0, 1)}  # rows: Bob's qubit
    total = sum(float(np.vdot(p, p).real) for p in psi.values())

    rho_b_given = {a: psi[a] @ psi[a].conj().T / total for a in (0, 1)}
    p_a = {a: float(np.trace(rho_b_given[a]).real) for a in (0, 1)}
    cond = sum(p_a[a] * _entropy_of(rho_b_given[a] / p_a[a]) for a in (0, 1) if p_a[a] > 0)
    i_ab = _entropy_of(rho_b_given[0] + rho_b_given[1]) - cond

    # rho_E = sum_{a,b} |e~_ab^N><e~_ab^N|: its nonzero spectrum is that of the Gram matrix
    K = np.column_stack([blocks[k] for k in sorted(blocks)]) / math.sqrt(total)
    s_e = _entropy_of(K.conj().T @ K)
    # each conditional B-E state is pure, so S(E|a) = S(B|a)
    i_ae = s_e - cond
    return KeyRateReport(N, i_ab, i_ae, i_ab - i_ae, "exact", _qubit_params(ens))
