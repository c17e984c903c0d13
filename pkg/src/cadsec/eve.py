"""Eve's side: overlaps of her conditional states and optimal measurements on them.

Once Alice and Bob measure in the computational basis, Eve holds a pure
state per (Alice, Bob) outcome pair.  States belonging to different error
classes (Bob minus Alice) are orthogonal, and within a class they are
geometrically uniform, so every quantity here is a function of the
overlaps ``o_j(m) = <e_{0,j} | e_{m,m+j}>`` alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .entropy import NEGATIVE_EIGENVALUE_TOL, spectrum_entropy
from .errors import EmptyClass, NotPositiveSemidefinite
from .states import BellDiagonalState, GeneralizedPauliChannel, fidelity_disturbances

Overlap = Union[Sequence[complex], np.ndarray, Callable[[int], complex]]


@dataclass(frozen=True)
class EveEnsembleQubit:
    """QBER plus the two overlap moduli that fix Eve's qubit-attack ensemble.

    ``lambda_eq`` is |<e00|e11>| (Alice and Bob agree), ``lambda_dif`` is
    |<e01|e10>| (they disagree).
    """

    eps: float
    lambda_eq: float
    lambda_dif: float

    def representative_lambdas(self) -> tuple[float, float, float, float]:
        """A Bell-diagonal state with this ensemble (lambda1 >= lambda2, lambda3 >= lambda4)."""
        e = self.eps
        return (
            (1 - e) * (1 + self.lambda_eq) / 2,
            (1 - e) * (1 - self.lambda_eq) / 2,
            e * (1 + self.lambda_dif) / 2,
            e * (1 - self.lambda_dif) / 2,
        )


def qubit_ensemble(state: BellDiagonalState) -> EveEnsembleQubit:
    l1, l2, l3, l4 = state.lambdas
    agree, disagree = l1 + l2, l3 + l4
    lam_eq = abs(l1 - l2) / agree if agree > 0 else 1.0
    lam_dif = abs(l3 - l4) / disagree if disagree > 0 else 1.0
    return EveEnsembleQubit(eps=disagree, lambda_eq=min(lam_eq, 1.0), lambda_dif=min(lam_dif, 1.0))


@dataclass(frozen=True, eq=False)
class EveEnsembleD:
    """Per-class overlaps of Eve's qudit states.

    ``overlaps[j, m]`` is o_j(m); row j is meaningless (set to 1) when the
    class has zero weight, see ``present``.
    """

    d: int
    F: float
    D: np.ndarray
    overlaps: np.ndarray
    present: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate(([self.F], self.D))

    def overlap(self, j: int) -> np.ndarray:
        return self.overlaps[j]


def qudit_ensemble(ch: GeneralizedPauliChannel) -> EveEnsembleD:
    d = ch.d
    F, D = fidelity_disturbances(ch)
    weights = np.concatenate(([F], D))
    phases = np.exp(2j * np.pi * np.outer(np.arange(d), np.arange(d)) / d)  # [n, m]
    raw = ch.p @ phases  # raw[j, m] = sum_n p[j, n] e^{2 pi i m n / d}
    present = weights > 0
    overlaps = np.ones((d, d), dtype=complex)
    overlaps[present] = raw[present] / weights[present, None]
    overlaps[:, 0] = 1.0
    for arr in (D, overlaps, present):
        arr.setflags(write=False)
    return EveEnsembleD(d=d, F=F, D=D, overlaps=overlaps, present=present)


def helstrom_error(overlap_abs: float, N: int) -> float:
    """Minimum error discriminating |a>^N from |b>^N, equiprobable, |<a|b>| = overlap_abs."""
    c = abs(float(overlap_abs))
    if c == 0.0:
        return 0.0
    a = math.exp(2 * N * math.log(c)) if c < 1.0 else 1.0
    # 1/2 - sqrt(1-a)/2 rewritten to avoid cancellation when a is small
    return a / (2.0 * (1.0 + math.sqrt(max(1.0 - a, 0.0))))


def log_helstrom_error(overlap_abs: float, N: int) -> float:
    """Natural log of :func:`helstrom_error`; finite far below float underflow."""
    c = abs(float(overlap_abs))
    if c == 0.0:
        return -math.inf
    log_a = 2 * N * math.log(c) if c < 1.0 else 0.0
    a = math.exp(log_a)
    return log_a - math.log(2.0 * (1.0 + math.sqrt(max(1.0 - a, 0.0))))


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    entropy_bits: float
    multiplicities: np.ndarray | None = None


def _overlap_values(overlap: Overlap, d: int) -> np.ndarray:
    if callable(overlap):
        vals = np.array([overlap(m) for m in range(d)], dtype=complex)
    else:
        vals = np.asarray(overlap, dtype=complex)
    if vals.shape != (d,):
        raise ValueError(f"overlap must provide {d} values, got shape {vals.shape}")
    return vals


def _powers(vals: np.ndarray, N: int) -> np.ndarray:
    if not np.any(vals.imag):
        return np.power(vals.real, N).astype(complex)
    out = np.zeros_like(vals)
    nz = vals != 0
    out[nz] = np.exp(N * np.log(vals[nz]))
    return out


def gu_offsets(overlap: Overlap, d: int, N: int) -> np.ndarray:
    """x_eta with eigenvalues (1 + x_eta)/d of the uniform mixture of |e_k>^N."""
    g = _powers(_overlap_values(overlap, d), N)
    g[0] = 0.0
    x = np.fft.fft(g)
    if np.max(np.abs(x.imag), initial=0.0) > 1e-10:
        raise NotPositiveSemidefinite("overlap does not generate a Hermitian Gram matrix")
    return x.real


def gu_eigenvalues(overlap: Overlap, d: int, N: int) -> SpectrumReport:
    """Spectrum of (1/d) sum_k [e_k]^N for geometrically uniform |e_k>, <e_k|e_k'> = o(k'-k)."""
    ev = (1.0 + gu_offsets(overlap, d, N)) / d
    if ev.min() < -NEGATIVE_EIGENVALUE_TOL:
        raise NotPositiveSemidefinite(f"eigenvalue {ev.min():.3e} is negative")
    ev = np.clip(ev, 0.0, None)
    return SpectrumReport(eigenvalues=ev, entropy_bits=spectrum_entropy(ev))


def srm_success(overlap: Overlap, d: int, N: int) -> float:
    """Success probability of the square-root measurement on N copies of d GU states."""
    g = _powers(_overlap_values(overlap, d), N)
    g[0] = 0.0
    Y = np.fft.ifft(g) * d  # sum_{m != 0} e^{+2 pi i eta m / d} o(m)^N
    if np.max(np.abs(Y.imag), initial=0.0) > 1e-10:
        raise NotPositiveSemidefinite("SRM offsets are not real")
    terms = 1.0 + Y.real
    if terms.min() < -NEGATIVE_EIGENVALUE_TOL:
        raise NotPositiveSemidefinite(f"1 + Y = {terms.min():.3e} is negative")
    return float(np.sum(np.sqrt(np.clip(terms, 0.0, None))) ** 2 / d**2)


def srm_success_error_class(ens: EveEnsembleD, j: int, N: int) -> float:
    if not ens.present[j]:
        raise EmptyClass(f"error class {j} has zero probability")
    return srm_success(ens.overlap(j), ens.d, N)
