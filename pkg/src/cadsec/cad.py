"""Classical advantage distillation (CAD): exact post-CAD statistics and a
seeded Monte Carlo simulator of the two block protocols.

CAD1: Alice picks N positions where her symbols coincide; Bob accepts if his
do too.  CAD2: Alice draws a secret s, announces X_i = s - A_i, and Bob
accepts if every B_i + X_i is the same value.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit, log_expit, logsumexp
from scipy.stats import binomtest

from .errors import DegenerateChannel, LengthMismatch, ValidationError

CHUNK_SIZE = 1 << 16
THREADS_ENV = "CADSEC_THREADS"


def _log_odds(eps: float) -> float:
    if eps <= 0.0:
        return -math.inf
    if eps >= 1.0:
        return math.inf
    return math.log(eps) - math.log1p(-eps)


def cad_error(eps: float, N: int) -> float:
    """Bob's error rate on accepted blocks: eps^N / (eps^N + (1-eps)^N)."""
    if N < 1:
        raise ValidationError(f"block size N={N} must be >= 1")
    return float(expit(N * _log_odds(eps)))


def log_cad_error(eps: float, N: int) -> float:
    return float(log_expit(N * _log_odds(eps)))


@dataclass(frozen=True)
class CadStatistics:
    N: int
    p_ok: float
    fidelity_after: float
    disturbances_after: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate(([self.fidelity_after], self.disturbances_after))


def cad_statistics_d(F: float, D: Sequence[float], N: int) -> CadStatistics:
    """Acceptance probability and the post-CAD fidelity/disturbance profile."""
    if F <= 0.0:
        raise DegenerateChannel("fidelity is zero; CAD never favours agreement")
    if N < 1:
        raise ValidationError(f"block size N={N} must be >= 1")
    w = np.concatenate(([F], np.asarray(D, dtype=float)))
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValidationError(f"F + sum(D) = {w.sum()!r}, expected 1")
    with np.errstate(divide="ignore"):
        logw = N * np.log(w)
    log_ok = logsumexp(logw)
    post = np.exp(logw - log_ok)
    return CadStatistics(N=N, p_ok=float(np.exp(log_ok)), fidelity_after=float(post[0]),
                         disturbances_after=post[1:])


def eve_relabel(X, labels, d: int) -> np.ndarray:
    """Undo the CAD2 announcement on Eve's record.

    ``labels[i] = (alpha_i, beta_i)`` names Eve's state |e_{alpha,beta}> for
    position i.  Shifting both indices by X_i gives (s, s + beta_i - alpha_i),
    i.e. the labels a CAD1 run with Alice's value s would have produced.
    """
    X = np.asarray(X, dtype=np.int64)
    lab = np.asarray(labels, dtype=np.int64)
    if lab.ndim != 2 or lab.shape[1] != 2:
        raise ValidationError(f"labels must have shape (N, 2), got {lab.shape}")
    if X.shape != (lab.shape[0],):
        raise LengthMismatch(f"{X.shape[0] if X.ndim else X} announcements for {lab.shape[0]} labels")
    return (lab + X[:, None]) % d


@dataclass(frozen=True)
class SimReport:
    variant: str
    d: int
    N: int
    trials: int
    accepted: int
    error_counts: tuple[int, ...]
    seed: int

    def to_dict(self) -> dict:
        def ci(k, n):
            if n == 0:
                return None
            lo, hi = binomtest(k, n).proportion_ci(confidence_level=0.99, method="wilson")
            return [float(lo), float(hi)]

        acc = self.accepted
        return {
            "variant": self.variant,
            "d": self.d,
            "N": self.N,
            "trials": self.trials,
            "accepted": acc,
            "error_counts": list(self.error_counts),
            "seed": self.seed,
            "acceptance_rate": acc / self.trials,
            "acceptance_ci99": ci(acc, self.trials),
            "class_fractions": [c / acc if acc else None for c in self.error_counts],
            "class_ci99": [ci(c, acc) for c in self.error_counts],
        }


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def _simulate_chunk(probs, N, size, variant, seed, chunk):
    rng = _chunk_rng(seed, chunk)
    d = probs.size
    cum = np.cumsum(probs)
    diffs = np.minimum(np.searchsorted(cum, rng.random((size, N)), side="right"), d - 1)
    if variant == "CAD1":
        ok = np.all(diffs == diffs[:, :1], axis=1)
        cls = diffs[ok, 0]
    else:
        s = rng.integers(0, d, size)
        alice = rng.integers(0, d, (size, N))
        X = (s[:, None] - alice) % d
        bob = (alice + diffs) % d
        derived = (bob + X) % d
        ok = np.all(derived == derived[:, :1], axis=1)
        cls = (derived[ok, 0] - s[ok]) % d
    return np.bincount(cls, minlength=d)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def simulate_cad(F: float, D: Sequence[float], N: int, trials: int, variant: str = "CAD2",
                 seed: int = 0, workers: int | None = None) -> SimReport:
    """Monte Carlo of CAD on i.i.d. difference symbols drawn from (F, D).

    Trials are cut into fixed chunks of ``CHUNK_SIZE``; chunk k draws from a
    generator seeded by (seed, k), so the report does not depend on
    ``workers`` or scheduling.
    """
    if variant not in ("CAD1", "CAD2"):
        raise ValidationError(f"unknown CAD variant {variant!r}")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if N < 1:
        raise ValidationError(f"block size N={N} must be >= 1")
    probs = np.concatenate(([F], np.asarray(D, dtype=float)))
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise ValidationError("F and D must form a probability vector")
    probs = probs / probs.sum()
    n_chunks = -(-trials // CHUNK_SIZE)
    sizes = [min(CHUNK_SIZE, trials - k * CHUNK_SIZE) for k in range(n_chunks)]
    workers = default_workers() if workers is None else max(1, workers)

    def run(k):
        return _simulate_chunk(probs, N, sizes[k], variant, seed, k)

    if workers == 1:
        parts = [run(k) for k in range(n_chunks)]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, range(n_chunks)))
    counts = np.sum(parts, axis=0)
    return SimReport(variant=variant, d=probs.size, N=N, trials=trials, accepted=int(counts.sum()),
                     error_counts=tuple(int(c) for c in counts), seed=seed)
