"""Security predicates, the attack that matches them, and critical error rates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import bisect, minimize_scalar
from scipy.special import log_expit

from .cad import _log_odds
from .entropy import binary_entropy_array
from .errors import UnsupportedCombination, ValidationError
from .eve import EveEnsembleD, EveEnsembleQubit, qubit_ensemble, qudit_ensemble
from .keyrate import holevo_post_cad_d, rate_post_cad_qubit
from .states import (
    bb84_attack_state,
    is_entangled,
    protocol_channel_d,
    sixstate_attack_state,
    two_bases_y_range,
)

PROTOCOLS = ("bb84", "sixstate", "two-bases", "d-plus-1-bases")
MODES = ("two-way", "one-way-N1")


@dataclass(frozen=True)
class SecurityVerdict:
    secure: bool
    margin: float

    def to_dict(self) -> dict:
        return {"secure": self.secure, "margin": self.margin}


def _verdict(margin: float) -> SecurityVerdict:
    return SecurityVerdict(secure=bool(margin > 0), margin=float(margin))


def qubit_security(ens: EveEnsembleQubit) -> SecurityVerdict:
    """Lambda_eq^2 > eps/(1-eps): Eve's agree-states separate slower than Bob's errors vanish."""
    if ens.eps >= 1.0:
        return _verdict(-math.inf)
    return _verdict(ens.lambda_eq**2 - ens.eps / (1.0 - ens.eps))


def qudit_security(ens: EveEnsembleD) -> SecurityVerdict:
    if ens.F <= 0:
        raise ValidationError("qudit security needs F > 0")
    overlap2 = float(np.max(np.abs(ens.overlap(0)[1:]) ** 2))
    return _verdict(overlap2 - float(np.max(ens.D)) / ens.F)


@dataclass(frozen=True)
class AttackReport:
    """Per-N outcome of the measure-after-CAD attack on a qubit ensemble.

    ``eps_B`` is Bob's error after CAD, ``eps_eq`` Eve's Helstrom error on the
    agree states, ``oneway_rate`` = h(eps_eq) - h(eps_B) the one-way key rate
    left once Eve equalises her two error branches.
    """

    Ns: np.ndarray
    eps_B: np.ndarray
    eps_eq: np.ndarray
    oneway_rate: np.ndarray
    verdict: str

    @property
    def records(self) -> list[tuple[int, float, float, float]]:
        return [(int(n), float(b), float(e), float(r))
                for n, b, e, r in zip(self.Ns, self.eps_B, self.eps_eq, self.oneway_rate)]

    def to_dict(self) -> dict:
        first_safe = np.flatnonzero(self.eps_eq > self.eps_B)
        return {
            "verdict": self.verdict,
            "N_min": int(self.Ns[0]),
            "N_max": int(self.Ns[-1]),
            "first_N_with_eve_error_above_bob": int(self.Ns[first_safe[0]]) if first_safe.size else None,
        }


def attack_oneway_check(ens: EveEnsembleQubit, N_range: Iterable[int] | tuple[int, int]) -> AttackReport:
    """Broken iff eps_eq <= eps_B for every N (compared in log space)."""
    if isinstance(N_range, tuple) and len(N_range) == 2:
        Ns = np.arange(N_range[0], N_range[1] + 1)
    else:
        Ns = np.asarray(list(N_range), dtype=int)
    Nf = Ns.astype(float)
    log_b = log_expit(Nf * _log_odds(ens.eps))
    c = ens.lambda_eq
    with np.errstate(divide="ignore"):
        log_a = 2 * Nf * math.log(c) if 0 < c < 1 else np.full_like(Nf, 0.0 if c >= 1 else -np.inf)
    a = np.exp(log_a)
    log_eq = log_a - np.log(2.0 * (1.0 + np.sqrt(np.clip(1.0 - a, 0.0, None))))
    eps_b, eps_eq = np.exp(log_b), np.exp(log_eq)
    rate = binary_entropy_array(eps_eq) - binary_entropy_array(eps_b)
    broken = bool(np.all(log_eq <= log_b))
    return AttackReport(Ns, eps_b, eps_eq, rate, "broken" if broken else "undecided")


def bb84_worst_attack(Q: float) -> tuple[float, float]:
    """x in [0, Q] minimising the security margin of the BB84 family; ties go to smaller x."""
    def margin(x):
        return qubit_security(qubit_ensemble(bb84_attack_state(Q, min(max(x, 0.0), Q)))).margin

    return _bounded_argmin(margin, 0.0, Q)


def two_bases_worst_attack(d: int, F: float) -> tuple[float, float]:
    lo, hi = two_bases_y_range(d, F)

    def margin(y):
        ch = protocol_channel_d("two-bases", d, F, min(max(y, lo), hi))
        return qudit_security(qudit_ensemble(ch)).margin

    return _bounded_argmin(margin, lo, hi)


def _bounded_argmin(f: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    candidates = [(f(lo), lo)]
    if hi > lo:
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        candidates += [(float(res.fun), float(res.x)), (f(hi), hi)]
    best = min(candidates, key=lambda c: (c[0], c[1]))
    # prefer the smallest x whose value ties the best within roundoff
    tied = [c for c in candidates if c[0] <= best[0] + 1e-14]
    val, x = min(tied, key=lambda c: c[1])
    return x, val


def _first_root(f: Callable[[float], float], lo: float, hi: float, grid: int = 64) -> float:
    """Bisect the first sign change of f (positive at lo) on a scan of [lo, hi].

    A margin of exactly zero counts as the insecure side.
    """
    def signed(t):
        val = f(t)
        return val if val > 0 else min(val, -1e-300)

    xs = np.linspace(lo, hi, grid + 1)
    if signed(xs[0]) < 0:
        raise ValidationError("predicate is not satisfied at the noiseless end")
    for a, b in zip(xs, xs[1:]):
        if signed(b) < 0:
            return float(bisect(signed, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200))
    raise ValidationError("no sign change found in the scanned range")


def _resolve(protocol: str, d: int | None) -> int:
    if protocol not in PROTOCOLS:
        raise UnsupportedCombination(f"unknown protocol {protocol!r}")
    if protocol in ("bb84", "sixstate"):
        if d not in (None, 2):
            raise UnsupportedCombination(f"{protocol} is a qubit protocol; d={d} not allowed")
        return 2
    if d is None or d < 2:
        raise UnsupportedCombination(f"{protocol} needs a dimension d >= 2")
    return int(d)


def critical_function(protocol: str, mode: str, d: int | None = None) -> tuple[Callable[[float], float], float]:
    """Signed predicate of the error rate (positive = key possible) and the scan upper limit."""
    d = _resolve(protocol, d)
    if mode == "two-way":
        if protocol == "sixstate":
            return (lambda Q: qubit_security(qubit_ensemble(sixstate_attack_state(Q))).margin), 1.0 / 3.0
        if protocol == "bb84":
            return (lambda Q: bb84_worst_attack(Q)[1]), 0.25
        if protocol == "d-plus-1-bases":
            def f(D):
                return qudit_security(qudit_ensemble(protocol_channel_d("d-plus-1-bases", d, 1.0 - D))).margin
            return f, (d - 1) / d
        return (lambda D: two_bases_worst_attack(d, 1.0 - D)[1]), (d - 1) / d
    if mode == "one-way-N1":
        if protocol == "bb84":
            return (lambda Q: rate_post_cad_qubit(qubit_ensemble(bb84_attack_state(Q, Q * Q)), 1).rate), 0.5
        if protocol == "sixstate":
            return (lambda Q: rate_post_cad_qubit(qubit_ensemble(sixstate_attack_state(Q)), 1).rate), 2.0 / 3.0
        if protocol == "d-plus-1-bases":
            def g(D):
                ch = protocol_channel_d("d-plus-1-bases", d, 1.0 - D)
                return holevo_post_cad_d(qudit_ensemble(ch), 1).rate
            return g, (d - 1) / d

        def g2(D):
            # 1 -> 1+1 cloner: y = (1 - F)/(d - 1)
            ch = protocol_channel_d("two-bases", d, 1.0 - D, D / (d - 1))
            return holevo_post_cad_d(qudit_ensemble(ch), 1).rate
        return g2, (d - 1) / d
    raise UnsupportedCombination(f"unknown mode {mode!r}")


def critical_rate(protocol: str, mode: str = "two-way", d: int | None = None) -> float:
    """Largest error rate (QBER for qubits, total disturbance D for qudits) still admitting a key."""
    f, hi = critical_function(protocol, mode, d)
    return _first_root(f, 0.0, hi)


def entanglement_limit(protocol: str) -> float:
    """Error rate where the attack state of a qubit protocol becomes separable."""
    if protocol == "bb84":
        def ent(Q):
            return 1.0 if is_entangled(bb84_attack_state(Q, 0.0)) else -1.0
        hi = 0.5
    elif protocol == "sixstate":
        def ent(Q):
            return 1.0 if is_entangled(sixstate_attack_state(Q)) else -1.0
        hi = 2.0 / 3.0
    else:
        raise UnsupportedCombination(f"entanglement limit only for qubit protocols, got {protocol!r}")
    return float(bisect(ent, 0.0, hi, xtol=1e-15, maxiter=200))


def closed_form_bound(kind: str, d: int) -> float:
    """Critical total disturbance of the symmetric (d+1)-bases / two-bases attacks."""
    if d < 2:
        raise ValidationError(f"d={d} must be >= 2")
    if kind == "d-plus-1-bases":
        return (d - 1) * (2 * d + 1 - math.sqrt(5)) / (2 * (d * d + d - 1))
    if kind == "two-bases":
        return (d - 1) * (4 * d - 1 - math.sqrt(4 * d + 1)) / (2 * d * (4 * d - 3))
    raise UnsupportedCombination(f"no closed form for {kind!r}")


def srm_attack_success_symmetric(d: int, t, N: int):
    """Eve's SRM success on N copies when every agree-state overlap equals t."""
    tn = np.power(np.asarray(t, dtype=float), N)
    out = (np.sqrt(1 + (d - 1) * tn) + (d - 1) * np.sqrt(np.clip(1 - tn, 0.0, None))) ** 2 / d**2
    return out if out.ndim else float(out)


def tightness_slack(d: int, t, N: int):
    """Eve's success minus Bob's post-CAD fidelity at the security boundary t^2 = D/((d-1)F)."""
    t = np.asarray(t, dtype=float)
    return srm_attack_success_symmetric(d, t, N) - 1.0 / (1.0 + (d - 1) * t ** (2 * N))


def tightness_check(d: int, t_grid, N_range: tuple[int, int] | Iterable[int], tol: float = 1e-12) -> bool:
    """True iff the attack beats Bob on the whole grid and every N reduces to N=1 via t -> t^N."""
    t = np.asarray(t_grid, dtype=float)
    Ns = range(N_range[0], N_range[1] + 1) if isinstance(N_range, tuple) else N_range
    for N in Ns:
        slack = tightness_slack(d, t, N)
        if np.any(slack < -tol):
            return False
        if np.any(np.abs(slack - tightness_slack(d, t**N, 1)) > tol):
            return False
    return True
