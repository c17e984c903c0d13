"""Channel descriptions: qubit Bell-diagonal states and generalized Pauli channels.

Bell coefficients are ordered (Phi+, Phi-, Psi+, Psi-), i.e. identity, phase
flip, bit flip, both.  For a d-dimensional channel ``p[m, n]`` is the
probability of the flip-by-m, phase-by-n error, so the qubit coefficients
read ``(p[0,0], p[0,1], p[1,0], p[1,1])``.

Unitaries never appear as matrices; local basis changes act on the
coefficients as index permutations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AsymmetricState,
    InfeasibleFidelity,
    NegativeCoefficient,
    NotNormalized,
    OutOfRange,
    ValidationError,
)

NORMALIZATION_TOL = 1e-9
# constructors land on the separability boundary only up to roundoff
ENTANGLEMENT_TOL = 1e-12


def _validated_probabilities(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"{what}: non-finite entry")
    if np.any(values < 0):
        raise NegativeCoefficient(f"{what}: negative entry {values.min()!r}")
    total = math.fsum(values.ravel())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"{what}: entries sum to {total!r}, expected 1")
    return values if total == 1.0 else values / total


@dataclass(frozen=True)
class BellDiagonalState:
    lambdas: tuple[float, float, float, float]

    def __iter__(self):
        return iter(self.lambdas)

    def __getitem__(self, i: int) -> float:
        return self.lambdas[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.lambdas, dtype=float)

    def to_channel(self) -> "GeneralizedPauliChannel":
        l1, l2, l3, l4 = self.lambdas
        return GeneralizedPauliChannel.from_matrix([[l1, l2], [l3, l4]])


def make_bell_diagonal(lambdas: Sequence[float]) -> BellDiagonalState:
    """Validate four Bell coefficients; sums within 1e-9 of one are renormalized."""
    arr = np.asarray(lambdas, dtype=float)
    if arr.shape != (4,):
        raise ValidationError(f"expected 4 Bell coefficients, got shape {arr.shape}")
    arr = _validated_probabilities(arr, "lambdas")
    return BellDiagonalState(tuple(float(v) for v in arr))


@dataclass(frozen=True)
class BellPermutation:
    """Action of a local unitary on Bell indices (0-based).

    ``perm[i]`` is the position that input coefficient ``i`` moves to.
    """

    perm: tuple[int, int, int, int]

    def __post_init__(self):
        if sorted(self.perm) != [0, 1, 2, 3]:
            raise ValidationError(f"not a permutation of 0..3: {self.perm}")

    @classmethod
    def identity(cls) -> "BellPermutation":
        return cls((0, 1, 2, 3))

    def apply(self, state: BellDiagonalState) -> BellDiagonalState:
        out = [0.0] * 4
        for i, j in enumerate(self.perm):
            out[j] = state.lambdas[i]
        return BellDiagonalState(tuple(out))

    def inverse(self) -> "BellPermutation":
        inv = [0] * 4
        for i, j in enumerate(self.perm):
            inv[j] = i
        return BellPermutation(tuple(inv))

    def compose(self, other: "BellPermutation") -> "BellPermutation":
        """Permutation applying ``self`` first, then ``other``."""
        return BellPermutation(tuple(other.perm[j] for j in self.perm))


def canonicalize(state: BellDiagonalState) -> tuple[BellDiagonalState, BellPermutation]:
    """Reorder so lambda1 is the largest, lambda2 the smallest and lambda3 >= lambda4.

    Ties always go to the lowest original index, which makes the map
    idempotent.
    """
    lam = state.lambdas
    order = list(range(4))
    first = max(order, key=lambda i: (lam[i], -i))
    order.remove(first)
    second = min(order, key=lambda i: (lam[i], i))
    order.remove(second)
    rest = sorted(order, key=lambda i: (-lam[i], i))
    source = [first, second, *rest]
    perm = [0] * 4
    for target, src in enumerate(source):
        perm[src] = target
    p = BellPermutation(tuple(perm))
    return p.apply(state), p


def is_entangled(state: BellDiagonalState) -> bool:
    """PPT criterion for Bell-diagonal states: the largest weight exceeds 1/2."""
    return max(state.lambdas) > 0.5 + ENTANGLEMENT_TOL


def qber(state: BellDiagonalState) -> float:
    return state.lambdas[2] + state.lambdas[3]


def bb84_attack_state(Q: float, x: float) -> BellDiagonalState:
    """Eve's BB84 attack family (1-2Q+x, Q-x, Q-x, x), 0 <= x <= Q <= 1/2.

    x = 0 is the best attack against two-way reconciliation, x = Q**2 the
    phase-covariant cloner that is optimal for one-way reconciliation.
    """
    if not (0.0 <= Q <= 0.5):
        raise OutOfRange(f"Q={Q!r} outside [0, 1/2]")
    if not (0.0 <= x <= Q):
        raise OutOfRange(f"x={x!r} outside [0, Q={Q!r}]")
    return make_bell_diagonal([1.0 - 2.0 * Q + x, Q - x, Q - x, x])


def sixstate_attack_state(Q: float) -> BellDiagonalState:
    """Universal-cloner attack on the six-state protocol."""
    if not (0.0 <= Q <= 2.0 / 3.0):
        raise OutOfRange(f"Q={Q!r} outside [0, 2/3]")
    return make_bell_diagonal([1.0 - 1.5 * Q, Q / 2, Q / 2, Q / 2])


@dataclass(frozen=True, eq=False)
class GeneralizedPauliChannel:
    d: int
    p: np.ndarray

    @classmethod
    def from_matrix(cls, p) -> "GeneralizedPauliChannel":
        arr = np.array(p, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 2:
            raise ValidationError(f"p must be a square d x d matrix with d >= 2, got {arr.shape}")
        arr = _validated_probabilities(arr, "p")
        arr.setflags(write=False)
        return cls(arr.shape[0], arr)

    @classmethod
    def identity(cls, d: int) -> "GeneralizedPauliChannel":
        p = np.zeros((d, d))
        p[0, 0] = 1.0
        return cls.from_matrix(p)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.sqrt(self.p)

    def __eq__(self, other):
        if not isinstance(other, GeneralizedPauliChannel):
            return NotImplemented
        return self.d == other.d and np.array_equal(self.p, other.p)

    def __hash__(self):
        return hash((self.d, self.p.tobytes()))

    def to_bell_diagonal(self) -> BellDiagonalState:
        if self.d != 2:
            raise ValidationError("only d=2 channels are Bell-diagonal qubit states")
        return make_bell_diagonal(self.p.ravel())


def _symmetric_amplitudes(d: int, v: float, x: float, y: float) -> np.ndarray:
    c = np.full((d, d), y)
    c[0, :] = x
    c[:, 0] = x
    c[0, 0] = v
    return c


def two_bases_y_range(d: int, F: float) -> tuple[float, float]:
    """Feasible interval of the free amplitude y of the two-bases attack."""
    hi2 = (1.0 - F) / (d - 1) ** 2
    lo2 = max(0.0, (1.0 - 2.0 * F) / (d - 1) ** 2)
    if lo2 > hi2 + 1e-15:
        raise InfeasibleFidelity(f"no two-bases attack with d={d}, F={F!r}")
    return math.sqrt(lo2), math.sqrt(max(hi2, lo2))


def protocol_channel_d(kind: str, d: int, F: float, y: float | None = None) -> GeneralizedPauliChannel:
    """Symmetric attack channel of the two-bases or (d+1)-bases protocol at fidelity F.

    Amplitudes are v on (0,0), x on the rest of the first row and column and
    y elsewhere.  For ``two-bases`` the default ``y=0`` is the optimal attack
    against two-way reconciliation; ``y=(1-F)/(d-1)`` gives the 1->1+1 cloner.
    The (d+1)-bases protocol forces x = y and ignores ``y``.
    """
    if d < 2:
        raise ValidationError(f"d={d} must be >= 2")
    if not (1.0 / d - 1e-12 <= F <= 1.0):
        raise OutOfRange(f"F={F!r} outside [1/d, 1]")
    if kind == "d-plus-1-bases":
        v2 = ((d + 1) * F - 1.0) / d
        x2 = (1.0 - F) / (d * (d - 1))
        c = _symmetric_amplitudes(d, math.sqrt(max(v2, 0.0)), math.sqrt(x2), math.sqrt(x2))
    elif kind == "two-bases":
        y = 0.0 if y is None else float(y)
        if y < 0:
            raise OutOfRange(f"y={y!r} must be nonnegative")
        x2 = (1.0 - F) / (d - 1) - (d - 1) * y * y
        v2 = 2.0 * F - 1.0 + (d - 1) ** 2 * y * y
        if x2 < -1e-12 or v2 < -1e-12:
            raise InfeasibleFidelity(f"two-bases attack infeasible at d={d}, F={F!r}, y={y!r}")
        c = _symmetric_amplitudes(d, math.sqrt(max(v2, 0.0)), math.sqrt(max(x2, 0.0)), y)
    else:
        raise ValidationError(f"unknown protocol kind {kind!r}")
    return GeneralizedPauliChannel.from_matrix(c * c)


def fidelity_disturbances(ch: GeneralizedPauliChannel) -> tuple[float, np.ndarray]:
    """F = P(Bob's symbol equals Alice's), D[j-1] = P(Bob's differs by j)."""
    rows = ch.p.sum(axis=1)
    return float(rows[0]), rows[1:].copy()


@dataclass(frozen=True)
class CloningReport:
    eta_xz_B: float
    eta_xz_E: float
    eta_y_B: float
    eta_y_E: float


def cloning_report(state: BellDiagonalState) -> CloningReport:
    """Shrinking factors of the phase-covariant cloner behind a lambda2 = lambda3 state."""
    l1, l2, l3, l4 = state.lambdas
    if abs(l2 - l3) > NORMALIZATION_TOL:
        raise AsymmetricState(f"lambda2={l2!r} != lambda3={l3!r}")
    lam = l2
    return CloningReport(
        eta_xz_B=l1 - l4,
        eta_xz_E=2.0 * math.sqrt(lam) * (math.sqrt(l1) + math.sqrt(l4)),
        eta_y_B=1.0 - 4.0 * lam + 4.0 * l4,
        eta_y_E=2.0 * (lam + math.sqrt(max(l4 * (1.0 - 2.0 * lam - l4), 0.0))),
    )
