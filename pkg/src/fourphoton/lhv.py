"""Correlation tensors and the l1 local-realism criterion for two settings per party.

A local deterministic strategy gives each party a vector of its two
predetermined results, one of

    v1 = (1, 1),  v2 = (1, -1),  v3 = -v1,  v4 = -v2.

Any local hidden variable tensor is a convex mixture of ``vk (x) vl (x) vm (x) vn``.
Expanding a tensor in the orthogonal product basis built from v1 and v2 gives
coefficients ``c``; a local model exists iff ``sum |c| <= 1``.

Indices in this module are 0-based: strategy ``j`` here is ``v^{j+1}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NoLhvModelError
from .measurement import PhaseSettings, StateLike, correlation

STRATEGY_VECTORS = np.array([[1, 1], [1, -1], [-1, -1], [-1, 1]], dtype=float)
BASIS_VECTORS = STRATEGY_VECTORS[:2]
BASIS_NORM_SQ = 16.0
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SettingChoices:
    """Two candidate phases per party; row order a, a', b, b'."""

    phases: np.ndarray

    def __post_init__(self):
        arr = np.array(self.phases, dtype=float)
        if arr.shape != (4, 2):
            raise DomainError(f"expected 4 parties x 2 settings, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("non-finite phase")
        arr.setflags(write=False)
        object.__setattr__(self, "phases", arr)

    @classmethod
    def from_flat(cls, values) -> "SettingChoices":
        """From ``(a1, a2, a'1, a'2, b1, b2, b'1, b'2)``."""
        return cls(np.asarray(values, dtype=float).reshape(4, 2))

    def flat(self) -> np.ndarray:
        return self.phases.ravel().copy()

    def settings(self, p: int, q: int, r: int, s: int) -> PhaseSettings:
        ph = self.phases
        return PhaseSettings(ph[0, p], ph[1, q], ph[2, r], ph[3, s])

    def wrapped(self) -> "SettingChoices":
        return SettingChoices(np.mod(self.phases, 2 * np.pi))

    def to_json(self) -> dict[str, list[float]]:
        return {party: list(map(float, row)) for party, row in zip(("a", "a'", "b", "b'"), self.phases)}


PAPER_SETTINGS = SettingChoices(
    [[0.0, np.pi / 2], [-np.pi / 4, np.pi / 4], [-np.pi / 4, np.pi / 4], [-np.pi / 4, np.pi / 4]]
)

PAPER_L1 = 8 / (3 * math.sqrt(2))
PAPER_CRITICAL_VISIBILITY = 3 * math.sqrt(2) / 8


def quantum_tensor(state: StateLike, sc: SettingChoices) -> np.ndarray:
    """Entry (p, q, r, s) is the correlation at the (p, q, r, s)-th setting combination."""
    t = np.empty((2, 2, 2, 2))
    for idx in itertools.product(range(2), repeat=4):
        t[idx] = correlation(state, sc.settings(*idx))
    return t


def _as_tensor(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.shape != (2, 2, 2, 2):
        raise DomainError(f"expected a 2x2x2x2 tensor, got shape {t.shape}")
    return t


def expand_in_basis(t) -> np.ndarray:
    """Coefficients ``c[k,l,m,n]`` of ``t`` in the basis ``vk (x) vl (x) vm (x) vn``, k..n in {v1, v2}."""
    V = BASIS_VECTORS
    return np.einsum("kp,lq,mr,ns,pqrs->klmn", V, V, V, V, _as_tensor(t)) / BASIS_NORM_SQ


def reconstruct_tensor(c) -> np.ndarray:
    V = BASIS_VECTORS
    return np.einsum("kp,lq,mr,ns,klmn->pqrs", V, V, V, V, _as_tensor(c))


def lhv_l1(t) -> float:
    return float(np.sum(np.abs(expand_in_basis(t))))


def admits_lhv(t, tol: float = BOUNDARY_TOL) -> bool:
    return lhv_l1(t) <= 1.0 + tol


def critical_visibility(t) -> float:
    """Largest v in [0, 1] for which ``v * t`` admits a local model."""
    l1 = lhv_l1(t)
    if l1 <= 1.0:
        return 1.0
    return 1.0 / l1


def strategy_tensor(k: int, l: int, m: int, n: int) -> np.ndarray:
    """Tensor of the deterministic strategy ``(vk, vl, vm, vn)``, 0-based indices in 0..3."""
    S = STRATEGY_VECTORS
    return np.einsum("p,q,r,s->pqrs", S[k], S[l], S[m], S[n])


@dataclass(frozen=True, eq=False)
class LhvModel:
    """Hidden probabilities ``p[k, l, m, n]`` over the 4^4 local strategies."""

    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.p, dtype=float)
        if arr.shape != (4, 4, 4, 4):
            raise DomainError(f"expected shape (4, 4, 4, 4), got {arr.shape}")
        if np.any(arr < -BOUNDARY_TOL) or abs(arr.sum() - 1.0) > 1e-12:
            raise DomainError("hidden probabilities must be non-negative and sum to 1")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    def tensor(self) -> np.ndarray:
        """Mixture of the strategy tensors weighted by ``p``."""
        S = STRATEGY_VECTORS
        return np.einsum("klmn,kp,lq,mr,ns->pqrs", self.p, S, S, S, S)

    def coefficients(self) -> np.ndarray:
        """Basis coefficients by inclusion-exclusion over the sign-flipped strategies.

        ``c[k,l,m,n] = p[k,l,m,n] - p[k+2,l,m,n] - ... + p[k+2,l+2,m+2,n+2]``.
        """
        c = np.zeros((2, 2, 2, 2))
        for shift in itertools.product((0, 2), repeat=4):
            sign = (-1) ** sum(1 for x in shift if x)
            c += sign * self.p[shift[0]:shift[0] + 2, shift[1]:shift[1] + 2,
                               shift[2]:shift[2] + 2, shift[3]:shift[3] + 2]
        return c

    def support(self) -> dict[tuple[int, int, int, int], float]:
        """Non-zero entries keyed by 1-based strategy labels."""
        return {tuple(int(i) + 1 for i in idx): float(self.p[idx]) for idx in zip(*np.nonzero(self.p))}


def reconstruct_lhv(c, tol: float = BOUNDARY_TOL) -> LhvModel:
    """Explicit hidden-variable model reproducing coefficients ``c``.

    Positive ``c[k,l,m,n]`` goes to strategy (k, l, m, n), negative to (k+2, l, m, n).
    The slack ``1 - sum|c|`` is split between strategies (1,1,1,1) and (3,1,1,1),
    whose tensors cancel.

    Raises:
        NoLhvModelError: if ``sum |c| > 1 + tol``.
    """
    c = _as_tensor(c)
    l1 = float(np.sum(np.abs(c)))
    if l1 > 1.0 + tol:
        raise NoLhvModelError(l1)
    p = np.zeros((4, 4, 4, 4))
    for idx in itertools.product(range(2), repeat=4):
        value = c[idx]
        if value >= 0:
            p[idx] += value
        else:
            p[(idx[0] + 2,) + idx[1:]] += -value
    slack = max(0.0, 1.0 - l1)
    p[0, 0, 0, 0] += slack / 2
    p[2, 0, 0, 0] += slack / 2
    # absorb rounding in the boundary band
    p /= p.sum()
    return LhvModel(p)


def tensor_report(t, sc: SettingChoices | None = None) -> dict:
    """Plain-data summary used by the CLI and JSON dumps."""
    t = _as_tensor(t)
    l1 = lhv_l1(t)
    return {
        "settings": sc.to_json() if sc is not None else None,
        "tensor": t.tolist(),
        "coefficients": expand_in_basis(t).tolist(),
        "l1": l1,
        "critical_visibility": critical_visibility(t),
        "verdict": "LHV-OK" if l1 <= 1.0 + BOUNDARY_TOL else "NO-LHV",
    }
