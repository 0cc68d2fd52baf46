"""Linear Bell expressions over the 2x2x2x2 correlation tensor, and a setting search.

The local bound of an expression is found by brute force over the 256
deterministic strategies (each of four parties fixes a +1/-1 result for each
of its two settings); by convexity no local model can exceed it.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigurationError, DomainError
from .lhv import BASIS_VECTORS, SettingChoices, expand_in_basis, lhv_l1
from .measurement import StateLike, correlation_table

log = logging.getLogger(__name__)

N_STRATEGIES = 256


@dataclass(frozen=True, eq=False)
class BellExpression:
    """Weights ``w[p, q, r, s]``; the expression's value on a tensor is ``sum(w * t)``."""

    weights: np.ndarray

    def __post_init__(self):
        arr = np.array(self.weights, dtype=float)
        if arr.shape != (2, 2, 2, 2):
            raise DomainError(f"expected 2x2x2x2 weights, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("non-finite weight")
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)

    @classmethod
    def zero(cls) -> "BellExpression":
        return cls(np.zeros((2, 2, 2, 2)))

    def value(self, t) -> float:
        return float(np.sum(self.weights * np.asarray(t, dtype=float)))

    def to_json(self) -> list:
        return self.weights.tolist()


@dataclass(frozen=True)
class DeterministicStrategy:
    """Strategy number ``index`` in 0..255.

    Bit ``2*x + setting`` (x = party index a, a', b, b') set means the result
    for that party and setting is -1.
    """

    index: int

    def __post_init__(self):
        if not 0 <= self.index < N_STRATEGIES:
            raise DomainError(f"strategy index must be in [0, 256), got {self.index}")

    @property
    def results(self) -> np.ndarray:
        bits = [(self.index >> b) & 1 for b in range(8)]
        return np.array([1 - 2 * b for b in bits], dtype=float).reshape(4, 2)

    def tensor(self) -> np.ndarray:
        r = self.results
        return np.einsum("p,q,r,s->pqrs", r[0], r[1], r[2], r[3])


def all_strategies() -> list[DeterministicStrategy]:
    return [DeterministicStrategy(i) for i in range(N_STRATEGIES)]


@lru_cache(maxsize=1)
def _strategy_tensors() -> np.ndarray:
    out = np.stack([s.tensor() for s in all_strategies()])
    out.setflags(write=False)
    return out


def strategy_tensors() -> np.ndarray:
    """All 256 strategy tensors stacked, shape (256, 2, 2, 2, 2)."""
    return _strategy_tensors()


def lhv_bound(e: BellExpression) -> float:
    values = np.einsum("ipqrs,pqrs->i", strategy_tensors(), e.weights)
    return float(np.max(np.abs(values)))


def quantum_value(e: BellExpression, t) -> float:
    return e.value(t)


def saturating_expression(t) -> BellExpression:
    """Expression whose value on ``t`` equals ``lhv_l1(t)`` while its local bound is 1.

    ``w = sum_klmn sign(c_klmn) vk (x) vl (x) vm (x) vn / 16``.
    """
    signs = np.sign(expand_in_basis(t))
    V = BASIS_VECTORS
    return BellExpression(np.einsum("klmn,kp,lq,mr,ns->pqrs", signs, V, V, V, V) / 16.0)


# --- setting optimization ---------------------------------------------------


@dataclass
class OptimizerConfig:
    """Grid step and simplex refinement parameters for :func:`optimize_settings`."""

    grid_step: float = np.pi / 4
    refine: bool = True
    restarts: int = 4
    perturbation: float = 0.3
    max_iter: int = 4000
    xatol: float = 1e-10
    fatol: float = 1e-13
    seed: int = 0

    def validate(self):
        if not (math.isfinite(self.grid_step) and self.grid_step > 0):
            raise ConfigurationError("grid_step must be a positive finite number")
        if round(2 * np.pi / self.grid_step) > 64:
            raise ConfigurationError("grid_step too fine; at most 64 points per phase")
        if self.restarts < 0 or self.max_iter < 1:
            raise ConfigurationError("restarts must be >= 0 and max_iter >= 1")
        if not (math.isfinite(self.perturbation) and self.perturbation >= 0):
            raise ConfigurationError("perturbation must be finite and non-negative")


@dataclass
class OptimizationResult:
    settings: SettingChoices
    value: float
    initial_value: float
    grid_value: float
    iterations: int
    evaluations: int
    history: list[float] = field(default_factory=list)

    @property
    def critical_visibility(self) -> float:
        return 1.0 if self.value <= 1.0 else 1.0 / self.value

    def __iter__(self):
        return iter((self.settings, self.value))

    def to_json(self) -> dict:
        return {
            "settings": self.settings.to_json(),
            "l1": self.value,
            "critical_visibility": self.critical_visibility,
            "initial_l1": self.initial_value,
            "grid_l1": self.grid_value,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
        }


def settings_l1(state: StateLike, sc: SettingChoices) -> float:
    """Objective: l1 norm of the basis coefficients of the quantum tensor at ``sc``."""
    t = correlation_table(state, [sc.phases[x] for x in range(4)])
    return lhv_l1(t)


def _pair_transform(n: int) -> tuple[np.ndarray, list[tuple[int, int]]]:
    # Maps a length-n axis of single-setting values to (basis index k, unordered pair)
    # holding 1/2 (t[i] + v^k_2 t[j]).
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    M = np.zeros((2, len(pairs), n))
    for col, (i, j) in enumerate(pairs):
        for k in range(2):
            M[k, col, i] += 0.5 * BASIS_VECTORS[k, 0]
            M[k, col, j] += 0.5 * BASIS_VECTORS[k, 1]
    return M, pairs


def grid_search(state: StateLike, step: float = np.pi / 4) -> tuple[SettingChoices, float]:
    """Exhaustive search over phase pairs drawn from multiples of ``step`` in [0, 2pi).

    Swapping a party's two settings does not change the l1 value, so only
    unordered pairs are visited. Ties go to the first pair in lexicographic order.
    """
    n = int(round(2 * np.pi / step))
    grid = np.arange(n) * step
    E = correlation_table(state, [grid] * 4)
    M, pairs = _pair_transform(n)
    P = len(pairs)
    best_value, best_idx = -np.inf, None
    for col_a in range(P):
        # party a fixed to one pair; transform the other three axes
        ca = np.einsum("xi,ijkl->xjkl", M[:, col_a, :], E)
        cb = np.einsum("yqj,xjkl->xyqkl", M, ca)
        cc = np.einsum("zrk,xyqkl->xyqzrl", M, cb)
        cd = np.einsum("wsl,xyqzrl->xyqzrws", M, cc)
        l1 = np.abs(cd).sum(axis=(0, 1, 3, 5))
        flat = int(np.argmax(l1))
        if l1.flat[flat] > best_value + 1e-13:
            best_value = float(l1.flat[flat])
            best_idx = (col_a,) + np.unravel_index(flat, l1.shape)
    phases = [[grid[i] for i in pairs[col]] for col in best_idx]
    return SettingChoices(phases), best_value


def optimize_settings(state: StateLike, initial: SettingChoices, config: OptimizerConfig | None = None) -> OptimizationResult:
    """Maximize the l1 criterion over the eight local phases.

    Coarse grid over multiples of ``config.grid_step``, then Nelder-Mead from the
    better of the grid optimum and ``initial``, plus ``config.restarts`` seeded
    random perturbations of the incumbent. The best value never decreases, and
    the result never falls below the value at ``initial``.
    """
    config = config or OptimizerConfig()
    config.validate()
    rng = np.random.default_rng(config.seed)
    evaluations = 0

    def objective(x):
        nonlocal evaluations
        evaluations += 1
        val = settings_l1(state, SettingChoices.from_flat(x))
        if not math.isfinite(val):
            raise ConfigurationError(f"non-finite objective at {x}")
        return val

    best_x = initial.flat()
    best = initial_value = objective(best_x)
    history = [best]

    grid_sc, grid_value = grid_search(state, config.grid_step)
    if not math.isfinite(grid_value):
        raise ConfigurationError("non-finite objective on grid")
    if grid_value > best:
        best, best_x = grid_value, grid_sc.flat()
    history.append(best)

    iterations = 0
    if config.refine:
        starts = [best_x]
        for _ in range(config.restarts):
            starts.append(best_x + rng.normal(scale=config.perturbation, size=8))
        for x0 in starts:
            res = minimize(
                lambda x: -objective(x),
                x0,
                method="Nelder-Mead",
                options={"maxiter": config.max_iter, "xatol": config.xatol, "fatol": config.fatol},
            )
            iterations += int(res.nit)
            if -res.fun > best:
                best, best_x = float(-res.fun), np.asarray(res.x, dtype=float)
            history.append(best)
    log.debug("optimizer: initial %.12g grid %.12g final %.12g", initial_value, grid_value, best)
    return OptimizationResult(
        settings=SettingChoices.from_flat(best_x).wrapped(),
        value=best,
        initial_value=initial_value,
        grid_value=grid_value,
        iterations=iterations,
        evaluations=evaluations,
        history=history,
    )
