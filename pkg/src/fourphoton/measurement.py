"""Elliptic-polarization analyzers, outcome probabilities and the four-party correlation.

Each beam x in (a, a', b, b') is measured in the basis
``|k, phi> = (|V> + k exp(-i phi) |H>) / sqrt2`` with result k = +1 or -1.
Outcome arrays use axis index 0 for +1 and 1 for -1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError, NormalizationError
from .fock import PostselectedState

SIGNS = (1, -1)
OUTCOMES = tuple(itertools.product(SIGNS, repeat=4))
PARTIES = ("a", "a'", "b", "b'")


@dataclass(frozen=True)
class PhaseSettings:
    """Analyzer phases in radians for beams a, a', b, b'."""

    phi_a: float
    phi_ap: float
    phi_b: float
    phi_bp: float

    def __post_init__(self):
        for name in ("phi_a", "phi_ap", "phi_b", "phi_bp"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, value)

    @classmethod
    def of(cls, phases: Sequence[float]) -> "PhaseSettings":
        if len(phases) != 4:
            raise DomainError(f"need 4 phases, got {len(phases)}")
        return cls(*phases)

    def as_array(self) -> np.ndarray:
        return np.array([self.phi_a, self.phi_ap, self.phi_b, self.phi_bp])

    def __iter__(self):
        return iter((self.phi_a, self.phi_ap, self.phi_b, self.phi_bp))


@dataclass(frozen=True)
class NoiseMixture:
    """``(1 - v) * I/16 + v * |psi><psi|``; kept as the pair (v, psi)."""

    visibility: float
    pure_state: PostselectedState

    def __post_init__(self):
        v = float(self.visibility)
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"visibility must lie in [0, 1], got {v}")
        object.__setattr__(self, "visibility", v)


StateLike = Union[PostselectedState, NoiseMixture]


def _settings(s) -> PhaseSettings:
    return s if isinstance(s, PhaseSettings) else PhaseSettings.of(s)


def _pure(state: StateLike) -> tuple[PostselectedState, float]:
    if isinstance(state, NoiseMixture):
        return state.pure_state, state.visibility
    return state, 1.0


def _check_outcome(o: Sequence[int]) -> tuple[int, int, int, int]:
    o = tuple(int(x) for x in o)
    if len(o) != 4 or any(x not in SIGNS for x in o):
        raise DomainError(f"outcome must be four values of +1/-1, got {o}")
    return o


def analyzer_ket(k: int, phi: float) -> np.ndarray:
    """Eigenvector components over (V, H)."""
    if k not in SIGNS:
        raise DomainError("k must be +1 or -1")
    return np.array([1.0, k * np.exp(-1j * phi)]) / math.sqrt(2)


def _bras(settings: PhaseSettings) -> list[np.ndarray]:
    # rows: outcome index (+1, -1); columns: (V, H); already conjugated
    return [np.array([analyzer_ket(k, phi) for k in SIGNS]).conj() for phi in settings]


def amplitudes(state: PostselectedState, s) -> np.ndarray:
    """All 16 projection amplitudes ``<k|<l|<m|<n|psi>`` as a (2, 2, 2, 2) array."""
    if not state.is_normalized():
        raise NormalizationError(f"state norm^2 = {state.norm_sq():.6g}, expected 1")
    ba, bap, bb, bbp = _bras(_settings(s))
    return np.einsum("ai,bj,ck,dl,ijkl->abcd", ba, bap, bb, bbp, state.amplitudes)


def amplitude(state: PostselectedState, o: Sequence[int], s) -> complex:
    k, l, m, n = _check_outcome(o)
    idx = tuple(SIGNS.index(x) for x in (k, l, m, n))
    return complex(amplitudes(state, s)[idx])


def probabilities(state: StateLike, s) -> np.ndarray:
    """Outcome distribution as a (2, 2, 2, 2) array (index 0 = +1)."""
    pure, v = _pure(state)
    p = np.abs(amplitudes(pure, s)) ** 2
    if v == 1.0:
        return p
    return (1.0 - v) / 16.0 + v * p


def probability(state: StateLike, o: Sequence[int], s) -> float:
    k, l, m, n = _check_outcome(o)
    idx = tuple(SIGNS.index(x) for x in (k, l, m, n))
    return float(probabilities(state, s)[idx])


_PARITY = np.einsum("a,b,c,d->abcd", *([np.array(SIGNS, dtype=float)] * 4))


def correlation(state: StateLike, s) -> float:
    """Mean of the product of the four local results, summed over all 16 outcomes."""
    return float(np.sum(_PARITY * probabilities(state, s)))


def marginal(state: StateLike, s, parties: Iterable[int] = (0, 1)) -> np.ndarray:
    """Joint outcome distribution of the listed parties (0=a, 1=a', 2=b, 3=b')."""
    keep = tuple(parties)
    drop = tuple(i for i in range(4) if i not in keep)
    return probabilities(state, s).sum(axis=drop)


# Closed forms for the double-pair state (see fock.four_photon_state).

def amplitude_closed_form(o: Sequence[int], s) -> complex:
    k, l, m, n = _check_outcome(o)
    pa, pap, pb, pbp = _settings(s)
    total = pa + pap + pb + pbp
    side_a = k * np.exp(1j * pa) + l * np.exp(1j * pap)
    side_b = m * np.exp(1j * pb) + n * np.exp(1j * pbp)
    return complex((1 + k * l * m * n * np.exp(1j * total) + 0.5 * side_a * side_b) / (4 * math.sqrt(3)))


def probability_closed_form(o: Sequence[int], s) -> float:
    """Closed-form outcome probability for the double-pair state.

    The interference term is ``Re((1 + klmn e^{-i sum}) * side_a * side_b)``; the
    conjugated phase factor is what ``|amplitude|^2`` actually produces.
    """
    k, l, m, n = _check_outcome(o)
    pa, pap, pb, pbp = _settings(s)
    total = pa + pap + pb + pbp
    klmn = k * l * m * n
    ghz = (2 / 3) * (1 + klmn * math.cos(total))
    epr = (1 / 3) * (1 + k * l * math.cos(pa - pap)) * (1 + m * n * math.cos(pb - pbp))
    side_a = k * np.exp(1j * pa) + l * np.exp(1j * pap)
    side_b = m * np.exp(1j * pb) + n * np.exp(1j * pbp)
    cross = (1 / 3) * np.real((1 + klmn * np.exp(-1j * total)) * side_a * side_b)
    return float((ghz + epr + cross) / 16)


def correlation_closed_form(s) -> float:
    """GHZ part plus the product of two EPR correlations."""
    pa, pap, pb, pbp = _settings(s)
    return (2 / 3) * math.cos(pa + pap + pb + pbp) + (1 / 3) * math.cos(pa - pap) * math.cos(pb - pbp)


def correlation_trig_expansion(s) -> float:
    """The same correlation written with single-phase sines and cosines."""
    pa, pap, pb, pbp = _settings(s)
    ca, cap, cb, cbp = (math.cos(x) for x in (pa, pap, pb, pbp))
    sa, sap, sb, sbp = (math.sin(x) for x in (pa, pap, pb, pbp))
    return (
        ca * cap * cb * cbp
        + sa * sap * sb * sbp
        - (sa * sap * cb * cbp + ca * cap * sb * sbp) / 3
        - 2 * (sa * cap * sb * cbp + ca * sap * cb * sbp + ca * sap * sb * cbp + sa * cap * cb * sbp) / 3
    )


def analyzer_observable(phi: np.ndarray) -> np.ndarray:
    """``sum_k k |k,phi><k,phi|`` over (V, H); vectorized over ``phi``.

    Off-diagonal only: ``<V|O|H> = e^{i phi}``.
    """
    phi = np.asarray(phi, dtype=float)
    out = np.zeros(phi.shape + (2, 2), dtype=complex)
    out[..., 0, 1] = np.exp(1j * phi)
    out[..., 1, 0] = np.exp(-1j * phi)
    return out


def correlation_table(state: StateLike, phases: Sequence[np.ndarray]) -> np.ndarray:
    """Correlation on the outer product of per-party phase lists.

    ``phases`` holds four 1-d arrays; the result has shape
    ``(len(phases[0]), ..., len(phases[3]))``. Evaluated as the expectation of
    the product observable, which is how the optimizer scans many settings.
    """
    pure, v = _pure(state)
    if not pure.is_normalized():
        raise NormalizationError(f"state norm^2 = {pure.norm_sq():.6g}, expected 1")
    obs = [analyzer_observable(p) for p in phases]
    psi = pure.amplitudes
    table = np.einsum("ijkl,aim,bjn,cko,dlp,mnop->abcd", psi.conj(), *obs, psi, optimize=True)
    return v * table.real
