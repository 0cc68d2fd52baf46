"""Sparse polynomial algebra of bosonic creation operators.

A state is written as a polynomial in creation operators acting on the vacuum.
Coefficients are stored exactly as they appear in that polynomial; the
occupation-number amplitude of a monomial carries an extra factor
``sqrt(prod n_mode!)`` (see :meth:`CreationPolynomial.fock_amplitudes`).

Pipeline for the double-pair emission::

    p = pdc_term(2)                     # (a_V b_H + a_H b_V)^2 term
    p = beam_split(p)                   # a -> (a + a')/sqrt2, b -> (b + b')/sqrt2
    p = postselect_coincidence(p)       # one photon in each of a, a', b, b'
    p = rotate_polarization(p, {A, A_PRIME})
    psi = to_state(p)                   # normalized 16-amplitude state
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import IntEnum
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, NormalizationError, SizeLimitError

PRUNE_TOL = 1e-15
DEFAULT_MAX_ORDER = 6


class Spatial(IntEnum):
    A = 0
    A_PRIME = 1
    B = 2
    B_PRIME = 3

    @property
    def label(self) -> str:
        return ("a", "a'", "b", "b'")[self]

    @property
    def is_primed(self) -> bool:
        return self in (Spatial.A_PRIME, Spatial.B_PRIME)

    @classmethod
    def from_label(cls, label: str) -> "Spatial":
        labels = {"a": cls.A, "a'": cls.A_PRIME, "b": cls.B, "b'": cls.B_PRIME}
        try:
            return labels[label]
        except KeyError:
            raise ValueError(f"unknown spatial mode {label!r}") from None


class Pol(IntEnum):
    H = 0
    V = 1


@dataclass(frozen=True, order=True)
class Mode:
    """One of the eight creation operators; orders spatial-major, H before V."""

    spatial: Spatial
    pol: Pol

    def __str__(self):
        return f"{self.spatial.label}_{self.pol.name}"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        spatial, _, pol = text.partition("_")
        return cls(Spatial.from_label(spatial), Pol[pol])


MODES = tuple(Mode(s, p) for s in Spatial for p in Pol)


def mode(label: str) -> Mode:
    """Shorthand constructor, e.g. ``mode("a'_H")``."""
    return Mode.parse(label)


@dataclass(frozen=True)
class Monomial:
    """Product of creation operators, stored as sorted ``(mode, power)`` pairs."""

    powers: tuple[tuple[Mode, int], ...] = ()

    @classmethod
    def of(cls, occupation: Mapping[Mode, int] | Iterable[Mode] = ()) -> "Monomial":
        if isinstance(occupation, Mapping):
            items = occupation.items()
        else:
            counts: dict[Mode, int] = {}
            for m in occupation:
                counts[m] = counts.get(m, 0) + 1
            items = counts.items()
        for m, n in items:
            if n < 0:
                raise DomainError(f"negative power {n} for {m}")
        return cls(tuple(sorted((m, int(n)) for m, n in items if n)))

    @classmethod
    def parse(cls, text: str) -> "Monomial":
        """Inverse of ``str``: ``"a_H^2 b'_V"``; ``"1"`` is the empty monomial."""
        text = text.strip()
        if text in ("", "1"):
            return cls()
        occ: dict[Mode, int] = {}
        for factor in text.split():
            name, _, power = factor.partition("^")
            m = Mode.parse(name)
            occ[m] = occ.get(m, 0) + (int(power) if power else 1)
        return cls.of(occ)

    def __str__(self):
        if not self.powers:
            return "1"
        return " ".join(str(m) if n == 1 else f"{m}^{n}" for m, n in self.powers)

    def __mul__(self, other: "Monomial") -> "Monomial":
        occ = dict(self.powers)
        for m, n in other.powers:
            occ[m] = occ.get(m, 0) + n
        return Monomial.of(occ)

    def power(self, m: Mode) -> int:
        return dict(self.powers).get(m, 0)

    @property
    def photon_number(self) -> int:
        return sum(n for _, n in self.powers)

    def spatial_occupation(self, spatial: Spatial) -> int:
        return sum(n for m, n in self.powers if m.spatial == spatial)

    @property
    def bosonic_weight(self) -> float:
        """``prod n!``; the squared norm of the monomial acting on vacuum."""
        return float(math.prod(math.factorial(n) for _, n in self.powers))

    def is_single_occupancy(self) -> bool:
        return all(self.spatial_occupation(s) == 1 for s in Spatial)

    def pattern(self) -> str:
        """Polarization string ordered a, a', b, b' (single-occupancy only)."""
        if not self.is_single_occupancy():
            raise DomainError(f"monomial {self} is not one photon per spatial mode")
        by_spatial = {m.spatial: m.pol.name for m, _ in self.powers}
        return "".join(by_spatial[s] for s in Spatial)


class CreationPolynomial:
    """Immutable sparse polynomial ``{Monomial: complex}`` in creation operators."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, complex] | None = None):
        clean: dict[Monomial, complex] = {}
        for mono, coeff in (terms or {}).items():
            coeff = complex(coeff)
            if not (math.isfinite(coeff.real) and math.isfinite(coeff.imag)):
                raise DomainError(f"non-finite coefficient for {mono}")
            if abs(coeff) >= PRUNE_TOL:
                clean[mono] = coeff
        self._terms = clean

    @classmethod
    def constant(cls, value: complex = 1.0) -> "CreationPolynomial":
        return cls({Monomial(): value})

    @classmethod
    def operator(cls, m: Mode, coeff: complex = 1.0) -> "CreationPolynomial":
        return cls({Monomial.of({m: 1}): coeff})

    @classmethod
    def from_strings(cls, terms: Mapping[str, complex]) -> "CreationPolynomial":
        return cls({Monomial.parse(k): v for k, v in terms.items()})

    @property
    def terms(self) -> Mapping[Monomial, complex]:
        return MappingProxyType(self._terms)

    def coefficient(self, mono: Monomial | str) -> complex:
        if isinstance(mono, str):
            mono = Monomial.parse(mono)
        return self._terms.get(mono, 0j)

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(sorted(self._terms, key=lambda mono: mono.powers))

    def __bool__(self):
        return bool(self._terms)

    def __repr__(self):
        body = ", ".join(f"{mono}: {self._terms[mono]:.6g}" for mono in self)
        return f"CreationPolynomial({{{body}}})"

    def _combine(self, other: "CreationPolynomial", sign: int) -> "CreationPolynomial":
        out = dict(self._terms)
        for mono, c in other._terms.items():
            out[mono] = out.get(mono, 0j) + sign * c
        return CreationPolynomial(out)

    def __add__(self, other):
        if not isinstance(other, CreationPolynomial):
            other = CreationPolynomial.constant(other)
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, CreationPolynomial):
            other = CreationPolynomial.constant(other)
        return self._combine(other, -1)

    def __neg__(self):
        return CreationPolynomial({m: -c for m, c in self._terms.items()})

    def __mul__(self, other):
        if not isinstance(other, CreationPolynomial):
            return CreationPolynomial({m: c * other for m, c in self._terms.items()})
        out: dict[Monomial, complex] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 * m2
                out[m] = out.get(m, 0j) + c1 * c2
        return CreationPolynomial(out)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __pow__(self, n: int) -> "CreationPolynomial":
        if n < 0:
            raise DomainError("negative power")
        result = CreationPolynomial.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def isclose(self, other: "CreationPolynomial", tol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coefficient(k) - other.coefficient(k)) <= tol for k in keys)

    def modes(self) -> set[Mode]:
        return {m for mono in self._terms for m, _ in mono.powers}

    def substitute(self, mapping: Mapping[Mode, "CreationPolynomial"]) -> "CreationPolynomial":
        """Replace creation operators by polynomials; unmapped modes are kept."""
        power_cache: dict[tuple[Mode, int], CreationPolynomial] = {}

        def image(m: Mode, n: int) -> CreationPolynomial:
            if (m, n) not in power_cache:
                base = mapping.get(m, CreationPolynomial.operator(m))
                power_cache[(m, n)] = base ** n
            return power_cache[(m, n)]

        out = CreationPolynomial()
        for mono, coeff in self._terms.items():
            term = CreationPolynomial.constant(coeff)
            for m, n in mono.powers:
                term = term * image(m, n)
            out = out + term
        return out

    def fock_amplitudes(self) -> dict[Monomial, complex]:
        """Occupation-basis amplitudes: coefficient times ``sqrt(prod n!)``."""
        return {m: c * math.sqrt(m.bosonic_weight) for m, c in self._terms.items()}

    def norm_sq(self) -> float:
        """Squared norm of the (unnormalized) Fock state this polynomial creates."""
        return float(sum(abs(c) ** 2 * m.bosonic_weight for m, c in self._terms.items()))

    def to_json(self) -> dict[str, list[float]]:
        return {str(m): [self._terms[m].real, self._terms[m].imag] for m in self}

    @classmethod
    def from_json(cls, data: Mapping[str, list[float]]) -> "CreationPolynomial":
        return cls({Monomial.parse(k): complex(v[0], v[1]) for k, v in data.items()})


def pdc_term(n: int, alpha: complex = 1.0, max_order: int = DEFAULT_MAX_ORDER) -> CreationPolynomial:
    """n-th order term of ``exp(-i alpha (a_V b_H + a_H b_V))`` applied to vacuum.

    Returns ``(-i alpha)^n / n! * (a_V b_H + a_H b_V)^n`` expanded into
    monomials. With ``alpha = 1j*sqrt(2)`` the ``n=2`` prefactor is exactly 1.
    """
    if n < 0:
        raise DomainError("emission order must be non-negative")
    if n > max_order:
        raise SizeLimitError(f"emission order {n} exceeds configured maximum {max_order}")
    a_v, a_h = CreationPolynomial.operator(mode("a_V")), CreationPolynomial.operator(mode("a_H"))
    b_v, b_h = CreationPolynomial.operator(mode("b_V")), CreationPolynomial.operator(mode("b_H"))
    pair = a_v * b_h + a_h * b_v
    prefactor = (-1j * complex(alpha)) ** n / math.factorial(n)
    return (pair ** n) * prefactor


def beam_split(p: CreationPolynomial) -> CreationPolynomial:
    """50/50 polarization-independent splitters: ``x -> (x + x')/sqrt2`` for x = a, b."""
    if any(m.spatial.is_primed for m in p.modes()):
        raise DomainError("input already contains reflected (primed) modes")
    r = 1 / math.sqrt(2)
    mapping = {}
    for unprimed, primed in ((Spatial.A, Spatial.A_PRIME), (Spatial.B, Spatial.B_PRIME)):
        for pol in Pol:
            mapping[Mode(unprimed, pol)] = (
                CreationPolynomial.operator(Mode(unprimed, pol), r)
                + CreationPolynomial.operator(Mode(primed, pol), r)
            )
    return p.substitute(mapping)


def postselect_coincidence(p: CreationPolynomial) -> CreationPolynomial:
    """Keep only monomials with exactly one photon in each of a, a', b, b'."""
    return CreationPolynomial({m: c for m, c in p.terms.items() if m.is_single_occupancy()})


def rotate_polarization(p: CreationPolynomial, spatial_modes: Iterable[Spatial | str]) -> CreationPolynomial:
    """90 degree rotation in the listed beams: swap H and V labels, no sign."""
    targets = {Spatial.from_label(s) if isinstance(s, str) else Spatial(s) for s in spatial_modes}

    def flip(m: Mode) -> Mode:
        if m.spatial in targets:
            return Mode(m.spatial, Pol.V if m.pol == Pol.H else Pol.H)
        return m

    out: dict[Monomial, complex] = {}
    for mono, c in p.terms.items():
        new = Monomial.of({flip(m): n for m, n in mono.powers})
        out[new] = out.get(new, 0j) + c
    return CreationPolynomial(out)


# Axis index of each polarization in the 16-amplitude array (matches analyzer kets over (V, H)).
STATE_POL_INDEX = {"V": 0, "H": 1}
PATTERNS = tuple("".join(t) for t in itertools.product("VH", repeat=4))


def _pattern_index(pattern: str) -> tuple[int, int, int, int]:
    if len(pattern) != 4 or any(ch not in STATE_POL_INDEX for ch in pattern):
        raise DomainError(f"bad polarization pattern {pattern!r}")
    return tuple(STATE_POL_INDEX[ch] for ch in pattern)


@dataclass(frozen=True, eq=False)
class PostselectedState:
    """Four photons, one per beam a, a', b, b'.

    ``amplitudes[i, j, k, l]`` is the amplitude of the polarization pattern with
    index 0 = V and 1 = H on each axis, axes ordered a, a', b, b'.
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=complex)
        if arr.shape != (2, 2, 2, 2):
            raise DomainError(f"expected shape (2, 2, 2, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError("non-finite amplitude")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @classmethod
    def from_patterns(cls, amps: Mapping[str, complex]) -> "PostselectedState":
        arr = np.zeros((2, 2, 2, 2), dtype=complex)
        for pattern, value in amps.items():
            arr[_pattern_index(pattern)] += value
        return cls(arr)

    def __getitem__(self, pattern: str) -> complex:
        return complex(self.amplitudes[_pattern_index(pattern)])

    def as_dict(self) -> dict[str, complex]:
        return {p: self[p] for p in PATTERNS}

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def is_normalized(self, tol: float = 1e-10) -> bool:
        return abs(self.norm_sq() - 1.0) <= tol

    def normalized(self) -> "PostselectedState":
        n = self.norm_sq()
        if n == 0.0:
            raise NormalizationError("cannot normalize the zero state")
        return PostselectedState(self.amplitudes / math.sqrt(n))

    def phase_fixed(self) -> "PostselectedState":
        """Global phase chosen so the largest-magnitude amplitude is real positive."""
        flat = self.amplitudes.ravel()
        if not np.any(flat):
            return self
        big = flat[np.argmax(np.abs(flat))]
        return PostselectedState(self.amplitudes * (abs(big) / big))

    def allclose(self, other: "PostselectedState", tol: float = 1e-12) -> bool:
        """Equality modulo global phase."""
        return bool(np.allclose(self.phase_fixed().amplitudes, other.phase_fixed().amplitudes, rtol=0, atol=tol))

    def to_json(self) -> dict[str, list[float]]:
        return {p: [self[p].real, self[p].imag] for p in PATTERNS}

    @classmethod
    def from_json(cls, data: Mapping[str, list[float]]) -> "PostselectedState":
        return cls.from_patterns({k: complex(v[0], v[1]) for k, v in data.items()})


def to_state(p: CreationPolynomial) -> PostselectedState:
    """Convert a post-selected polynomial to its normalized 16-amplitude state."""
    amps: dict[str, complex] = {}
    for mono, c in p.terms.items():
        pattern = mono.pattern()
        amps[pattern] = amps.get(pattern, 0j) + c
    if not amps:
        raise NormalizationError("cannot normalize an empty polynomial")
    return PostselectedState.from_patterns(amps).normalized()


def product_state(pattern: str) -> PostselectedState:
    """Normalized product state such as ``product_state("HHHH")``."""
    return PostselectedState.from_patterns({pattern: 1.0})


PAIR_ALPHA = 1j * math.sqrt(2)


def pipeline_stages(alpha: complex = PAIR_ALPHA) -> dict[str, CreationPolynomial]:
    """Intermediate polynomials of the double-pair pipeline, keyed by stage name."""
    pair = pdc_term(2, alpha)
    split = beam_split(pair)
    post = postselect_coincidence(split)
    rotated = rotate_polarization(post, (Spatial.A, Spatial.A_PRIME))
    return {"pairterm": pair, "split": split, "postselected": post, "rotated": rotated}


def four_photon_state() -> PostselectedState:
    """The normalized post-selected, rotated double-pair state."""
    return to_state(pipeline_stages()["rotated"])


def coincidence_fraction(p: CreationPolynomial) -> float:
    """Share of the squared norm of ``beam_split(p)`` surviving post-selection."""
    split = beam_split(p)
    total = split.norm_sq()
    if total == 0.0:
        raise NormalizationError("zero polynomial")
    return postselect_coincidence(split).norm_sq() / total


def ghz_epr_split(state: PostselectedState) -> tuple[float, float]:
    """Squared mass on the GHZ patterns {VVVV, HHHH} and on the four mixed EPR patterns."""
    ghz = sum(abs(state[p]) ** 2 for p in ("VVVV", "HHHH"))
    epr = sum(abs(state[p]) ** 2 for p in ("HVHV", "HVVH", "VHHV", "VHVH"))
    return float(ghz), float(epr)
