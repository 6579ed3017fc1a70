"""
Product Hilbert space of two five-level atoms and one cavity mode.

A basis ket is written ``|s1 s2>|n>`` with ``s1, s2`` in ``{0, a, 1, e, u}``
and ``n`` the cavity photon number, truncated at ``n_max``. Kets are
serialized as compact labels such as ``"a1;0"``.

The couplings used by the SWAP protocol (lasers on 0-e and a-e, cavity on
1-e with one photon exchanged) conserve the integer charge

    C = n - (number of atoms in |1>)

which splits the space into independent blocks. For the computational
states this gives the 16-, 7- and 1-dimensional blocks C = 0, -1, -2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from itertools import product
from typing import Iterable

import numpy as np


class AtomLevel(IntEnum):
    """Internal level of one atom. The integer value fixes basis ordering."""

    G0 = 0
    GA = 1
    G1 = 2
    E = 3
    U = 4

    @property
    def label(self) -> str:
        return _LEVEL_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "AtomLevel":
        try:
            return _LABEL_LEVELS[label]
        except KeyError:
            raise ValueError(f"unknown atomic level {label!r}; expected one of 0, a, 1, e, u") from None


_LEVEL_LABELS = {AtomLevel.G0: "0", AtomLevel.GA: "a", AtomLevel.G1: "1", AtomLevel.E: "e", AtomLevel.U: "u"}
_LABEL_LEVELS = {v: k for k, v in _LEVEL_LABELS.items()}

GROUND_LEVELS = (AtomLevel.G0, AtomLevel.GA, AtomLevel.G1)


@dataclass(frozen=True, order=True)
class BasisState:
    atom1: AtomLevel
    atom2: AtomLevel
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("photon number must be non-negative")

    @property
    def label(self) -> str:
        return f"{self.atom1.label}{self.atom2.label};{self.n}"

    @classmethod
    def from_label(cls, label: str) -> "BasisState":
        """Parse ``"a1;0"``. A missing photon part (``"a1"``) means vacuum."""
        atoms, _, photons = label.strip().partition(";")
        if len(atoms) != 2:
            raise ValueError(f"bad basis label {label!r}: expected two level symbols like 'a1;0'")
        return cls(AtomLevel.from_label(atoms[0]), AtomLevel.from_label(atoms[1]), int(photons or 0))

    def __str__(self) -> str:
        return f"|{self.atom1.label}{self.atom2.label}>|{self.n}>"


def charge_of(s: BasisState) -> int:
    """Photon number minus the number of atoms in ``|1>``."""
    return s.n - (s.atom1 == AtomLevel.G1) - (s.atom2 == AtomLevel.G1)


@dataclass(frozen=True)
class Basis:
    """Ordered, immutable product basis. Build with :func:`build_basis`."""

    n_max: int
    include_u: bool
    states: tuple[BasisState, ...]
    _index: dict = field(repr=False, compare=False, hash=False)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def levels(self) -> tuple[AtomLevel, ...]:
        return tuple(AtomLevel)[: 5 if self.include_u else 4]

    def index_of(self, state: BasisState | str) -> int:
        if isinstance(state, str):
            state = BasisState.from_label(state)
        try:
            return self._index[state]
        except KeyError:
            raise KeyError(f"{state} is not in this basis (n_max={self.n_max}, include_u={self.include_u})") from None

    def __contains__(self, state) -> bool:
        if isinstance(state, str):
            state = BasisState.from_label(state)
        return state in self._index

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.states]

    def charges(self) -> np.ndarray:
        return np.array([charge_of(s) for s in self.states])

    def ket(self, state: BasisState | str) -> "StateVector":
        amps = np.zeros(self.dim, dtype=complex)
        amps[self.index_of(state)] = 1.0
        return StateVector(self, amps)

    def superposition(self, coefficients: dict) -> "StateVector":
        """Normalized state from ``{label: amplitude}``."""
        amps = np.zeros(self.dim, dtype=complex)
        for key, c in coefficients.items():
            amps[self.index_of(key)] += c
        return StateVector(self, amps).normalized()


def build_basis(n_max: int = 3, include_u: bool = False) -> Basis:
    """Enumerate ``|s1 s2>|n>`` lexicographically in (atom1, atom2, n).

    The two-photon component ``|11>|2>`` of the doubly laser-coupled dark
    state must be representable, hence ``n_max >= 2``.
    """
    if int(n_max) != n_max or n_max < 2:
        raise ValueError(
            f"n_max={n_max} is too small: the two-photon dark-state component |11>|2> "
            "requires n_max >= 2"
        )
    n_max = int(n_max)
    levels = tuple(AtomLevel)[: 5 if include_u else 4]
    states = tuple(BasisState(a, b, n) for a, b, n in product(levels, levels, range(n_max + 1)))
    return Basis(n_max, bool(include_u), states, {s: i for i, s in enumerate(states)})


def block_partition(basis: Basis, max_photons: int | None = None) -> dict[int, np.ndarray]:
    """Group basis indices by conserved charge, ``{charge: sorted indices}``.

    ``max_photons`` optionally drops states with more photons before grouping.
    """
    groups: dict[int, list[int]] = {}
    for i, s in enumerate(basis.states):
        if max_photons is not None and s.n > max_photons:
            continue
        groups.setdefault(charge_of(s), []).append(i)
    return {c: np.array(groups[c]) for c in sorted(groups)}


def computational_states() -> tuple[BasisState, ...]:
    """``|00>|0>, |01>|0>, |10>|0>, |11>|0>`` in gate-matrix order."""
    g0, g1 = AtomLevel.G0, AtomLevel.G1
    return tuple(BasisState(a, b, 0) for a, b in ((g0, g0), (g0, g1), (g1, g0), (g1, g1)))


@dataclass
class StateVector:
    """Complex amplitudes over a :class:`Basis`."""

    basis: Basis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} amplitudes, got shape {self.amplitudes.shape}")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        nrm = self.norm
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / nrm)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def population(self, state: BasisState | str) -> float:
        return float(abs(self.amplitudes[self.basis.index_of(state)]) ** 2)

    def amplitude(self, state: BasisState | str) -> complex:
        return complex(self.amplitudes[self.basis.index_of(state)])

    def overlap(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def support(self, tol: float = 0.0) -> np.ndarray:
        return np.flatnonzero(np.abs(self.amplitudes) > tol)

    def restricted(self, indices: Iterable[int]) -> np.ndarray:
        return self.amplitudes[np.asarray(list(indices))]
