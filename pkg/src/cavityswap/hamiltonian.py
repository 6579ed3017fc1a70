"""
Resonant rotating-wave Hamiltonian of two atoms in a single-mode cavity.

In the interaction picture every transition is resonant, so all diagonal
real parts vanish. With complex Rabi frequency ``W = Omega exp(i phi)``::

    H(t) = sum_pulses  W(t) |up>_k<low|  +  sum_k  g_k sqrt(n) |e, n-1>_k<1, n|  + h.c.
           - i/2 (gamma_e N_e + gamma_u N_u + kappa n)

Lasers and cavity must carry the same prefactor for the analytic dark
vectors (with their sqrt(2) two-photon weights) to be exact kernel vectors;
the prefactor is 1, so ``Omega`` and ``g`` are the off-diagonal elements
themselves.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .hilbert import AtomLevel, Basis, BasisState
from .pulses import Pulse, Schedule


@dataclass(frozen=True)
class LossParams:
    """Decay rates of ``|e>``, ``|u>`` and of cavity photons (same units as 1/t)."""

    gamma_e: float = 0.0
    gamma_u: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        for name in ("gamma_e", "gamma_u", "kappa"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def lossless(self) -> bool:
        return self.gamma_e == 0 and self.gamma_u == 0 and self.kappa == 0


NO_LOSS = LossParams()


@dataclass
class OperatorMatrix:
    matrix: np.ndarray
    hermitian: bool

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def block(self, indices) -> "OperatorMatrix":
        idx = np.asarray(indices)
        return OperatorMatrix(self.matrix[np.ix_(idx, idx)], self.hermitian)

    def __matmul__(self, other):
        return self.matrix @ other


def _replace(state: BasisState, atom: int, level: AtomLevel, n: int | None = None) -> BasisState:
    a1, a2 = (level, state.atom2) if atom == 1 else (state.atom1, level)
    return BasisState(a1, a2, state.n if n is None else n)


def laser_operator(basis: Basis, pulse: Pulse) -> np.ndarray:
    """Coupling matrix of ``pulse`` for unit envelope, phase included."""
    tr = pulse.transition
    if tr.needs_u and not basis.include_u:
        raise ValueError(f"pulse {pulse.name or tr.value} couples |u>, which is absent from the basis")
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    w = np.exp(1j * pulse.phase)
    for j, s in enumerate(basis.states):
        if (s.atom1 if pulse.atom == 1 else s.atom2) == tr.lower:
            i = basis.index_of(_replace(s, pulse.atom, tr.upper))
            m[i, j] += w
            m[j, i] += np.conj(w)
    return m


def cavity_operator(basis: Basis, g1: float, g2: float) -> np.ndarray:
    """Static exchange ``|1, n> <-> |e, n-1>`` with strength ``g_k sqrt(n)``."""
    m = np.zeros((basis.dim, basis.dim), dtype=complex)
    for atom, g in ((1, g1), (2, g2)):
        if g == 0:
            continue
        for j, s in enumerate(basis.states):
            if (s.atom1 if atom == 1 else s.atom2) == AtomLevel.G1 and s.n >= 1:
                i = basis.index_of(_replace(s, atom, AtomLevel.E, s.n - 1))
                m[i, j] += g * np.sqrt(s.n)
                m[j, i] += g * np.sqrt(s.n)
    return m


def loss_diagonal(basis: Basis, loss: LossParams) -> np.ndarray:
    out = np.zeros(basis.dim, dtype=complex)
    for i, s in enumerate(basis.states):
        n_e = (s.atom1 == AtomLevel.E) + (s.atom2 == AtomLevel.E)
        n_u = (s.atom1 == AtomLevel.U) + (s.atom2 == AtomLevel.U)
        out[i] = -0.5j * (loss.gamma_e * n_e + loss.gamma_u * n_u + loss.kappa * s.n)
    return out


class HamiltonianModel:
    """Precomputed ``H(t) = H_static + sum_p Omega_p(t) M_p`` for one schedule.

    ``diagonal_shift`` is an optional real per-state energy offset (e.g. a
    Stark shift) for sensitivity studies; it is zero by default.
    """

    def __init__(self, basis: Basis, schedule: Schedule, loss: LossParams | None = None,
                 diagonal_shift=None):
        loss = loss or NO_LOSS
        self.basis = basis
        self.schedule = schedule
        self.loss = loss
        self.pulses = schedule.pulses
        static = cavity_operator(basis, schedule.g1, schedule.g2)
        diag = loss_diagonal(basis, loss)
        if diagonal_shift is not None:
            diag = diag + np.asarray(diagonal_shift, dtype=float)
        static[np.diag_indices(basis.dim)] += diag
        self.static = static
        if self.pulses:
            self.couplings = np.stack([laser_operator(basis, p) for p in self.pulses])
        else:
            self.couplings = np.zeros((0, basis.dim, basis.dim), dtype=complex)
        self.hermitian = loss.lossless

    @property
    def dim(self) -> int:
        return self.basis.dim

    def envelopes(self, t) -> np.ndarray:
        return self.schedule.rabi_frequencies(t)

    def matrix(self, t: float) -> np.ndarray:
        omegas = self.envelopes(t)[:, 0]
        return self.static + np.tensordot(omegas, self.couplings, axes=1)

    def check_time(self, t: float) -> None:
        s = self.schedule
        eps = 1e-12 * max(1.0, abs(s.t_start), abs(s.t_end))
        if not (s.t_start - eps <= t <= s.t_end + eps):
            raise ValueError(f"t={t} outside schedule window [{s.t_start}, {s.t_end}]")

    def connectivity(self) -> np.ndarray:
        """Connected-component label per basis state of the coupling graph."""
        pattern = np.abs(self.static) + np.abs(self.couplings).sum(axis=0)
        np.fill_diagonal(pattern, 0.0)
        _, labels = connected_components(pattern > 0, directed=False)
        return labels

    def active_indices(self, support) -> np.ndarray:
        """All states dynamically reachable from the index set ``support``."""
        labels = self.connectivity()
        return np.flatnonzero(np.isin(labels, labels[np.asarray(support)]))


def assemble(basis: Basis, schedule: Schedule, t: float, loss: LossParams | None = None,
             diagonal_shift=None) -> OperatorMatrix:
    """Hamiltonian of ``schedule`` at time ``t`` on ``basis``."""
    model = HamiltonianModel(basis, schedule, loss, diagonal_shift)
    model.check_time(t)
    h = model.matrix(t)
    if model.hermitian:
        scale = max(np.abs(h).max(), 1.0)
        if np.abs(h - h.conj().T).max() > 1e-14 * scale:
            raise AssertionError("lossless Hamiltonian is not Hermitian")
    return OperatorMatrix(h, model.hermitian)
