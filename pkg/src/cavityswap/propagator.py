"""
Time integration of ``i d|psi>/dt = H(t)|psi>`` over a schedule.

Integration runs on the smallest union of connected coupling components
that contains the initial support, which for the SWAP protocols is one
conserved-charge block of dimension 1, 7 or 16.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .hamiltonian import HamiltonianModel, LossParams
from .hilbert import AtomLevel, Basis, StateVector, build_basis, computational_states
from .pulses import Schedule

METHODS = ("rk4", "magnus4")
_CHUNK = 256


class PropagationError(RuntimeError):
    """Numerical failure during integration (carries the failure time)."""

    def __init__(self, message: str, t: float | None = None, times=None, samples=None, active=None):
        super().__init__(message)
        self.t = t
        # samples recorded before the failure (block amplitudes) so callers can flag partial output
        self.times = times
        self.samples = samples
        self.active = active


def max_time_step(schedule: Schedule) -> float:
    """Largest uniform step allowed: ``min(Tp, 1/g, 1/Omega_max) / 20``."""
    scales = [schedule.t_p]
    for rate in (schedule.g1, schedule.g2, schedule.omega_max):
        if rate > 0:
            scales.append(1.0 / rate)
    return min(scales) / 20


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    dt: float
    stride: int = 10

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError("time grid needs t_end > t_start")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, math.ceil((self.t_end - self.t_start) / self.dt - 1e-9))

    @property
    def h(self) -> float:
        """Actual step, ``dt`` shrunk so the window holds an integer number of steps."""
        return (self.t_end - self.t_start) / self.n_steps

    def sample_steps(self) -> np.ndarray:
        steps = np.arange(0, self.n_steps + 1, self.stride)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_start, self.t_end, self.h / factor, self.stride * factor)


def default_grid(schedule: Schedule, dt: float | None = None, stride: int = 10,
                 t_start: float | None = None, t_end: float | None = None) -> TimeGrid:
    return TimeGrid(
        schedule.t_start if t_start is None else t_start,
        schedule.t_end if t_end is None else t_end,
        max_time_step(schedule) if dt is None else dt,
        stride,
    )


@dataclass
class Trajectory:
    """Sampled evolution of one initial state.

    Populations are kept for every dynamically reachable state; ``labels``
    lists the ones whose population ever exceeds the recording threshold.
    """

    basis: Basis
    times: np.ndarray
    active: np.ndarray
    active_populations: np.ndarray
    norms: np.ndarray
    final: StateVector
    labels: list[str]
    states: np.ndarray | None = None
    loss: LossParams = field(default_factory=LossParams)

    def population(self, state) -> np.ndarray:
        i = self.basis.index_of(state)
        hit = np.flatnonzero(self.active == i)
        if hit.size == 0:
            return np.zeros_like(self.times)
        return self.active_populations[:, hit[0]]

    @property
    def populations(self) -> np.ndarray:
        """Recorded populations, shape ``(n_samples, len(labels))``."""
        return np.column_stack([self.population(lbl) for lbl in self.labels]) if self.labels else \
            np.zeros((self.times.size, 0))

    def _level_count(self, level: AtomLevel) -> np.ndarray:
        return np.array([(s.atom1 == level) + (s.atom2 == level) for s in
                         (self.basis.states[i] for i in self.active)], dtype=float)

    @property
    def excited_population(self) -> np.ndarray:
        """Probability that at least one atom is in ``|e>``."""
        mask = self._level_count(AtomLevel.E) > 0
        return self.active_populations[:, mask].sum(axis=1)

    @property
    def u_population(self) -> np.ndarray:
        mask = self._level_count(AtomLevel.U) > 0
        return self.active_populations[:, mask].sum(axis=1)

    @property
    def photon_number(self) -> np.ndarray:
        n = np.array([self.basis.states[i].n for i in self.active], dtype=float)
        return self.active_populations @ n


def _restricted_model(model: HamiltonianModel, idx: np.ndarray):
    static = model.static[np.ix_(idx, idx)]
    couplings = model.couplings[:, idx][:, :, idx]
    used = np.flatnonzero(np.abs(couplings).reshape(len(couplings), -1).max(axis=1, initial=0) > 0)
    return static, couplings[used], used


def _evolve(model: HamiltonianModel, idx: np.ndarray, psi: np.ndarray, grid: TimeGrid, method: str):
    """Integrate block amplitudes ``psi`` (shape ``(d, k)``); return samples and sample times."""
    static, couplings, used = _restricted_model(model, idx)
    pulses = [model.pulses[i] for i in used]
    n, h = grid.n_steps, grid.h
    t0 = grid.t_start
    sample_at = grid.sample_steps()
    samples = np.empty((sample_at.size,) + psi.shape, dtype=complex)
    samples[0] = psi
    next_sample = 1

    def envelopes(times):
        if not pulses:
            return np.zeros((0, times.size))
        return np.array([p.envelope(times) for p in pulses])

    def _abort(t):
        raise PropagationError(f"non-finite amplitudes at t={t:.6g}", t, t0 + h * sample_at[:next_sample],
                               samples[:next_sample], idx)

    if method == "rk4":
        d = static.shape[0]
        flat = couplings.reshape(len(pulses), d * d)
        h_next = static + (envelopes(np.array([t0])).T @ flat).reshape(d, d)
        for c0 in range(0, n, _CHUNK):
            c1 = min(n, c0 + _CHUNK)
            # H at the midpoint and end of every step in the chunk
            times = t0 + h * (np.arange(2 * c0 + 1, 2 * c1 + 1) / 2)
            hs = static + (envelopes(times).T @ flat).reshape(-1, d, d)
            for j, k in enumerate(range(c0, c1)):
                ha, hb, h_next = h_next, hs[2 * j], hs[2 * j + 1]
                k1 = -1j * (ha @ psi)
                k2 = -1j * (hb @ (psi + 0.5 * h * k1))
                k3 = -1j * (hb @ (psi + 0.5 * h * k2))
                k4 = -1j * (h_next @ (psi + h * k3))
                psi = psi + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
                if k + 1 == sample_at[next_sample]:
                    if not np.all(np.isfinite(psi)):
                        _abort(t0 + (k + 1) * h)
                    samples[next_sample] = psi
                    next_sample += 1
    elif method == "magnus4":
        c = math.sqrt(3) / 6
        base = t0 + h * np.arange(n)
        env1, env2 = envelopes(base + (0.5 - c) * h), envelopes(base + (0.5 + c) * h)
        for k in range(n):
            a1 = -1j * (static + np.tensordot(env1[:, k], couplings, axes=1))
            a2 = -1j * (static + np.tensordot(env2[:, k], couplings, axes=1))
            omega = 0.5 * h * (a1 + a2) + (math.sqrt(3) / 12) * h * h * (a2 @ a1 - a1 @ a2)
            psi = expm(omega) @ psi
            if k + 1 == sample_at[next_sample]:
                if not np.all(np.isfinite(psi)):
                    _abort(t0 + (k + 1) * h)
                samples[next_sample] = psi
                next_sample += 1
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    return t0 + h * sample_at, samples


def _check_grid(schedule: Schedule, grid: TimeGrid | None, check_step: bool) -> TimeGrid:
    grid = grid or default_grid(schedule)
    if check_step and grid.h > max_time_step(schedule) * (1 + 1e-9):
        raise ValueError(f"time step {grid.h:.4g} exceeds the limit min(Tp, 1/g, 1/Omega_max)/20 = "
                         f"{max_time_step(schedule):.4g}")
    return grid


def _propagate_many(states: list[StateVector], model: HamiltonianModel, grid: TimeGrid, method: str,
                    store_states: bool, record_threshold: float) -> list[Trajectory]:
    """Evolve several states, batching those that share a coupling component."""
    basis = model.basis
    groups: dict[tuple, list[int]] = {}
    for j, psi in enumerate(states):
        idx = model.active_indices(psi.support())
        groups.setdefault(tuple(idx), []).append(j)

    out: list[Trajectory | None] = [None] * len(states)
    for key, members in groups.items():
        idx = np.array(key)
        psi = np.column_stack([states[j].amplitudes[idx] for j in members])
        times, samples = _evolve(model, idx, psi, grid, method)
        for col, j in enumerate(members):
            block = samples[:, :, col]
            pops = np.abs(block) ** 2
            final = np.zeros(basis.dim, dtype=complex)
            final[idx] = block[-1]
            recorded = [basis.states[i].label for i, p in zip(idx, pops.max(axis=0)) if p > record_threshold]
            full = None
            if store_states:
                full = np.zeros((times.size, basis.dim), dtype=complex)
                full[:, idx] = block
            out[j] = Trajectory(basis, times, idx, pops, np.sqrt(pops.sum(axis=1)),
                                StateVector(basis, final), recorded, full, model.loss)
    return out


def propagate(psi0: StateVector, schedule: Schedule, grid: TimeGrid | None = None,
              loss: LossParams | None = None, *, method: str = "rk4", store_states: bool = False,
              record_threshold: float = 1e-6, model: HamiltonianModel | None = None,
              check_step: bool = True) -> Trajectory:
    """Integrate the Schrödinger equation from ``psi0`` across ``grid``.

    Raises
    ------
    ValueError
        If ``psi0`` is not normalized, the basis lacks a level the schedule
        drives, or ``grid.dt`` exceeds :func:`max_time_step`.
    PropagationError
        If the amplitudes become non-finite.
    """
    if abs(psi0.norm - 1.0) > 1e-10:
        raise ValueError(f"initial state must be normalized (norm={psi0.norm:.12g})")
    grid = _check_grid(schedule, grid, check_step)
    if model is None:
        model = HamiltonianModel(psi0.basis, schedule, loss)
    elif model.basis is not psi0.basis:
        raise ValueError("model was built on a different basis")
    return _propagate_many([psi0], model, grid, method, store_states, record_threshold)[0]


def propagate_stepwise(psi0: StateVector, schedule: Schedule, loss: LossParams | None = None, *,
                       isolated: bool = True, pad: float = 5.0, method: str = "rk4") -> list[StateVector]:
    """Propagate step by step, returning the state after each step.

    With ``isolated=True`` each step runs with only its own two pulses over
    its own padded window. Otherwise the full schedule is integrated over
    consecutive windows split halfway between steps.
    """
    model_loss = loss
    out = []
    psi = psi0
    for k in range(len(schedule.steps)):
        if isolated:
            sub = schedule.isolated_step(k, pad)
            grid = default_grid(sub)
        else:
            sub = schedule
            lo, hi = schedule.step_window(k)
            grid = default_grid(schedule, t_start=lo, t_end=hi)
        model = HamiltonianModel(psi0.basis, sub, model_loss)
        psi = _propagate_many([psi], model, grid, method, False, 1e-6)[0].final
        out.append(psi)
    return out


COMPUTATIONAL_LABELS = [s.label for s in computational_states()]


@dataclass
class GateMatrix:
    """Realized map on ``|00>, |01>, |10>, |11>`` (vacuum), column = input."""

    matrix: np.ndarray
    trajectories: tuple[Trajectory, ...]
    labels: tuple[str, ...] = tuple(COMPUTATIONAL_LABELS)

    @property
    def column_norms(self) -> np.ndarray:
        return np.linalg.norm(self.matrix, axis=0)

    @property
    def leakage(self) -> np.ndarray:
        """``1 - |column|^2``: weight lost from the computational subspace (includes decay)."""
        return 1.0 - self.column_norms ** 2

    @property
    def norm_loss(self) -> np.ndarray:
        return 1.0 - np.array([t.final.norm ** 2 for t in self.trajectories])

    def anchored(self) -> np.ndarray:
        """Matrix with the global phase fixed by the ``|00>`` diagonal element."""
        g00 = self.matrix[0, 0]
        return self.matrix * (np.conj(g00) / abs(g00) if abs(g00) > 0 else 1.0)

    def phases(self) -> np.ndarray:
        return np.angle(self.anchored())


def gate_matrix(schedule: Schedule, grid: TimeGrid | None = None, loss: LossParams | None = None,
                basis: Basis | None = None, *, method: str = "rk4", store_states: bool = False,
                n_max: int = 3) -> GateMatrix:
    """Propagate the four computational states and project onto them."""
    basis = basis or build_basis(n_max, include_u=schedule.requires_u)
    model = HamiltonianModel(basis, schedule, loss)
    idx = [basis.index_of(lbl) for lbl in COMPUTATIONAL_LABELS]
    grid = _check_grid(schedule, grid, True)
    trajectories = tuple(_propagate_many([basis.ket(lbl) for lbl in COMPUTATIONAL_LABELS], model, grid,
                                         method, store_states, 1e-6))
    matrix = np.column_stack([t.final.amplitudes[idx] for t in trajectories])
    return GateMatrix(matrix, trajectories)
