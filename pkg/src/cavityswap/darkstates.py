"""
Analytic dark states of one cavity-mediated step and adiabatic-following checks.

During a step each atom has one laser-coupled ground state ``L`` and one
uncoupled ground state ``N`` (``{L, N} = {0, a}``). With complex Rabi
frequencies ``W1 = Omega1 exp(i phi1)`` (atom 1) and ``W2`` (atom 2):

* charge -1 block: ``g1 W2 |L1 1>|0> + g2 W1 |1 L2>|0> - W1 W2 |11>|1>``
* charge 0 block, four states:
  ``W2 |N1 1>|1> - g2 |N1 L2>|0>``,
  ``sqrt2 g1 g2 |L1 L2>|0> - sqrt2 g2 W1 |1 L2>|1> - sqrt2 g1 W2 |L1 1>|1> + W1 W2 |11>|2>``,
  ``|N1 N2>|0>``,
  ``W1 |1 N2>|1> - g1 |L1 N2>|0>``.

All are exact zero-eigenvalue vectors of the step Hamiltonian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import HamiltonianModel
from .hilbert import AtomLevel, Basis, BasisState, StateVector, block_partition, build_basis, charge_of
from .pulses import Schedule, Step

_G1 = AtomLevel.G1


class TrackingError(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class StepRoles:
    """Laser-coupled ground level ``L`` of each atom; ``N`` is the other one."""

    L1: AtomLevel
    L2: AtomLevel

    def __post_init__(self):
        for lv in (self.L1, self.L2):
            if lv not in (AtomLevel.G0, AtomLevel.GA):
                raise ValueError(f"laser-coupled level must be |0> or |a>, got {lv!r}")

    @property
    def N1(self) -> AtomLevel:
        return _other(self.L1)

    @property
    def N2(self) -> AtomLevel:
        return _other(self.L2)


def _other(level: AtomLevel) -> AtomLevel:
    return AtomLevel.GA if level == AtomLevel.G0 else AtomLevel.G0


def step_pulses_by_atom(step: Step):
    """``(pulse on atom 1, pulse on atom 2)``; raises for single-atom steps."""
    by_atom = {p.atom: p for p in step.pulses}
    if set(by_atom) != {1, 2}:
        raise ValueError(f"step {step.label} drives a single atom; it has no cavity-mediated dark state")
    for p in by_atom.values():
        if p.transition.upper != AtomLevel.E:
            raise ValueError(f"step {step.label} pulse {p.name} does not drive an |e> transition")
    return by_atom[1], by_atom[2]


def roles_for_step(step: Step) -> StepRoles:
    p1, p2 = step_pulses_by_atom(step)
    return StepRoles(p1.transition.lower, p2.transition.lower)


def step_rabi(step: Step, t: float) -> tuple[complex, complex]:
    """Complex Rabi frequencies ``(W1, W2)`` of the step's pulses at ``t``."""
    p1, p2 = step_pulses_by_atom(step)
    return complex(p1.rabi(t)), complex(p2.rabi(t))


def _vector(basis: Basis, terms) -> StateVector:
    amps = np.zeros(basis.dim, dtype=complex)
    for (a1, a2, n), c in terms:
        amps[basis.index_of(BasisState(a1, a2, n))] += c
    nrm = np.linalg.norm(amps)
    if nrm == 0:
        raise ValueError("dark-state direction undefined: all couplings are zero")
    return StateVector(basis, amps / nrm)


def dark7(roles: StepRoles, omega1: complex, omega2: complex, g1: float, g2: float,
          basis: Basis | None = None) -> StateVector:
    """Normalized charge -1 dark state of the step."""
    basis = basis or build_basis()
    return _vector(basis, [
        ((roles.L1, _G1, 0), g1 * omega2),
        ((_G1, roles.L2, 0), g2 * omega1),
        ((_G1, _G1, 1), -omega1 * omega2),
    ])


def dark16(roles: StepRoles, omega1: complex, omega2: complex, g1: float, g2: float,
           basis: Basis | None = None) -> list[StateVector]:
    """The four normalized charge-0 dark states, in the order listed above."""
    basis = basis or build_basis()
    if omega1 == 0 and omega2 == 0 and g1 == 0 and g2 == 0:
        raise ValueError("dark-state direction undefined: all couplings are zero")
    r2 = math.sqrt(2)
    L1, L2, N1, N2 = roles.L1, roles.L2, roles.N1, roles.N2
    return [
        _vector(basis, [((N1, _G1, 1), omega2), ((N1, L2, 0), -g2)]),
        _vector(basis, [
            ((L1, L2, 0), r2 * g1 * g2),
            ((_G1, L2, 1), -r2 * g2 * omega1),
            ((L1, _G1, 1), -r2 * g1 * omega2),
            ((_G1, _G1, 2), omega1 * omega2),
        ]),
        _vector(basis, [((N1, N2, 0), 1.0)]),
        _vector(basis, [((_G1, N2, 1), omega1), ((L1, N2, 0), -g1)]),
    ]


def kernel_residual(h: np.ndarray, psi: np.ndarray) -> float:
    """``|H psi| / |H|`` (spectral norm); 0 when ``H`` vanishes."""
    scale = np.linalg.norm(h, 2)
    return float(np.linalg.norm(h @ psi) / scale) if scale > 0 else 0.0


def _block_indices(basis: Basis, block: int) -> np.ndarray:
    parts = block_partition(basis)
    if block not in parts:
        raise KeyError(f"no basis state has charge {block}")
    return parts[block]


def _block_matrix(model: HamiltonianModel, idx: np.ndarray, t: float) -> np.ndarray:
    h = model.matrix(t)
    sub = h[np.ix_(idx, idx)]
    outside = np.delete(h[:, idx], idx, axis=0)
    if outside.size and np.abs(outside).max() > 0:
        raise ValueError(f"block is not invariant at t={t}: the schedule couples it to other charges")
    return sub


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    dark_dim: int
    gap: float
    norm: float


def _spectrum(h: np.ndarray, rtol: float = 1e-10):
    w, v = np.linalg.eigh(h)
    scale = np.abs(w).max(initial=0.0)
    dark = np.abs(w) <= rtol * scale
    bright = np.abs(w[~dark])
    gap = float(bright.min()) if bright.size else math.inf
    return w, v, dark, gap, scale


def spectrum_and_gap(basis: Basis, schedule: Schedule, t: float, block: int,
                     rtol: float = 1e-10) -> SpectrumReport:
    """Eigenvalues of one charge block and the gap above its zero manifold.

    Eigenvalues with ``|lambda| <= rtol * |H|`` form the dark manifold; ``gap``
    is the smallest remaining ``|lambda|`` (``inf`` when nothing is bright).
    """
    model = HamiltonianModel(basis, schedule)
    model.check_time(t)
    idx = _block_indices(basis, block)
    w, _, dark, gap, scale = _spectrum(_block_matrix(model, idx, t), rtol)
    return SpectrumReport(w, int(dark.sum()), gap, scale)


@dataclass
class AdiabaticityReport:
    """Dark-state tracking over one time window.

    ``integrand[k, i, j]`` is ``<phi_i(t_k)| d/dt |phi_j(t_k)>`` for the
    tracked, gauge-fixed dark vectors.
    """

    times: np.ndarray
    labels: list[str]
    gaps: np.ndarray
    integrand: np.ndarray
    geometric_phases: np.ndarray
    dynamical_phases: np.ndarray
    nonadiabatic: np.ndarray
    start_overlaps: np.ndarray
    end_labels: list[str]
    end_overlaps: np.ndarray
    vectors: np.ndarray = field(repr=False)

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min())

    @property
    def max_nonadiabatic(self) -> float:
        return float(self.nonadiabatic.max())


def _gauge(v: np.ndarray, prev: np.ndarray | None) -> np.ndarray:
    """Fix the phase of ``v`` through its largest component.

    At the first sample that component is made real-positive; afterwards it
    keeps the phase it had at the previous sample. Vectors whose component
    phases are constant in time (constant laser phases) thus carry a
    constant global phase, even when the dominant component changes.
    """
    k = np.argmax(np.abs(v))
    target = 0.0 if prev is None else np.angle(prev[k])
    return v * np.exp(1j * (target - np.angle(v[k])))


def _derivative(x: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central differences along axis 0, lower order at the edges."""
    d = np.empty_like(x)
    d[2:-2] = (x[:-4] - 8 * x[1:-3] + 8 * x[3:-1] - x[4:]) / (12 * h)
    d[1] = (x[2] - x[0]) / (2 * h)
    d[-2] = (x[-1] - x[-3]) / (2 * h)
    d[0] = (-3 * x[0] + 4 * x[1] - x[2]) / (2 * h)
    d[-1] = (3 * x[-1] - 4 * x[-2] + x[-3]) / (2 * h)
    return d


def geometric_phase_integrand(schedule: Schedule, times, blocks, basis: Basis | None = None,
                              initial: list[str] | None = None, rtol: float = 1e-10,
                              min_overlap: float = 0.9) -> AdiabaticityReport:
    """Track dark vectors through ``times`` and sample ``<phi_i|d/dt|phi_j>``.

    Each tracked vector starts as the projection of an ``initial`` product
    state onto the zero manifold of its charge block. At every later time it
    is re-projected onto the new zero manifold (subspace continuity), then
    gauge-fixed: the largest component starts real-positive and keeps the
    phase it had at the previous sample.

    Parameters
    ----------
    schedule : Schedule
    times : array_like
        Uniformly spaced sample times.
    blocks : int or sequence of int
        Charge blocks to analyse; cross-block elements are included in the
        integrand matrix.
    initial : list of str, optional
        Product-state labels to track. Defaults to every zero-photon
        ground-level state of the blocks that is dark at ``times[0]``.

    Raises
    ------
    TrackingError
        If a projection keeps less than ``min_overlap`` of the norm.
    """
    basis = basis or build_basis(include_u=schedule.requires_u)
    times = np.asarray(times, dtype=float)
    if times.size < 5:
        raise ValueError("need at least 5 sample times")
    h = float(times[1] - times[0])
    if not np.allclose(np.diff(times), h, rtol=1e-9, atol=0):
        raise ValueError("sample times must be uniformly spaced")
    blocks = [blocks] if np.isscalar(blocks) else list(blocks)
    model = HamiltonianModel(basis, schedule)
    model.check_time(times[0])
    model.check_time(times[-1])
    block_idx = {b: _block_indices(basis, b) for b in blocks}

    def null_space(t):
        out = {}
        gaps = []
        for b, idx in block_idx.items():
            w, v, dark, gap, _ = _spectrum(_block_matrix(model, idx, t), rtol)
            out[b] = v[:, dark]
            gaps.append(gap)
        return out, min(gaps)

    spaces, gap0 = null_space(times[0])
    if initial is None:
        initial = []
        for b, idx in block_idx.items():
            q = spaces[b]
            for j, i in enumerate(idx):
                s = basis.states[i]
                if s.n == 0 and s.atom1 in (AtomLevel.G0, AtomLevel.GA, _G1) and \
                        s.atom2 in (AtomLevel.G0, AtomLevel.GA, _G1) and np.linalg.norm(q[j]) ** 2 > 0.99:
                    initial.append(s.label)
    tracked = []
    for lbl in initial:
        s = BasisState.from_label(lbl)
        b = charge_of(s)
        if b not in block_idx:
            raise ValueError(f"{lbl} is not in the analysed blocks {blocks}")
        tracked.append((b, int(np.flatnonzero(block_idx[b] == basis.index_of(s))[0])))

    n_t, k = times.size, len(tracked)
    vecs = np.zeros((n_t, k, basis.dim), dtype=complex)
    gaps = np.empty(n_t)
    energies = np.empty((n_t, k))
    current = []
    for j, (b, pos) in enumerate(tracked):
        q = spaces[b]
        v = q @ q[pos].conj()
        if np.linalg.norm(v) < min_overlap:
            raise TrackingError(f"{initial[j]} is not dark at t={times[0]:.6g}", times[0])
        current.append(_gauge(v / np.linalg.norm(v), None))

    for n, t in enumerate(times):
        if n > 0:
            spaces, gap = null_space(t)
        else:
            gap = gap0
        gaps[n] = gap
        hfull = model.matrix(t)
        for j, (b, _) in enumerate(tracked):
            q = spaces[b]
            v = q @ (q.conj().T @ current[j])
            keep = np.linalg.norm(v)
            if keep < min_overlap:
                raise TrackingError(f"dark state of {initial[j]} lost at t={t:.6g} (overlap {keep:.3f})", t)
            v = _gauge(v / keep, current[j])
            current[j] = v
            full = np.zeros(basis.dim, dtype=complex)
            full[block_idx[b]] = v
            vecs[n, j] = full
            energies[n, j] = np.vdot(full, hfull @ full).real

    dvecs = _derivative(vecs, h)
    integrand = np.einsum("tia,tja->tij", vecs.conj(), dvecs)
    diag = np.einsum("tii->ti", integrand)
    geometric = -np.trapezoid(diag.imag, times, axis=0)
    dynamical = np.trapezoid(energies, times, axis=0)

    # component of d(phi)/dt leaving the tracked set: coupling to bright states
    proj = np.einsum("tia,tja->tij", vecs.conj(), dvecs)
    leak = dvecs - np.einsum("tja,tji->tia", vecs, proj)
    nonad = np.linalg.norm(leak, axis=2).max(axis=1) if k else np.zeros(n_t)

    start = np.array([abs(vecs[0, j, basis.index_of(lbl)]) ** 2 for j, lbl in enumerate(initial)])
    end_labels, end_overlaps = [], []
    for j in range(k):
        i = int(np.argmax(np.abs(vecs[-1, j])))
        end_labels.append(basis.states[i].label)
        end_overlaps.append(abs(vecs[-1, j, i]) ** 2)
    return AdiabaticityReport(times, list(initial), gaps, integrand, geometric, dynamical, nonad, start,
                              end_labels, np.array(end_overlaps), vecs)


@dataclass
class StepAnalysis:
    label: str
    roles: StepRoles
    window: tuple[float, float]
    kernel_residual_7: float
    kernel_residual_16: float
    report: AdiabaticityReport

    def to_dict(self) -> dict:
        r = self.report
        return {
            "step": self.label,
            "roles": {"L1": self.roles.L1.label, "L2": self.roles.L2.label,
                      "N1": self.roles.N1.label, "N2": self.roles.N2.label},
            "window": list(self.window),
            "kernel_residual_dark7": self.kernel_residual_7,
            "kernel_residual_dark16": self.kernel_residual_16,
            "min_gap": r.min_gap,
            "max_nonadiabatic_coupling": r.max_nonadiabatic,
            "max_abs_integrand": float(np.abs(r.integrand).max()) if r.integrand.size else 0.0,
            "tracked": [
                {
                    "initial": lbl,
                    "start_overlap": float(r.start_overlaps[j]),
                    "final": r.end_labels[j],
                    "end_overlap": float(r.end_overlaps[j]),
                    "geometric_phase": float(r.geometric_phases[j]),
                    "dynamical_phase": float(r.dynamical_phases[j]),
                }
                for j, lbl in enumerate(r.labels)
            ],
        }


def analyze_step(schedule: Schedule, index: int, basis: Basis | None = None, n_samples: int = 2001,
                 pad: float = 3.0, n_kernel_samples: int = 101) -> StepAnalysis:
    """Kernel residuals, gap and dark-state tracking for one cavity step.

    The step is analysed in isolation (only its own two pulses) over
    ``[t_stokes - pad, t_pump + pad]``, widened so that fused flat-top
    pulses have switched off at both ends; otherwise the endpoint dark
    states would still be dressed by the plateau.
    """
    basis = basis or build_basis(include_u=schedule.requires_u)
    step = schedule.steps[index]
    roles = roles_for_step(step)
    sub = schedule.isolated_step(index, pad)
    lo, hi = sub.t_start, sub.t_end

    model = HamiltonianModel(basis, sub)
    idx7, idx16 = _block_indices(basis, -1), _block_indices(basis, 0)
    r7 = r16 = 0.0
    for t in np.linspace(lo, hi, n_kernel_samples):
        w1, w2 = step_rabi(step, t)
        h = model.matrix(t)
        r7 = max(r7, kernel_residual(h[np.ix_(idx7, idx7)],
                                     dark7(roles, w1, w2, sub.g1, sub.g2, basis).amplitudes[idx7]))
        h16 = h[np.ix_(idx16, idx16)]
        for v in dark16(roles, w1, w2, sub.g1, sub.g2, basis):
            r16 = max(r16, kernel_residual(h16, v.amplitudes[idx16]))
    report = geometric_phase_integrand(sub, np.linspace(lo, hi, n_samples), [-1, 0], basis)
    return StepAnalysis(step.label, roles, (lo, hi), r7, r16, report)
