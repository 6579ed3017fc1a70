"""
Gate fidelity, leakage, excited-state exposure, parameter scans and the
metastable-helium order-of-magnitude estimates.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .hamiltonian import LossParams
from .hilbert import Basis
from .propagator import GateMatrix, TimeGrid, Trajectory, gate_matrix
from .pulses import Schedule, build_schedule

IDENTITY = np.eye(4, dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
# control = atom 1, basis order |00>, |01>, |10>, |11>
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
TARGETS = {"identity": IDENTITY, "swap": SWAP, "cnot": CNOT}

HELIUM_LINEWIDTH = 1e7  # s^-1
RABI_PER_SQRT_INTENSITY = 1e8  # s^-1 per sqrt(W/cm^2)
STARK_PER_INTENSITY = 100.0  # s^-1 per W/cm^2


def default_target(protocol: str) -> str:
    return "cnot" if protocol.startswith("cnot") else "swap"


def gate_fidelity(g, target) -> tuple[float, np.ndarray]:
    """``|tr(target^dagger G)| / 4`` and per-column leakage ``1 - |G e_j|^2``.

    ``G`` is first rotated so its ``|00>`` diagonal element is real-positive.
    """
    m = g.anchored() if isinstance(g, GateMatrix) else np.asarray(g, dtype=complex)
    if not isinstance(g, GateMatrix) and abs(m[0, 0]) > 0:
        m = m * (np.conj(m[0, 0]) / abs(m[0, 0]))
    target = TARGETS[target] if isinstance(target, str) else np.asarray(target, dtype=complex)
    fid = abs(np.trace(target.conj().T @ m)) / 4
    leakage = 1.0 - np.linalg.norm(m, axis=0) ** 2
    return float(min(fid, 1.0)), leakage


def exposure_metrics(traj: Trajectory) -> dict:
    """Peak and time-integrated occupation of the lossy degrees of freedom."""
    pe = traj.excited_population
    return {
        "max_e_population": float(pe.max()),
        "max_u_population": float(traj.u_population.max()),
        "max_photon_number": float(traj.photon_number.max()),
        "integrated_e_population": float(np.trapezoid(pe, traj.times)),
    }


@dataclass
class GateResult:
    gate: GateMatrix
    target: str
    fidelity: float
    leakage: np.ndarray
    max_e_population: float
    max_u_population: float
    max_photon_number: float
    norm_loss: float

    @property
    def max_leakage(self) -> float:
        return float(self.leakage.max())

    def summary(self) -> dict:
        return {
            "target": self.target,
            "fidelity": self.fidelity,
            "max_leakage": self.max_leakage,
            "leakage": [float(x) for x in self.leakage],
            "max_e_population": self.max_e_population,
            "max_u_population": self.max_u_population,
            "max_photon_number": self.max_photon_number,
            "norm_loss": self.norm_loss,
        }

    def to_dict(self) -> dict:
        a = self.gate.anchored()
        out = self.summary()
        out["matrix_abs2"] = (np.abs(a) ** 2).tolist()
        out["matrix_phase"] = np.where(np.abs(a) > 1e-6, np.angle(a), 0.0).tolist()
        out["matrix_real"] = a.real.tolist()
        out["matrix_imag"] = a.imag.tolist()
        return out


def evaluate_gate(schedule: Schedule, target: str | None = None, loss: LossParams | None = None,
                  grid: TimeGrid | None = None, n_max: int = 3, method: str = "rk4",
                  basis: Basis | None = None) -> GateResult:
    """Simulate the four computational inputs and score them against ``target``."""
    target = target or default_target(schedule.protocol)
    gm = gate_matrix(schedule, grid, loss, basis, n_max=n_max, method=method)
    fid, leak = gate_fidelity(gm, target)
    exposures = [exposure_metrics(t) for t in gm.trajectories]
    return GateResult(
        gm, target, fid, leak,
        max(e["max_e_population"] for e in exposures),
        max(e["max_u_population"] for e in exposures),
        max(e["max_photon_number"] for e in exposures),
        float(gm.norm_loss.max()),
    )


SCAN_AXES = ("omega_max_tp", "g_tp", "intra_delay", "inter_step_gap")
SCAN_METRICS = ("fidelity", "max_leakage", "max_e_population", "max_photon_number", "norm_loss")

_AXIS_TO_PARAM = {"omega_max_tp": "omega_max", "intra_delay": "intra_delay", "inter_step_gap": "inter_step_gap"}


def _scan_point(job) -> dict:
    protocol, point, base, loss, target = job
    params = dict(base)
    for name, value in point.items():
        if name == "g_tp":
            params["g1"] = params["g2"] = value
        else:
            params[_AXIS_TO_PARAM[name]] = value
    row = dict(point)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            schedule = build_schedule(protocol, **params)
        summary = evaluate_gate(schedule, target, loss).summary()
        row.update({k: summary[k] for k in SCAN_METRICS})
        row["status"] = "ok"
    except Exception as exc:  # recorded per point; the scan continues
        row.update({k: math.nan for k in SCAN_METRICS})
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    return row


def parameter_scan(protocol: str, axes: dict, loss: LossParams | None = None, target: str | None = None,
                   workers: int | None = None, **base) -> list[dict]:
    """Evaluate the gate on the Cartesian product of ``axes``.

    Parameters
    ----------
    protocol : str
        Protocol passed to :func:`build_schedule`.
    axes : dict
        Up to three of ``omega_max_tp``, ``g_tp`` (sets both couplings),
        ``intra_delay``, ``inter_step_gap`` mapped to value lists. Rows
        follow ``itertools.product`` order of the dict.
    workers : int, optional
        Process-pool size; ``None`` or 1 runs serially. Row order does not
        depend on it.
    **base
        Fixed :func:`build_schedule` keyword arguments.
    """
    unknown = set(axes) - set(SCAN_AXES)
    if unknown:
        raise ValueError(f"unknown scan axes {sorted(unknown)}; expected a subset of {SCAN_AXES}")
    if len(axes) > 3:
        raise ValueError("at most three scan axes are supported")
    names = list(axes)
    points = [dict(zip(names, (float(v) for v in combo))) for combo in itertools.product(*axes.values())]
    if not names:
        points = []
    jobs = [(protocol, p, base, loss, target) for p in points]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_scan_point, jobs))
    return [_scan_point(j) for j in jobs]


def scan_csv(rows: list[dict], axes) -> str:
    """Serialize scan rows; header names every axis and metric."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(axes) + list(SCAN_METRICS) + ["status"]
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(row[k])) for k in header[:-1]] + [row["status"]])
    return buf.getvalue()


@dataclass
class PhysicalEstimate:
    """Rates in s^-1, intensity in W/cm^2, ``t_p`` in s."""

    intensity: float
    rabi: float
    stark: float
    t_p: float
    gamma: float
    omega_tp: float
    gamma_tp: float
    adiabatic_ratio: float
    stark_phase: float

    def to_dict(self) -> dict:
        return asdict(self)


def physical_estimates(intensity: float, t_p: float, gamma: float = HELIUM_LINEWIDTH) -> PhysicalEstimate:
    """Scaling-law estimates for the helium 2^3S_1 - 2^3P_0 line.

    ``rabi = 1e8 sqrt(I)``, ``stark = 100 I``; ``adiabatic_ratio`` is
    ``(Omega Tp)^2 / (Gamma Tp)`` and ``stark_phase`` is ``S Tp``.
    """
    if not intensity > 0 or not t_p > 0:
        raise ValueError("intensity and t_p must be positive")
    rabi = RABI_PER_SQRT_INTENSITY * math.sqrt(intensity)
    stark = STARK_PER_INTENSITY * intensity
    omega_tp = rabi * t_p
    gamma_tp = gamma * t_p
    return PhysicalEstimate(intensity, rabi, stark, t_p, gamma, omega_tp, gamma_tp,
                            omega_tp ** 2 / gamma_tp if gamma_tp > 0 else math.inf, stark * t_p)
