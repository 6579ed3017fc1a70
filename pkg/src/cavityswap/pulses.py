"""
Gaussian laser pulses and the step-structured SWAP / CNOT schedules.

All times are in units of the pulse width ``Tp`` unless the caller passes
physical values consistently. A step is a counterintuitive pulse pair: the
``stokes`` pulse (coupling the initially empty state) peaks before the
``pump`` pulse (coupling the populated one).

Protocols
---------
swap8
    Four steps, eight pulses:
    ``(Oa(1), O0(2)), (O0(2), O0(1)), (Oa(2), Oa(1)), (O0(1), Oa(2))``.
swap7
    swap8 with the two back-to-back ``O0(2)`` pulses of steps 1-2 fused
    into one flat-top pulse.
cnot11
    Shelving STIRAP ``|1> -> |a>`` on atom 2 through ``|u>``, a four-step
    cavity exchange of ``|10>|0>`` and ``|1a>|0>``, then the inverse
    shelving. Twelve pulses with one adjacent identical pair fused.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .hilbert import AtomLevel

PROTOCOLS = ("swap8", "swap7", "cnot11")


class Transition(str, Enum):
    """Laser-driven atomic transition, named ``<ground><upper>``."""

    ZERO_E = "0e"
    A_E = "ae"
    ONE_U = "1u"
    A_U = "au"

    @property
    def lower(self) -> AtomLevel:
        return AtomLevel.from_label(self.value[0])

    @property
    def upper(self) -> AtomLevel:
        return AtomLevel.from_label(self.value[1])

    @property
    def needs_u(self) -> bool:
        return self.upper == AtomLevel.U


@dataclass(frozen=True)
class PulseEnvelope:
    """Gaussian ``omega_max * exp(-((t - t_center) / t_p)**2)``.

    A nonzero ``plateau`` inserts a flat top of that duration centred on
    ``t_center``; the Gaussian flanks are unchanged.
    """

    omega_max: float
    t_center: float
    t_p: float
    plateau: float = 0.0

    def __post_init__(self):
        if not self.omega_max >= 0:
            raise ValueError(f"omega_max must be non-negative, got {self.omega_max}")
        if not self.t_p > 0:
            raise ValueError(f"t_p must be positive, got {self.t_p}")
        if self.plateau < 0:
            raise ValueError("plateau must be non-negative")

    @property
    def rise(self) -> float:
        return self.t_center - self.plateau / 2

    @property
    def fall(self) -> float:
        return self.t_center + self.plateau / 2

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        x = np.maximum(self.rise - t, 0.0) + np.maximum(t - self.fall, 0.0)
        return self.omega_max * np.exp(-((x / self.t_p) ** 2))


def envelope_value(p: PulseEnvelope, t):
    """Rabi frequency of envelope ``p`` at time(s) ``t``."""
    return p(t)


@dataclass(frozen=True)
class Pulse:
    envelope: PulseEnvelope
    atom: int
    transition: Transition
    phase: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.atom not in (1, 2):
            raise ValueError(f"atom must be 1 or 2, got {self.atom}")
        object.__setattr__(self, "transition", Transition(self.transition))
        if not np.isfinite(self.phase):
            raise ValueError("phase must be finite")

    def rabi(self, t):
        """Complex Rabi frequency ``Omega(t) * exp(i phase)``."""
        return self.envelope(t) * np.exp(1j * self.phase)

    @property
    def key(self) -> tuple[int, str]:
        return (self.atom, self.transition.value)


@dataclass(frozen=True)
class Step:
    """Counterintuitive pulse pair.

    ``t_stokes``/``t_pump`` are the peak times relevant to this step; for a
    fused flat-top pulse they are the plateau edge facing the step.
    """

    stokes: Pulse
    pump: Pulse
    t_stokes: float
    t_pump: float
    label: str = ""

    @property
    def delay(self) -> float:
        return self.t_pump - self.t_stokes

    @property
    def center(self) -> float:
        return 0.5 * (self.t_stokes + self.t_pump)

    @property
    def pulses(self) -> tuple[Pulse, Pulse]:
        return (self.stokes, self.pump)


@dataclass(frozen=True)
class Schedule:
    steps: tuple[Step, ...]
    g1: float
    g2: float
    t_start: float
    t_end: float
    t_p: float = 1.0
    protocol: str = "custom"
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.g1 < 0 or self.g2 < 0:
            raise ValueError("cavity couplings must be non-negative")
        if not self.t_end > self.t_start:
            raise ValueError("schedule window must have t_end > t_start")

    @property
    def pulses(self) -> tuple[Pulse, ...]:
        """Distinct pulses in order of first use (fused pulses appear once)."""
        seen: list[Pulse] = []
        for step in self.steps:
            for p in step.pulses:
                if not any(p is q for q in seen):
                    seen.append(p)
        return tuple(seen)

    @property
    def g(self) -> tuple[float, float]:
        return (self.g1, self.g2)

    @property
    def requires_u(self) -> bool:
        return any(p.transition.needs_u for p in self.pulses)

    @property
    def omega_max(self) -> float:
        return max((p.envelope.omega_max for p in self.pulses), default=0.0)

    def rabi_frequencies(self, t) -> np.ndarray:
        """Real envelopes, shape ``(n_pulses, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([p.envelope(t) for p in self.pulses]).reshape(len(self.pulses), t.size)

    def step_window(self, index: int, pad: float | None = None) -> tuple[float, float]:
        """Time interval owned by step ``index``: split at midpoints between steps."""
        steps = self.steps
        if pad is None:
            lo = self.t_start if index == 0 else 0.5 * (steps[index - 1].t_pump + steps[index].t_stokes)
            hi = self.t_end if index == len(steps) - 1 else 0.5 * (steps[index].t_pump + steps[index + 1].t_stokes)
            return lo, hi
        return steps[index].t_stokes - pad * self.t_p, steps[index].t_pump + pad * self.t_p

    def isolated_step(self, index: int, pad: float = 5.0) -> "Schedule":
        """Schedule holding only step ``index`` with its own padded window."""
        step = self.steps[index]
        lo, hi = self.step_window(index, pad)
        lo = min(lo, step.stokes.envelope.rise - pad * self.t_p)
        hi = max(hi, step.pump.envelope.fall + pad * self.t_p)
        return Schedule((step,), self.g1, self.g2, lo, hi, self.t_p, f"{self.protocol}[{step.label}]", self.params)

    def with_steps(self, steps, protocol: str | None = None) -> "Schedule":
        return Schedule(tuple(steps), self.g1, self.g2, self.t_start, self.t_end, self.t_p,
                        protocol or self.protocol, self.params)

    def to_dict(self) -> dict:
        pulses = self.pulses
        index = {id(p): i for i, p in enumerate(pulses)}
        return {
            "protocol": self.protocol,
            "g1": self.g1,
            "g2": self.g2,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "t_p": self.t_p,
            "pulses": [
                {
                    "name": p.name,
                    "atom": p.atom,
                    "transition": p.transition.value,
                    "omega_max": p.envelope.omega_max,
                    "t_center": p.envelope.t_center,
                    "t_p": p.envelope.t_p,
                    "plateau": p.envelope.plateau,
                    "phase": p.phase,
                }
                for p in pulses
            ],
            "steps": [
                {
                    "label": s.label,
                    "stokes": index[id(s.stokes)],
                    "pump": index[id(s.pump)],
                    "t_stokes": s.t_stokes,
                    "t_pump": s.t_pump,
                }
                for s in self.steps
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Schedule":
        pulses = [
            Pulse(
                PulseEnvelope(float(d["omega_max"]), float(d["t_center"]), float(d["t_p"]), float(d.get("plateau", 0.0))),
                int(d["atom"]),
                Transition(d["transition"]),
                float(d.get("phase", 0.0)),
                d.get("name", ""),
            )
            for d in data["pulses"]
        ]
        steps = []
        for i, d in enumerate(data["steps"]):
            stokes, pump = pulses[d["stokes"]], pulses[d["pump"]]
            steps.append(Step(
                stokes,
                pump,
                float(d.get("t_stokes", stokes.envelope.fall)),
                float(d.get("t_pump", pump.envelope.rise)),
                d.get("label", str(i + 1)),
            ))
        return cls(tuple(steps), float(data["g1"]), float(data["g2"]), float(data["t_start"]),
                   float(data["t_end"]), float(data.get("t_p", 1.0)), data.get("protocol", "custom"))


_SWAP_STEPS = [
    (("ae", 1), ("0e", 2)),
    (("0e", 2), ("0e", 1)),
    (("ae", 2), ("ae", 1)),
    (("0e", 1), ("ae", 2)),
]

# Middle steps exchange |10>|0> and |1a>|0> while |00>|0>, |0a>|0> follow
# decoupled or four-level dark states.
_CNOT_STEPS = [
    (("au", 2), ("1u", 2)),
    (("ae", 1), ("0e", 2)),
    (("0e", 1), ("ae", 2)),
    (("ae", 2), ("ae", 1)),
    (("0e", 2), ("0e", 1)),
    (("1u", 2), ("au", 2)),
]

# A pi phase on both shelving pumps cancels the sign picked up by the
# |1> <-> |a> round trip on the exchanged branch.
_CNOT_DEFAULT_PHASES = {"O1u(2)@A": math.pi, "O1u(2)@F": math.pi}


def _pulse_name(atom: int, transition: str, step_labels: list[str]) -> str:
    return f"O{transition}({atom})@{'-'.join(step_labels)}"


def build_schedule(
    protocol: str = "swap8",
    omega_max: float = 10.0,
    t_p: float = 1.0,
    intra_delay: float = 1.2,
    inter_step_gap: float = 6.0,
    g1: float = 25.0,
    g2: float = 25.0,
    phases: dict | None = None,
    pad: float = 5.0,
) -> Schedule:
    """Assemble one of the named protocols.

    Parameters
    ----------
    protocol : {"swap8", "swap7", "cnot11"}
    omega_max : float
        Peak Rabi frequency shared by every laser pulse.
    t_p : float
        Gaussian width; ``intra_delay``, ``inter_step_gap`` and ``pad`` are
        in units of ``t_p``.
    intra_delay : float
        Stokes-to-pump peak separation within a step.
    inter_step_gap : float
        Separation between consecutive step centres.
    g1, g2 : float
        Constant cavity couplings of atoms 1 and 2.
    phases : dict, optional
        ``{pulse name: phase}`` overrides, e.g. ``{"Oae(1)@1": 0.3}``.
        Names are listed by ``[p.name for p in schedule.pulses]``.
    pad : float
        Window margin before the first and after the last peak.
    """
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; expected one of {', '.join(PROTOCOLS)}")
    if not omega_max >= 0:
        raise ValueError(f"omega_max must be non-negative, got {omega_max}")
    for name, value in (("t_p", t_p), ("intra_delay", intra_delay),
                        ("inter_step_gap", inter_step_gap), ("pad", pad)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value}")
    if g1 < 0 or g2 < 0:
        raise ValueError("cavity couplings must be non-negative")
    if omega_max > 0 and min(g1, g2) <= omega_max:
        warnings.warn(
            f"cavity coupling min(g1, g2)={min(g1, g2)} does not exceed omega_max={omega_max}; "
            "photon components of the dark states will not be small",
            stacklevel=2,
        )

    if protocol.startswith("swap"):
        table, labels = _SWAP_STEPS, ["1", "2", "3", "4"]
        default_phases: dict = {}
    else:
        table, labels = _CNOT_STEPS, ["A", "B", "C", "D", "E", "F"]
        default_phases = dict(_CNOT_DEFAULT_PHASES)
    merge = protocol in ("swap7", "cnot11")

    # (atom, transition, first step, last step, t_first_peak, t_last_peak)
    plan: list[list] = []
    step_refs = []
    for k, ((tr_s, atom_s), (tr_p, atom_p)) in enumerate(table):
        center = k * inter_step_gap * t_p
        ts, tp_ = center - 0.5 * intra_delay * t_p, center + 0.5 * intra_delay * t_p
        prev = plan[-1] if plan else None
        if merge and prev is not None and prev[0] == atom_s and prev[1] == tr_s and prev[3] == k - 1:
            prev[3], prev[5] = k, ts
            s_idx = len(plan) - 1
        else:
            plan.append([atom_s, tr_s, k, k, ts, ts])
            s_idx = len(plan) - 1
        plan.append([atom_p, tr_p, k, k, tp_, tp_])
        step_refs.append((s_idx, len(plan) - 1, ts, tp_))

    overrides = dict(default_phases)
    overrides.update(phases or {})
    pulses = []
    for atom, tr, k0, k1, t0, t1 in plan:
        name = _pulse_name(atom, tr, labels[k0:k1 + 1])
        env = PulseEnvelope(omega_max, 0.5 * (t0 + t1), t_p, t1 - t0)
        pulses.append(Pulse(env, atom, Transition(tr), float(overrides.pop(name, 0.0)), name))
    if overrides.keys() - set(default_phases):
        raise ValueError(f"phases given for unknown pulses: {sorted(overrides.keys() - set(default_phases))}")

    steps = tuple(
        Step(pulses[i], pulses[j], ts, tp_, labels[k]) for k, (i, j, ts, tp_) in enumerate(step_refs)
    )
    t_start = min(p.envelope.rise for p in pulses) - pad * t_p
    t_end = max(p.envelope.fall for p in pulses) + pad * t_p
    params = dict(protocol=protocol, omega_max=omega_max, t_p=t_p, intra_delay=intra_delay,
                  inter_step_gap=inter_step_gap, g1=g1, g2=g2, pad=pad)
    return Schedule(steps, float(g1), float(g2), float(t_start), float(t_end), float(t_p), protocol, params)


@dataclass
class StepDiagnostics:
    label: str
    ordering_ok: bool
    delay: float
    overlap_with_next: float


@dataclass
class ScheduleReport:
    steps: list[StepDiagnostics]
    omega_max_tp: float
    g_tp: float
    flags: list[str]

    @property
    def ok(self) -> bool:
        return not self.flags


def _overlap(p: PulseEnvelope, q: PulseEnvelope, t: np.ndarray) -> float:
    a, b = p(t), q(t)
    denom = math.sqrt(np.trapezoid(a * a, t) * np.trapezoid(b * b, t))
    return float(np.trapezoid(a * b, t) / denom) if denom > 0 else 0.0


def schedule_diagnostics(s: Schedule, min_area: float = 5.0) -> ScheduleReport:
    """Check ordering, step separation and adiabaticity products.

    ``overlap_with_next`` is the largest normalized envelope overlap
    ``int p q dt / sqrt(int p^2 int q^2)`` between a pulse of this step and a
    distinct pulse of the next step (fused pulses are skipped).
    """
    t = np.linspace(s.t_start, s.t_end, 20001)
    flags: list[str] = []
    reports = []
    for k, step in enumerate(s.steps):
        ordering_ok = step.t_stokes < step.t_pump
        if not ordering_ok:
            flags.append(f"ordering: step {step.label} has its pump pulse before its stokes pulse")
        overlap = 0.0
        if k + 1 < len(s.steps):
            for p in step.pulses:
                for q in s.steps[k + 1].pulses:
                    if p is not q:
                        overlap = max(overlap, _overlap(p.envelope, q.envelope, t))
        reports.append(StepDiagnostics(step.label, ordering_ok, step.delay, overlap))

    omega_tp = s.omega_max * s.t_p
    g_tp = min(s.g1, s.g2) * s.t_p
    if omega_tp < min_area:
        flags.append(f"adiabaticity: omega_max*Tp={omega_tp:g} < {min_area:g}")
    if min(s.g1, s.g2) <= s.omega_max:
        flags.append(f"cavity: g={min(s.g1, s.g2):g} <= omega_max={s.omega_max:g}")
    return ScheduleReport(reports, omega_tp, g_tp, flags)
