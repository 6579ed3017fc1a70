"""
Run configuration (JSON). Every field defaults to the reference setting:
Omega_max Tp = 10, g Tp = 25, intra-step delay 1.2 Tp, lossless.

All times are in units of Tp and all rates in units of 1/Tp.

Example::

    {
      "protocol": "swap8",
      "omega_max_tp": 10.0,
      "g1_tp": 25.0, "g2_tp": 25.0,
      "intra_delay": 1.2,
      "inter_step_gap": 6.0,
      "phases": {},
      "n_max": 3,
      "gamma_e": 0.0, "gamma_u": 0.0, "kappa": 0.0,
      "dt": null, "stride": 10,
      "initial": "01;0",
      "target": null,
      "min_fidelity": null,
      "scan": {"omega_max_tp": [2, 5, 10, 20]},
      "workers": 1,
      "schedule": null
    }

``initial`` is a basis label or a ``{label: [re, im]}`` amplitude map.
``schedule`` optionally replaces the named protocol by an explicit pulse
list in the format of :meth:`Schedule.to_dict`.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .gateanalysis import SCAN_AXES, TARGETS, default_target
from .hamiltonian import LossParams
from .hilbert import Basis, BasisState, StateVector
from .pulses import PROTOCOLS, Schedule, build_schedule


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class RunConfig:
    protocol: str = "swap8"
    omega_max_tp: float = 10.0
    g1_tp: float = 25.0
    g2_tp: float = 25.0
    intra_delay: float = 1.2
    inter_step_gap: float = 6.0
    phases: dict = field(default_factory=dict)
    n_max: int = 3
    include_u: bool | None = None
    gamma_e: float = 0.0
    gamma_u: float = 0.0
    kappa: float = 0.0
    dt: float | None = None
    stride: int = 10
    initial: str | dict = "01;0"
    target: str | None = None
    min_fidelity: float | None = None
    scan: dict = field(default_factory=dict)
    workers: int = 1
    schedule: dict | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"field 'protocol': {self.protocol!r} is not one of {', '.join(PROTOCOLS)}")
        for name in ("omega_max_tp", "g1_tp", "g2_tp", "gamma_e", "gamma_u", "kappa"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v >= 0:
                raise ConfigError(f"field '{name}': expected a non-negative number, got {v!r}")
        for name in ("intra_delay", "inter_step_gap"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(f"field '{name}': expected a positive number, got {v!r}")
        if self.dt is not None and (isinstance(self.dt, bool) or not isinstance(self.dt, (int, float))
                                    or not self.dt > 0):
            raise ConfigError(f"field 'dt': expected a positive number or null, got {self.dt!r}")
        if not isinstance(self.n_max, int) or isinstance(self.n_max, bool) or self.n_max < 2:
            raise ConfigError(f"field 'n_max': expected an integer >= 2, got {self.n_max!r}")
        if not isinstance(self.stride, int) or isinstance(self.stride, bool) or self.stride < 1:
            raise ConfigError(f"field 'stride': expected a positive integer, got {self.stride!r}")
        if not isinstance(self.phases, dict):
            raise ConfigError("field 'phases': expected an object {pulse name: phase}")
        if self.target is not None and self.target not in TARGETS:
            raise ConfigError(f"field 'target': {self.target!r} is not one of {', '.join(TARGETS)}")
        if not isinstance(self.scan, dict):
            raise ConfigError("field 'scan': expected an object {axis: [values]}")
        bad = set(self.scan) - set(SCAN_AXES)
        if bad:
            raise ConfigError(f"field 'scan': unknown axes {sorted(bad)}; allowed {', '.join(SCAN_AXES)}")
        if len(self.scan) > 3:
            raise ConfigError("field 'scan': at most three axes")
        for axis, values in self.scan.items():
            if not isinstance(values, list) or not all(isinstance(v, (int, float)) for v in values):
                raise ConfigError(f"field 'scan.{axis}': expected a list of numbers")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("field 'workers': expected a positive integer")
        if not isinstance(self.initial, (str, dict)):
            raise ConfigError("field 'initial': expected a basis label or {label: [re, im]}")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown field(s) {sorted(unknown)}; allowed: {', '.join(sorted(known))}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_json(text)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def loss(self) -> LossParams:
        return LossParams(self.gamma_e, self.gamma_u, self.kappa)

    @property
    def schedule_params(self) -> dict:
        return dict(omega_max=self.omega_max_tp, t_p=1.0, intra_delay=self.intra_delay,
                    inter_step_gap=self.inter_step_gap, g1=self.g1_tp, g2=self.g2_tp)

    def build_schedule(self) -> Schedule:
        try:
            if self.schedule is not None:
                return Schedule.from_dict(self.schedule)
            return build_schedule(self.protocol, phases=self.phases, **self.schedule_params)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"field 'schedule'/'phases': {exc}") from None

    @property
    def target_name(self) -> str:
        return self.target or default_target(self.protocol)

    @property
    def fidelity_threshold(self) -> float:
        if self.min_fidelity is not None:
            return self.min_fidelity
        return 0.98 if self.target_name == "cnot" else 0.99

    def initial_state(self, basis: Basis) -> StateVector:
        try:
            if isinstance(self.initial, str):
                return basis.ket(BasisState.from_label(self.initial))
            coeffs = {}
            for label, amp in self.initial.items():
                coeffs[label] = complex(*amp) if isinstance(amp, (list, tuple)) else complex(amp)
            return basis.superposition(coeffs)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"field 'initial': {exc}") from None
