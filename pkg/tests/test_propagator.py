import math

import numpy as np
import pytest
from scipy.integrate import quad

from cavityswap.hamiltonian import HamiltonianModel, LossParams
from cavityswap.hilbert import build_basis
from cavityswap.propagator import (PropagationError, TimeGrid, default_grid, gate_matrix, max_time_step, propagate,
                                   propagate_stepwise)
from cavityswap.pulses import Pulse, PulseEnvelope, Schedule, Step, build_schedule


def _single_pulse_schedule(omega, g=0.0, t_p=1.0, span=6.0):
    """One resonant 0-e pulse on atom 1 (atom 2 carries an idle a-e pulse)."""
    p1 = Pulse(PulseEnvelope(omega, 0.0, t_p), 1, "0e", name="drive")
    p2 = Pulse(PulseEnvelope(omega, 0.0, t_p), 2, "ae", name="idle")
    return Schedule((Step(p1, p2, -0.1, 0.1, "x"),), g, g, -span, span, t_p)


@pytest.mark.parametrize("omega", [0.3, 0.9, 2.0])
@pytest.mark.parametrize("method", ["rk4", "magnus4"])
def test_two_level_rabi_oracle(omega, method):
    """Resonant two-level drive: P(ground) = cos^2(pulse area)."""
    s = _single_pulse_schedule(omega)
    b = build_basis(2)
    traj = propagate(b.ket("00;0"), s, default_grid(s, dt=0.005), method=method)
    area, _ = quad(s.pulses[0].envelope, s.t_start, s.t_end)
    assert traj.final.population("00;0") == pytest.approx(math.cos(area) ** 2, abs=1e-9)
    assert traj.final.population("e0;0") == pytest.approx(math.sin(area) ** 2, abs=1e-9)


def test_vacuum_rabi_oracle():
    """Excited atom in an empty cavity: P(e) = cos^2(g t)."""
    g = 1.7
    s = _single_pulse_schedule(0.0, g=g, span=2.0)
    b = build_basis(2)
    traj = propagate(b.ket("e0;0"), s, TimeGrid(s.t_start, s.t_end, 0.001, stride=50))
    tt = traj.times - s.t_start
    assert np.allclose(traj.population("e0;0"), np.cos(g * tt) ** 2, atol=1e-10)
    assert np.allclose(traj.population("10;1"), np.sin(g * tt) ** 2, atol=1e-10)


def test_two_photon_vacuum_rabi_frequency():
    """|e>|1> couples to |1>|2> with g sqrt(2)."""
    g = 1.1
    s = _single_pulse_schedule(0.0, g=g, span=2.0)
    b = build_basis(3)
    traj = propagate(b.ket("e0;1"), s, TimeGrid(s.t_start, s.t_end, 0.001))
    assert traj.final.population("e0;1") == pytest.approx(math.cos(math.sqrt(2) * g * 4.0) ** 2, abs=1e-10)


def test_decay_oracle():
    gamma = 0.4
    s = _single_pulse_schedule(0.0, span=2.5)
    b = build_basis(2)
    traj = propagate(b.ket("e0;0"), s, loss=LossParams(gamma_e=gamma))
    assert np.allclose(traj.norms ** 2, np.exp(-gamma * (traj.times - s.t_start)), rtol=1e-10)
    traj = propagate(b.ket("00;2"), s, loss=LossParams(kappa=gamma))
    assert traj.final.norm ** 2 == pytest.approx(math.exp(-2 * gamma * 5.0), rel=1e-7)  # RK4 truncation


def test_norm_conserved_lossless(swap8_result):
    for t in swap8_result.gate.trajectories:
        assert np.abs(t.norms - 1).max() <= 1e-8


def test_methods_agree_on_a_step(swap8, basis):
    iso = swap8.isolated_step(0)
    a = propagate(basis.ket("10;0"), iso, method="rk4").final.amplitudes
    b = propagate(basis.ket("10;0"), iso, method="magnus4").final.amplitudes
    assert np.abs(a - b).max() < 1e-8


def test_grid_refinement_converges(swap8, basis):
    grid = default_grid(swap8.isolated_step(1))
    a = propagate(basis.ket("01;0"), swap8.isolated_step(1), grid).final.populations
    b = propagate(basis.ket("01;0"), swap8.isolated_step(1), grid.refined(2)).final.populations
    assert np.abs(a - b).max() < 1e-8


def test_time_step_limit(swap8, basis):
    assert max_time_step(swap8) == pytest.approx(min(1.0, 1 / 25, 1 / 10) / 20)
    with pytest.raises(ValueError, match="time step"):
        propagate(basis.ket("01;0"), swap8, default_grid(swap8, dt=0.01))


def test_initial_state_must_be_normalized(swap8, basis):
    psi = basis.superposition({"01;0": 1.0})
    psi = type(psi)(basis, 2 * psi.amplitudes)
    with pytest.raises(ValueError, match="normalized"):
        propagate(psi, swap8)


def test_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(1.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        TimeGrid(0.0, 1.0, -0.1)
    g = TimeGrid(0.0, 1.0, 0.3, stride=2)
    assert g.n_steps == 4 and g.h == pytest.approx(0.25)
    assert list(g.sample_steps()) == [0, 2, 4]


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_non_finite_amplitudes_abort_with_partial_samples(swap8, basis):
    model = HamiltonianModel(basis, swap8, diagonal_shift=np.full(basis.dim, 1e6))
    with pytest.raises(PropagationError) as info:
        propagate(basis.ket("01;0"), swap8, model=model)
    err = info.value
    assert err.t is not None and swap8.t_start < err.t <= swap8.t_end
    assert err.samples is not None and err.samples.shape[0] == len(err.times) >= 1


def test_trajectory_observables(swap8_result):
    traj = swap8_result.gate.trajectories[2]  # |10>|0>
    assert traj.times[0] == pytest.approx(-5.6) and traj.times[-1] > 23
    assert "a1;0" in traj.labels and "1a;0" in traj.labels
    assert traj.populations.shape == (traj.times.size, len(traj.labels))
    assert np.all(traj.u_population == 0)
    assert 0 < traj.photon_number.max() < 0.2


def test_stepwise_factorization_time_split(swap8, basis, swap8_result):
    """Splitting the window between steps reproduces the full evolution."""
    states = propagate_stepwise(basis.ket("10;0"), swap8, isolated=False)
    assert len(states) == 4
    assert np.abs(states[-1].amplitudes - swap8_result.gate.trajectories[2].final.amplitudes).max() < 1e-6
    assert states[0].population("a1;0") > 0.999
    assert states[2].population("1a;0") > 0.999


def test_stepwise_factorization_isolated_steps(swap8, basis, swap8_result):
    """Running each step with only its own pulses ignores neighbouring tails (~1e-5)."""
    states = propagate_stepwise(basis.ket("10;0"), swap8, isolated=True)
    assert np.abs(states[-1].amplitudes - swap8_result.gate.trajectories[2].final.amplitudes).max() < 1e-4


def test_gate_matrix_of_zero_drive_is_identity():
    s = build_schedule("swap8", omega_max=0.0)
    gm = gate_matrix(s)
    assert np.allclose(gm.matrix, np.eye(4), atol=1e-12)
    assert np.allclose(gm.leakage, 0, atol=1e-12)


def test_gate_matrix_anchoring(swap8_result):
    a = swap8_result.gate.anchored()
    assert a[0, 0].real > 0 and abs(a[0, 0].imag) < 1e-12
    assert np.allclose(np.abs(a), np.abs(swap8_result.gate.matrix))
