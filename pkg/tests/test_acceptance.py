"""Acceptance criteria, one test each. Every test records a PASS/FAIL line
(echoed in the terminal summary) before asserting."""
import dataclasses
import time

import numpy as np
import pytest
from scipy.linalg import null_space

from conftest import CRITERIA
from oracles import LOWER, snapshot_schedule

from cavityswap import cli
from cavityswap.darkstates import StepRoles, dark7, dark16, kernel_residual
from cavityswap.gateanalysis import evaluate_gate
from cavityswap.hamiltonian import assemble
from cavityswap.hilbert import block_partition, build_basis
from cavityswap.propagator import default_grid, gate_matrix, propagate
from cavityswap.pulses import Step, build_schedule


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
    CRITERIA.append(line)
    print(line)
    assert ok, line


def test_criterion_01_reference_swap(swap8, basis, swap8_result):
    p = np.abs(swap8_result.gate.matrix) ** 2
    runtimes = []
    for label in ("00;0", "01;0", "10;0", "11;0"):
        t0 = time.perf_counter()
        propagate(basis.ket(label), swap8)
        runtimes.append(time.perf_counter() - t0)
    ok = (p[0, 0] >= 0.999 and p[3, 3] >= 0.999 and p[2, 1] >= 0.99 and p[1, 2] >= 0.99
          and max(runtimes) < 10.0)
    record(1, "reference swap8 populations and runtime", ok,
           f"P00={p[0, 0]:.6f} P11={p[3, 3]:.6f} P(01->10)={p[2, 1]:.6f} P(10->01)={p[1, 2]:.6f}, "
           f"max runtime {max(runtimes):.2f}s per state")


def test_criterion_02_block_sizes():
    parts = block_partition(build_basis(3), max_photons=2)
    sizes = (len(parts[0]), len(parts[-1]), len(parts[-2]))
    record(2, "charge blocks with n <= 2", sizes == (16, 7, 1), f"sizes {sizes}")


def test_criterion_03_dark_kernels(rng):
    b = build_basis(3)
    worst = 0.0
    outside = 0.0
    for _ in range(100):
        l1, l2 = rng.choice(["0", "a"], 2)
        w1, w2 = rng.uniform(0.1, 30, 2) * np.exp(1j * rng.uniform(-np.pi, np.pi, 2))
        g1, g2 = rng.uniform(1, 60, 2)
        h = assemble(b, snapshot_schedule(l1, l2, w1, w2, g1, g2), 0.0).matrix
        parts = block_partition(b)
        roles = StepRoles(LOWER[l1], LOWER[l2])
        vecs = [(parts[-1], dark7(roles, w1, w2, g1, g2, b))]
        vecs += [(parts[0], v) for v in dark16(roles, w1, w2, g1, g2, b)]
        for idx, v in vecs:
            hb, x = h[np.ix_(idx, idx)], v.amplitudes[idx]
            worst = max(worst, kernel_residual(hb, x))
            ns = null_space(hb, rcond=1e-10)  # independent oracle
            outside = max(outside, np.linalg.norm(x - ns @ (ns.conj().T @ x)))
    record(3, "analytic dark vectors in block null spaces (100 samples)", worst <= 1e-10 and outside <= 1e-10,
           f"max relative residual {worst:.2e}, max distance from oracle null space {outside:.2e}")


def test_criterion_04_phases(swap8_steps):
    dyn = max(np.abs(a.report.dynamical_phases).max() for a in swap8_steps)
    geo = max(np.abs(a.report.geometric_phases).max() for a in swap8_steps)
    record(4, "dynamical and geometric phases per step", dyn <= 1e-8 and geo <= 1e-4,
           f"max |dynamical| {dyn:.2e}, max |geometric| {geo:.2e} rad")


def test_criterion_05_gate_matrices(swap8_result, swap7_result):
    diff = np.linalg.norm(swap8_result.gate.anchored() - swap7_result.gate.anchored(), axis=0)
    ok = swap8_result.fidelity >= 0.99 and swap7_result.fidelity >= 0.99 and diff.max() <= 1e-2
    record(5, "swap8/swap7 fidelity and column agreement", ok,
           f"F8={swap8_result.fidelity:.6f} F7={swap7_result.fidelity:.6f}, max column difference {diff.max():.2e}")


def test_criterion_06_exposure(swap8_result):
    photons = [swap8_result.max_photon_number]
    for g in (50.0, 100.0):
        photons.append(evaluate_gate(build_schedule("swap8", g1=g, g2=g)).max_photon_number)
    monotone = photons[0] > photons[1] > photons[2]
    ok = swap8_result.max_e_population <= 0.05 and swap8_result.max_photon_number <= 0.2 and monotone
    record(6, "excited-state and photon exposure", ok,
           f"max P_e={swap8_result.max_e_population:.4f}, max <n>={swap8_result.max_photon_number:.4f}, "
           f"<n> at g/Omega=2.5,5,10: {', '.join(f'{x:.4f}' for x in photons)}")


def test_criterion_07_loss(swap8_lossy_result):
    loss = swap8_lossy_result.norm_loss
    record(7, "norm loss with Gamma Tp = kappa Tp = 0.01", loss <= 0.02, f"max norm loss {loss:.4f}")


def test_criterion_08_counterintuitive_order(swap8, basis):
    step = swap8.steps[2]
    env = dataclasses.replace
    stokes = env(step.stokes, envelope=env(step.stokes.envelope, t_center=step.pump.envelope.t_center))
    pump = env(step.pump, envelope=env(step.pump.envelope, t_center=step.stokes.envelope.t_center))
    reversed_step = Step(stokes, pump, step.t_pump, step.t_stokes, step.label)
    normal = propagate(basis.ket("a1;0"), swap8.isolated_step(2)).final.population("1a;0")
    rev = propagate(basis.ket("a1;0"), swap8.with_steps([reversed_step]).isolated_step(0)).final.population("1a;0")
    record(8, "reversed pulse order in step 3", rev < 0.5 and normal > 0.99,
           f"transfer a1->1a: counterintuitive {normal:.6f}, reversed {rev:.4f}")


def test_criterion_09_helium_estimates(capsys):
    rc = cli.main(["estimate", "--intensity", "1e4", "--tp", "1e-9"])
    out = dict(line.split() for line in capsys.readouterr().out.splitlines())
    rabi, stark_phase = float(out["rabi"]), float(out["stark_phase"])
    ok = rc == 0 and 0.5e10 <= rabi <= 2e10 and 0.5e-3 <= stark_phase <= 2e-3
    record(9, "helium order-of-magnitude estimates", ok, f"Omega={rabi:.3g} 1/s, S*Tp={stark_phase:.3g}")


def test_criterion_10_cnot(cnot11, cnot_result):
    counts = (len(cnot11.pulses), len(cnot11.steps))
    ok = counts == (11, 6) and cnot_result.fidelity >= 0.98
    record(10, "cnot11 truth table", ok, f"pulses/steps {counts}, fidelity {cnot_result.fidelity:.6f}")


def test_criterion_11_numerics_hygiene(swap8, basis, swap8_result):
    drift = max(np.abs(t.norms - 1).max() for t in swap8_result.gate.trajectories)
    grid = default_grid(swap8)
    fine = gate_matrix(swap8, grid.refined(2))
    dt_change = max(np.abs(a.final.populations - b.final.populations).max()
                    for a, b in zip(swap8_result.gate.trajectories, fine.trajectories))
    psi = basis.superposition({lbl: 0.5 for lbl in ("00;0", "01;0", "10;0", "11;0")})
    traj = propagate(psi, swap8, store_states=True)
    parts = block_partition(basis)
    w0 = {c: np.sum(np.abs(psi.amplitudes[idx]) ** 2) for c, idx in parts.items()}
    leak = max(np.abs(np.sum(np.abs(traj.states[:, idx]) ** 2, axis=1) - w0[c]).max() for c, idx in parts.items())
    ok = drift <= 1e-8 and dt_change < 1e-8 and leak <= 1e-12
    record(11, "norm drift, dt-halving, charge-block leakage", ok,
           f"norm drift {drift:.2e}, dt-halving change {dt_change:.2e}, block leakage {leak:.2e}")
