"""
Dark states of a single step
============================

During a step, atom 1 is driven on L1-e and atom 2 on L2-e, and both
couple to the cavity on 1-e. The Hamiltonian conserves the number of
photons minus the number of atoms in |1>. It splits into blocks: 7 states
for one atom in |1>, 16 for none (up to two photons).

In the 7-block the cavity-mediated dark state is::

    g1 Om2 |L1 1>|0> + g2 Om1 |1 L2>|0> - Om1 Om2 |11>|1>

It rotates |1 L2> into |L1 1> as the pump takes over from the Stokes pulse.
"""
import numpy as np

from cavityswap import analyze_step, build_basis, build_schedule, dark7, kernel_residual
from cavityswap.darkstates import roles_for_step, spectrum_and_gap, step_rabi
from cavityswap.hamiltonian import assemble
from cavityswap.hilbert import block_partition

schedule = build_schedule("swap8")
basis = build_basis()
blocks = block_partition(basis, max_photons=2)
print("block sizes (n <= 2):", {c: len(i) for c, i in blocks.items()})

# %%
# The analytic vector really is annihilated by the 7-state block, along the
# whole of step 1. Only the step's own two pulses are kept: tails of the
# neighbouring step's pulses would otherwise add a small perturbation.
step = schedule.steps[0]
step_only = schedule.isolated_step(0)
roles = roles_for_step(step)
idx = block_partition(basis)[-1]
worst = 0.0
for t in np.linspace(step.t_stokes - 3, step.t_pump + 3, 61):
    h = assemble(basis, step_only, t).matrix[np.ix_(idx, idx)]
    w1, w2 = step_rabi(step, t)
    worst = max(worst, kernel_residual(h, dark7(roles, w1, w2, schedule.g1, schedule.g2, basis).amplitudes[idx]))
print(f"step 1: worst relative residual |H d| / |H| = {worst:.1e}")
gap = spectrum_and_gap(basis, schedule, step.center, -1)
print(f"step 1 centre: {gap.dark_dim} zero modes in the 7-block, gap to the nearest bright state {gap.gap:.2f}/Tp")

# %%
# Track the dark states of each step in isolation. The connection
# <phi|d/dt|phi> and the energy <phi|H|phi> both integrate to zero, so the
# transfer carries no phase.
for k in range(len(schedule.steps)):
    a = analyze_step(schedule, k, basis)
    r = a.report
    moves = [f"{src}->{dst} ({ov:.6f})" for src, dst, ov in zip(r.labels, r.end_labels, r.end_overlaps) if src != dst]
    print(f"step {a.label}: min gap {r.min_gap:.1e}, max |geometric| {np.abs(r.geometric_phases).max():.1e}, "
          f"max |dynamical| {np.abs(r.dynamical_phases).max():.1e}, moves {', '.join(moves)}")
