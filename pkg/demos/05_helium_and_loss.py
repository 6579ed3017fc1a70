"""
Metastable helium: orders of magnitude and losses
=================================================

For the 2^3S_1 - 2^3P_0 line at I = 1e4 W/cm^2 and Tp = 1 ns, the Rabi
frequency is about 1e10 1/s, so Omega Tp = 10. The decay rate is
1e7 1/s, so Gamma Tp = 0.01. The Stark shift stays at S Tp ~ 1e-3.

The simulation then adds decay as an anti-Hermitian term:
-i/2 (Gamma_e N_e + Gamma_u N_u + kappa n). The norm lost over one gate
bounds the failure probability.
"""
from cavityswap import LossParams, build_schedule, evaluate_gate, physical_estimates

est = physical_estimates(intensity=1e4, t_p=1e-9)
for key, value in est.to_dict().items():
    print(f"{key:>16}: {value:.3g}")

loss = LossParams(gamma_e=0.01, gamma_u=0.01, kappa=0.01)
for protocol in ("swap8", "swap7", "cnot11"):
    r = evaluate_gate(build_schedule(protocol), loss=loss)
    print(f"{protocol}: norm loss {r.norm_loss:.4f}, fidelity {r.fidelity:.4f}")
