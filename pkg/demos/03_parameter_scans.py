"""
How robust is the SWAP?
=======================

Three scans around the reference point:

* peak Rabi frequency: the pulse area controls adiabaticity;
* Stokes-pump delay: too short and the pulses act together, too long and
  they barely overlap;
* cavity coupling: larger g keeps the photon admixture Om/g small.
"""
from cavityswap.gateanalysis import parameter_scan

for axes in ({"omega_max_tp": [2, 5, 8, 10, 12, 20]},
             {"intra_delay": [0.8, 1.0, 1.2, 1.4, 1.6]},
             {"g_tp": [25, 50, 100]}):
    (name, values), = axes.items()
    print(f"--- scan over {name}")
    for row in parameter_scan("swap8", axes, workers=2):
        print(f"{name}={row[name]:6.2f}  fidelity {row['fidelity']:.6f}  max P_e {row['max_e_population']:.4f}  "
              f"max <n> {row['max_photon_number']:.4f}")
