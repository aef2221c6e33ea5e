"""
Two physical platforms
======================

An RLC chain with resistive couplings realizes the dissipative coupling
directly: its slow envelope is the dissipative chain matrix shifted to the
resonance frequency.  In a photonic chain, fast auxiliary modes mediate the
coupling; eliminating them leaves the nonreciprocal chain with rates
``g^2 / kappa``.
"""

import warnings

import numpy as np

from dssh import circuit
from dssh.photonic import (
    PhotonicParams,
    adiabatic_eliminate,
    build_full_linear,
    effective_bloch_error,
    fitted_rates,
    slow_fast_indices,
)

# ring down a three-cell circuit after kicking the first node
p = circuit.desk_params(n_cells=3, l2=circuit.desk_params().l1 * 1.002)
m = circuit.build_circuit_system(p)
dt = circuit.default_step(m)
traj = circuit.integrate(m, circuit.unit_kick(p), 30 / p.gamma_c1, dt, stride=4)
rms = circuit.windowed_rms(traj, 6)
print("rms per window:", np.array2string(rms, precision=3))

with warnings.catch_warnings():
    warnings.simplefilter("ignore", circuit.ResolutionWarning)
    poles = circuit.spectral_extract(traj)
for est, env in circuit.match_poles(poles, circuit.envelope_poles(p)):
    print(f"pole: frequency {est.real / p.omega0:.6f} w0 (envelope {env.real / p.omega0:.6f}), "
          f"decay {-est.imag / p.gamma_c1:.5f} (envelope {-env.imag / p.gamma_c1:.5f}) Gamma_c")

# photonic elimination: the residual error falls as g^2
for g in (0.04, 0.02, 0.01):
    q = PhotonicParams(g=g, delta1=g**2, delta2=0.5 * g**2, g_mag=0.5 * g**2, alpha=0.3, gamma=0.1 * g**2)
    print(f"g={g:.2f}  relative Bloch error {effective_bloch_error(q).max_rel_error:.3e}")

q = PhotonicParams(n_cells=4, g=0.01, kappa1=1.0, kappa2=0.5)
s, f = slow_fast_indices(q.n_cells)
g1, g2 = fitted_rates(adiabatic_eliminate(build_full_linear(q), s, f), q.n_cells)
print(f"fitted rates {g1:.3e}, {g2:.3e}; expected {q.g**2 / q.kappa1:.3e}, {q.g**2 / q.kappa2:.3e}")
