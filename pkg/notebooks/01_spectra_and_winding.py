"""
Spectra and winding numbers
===========================

Open and periodic spectra of the three chain families, then the winding
number of the Bloch eigenvectors on either side of the band touching.
Run with ``python notebooks/01_spectra_and_winding.py``.
"""

import numpy as np

from dssh.hamiltonians import LatticeParams, ModelKind, build_model
from dssh.spectral import band_sweep, eig_biorthogonal, gamma_r_modes
from dssh.topology import winding_number

# Hermitian SSH: two zero modes when the intra-cell hopping is the weaker one
for t1 in (0.5, 1.5):
    p = LatticeParams(n_cells=25, t1=t1, t2=1.0)
    w = np.linalg.eigvalsh(build_model(ModelKind.HERMITIAN_SSH, p))
    print(f"hermitian t1={t1}: {np.sum(np.abs(w) < 1e-6)} zero modes")

# dissipative chain: the edge modes sit at -i Gamma_r instead of zero
p = LatticeParams(n_cells=25, gamma1=0.5, gamma2=2.0, gamma=3.0)
spec = eig_biorthogonal(build_model(ModelKind.DSSH, p))
print(f"dssh Gamma_r={p.gamma_r}: modes at -i Gamma_r ->", gamma_r_modes(spec, p.gamma_r, 1e-6))
print("largest eigenvalue condition number:", spec.condition.max())

# periodic bands from the Bloch matrix
sweep = band_sweep(ModelKind.DSSH, p, 256)
j = int(np.argmin(sweep.gap))
print(f"smallest Bloch gap {sweep.gap[j]:.3f} at k={sweep.k[j]:.3f}")

# the winding number flips where |Gamma1| crosses |Gamma2|
for g1 in (0.5, 1.0 - 1e-3, 1.0 + 1e-3, 3.0):
    r = winding_number(ModelKind.DSSH, p.with_(gamma1=g1, gamma2=1.0))
    print(f"gamma1={g1:6.3f}  nu={r.nu:+.6f}  closure residual={r.residual:.1e}")
