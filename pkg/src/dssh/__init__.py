"""Dissipatively coupled SSH lattices: spectra, topology, edge states and realizations."""

from dssh import circuit, edgeskin, photonic, topology
from dssh.hamiltonians import (
    Boundary,
    ChainTermination,
    LatticeParams,
    ModelKind,
    bloch,
    build_dssh,
    build_hermitian_ssh,
    build_model,
    build_nonreciprocal,
)
from dssh.spectral import (
    DefectiveMatrixError,
    DefectiveMatrixWarning,
    Spectrum,
    band_sweep,
    eig_biorthogonal,
    eigenvalues,
    gamma_r_modes,
)

__all__ = [
    "circuit",
    "edgeskin",
    "photonic",
    "topology",
    "Boundary",
    "ChainTermination",
    "LatticeParams",
    "ModelKind",
    "bloch",
    "build_dssh",
    "build_hermitian_ssh",
    "build_model",
    "build_nonreciprocal",
    "DefectiveMatrixError",
    "DefectiveMatrixWarning",
    "Spectrum",
    "band_sweep",
    "eig_biorthogonal",
    "eigenvalues",
    "gamma_r_modes",
]

__version__ = "0.1.0"
