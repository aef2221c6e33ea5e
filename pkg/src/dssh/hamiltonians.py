"""
Real-space and Bloch matrices for the four SSH lattice families.

Sites are ordered cell by cell, ``(A1, B1, A2, B2, ...)``; for the
non-reciprocal chain the two sublattices are called ``b`` and ``c`` but
occupy the same slots.  The lattice constant is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class ModelKind(str, Enum):
    HERMITIAN_SSH = "hermitian_ssh"
    DSSH = "dssh"
    ANTIPT_DSSH = "antipt_dssh"
    NONRECIPROCAL_DSSH = "nonreciprocal_dssh"


class ChainTermination(str, Enum):
    """Which sites the open chain keeps.

    ``FULL`` is the 2N-site chain, ``BROKEN_B`` drops the last ``c`` site
    (the chain ends on ``b`` at both sides) and ``BROKEN_C`` drops the
    first ``b`` site.
    """

    FULL = "full"
    BROKEN_B = "broken_b"
    BROKEN_C = "broken_c"


@dataclass(frozen=True)
class LatticeParams:
    """Scalar parameters shared by all lattice families.

    Parameters
    ----------
    n_cells : int
        Number of unit cells N.
    t1, t2 : float
        Coherent intra-/inter-cell hopping of the Hermitian SSH chain.
    gamma1, gamma2 : float
        Dissipative intra-/inter-cell coupling magnitudes.
    gamma : float
        Local decay rate of every site.
    delta1, delta2 : float
        Detunings of the two sublattices.
    g_mag, alpha : float
        Modulus and phase of the coherent intra-cell coupling ``G``.
    boundary : Boundary
    """

    n_cells: int = 25
    t1: float = 0.0
    t2: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    gamma: float = 0.0
    delta1: float = 0.0
    delta2: float = 0.0
    g_mag: float = 0.0
    alpha: float = 0.0
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        if isinstance(self.n_cells, bool) or int(self.n_cells) != self.n_cells:
            raise ValueError(f"n_cells must be an integer, got {self.n_cells!r}")
        if self.n_cells < 1:
            raise ValueError(f"n_cells must be >= 1, got {self.n_cells}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        for name in ("t1", "t2", "gamma1", "gamma2", "gamma", "delta1", "delta2", "g_mag", "alpha"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        for name in ("gamma1", "gamma2", "gamma", "g_mag"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")

    @property
    def gamma_r(self) -> float:
        """Common diagonal damping ``gamma + gamma1 + gamma2``."""
        return self.gamma + self.gamma1 + self.gamma2

    @property
    def delta_bar(self) -> float:
        return 0.5 * (self.delta1 - self.delta2)

    @property
    def coupling(self) -> complex:
        """The coherent coupling ``G = |G| exp(i alpha)``."""
        return self.g_mag * np.exp(1j * self.alpha)

    @property
    def gamma_plus(self) -> complex:
        return self.gamma1 - self.g_mag * math.sin(self.alpha) - 1j * self.g_mag * math.cos(self.alpha)

    @property
    def gamma_minus(self) -> complex:
        return self.gamma1 + self.g_mag * math.sin(self.alpha) - 1j * self.g_mag * math.cos(self.alpha)

    @property
    def z(self) -> complex:
        """Per-cell ratio ``Gamma_- Gamma_+ / Gamma_2**2`` of the edge-state weights."""
        if self.gamma2 == 0:
            raise ValueError("Z is undefined for gamma2 = 0")
        return self.gamma_minus * self.gamma_plus / self.gamma2**2

    def with_(self, **changes) -> "LatticeParams":
        return replace(self, **changes)


def _chain(n_cells, diag_a, diag_b, intra_ab, intra_ba, inter, periodic):
    """Two-sublattice chain with ``H[A_i,B_i] = intra_ab``, ``H[B_i,A_i] = intra_ba``
    and symmetric ``inter`` between ``B_i`` and ``A_{i+1}``."""
    dim = 2 * n_cells
    h = np.zeros((dim, dim), dtype=complex)
    a = np.arange(0, dim, 2)
    b = a + 1
    h[a, a] = diag_a
    h[b, b] = diag_b
    h[a, b] = intra_ab
    h[b, a] = intra_ba
    h[b[:-1], a[1:]] = inter
    h[a[1:], b[:-1]] = inter
    if periodic:
        # for n_cells == 1 the wrap lands on the intra-cell entries and adds to them
        h[b[-1], a[0]] += inter
        h[a[0], b[-1]] += inter
    return h


def build_hermitian_ssh(params: LatticeParams) -> np.ndarray:
    """Coherent SSH chain: ``t1`` inside each cell, ``t2`` between cells, zero diagonal."""
    p = params
    return _chain(p.n_cells, 0.0, 0.0, p.t1, p.t1, p.t2, p.boundary is Boundary.PERIODIC)


def build_dssh(params: LatticeParams) -> np.ndarray:
    """Dissipatively coupled chain with diagonal ``-delta - i gamma_r`` and couplings ``i gamma1``, ``i gamma2``."""
    p = params
    return _chain(
        p.n_cells,
        -p.delta1 - 1j * p.gamma_r,
        -p.delta2 - 1j * p.gamma_r,
        1j * p.gamma1,
        1j * p.gamma1,
        1j * p.gamma2,
        p.boundary is Boundary.PERIODIC,
    )


def build_nonreciprocal(params: LatticeParams, term: ChainTermination = ChainTermination.FULL) -> np.ndarray:
    """Non-reciprocal dissipative chain in the frame rotating at the mean detuning.

    The ``b -> c`` row entry is ``i Gamma_-`` and the ``c -> b`` entry is
    ``i Gamma_+``; ``BROKEN_B`` and ``BROKEN_C`` return the ``2N - 1``
    dimensional chains with ``c_N`` or ``b_1`` removed.
    """
    term = ChainTermination(term)
    p = params
    periodic = p.boundary is Boundary.PERIODIC
    if term is not ChainTermination.FULL and periodic:
        raise ValueError(f"termination {term.value} requires an open boundary")
    h = _chain(
        p.n_cells,
        p.delta_bar - 1j * p.gamma_r,
        -p.delta_bar - 1j * p.gamma_r,
        1j * p.gamma_minus,
        1j * p.gamma_plus,
        1j * p.gamma2,
        periodic,
    )
    if term is ChainTermination.BROKEN_B:
        return h[:-1, :-1].copy()
    if term is ChainTermination.BROKEN_C:
        return h[1:, 1:].copy()
    return h


def build_model(model: ModelKind, params: LatticeParams, term: ChainTermination = ChainTermination.FULL) -> np.ndarray:
    """Real-space matrix of ``model``; the anti-PT family is the non-reciprocal chain at ``G = 0``."""
    model = ModelKind(model)
    if model is ModelKind.HERMITIAN_SSH:
        return build_hermitian_ssh(params)
    if model is ModelKind.DSSH:
        return build_dssh(params)
    if model is ModelKind.ANTIPT_DSSH:
        return build_nonreciprocal(params.with_(g_mag=0.0), term)
    return build_nonreciprocal(params, term)


def bloch(model: ModelKind, params: LatticeParams, k: float) -> np.ndarray:
    """2x2 Bloch matrix of ``model`` at momentum ``k``.

    Uses the same Fourier convention as the real-space builders, so the
    periodic chain's spectrum is the union of ``bloch`` spectra over
    ``k = 2 pi n / N``.
    """
    model = ModelKind(model)
    p = params
    e_m, e_p = np.exp(-1j * k), np.exp(1j * k)
    if model is ModelKind.HERMITIAN_SSH:
        return np.array([[0.0, p.t1 + p.t2 * e_m], [p.t1 + p.t2 * e_p, 0.0]], dtype=complex)
    if model is ModelKind.DSSH:
        return np.array(
            [
                [-p.delta1 - 1j * p.gamma_r, 1j * (p.gamma1 + p.gamma2 * e_m)],
                [1j * (p.gamma1 + p.gamma2 * e_p), -p.delta2 - 1j * p.gamma_r],
            ]
        )
    if model is ModelKind.ANTIPT_DSSH:
        h = 1j * p.gamma1 + 1j * p.gamma2 * e_m
        return np.array(
            [
                [p.delta_bar - 1j * p.gamma_r, h],
                [-np.conj(h), -p.delta_bar - 1j * p.gamma_r],
            ]
        )
    return np.array(
        [
            [p.delta_bar - 1j * p.gamma_r, 1j * p.gamma_minus + 1j * p.gamma2 * e_m],
            [1j * p.gamma_plus + 1j * p.gamma2 * e_p, -p.delta_bar - 1j * p.gamma_r],
        ]
    )


def bloch_grid(model: ModelKind, params: LatticeParams, ks) -> np.ndarray:
    """Stack of Bloch matrices, shape ``(len(ks), 2, 2)``."""
    return np.stack([bloch(model, params, float(k)) for k in np.atleast_1d(ks)])


def pbc_momenta(n_cells: int) -> np.ndarray:
    """The allowed momenta ``2 pi n / N`` of an N-cell ring."""
    return 2 * np.pi * np.arange(n_cells) / n_cells
