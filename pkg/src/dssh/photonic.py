"""
Four-sublattice bosonic chain and adiabatic elimination of its lossy mediator modes.

Slow modes ``b_i``, ``c_i`` talk only through fast, strongly damped modes
``a_i`` and ``d_i``: ``b_i`` couples to ``a_i`` and ``d_(i-1)`` with strength
``g``, ``c_i`` to ``a_i`` and ``d_i`` with ``-g``.  Removing the fast modes by a
Schur complement leaves the dissipative chain with ``Gamma_i = g^2 / kappa_i``.

All matrices generate ``x' = -i M x`` in the frame rotating at
``w_a + (Delta_1 + Delta_2) / 2``, where ``Delta_1``, ``Delta_2`` are the
detunings of ``b`` and ``c`` from the mediator frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from dssh.hamiltonians import Boundary, LatticeParams, ModelKind, bloch, pbc_momenta

# decay rates enter as -i * AMPLITUDE_DECAY * rate; 1 means kappa is the
# amplitude decay rate, which is what makes Gamma_i = g^2 / kappa_i exact
AMPLITUDE_DECAY = 1.0
WEAK_COUPLING_RATIO = 0.05


@dataclass(frozen=True)
class PhotonicParams:
    n_cells: int = 25
    g: float = 0.01
    kappa1: float = 1.0
    kappa2: float = 0.5
    gamma: float = 0.0
    delta1: float = 0.0
    delta2: float = 0.0
    g_mag: float = 0.0
    alpha: float = 0.0
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if isinstance(self.n_cells, bool) or int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValueError(f"n_cells must be a positive integer, got {self.n_cells!r}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        for name in ("g", "kappa1", "kappa2", "gamma", "delta1", "delta2", "g_mag", "alpha"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.kappa1 > self.kappa2 > 0:
            raise ValueError(f"need kappa1 > kappa2 > 0, got {self.kappa1}, {self.kappa2}")
        if self.gamma < 0 or self.g_mag < 0:
            raise ValueError("gamma and g_mag must be non-negative")

    @property
    def weak_coupling(self) -> bool:
        fast = min(self.kappa1, self.kappa2)
        slow = max(abs(self.g), self.g_mag, self.gamma, abs(self.delta1), abs(self.delta2))
        return slow <= WEAK_COUPLING_RATIO * fast

    def effective(self) -> LatticeParams:
        """Lattice parameters of the chain left after elimination."""
        return LatticeParams(
            n_cells=self.n_cells,
            gamma1=self.g**2 / self.kappa1,
            gamma2=self.g**2 / self.kappa2,
            gamma=self.gamma,
            delta1=self.delta1,
            delta2=self.delta2,
            g_mag=self.g_mag,
            alpha=self.alpha,
            boundary=self.boundary,
        )

    def with_(self, **changes) -> "PhotonicParams":
        return replace(self, **changes)


def slow_fast_indices(n_cells: int):
    """Index sets of ``(b_1, c_1, ..., b_N, c_N)`` and ``(a_1, d_1, ..., a_N, d_N)``."""
    return np.arange(2 * n_cells), np.arange(2 * n_cells, 4 * n_cells)


def build_full_linear(params: PhotonicParams) -> np.ndarray:
    """Generator of the linear amplitude dynamics of all ``4N`` modes.

    Ordering ``(b_1, c_1, ..., b_N, c_N, a_1, d_1, ..., a_N, d_N)``.  Under
    periodic boundaries ``b_1`` couples to ``d_N``; under open boundaries
    that bond is absent and ``d_N`` hangs off ``c_N`` alone.
    """
    p = params
    n = p.n_cells
    m = np.zeros((4 * n, 4 * n), dtype=complex)
    mean = 0.5 * (p.delta1 + p.delta2)
    dbar = 0.5 * (p.delta1 - p.delta2)
    coh = p.g_mag * np.exp(1j * p.alpha)
    for i in range(n):
        b, c = 2 * i, 2 * i + 1
        a, d = 2 * n + 2 * i, 2 * n + 2 * i + 1
        m[b, b] = dbar - 1j * AMPLITUDE_DECAY * p.gamma
        m[c, c] = -dbar - 1j * AMPLITUDE_DECAY * p.gamma
        m[a, a] = -mean - 1j * AMPLITUDE_DECAY * p.kappa1
        m[d, d] = -mean - 1j * AMPLITUDE_DECAY * p.kappa2
        m[b, c] += coh
        m[c, b] += np.conj(coh)
        bonds = [(b, a, p.g), (c, a, -p.g), (c, d, -p.g)]
        if i > 0 or p.boundary is Boundary.PERIODIC:
            bonds.append((b, 2 * n + 2 * ((i - 1) % n) + 1, p.g))
        for s, f, amp in bonds:
            m[s, f] += amp
            m[f, s] += amp
    return m


def adiabatic_eliminate(m_full, slow_indices, fast_indices, omega: float = 0.0) -> np.ndarray:
    """Schur complement ``M_ss - M_sf (M_ff - omega)^-1 M_fs``.

    ``omega = 0`` is the zeroth-order elimination at the centre of the slow
    band; passing the slow eigenvalue instead gives the exact
    frequency-dependent reduction.
    """
    m = np.asarray(m_full, dtype=complex)
    s = np.asarray(slow_indices)
    f = np.asarray(fast_indices)
    mff = m[np.ix_(f, f)] - omega * np.eye(len(f))
    if len(f) == 0:
        return m[np.ix_(s, s)].copy()
    if np.linalg.cond(mff) > 1e14:
        raise np.linalg.LinAlgError("fast block is singular; nothing to eliminate against")
    return m[np.ix_(s, s)] - m[np.ix_(s, f)] @ np.linalg.solve(mff, m[np.ix_(f, s)])


def bloch_blocks(m_eff, n_cells: int, ks) -> np.ndarray:
    """2x2 Bloch matrices of a translation-invariant periodic chain matrix.

    ``H_k[s, t] = sum_m M[(0, s), (m, t)] exp(i k m)`` with the cell offset
    ``m`` folded into ``(-N/2, N/2]``; exact for any ``k`` when the hopping
    range is shorter than ``N/2`` and at ``k = 2 pi n / N`` always.
    """
    m_eff = np.asarray(m_eff)
    row = m_eff[:2].reshape(2, n_cells, 2)
    offs = np.arange(n_cells)
    offs = np.where(offs <= n_cells // 2, offs, offs - n_cells)
    ks = np.atleast_1d(np.asarray(ks, dtype=float))
    phase = np.exp(1j * np.outer(ks, offs))
    return np.einsum("kn,snt->kst", phase, row)


class EliminationReport(NamedTuple):
    max_abs_error: float
    max_rel_error: float
    table: list


def effective_bloch_error(params: PhotonicParams, n_k: int = 64) -> EliminationReport:
    """Compare the eliminated chain with the closed-form non-reciprocal Bloch matrix.

    Returns the largest entrywise deviation, the same divided by the largest
    analytic entry, and rows ``(k, entry, numeric, analytic, abs_err)`` with
    ``entry`` one of ``bb``, ``bc``, ``cb``, ``cc``.  Chains shorter than
    three cells are compared on their own allowed momenta only.
    """
    p = params
    if p.boundary is not Boundary.PERIODIC:
        raise ValueError("effective_bloch_error needs a periodic chain")
    n = p.n_cells
    s, f = slow_fast_indices(n)
    m_eff = adiabatic_eliminate(build_full_linear(p), s, f)
    ks = 2 * np.pi * np.arange(n_k) / n_k if n >= 3 else pbc_momenta(n)
    num = bloch_blocks(m_eff, n, ks)
    eff = p.effective()
    names = ("bb", "bc", "cb", "cc")
    table = []
    worst = 0.0
    scale = 0.0
    for k, blk in zip(ks, num):
        ana = bloch(ModelKind.NONRECIPROCAL_DSSH, eff, float(k))
        scale = max(scale, float(np.max(np.abs(ana))))
        for idx, name in enumerate(names):
            i, j = divmod(idx, 2)
            err = abs(blk[i, j] - ana[i, j])
            worst = max(worst, err)
            table.append((float(k), name, complex(blk[i, j]), complex(ana[i, j]), float(err)))
    return EliminationReport(worst, worst / scale if scale else 0.0, table)


def fitted_rates(m_eff, n_cells: int) -> tuple[float, float]:
    """Read ``(Gamma_1, Gamma_2)`` off an eliminated chain matrix.

    ``Gamma_1`` is ``Im(M[b, c] + M[c, b]) / 2`` in the first cell, which
    removes the coherent part ``G``; ``Gamma_2`` averages the two
    directions of the ``c_1``-``b_2`` bond.
    """
    if n_cells < 2:
        raise ValueError("a single cell lumps both bonds together; need n_cells >= 2")
    m = np.asarray(m_eff)
    g1 = 0.5 * (m[0, 1] + m[1, 0]).imag
    g2 = 0.5 * (m[1, 2] + m[2, 1]).imag
    return float(g1), float(g2)
