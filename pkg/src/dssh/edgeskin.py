"""
Edge states of the non-reciprocal chain and skin-effect localization metrics.

Broken chains (one end site removed) carry an exact mode living on a single
sublattice; the two of them glued together give the full-chain pair at
``-i gamma_r``, which becomes exact as N grows when ``|Z| < 1``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from dssh.hamiltonians import Boundary, ChainTermination, LatticeParams, ModelKind, bloch_grid, build_model, build_nonreciprocal
from dssh.spectral import Spectrum, graded_scaling

# moduli of Gamma_+- below this count as zero (maximal non-reciprocity)
NONRECIPROCAL_TOL = 1e-12
CENTROID_THRESHOLD = 0.25
EDGE_FRACTION = 0.1


class DegenerateEdgeStateError(ArithmeticError):
    """The closed-form edge state does not exist for these parameters."""


class SelfOrthogonalError(ArithmeticError):
    """``<L|R> = 0``: the mode sits at an exceptional point."""


class BrokenChainStates(NamedTuple):
    right: np.ndarray
    left: np.ndarray
    z: complex
    norm_product: complex
    eigenvalue: complex


class EdgeStateSet(NamedTuple):
    psi_r_plus: np.ndarray
    psi_r_minus: np.ndarray
    psi_l_plus: np.ndarray
    psi_l_minus: np.ndarray
    r_b: np.ndarray
    l_b: np.ndarray
    r_c: np.ndarray
    l_c: np.ndarray
    z: complex
    norm_product: complex
    residual_norm: float
    eigenstate_valid: bool


class LocalizationReport(NamedTuple):
    center_of_mass: np.ndarray
    edge_weight_left: np.ndarray
    edge_weight_right: np.ndarray
    participation_ratio: np.ndarray

    @property
    def fraction_left(self) -> float:
        """Share of modes whose centroid lies in the left quarter of the chain."""
        return float(np.mean(self.center_of_mass < CENTROID_THRESHOLD))

    def summary(self) -> dict:
        return {
            "n_modes": int(len(self.center_of_mass)),
            "fraction_center_of_mass_below_0.25": self.fraction_left,
            "mean_center_of_mass": float(np.mean(self.center_of_mass)),
            "min_edge_weight_left": float(np.min(self.edge_weight_left)),
            "max_edge_weight_left": float(np.max(self.edge_weight_left)),
            "mean_participation_ratio": float(np.mean(self.participation_ratio)),
        }


def norm_product(z: complex, n_cells: int) -> complex:
    """``N_L^* N_R = Z^(N+1) (1/Z - 1) / (1 - Z^N)``, the inverse of ``sum_{m=1..N} Z^-m``."""
    zn = z**n_cells
    if abs(1 - zn) < 1e-14 or z == 0:
        raise DegenerateEdgeStateError(f"normalization singular: Z = {z}, Z^N = {zn}")
    return z ** (n_cells + 1) * (1 / z - 1) / (1 - zn)


def broken_chain_states(params: LatticeParams, which: ChainTermination) -> BrokenChainStates:
    """Exact single-sublattice mode of a broken chain.

    Parameters
    ----------
    params : LatticeParams
        Open non-reciprocal chain parameters.
    which : ChainTermination
        ``BROKEN_B`` (``c_N`` removed, state on the ``b`` sites) or
        ``BROKEN_C`` (``b_1`` removed, state on the ``c`` sites).

    Returns
    -------
    BrokenChainStates
        Vectors of length ``2N - 1`` with ``<L|R> = 1``.  For ``BROKEN_B``
        the amplitude on ``b_(n+1)`` is ``N_R (-gamma2/Gamma_+)^(N-n)``
        (right) and ``N_L (-gamma2/conj(Gamma_-))^(N-n)`` (left); for
        ``BROKEN_C`` the amplitude on ``c_n`` is ``N_R (-gamma2/Gamma_-)^n``
        and ``N_L (-gamma2/conj(Gamma_+))^n``.  The eigenvalue is
        ``+-delta_bar - i gamma_r``.
    """
    which = ChainTermination(which)
    if which is ChainTermination.FULL:
        raise ValueError("broken_chain_states needs BROKEN_B or BROKEN_C")
    p = params
    gp, gm = p.gamma_plus, p.gamma_minus
    scale = max(p.gamma1, p.g_mag, p.gamma2, 1e-300)
    if abs(gp) < NONRECIPROCAL_TOL * scale or abs(gm) < NONRECIPROCAL_TOL * scale:
        raise DegenerateEdgeStateError("maximally non-reciprocal; analytic state degenerate (Gamma_+ or Gamma_- is zero)")
    if p.gamma2 == 0:
        raise DegenerateEdgeStateError("gamma2 = 0: the chain splits into dimers")
    n = p.n_cells
    z = p.z
    npr = norm_product(z, n)
    nr = np.sqrt(npr)
    nl = np.conj(nr)
    right = np.zeros(2 * n - 1, dtype=complex)
    left = np.zeros(2 * n - 1, dtype=complex)
    if which is ChainTermination.BROKEN_B:
        expo = n - np.arange(n)
        right[0::2] = nr * (-p.gamma2 / gp) ** expo
        left[0::2] = nl * (-p.gamma2 / np.conj(gm)) ** expo
        eig = p.delta_bar - 1j * p.gamma_r
    else:
        expo = np.arange(1, n + 1)
        right[0::2] = nr * (-p.gamma2 / gm) ** expo
        left[0::2] = nl * (-p.gamma2 / np.conj(gp)) ** expo
        eig = -p.delta_bar - 1j * p.gamma_r
    return BrokenChainStates(right, left, z, npr, eig)


def _embed(v, which):
    out = np.zeros(len(v) + 1, dtype=complex)
    if which is ChainTermination.BROKEN_B:
        out[:-1] = v
    else:
        out[1:] = v
    return out


def full_chain_states(params: LatticeParams) -> EdgeStateSet:
    """Edge pair ``psi_+- = (b-state +- c-state) / sqrt(2)`` of the full open chain.

    The pair is an eigenpair at ``-i gamma_r`` only asymptotically; the
    leftover ``||(H + i gamma_r) psi_R||`` is returned as ``residual_norm``
    and shrinks like ``|Z|^(N/2)``.  ``eigenstate_valid`` is ``|Z| < 1``.
    """
    p = params
    if p.delta_bar != 0:
        raise ValueError("the glued edge pair needs delta_bar = 0 (the two sublattice states are not degenerate otherwise)")
    sb = broken_chain_states(p, ChainTermination.BROKEN_B)
    sc = broken_chain_states(p, ChainTermination.BROKEN_C)
    rb, lb = _embed(sb.right, ChainTermination.BROKEN_B), _embed(sb.left, ChainTermination.BROKEN_B)
    rc, lc = _embed(sc.right, ChainTermination.BROKEN_C), _embed(sc.left, ChainTermination.BROKEN_C)
    s = 1 / math.sqrt(2)
    pr, mr = s * (rb + rc), s * (rb - rc)
    pl, ml = s * (lb + lc), s * (lb - lc)
    # the bulk rows of (H + i gamma_r) psi vanish identically (they are the
    # broken-chain eigen-equations); only the rows of the two sites each
    # sublattice state lacks, c_N and b_1, leak.  Evaluating just those rows
    # avoids cancellation noise of order eps * ||psi||, which is huge here.
    h = build_nonreciprocal(p.with_(boundary=Boundary.OPEN)) + 1j * p.gamma_r * np.eye(2 * p.n_cells)
    res = 0.0
    for vec in (pr, mr):
        res = max(res, math.hypot(abs(h[-1] @ vec), abs(h[0] @ vec)))
    return EdgeStateSet(pr, mr, pl, ml, sb.right, sb.left, sc.right, sc.left, sb.z, sb.norm_product, float(res), abs(sb.z) < 1)


def projection_profile(left, right, n_cells: int, term: ChainTermination | None = None) -> np.ndarray:
    """Biorthogonal unit-cell weights ``pi_n = <L|P_n|R> / <L|R>``, ``n = 1..N``.

    Vectors of length ``2N - 1`` belong to a broken chain and need ``term``
    to say which end site is missing; that site contributes nothing.
    The weights always sum to one.
    """
    left = np.asarray(left, dtype=complex)
    right = np.asarray(right, dtype=complex)
    if left.shape != right.shape or left.ndim != 1:
        raise ValueError("left and right must be vectors of equal length")
    dim = len(left)
    if dim == 2 * n_cells - 1:
        if term is None or ChainTermination(term) is ChainTermination.FULL:
            raise ValueError("a 2N-1 dimensional state needs term=BROKEN_B or BROKEN_C")
        term = ChainTermination(term)
        left, right = _embed(left, term), _embed(right, term)
    elif dim != 2 * n_cells:
        raise ValueError(f"vector length {dim} does not fit {n_cells} cells")
    overlap = np.vdot(left, right)
    # sum |L_i R_i| is unchanged by diagonal rescaling, like the profile itself
    if abs(overlap) <= 1e-13 * np.sum(np.abs(left) * np.abs(right)):
        raise SelfOrthogonalError(f"<L|R> = {overlap:.3g}: self-orthogonal mode (exceptional point)")
    cells = (left.conj() * right).reshape(n_cells, 2).sum(axis=1)
    return cells / overlap


def numeric_broken_mode(params: LatticeParams, which: ChainTermination = ChainTermination.BROKEN_B):
    """Numerically computed edge mode of a broken chain.

    The right and left null vectors of ``H - lambda`` (``lambda = +-delta_bar -
    i gamma_r``) are taken from an SVD of the diagonally rescaled matrix, which
    keeps exponentially localized vectors accurate on every site.

    Returns
    -------
    right, left : ndarray
    profile : ndarray
        ``projection_profile`` of the pair.
    sigma_min : float
        Smallest singular value, a certificate that ``lambda`` is an eigenvalue.
    """
    which = ChainTermination(which)
    p = params
    h = build_nonreciprocal(p.with_(boundary=Boundary.OPEN), which)
    lam = (p.delta_bar if which is ChainTermination.BROKEN_B else -p.delta_bar) - 1j * p.gamma_r
    shifted = h - lam * np.eye(len(h))
    d = graded_scaling(shifted)
    b = shifted * d[None, :] / d[:, None]
    u, sv, vh = np.linalg.svd(b)
    right = d * vh[-1].conj()
    left = u[:, -1] / d
    prof = projection_profile(left, right, p.n_cells, which)
    return right, left, prof, float(sv[-1])


def edge_mode_detected(params: LatticeParams) -> bool:
    """Whether the numerically found broken-chain mode piles up at the left edge.

    A left-localized ``b``-sublattice mode (``|pi_1| > |pi_N|``) is what,
    glued to its mirror image, gives a full-chain pair at ``-i gamma_r``.
    """
    _, _, prof, _ = numeric_broken_mode(params, ChainTermination.BROKEN_B)
    return bool(abs(prof[0]) > abs(prof[-1]))


def skin_report(spec: Spectrum) -> LocalizationReport:
    """Localization of unit-norm right eigenvectors of a real-space chain.

    Weights are ``|R_s|^2`` on site ``s``; positions run ``s / (D - 1)`` over
    the ``D`` sites; edge weights sum the outer ``ceil(D / 10)`` sites; the
    participation ratio is ``1 / (D sum w^2)``.
    """
    r = spec.unit_right()
    w = np.abs(r) ** 2
    w = w / w.sum(axis=0)
    dim = w.shape[0]
    x = np.arange(dim) / max(dim - 1, 1)
    win = math.ceil(EDGE_FRACTION * dim)
    com = x @ w
    left = w[:win].sum(axis=0)
    right = w[dim - win :].sum(axis=0)
    pr = 1.0 / (dim * (w**2).sum(axis=0))
    return LocalizationReport(com, left, right, pr)


def _band_distance(model, params, e, k0, dk):
    def dist(k):
        lam = np.linalg.eigvals(bloch_grid(model, params, [k])[0])
        return float(np.min(np.abs(lam - e)))

    res = minimize_scalar(dist, bounds=(k0 - dk, k0 + dk), method="bounded", options={"xatol": 1e-12})
    return min(res.fun, dist(k0))


def boundary_sensitivity(model: ModelKind, params: LatticeParams, n_k: int = 2048) -> float:
    """Largest distance from an open-chain eigenvalue to the periodic band curve.

    This is the directed Hausdorff distance from the open spectrum to the
    continuum of Bloch eigenvalues; it stays at rounding level when the open
    and periodic spectra agree and grows with the skin effect.
    """
    p = params.with_(boundary=Boundary.OPEN)
    h = build_model(model, p)
    d = graded_scaling(h)
    obc = np.linalg.eigvals(h * d[None, :] / d[:, None])
    k = 2 * np.pi * np.arange(n_k) / n_k
    bands = np.linalg.eigvals(bloch_grid(model, p, k)).reshape(-1)
    kk = np.repeat(k, 2)
    worst = 0.0
    for e in obc:
        gap = np.abs(bands - e)
        j = int(np.argmin(gap))
        worst = max(worst, _band_distance(model, p, e, kk[j], 2 * np.pi / n_k))
    return worst
