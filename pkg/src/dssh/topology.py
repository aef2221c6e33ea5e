"""
Bloch eigenvectors, biorthogonal Berry phases and the (|G|, alpha) phase diagram.

The winding number of a two-band Bloch matrix is the Berry phase of one band
divided by pi.  For non-Hermitian bands the connection is built from the
biorthogonal pair, ``A(k) = i <L(k)| d_k R(k)>``, so it can be complex; the
real part is what gets reported.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from dssh.hamiltonians import LatticeParams, ModelKind, bloch_grid
from dssh.spectral import _plus_first

# bands closer than this anywhere on the grid make the winding undefined
GAP_TOL = 1e-9


class PhaseBoundaryError(ArithmeticError):
    """The band gap closes on the momentum grid."""


class OutOfRegimeError(ValueError):
    """Parameters lie outside the range where a closed form is available."""


class PhaseRegion(str, Enum):
    SINGLE_BOUNDARY = "single_boundary"
    DOUBLE_BOUNDARY = "double_boundary"
    NO_TOPOLOGY = "no_topology"


class BlochVectors(NamedTuple):
    """Eigenpairs of a 2x2 Bloch matrix, normalized so ``<L_s|R_s> = 1``."""

    e_plus: complex
    e_minus: complex
    r_plus: np.ndarray
    r_minus: np.ndarray
    l_plus: np.ndarray
    l_minus: np.ndarray


class WindingResult(NamedTuple):
    nu: float
    k_samples: int
    residual: float
    berry_phase: complex


class PhaseClassification(NamedTuple):
    g_mag: float
    alpha: float
    gamma2: float
    a_plus: complex
    a_minus: complex
    region: PhaseRegion
    x_plus: Optional[float] = None
    x_minus: Optional[float] = None
    gamma_r_modes_predicted: Optional[bool] = None


def _biorth_pair(vr, vl):
    c = np.vdot(vl, vr)
    s = np.sqrt(c)
    return vr / s, vl / np.conj(s)


def analytic_bloch_vectors(model: ModelKind, params: LatticeParams, k: float) -> BlochVectors:
    """Closed-form Bloch eigenvectors.

    Parameters
    ----------
    model : ModelKind
        ``HERMITIAN_SSH``, ``DSSH`` (with ``delta1 == delta2``) or ``ANTIPT_DSSH``.
    params : LatticeParams
    k : float
        Momentum.

    Returns
    -------
    BlochVectors
        For the Hermitian and dissipative chains the vectors are
        ``(1, +-exp(i theta)) / sqrt(2)`` with a quadrant-aware ``theta``
        and left equals right.  For the detuned anti-PT chain the "+" band is
        ``-i gamma_r + i R`` with ``R = sqrt(|h|^2 - delta_bar^2)``.

    Raises
    ------
    OutOfRegimeError
        Anti-PT chain with ``|delta_bar| >= |h(k)|`` (real-eigenvalue branch).
    """
    model = ModelKind(model)
    p = params
    if model is ModelKind.HERMITIAN_SSH:
        h = p.t1 + p.t2 * np.exp(-1j * k)
        theta = math.atan2(-h.imag, h.real)
        e = abs(h)
        up = np.array([1.0, np.exp(1j * theta)]) / math.sqrt(2)
        dn = np.array([1.0, -np.exp(1j * theta)]) / math.sqrt(2)
        return BlochVectors(e, -e, up, dn, up.copy(), dn.copy())
    if model is ModelKind.DSSH:
        if p.delta1 != p.delta2:
            raise OutOfRegimeError("closed form needs delta1 == delta2; use ANTIPT_DSSH for a detuned chain")
        theta = math.atan2(p.gamma2 * math.sin(k), p.gamma1 + p.gamma2 * math.cos(k))
        mag = math.hypot(p.gamma1 + p.gamma2 * math.cos(k), p.gamma2 * math.sin(k))
        shift = -p.delta1 - 1j * p.gamma_r
        up = np.array([1.0, np.exp(1j * theta)]) / math.sqrt(2)
        dn = np.array([1.0, -np.exp(1j * theta)]) / math.sqrt(2)
        return BlochVectors(shift + 1j * mag, shift - 1j * mag, up, dn, up.copy(), dn.copy())
    if model is ModelKind.ANTIPT_DSSH:
        h = 1j * p.gamma1 + 1j * p.gamma2 * np.exp(-1j * k)
        d = p.delta_bar
        if abs(d) >= abs(h):
            raise OutOfRegimeError(f"|delta_bar| = {abs(d):.6g} >= |h(k)| = {abs(h):.6g}: eigenvalues are real here")
        r = math.sqrt(abs(h) ** 2 - d**2)
        rp, lp = _biorth_pair(np.array([-1j * h, r + 1j * d]), np.array([-1j * h, r - 1j * d]))
        rm, lm = _biorth_pair(np.array([-1j * h, -r + 1j * d]), np.array([-1j * h, -r - 1j * d]))
        return BlochVectors(-1j * p.gamma_r + 1j * r, -1j * p.gamma_r - 1j * r, rp, rm, lp, lm)
    raise OutOfRegimeError(f"no closed-form eigenvectors for {model.value}")


def pseudo_field_angles(params: LatticeParams, k: float) -> tuple[float, float]:
    """Angles ``(theta, phi)`` of the anti-PT pseudo-field.

    ``sinh(theta) = delta_bar / R`` and ``(B_x, B_y) / R = cosh(theta) (cos phi, sin phi)``
    with ``B_x = gamma2 sin k``, ``B_y = -(gamma1 + gamma2 cos k)``.
    """
    p = params
    bx = p.gamma2 * math.sin(k)
    by = -(p.gamma1 + p.gamma2 * math.cos(k))
    r2 = bx * bx + by * by - p.delta_bar**2
    if r2 <= 0:
        raise OutOfRegimeError("pseudo-field angles need |delta_bar| < |h(k)|")
    return math.asinh(p.delta_bar / math.sqrt(r2)), math.atan2(by, bx)


def bloch_eigenfield(model: ModelKind, params: LatticeParams, n_k: int):
    """Numerical "+" band on ``k_j = 2 pi j / n_k``, ``j = 0..n_k-1``.

    Returns ``(k, energies, right, left)`` with ``right``/``left`` of shape
    ``(n_k, 2)`` and ``<L_j|R_j> = 1``.  The band is followed by
    nearest-eigenvalue continuation from ``k = 0``.

    Raises
    ------
    PhaseBoundaryError
        If the two bands come within ``1e-9`` of each other on the grid.
    """
    k = 2 * np.pi * np.arange(n_k) / n_k
    hs = bloch_grid(model, params, k)
    w, v = np.linalg.eig(hs)
    gap = np.abs(w[:, 0] - w[:, 1])
    if gap.min() < GAP_TOL:
        j = int(np.argmin(gap))
        raise PhaseBoundaryError(f"winding undefined at phase boundary: band gap {gap[j]:.3g} at k = {k[j]:.6g}")
    # left vectors as rows of inv(V), so <L_i|R_j> = delta_ij
    lv = np.linalg.inv(v).conj().transpose(0, 2, 1)
    pick = np.empty(n_k, dtype=int)
    first = _plus_first(w[0])
    pick[0] = 0 if first[0] == w[0, 0] else 1
    for j in range(1, n_k):
        prev = w[j - 1, pick[j - 1]]
        pick[j] = int(np.argmin(np.abs(w[j] - prev)))
    idx = np.arange(n_k)
    return k, w[idx, pick], v[idx, :, pick], lv[idx, :, pick]


def winding_from_field(k, right, left) -> WindingResult:
    """Winding number ``(1/pi) * integral of A(k) dk`` over a sampled closed loop.

    Parameters
    ----------
    k : ndarray, shape (n,)
        Uniform momenta covering ``[0, 2 pi)``.
    right, left : ndarray, shape (n, 2)
        Biorthonormal eigenvector field in any gauge.

    Notes
    -----
    The field is first made smooth: each vector is phase-aligned with its
    predecessor by maximal overlap, and the mismatch that remains on closing
    the loop is spread linearly over the grid.  The connection then follows
    from fourth-order central differences.  Because the loop integral is only defined
    modulo ``2 pi``, the real part of the Berry phase is taken in
    ``(-pi/2, 3 pi/2]``.
    """
    k = np.asarray(k, dtype=float)
    r = np.array(right, dtype=complex)
    l = np.array(left, dtype=complex)
    n = len(k)
    if n < 64:
        raise ValueError(f"need at least 64 momenta, got {n}")
    norm = np.einsum("ij,ij->i", l.conj(), r)
    r = r / norm[:, None]
    # unit-norm right vectors fix the modulus gauge; the phase is fixed below
    size = np.linalg.norm(r, axis=1)
    r /= size[:, None]
    l *= size[:, None]
    # parallel transport: <L_{j-1}|R_j> real positive for every step
    ov = np.einsum("ij,ij->i", l[:-1].conj(), r[1:])
    acc = np.concatenate(([1.0], np.cumprod(ov / np.abs(ov))))
    r /= acc[:, None]
    l /= acc[:, None]
    # closing the loop leaves R_0 = c * (R transported once around); spreading
    # c = exp(i s) linearly over the grid makes the field periodic
    closing = np.vdot(l[-1], r[0])
    s = -1j * np.log(closing)
    # quantized loops close near +-1; keep the branch cut away from -1 so
    # rounding cannot flip the spread between +pi and -pi
    if s.real <= -np.pi / 2:
        s += 2 * np.pi
    frac = np.arange(n) / n
    r *= np.exp(1j * s * frac)[:, None]
    l *= np.exp(1j * np.conj(s) * frac)[:, None]
    dk = 2 * np.pi / n
    # fourth-order central difference on the periodic field
    dr = (8 * (np.roll(r, -1, axis=0) - np.roll(r, 1, axis=0)) - (np.roll(r, -2, axis=0) - np.roll(r, 2, axis=0))) / (12 * dk)
    conn = 1j * np.einsum("ij,ij->i", l.conj(), dr)
    phase = complex(np.sum(conn) * dk)
    re = phase.real
    # bring the real part into (-pi/2, 3pi/2]
    re = re - 2 * np.pi * math.floor((re + np.pi / 2) / (2 * np.pi))
    if re == -np.pi / 2:
        re += 2 * np.pi
    nu = re / np.pi
    return WindingResult(nu, n, abs(nu - round(nu)), complex(re, phase.imag))


def winding_number(model: ModelKind, params: LatticeParams, n_k: int = 2048) -> WindingResult:
    """Winding number of the "+" Bloch band of ``model``.

    Quantized to 0 or 1 for the Hermitian and dissipative chains away from
    their gap closings; for the detuned anti-PT chain the real part of the
    complex Berry phase is reported and need not be an integer.
    """
    if n_k < 64:
        raise ValueError(f"n_k must be >= 64, got {n_k}")
    k, _, r, l = bloch_eigenfield(model, params, n_k)
    return winding_from_field(k, r, l)


def phase_boundaries(g_mag: float, alpha: float, gamma2: float) -> PhaseClassification:
    """Boundaries ``A_+-`` in ``gamma1**2`` between which Gamma_r edge modes exist.

    ``A_+- = -|G|^2 cos(2 alpha) +- sqrt(gamma2^4 - |G|^4 sin^2(2 alpha))``.
    Edge modes need ``A_- < gamma1^2 < A_+``, so the region is
    ``double_boundary`` when both are real and non-negative,
    ``single_boundary`` when only ``A_+`` is, and ``no_topology`` otherwise
    (complex ``A``, or both negative).
    """
    if not gamma2 > 0:
        raise ValueError(f"gamma2 must be positive, got {gamma2}")
    c2 = math.cos(2 * alpha)
    s2 = math.sin(2 * alpha)
    disc = gamma2**4 - g_mag**4 * s2 * s2
    root = complex(math.sqrt(disc)) if disc >= 0 else 1j * math.sqrt(-disc)
    a_plus = -(g_mag**2) * c2 + root
    a_minus = -(g_mag**2) * c2 - root
    x_plus = x_minus = None
    if disc < 0:
        region = PhaseRegion.NO_TOPOLOGY
    else:
        if a_plus.real >= 0:
            x_plus = math.sqrt(a_plus.real)
        if a_minus.real >= 0:
            x_minus = math.sqrt(a_minus.real)
        if x_minus is not None:
            region = PhaseRegion.DOUBLE_BOUNDARY
        elif x_plus is not None:
            region = PhaseRegion.SINGLE_BOUNDARY
        else:
            region = PhaseRegion.NO_TOPOLOGY
    return PhaseClassification(g_mag, alpha, gamma2, a_plus, a_minus, region, x_plus, x_minus)


def edge_modes_predicted(params: LatticeParams) -> bool:
    """``sqrt((G1^2 - |G|^2)^2 + 4 |G|^2 G1^2 cos^2 alpha) < gamma2^2``, i.e. ``|Z| < 1``."""
    p = params
    g1sq, gsq = p.gamma1**2, p.g_mag**2
    lhs = math.sqrt((g1sq - gsq) ** 2 + 4 * gsq * g1sq * math.cos(p.alpha) ** 2)
    return lhs < p.gamma2**2


def classify_point(params: LatticeParams) -> PhaseClassification:
    """Phase boundaries at ``(|G|, alpha, gamma2)`` plus the edge-mode prediction at ``gamma1``."""
    base = phase_boundaries(params.g_mag, params.alpha, params.gamma2)
    return base._replace(gamma_r_modes_predicted=edge_modes_predicted(params))


def phase_diagram(alpha_grid, g_grid, gamma2: float) -> list[PhaseClassification]:
    """Classification on the product grid, alpha-major (rows of constant alpha)."""
    alpha_grid = np.atleast_1d(np.asarray(alpha_grid, dtype=float))
    g_grid = np.atleast_1d(np.asarray(g_grid, dtype=float))
    if alpha_grid.size == 0 or g_grid.size == 0:
        raise ValueError("phase diagram grids must be nonempty")
    return [phase_boundaries(float(g), float(a), gamma2) for a in alpha_grid for g in g_grid]
