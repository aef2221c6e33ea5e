"""
Biorthogonal eigendecomposition of non-Hermitian matrices and Bloch band sweeps.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from dssh.hamiltonians import LatticeParams, ModelKind, bloch_grid

# |<L|R>| of unit vectors below this marks a (numerically) defective pair
DEFECTIVE_OVERLAP = 1e-10
# eigenvalues closer than this (times max(1, ||H||)) are biorthogonalized jointly
CLUSTER_TOL = 1e-8


class DefectiveMatrixError(ArithmeticError):
    """Raised when left and right eigenvectors are (nearly) self-orthogonal,
    i.e. the matrix sits at or next to an exceptional point."""


class DefectiveMatrixWarning(RuntimeWarning):
    pass


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues with paired right and left eigenvectors (as columns).

    When ``biorthonormal`` is true, ``left[:, m].conj() @ right[:, n]`` is
    the Kronecker delta; left vectors have unit norm and the scale sits in
    the right vectors.  ``condition`` holds the eigenvalue condition
    numbers ``1 / |<L|R>|`` of unit-norm vectors in the diagonally balanced
    basis.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    biorthonormal: bool
    condition: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)

    def overlaps(self) -> np.ndarray:
        """Matrix of ``<L_m|R_n>``."""
        return self.left.conj().T @ self.right

    def unit_right(self) -> np.ndarray:
        return self.right / np.linalg.norm(self.right, axis=0)

    def residuals(self, h) -> tuple[np.ndarray, np.ndarray]:
        """Relative residuals of the right and left eigen-equations."""
        h = np.asarray(h)
        r = self.unit_right()
        l = self.left / np.linalg.norm(self.left, axis=0)
        res_r = np.linalg.norm(h @ r - r * self.eigenvalues, axis=0)
        res_l = np.linalg.norm(h.conj().T @ l - l * self.eigenvalues.conj(), axis=0)
        return res_r, res_l


def _clusters(w, tol):
    order = np.argsort(w.real, kind="stable")
    groups = []
    # single-linkage on sorted real parts, then split by full complex distance
    current = [order[0]]
    for i in order[1:]:
        if w[i].real - w[current[-1]].real <= tol:
            current.append(i)
        else:
            groups.append(current)
            current = [i]
    groups.append(current)
    out = []
    for g in groups:
        g = list(g)
        while g:
            seed = [g.pop(0)]
            changed = True
            while changed:
                changed = False
                for j in list(g):
                    if np.min(np.abs(w[seed] - w[j])) <= tol:
                        seed.append(j)
                        g.remove(j)
                        changed = True
            out.append(np.array(sorted(seed)))
    return out


def graded_scaling(h) -> np.ndarray:
    """Diagonal similarity ``d`` making ``D^-1 H D`` as symmetric as possible.

    For a tridiagonal matrix the scaling equalizes the moduli of each pair
    of off-diagonal entries (powers of two, so exact); this removes the
    exponential grading of skin-effect eigenvectors.  Other matrices fall
    back to LAPACK balancing.
    """
    h = np.asarray(h)
    n = h.shape[0]
    if n > 2 and np.count_nonzero(np.triu(h, 2)) == 0 and np.count_nonzero(np.tril(h, -2)) == 0:
        up = np.abs(np.diag(h, 1))
        lo = np.abs(np.diag(h, -1))
        step = np.zeros(n - 1)
        # entries at rounding level relative to the matrix are treated as absent
        floor = 64 * np.finfo(float).eps * np.abs(h).max()
        ok = (up > floor) & (lo > floor)
        step[ok] = 0.5 * np.log2(lo[ok] / up[ok])
        logd = np.concatenate(([0.0], np.cumsum(step)))
        logd = np.round(logd - 0.5 * (logd.max() + logd.min()))
        if np.abs(logd).max() < 900:
            return np.exp2(logd)
    _, (d, _) = sla.matrix_balance(h, permute=False, separate=True)
    return d


def eig_biorthogonal(h, on_defective: str = "raise") -> Spectrum:
    """Full right/left eigendecomposition normalized so that ``<L_m|R_n> = delta_mn``.

    Parameters
    ----------
    h : array_like
        Square complex matrix with finite entries.
    on_defective : {"raise", "warn"}
        What to do when a pair has ``|<L|R>| < 1e-10`` (unit vectors).  With
        ``"warn"`` a :class:`DefectiveMatrixWarning` is issued and the
        returned spectrum carries unit-norm vectors and
        ``biorthonormal=False``.

    Returns
    -------
    Spectrum
        Eigenvalues sorted by real part, then imaginary part.
    """
    if on_defective not in ("raise", "warn"):
        raise ValueError(f"on_defective must be 'raise' or 'warn', got {on_defective!r}")
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")

    # diagonal similarity (exact powers of two); the defect test then measures
    # genuine eigenvector collapse rather than the graded skin-effect scaling
    dscale = graded_scaling(h)
    hb = h * dscale[None, :] / dscale[:, None]
    w, vl, vr = sla.eig(hb, left=True, right=True)
    vr = vr / np.linalg.norm(vr, axis=0)
    vl = vl / np.linalg.norm(vl, axis=0)
    diag = np.einsum("ij,ij->j", vl.conj(), vr)
    condition = 1.0 / np.maximum(np.abs(diag), np.finfo(float).tiny)

    scale = max(1.0, float(np.linalg.norm(hb, 2)))
    defective = False
    right = vr.copy()
    for idx in _clusters(w, CLUSTER_TOL * scale):
        s = vl[:, idx].conj().T @ vr[:, idx]
        if len(idx) == 1:
            if abs(s[0, 0]) < DEFECTIVE_OVERLAP:
                defective = True
                break
            right[:, idx] = vr[:, idx] / s[0, 0]
            continue
        if np.linalg.svd(s, compute_uv=False)[-1] < DEFECTIVE_OVERLAP:
            defective = True
            break
        right[:, idx] = vr[:, idx] @ np.linalg.inv(s)

    order = np.lexsort((w.imag, w.real))
    right = dscale[:, None] * right
    left = vl / dscale[:, None]
    if defective:
        msg = (
            "left and right eigenvectors are nearly self-orthogonal "
            f"(max condition number {condition.max():.3g}); the matrix is at or "
            "next to an exceptional point"
        )
        if on_defective == "raise":
            raise DefectiveMatrixError(msg)
        warnings.warn(msg, DefectiveMatrixWarning, stacklevel=2)
        r = dscale[:, None] * vr
        return Spectrum(
            w[order],
            (r / np.linalg.norm(r, axis=0))[:, order],
            (left / np.linalg.norm(left, axis=0))[:, order],
            False,
            condition[order],
        )
    # unit-norm left vectors; <L|R> = 1 is preserved by the rescaling
    lnorm = np.linalg.norm(left, axis=0)
    left = left / lnorm
    right = right * lnorm
    return Spectrum(w[order], right[:, order], left[:, order], True, condition[order])


def eigenvalues(h) -> np.ndarray:
    """Eigenvalues only, computed in the graded basis and sorted by real then imaginary part."""
    h = np.asarray(h, dtype=complex)
    d = graded_scaling(h)
    w = sla.eigvals(h * d[None, :] / d[:, None])
    return w[np.lexsort((w.imag, w.real))]


def gamma_r_modes(spec: Spectrum, gamma_r: float, tol: float) -> list[int]:
    """Indices of eigenvalues within ``tol`` of ``-i gamma_r``."""
    if not (isinstance(tol, (int, float)) and math.isfinite(tol) and tol > 0):
        raise ValueError(f"tol must be a finite positive number, got {tol!r}")
    hits = np.nonzero(np.abs(spec.eigenvalues + 1j * gamma_r) < tol)[0]
    return sorted(int(i) for i in hits)


class BandSweep(NamedTuple):
    k: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return np.abs(self.e_plus - self.e_minus)


def _plus_first(pair):
    # the "plus" branch is the one whose offset from the band centre has
    # argument in (-pi/4, 3pi/4]
    d = pair[0] - 0.5 * (pair[0] + pair[1])
    ang = np.angle(d)
    if -np.pi / 4 < ang <= 3 * np.pi / 4:
        return pair
    return pair[::-1]


def band_sweep(model: ModelKind, params: LatticeParams, n_k: int) -> BandSweep:
    """Bloch eigenvalues on the closed grid ``k_j = 2 pi j / n_k``, ``j = 0..n_k``.

    Branches are continued by nearest-eigenvalue matching between adjacent
    momenta, so a band crossing is followed straight through.
    """
    if n_k < 2:
        raise ValueError(f"n_k must be >= 2, got {n_k}")
    k = 2 * np.pi * np.arange(n_k + 1) / n_k
    eigs = np.linalg.eigvals(bloch_grid(model, params, k))
    bands = np.empty_like(eigs)
    bands[0] = _plus_first(eigs[0])
    for j in range(1, len(k)):
        a, b = eigs[j]
        prev = bands[j - 1]
        keep = abs(prev[0] - a) + abs(prev[1] - b)
        swap = abs(prev[0] - b) + abs(prev[1] - a)
        bands[j] = (a, b) if keep <= swap else (b, a)
    return BandSweep(k, bands[:, 0], bands[:, 1])
