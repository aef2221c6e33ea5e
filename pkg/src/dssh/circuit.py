"""
Resistively coupled LCR lattice: Kirchhoff dynamics, envelope reduction and pole extraction.

Node voltages obey

    V_n''  + w1^2 V_n  + D_n  V_n'  = G1 Vb_n' + G2 Vb_(n-1)'
    Vb_n'' + w2^2 Vb_n + Db_n Vb_n' = G1 V_n'  + G2 V_(n+1)'

with ``D_n = gamma1`` plus the coupling rates of the resistors actually
attached to the node.  Writing ``V = (v exp(-i w0 t) + c.c.) / 2`` with
``w0 = (w1 + w2) / 2`` and dropping second derivatives of the slow
envelopes gives ``v' = -i H_env v``; ``H_env`` is the dissipative SSH
matrix with every rate halved.
"""

from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from dssh.hamiltonians import Boundary

WEAK_COUPLING_RATIO = 0.05
# RK4 stability guard on dt * max|eig|
STEP_GUARD = 0.1


class StepSizeError(ValueError):
    pass


class ResolutionWarning(UserWarning):
    """Two extracted poles lie closer than the record's frequency resolution."""


class WeakCouplingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CircuitParams:
    """Component values in SI units (henry, farad, ohm).

    ``rc1`` couples the two nodes of a cell, ``rc2`` couples ``Vb_n`` to
    ``V_(n+1)``; ``r1``, ``r2`` are the node loss resistors.
    """

    n_cells: int = 1
    l1: float = 25.33e-6
    l2: float = 25.33e-6
    c1: float = 1e-9
    c2: float = 1e-9
    r1: float = 31.8e3
    r2: float = 31.8e3
    rc1: float = 15.9e3
    rc2: float = 15.9e3
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        if isinstance(self.n_cells, bool) or int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise ValueError(f"n_cells must be a positive integer, got {self.n_cells!r}")
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        for name in ("l1", "l2", "c1", "c2", "r1", "r2", "rc1", "rc2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    @property
    def omega1(self) -> float:
        return 1.0 / math.sqrt(self.l1 * self.c1)

    @property
    def omega2(self) -> float:
        return 1.0 / math.sqrt(self.l2 * self.c2)

    @property
    def omega0(self) -> float:
        return 0.5 * (self.omega1 + self.omega2)

    @property
    def delta_bar(self) -> float:
        return 0.5 * (self.omega1 - self.omega2)

    @property
    def gamma_c1(self) -> float:
        """Intra-cell coupling rate ``1 / (Rc1 C1)``."""
        return 1.0 / (self.rc1 * self.c1)

    @property
    def gamma_c2(self) -> float:
        return 1.0 / (self.rc2 * self.c1)

    @property
    def gamma1(self) -> float:
        """Loss rate ``1 / (R1 C1)`` of the first node of a cell."""
        return 1.0 / (self.r1 * self.c1)

    @property
    def gamma2(self) -> float:
        return 1.0 / (self.r2 * self.c2)

    @property
    def weak_coupling(self) -> bool:
        w_min = min(self.omega1, self.omega2)
        return (
            max(self.gamma_c1, self.gamma_c2) <= WEAK_COUPLING_RATIO * w_min
            and abs(self.omega1 - self.omega2) <= WEAK_COUPLING_RATIO * self.omega0
        )

    def with_(self, **changes) -> "CircuitParams":
        return replace(self, **changes)


def desk_params(n_cells: int = 1, coupling_ratio: float = 0.01, loss_ratio: float = 0.005, **changes) -> CircuitParams:
    """Component set with ``w0 / 2 pi = 1 MHz`` (``L = 25.33 uH``, ``C = 1 nF``).

    ``Rc`` and ``R`` are chosen so that ``Gamma / w0 = coupling_ratio`` and
    ``gamma / w0 = loss_ratio``.
    """
    c = 1e-9
    w0 = 2 * math.pi * 1e6
    l = 1.0 / (w0**2 * c)
    rc = 1.0 / (coupling_ratio * w0 * c)
    r = 1.0 / (loss_ratio * w0 * c)
    base = CircuitParams(n_cells, l, l, c, c, r, r, rc, rc)
    return base.with_(**changes) if changes else base


def _require_equal_c(p: CircuitParams):
    if not math.isclose(p.c1, p.c2, rel_tol=1e-12):
        raise ValueError(f"unequal capacitances c1={p.c1}, c2={p.c2} are not supported")


def _node_rates(p: CircuitParams):
    """Total damping on each node: own loss plus every attached coupling resistor."""
    n = p.n_cells
    periodic = p.boundary is Boundary.PERIODIC
    da = np.full(n, p.gamma1 + p.gamma_c1 + p.gamma_c2)
    db = np.full(n, p.gamma2 + p.gamma_c1 + p.gamma_c2)
    if not periodic:
        # V_1 has no left Rc2, Vb_N no right Rc2
        da[0] -= p.gamma_c2
        db[-1] -= p.gamma_c2
    return da, db


def build_circuit_system(params: CircuitParams, damping: str = "velocity") -> np.ndarray:
    """Real first-order generator ``x' = M x`` with ``x = (V_1, V_1', Vb_1, Vb_1', ...)``.

    Parameters
    ----------
    params : CircuitParams
    damping : {"velocity", "displacement"}
        Where the node damping acts.  ``"velocity"`` is what Kirchhoff's laws
        give (a resistor current is ``V / R``, differentiated once);
        ``"displacement"`` puts it on ``V`` and exists only for comparison.
    """
    _require_equal_c(params)
    if damping not in ("velocity", "displacement"):
        raise ValueError(f"damping must be 'velocity' or 'displacement', got {damping!r}")
    p = params
    n = p.n_cells
    dim = 4 * n
    m = np.zeros((dim, dim))
    da, db = _node_rates(p)
    periodic = p.boundary is Boundary.PERIODIC
    for i in range(n):
        v, vd, w, wd = 4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3
        m[v, vd] = 1.0
        m[w, wd] = 1.0
        m[vd, v] = -p.omega1**2
        m[wd, w] = -p.omega2**2
        m[vd, vd if damping == "velocity" else v] -= da[i]
        m[wd, wd if damping == "velocity" else w] -= db[i]
        m[vd, wd] += p.gamma_c1
        m[wd, vd] += p.gamma_c1
        if i > 0 or periodic:
            prev_wd = 4 * ((i - 1) % n) + 3
            m[vd, prev_wd] += p.gamma_c2
            m[prev_wd, vd] += p.gamma_c2
    return m


def envelope_matrix(params: CircuitParams) -> np.ndarray:
    """Envelope generator ``H_env`` (``v' = -i H_env v``) on ``(v_1, vb_1, v_2, ...)``.

    Diagonal ``+-delta_bar - i D / 2`` with ``delta_bar = (w1 - w2) / 2`` and
    ``D`` the node damping; couplings ``i Gamma_1 / 2`` inside a cell and
    ``i Gamma_2 / 2`` between ``vb_n`` and ``v_(n+1)``.
    """
    _require_equal_c(params)
    p = params
    if not p.weak_coupling:
        warnings.warn("outside the weak-coupling regime; the envelope reduction is inaccurate", WeakCouplingWarning, stacklevel=2)
    n = p.n_cells
    da, db = _node_rates(p)
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    a = np.arange(0, 2 * n, 2)
    b = a + 1
    h[a, a] = p.delta_bar - 0.5j * da
    h[b, b] = -p.delta_bar - 0.5j * db
    h[a, b] += 0.5j * p.gamma_c1
    h[b, a] += 0.5j * p.gamma_c1
    h[b[:-1], a[1:]] += 0.5j * p.gamma_c2
    h[a[1:], b[:-1]] += 0.5j * p.gamma_c2
    if p.boundary is Boundary.PERIODIC:
        h[b[-1], a[0]] += 0.5j * p.gamma_c2
        h[a[0], b[-1]] += 0.5j * p.gamma_c2
    return h


def circuit_bloch(params: CircuitParams, k: float) -> np.ndarray:
    """2x2 Bloch form of the periodic envelope generator at momentum ``k``."""
    _require_equal_c(params)
    p = params
    if not p.weak_coupling:
        warnings.warn("outside the weak-coupling regime; the envelope reduction is inaccurate", WeakCouplingWarning, stacklevel=2)
    g1, g2 = p.gamma_c1, p.gamma_c2
    return np.array(
        [
            [p.delta_bar - 0.5j * (p.gamma1 + g1 + g2), 0.5j * (g1 + g2 * np.exp(-1j * k))],
            [0.5j * (g1 + g2 * np.exp(1j * k)), -p.delta_bar - 0.5j * (p.gamma2 + g1 + g2)],
        ]
    )


def envelope_poles(params: CircuitParams) -> np.ndarray:
    """Complex frequencies ``w0 + lambda`` predicted by the envelope generator.

    A mode then rings as ``exp(-i (w0 + lambda) t)``: real part is the
    angular frequency, minus the imaginary part is the amplitude decay rate.
    """
    return params.omega0 + np.linalg.eigvals(envelope_matrix(params))


class TrajectoryData(NamedTuple):
    times: np.ndarray
    voltages: np.ndarray
    metadata: dict


def _fingerprint(m) -> str:
    return hashlib.sha256(np.ascontiguousarray(m, dtype=float).tobytes()).hexdigest()[:16]


def integrate(system, x0, t_end: float, dt: float, stride: int = 1) -> TrajectoryData:
    """Classical fourth-order Runge-Kutta for ``x' = M x``.

    For a linear system one RK4 step is the degree-4 Taylor polynomial of
    ``exp(dt M)``, so the step matrix is formed once.

    Parameters
    ----------
    system : ndarray, shape (4N, 4N)
    x0 : ndarray, shape (4N,)
    t_end, dt : float
        ``dt * max|eig(M)|`` must stay below 0.1.
    stride : int
        Keep every ``stride``-th step.

    Returns
    -------
    TrajectoryData
        ``voltages[:, 2n]`` is ``V_(n+1)`` and ``voltages[:, 2n + 1]`` is
        ``Vb_(n+1)``.
    """
    m = np.asarray(system, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 4 or x.shape != (m.shape[0],):
        raise ValueError("system must be 4N x 4N and x0 of length 4N")
    if not (dt > 0 and t_end > 0):
        raise ValueError(f"dt and t_end must be positive, got dt={dt}, t_end={t_end}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    rho = float(np.max(np.abs(np.linalg.eigvals(m))))
    if dt * rho >= STEP_GUARD:
        raise StepSizeError(f"dt * max|eig| = {dt * rho:.3g} >= {STEP_GUARD}; reduce dt below {STEP_GUARD / rho:.3g}")
    hm = dt * m
    eye = np.eye(len(m))
    step = eye + hm @ (eye + hm @ (eye + hm @ (eye + hm / 4) / 3) / 2)
    n_steps = int(round(t_end / dt))
    if n_steps < 1:
        raise ValueError("t_end shorter than one step")
    jump = np.linalg.matrix_power(step, stride)
    n_keep = n_steps // stride + 1
    states = np.empty((n_keep, len(x)))
    states[0] = x
    for i in range(1, n_keep):
        x = jump @ x
        states[i] = x
    times = dt * stride * np.arange(n_keep)
    meta = {"dt": dt * stride, "integrator_dt": dt, "max_abs_eig": rho, "system_hash": _fingerprint(m)}
    return TrajectoryData(times, states[:, 0::2].copy(), meta)


def unit_kick(params: CircuitParams) -> np.ndarray:
    """Initial state with ``V_1 = 1`` volt and everything else at rest."""
    x = np.zeros(4 * params.n_cells)
    x[0] = 1.0
    return x


def default_step(system) -> float:
    """Step at a quarter of the stability guard."""
    rho = float(np.max(np.abs(np.linalg.eigvals(system))))
    return 0.25 * STEP_GUARD / rho


def _matrix_pencil(y, dt, rtol=1e-9):
    n = y.shape[0]
    pencil = n // 3
    rows = n - pencil
    hank = np.concatenate([np.lib.stride_tricks.sliding_window_view(y[:, c], pencil + 1)[:rows] for c in range(y.shape[1])])
    _, s, vh = np.linalg.svd(hank, full_matrices=False)
    if s[0] == 0:
        return np.array([], dtype=complex)
    order = int(np.sum(s > rtol * s[0]))
    v = vh[:order].conj().T
    z = np.linalg.eigvals(np.linalg.pinv(v[:-1]) @ v[1:])
    return np.log(z.astype(complex)) / dt


def spectral_extract(traj: TrajectoryData, max_samples: int = 3000) -> list[tuple[float, float]]:
    """Dominant complex poles of a voltage record by a multi-channel matrix pencil.

    The record is decimated to about eight samples per period of the fastest
    mode (the spectral radius stored in ``traj.metadata``), then every
    channel's Hankel matrix is stacked and the signal subspace from an SVD
    gives the poles.  Returns ``(angular frequency, decay rate)`` pairs with
    positive frequency, sorted by frequency; a null record gives ``[]``.
    """
    y = np.asarray(traj.voltages, dtype=float)
    if y.ndim != 2 or len(y) < 8:
        raise ValueError("trajectory too short for pole extraction")
    if not np.any(y):
        return []
    dt = float(traj.metadata.get("dt", traj.times[1] - traj.times[0]))
    rho = traj.metadata.get("max_abs_eig")
    stride = 1 if not rho else max(1, int((math.pi / 4) / (rho * dt)))
    ys = y[::stride]
    if len(ys) > max_samples:
        ys = ys[:max_samples]
    s = _matrix_pencil(ys, stride * dt)
    poles = [(float(p.imag), float(-p.real)) for p in s if p.imag > 0]
    poles.sort()
    span = (len(ys) - 1) * stride * dt
    res = 2 * math.pi / span
    for (w1, d1), (w2, d2) in zip(poles, poles[1:]):
        if abs(complex(w1 - w2, d1 - d2)) < res:
            warnings.warn(
                f"poles at {w1:.6g} and {w2:.6g} rad/s are closer than the resolution {res:.3g} rad/s of the record",
                ResolutionWarning,
                stacklevel=2,
            )
            break
    return poles


def match_poles(estimated, predicted) -> list[tuple[complex, complex]]:
    """Pair estimated ``(w, decay)`` with predicted complex frequencies by minimal total distance."""
    est = np.array([complex(w, -d) for w, d in estimated])
    pred = np.asarray(predicted, dtype=complex)
    if len(est) == 0 or len(pred) == 0:
        return []
    cost = np.abs(est[:, None] - pred[None, :])
    ri, ci = linear_sum_assignment(cost)
    return [(est[i], pred[j]) for i, j in zip(ri, ci)]


def windowed_rms(traj: TrajectoryData, n_windows: int) -> np.ndarray:
    """RMS of the full voltage vector over consecutive equal windows."""
    v = traj.voltages
    size = len(v) // n_windows
    if size < 1:
        raise ValueError("more windows than samples")
    chunks = v[: size * n_windows].reshape(n_windows, size, -1)
    return np.sqrt(np.mean(np.sum(chunks**2, axis=2), axis=1))
