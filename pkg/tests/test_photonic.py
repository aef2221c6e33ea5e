import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dssh.hamiltonians import ModelKind, bloch, build_nonreciprocal
from dssh.photonic import (
    PhotonicParams,
    adiabatic_eliminate,
    bloch_blocks,
    build_full_linear,
    effective_bloch_error,
    fitted_rates,
    slow_fast_indices,
)


def eliminated(p):
    s, f = slow_fast_indices(p.n_cells)
    return adiabatic_eliminate(build_full_linear(p), s, f)


def test_params_validation():
    with pytest.raises(ValueError):
        PhotonicParams(kappa1=0.5, kappa2=1.0)
    with pytest.raises(ValueError):
        PhotonicParams(kappa2=0.0)
    with pytest.raises(ValueError):
        PhotonicParams(n_cells=0)
    with pytest.raises(ValueError):
        PhotonicParams(g=float("nan"))


def test_effective_rates():
    e = PhotonicParams(g=0.02, kappa1=2.0, kappa2=0.5).effective()
    assert e.gamma1 == pytest.approx(2e-4)
    assert e.gamma2 == pytest.approx(8e-4)


def test_full_linear_two_cells_by_hand():
    p = PhotonicParams(n_cells=2, g=0.1, kappa1=1.0, kappa2=0.5, boundary="periodic")
    m = build_full_linear(p)
    b1, c1, b2, c2, a1, d1, a2, d2 = range(8)
    assert m[b1, a1] == m[a1, b1] == 0.1
    assert m[c1, a1] == -0.1 and m[c1, d1] == -0.1
    assert m[b2, d1] == 0.1 and m[b1, d2] == 0.1
    assert m[a1, a1] == -1.0j and m[d2, d2] == -0.5j
    p_open = p.with_(boundary="open")
    assert build_full_linear(p_open)[b1, d2] == 0


def test_zeroth_order_elimination_exact_at_symmetric_detuning():
    # with delta1 = -delta2 the slow band is centred on the elimination point
    p = PhotonicParams(g=0.01, gamma=2e-5, delta1=3e-5, delta2=-3e-5, g_mag=1e-4, alpha=0.7)
    rep = effective_bloch_error(p)
    assert rep.max_rel_error < 1e-12


def test_error_scales_as_g_squared():
    errs = []
    for g in (0.04, 0.02, 0.01):
        # detunings and coherent coupling shrink with g so the slow band stays in scale
        p = PhotonicParams(g=g, delta1=g**2, delta2=0.5 * g**2, g_mag=0.5 * g**2, alpha=0.3, gamma=0.1 * g**2)
        errs.append(effective_bloch_error(p).max_rel_error)
    assert errs[0] > errs[1] > errs[2]
    for big, small in zip(errs, errs[1:]):
        assert big / small == pytest.approx(4.0, rel=0.1)


def test_zero_coupling_gives_zero_error():
    assert effective_bloch_error(PhotonicParams(g=0.0, delta1=0.01)).max_abs_error == 0.0


def test_error_table_layout():
    rep = effective_bloch_error(PhotonicParams(n_cells=5), n_k=8)
    assert len(rep.table) == 32
    assert [row[1] for row in rep.table[:4]] == ["bb", "bc", "cb", "cc"]


def test_short_rings_use_their_own_momenta():
    rep = effective_bloch_error(PhotonicParams(n_cells=2, g=0.01))
    assert len(rep.table) == 8
    assert rep.max_rel_error < 1e-12


def test_error_needs_periodic():
    with pytest.raises(ValueError):
        effective_bloch_error(PhotonicParams(boundary="open"))


@settings(max_examples=30, deadline=None)
@given(g=st.floats(0.001, 0.05), k1=st.floats(0.6, 3.0), ratio=st.floats(0.1, 0.9))
def test_fitted_rates_property(g, k1, ratio):
    p = PhotonicParams(n_cells=4, g=g, kappa1=k1, kappa2=ratio * k1, g_mag=0.3 * g**2, alpha=1.2)
    g1, g2 = fitted_rates(eliminated(p), 4)
    assert g1 == pytest.approx(g**2 / k1, rel=1e-10)
    assert g2 == pytest.approx(g**2 / (ratio * k1), rel=1e-10)


def test_fitted_rates_need_two_cells():
    with pytest.raises(ValueError):
        fitted_rates(np.zeros((2, 2)), 1)


def test_open_chain_misses_left_mediator():
    p = PhotonicParams(n_cells=3, g=0.01, boundary="open", g_mag=1e-4, alpha=0.5, gamma=1e-5)
    diff = eliminated(p) - build_nonreciprocal(p.effective())
    # b_1 has no d_0 to decay through, so it lacks the -i Gamma_2 damping
    assert diff[0, 0] == pytest.approx(1j * p.g**2 / p.kappa2)
    diff[0, 0] = 0
    assert np.abs(diff).max() < 1e-18


def test_frequency_dependent_elimination_is_exact():
    p = PhotonicParams(n_cells=3, g=0.05, delta1=0.01, delta2=0.004)
    full = build_full_linear(p)
    s, f = slow_fast_indices(3)
    w = np.linalg.eigvals(full)
    slow = w[np.abs(w.imag) < 0.1]
    for lam in slow:
        m = adiabatic_eliminate(full, s, f, omega=lam)
        assert np.min(np.abs(np.linalg.eigvals(m) - lam)) < 1e-12


def test_singular_fast_block():
    m = np.zeros((4, 4))
    with pytest.raises(np.linalg.LinAlgError):
        adiabatic_eliminate(m, [0, 1], [2, 3])


def test_bloch_blocks_reproduce_closed_form():
    p = PhotonicParams(n_cells=6, g=0.01, g_mag=1e-4, alpha=1.0, delta1=1e-5)
    eff = p.effective()
    h = build_nonreciprocal(eff)
    for k in (0.0, 0.3, math.pi, 5.0):
        np.testing.assert_allclose(bloch_blocks(h, 6, [k])[0], bloch(ModelKind.NONRECIPROCAL_DSSH, eff, k), atol=1e-15)
