"""Structural properties, runnable on their own: ``pytest tests/test_properties.py``."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sspmsmd.families import FAMILIES, make_family
from sspmsmd.integrator import step, step_shu_osher
from sspmsmd.spatial import SemiDiscretization, make_semidiscretization
from sspmsmd.sspcert import build_shu_osher, find_ssp_coefficient
from sspmsmd.tableau import TwoDerivativeTableau

SQRT_HALF = math.sqrt(0.5)
SSP_IDS = [fid for fid in FAMILIES if fid != "NONSSP-2s3p"]


def _ssp_at_half(fid):
    m = make_family(fid, SQRT_HALF if FAMILIES[fid].needs_k else None)
    C = m.C if not math.isnan(m.C) else find_ssp_coefficient(m.tableau, SQRT_HALF)
    return m, C


def _tv_rows(U):
    return np.abs(np.roll(U, -1, axis=1) - U).sum(axis=1)


# ---- conservation ---------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, 40, elements=st.floats(0.0, 2.0)), st.sampled_from(("weno5", "weno7", "weno9")))
def test_conservation_sum(u, scheme):
    sd = make_semidiscretization("burgers", scheme, 40, 0.0, 1.0, u0=u)
    # near-rest data makes dt_fe huge; conservation is about the sum, not the step size
    dt = 0.5 * min(sd.dt_fe, sd.dx)
    out = step(make_family("SSP-3s5p", SQRT_HALF).tableau, sd, u, dt)
    assert out.sum() == pytest.approx(u.sum(), abs=1e-12 * (1 + np.abs(u).sum()))


# ---- Shu-Osher / Butcher step equivalence --------------------------------


def _lv_f(u):
    x, y = u
    return np.array([x * (1 - y), y * (x - 1)])


def _lv_fdot(u):
    x, y = u
    return np.array([[1 - y, -x], [y, x - 1]]) @ _lv_f(u)


LV = SemiDiscretization(f_op=_lv_f, fdot_op=_lv_fdot, dt_fe=1.0, K=None, x=np.zeros(2), dx=1.0)


@pytest.mark.parametrize("fid", SSP_IDS)
def test_shu_osher_step_matches_butcher(fid):
    m, C = _ssp_at_half(fid)
    x = -1 + 2 * np.arange(64) / 64
    u = 1 + 0.2 * np.sin(np.pi * x)
    sd = make_semidiscretization("burgers", "weno5", 64, -1.0, 2.0, u0=u)
    for r in (C, 0.5 * C):
        form = build_shu_osher(m.tableau, r, SQRT_HALF)
        dt = 0.8 * sd.dt_fe
        np.testing.assert_allclose(step_shu_osher(form, m.tableau, sd, u, dt), step(m.tableau, sd, u, dt), atol=1e-12)
        u_lv = np.array([1.5, 0.7])
        np.testing.assert_allclose(step_shu_osher(form, m.tableau, LV, u_lv, 0.1), step(m.tableau, LV, u_lv, 0.1), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(SSP_IDS),
    arrays(np.float64, 32, elements=st.floats(0.0, 1.0)),
    st.floats(0.05, 1.0),
)
def test_shu_osher_step_matches_butcher_random_data(fid, u, frac):
    m, C = _ssp_at_half(fid)
    sd = make_semidiscretization("advection-left", "first-order", 32)
    form = build_shu_osher(m.tableau, C, SQRT_HALF)
    dt = frac * C * sd.dt_fe
    np.testing.assert_allclose(step_shu_osher(form, m.tableau, sd, u, dt), step(m.tableau, sd, u, dt), atol=1e-12)


# ---- convex-combination consistency ---------------------------------------


@pytest.mark.parametrize("fid", SSP_IDS)
def test_convex_combination_families(fid):
    m, C = _ssp_at_half(fid)
    for r in (C, 0.5 * C):
        form = build_shu_osher(m.tableau, r, SQRT_HALF)
        e = np.ones(m.tableau.s + 1)
        assert np.abs(form.Rv + form.P @ e + form.Q @ e - e).max() <= 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.lists(st.floats(-2, 2), min_size=3, max_size=3),
    st.floats(0.05, 3.0),
    st.floats(0.1, 3.0),
)
def test_convex_combination_any_tableau(a, ah, b, bh, r, K):
    # Rv + P e + Q e = e is an identity, relative to the size of the entries
    A = np.zeros((3, 3))
    Ah = np.zeros((3, 3))
    A[np.tril_indices(3, -1)] = a
    Ah[np.tril_indices(3, -1)] = ah
    tab = TwoDerivativeTableau(A=A, Ahat=Ah, b=b, bhat=bh)
    form = build_shu_osher(tab, r, K)
    scale = max(1.0, np.abs(form.P).max(), np.abs(form.Q).max(), np.abs(form.Rv).max())
    assert form.consistency_residual() <= 1e-12 * scale


# ---- exhaustive forward-Euler TVD check ------------------------------------


def test_exhaustive_forward_euler_tvd_n16():
    # every 0/1 pattern on 16 points: both building blocks are TVD at their limits
    U = np.array(list(itertools.product((0.0, 1.0), repeat=16)))
    dx = 1.0 / 16
    tv0 = _tv_rows(U)
    fe = U + dx * (np.roll(U, -1, axis=1) - U) / dx
    assert np.all(_tv_rows(fe) <= tv0 + 1e-12)
    dt = SQRT_HALF * dx
    sd = U + dt**2 * (np.roll(U, -1, axis=1) - 2 * U + np.roll(U, 1, axis=1)) / dx**2
    assert np.all(_tv_rows(sd) <= tv0 + 1e-12)
    # just past either limit some pattern gains variation
    fe_bad = U + 1.01 * (np.roll(U, -1, axis=1) - U)
    assert np.any(_tv_rows(fe_bad) > tv0 + 1e-9)
    sd_bad = U + 0.51 * (np.roll(U, -1, axis=1) - 2 * U + np.roll(U, 1, axis=1))
    assert np.any(_tv_rows(sd_bad) > tv0 + 1e-9)


def test_exhaustive_tvd_through_library_operators():
    # the same check through the operators the integrator actually uses
    sd = make_semidiscretization("advection-left", "first-order", 16)
    U = np.array(list(itertools.product((0.0, 1.0), repeat=16)))
    tv0 = _tv_rows(U)
    fe = np.array([u + sd.dt_fe * sd.f_op(u) for u in U])
    assert np.all(_tv_rows(fe) <= tv0 + 1e-12)
    dt = sd.K * sd.dt_fe
    sdv = np.array([u + dt**2 * sd.fdot_op(u) for u in U])
    assert np.all(_tv_rows(sdv) <= tv0 + 1e-12)
