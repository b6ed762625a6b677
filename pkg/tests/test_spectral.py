import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import GRID, no_adjacent_ones_weight
from tbf_lab import DomainError
from tbf_lab.spectral import (
    Density,
    build_spectrum,
    isolation_weight,
    q_power,
    q_power_log,
    ratio_limit_onesided,
    ratio_limit_twosided,
    transfer_matrix,
)

# frozen from numpy.linalg.eigh on Q(0.5)
LAM_HALF = 0.8090169943749475
LR_HALF = -0.30901699437494745
A_HALF = -0.3819660112501051


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5, float("nan"), float("inf"), True, "0.5"])
def test_density_rejects_outside_open_interval(bad):
    with pytest.raises(DomainError):
        Density(bad)


def test_spectrum_at_half_matches_eigensolver():
    sp = build_spectrum(0.5)
    assert sp.lambda_pf == pytest.approx(LAM_HALF, abs=1e-14)
    assert sp.lambda_r == pytest.approx(LR_HALF, abs=1e-14)
    assert sp.a == pytest.approx(A_HALF, abs=1e-14)
    assert sp.c_ratio == pytest.approx(3.6180339887498953, abs=1e-12)
    assert sp.d_const == pytest.approx(1.708203932499369, abs=1e-12)


@pytest.mark.parametrize("p", GRID)
def test_spectrum_against_generic_eigensolver(p):
    sp = build_spectrum(p)
    w, v = np.linalg.eigh(transfer_matrix(p))
    assert sp.lambda_r == pytest.approx(w[0], abs=1e-13)
    assert sp.lambda_pf == pytest.approx(w[1], abs=1e-13)
    vec = v[:, 1] / v[1, 1]
    assert sp.v_pf[0] == pytest.approx(vec[0], rel=1e-12)
    sp.check(1e-12)


@pytest.mark.parametrize("p", GRID)
def test_identities_and_ranges(p):
    sp = build_spectrum(p)
    assert 0 < sp.lambda_pf < 1
    assert -1 / 3 < sp.lambda_r < 0
    assert -1 < sp.a < 0
    assert abs(sp.lambda_pf + sp.lambda_r - (1 - p)) <= 1e-12
    assert abs(sp.lambda_pf * sp.lambda_r + p * (1 - p)) <= 1e-12
    assert abs(sp.lambda_pf - sp.lambda_r - math.sqrt((1 - p) * (3 * p + 1))) <= 1e-12
    lam = sp.lambda_pf
    assert sp.d_const == pytest.approx((1 - p) * (lam + 2 * p) / lam**3, rel=1e-14)
    assert sp.c_ratio == pytest.approx(sp.sqrt_disc / abs(sp.lambda_r), rel=1e-14)


def test_eigenvalue_ratio_strictly_decreasing():
    a = [build_spectrum(p).a for p in GRID]
    assert all(x > y for x, y in zip(a, a[1:]))


def test_eigenvalue_ratio_endpoint_limits():
    assert abs(build_spectrum(1e-6).a - 0.0) < 1e-2
    assert abs(build_spectrum(1 - 1e-6).a - (-1.0)) < 1e-2


def test_q_power_small_cases():
    assert np.allclose(q_power(0.5, 1), [[0.5, 0.5], [0.5, 0.0]], atol=1e-15)
    Q = transfer_matrix(0.5)
    assert q_power(0.5, 2)[0, 0] == pytest.approx((Q @ Q)[0, 0], abs=1e-15)
    assert q_power(0.5, 2)[0, 0] == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("p", [0.05, 0.3, 0.5, 0.7, 0.95])
def test_q_power_matches_repeated_multiplication(p):
    Q = transfer_matrix(p)
    M = np.eye(2)
    for m in range(1, 31):
        M = M @ Q
        assert np.abs(q_power(p, m) - M).max() <= 1e-10 * np.abs(M).max()


def test_q_power_rejects_zero():
    with pytest.raises(DomainError):
        q_power(0.5, 0)


def test_q_power_log_agrees_and_survives_large_powers():
    log_abs, sign = q_power_log(0.3, 25)
    assert np.allclose(sign * np.exp(log_abs), q_power(0.3, 25), rtol=1e-12)
    log_abs, sign = q_power_log(0.9, 5000)
    assert np.all(np.isfinite(log_abs))
    assert np.all(sign > 0)
    # the direct form underflows gracefully rather than failing
    assert np.all(q_power(0.9, 5000) >= 0)


def test_ratio_limit_examples():
    assert ratio_limit_onesided(0.5, 0, 0, 0) == 1.0
    assert ratio_limit_onesided(0.5, 0, 0, 1) == pytest.approx(1.6180340, abs=1e-7)
    assert ratio_limit_onesided(0.5, 1, 1, 1) == pytest.approx(0.8090170, abs=1e-7)
    assert ratio_limit_twosided(0.5, 0, 1, 1) == pytest.approx(3.6180340, abs=1e-7)
    assert ratio_limit_twosided(0.5, 0, 0, 0) == pytest.approx(1.3819660, abs=1e-7)


@pytest.mark.parametrize("w,e,x,y,i", [(0, 0, 1, 1, 0), (0, 1, 0, 1, 2), (1, 0, 0, 0, 1), (1, 1, 1, 0, 3)])
def test_ratio_limits_are_finite_n_limits(w, e, x, y, i):
    p = 0.5
    n = 40
    Qn = q_power(p, n)
    two = q_power(p, 2 * n + i)[w, e] / (Qn[w, x] * Qn[y, e])
    assert abs(two - ratio_limit_twosided(p, i, x, y)) < 1e-6
    one = q_power(p, n + i)[w, x] / Qn[w, y]
    assert abs(one - ratio_limit_onesided(p, i, x, y)) < 1e-6


def test_ratio_limit_error_decays_like_a_power_n():
    p = 0.8
    a = abs(build_spectrum(p).a)
    ns = np.arange(10, 41)
    errs = []
    for n in ns:
        Qn = q_power(p, int(n))
        errs.append(abs(q_power(p, 2 * int(n))[0, 0] / (Qn[0, 1] * Qn[1, 0]) - ratio_limit_twosided(p, 0, 1, 1)))
    slope = np.polyfit(ns, np.log(errs), 1)[0]
    assert slope == pytest.approx(math.log(a), rel=0.05)


def test_isolation_weight_examples():
    assert isolation_weight(0.5, 1, 0, 0) == pytest.approx(1.0, abs=1e-15)
    assert isolation_weight(0.5, 2, 1, 1) == pytest.approx(no_adjacent_ones_weight(0.5, 2, 1, 1), abs=1e-15)
    for l in (0, 1):
        for r in (0, 1):
            expected = q_power(0.5, 1)[l, r] / math.sqrt((0.5) * (0.5))
            assert isolation_weight(0.5, 0, l, r) == pytest.approx(expected, abs=1e-15)
    assert isolation_weight(0.3, 0, 1, 1) == 0.0


@settings(max_examples=40, deadline=None)
@given(
    p=st.floats(0.02, 0.98),
    length=st.integers(0, 16),
    left=st.integers(0, 1),
    right=st.integers(0, 1),
)
def test_isolation_weight_equals_enumeration(p, length, left, right):
    assert isolation_weight(p, length, left, right) == pytest.approx(
        no_adjacent_ones_weight(p, length, left, right), abs=1e-12
    )
