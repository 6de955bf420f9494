from __future__ import annotations

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mpf

from kfibconcat import baker
from kfibconcat.baker import (
    GuzmanPreconditionError,
    MatveevInstance,
    bound_chain,
    guzman_invert,
    guzman_scan,
    invert_exact,
    large_k_chain,
    matveev_constant,
    matveev_exponent,
    small_k_checks,
    small_k_lemmas,
)
from kfibconcat.precision import RealValue


def rv(x):
    return RealValue.of(x, 60)


def test_matveev_constants():
    assert float(matveev_constant(2)) == pytest.approx(-1.4 * 30**5 * 2**4.5, rel=1e-12)
    # 1.4 * 30^5 * 2^4.5 = 7.69777e8; the rounded 7.6975e8 is within 4e-5
    assert float(matveev_constant(2)) == pytest.approx(-7.6975e8, rel=1e-4)


def test_matveev_small_k_structure():
    # t=2, d_F=k, A=(log alpha, k log 10): |C(2)| k^2 (1 + log k) k log alpha log 10 (1 + log B)
    k, B = 7, 1000
    la = mpmath.log(mpf("1.98"))
    e = matveev_exponent(MatveevInstance(2, k, rv(B), (rv(max(la, 0.16)), rv(k * mpmath.log(10)))))
    expected = (-1.4 * 30**5 * 2**4.5 * k**2 * (1 + mpmath.log(k)) * (1 + mpmath.log(B))
                * max(la, 0.16) * k * mpmath.log(10))
    assert float(e) == pytest.approx(float(expected), rel=1e-12)


def test_matveev_large_k_structure():
    B = 10**5
    e = matveev_exponent(MatveevInstance(2, 1, rv(B), (rv(mpmath.log(10)), rv(mpmath.log(2)))))
    expected = -1.4 * 30**5 * 2**4.5 * (1 + mpmath.log(B)) * mpmath.log(10) * mpmath.log(2)
    assert float(e) == pytest.approx(float(expected), rel=1e-12)


def test_matveev_validation():
    with pytest.raises(ValueError):
        MatveevInstance(4, 1, rv(2), (rv(1),) * 4)
    with pytest.raises(ValueError):
        MatveevInstance(2, 1, rv(2), (rv(0.1), rv(1)))


@given(st.floats(0.16, 1e6), st.floats(0.16, 1e6), st.floats(1, 1e30), st.floats(1.01, 2.0))
def test_matveev_monotone(a1, a2, b, scale):
    base = MatveevInstance(2, 3, rv(b), (rv(a1), rv(a2)))
    bigger_a = MatveevInstance(2, 3, rv(b), (rv(a1 * scale), rv(a2)))
    bigger_b = MatveevInstance(2, 3, rv(b * scale), (rv(a1), rv(a2)))
    assert float(matveev_exponent(bigger_a)) < float(matveev_exponent(base))
    assert float(matveev_exponent(bigger_b)) < float(matveev_exponent(base))


def test_guzman_formula():
    assert float(guzman_invert(1, 1000)) == pytest.approx(2 * 1000 * mpmath.log(1000), rel=1e-12)
    with pytest.raises(GuzmanPreconditionError):
        guzman_invert(2, 100)


def test_guzman_brute_force_e1_h1000():
    # Largest f below 2e4 with f/log f < 1000, found by plain iteration.
    import math

    largest = max(f for f in range(2, 20001) if f / math.log(f) < 1000)
    assert largest < 2 * 1000 * math.log(1000)


@pytest.mark.parametrize("e", [1, 2])
@pytest.mark.parametrize("H", [100, 1000, 10000])
def test_guzman_scan(e, H):
    assert guzman_scan(e, H)


@pytest.mark.parametrize("e,H", [(1, 1000), (2, 10**6), (2, mpf("1.2e24"))])
def test_exact_inversion_below_guzman(e, H):
    f = invert_exact(e, H)
    assert f <= guzman_invert(e, H).value
    with mpmath.workdps(60):
        assert f / mpmath.log(f) ** e >= H * (1 - mpf(10) ** -40)


def test_bound_chain_examples():
    # direct arithmetic: 5.2e26 * 3^7 * log^4 3 = 1.657e30
    direct = 5.2e26 * 3**7 * mpmath.log(3) ** 4
    assert float(bound_chain(3).bound_n) == pytest.approx(float(direct), rel=1e-12)
    assert float(bound_chain(3).bound_n) < 1e31
    k = 420
    expected = 5.2e26 * k**7 * mpmath.log(k) ** 4
    assert float(bound_chain(k).bound_n) == pytest.approx(float(expected), rel=1e-12)
    assert 1e47 < float(bound_chain(k).bound_n) < 1e49
    big = bound_chain(10**28).bound_n
    assert 8.9e229 < float(big) < 9e229


@given(st.integers(3, 10**6), st.integers(1, 1000))
def test_bound_chain_monotone(k, dk):
    assert bound_chain(k).bound_n.value < bound_chain(k + dk).bound_n.value
    assert bound_chain(k, strict=True).bound_n.value < bound_chain(k + dk, strict=True).bound_n.value


def test_strict_chain_is_tighter():
    for k in (3, 50, 400):
        assert bound_chain(k, strict=True).bound_n.value <= bound_chain(k).bound_n.value


PRINTED = {
    "nl_first_coeff": 7.1e9, "n1_coeff": 2.7e12, "nl_case_l_le_m": 4.98e11, "n_case_l_le_m": 1e12,
    "n1_case_m_lt_l_coeff": 2e22, "n_final_coeff": 5.2e26, "lambda_coeff": 3.6e9,
    "lambda_logk_coeff": 9.37e10, "nl_branch_coeff": 9.4e10, "k_coeff": 1.2e24, "k_final": 1e28,
    "n_final": 9e229,
}


def test_printed_constants_rederived():
    checks = {c.name: c for c in small_k_checks() + large_k_chain()["checks"]}
    for name, printed in PRINTED.items():
        c = checks[name]
        assert c.printed == printed
        assert c.computed <= c.printed, name
        assert c.ratio >= 0.5, name


def test_large_k_chain_extras():
    res = large_k_chain()
    checks = {c.name: c for c in res["checks"]}
    assert checks["u4_numerator"].computed == 168
    assert checks["lambda_logk_coeff"].computed == pytest.approx(9.36e10, rel=1e-3)
    assert all(lem.holds for lem in res["lemmas"])
    assert res["k_bound_exact"] < res["k_bound"] <= 1e28 < res["k_bound_guzman"]
    with pytest.raises(ValueError):
        large_k_chain(400)


def test_small_k_lemmas_hold():
    assert all(lem.holds for lem in small_k_lemmas(range(3, 120)))


def test_printed_tables_consistent():
    assert baker.PRINTED_LARGE_K["n_final"] == 9e229
    assert baker.PRINTED_SMALL_K["n_final_coeff"] == 5.2e26
