import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from nnlink.errors import UnsupportedOrder
from nnlink.theory import (
    LinkBudget,
    ber_gray_approx,
    ber_paper,
    q_function,
    ser_mqam,
    ser_mqam_exact,
)

mpmath.mp.dps = 40


def q_oracle(x):
    return float(mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2)


def test_q_function_values():
    assert q_function(0.0) == 0.5
    assert q_function(-1.3) == pytest.approx(1 - q_function(1.3), abs=1e-15)
    assert q_function(1.0) == pytest.approx(q_oracle(1.0), rel=1e-12)
    assert q_function(1.0) == pytest.approx(0.158655, abs=5e-7)


@pytest.mark.parametrize("x", [0.1, 1.0, 2.5, 5.0, 8.0, 12.0])
def test_q_function_precision(x):
    assert q_function(x) == pytest.approx(q_oracle(x), rel=1e-12)


def test_ser_examples():
    assert ser_mqam(1e6, 4) < 1e-12
    assert ser_mqam(1.0, 4) == pytest.approx(2 * q_oracle(1.0), rel=1e-12)
    assert ser_mqam(1.0, 4) == pytest.approx(0.317311, abs=1e-6)
    assert ser_mqam(10.0, 16) == pytest.approx(3 * q_oracle(np.sqrt(2)), rel=1e-12)
    # 0.235950 in rounded form (Q rounded to 0.078650 before the product)
    assert ser_mqam(10.0, 16) == pytest.approx(0.235950, abs=2e-6)


def test_ser_rejects_non_square():
    with pytest.raises(UnsupportedOrder):
        ser_mqam(1.0, 8)


@given(st.floats(0.01, 1e4))
def test_ser_m4_reduces_to_two_q(esn0):
    assert ser_mqam(esn0, 4) == pytest.approx(2 * q_function(np.sqrt(esn0)), rel=1e-14)


def test_ser_monotonic():
    esn0 = np.logspace(-1, 3, 50)
    for M in (4, 16, 64, 256):
        ser = ser_mqam(esn0, M)
        assert np.all(np.diff(ser) <= 0)
        below = ser[1:] < 1
        assert np.all(np.diff(ser)[below] < 0)
    for e in (1.0, 10.0, 100.0):
        vals = [ser_mqam(e, M) for M in (4, 16, 64, 256)]
        assert vals == sorted(vals)


def test_exact_ser_below_approximation():
    esn0 = np.logspace(-1, 2, 20)
    assert np.all(ser_mqam_exact(esn0, 16) <= ser_mqam(esn0, 16))


def test_ber_formulas():
    assert ber_paper(0.0, 4) == 0.0
    assert ber_paper(0.3, 4) == pytest.approx(0.2, abs=1e-15)
    assert ber_paper(0.15, 16) == pytest.approx(0.08, abs=1e-15)
    assert ber_gray_approx(0.3, 4) == pytest.approx(0.15)
    assert ber_gray_approx(0.4, 16) == pytest.approx(0.1)
    assert ber_gray_approx(0.37, 2) == 0.37


@given(st.sampled_from([4, 16, 64, 256]), st.floats(0.01, 1e3))
def test_ber_below_ser(M, esn0):
    ser = ser_mqam(esn0, M)
    for ber in (ber_paper(ser, M), ber_gray_approx(ser, M)):
        assert 0 <= ber <= ser <= 1


def test_link_budget_matches_esn0_identification():
    for M in (4, 16, 64):
        lb = LinkBudget.from_ebn0_db(7.0, M, bit_rate=2.5e6)
        esn0 = np.log2(M) * 10 ** 0.7
        assert lb.esn0 == pytest.approx(esn0, rel=1e-12)
        assert lb.snr_term == pytest.approx(esn0 / (M - 1), rel=1e-12)
        assert lb.ser() == pytest.approx(ser_mqam(esn0, M), rel=1e-12)
    with pytest.raises(ValueError):
        LinkBudget(-1.0, 1.0, 1.0, 1.0, 4)
