import numpy as np
import pytest

from starkwalk import AccuracyError, bessel_halfwidth, bessel_j_array, bessel_table

from conftest import bessel_series

# frozen from the power-series oracle at 50 digits
J0_AT_2 = 0.22389077914123567
J1_AT_2 = 0.57672480775687338


def test_j0_at_argument_two():
    table = bessel_table(F=1.0, order_max=60)
    assert abs(table.j(0) - J0_AT_2) < 1e-15
    assert abs(table.j(0) - bessel_series(0, 2.0)) < 1e-15


def test_negative_order_parity_exact():
    table = bessel_table(F=1.0, order_max=40)
    assert table.j(-1) == -table.j(1)
    assert abs(table.j(-1) + J1_AT_2) < 1e-15
    for nu in range(41):
        assert table.j(-nu) == (-1.0) ** nu * table.j(nu)


@pytest.mark.parametrize("F", [2.0, 1.0, 0.5, 0.2])
def test_quadratic_normalization(F):
    table = bessel_table(F, order_max=bessel_halfwidth(2.0 / F) + 10)
    assert table.normalization_defect() <= 1e-12


@pytest.mark.parametrize("z", [1.0, 4.0, 10.0])
def test_against_power_series_sweep(z):
    values = bessel_j_array(z, 40)
    worst = max(abs(values[nu] - bessel_series(nu, z)) for nu in range(41))
    assert worst <= 1e-12


def test_series_relative_accuracy_in_decay_tail():
    # downward recurrence keeps relative accuracy far below the normal scale
    values = bessel_j_array(2.0, 80)
    for nu in (40, 60, 80):
        oracle = bessel_series(nu, 2.0)
        assert abs(values[nu] / oracle - 1.0) < 1e-12


def test_large_argument_normalization():
    table = bessel_table(F=1e-3, order_max=2400)
    assert table.normalization_defect() <= 1e-12


def test_range_too_small_is_an_error():
    with pytest.raises(AccuracyError):
        bessel_table(F=0.05, order_max=20)   # argument 40 needs far more range


def test_halfwidth_captures_mass():
    z = 8.0
    w = bessel_halfwidth(z, tail=1e-16)
    values = bessel_j_array(z, w + 200)
    tail = 2.0 * np.sum(values[w + 1:] ** 2)
    assert tail <= 1e-16


def test_zero_argument():
    values = bessel_j_array(0.0, 5)
    assert values[0] == 1.0
    assert np.all(values[1:] == 0.0)
