import math

import pytest

from bubblekit import (
    ConstantLevels,
    ConstantYield,
    DeclaredConvergent,
    DeclaredDivergent,
    GeometricYield,
    PowerYield,
    TailClass,
    TailUnsupportedError,
    ValidationError,
    ZeroDividends,
    classify_tail,
)
from bubblekit.tails import geometric_tail_log_sum, power_tail_log_sum

from oracles import log_tail_sum, log_tail_sum_power, pseries_partial


@pytest.mark.parametrize(
    "tail, expected",
    [
        (ConstantLevels(100, 5), TailClass.DIVERGENT),
        (ConstantLevels(100, 0), TailClass.CONVERGENT),
        (ConstantYield(0.05), TailClass.DIVERGENT),
        (GeometricYield(0.5, 0.5), TailClass.CONVERGENT),
        (PowerYield(1, 0.5), TailClass.DIVERGENT),
        (PowerYield(1, 1), TailClass.DIVERGENT),
        (PowerYield(1, 1.5), TailClass.CONVERGENT),
        (PowerYield(1, 2), TailClass.CONVERGENT),
        (ZeroDividends(), TailClass.CONVERGENT),
        (DeclaredDivergent(), TailClass.DIVERGENT),
        (DeclaredConvergent(0.25), TailClass.CONVERGENT),
    ],
)
def test_classify_tail(tail, expected):
    assert classify_tail(tail) is expected


def test_classify_tail_agrees_with_pseries_partial_sums():
    # integral-test oracle: partial sums to 1e7 terms keep growing for
    # p <= 1 (each doubling adds a bounded-away-from-zero chunk) and
    # plateau for p > 1
    for p in (0.5, 1.0, 1.5, 2.0):
        growth = pseries_partial(p, 10_000_000) - pseries_partial(p, 5_000_000)
        diverges = growth > 0.1
        assert diverges == (classify_tail(PowerYield(1, p)) is TailClass.DIVERGENT)


def test_classify_tail_rejects_unknown_objects():
    with pytest.raises(TailUnsupportedError):
        classify_tail(object())


@pytest.mark.parametrize(
    "build",
    [
        lambda: ConstantLevels(0, 5),
        lambda: ConstantLevels(100, -1),
        lambda: ConstantYield(0),
        lambda: GeometricYield(0, 0.5),
        lambda: GeometricYield(1, 1.0),
        lambda: GeometricYield(1, 0),
        lambda: PowerYield(-1, 2),
        lambda: PowerYield(1, 0),
        lambda: DeclaredConvergent(-0.1),
    ],
)
def test_tail_parameter_validation(build):
    with pytest.raises(ValidationError):
        build()


@pytest.mark.parametrize(
    "coeff, ratio, start",
    [(0.5, 0.5, 1), (0.5, 0.5, 11), (2.0, 0.9, 1), (0.01, 0.3, 5), (1.0, 0.99, 1)],
)
def test_geometric_tail_log_sum_against_mpmath(coeff, ratio, start):
    expected = log_tail_sum(coeff, lambda t, r=ratio: r**t, start)
    assert geometric_tail_log_sum(coeff, ratio, start) == pytest.approx(
        expected, rel=1e-13, abs=1e-300
    )


def test_geometric_tail_log_sum_slow_decay_branch():
    # the dilogarithm branch (ratio > 0.999) must agree with both mpmath
    # and the direct-summation branch just below the switch
    expected = log_tail_sum(0.5, lambda t: 0.9995**t, 1)
    assert geometric_tail_log_sum(0.5, 0.9995, 1) == pytest.approx(expected, rel=1e-9)
    near = geometric_tail_log_sum(0.5, 0.99899, 1)
    near_expected = log_tail_sum(0.5, lambda t: 0.99899**t, 1)
    assert near == pytest.approx(near_expected, rel=1e-12)


@pytest.mark.parametrize(
    "coeff, exponent, start",
    [(1.0, 2.0, 1), (1.0, 1.5, 1), (0.3, 3.0, 7), (5.0, 2.5, 1), (1.0, 1.1, 4)],
)
def test_power_tail_log_sum_against_quadrature(coeff, exponent, start):
    expected = log_tail_sum_power(coeff, exponent, start)
    assert power_tail_log_sum(coeff, exponent, start) == pytest.approx(
        expected, rel=1e-12
    )


def test_power_tail_log_sum_rejects_divergent_exponent():
    with pytest.raises(TailUnsupportedError):
        power_tail_log_sum(1.0, 1.0, 1)


def test_power_tail_log_sum_huge_coefficient_is_finite():
    # absurd coefficient: the sum is astronomically large but must come
    # back finite and positive without overflow
    value = power_tail_log_sum(1e12, 2.0, 1)
    assert math.isfinite(value) and value > 1e5
