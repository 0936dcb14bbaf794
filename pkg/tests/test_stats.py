import math

import pytest

from qcheque.stats import binomial_sigma, sigma_of_mean, within_sigma, wilson_interval


def test_binomial_sigma_closed_form():
    assert binomial_sigma(0.5, 100) == pytest.approx(0.05)
    assert binomial_sigma(0.0, 10) == 0.0
    assert binomial_sigma(1.0, 10) == 0.0


def test_sigma_of_mean_matches_iid_case():
    probs = [0.25] * 400
    assert sigma_of_mean(probs) == pytest.approx(binomial_sigma(0.25, 400))


def test_sigma_of_mean_heterogeneous():
    # var of the mean is the summed Bernoulli variances over n^2
    probs = [0.1, 0.9]
    want = math.sqrt((0.1 * 0.9 + 0.9 * 0.1) / 4)
    assert sigma_of_mean(probs) == pytest.approx(want)


def test_within_sigma_band():
    assert within_sigma(0.52, 0.5, 0.01, z=4.0)
    assert not within_sigma(0.55, 0.5, 0.01, z=4.0)


def test_within_sigma_zero_sigma_demands_exactness():
    assert within_sigma(1.0, 1.0, 0.0)
    assert within_sigma(0.0, 0.0, 0.0)
    assert not within_sigma(0.001, 0.0, 0.0)


def test_wilson_interval_brackets_rate():
    low, high = wilson_interval(80, 100)
    assert 0.0 <= low < 0.8 < high <= 1.0


def test_wilson_interval_extremes_stay_in_unit_range():
    low, high = wilson_interval(0, 50)
    assert low == 0.0 and high < 0.2
    low, high = wilson_interval(50, 50)
    assert low > 0.8 and high == 1.0


def test_wilson_interval_frozen_value():
    # hand-checked against the closed form at z = 1.96
    low, high = wilson_interval(5, 10)
    assert low == pytest.approx(0.23658959, abs=1e-6)
    assert high == pytest.approx(0.76341041, abs=1e-6)
