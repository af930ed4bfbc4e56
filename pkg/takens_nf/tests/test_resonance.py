"""Tests for interval products, non-resonance and spectral gap conditions."""
import itertools
import math

import numpy as np
import pytest

from takens_nf.exceptions import ArityError, EnumerationBudgetError
from takens_nf.resonance import (
    MultiIndex,
    check_gap,
    check_non_resonance,
    count_multi_indices,
    enumerate_multi_indices,
    interval_power_product,
    log_separation,
    resonance_order,
    scalar_takens_resonances,
)
from takens_nf.spectral import SpectrumResult


@pytest.fixture
def resonant_spectrum():
    """0.25 * 4 = 1 puts q = (1, 1) on the center interval."""
    return SpectrumResult.from_intervals([[0.2, 0.25], [4.0, 5.0]], [0.95, 1.05])


def naive_witnesses(spectrum, N):
    """Plain products and comparisons over every multi-index, no log space."""
    found = set()
    r = spectrum.r
    nu_lo, nu_hi = spectrum.center_or_unit
    for q in itertools.product(range(N + 1), repeat=r):
        order = sum(q)
        if not 1 <= order <= N:
            continue
        lo = nu_lo**N
        hi = nu_hi**N
        for power, (a, b) in zip(q, spectrum.hyperbolic_intervals):
            lo *= a**power
            hi *= b**power
        if spectrum.center_interval is not None:
            c_lo, c_hi = spectrum.center_interval
            if lo <= c_hi and hi >= c_lo:
                found.add(("center", q, None))
        if order >= 2:
            for j, (a, b) in enumerate(spectrum.hyperbolic_intervals):
                if lo <= b and hi >= a:
                    found.add(("hyperbolic", q, j))
    return found


def random_spectrum(rng):
    """One to three hyperbolic intervals on either side of 1, with a center interval most of the time."""
    r = int(rng.integers(1, 4))
    stable = int(rng.integers(0, r + 1))
    ends = np.concatenate(
        [np.sort(rng.uniform(-3.0, -0.3, size=2 * stable)), np.sort(rng.uniform(0.3, 2.5, size=2 * (r - stable)))]
    )
    intervals = np.exp(ends).reshape(r, 2).tolist()
    if rng.uniform() < 0.2:
        return SpectrumResult.from_intervals(intervals, None)
    spread = rng.uniform(0.01, 0.2)
    return SpectrumResult.from_intervals(intervals, [math.exp(-spread), math.exp(spread)])


def test_multi_index_rejects_negative_entries():
    with pytest.raises(ArityError):
        MultiIndex((1, -1))
    assert MultiIndex((2, 0, 1)).order == 3


def test_enumeration_is_complete_and_graded():
    indices = list(enumerate_multi_indices(3, 1, 4))
    assert len(indices) == len(set(indices)) == count_multi_indices(3, 1, 4) == 34
    assert [q.order for q in indices] == sorted(q.order for q in indices)
    assert count_multi_indices(0, 0, 3) == 1
    with pytest.raises(ArityError):
        list(enumerate_multi_indices(2, 3, 1))


def test_interval_power_product(resonant_spectrum):
    lo, hi = interval_power_product(resonant_spectrum, (1, 1), 2)
    assert lo == pytest.approx(0.2 * 4.0 * 0.95**2)
    assert hi == pytest.approx(0.25 * 5.0 * 1.05**2)
    hyperbolic = SpectrumResult.from_intervals([[0.2, 0.25]], None)
    assert interval_power_product(hyperbolic, (2,), 5) == pytest.approx((0.04, 0.0625))
    with pytest.raises(ArityError):
        interval_power_product(resonant_spectrum, (1,), 2)


def test_log_separation():
    margin, side = log_separation((1.0, 2.0), (3.0, 4.0))
    assert side == "below"
    assert margin == pytest.approx(math.log(1.5))
    assert log_separation((5.0, 6.0), (3.0, 4.0))[1] == "above"
    # shared endpoints overlap
    margin, side = log_separation((1.0, 3.0), (3.0, 4.0))
    assert side is None
    assert margin <= 0.0


def test_center_resonance_is_found(resonant_spectrum):
    report = check_non_resonance(resonant_spectrum, 2)
    assert not report.nr1_pass
    assert report.nr2_pass
    assert not report.passed
    assert report.witnesses() == {("center", (1, 1), None)}
    witness = report.to_dict()["violations"][0]
    assert witness["q"] == [1, 1]
    assert witness["target"] == "center"
    assert report.branches[("center", (1, 0), None)] == "below"
    assert report.branches[("center", (0, 1), None)] == "above"


def test_hyperbolic_resonance_is_found():
    spectrum = SpectrumResult.from_intervals([[0.2, 0.21], [0.04, 0.045]], [0.99, 1.01])
    report = check_non_resonance(spectrum, 2)
    assert report.nr1_pass
    # intervals are sorted, so 0.2^2 lands on interval 0
    assert ("hyperbolic", (0, 2), 0) in report.witnesses("hyperbolic")


def test_non_resonant_spectrum_passes():
    spectrum = SpectrumResult.from_intervals([[0.3, 0.35], [6.0, 7.0]], [0.99, 1.01])
    report = check_non_resonance(spectrum, 3)
    assert report.passed
    assert report.violations == ()
    assert report.to_dict()["nr1_pass"]


@pytest.mark.parametrize("seed", range(100))
def test_agrees_with_naive_enumeration(seed):
    spectrum = random_spectrum(np.random.default_rng(seed))
    for N in range(2, 6):
        report = check_non_resonance(spectrum, N, varsigma=0.0)
        assert report.witnesses() == naive_witnesses(spectrum, N)


def test_inflation_creates_resonances():
    spectrum = SpectrumResult.from_intervals([[0.5, 0.6]], [0.99, 1.01])
    assert check_non_resonance(spectrum, 2, varsigma=0.0).nr2_pass
    assert not check_non_resonance(spectrum, 2, varsigma=0.15).nr2_pass


def test_purely_hyperbolic_spectrum_skips_center_condition():
    spectrum = SpectrumResult.from_intervals([[0.2, 0.25], [6.0, 7.0]], None)
    assert check_non_resonance(spectrum, 2).nr1_pass


def test_budget_and_order_arguments(resonant_spectrum):
    with pytest.raises(EnumerationBudgetError):
        check_non_resonance(resonant_spectrum, 2, budget=3)
    with pytest.raises(ArityError):
        check_non_resonance(resonant_spectrum, 1)


class TestCheckGap:
    def test_margins(self, resonant_spectrum):
        report = check_gap(resonant_spectrum, 2)
        assert report.passed
        assert report.left_margin == pytest.approx(math.log(0.95**2 / 0.25))
        assert report.right_margin == pytest.approx(math.log(4.0 / 1.05**2))

    def test_high_order_fails_on_the_left(self, resonant_spectrum):
        report = check_gap(resonant_spectrum, 30)
        assert report.left_margin < 0
        assert not report.passed

    def test_missing_side_is_vacuous(self):
        report = check_gap(SpectrumResult.from_intervals([[4.0, 5.0]], [0.95, 1.05]), 2)
        assert report.vacuous == ("left",)
        assert report.passed
        assert report.to_dict()["left_margin"] is None

    def test_suspension_rates(self, resonant_spectrum):
        report = check_gap(resonant_spectrum, 2, rates=(0.5, 0.1))
        upper, lower = report.suspension_margins
        assert upper == pytest.approx(-math.log(0.1) - 2 * math.log(1.05))
        assert lower == pytest.approx(2 * math.log(0.95) - math.log(0.5))
        assert check_gap(resonant_spectrum, 2, rates=(0.0, 0.0)).suspension_margins == (math.inf, math.inf)


def test_scalar_takens_resonances():
    assert scalar_takens_resonances([0.5, 2.0], 2) == {("center", (1, 1), None)}
    assert scalar_takens_resonances([0.5, 0.25], 2) == {("hyperbolic", (2, 0), 1)}
    assert scalar_takens_resonances([0.3, 3.0], 4) == set()


def test_resonance_order():
    assert resonance_order(3) == 10
    assert resonance_order(1) == 4
    with pytest.raises(ArityError):
        resonance_order(0)
