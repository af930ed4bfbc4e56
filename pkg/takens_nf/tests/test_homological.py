"""Tests for the two-sided series solver and the homological equations."""
import math

import numpy as np
import pytest

from takens_nf.cocycle import NonlinearSystem, builtin_family, nonlinearity_from_records, random_nonlinearity
from takens_nf.exceptions import (
    ArityError,
    ConditioningError,
    NonResonanceViolation,
    SplittingError,
    WindowTooSmallError,
)
from takens_nf.homological import (
    HomologicalProblem,
    block_jet,
    build_suspension,
    coefficient_block,
    hyperbolic_blocks,
    intersect_ranges,
    monomial_split,
    solve_homological_center,
    solve_homological_hyperbolic,
    solve_kappa,
    suspension_center_jets,
    two_sided_solve,
)
from takens_nf.jets import JetPoly, TimeJetSeq
from takens_nf.spectral import SpectrumResult, compute_spectrum

TOL = 1e-10
WINDOW = 48


def scalar_solve(rate, forcing, contracting, count=80, start=0):
    operators = np.full((count, 1, 1), rate)
    values = np.broadcast_to(np.asarray(forcing, dtype=float).reshape(-1, 1), (count, 1))
    return two_sided_solve(start, operators, np.array(values), np.array([contracting]), TOL)


class TestTwoSidedSolve:
    def test_contracting_constant_forcing(self):
        """k_{n+1} = 0.5 k_n - 1 settles at -2."""
        solution = scalar_solve(0.5, 1.0, True)
        assert solution.values[40, 0] == pytest.approx(-2.0, abs=1e-10)
        assert solution.residual < 1e-12

    def test_expanding_constant_forcing(self):
        """k_n = 0.5 (1 + k_{n+1}) settles at 1."""
        solution = scalar_solve(2.0, 1.0, False)
        assert solution.values[40, 0] == pytest.approx(1.0, abs=1e-10)
        assert solution.rates == (0.0, pytest.approx(0.5))

    def test_alternating_forcing(self):
        forcing = [(-1.0) ** n for n in range(80)]
        solution = scalar_solve(0.5, forcing, True)
        for n in range(38, 43):
            assert solution.values[n, 0] == pytest.approx(2.0 / 3.0 * (-1.0) ** n, abs=1e-10)

    def test_trusted_range_and_bound(self):
        solution = scalar_solve(0.5, 1.0, True, start=-40)
        assert solution.truncation == 34
        assert solution.trusted == (-6, 6)
        assert solution.bound == pytest.approx(2.0)

    def test_zero_forcing_needs_no_truncation(self):
        solution = scalar_solve(0.5, 0.0, True, count=3)
        assert solution.truncation == 0
        assert not solution.values.any()

    def test_rejects_coupled_parts(self):
        operators = np.array([[[0.5, 0.1], [0.1, 2.0]]] * 4)
        with pytest.raises(SplittingError):
            two_sided_solve(0, operators, np.ones((4, 2)), np.array([True, False]), TOL)

    def test_rejects_rates_near_one(self):
        with pytest.raises(ConditioningError):
            scalar_solve(0.9995, 1.0, True)

    def test_window_too_small(self):
        with pytest.raises(WindowTooSmallError):
            scalar_solve(0.5, 1.0, True, count=5)


def test_intersect_ranges():
    assert intersect_ranges(None, (1, 4)) == (1, 4)
    assert intersect_ranges((0, 3), None) == (0, 3)
    assert intersect_ranges((0, 3), (1, 4)) == (1, 3)


class TestMonomialSplit:
    spectrum = SpectrumResult.from_intervals([[0.2, 0.25], [4.0, 5.0]], [0.95, 1.05])

    def test_degree_one_against_center(self):
        split = monomial_split(self.spectrum, 1)
        assert split.s_minus == ((1, 0),)
        assert split.s_plus == ((0, 1),)
        assert split.mu2 == pytest.approx(0.25 / 0.95)
        assert split.mu1 == pytest.approx(1.05 / 4.0)
        assert split.is_contracting((0, 1))
        assert not split.is_contracting((1, 0))

    def test_against_hyperbolic_interval(self):
        split = monomial_split(self.spectrum, 2, target=1)
        assert set(split.s_minus) == {(2, 0), (1, 1)}
        assert split.s_plus == ((0, 2),)

    def test_resonant_index_is_the_witness(self):
        with pytest.raises(NonResonanceViolation) as error:
            monomial_split(self.spectrum, 2)
        assert error.value.witness == (1, 1)


def test_coefficient_block_round_trip():
    dims = (1, 1, 1)
    jet = JetPoly(dims, 2, 3, {(1, 1, 0): [1.0, 2.0], (0, 1, 1): [3.0, 4.0], (2, 1, 0): [5.0, 6.0]})
    block = coefficient_block(jet, 1, 1)
    assert block.shape == (2, 2)
    np.testing.assert_allclose(block, [[1.0, 3.0], [2.0, 4.0]])
    again = block_jet(dims, block, 1, 1, 3)
    assert set(again.coeffs) == {(1, 1, 0), (0, 1, 1)}


def coupled_system(rate, records, window=WINDOW, order=3):
    """One hyperbolic variable with the given rate and one center variable."""
    if rate < 1.0:
        dims, matrix, interval = (1, 1, 0), np.diag([rate, 1.0]), [rate, rate]
    else:
        dims, matrix, interval = (0, 1, 1), np.diag([1.0, rate]), [rate, rate]
    linear = builtin_family("autonomous", {"matrix": matrix}, window=window)
    system = NonlinearSystem(linear, nonlinearity_from_records(records, dims, window, order))
    return system.with_spectrum(SpectrumResult.from_intervals([interval], [1.0, 1.0]))


def unit_rhs(system, value):
    """x_c-free center forcing value(n) * v on the system window."""
    dims = system.dims
    exponent = (1, 0) if dims[0] else (0, 1)
    return TimeJetSeq.from_function(
        system.window, lambda n: JetPoly(dims, 1, system.max_order, {exponent: [value(n)]})
    )


class TestSolveKappa:
    def test_contracting_hyperbolic_rate(self):
        """2 k - k = 1 when v contracts at 0.5."""
        system = coupled_system(0.5, [])
        split = monomial_split(system.spectrum, 1)
        kappa = solve_kappa(system, split, unit_rhs(system, lambda n: 1.0), TOL)
        assert kappa[0].coefficient((1, 0))[0] == pytest.approx(1.0, abs=1e-10)
        assert "M_kappa" in kappa.diagnostics

    def test_expanding_hyperbolic_rate(self):
        """k / 2 - k = 1 when v expands at 2."""
        system = coupled_system(2.0, [])
        split = monomial_split(system.spectrum, 1)
        kappa = solve_kappa(system, split, unit_rhs(system, lambda n: 1.0), TOL)
        assert kappa[0].coefficient((0, 1))[0] == pytest.approx(-2.0, abs=1e-10)
        assert kappa.trusted[0] <= 0 <= kappa.trusted[1]

    def test_alternating_forcing(self):
        """2 k_n - k_{n+1} = (-1)^n has the bounded solution (-1)^n / 3."""
        system = coupled_system(0.5, [])
        split = monomial_split(system.spectrum, 1)
        kappa = solve_kappa(system, split, unit_rhs(system, lambda n: (-1.0) ** n), TOL)
        for n in (-1, 0, 1):
            assert kappa[n].coefficient((1, 0))[0] == pytest.approx((-1.0) ** n / 3.0, abs=1e-10)

    def test_operator_at_x_c_degree_zero(self):
        system = coupled_system(0.5, [])
        problem = HomologicalProblem(system, 1, 0, "center", split=monomial_split(system.spectrum, 1))
        operator, substitution_c = problem.operator(0, 0)
        np.testing.assert_allclose(substitution_c, [[1.0]])
        np.testing.assert_allclose(operator, [[2.0]])


@pytest.mark.parametrize(("rate", "expected"), [(0.5, 2.0), (2.0, -1.0)])
def test_center_equation_closed_form(rate, expected):
    """The x_c v coupling m is removed by h = (m / (1 - rate)) x_c v with m = 0.3."""
    m = 0.3
    system = coupled_system(rate, [{"alpha": [1], "beta": [1], "coeff": [0.0, m] if rate < 1 else [m, 0.0]}])
    h = solve_homological_center(system, 1, 1, TOL)
    assert h[0].coefficient((1, 1))[0] == pytest.approx(expected * m, abs=1e-10)
    assert h.diagnostics["residual"] < 1e-9


def test_suspension_blocks():
    """Delta_n = [[A^c, 0], [M_n, L_n(0)]] with M_n read from the forcing -f(x_c, 2 v)."""
    m = 0.3
    system = coupled_system(0.5, [{"alpha": [1], "beta": [1], "coeff": [0.0, m]}])
    split = monomial_split(system.spectrum, 1)
    rhs = unit_rhs(system, lambda n: 0.0)
    kappa = solve_kappa(system, split, rhs, TOL)
    suspension = build_suspension(system, split, kappa)
    np.testing.assert_allclose(suspension.delta(0), [[1.0, 0.0], [-2.0 * m, 2.0]], atol=1e-12)
    np.testing.assert_allclose(suspension.operator(0), [[2.0]])
    assert suspension.diagnostics["M_sup"] == pytest.approx(2.0 * m)
    cocycle = suspension.as_cocycle_spec()
    assert cocycle.dim == 2


@pytest.mark.parametrize(("rate", "expected"), [(0.5, 4.0), (2.0, -0.5)])
def test_hyperbolic_equation_closed_form(rate, expected):
    """The v^2 term g of the hyperbolic row is removed by h = g / (rate - rate^2) v^2."""
    g = 0.2
    system = coupled_system(rate, [{"alpha": [2], "beta": [0], "coeff": [g, 0.0] if rate < 1 else [0.0, g]}])
    h = solve_homological_hyperbolic(system, 2, 0, TOL)
    exponent = (2, 0) if rate < 1 else (0, 2)
    assert h[0].coefficient(exponent)[0] == pytest.approx(expected * g, abs=1e-10)
    assert h.diagnostics["residual"] < 1e-9


def test_hyperbolic_equation_starts_at_degree_two():
    system = coupled_system(0.5, [])
    with pytest.raises(ArityError):
        solve_homological_hyperbolic(system, 1, 0, TOL)


def test_hyperbolic_blocks():
    system = coupled_system(0.5, [])
    assert hyperbolic_blocks(system, system.spectrum) == (0,)
    wrong_side = SpectrumResult.from_intervals([[2.0, 2.0]], [1.0, 1.0])
    with pytest.raises(ArityError):
        hyperbolic_blocks(system, wrong_side)


def test_suspension_section_carries_the_x_c_linear_part():
    m = 0.3
    system = coupled_system(0.5, [{"alpha": [1], "beta": [1], "coeff": [0.0, m]}])
    split = monomial_split(system.spectrum, 1)
    kappa = solve_kappa(system, split, unit_rhs(system, lambda n: 0.0), TOL)
    section = suspension_center_jets(build_suspension(system, split, kappa), system, split, 1, TOL)
    assert section[0].coefficient((1, 1))[0] == pytest.approx(2.0 * m, abs=1e-10)
    assert section.diagnostics["orbit_defect"] < 1e-8


def test_center_equation_linear_coupling():
    """x_c' = x_c + c x_s: h = gamma v with gamma (2 v) - gamma v = c (2 v), so gamma = 2 c."""
    c = 0.3
    linear = builtin_family("autonomous", {"matrix": [[0.5, 0.0], [c, 1.0]]}, window=WINDOW)
    system = NonlinearSystem(linear, nonlinearity_from_records([], (1, 1, 0), WINDOW, 3))
    system = system.with_spectrum(SpectrumResult.from_intervals([[0.5, 0.5]], [1.0, 1.0]))
    h = solve_homological_center(system, 1, 1, TOL)
    for n in (-5, 0, 5):
        assert h[n].coefficient((1, 0))[0] == pytest.approx(2.0 * c, abs=1e-10)
    assert h.diagnostics["residual"] < 1e-9


def test_suspension_section_closed_form():
    """Delta = [[1, 0], [m, 4]] carries the section eps with eps = m + 4 eps, so eps = -m / 3."""
    m = 0.3
    system = coupled_system(0.25, [{"alpha": [1], "beta": [1], "coeff": [0.0, -m / 4.0]}])
    split = monomial_split(system.spectrum, 1)
    kappa = solve_kappa(system, split, unit_rhs(system, lambda n: 0.0), TOL)
    suspension = build_suspension(system, split, kappa)
    np.testing.assert_allclose(suspension.delta(0), [[1.0, 0.0], [m, 4.0]], atol=1e-12)
    section = suspension_center_jets(suspension, system, split, 1, TOL)
    assert section[0].coefficient((1, 1))[0] == pytest.approx(-m / 3.0, abs=1e-10)


@pytest.mark.parametrize(("rate", "coeff"), [(0.5, [0.0, 0.3]), (2.0, [0.3, 0.0])])
def test_suspension_spectrum_avoids_the_gaps(rate, coeff):
    """The spectrum of Delta_n lies in (0, mu1] u [nu-, nu+] u [1 / mu2, oo)."""
    system = coupled_system(rate, [{"alpha": [1], "beta": [1], "coeff": coeff}])
    split = monomial_split(system.spectrum, 1)
    kappa = solve_kappa(system, split, unit_rhs(system, lambda n: 0.0), TOL)
    spectrum = compute_spectrum(build_suspension(system, split, kappa).as_cocycle_spec())
    nu_lo, nu_hi = system.spectrum.center_or_unit
    slack = math.exp(0.05)
    assert len(spectrum.intervals) == 2
    for lo, hi in spectrum.intervals:
        below = hi <= split.mu1 * slack
        center = nu_lo / slack <= lo and hi <= nu_hi * slack
        above = split.mu2 > 0 and lo * split.mu2 * slack >= 1.0
        assert below or center or above, (lo, hi)


def three_dimensional_system(seed, window=80):
    """diag(0.5, 1, 3) with a seed-fixed nonautonomous nonlinearity of degrees 2 and 3."""
    linear = builtin_family("autonomous", {"matrix": np.diag([0.5, 1.0, 3.0])}, window=window)
    jets = random_nonlinearity((1, 1, 1), window, degrees=(2, 3), scale=0.05, seed=seed, modulation=0.05)
    system = NonlinearSystem(linear, jets)
    return system.with_spectrum(SpectrumResult.from_intervals([[0.5, 0.5], [3.0, 3.0]], [1.0, 1.0]))


@pytest.mark.parametrize("seed", [11, 12, 13])
def test_three_dimensional_residuals(seed):
    system = three_dimensional_system(seed)
    split = monomial_split(system.spectrum, 1)
    rhs = TimeJetSeq.from_function(
        system.window, lambda n: JetPoly(system.dims, 1, 3, {(1, 0, 0): [math.cos(n)], (0, 0, 1): [0.5]})
    )
    kappa = solve_kappa(system, split, rhs, TOL)
    assert kappa.diagnostics["kappa"]["residual"] <= 1e-8
    for p in (1, 2):
        assert solve_homological_center(system, p, 1, TOL).diagnostics["residual"] <= 1e-8
    assert solve_homological_hyperbolic(system, 2, 1, TOL).diagnostics["residual"] <= 1e-8
