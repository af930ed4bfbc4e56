"""Tests for cocycles, builtin families, trichotomy verification and nonlinear systems."""
import math

import numpy as np
import pytest

from takens_nf.cocycle import (
    CocycleSpec,
    NonlinearSystem,
    TrichotomyData,
    builtin_family,
    cocycle_identity_defect,
    eval_cocycle,
    nonlinearity_from_records,
    random_nonlinearity,
    verify_trichotomy,
)
from takens_nf.exceptions import (
    ArityError,
    FamilyError,
    InvertibilityError,
    JetOrderError,
    OutOfWindowError,
    SplittingError,
    WindowTooSmallError,
)
from takens_nf.jets import JetPoly, TimeJetSeq, jet_evaluate

TOLERANCE = 1e-12


def step(window=8):
    return builtin_family("step", {"left": 2.0, "right": 0.5}, window=window)


class TestCocycleSpec:
    def test_rejects_singular_matrix(self):
        with pytest.raises(InvertibilityError):
            CocycleSpec(2, lambda n: np.array([[1.0, 0.0], [0.0, 0.0]]), 3)

    def test_rejects_small_declared_bounds(self):
        with pytest.raises(InvertibilityError, match="do not dominate"):
            CocycleSpec(1, lambda n: np.array([[2.0]]), 3, bounds=(1.0, 1.0))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ArityError):
            CocycleSpec(2, lambda n: np.eye(3), 3)

    def test_bounds_are_sampled(self):
        spec = step()
        assert spec.bounds == pytest.approx((2.0, 2.0))

    def test_out_of_window(self):
        with pytest.raises(OutOfWindowError):
            step(4).matrix(5)

    def test_from_matrices_requires_full_table(self):
        with pytest.raises(OutOfWindowError):
            CocycleSpec.from_matrices({0: np.eye(2), 1: np.eye(2)}, 1)
        spec = CocycleSpec.from_matrices({n: (n + 2.0) * np.eye(1) for n in range(-1, 2)}, 1)
        assert spec.matrix(1)[0, 0] == 3.0

    def test_scaled(self):
        spec = step().scaled(3.0)
        assert spec.matrix(-1)[0, 0] == pytest.approx(6.0)
        assert spec.inverse(0)[0, 0] == pytest.approx(2.0 / 3.0)


def test_eval_cocycle_forward_and_backward():
    spec = step()
    assert eval_cocycle(spec, 2, -2)[0, 0] == pytest.approx(1.0)
    assert eval_cocycle(spec, 3, 0)[0, 0] == pytest.approx(0.125)
    assert eval_cocycle(spec, -3, 0)[0, 0] == pytest.approx(0.125)
    assert eval_cocycle(spec, 1, 1)[0, 0] == 1.0


def test_cocycle_identity_holds():
    spec = builtin_family("random-bounded", {"base": [[0.5, 0.1], [0.0, 2.0]], "delta": 0.05}, seed=4, window=6)
    for m, k, n in [(5, 2, -3), (-4, 1, 3), (0, -6, 6)]:
        assert cocycle_identity_defect(spec, m, k, n) < 1e-10


class TestBuiltinFamilies:
    def test_step(self):
        spec = step()
        assert spec.matrix(-1)[0, 0] == 2.0
        assert spec.matrix(0)[0, 0] == 0.5
        assert spec.name == "step"

    def test_autonomous(self):
        spec = builtin_family("autonomous", {"matrix": [[0.5, 0.0], [0.0, 3.0]]}, window=4)
        np.testing.assert_allclose(spec.matrix(-4), np.diag([0.5, 3.0]))

    def test_quasiperiodic(self):
        spec = builtin_family("quasiperiodic-diagonal", {"c": [0.0, 1.0], "beta": 0.3, "omega": 1.0}, window=4)
        np.testing.assert_allclose(np.diag(spec.matrix(0)), np.exp([0.3, 1.3]))
        np.testing.assert_allclose(np.diag(spec.matrix(2)), np.exp(np.array([0.0, 1.0]) + 0.3 * math.cos(2.0)))

    def test_random_bounded_is_seeded(self):
        params = {"base": [[1.0, 0.0], [0.0, 2.0]], "delta": 0.1}
        first = builtin_family("random-bounded", params, seed=7, window=5)
        again = builtin_family("random-bounded", params, seed=7, window=5)
        other = builtin_family("random-bounded", params, seed=8, window=5)
        np.testing.assert_array_equal(first.matrix(-3), again.matrix(-3))
        assert not np.allclose(first.matrix(-3), other.matrix(-3))
        assert np.max(np.abs(first.matrix(2) - np.diag([1.0, 2.0]))) <= 0.1

    def test_random_bounded_bounds_hold_on_the_window(self, caplog):
        builtin_family("random-bounded", {"base": [[1.0, 0.0], [0.0, 2.0]], "delta": 0.1}, window=5)
        assert "certified on [-5, 5] only" in caplog.text

    def test_block_trichotomic(self):
        spec = builtin_family(
            "block-trichotomic", {"intervals": [[0.25, 0.5], [1.0, 1.0], [3.0, 4.0]], "sizes": [1, 1, 2]}, window=4
        )
        assert spec.dim == 4
        np.testing.assert_allclose(np.diag(spec.matrix(-1)), [0.25, 1.0, 3.0, 3.0])
        np.testing.assert_allclose(np.diag(spec.matrix(0)), [0.5, 1.0, 4.0, 4.0])

    def test_unknown_family(self):
        with pytest.raises(FamilyError, match="Unknown family"):
            builtin_family("rotating", {})

    def test_missing_parameter(self):
        with pytest.raises(FamilyError, match="'right'"):
            builtin_family("step", {"left": 2.0})


class TestVerifyTrichotomy:
    spec = builtin_family("autonomous", {"matrix": np.diag([0.5, 1.0, 2.0])}, window=10)

    def test_diagonal_system_passes_with_unit_constant(self):
        data = TrichotomyData.coordinate((1, 1, 1), 10, 1.0, (0.5, 0.5, 1.0, 1.0, 2.0, 2.0))
        report = verify_trichotomy(self.spec, data)
        assert report.passed
        assert report.K_obs == pytest.approx(1.0)
        assert report.ranks == (1, 1, 1)

    def test_too_tight_rate_names_the_inequality(self):
        data = TrichotomyData.coordinate((1, 1, 1), 10, 1.0, (0.3, 0.4, 1.0, 1.0, 2.0, 2.0))
        report = verify_trichotomy(self.spec, data)
        assert not report.passed
        assert report.failed == ("stable_forward",)

    def test_small_identity_defect_is_named(self):
        data = TrichotomyData.coordinate((1, 1, 1), 10, 1.0, (0.5, 0.5, 1.0, 1.0, 2.0, 2.0))
        projections = data.projections.copy()
        projections[:, 0, 0, 0] += 1e-9
        report = verify_trichotomy(self.spec, TrichotomyData(data.start, projections, 1.0, data.rates))
        assert not report.passed
        assert "sum" in report.failed
        assert report.defects["sum"] == pytest.approx(1e-9, rel=1e-3)

    def test_small_window(self):
        spec = builtin_family("autonomous", {"matrix": np.diag([0.5, 1.0, 2.0])}, window=5)
        data = TrichotomyData.coordinate((1, 1, 1), 5, 1.0, (0.5, 0.5, 1.0, 1.0, 2.0, 2.0))
        with pytest.raises(WindowTooSmallError, match="at least 16"):
            verify_trichotomy(spec, data)

    def test_unordered_rates(self):
        with pytest.raises(ArityError):
            TrichotomyData.coordinate((1, 1, 1), 10, 1.0, (0.5, 0.5, 1.2, 1.0, 2.0, 2.0))


def quadratic_system(window=6, coupling=0.0):
    """x_s' = 0.5 x_s + x_c^2, x_c' = x_c, in (x_s, x_c) order."""
    linear = builtin_family("autonomous", {"matrix": [[0.5, 0.0], [coupling, 1.0]]}, window=2 * window)
    records = [{"alpha": [0], "beta": [2], "coeff": [1.0, 0.0]}]
    return NonlinearSystem(linear, nonlinearity_from_records(records, (1, 1, 0), window, 3))


class TestNonlinearSystem:
    def test_map_at_adds_linear_part(self):
        system = quadratic_system()
        value = system.map_at(0).with_order(3)
        x = np.array([0.2, 0.1])
        np.testing.assert_allclose(jet_evaluate(value, x), [0.5 * 0.2 + 0.01, 0.1], atol=TOLERANCE)

    def test_bounds_and_shape(self):
        system = quadratic_system()
        assert system.dims == (1, 1, 0)
        assert system.window == (-6, 6)
        assert system.max_order == 3
        assert system.smallness == pytest.approx(2.0)
        assert system.deriv_bound == pytest.approx(2.0)

    def test_center_rows_may_couple(self):
        a_s, a_c, a_u = quadratic_system(coupling=0.3).blocks(0)
        assert a_s[0, 0] == 0.5
        assert a_c[0, 0] == 1.0
        assert a_u.shape == (0, 0)

    def test_hyperbolic_rows_may_not_couple(self):
        linear = builtin_family("autonomous", {"matrix": [[0.5, 0.3], [0.0, 1.0]]}, window=12)
        system = NonlinearSystem(linear, nonlinearity_from_records([], (1, 1, 0), 6, 2))
        with pytest.raises(SplittingError):
            system.blocks(0)

    def test_rejects_linear_terms(self):
        linear = builtin_family("autonomous", {"matrix": np.eye(2)}, window=4)
        jets = TimeJetSeq.from_function((-2, 2), lambda n: JetPoly((1, 1, 0), 2, 2, {(1, 0): [1.0, 0.0]}))
        with pytest.raises(JetOrderError):
            NonlinearSystem(linear, jets)

    def test_rejects_larger_window(self):
        linear = builtin_family("autonomous", {"matrix": np.eye(2)}, window=2)
        with pytest.raises(OutOfWindowError):
            NonlinearSystem(linear, nonlinearity_from_records([], (1, 1, 0), 3, 2))


def test_records_with_modulation():
    records = [{"alpha": [0], "beta": [2], "coeff": [1.0, 0.0], "modulation": 0.5}]
    jets = nonlinearity_from_records(records, (1, 1, 0), 3, 2)
    assert jets[2].coefficient((0, 2))[0] == pytest.approx(1.0 + 0.5 * math.cos(2))


def test_random_nonlinearity_is_seeded_and_bounded():
    first = random_nonlinearity((1, 1, 1), 4, seed=3, scale=0.05, modulation=0.1)
    again = random_nonlinearity((1, 1, 1), 4, seed=3, scale=0.05, modulation=0.1)
    np.testing.assert_array_equal(first[1].to_dense(), again[1].to_dense())
    assert all(jet.max_abs() <= 0.05 * 1.1 for jet in first)
    assert min(sum(e) for e in first[0].coeffs) == 2
    assert first.window == (-4, 4)
