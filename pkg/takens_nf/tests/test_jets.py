"""Tests for the jet algebra."""
import numpy as np
import pytest

from takens_nf.exceptions import ArityError, JetOrderError, OutOfWindowError
from takens_nf.jets import (
    JetPoly,
    TimeJetSeq,
    bidegree_part,
    c_degree,
    from_records,
    graded_exponents,
    jet_add,
    jet_compose,
    jet_derivative,
    jet_evaluate,
    jet_inverse,
    jet_jacobian_at,
    jet_multiply,
    jet_project,
    jet_scale,
    jet_truncate,
    join_exponent,
    monomial_basis,
    split_exponent,
    substitution_matrix,
    to_records,
    v_degree,
)

TOLERANCE = 1e-12
DIMS = (1, 1, 1)


def scalar(dims, max_order, coeffs):
    """Scalar jet from {exponent: value}."""
    return JetPoly(dims, 1, max_order, {e: [v] for e, v in coeffs.items()})


def test_graded_exponents_order():
    """Exponents of one degree come in descending lexicographic order."""
    assert graded_exponents(2, 2) == ((2, 0), (1, 1), (0, 2))
    assert graded_exponents(3, 1) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert graded_exponents(0, 0) == ((),)
    assert graded_exponents(0, 1) == ()


def test_monomial_basis_product_table():
    """Products in the dense basis match the sparse definition."""
    basis = monomial_basis(2, 3)
    assert len(basis) == 10
    left = np.zeros(len(basis))
    right = np.zeros(len(basis))
    left[basis.index[(1, 0)]] = 2.0
    right[basis.index[(1, 1)]] = 3.0
    right[basis.index[(0, 3)]] = 5.0
    product = basis.multiply(left, right)
    assert product[basis.index[(2, 1)]] == pytest.approx(6.0)
    # (1, 3) has degree 4 and is truncated away
    assert np.count_nonzero(product) == 1


def test_split_and_join_exponent():
    """alpha collects (x_s, x_u), beta collects x_c."""
    dims = (1, 2, 1)
    exponent = (3, 1, 0, 2)
    alpha, beta = split_exponent(dims, exponent)
    assert alpha == (3, 2)
    assert beta == (1, 0)
    assert join_exponent(dims, alpha, beta) == exponent
    assert v_degree(dims, exponent) == 5
    assert c_degree(dims, exponent) == 1
    with pytest.raises(ArityError):
        join_exponent(dims, (1,), (1, 0))


class TestJetPoly:
    def test_drops_zero_coefficients(self):
        jet = JetPoly(DIMS, 2, 2, {(1, 0, 0): [0.0, 0.0], (0, 1, 0): [1.0, 0.0]})
        assert list(jet.coeffs) == [(0, 1, 0)]

    def test_rejects_exponent_above_order(self):
        with pytest.raises(JetOrderError, match="exceeds the truncation order"):
            JetPoly(DIMS, 1, 2, {(2, 1, 0): [1.0]})

    def test_rejects_wrong_coefficient_shape(self):
        with pytest.raises(ArityError):
            JetPoly(DIMS, 2, 2, {(1, 0, 0): [1.0]})

    def test_linear_and_identity(self):
        matrix = np.arange(9.0).reshape(3, 3)
        x = np.array([0.3, -0.2, 0.5])
        np.testing.assert_allclose(jet_evaluate(JetPoly.linear(DIMS, matrix, 3), x), matrix @ x, atol=TOLERANCE)
        np.testing.assert_allclose(jet_evaluate(JetPoly.identity(DIMS, 3), x), x, atol=TOLERANCE)

    def test_dense_round_trip(self):
        jet = JetPoly(DIMS, 3, 3, {(1, 1, 0): [1.0, 2.0, 3.0], (0, 0, 3): [0.5, 0.0, -1.0]})
        again = JetPoly.from_dense(DIMS, 3, jet.to_dense())
        assert set(again.coeffs) == set(jet.coeffs)
        np.testing.assert_allclose(again.coefficient((0, 0, 3)), [0.5, 0.0, -1.0])

    def test_with_order_drops_high_terms(self):
        jet = scalar(DIMS, 3, {(1, 1, 0): 1.0, (0, 0, 3): 2.0})
        lowered = jet.with_order(2)
        assert lowered.max_order == 2
        assert list(lowered.coeffs) == [(1, 1, 0)]

    def test_components_and_max_abs(self):
        jet = JetPoly(DIMS, 2, 2, {(0, 2, 0): [1.0, -4.0]})
        first, second = jet.components()
        assert first.coefficient((0, 2, 0))[0] == 1.0
        assert second.coefficient((0, 2, 0))[0] == -4.0
        assert jet.max_abs() == 4.0


def test_bidegree_part_filters():
    """Constraints on v-degree and x_c-degree combine."""
    jet = scalar(DIMS, 3, {(1, 1, 0): 1.0, (0, 2, 0): 2.0, (2, 0, 1): 3.0, (0, 1, 1): 4.0})
    assert set(bidegree_part(jet, v_degree_eq=1).coeffs) == {(1, 1, 0), (0, 1, 1)}
    assert set(bidegree_part(jet, c_degree_eq=2).coeffs) == {(0, 2, 0)}
    assert set(bidegree_part(jet, min_v=2).coeffs) == {(2, 0, 1)}
    assert set(bidegree_part(jet, max_v=1, max_c=1).coeffs) == {(1, 1, 0), (0, 1, 1)}


def test_add_scale_truncate():
    first = scalar(DIMS, 3, {(1, 0, 0): 1.0, (0, 0, 3): 1.0})
    second = scalar(DIMS, 3, {(1, 0, 0): -1.0, (0, 1, 0): 2.0})
    total = jet_add(first, second)
    assert set(total.coeffs) == {(0, 0, 3), (0, 1, 0)}
    assert jet_scale(total, 3.0).coefficient((0, 1, 0))[0] == 6.0
    assert set(jet_truncate(total, 2).coeffs) == {(0, 1, 0)}
    assert jet_truncate(total, 2).max_order == 3
    with pytest.raises(ArityError):
        jet_add(first, scalar(DIMS, 2, {}))


def test_scale_by_matrix_changes_target():
    jet = JetPoly(DIMS, 3, 2, {(0, 2, 0): [1.0, 2.0, 3.0]})
    projected = jet_scale(jet, np.array([[0.0, 1.0, 0.0]]))
    assert projected.target == 1
    assert projected.coefficient((0, 2, 0))[0] == 2.0


def test_multiply_truncates():
    dims = (0, 1, 0)
    x = scalar(dims, 3, {(1,): 1.0, (2,): 1.0})
    product = jet_multiply(x, x)
    np.testing.assert_allclose([product.coefficient((k,))[0] for k in range(4)], [0.0, 0.0, 1.0, 2.0])


def test_evaluate_matches_polynomial():
    jet = scalar(DIMS, 3, {(1, 1, 0): 2.0, (0, 0, 3): -1.0, (0, 0, 0): 0.5})
    x = np.array([0.3, 0.7, -0.4])
    expected = 2.0 * 0.3 * 0.7 - (-0.4) ** 3 + 0.5
    assert jet_evaluate(jet, x)[0] == pytest.approx(expected)
    with pytest.raises(ArityError):
        jet_evaluate(jet, [1.0, 2.0])


def test_compose_scalar_example():
    """(x + x^2) o (x + x^2) = x + 2x^2 + 2x^3 + x^4, truncated at 3."""
    dims = (0, 1, 0)
    f = scalar(dims, 3, {(1,): 1.0, (2,): 1.0})
    composed = jet_compose(f, f, 3)
    np.testing.assert_allclose([composed.coefficient((k,))[0] for k in range(4)], [0.0, 1.0, 2.0, 2.0])


def test_compose_matches_pointwise_evaluation():
    rng = np.random.default_rng(3)
    outer = JetPoly.from_dense(DIMS, 3, rng.normal(size=(20, 3)) * (monomial_basis(3, 3).degrees >= 1)[:, None])
    inner = JetPoly.from_dense(DIMS, 3, rng.normal(size=(20, 3)) * (monomial_basis(3, 3).degrees == 1)[:, None])
    composed = jet_compose(outer, inner, 3)
    x = 1e-3 * np.array([1.0, -2.0, 0.5])
    expected = jet_evaluate(outer, jet_evaluate(inner, x))
    # inner is linear so the composition is exact at order 3
    np.testing.assert_allclose(jet_evaluate(composed, x), expected, atol=1e-14)


def random_map(rng, order=3):
    """Self-map of the three variables of DIMS without constant term."""
    mask = (monomial_basis(3, order).degrees >= 1)[:, None]
    return JetPoly.from_dense(DIMS, order, rng.normal(size=(mask.shape[0], 3)) * mask)


@pytest.mark.parametrize("seed", range(5))
def test_compose_is_associative(seed):
    rng = np.random.default_rng(seed)
    f, g, h = random_map(rng), random_map(rng), random_map(rng)
    left = jet_compose(jet_compose(f, g, 3), h, 3)
    right = jet_compose(f, jet_compose(g, h, 3), 3)
    np.testing.assert_allclose(left.to_dense(), right.to_dense(), atol=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_compose_obeys_the_chain_rule(seed):
    """d_j (f o g) = sum_i (d_i f o g) d_j g_i up to one order less."""
    rng = np.random.default_rng(seed)
    f, g = random_map(rng), random_map(rng)
    composed = jet_compose(f, g, 3)
    inner = g.components()
    for j in range(3):
        terms = [
            jet_multiply(jet_compose(jet_derivative(f, i), g, 2), jet_derivative(inner[i], j), 2) for i in range(3)
        ]
        np.testing.assert_allclose(jet_derivative(composed, j).to_dense(2), jet_add(*terms).to_dense(), atol=1e-10)
    np.testing.assert_allclose(
        jet_jacobian_at(composed, np.zeros(3)), jet_jacobian_at(f, np.zeros(3)) @ jet_jacobian_at(g, np.zeros(3))
    )


def test_derivative_and_jacobian():
    jet = scalar(DIMS, 3, {(2, 1, 0): 1.0, (0, 0, 1): 3.0})
    derivative = jet_derivative(jet, 0)
    assert set(derivative.coeffs) == {(1, 1, 0)}
    assert derivative.coefficient((1, 1, 0))[0] == 2.0
    jacobian = jet_jacobian_at(jet, [1.0, 2.0, 0.0])
    np.testing.assert_allclose(jacobian, [[4.0, 1.0, 3.0]])


def test_inverse_of_near_identity():
    dims = (1, 1, 0)
    jet = JetPoly(dims, 2, 3, {(1, 0): [2.0, 0.0], (0, 1): [1.0, 1.0], (2, 0): [0.0, 1.0], (1, 1): [0.5, 0.0]})
    inverse = jet_inverse(jet)
    identity = jet_compose(jet, inverse, 3)
    expected = JetPoly.identity(dims, 3)
    np.testing.assert_allclose(identity.to_dense(), expected.to_dense(), atol=1e-12)


def test_inverse_rejects_constant_term():
    dims = (0, 1, 0)
    with pytest.raises(JetOrderError):
        jet_inverse(scalar(dims, 2, {(0,): 1.0, (1,): 1.0}))


def test_project_axis_groups():
    jet = JetPoly.identity(DIMS, 2)
    projected = jet_project(jet, "su")
    np.testing.assert_allclose(jet_evaluate(projected, [1.0, 2.0, 3.0]), [1.0, 0.0, 3.0])
    np.testing.assert_allclose(jet_evaluate(jet_project(jet, 1, [2, 1]), [1.0, 2.0, 3.0]), [0.0, 0.0, 3.0])
    with pytest.raises(ArityError):
        jet_project(jet, "x")


def test_substitution_matrix_properties():
    """S(A) S(B) = S(AB) and S(B, 1) = B."""
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(2, 2, 2))
    np.testing.assert_allclose(substitution_matrix(b, 1), b, atol=TOLERANCE)
    np.testing.assert_allclose(
        substitution_matrix(a, 3) @ substitution_matrix(b, 3), substitution_matrix(a @ b, 3), atol=1e-10
    )
    # (2x)^2 = 4 x^2 in one variable
    assert substitution_matrix(np.array([[2.0]]), 2)[0, 0] == pytest.approx(4.0)


@pytest.mark.parametrize("matrix", [[[2.0]], [[0.5, 1.0], [0.0, 3.0]]])
def test_substitution_matrix_degree_zero(matrix):
    np.testing.assert_array_equal(substitution_matrix(np.array(matrix), 0), np.eye(1))


def test_records_round_trip():
    jet = JetPoly(DIMS, 3, 3, {(1, 1, 0): [1.0, 2.0, 3.0], (0, 2, 1): [0.0, -1.0, 0.0]})
    records = to_records(jet)
    assert records[0] == {"alpha": [1, 0], "beta": [1], "coeff": [1.0, 2.0, 3.0]}
    again = from_records(records, DIMS, 3, 3)
    np.testing.assert_allclose(again.to_dense(), jet.to_dense())


class TestTimeJetSeq:
    def test_window_and_indexing(self):
        seq = TimeJetSeq.from_function((-2, 3), lambda n: scalar(DIMS, 2, {(0, 2, 0): float(n)}))
        assert seq.window == (-2, 3)
        assert len(seq) == 6
        assert seq[3].coefficient((0, 2, 0))[0] == 3.0
        with pytest.raises(OutOfWindowError):
            seq[4]

    def test_map(self):
        seq = TimeJetSeq.from_function((0, 2), lambda n: scalar(DIMS, 2, {(0, 2, 0): 1.0}))
        doubled = seq.map(lambda n, jet: jet_scale(jet, float(n)))
        assert [jet.coefficient((0, 2, 0))[0] for jet in doubled] == [0.0, 1.0, 2.0]

    def test_rejects_mixed_shapes(self):
        with pytest.raises(ArityError):
            TimeJetSeq(0, (scalar(DIMS, 2, {}), scalar(DIMS, 3, {})))
