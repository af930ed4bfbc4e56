"""Multivariate polynomial jets over the split coordinates (x_s, x_c, x_u).

A jet is stored sparsely as a map from exponent tuples over all variables, ordered (x_s, x_c, x_u), to coefficient
vectors in the target space. The pair of multi-indices (alpha over the hyperbolic variables v = (x_s, x_u), beta over
the center variables x_c) used by the serialized form is recovered with ``split_exponent``.

Products and compositions run on dense coefficient arrays indexed by a cached graded-lexicographic monomial basis.
Truncation is explicit on every product and composition.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Iterator, Mapping, Sequence

import numpy as np

from takens_nf.exceptions import ArityError, JetOrderError, OutOfWindowError

_logger = logging.getLogger(__name__)

Exponent = tuple[int, ...]
Dims = tuple[int, int, int]


@lru_cache(maxsize=None)
def graded_exponents(nvars: int, degree: int) -> tuple[Exponent, ...]:
    """Return all exponents of exact total degree ``degree`` in ``nvars`` variables.

    Within a degree, exponents are listed in descending lexicographic order, so ``(1, 0)`` precedes ``(0, 1)``.
    """
    if nvars == 0:
        return ((),) if degree == 0 else ()
    result: list[Exponent] = []
    for first in range(degree, -1, -1):
        for rest in graded_exponents(nvars - 1, degree - first):
            result.append((first,) + rest)
    return tuple(result)


class MonomialBasis:
    """Graded-lex basis of all monomials up to ``max_order`` with a cached multiplication table."""

    def __init__(self, nvars: int, max_order: int):
        self.nvars = nvars
        self.max_order = max_order
        self.exponents: tuple[Exponent, ...] = tuple(
            exponent for degree in range(max_order + 1) for exponent in graded_exponents(nvars, degree)
        )
        self.index: dict[Exponent, int] = {exponent: i for i, exponent in enumerate(self.exponents)}
        self.array = np.array(self.exponents, dtype=int).reshape(len(self.exponents), nvars)
        self.degrees = self.array.sum(axis=1)

    def __len__(self) -> int:
        return len(self.exponents)

    @cached_property
    def table(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Index triples (i, j, k) such that monomial i times monomial j is monomial k, within ``max_order``."""
        rows_i, rows_j, rows_k = [], [], []
        for i, left in enumerate(self.exponents):
            room = self.max_order - self.degrees[i]
            for j, right in enumerate(self.exponents):
                if self.degrees[j] > room:
                    break
                rows_i.append(i)
                rows_j.append(j)
                rows_k.append(self.index[tuple(a + b for a, b in zip(left, right))])
        return np.array(rows_i, dtype=int), np.array(rows_j, dtype=int), np.array(rows_k, dtype=int)

    def multiply(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Truncated product of two scalar polynomials given as dense vectors."""
        rows_i, rows_j, rows_k = self.table
        return np.bincount(rows_k, weights=left[rows_i] * right[rows_j], minlength=len(self))

    def matrix_product(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Truncated product of matrix-valued polynomials of shapes (n, a, b) and (n, b, c)."""
        rows_i, rows_j, rows_k = self.table
        products = np.einsum("pab,pbc->pac", left[rows_i], right[rows_j])
        out = np.zeros((len(self), left.shape[1], right.shape[2]))
        np.add.at(out, rows_k, products)
        return out


@lru_cache(maxsize=64)
def monomial_basis(nvars: int, max_order: int) -> MonomialBasis:
    """Return the cached basis for ``nvars`` variables up to ``max_order``."""
    return MonomialBasis(nvars, max_order)


def split_exponent(dims: Dims, exponent: Exponent) -> tuple[Exponent, Exponent]:
    """Split a full exponent into (alpha over (x_s, x_u), beta over x_c)."""
    d_s, d_c, _ = dims
    alpha = exponent[:d_s] + exponent[d_s + d_c :]
    beta = exponent[d_s : d_s + d_c]
    return tuple(alpha), tuple(beta)


def join_exponent(dims: Dims, alpha: Sequence[int], beta: Sequence[int]) -> Exponent:
    """Inverse of ``split_exponent``."""
    d_s, d_c, d_u = dims
    if len(alpha) != d_s + d_u or len(beta) != d_c:
        raise ArityError(f"Exponent pair ({alpha}, {beta}) does not match dims {dims}.")
    return tuple(alpha[:d_s]) + tuple(beta) + tuple(alpha[d_s:])


def v_degree(dims: Dims, exponent: Exponent) -> int:
    """Degree of a monomial in the hyperbolic variables."""
    return sum(split_exponent(dims, exponent)[0])


def c_degree(dims: Dims, exponent: Exponent) -> int:
    """Degree of a monomial in the center variables."""
    return sum(split_exponent(dims, exponent)[1])


@dataclass(frozen=True)
class JetPoly:
    """A truncated polynomial map from the split coordinates into a ``target``-dimensional space.

    Attributes:
        dims (tuple[int, int, int]): Variable counts (d_s, d_c, d_u).
        target (int): Dimension of the coefficient vectors.
        max_order (int): Truncation degree. No stored coefficient exceeds it.
        coeffs (Mapping[tuple, np.ndarray]): Exponent over (x_s, x_c, x_u) to coefficient vector. Zero
            coefficients are dropped on construction.
    """

    dims: Dims
    target: int
    max_order: int
    coeffs: Mapping[Exponent, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        cleaned: dict[Exponent, np.ndarray] = {}
        for exponent, value in self.coeffs.items():
            exponent = tuple(int(e) for e in exponent)
            if len(exponent) != self.nvars or min(exponent, default=0) < 0:
                raise ArityError(f"Exponent {exponent} does not fit {self.nvars} variables.")
            if sum(exponent) > self.max_order:
                raise JetOrderError(f"Exponent {exponent} exceeds the truncation order {self.max_order}.", exponent)
            vector = np.array(value, dtype=float).reshape(-1)
            if vector.shape != (self.target,):
                raise ArityError(f"Coefficient of {exponent} has shape {vector.shape}, expected ({self.target},).")
            if np.any(vector != 0.0):
                cleaned[exponent] = cleaned.get(exponent, 0.0) + vector
        object.__setattr__(self, "coeffs", cleaned)

    @property
    def nvars(self) -> int:
        """Number of variables."""
        return sum(self.dims)

    @property
    def basis(self) -> MonomialBasis:
        """Dense basis matching this jet's variables and order."""
        return monomial_basis(self.nvars, self.max_order)

    @classmethod
    def zero(cls, dims: Dims, target: int, max_order: int) -> "JetPoly":
        """The zero jet."""
        return cls(dims, target, max_order, {})

    @classmethod
    def linear(cls, dims: Dims, matrix: np.ndarray, max_order: int) -> "JetPoly":
        """The linear map x -> matrix @ x."""
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        nvars = sum(dims)
        if matrix.shape[1] != nvars:
            raise ArityError(f"Matrix with {matrix.shape[1]} columns cannot act on {nvars} variables.")
        coeffs = {}
        for j in range(nvars):
            coeffs[tuple(int(i == j) for i in range(nvars))] = matrix[:, j]
        return cls(dims, matrix.shape[0], max_order, coeffs)

    @classmethod
    def identity(cls, dims: Dims, max_order: int) -> "JetPoly":
        """The identity map."""
        return cls.linear(dims, np.eye(sum(dims)), max_order)

    @classmethod
    def from_dense(cls, dims: Dims, max_order: int, array: np.ndarray) -> "JetPoly":
        """Build a jet from a dense (monomials, target) array in the basis of ``dims`` and ``max_order``."""
        basis = monomial_basis(sum(dims), max_order)
        array = np.asarray(array, dtype=float).reshape(len(basis), -1)
        coeffs = {basis.exponents[i]: array[i] for i in np.flatnonzero(np.any(array != 0.0, axis=1))}
        return cls(dims, array.shape[1], max_order, coeffs)

    def to_dense(self, max_order: int | None = None) -> np.ndarray:
        """Dense (monomials, target) array; coefficients above ``max_order`` are dropped."""
        basis = monomial_basis(self.nvars, self.max_order if max_order is None else max_order)
        array = np.zeros((len(basis), self.target))
        for exponent, value in self.coeffs.items():
            index = basis.index.get(exponent)
            if index is not None:
                array[index] = value
        return array

    def coefficient(self, exponent: Exponent) -> np.ndarray:
        """Coefficient vector of a monomial (zeros when absent)."""
        return self.coeffs.get(tuple(exponent), np.zeros(self.target))

    def component(self, index: int) -> "JetPoly":
        """Scalar jet of one target component."""
        return JetPoly(
            self.dims, 1, self.max_order, {e: value[index : index + 1] for e, value in self.coeffs.items()}
        )

    def components(self) -> list["JetPoly"]:
        """All scalar component jets."""
        return [self.component(i) for i in range(self.target)]

    def max_abs(self) -> float:
        """Largest absolute coefficient."""
        return max((float(np.max(np.abs(value))) for value in self.coeffs.values()), default=0.0)

    def with_order(self, max_order: int) -> "JetPoly":
        """Same coefficients under a different truncation order (dropping those above it)."""
        return JetPoly(self.dims, self.target, max_order, {e: v for e, v in self.coeffs.items() if sum(e) <= max_order})


def bidegree_part(
    jet: JetPoly,
    v_degree_eq: int | None = None,
    c_degree_eq: int | None = None,
    max_v: int | None = None,
    max_c: int | None = None,
    min_v: int | None = None,
) -> JetPoly:
    """Keep the monomials whose v-degree and x_c-degree satisfy all given constraints."""
    kept = {}
    for exponent, value in jet.coeffs.items():
        alpha, beta = split_exponent(jet.dims, exponent)
        degree_v, degree_c = sum(alpha), sum(beta)
        if v_degree_eq is not None and degree_v != v_degree_eq:
            continue
        if c_degree_eq is not None and degree_c != c_degree_eq:
            continue
        if max_v is not None and degree_v > max_v:
            continue
        if max_c is not None and degree_c > max_c:
            continue
        if min_v is not None and degree_v < min_v:
            continue
        kept[exponent] = value
    return JetPoly(jet.dims, jet.target, jet.max_order, kept)


def jet_truncate(jet: JetPoly, max_order: int) -> JetPoly:
    """Drop all monomials above ``max_order`` while keeping the declared order."""
    return JetPoly(jet.dims, jet.target, jet.max_order, {e: v for e, v in jet.coeffs.items() if sum(e) <= max_order})


def jet_add(*jets: JetPoly) -> JetPoly:
    """Sum of jets with identical shape."""
    first = jets[0]
    coeffs: dict[Exponent, np.ndarray] = {}
    for jet in jets:
        _check_same_shape(first, jet)
        for exponent, value in jet.coeffs.items():
            coeffs[exponent] = coeffs.get(exponent, 0.0) + value
    return JetPoly(first.dims, first.target, first.max_order, coeffs)


def jet_scale(jet: JetPoly, factor: float | np.ndarray) -> JetPoly:
    """Multiply by a scalar, or left-multiply the coefficient vectors by a matrix."""
    factor = np.asarray(factor, dtype=float)
    if factor.ndim == 0:
        return JetPoly(jet.dims, jet.target, jet.max_order, {e: factor * v for e, v in jet.coeffs.items()})
    if factor.shape[1] != jet.target:
        raise ArityError(f"Matrix of shape {factor.shape} cannot act on target dimension {jet.target}.")
    return JetPoly(jet.dims, factor.shape[0], jet.max_order, {e: factor @ v for e, v in jet.coeffs.items()})


def jet_stack(jets: Sequence[JetPoly]) -> JetPoly:
    """Concatenate target spaces of jets over the same variables."""
    first = jets[0]
    offsets = np.cumsum([0] + [jet.target for jet in jets])
    target = int(offsets[-1])
    coeffs: dict[Exponent, np.ndarray] = {}
    for k, jet in enumerate(jets):
        if jet.dims != first.dims:
            raise ArityError("Stacked jets must share their variables.")
        for exponent, value in jet.coeffs.items():
            vector = coeffs.setdefault(exponent, np.zeros(target))
            vector[offsets[k] : offsets[k + 1]] = value
    return JetPoly(first.dims, target, max(jet.max_order for jet in jets), coeffs)


def jet_multiply(jet: JetPoly, scalar: JetPoly, max_order: int | None = None) -> JetPoly:
    """Product of a jet with a scalar-valued jet, truncated at ``max_order``."""
    if scalar.target != 1 or scalar.dims != jet.dims:
        raise ArityError("The second factor must be a scalar jet over the same variables.")
    order = max(jet.max_order, scalar.max_order) if max_order is None else max_order
    basis = monomial_basis(jet.nvars, order)
    left, right = jet.to_dense(order), scalar.to_dense(order)[:, 0]
    out = np.stack([basis.multiply(left[:, t], right) for t in range(jet.target)], axis=1)
    return JetPoly.from_dense(jet.dims, order, out)


def jet_evaluate(jet: JetPoly, x: Sequence[float] | np.ndarray) -> np.ndarray:
    """Evaluate the jet at a point ordered (x_s, x_c, x_u)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (jet.nvars,):
        raise ArityError(f"Point of dimension {x.shape[0]} does not match {jet.nvars} variables.")
    if not jet.coeffs:
        return np.zeros(jet.target)
    exponents = np.array(list(jet.coeffs.keys()), dtype=int).reshape(len(jet.coeffs), jet.nvars)
    values = np.prod(np.power(x[None, :], exponents), axis=1)
    return np.array(list(jet.coeffs.values())).T @ values


def _monomial_values(outer_basis: MonomialBasis, inner: np.ndarray, basis: MonomialBasis) -> np.ndarray:
    # Dense images of every outer monomial under the inner map, built by one multiplication per monomial.
    values = np.zeros((len(outer_basis), len(basis)))
    values[0, 0] = 1.0
    for index in range(1, len(outer_basis)):
        exponent = outer_basis.exponents[index]
        var = next(k for k, e in enumerate(exponent) if e > 0)
        previous = outer_basis.index[exponent[:var] + (exponent[var] - 1,) + exponent[var + 1 :]]
        values[index] = basis.multiply(values[previous], inner[var])
    return values


def jet_compose(outer: JetPoly, inner: JetPoly | Sequence[JetPoly], max_order: int) -> JetPoly:
    """Compose ``outer`` with ``inner`` and truncate the result at ``max_order``.

    Args:
        outer (JetPoly): The outer map, with one variable per inner component.
        inner (JetPoly | Sequence[JetPoly]): Either one jet whose target dimension equals the number of variables of
            ``outer``, or a list of scalar jets over common variables.
        max_order (int): Truncation order of the result.

    Returns:
        (JetPoly): ``outer(inner(x))`` over the variables of ``inner``.
    """
    components = list(inner.components()) if isinstance(inner, JetPoly) else list(inner)
    if len(components) != outer.nvars:
        raise ArityError(f"Outer jet has {outer.nvars} variables but {len(components)} inner components were given.")
    if not components:
        raise ArityError("Composition needs at least one inner component.")
    dims = components[0].dims
    for component in components:
        if component.target != 1 or component.dims != dims:
            raise ArityError("Inner components must be scalar jets over common variables.")
    basis = monomial_basis(sum(dims), max_order)
    dense_inner = np.stack([component.to_dense(max_order)[:, 0] for component in components])
    has_constant = bool(np.any(dense_inner[:, 0] != 0.0))
    outer_order = outer.max_order if has_constant else min(outer.max_order, max_order)
    outer_basis = monomial_basis(outer.nvars, outer_order)
    values = _monomial_values(outer_basis, dense_inner, basis)
    result = outer.to_dense(outer_order).T @ values
    return JetPoly.from_dense(dims, max_order, result.T)


def jet_derivative(jet: JetPoly, var: int) -> JetPoly:
    """Partial derivative along variable ``var``."""
    if not 0 <= var < jet.nvars:
        raise ArityError(f"Variable {var} out of range for {jet.nvars} variables.")
    coeffs = {}
    for exponent, value in jet.coeffs.items():
        if exponent[var] > 0:
            lowered = exponent[:var] + (exponent[var] - 1,) + exponent[var + 1 :]
            coeffs[lowered] = exponent[var] * value
    return JetPoly(jet.dims, jet.target, jet.max_order, coeffs)


def jet_jacobian_at(jet: JetPoly, x: Sequence[float] | np.ndarray) -> np.ndarray:
    """Jacobian matrix (target x variables) at a point."""
    return np.stack([jet_evaluate(jet_derivative(jet, var), x) for var in range(jet.nvars)], axis=1)


def jet_inverse(jet: JetPoly, max_order: int | None = None) -> JetPoly:
    """Inverse of a map with zero constant term and invertible linear part, truncated at ``max_order``.

    Writing the map as L x + h(x), the inverse is the fixed point of g <- L^{-1}(Id - h o g), iterated once per order.
    """
    order = jet.max_order if max_order is None else max_order
    if jet.target != jet.nvars:
        raise ArityError("Only maps from a space into itself can be inverted.")
    if np.any(jet.coefficient((0,) * jet.nvars) != 0.0):
        raise JetOrderError("Cannot invert a jet with a nonzero constant term.")
    linear = np.stack([jet.coefficient(tuple(int(i == j) for i in range(jet.nvars))) for j in range(jet.nvars)], axis=1)
    linear_inverse = np.linalg.inv(linear)
    higher = JetPoly(jet.dims, jet.target, order, {e: v for e, v in jet.coeffs.items() if 2 <= sum(e) <= order})
    identity = JetPoly.identity(jet.dims, order)
    inverse = jet_scale(identity, linear_inverse)
    for _ in range(order):
        inverse = jet_scale(jet_add(identity, jet_scale(jet_compose(higher, inverse, order), -1.0)), linear_inverse)
    _logger.debug("Inverted jet over %s variables to order %s", jet.nvars, order)
    return inverse


def jet_project(jet: JetPoly, which: str | int, blocks: Sequence[int] | None = None) -> JetPoly:
    """Zero the target components outside an axis group.

    Args:
        jet (JetPoly): A jet whose target is laid out as (s, c, u) blocks.
        which (str | int): One of ``"s"``, ``"c"``, ``"u"``, ``"su"``, or the index of a block in ``blocks``.
        blocks (Sequence[int] | None): Sizes of consecutive target blocks for integer selection. Defaults to the
            jet's (d_s, d_c, d_u).

    Returns:
        (JetPoly): The projected jet, with the same target dimension.
    """
    d_s, d_c, d_u = jet.dims
    groups = {
        "s": range(0, d_s),
        "c": range(d_s, d_s + d_c),
        "u": range(d_s + d_c, d_s + d_c + d_u),
    }
    if isinstance(which, str):
        if jet.target != jet.nvars:
            raise ArityError("Axis-group projections need a target laid out as (s, c, u).")
        if which == "su":
            keep = list(groups["s"]) + list(groups["u"])
        elif which in groups:
            keep = list(groups[which])
        else:
            raise ArityError(f"Unknown axis group {which!r}.")
    else:
        sizes = list(jet.dims if blocks is None else blocks)
        if sum(sizes) != jet.target or not 0 <= which < len(sizes):
            raise ArityError(f"Block {which} is not defined for block sizes {sizes}.")
        offset = sum(sizes[:which])
        keep = list(range(offset, offset + sizes[which]))
    mask = np.zeros(jet.target)
    mask[keep] = 1.0
    return JetPoly(jet.dims, jet.target, jet.max_order, {e: v * mask for e, v in jet.coeffs.items()})


def substitution_matrix(matrix: np.ndarray, degree: int) -> np.ndarray:
    """Matrix of the induced action g -> g(B x) on homogeneous polynomials of the given degree.

    Entry (k, l) is the coefficient of monomial l in (B x)^{m_k}, monomials listed by ``graded_exponents``. Degree 0
    gives the 1x1 identity.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    nvars = matrix.shape[0]
    # the unit monomials must be in the basis even for degree 0
    basis = monomial_basis(nvars, max(degree, 1))
    inner = np.zeros((nvars, len(basis)))
    for j in range(nvars):
        for l in range(nvars):
            inner[j, basis.index[tuple(int(i == l) for i in range(nvars))]] = matrix[j, l]
    values = _monomial_values(basis, inner, basis)
    homogeneous = [basis.index[e] for e in graded_exponents(nvars, degree)]
    return values[np.ix_(homogeneous, homogeneous)]


def to_records(jet: JetPoly) -> list[dict]:
    """Serialize to a list of ``{"alpha", "beta", "coeff"}`` records in graded-lex order."""
    order = monomial_basis(jet.nvars, jet.max_order).index
    records = []
    for exponent in sorted(jet.coeffs, key=order.__getitem__):
        alpha, beta = split_exponent(jet.dims, exponent)
        records.append({"alpha": list(alpha), "beta": list(beta), "coeff": [float(c) for c in jet.coeffs[exponent]]})
    return records


def from_records(records: Sequence[Mapping[str, Any]], dims: Dims, target: int, max_order: int) -> JetPoly:
    """Inverse of ``to_records``. Repeated keys are summed."""
    coeffs: dict[Exponent, np.ndarray] = {}
    for record in records:
        exponent = join_exponent(dims, record["alpha"], record["beta"])
        coeffs[exponent] = coeffs.get(exponent, 0.0) + np.asarray(record["coeff"], dtype=float)
    return JetPoly(dims, target, max_order, coeffs)


def _check_same_shape(first: JetPoly, other: JetPoly):
    if (first.dims, first.target, first.max_order) != (other.dims, other.target, other.max_order):
        raise ArityError(
            f"Jets of shape {(first.dims, first.target, first.max_order)} and "
            f"{(other.dims, other.target, other.max_order)} cannot be combined."
        )


@dataclass(frozen=True)
class TimeJetSeq:
    """A sequence of jets of identical shape indexed by time ``start, start + 1, ...``.

    Attributes:
        start (int): Index of the first jet.
        jets (tuple[JetPoly, ...]): The jets.
        trusted (tuple[int, int] | None): Index range away from the truncated series boundary, when known.
        diagnostics (Mapping[str, Any]): Solver diagnostics attached by the producer.
    """

    start: int
    jets: tuple[JetPoly, ...]
    trusted: tuple[int, int] | None = None
    diagnostics: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "jets", tuple(self.jets))
        if not self.jets:
            raise ArityError("A time sequence needs at least one jet.")
        shape = (self.jets[0].dims, self.jets[0].target, self.jets[0].max_order)
        for jet in self.jets:
            if (jet.dims, jet.target, jet.max_order) != shape:
                raise ArityError("All jets of a time sequence must share dims, target and order.")

    @classmethod
    def from_function(cls, window: tuple[int, int], build) -> "TimeJetSeq":
        """Tabulate ``build(n)`` for n in the closed range ``window``."""
        start, stop = window
        return cls(start, tuple(build(n) for n in range(start, stop + 1)))

    @property
    def stop(self) -> int:
        """Index of the last jet."""
        return self.start + len(self.jets) - 1

    @property
    def window(self) -> tuple[int, int]:
        """Closed index range covered by the sequence."""
        return self.start, self.stop

    def indices(self) -> range:
        """All indices of the sequence."""
        return range(self.start, self.stop + 1)

    def __len__(self) -> int:
        return len(self.jets)

    def __iter__(self) -> Iterator[JetPoly]:
        return iter(self.jets)

    def __getitem__(self, n: int) -> JetPoly:
        if not self.start <= n <= self.stop:
            raise OutOfWindowError(f"Index {n} outside the window [{self.start}, {self.stop}].", n)
        return self.jets[n - self.start]

    def map(self, transform) -> "TimeJetSeq":
        """Apply ``transform(n, jet)`` to every entry."""
        return TimeJetSeq(self.start, tuple(transform(n, jet) for n, jet in zip(self.indices(), self.jets)))
