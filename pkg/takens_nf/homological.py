"""Nonautonomous homological equations.

Every linear problem here has the form L_n k_n - k_{n+1} = f_n on a finite window, with L_n preserving a
splitting of the unknowns into a contracting part (solved by the forward series) and an expanding part (solved
by the backward series). ``two_sided_solve`` implements that recursion; the rest of the module assembles L_n and
f_n for the coupling terms of a system, one x_c-degree at a time.

Coefficients of a jet homogeneous of degree k in x_c and p in v are held as matrices of shape
(rows, n_c(k) * n_v(p)); the column of x_c^beta v^alpha is ``index(beta) * n_v(p) + index(alpha)``.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from takens_nf.cocycle import CocycleSpec, NonlinearSystem, spectral_norm
from takens_nf.exceptions import (
    ArityError,
    ConditioningError,
    GapViolation,
    JetOrderError,
    NonResonanceViolation,
    SplittingError,
    WindowTooSmallError,
)
from takens_nf.jets import (
    JetPoly,
    TimeJetSeq,
    bidegree_part,
    c_degree,
    graded_exponents,
    jet_add,
    jet_compose,
    jet_multiply,
    jet_scale,
    join_exponent,
    monomial_basis,
    split_exponent,
    substitution_matrix,
)
from takens_nf.resonance import check_gap, enumerate_multi_indices
from takens_nf.spectral import SpectrumResult, compute_spectrum

_logger = logging.getLogger(__name__)

CONDITIONING_LIMIT = 0.999


@dataclass(frozen=True)
class MonomialSplit:
    """Partition of the degree-p multi-indices by the side of a target interval their products lie on.

    Attributes:
        p (int): Homogeneous degree.
        target (int | None): Index of the target hyperbolic interval, or None for the center interval.
        s_plus (tuple): Multi-indices with prod a_i^{q_i} above the target.
        s_minus (tuple): Multi-indices with prod b_i^{q_i} below the target.
        mu1 (float): max over s_plus of target_hi / prod a^q (0 when s_plus is empty).
        mu2 (float): max over s_minus of prod b^q / target_lo (0 when s_minus is empty).
    """

    p: int
    target: int | None
    s_plus: tuple[tuple[int, ...], ...]
    s_minus: tuple[tuple[int, ...], ...]
    mu1: float
    mu2: float

    @property
    def rates(self) -> tuple[float, float]:
        """(mu1, mu2)."""
        return self.mu1, self.mu2

    def is_contracting(self, q: Sequence[int]) -> bool:
        """True when q belongs to ``s_plus``: the transport of its coefficients contracts forward in time."""
        return tuple(q) in self._plus

    @property
    def _plus(self) -> frozenset:
        return frozenset(self.s_plus)


def monomial_split(spectrum: SpectrumResult, p: int, target: int | None = None) -> MonomialSplit:
    """Split the multi-indices of degree p against the center interval or a hyperbolic interval.

    Raises:
        NonResonanceViolation: When a multi-index lies on neither side; the witness is that multi-index.
    """
    if p < 0:
        raise ArityError(f"Degree must be nonnegative, got {p}.", p)
    if target is None:
        target_lo, target_hi = spectrum.center_or_unit
    else:
        target_lo, target_hi = spectrum.hyperbolic_intervals[target]
    s_plus, s_minus = [], []
    mu1 = mu2 = 0.0
    for q in enumerate_multi_indices(spectrum.r, p, p):
        log_lo = sum(power * math.log(lo) for power, (lo, _) in zip(q, spectrum.hyperbolic_intervals))
        log_hi = sum(power * math.log(hi) for power, (_, hi) in zip(q, spectrum.hyperbolic_intervals))
        if log_lo > math.log(target_hi):
            s_plus.append(q.entries)
            mu1 = max(mu1, math.exp(math.log(target_hi) - log_lo))
        elif log_hi < math.log(target_lo):
            s_minus.append(q.entries)
            mu2 = max(mu2, math.exp(log_hi - math.log(target_lo)))
        else:
            raise NonResonanceViolation(
                f"Multi-index {q.entries} of degree {p} is resonant with the "
                f"{'center' if target is None else f'hyperbolic interval {target}'}.",
                q.entries,
            )
    return MonomialSplit(p, target, tuple(s_plus), tuple(s_minus), mu1, mu2)


@dataclass(frozen=True)
class SeriesSolution:
    """Solution of L_n k_n - k_{n+1} = f_n on [start, start + len(values) - 1].

    Attributes:
        start (int): First time index.
        values (np.ndarray): Unknowns, shape (count + 1, size).
        trusted (tuple[int, int]): Range whose distance to both ends exceeds the truncation length.
        rates (tuple[float, float]): Largest norms of the contracting operators and of the inverted expanding ones.
        truncation (int): Series truncation length m* for the requested tolerance.
        bound (float): A priori bound on the norm of every unknown.
        residual (float): Largest defect of the equation on the window.
    """

    start: int
    values: np.ndarray
    trusted: tuple[int, int]
    rates: tuple[float, float]
    truncation: int
    bound: float
    residual: float

    def diagnostics(self) -> dict[str, Any]:
        """JSON-friendly summary."""
        return {
            "rates": list(self.rates),
            "truncation": self.truncation,
            "trusted": list(self.trusted),
            "bound": self.bound,
            "residual": self.residual,
        }


def two_sided_solve(
    start: int,
    operators: np.ndarray,
    forcing: np.ndarray,
    contracting: np.ndarray,
    tol: float,
    K: float = 1.0,
) -> SeriesSolution:
    """Solve L_n k_n - k_{n+1} = f_n by a forward series on the contracting part and a backward one on the rest.

    The contracting part starts from zero at the left end and runs k_{n+1} = L_n k_n - f_n; the expanding part
    starts from zero past the right end and runs k_n = L_n^{-1}(f_n + k_{n+1}). Both are the window truncations
    of the two-sided series, so the equation holds on the whole window and the values agree with the bi-infinite
    solution up to ``tol`` on the trusted range.

    Args:
        start (int): Time index of the first operator.
        operators (np.ndarray): L_n, shape (count, size, size).
        forcing (np.ndarray): f_n, shape (count, size).
        contracting (np.ndarray): Boolean mask of the contracting unknowns; L_n must not couple the two parts.
        tol (float): Target accuracy for the truncation length.
        K (float): Constant of the geometric bounds.

    Returns:
        (SeriesSolution): Unknowns on [start, start + count].
    """
    count, size = forcing.shape
    plus = np.asarray(contracting, dtype=bool)
    minus = ~plus
    scale = max(1.0, float(np.max(np.abs(operators), initial=0.0)))
    inverses = []
    rate_plus = rate_minus = 0.0
    for k in range(count):
        operator = operators[k]
        leak = max(
            float(np.max(np.abs(operator[np.ix_(minus, plus)]), initial=0.0)),
            float(np.max(np.abs(operator[np.ix_(plus, minus)]), initial=0.0)),
        )
        if leak > 1e-12 * scale:
            raise SplittingError(f"Operator at n={start + k} couples contracting and expanding unknowns.", start + k)
        if plus.any():
            rate_plus = max(rate_plus, spectral_norm(operator[np.ix_(plus, plus)]))
        if minus.any():
            inverse = np.linalg.inv(operator[np.ix_(minus, minus)])
            rate_minus = max(rate_minus, spectral_norm(inverse))
            inverses.append(inverse)
    if max(rate_plus, rate_minus) >= CONDITIONING_LIMIT:
        raise ConditioningError(
            f"Series rates ({rate_plus:.6g}, {rate_minus:.6g}) are too close to 1.", (rate_plus, rate_minus)
        )
    values = np.zeros((count + 1, size))
    for k in range(count):
        values[k + 1, plus] = operators[k][np.ix_(plus, plus)] @ values[k, plus] - forcing[k, plus]
    for k in range(count - 1, -1, -1):
        values[k, minus] = inverses[k] @ (forcing[k, minus] + values[k + 1, minus]) if minus.any() else 0.0
    size_f = float(np.max(np.linalg.norm(forcing, axis=1), initial=0.0))
    rate = max(rate_plus, rate_minus)
    if size_f == 0.0:
        truncation = 0
    elif rate == 0.0:
        truncation = 1
    else:
        truncation = max(0, math.ceil(math.log(tol / (K * size_f)) / math.log(rate)))
    trusted = (start + truncation, start + count - truncation)
    if trusted[0] > trusted[1]:
        raise WindowTooSmallError(
            f"Series need {truncation} steps on each side for tol={tol:g}, window has {count + 1} points.",
            truncation,
        )
    residual = 0.0
    for k in range(count):
        defect = operators[k] @ values[k] - values[k + 1] - forcing[k]
        residual = max(residual, float(np.max(np.abs(defect), initial=0.0)))
    bound = K * size_f * (1.0 / (1.0 - rate_plus) + rate_minus / (1.0 - rate_minus))
    return SeriesSolution(start, values, trusted, (rate_plus, rate_minus), truncation, bound, residual)


def resolve_spectrum(system: NonlinearSystem) -> SpectrumResult:
    """The spectrum attached to ``system``, computed from its linear part when absent."""
    if system.spectrum is not None:
        return system.spectrum
    _logger.info("Computing the spectrum of the linear part of %s", system.linear.name)
    return compute_spectrum(system.linear)


def hyperbolic_blocks(system: NonlinearSystem, spectrum: SpectrumResult) -> tuple[int, ...]:
    """Index of the hyperbolic interval of every hyperbolic variable, ordered (x_s, x_u)."""
    d_s, _, d_u = system.dims
    if system.v_blocks is not None:
        blocks = system.v_blocks
    elif spectrum.r == d_s + d_u:
        blocks = tuple(range(spectrum.r))
    elif spectrum.ell <= 1 and spectrum.r - spectrum.ell <= 1:
        blocks = (0,) * d_s + (spectrum.ell,) * d_u
    else:
        raise ArityError(
            f"Cannot assign {d_s + d_u} hyperbolic variables to {spectrum.r} intervals; give v_blocks explicitly."
        )
    if len(blocks) != d_s + d_u or any(not 0 <= b < spectrum.r for b in blocks):
        raise ArityError(f"Invalid hyperbolic block assignment {blocks} for {spectrum.r} intervals.", blocks)
    for i, block in enumerate(blocks):
        stable_interval = spectrum.hyperbolic_intervals[block][1] < 1.0
        if stable_interval != (i < d_s):
            raise ArityError(f"Hyperbolic variable {i} is assigned to interval {block} on the wrong side of 1.")
    return tuple(blocks)


def coefficient_block(jet: JetPoly, k: int, p: int) -> np.ndarray:
    """Coefficients of the bidegree (k, p) part as a (target, n_c(k) * n_v(p)) matrix."""
    d_s, d_c, d_u = jet.dims
    betas = graded_exponents(d_c, k)
    alphas = graded_exponents(d_s + d_u, p)
    matrix = np.zeros((jet.target, len(betas) * len(alphas)))
    for b, beta in enumerate(betas):
        for a, alpha in enumerate(alphas):
            matrix[:, b * len(alphas) + a] = jet.coefficient(join_exponent(jet.dims, alpha, beta))
    return matrix


def block_jet(dims: tuple[int, int, int], matrix: np.ndarray, k: int, p: int, order: int) -> JetPoly:
    """Inverse of ``coefficient_block``."""
    d_s, d_c, d_u = dims
    betas = graded_exponents(d_c, k)
    alphas = graded_exponents(d_s + d_u, p)
    coeffs = {}
    for b, beta in enumerate(betas):
        for a, alpha in enumerate(alphas):
            coeffs[join_exponent(dims, alpha, beta)] = matrix[:, b * len(alphas) + a]
    return JetPoly(dims, matrix.shape[0], order, coeffs)


class _Coupling:
    """Pieces of F_n(x_c, v) = (w(x_c) + ..., A(x_c) v + ...) as polynomials in x_c up to degree J."""

    def __init__(self, jet: JetPoly, J: int):
        dims = jet.dims
        d_s, d_c, d_u = dims
        self.dims = dims
        self.order = jet.max_order
        self.center_rows = list(range(d_s, d_s + d_c))
        self.v_rows = list(range(d_s)) + list(range(d_s + d_c, d_s + d_c + d_u))
        basis = monomial_basis(d_c, J)
        self.basis = basis
        d_v = d_s + d_u
        self.jacobian = np.zeros((len(basis), d_c, d_c))
        self.transport = np.zeros((len(basis), d_v, d_v))
        center_part = {}
        for exponent, value in jet.coeffs.items():
            alpha, beta = split_exponent(dims, exponent)
            if sum(alpha) == 0:
                center_part[exponent] = value[self.center_rows]
                for j in range(d_c):
                    if beta[j] > 0:
                        lowered = beta[:j] + (beta[j] - 1,) + beta[j + 1 :]
                        if sum(lowered) <= J:
                            self.jacobian[basis.index[lowered], :, j] += beta[j] * value[self.center_rows]
            elif sum(alpha) == 1 and sum(beta) <= J:
                self.transport[basis.index[beta], :, alpha.index(1)] += value[self.v_rows]
        self.center = JetPoly(dims, d_c, self.order, center_part)
        self.transport_inverse = _matrix_poly_inverse(self.transport, basis)

    def entry_jet(self, array: np.ndarray) -> JetPoly:
        """Scalar jet over all variables of one entry of a matrix polynomial in x_c."""
        coeffs = {}
        for index, beta in enumerate(self.basis.exponents):
            if array[index] != 0.0:
                coeffs[join_exponent(self.dims, (0,) * len(self.v_rows), beta)] = [array[index]]
        return JetPoly(self.dims, 1, self.order, coeffs)

    def apply(self, poly: np.ndarray, vector: JetPoly) -> JetPoly:
        """The jet x -> poly(x_c) @ vector(x), truncated at the system order."""
        components = vector.components()
        rows = []
        for i in range(poly.shape[1]):
            terms = [
                jet_multiply(components[j], self.entry_jet(poly[:, i, j]), self.order) for j in range(poly.shape[2])
            ]
            rows.append(jet_add(*terms) if terms else JetPoly.zero(self.dims, 1, self.order))
        return _stack_rows(self.dims, rows, self.order)

    def _identity_components(self) -> list[JetPoly]:
        nvars = sum(self.dims)
        return [
            JetPoly(self.dims, 1, self.order, {tuple(int(i == j) for i in range(nvars)): [1.0]}) for j in range(nvars)
        ]

    def substitution(self) -> list[JetPoly]:
        """Inner map (x_c, v) -> (x_c, A(x_c)^{-1} v)."""
        components = self._identity_components()
        identity = jet_scale(JetPoly.identity(self.dims, self.order), np.eye(sum(self.dims))[self.v_rows])
        replaced = self.apply(self.transport_inverse, identity).components()
        for position, row in enumerate(self.v_rows):
            components[row] = replaced[position]
        return components

    def shift(self) -> list[JetPoly]:
        """Inner map (x_c, v) -> (w(x_c), v)."""
        components = self._identity_components()
        for position, row in enumerate(self.center_rows):
            components[row] = self.center.component(position)
        return components


def _stack_rows(dims, rows: list[JetPoly], order: int) -> JetPoly:
    coeffs: dict[tuple[int, ...], np.ndarray] = {}
    for i, row in enumerate(rows):
        for exponent, value in row.coeffs.items():
            coeffs.setdefault(exponent, np.zeros(len(rows)))[i] = value[0]
    return JetPoly(dims, len(rows), order, coeffs)


def _matrix_poly_inverse(poly: np.ndarray, basis) -> np.ndarray:
    # Neumann series around the constant term, exact up to the basis order.
    constant_inverse = np.linalg.inv(poly[0])
    step = np.zeros_like(poly)
    step[1:] = -np.einsum("ab,nbc->nac", constant_inverse, poly[1:])
    term = np.zeros_like(poly)
    term[0] = constant_inverse
    total = term.copy()
    for _ in range(basis.max_order):
        term = basis.matrix_product(step, term)
        total += term
    return total


class HomologicalProblem:
    """Coupling equations T(x_c) h_n(x_c, A(x_c)^{-1} v) - h_{n+1}(w_n(x_c), v) = f_n(x_c, A(x_c)^{-1} v).

    ``kind`` is ``"center"`` (T = Dw, unknowns in X_c) or ``"hyperbolic"`` (T = A, unknowns in the hyperbolic
    coordinates). The forcing f_n is the v-degree-p part of the matching components of F_n with x_c-degree up to J.
    """

    def __init__(
        self,
        system: NonlinearSystem,
        p: int,
        J: int,
        kind: str,
        spectrum: SpectrumResult | None = None,
        split: MonomialSplit | None = None,
    ):
        if kind not in ("center", "hyperbolic"):
            raise ArityError(f"Unknown homological problem kind {kind!r}.")
        d_s, d_c, d_u = system.dims
        if kind == "center" and d_c == 0:
            raise ArityError("The center homological equation needs center variables.")
        if system.max_order < p + 1:
            raise JetOrderError(f"Jets of order {system.max_order} cannot carry v-degree {p} couplings.", p)
        self.system = system
        self.dims = system.dims
        self.p = p
        self.kind = kind
        self.order = system.max_order
        self.k_max = min(J, self.order - p) if d_c else 0
        self.J = J
        self.start, self.stop = system.window
        self.spectrum = resolve_spectrum(system) if spectrum is None else spectrum
        self.blocks = hyperbolic_blocks(system, self.spectrum)
        for n in range(self.start, self.stop + 1):
            system.blocks(n)
        self.couplings = {n: _Coupling(system.map_at(n), J) for n in range(self.start, self.stop + 1)}
        rows = self.couplings[self.start].center_rows if kind == "center" else self.couplings[self.start].v_rows
        self.rows = rows
        self.targets: list[int | None] = [None] * len(rows) if kind == "center" else list(self.blocks)
        if split is not None:
            if kind != "center" or split.p != p:
                raise ArityError(f"A degree-{split.p} center split cannot drive a degree-{p} {kind} problem.")
            self.splits = {None: split}
        else:
            self.splits = {target: monomial_split(self.spectrum, p, target) for target in set(self.targets)}
        self._substitutions: dict[int, list[JetPoly]] = {}
        self._forcing: dict[int, JetPoly] = {}

    @property
    def width(self) -> int:
        """Number of unknown components."""
        return len(self.rows)

    def zero(self) -> list[JetPoly]:
        """Zero unknowns on [start, stop + 1]."""
        return [JetPoly.zero(self.dims, self.width, self.order)] * (self.stop - self.start + 2)

    def transport_poly(self, n: int) -> np.ndarray:
        """T(x_c) at time n."""
        coupling = self.couplings[n]
        return coupling.jacobian if self.kind == "center" else coupling.transport

    def substitution(self, n: int) -> list[JetPoly]:
        if n not in self._substitutions:
            self._substitutions[n] = self.couplings[n].substitution()
        return self._substitutions[n]

    def forcing(self, n: int) -> JetPoly:
        """f_n(x_c, A(x_c)^{-1} v) restricted to bidegree (c <= k_max, v = p)."""
        if n not in self._forcing:
            jet = self.system.map_at(n)
            selected = jet_scale(jet, np.eye(jet.target)[self.rows])
            part = bidegree_part(selected, v_degree_eq=self.p, max_c=self.k_max)
            substituted = jet_compose(part, self.substitution(n), self.order)
            self._forcing[n] = bidegree_part(substituted, v_degree_eq=self.p, max_c=self.k_max)
        return self._forcing[n]

    def equation(self, n: int, h: Sequence[JetPoly]) -> JetPoly:
        """Left side minus forcing at time n for unknowns ``h`` indexed from ``start``."""
        here, after = h[n - self.start], h[n + 1 - self.start]
        coupling = self.couplings[n]
        transported = coupling.apply(self.transport_poly(n), jet_compose(here, self.substitution(n), self.order))
        shifted = jet_compose(after, coupling.shift(), self.order)
        total = jet_add(transported, jet_scale(shifted, -1.0), jet_scale(self.forcing(n), -1.0))
        return bidegree_part(total, v_degree_eq=self.p, max_c=self.k_max)

    def residual(self, h: Sequence[JetPoly]) -> float:
        """Largest coefficient of the equation defect over the window."""
        return max(self.equation(n, h).max_abs() for n in range(self.start, self.stop + 1))

    def contracting_mask(self, k: int) -> np.ndarray:
        """Mask of the contracting unknowns among the degree-(k, p) coefficients."""
        d_s, d_c, d_u = self.dims
        alphas = graded_exponents(d_s + d_u, self.p)
        n_c = len(graded_exponents(d_c, k))
        r = self.spectrum.r
        mask = np.zeros((self.width, n_c, len(alphas)), dtype=bool)
        for a, alpha in enumerate(alphas):
            q = [0] * r
            for variable, power in enumerate(alpha):
                q[self.blocks[variable]] += power
            for i, target in enumerate(self.targets):
                mask[i, :, a] = self.splits[target].is_contracting(q)
        return mask.reshape(-1)

    def operator(self, n: int, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(L_n, x_c-substitution matrix) of the degree-(k, p) problem in vectorised form."""
        coupling = self.couplings[n]
        d_s, d_c, d_u = self.dims
        center_inverse = np.linalg.inv(coupling.jacobian[0]) if d_c else np.zeros((0, 0))
        substitution_c = substitution_matrix(center_inverse, k)
        substitution_v = substitution_matrix(coupling.transport_inverse[0], self.p)
        right = np.kron(substitution_c, substitution_v)
        return np.kron(self.transport_poly(n)[0], right.T), substitution_c

    def solve_order(
        self, k: int, h: list[JetPoly], tol: float, K: float = 1.0, rhs: TimeJetSeq | None = None
    ) -> tuple[list[JetPoly], SeriesSolution | None]:
        """Add the degree-k part of the solution to ``h``.

        The forcing is minus the degree-k part of the equation evaluated at ``h``, with x_c replaced by
        (A^c)^{-1} x_c; ``rhs`` overrides it with given coefficients (degree 0 only).
        """
        d_s, d_c, d_u = self.dims
        n_v = len(graded_exponents(d_s + d_u, self.p))
        n_c = len(graded_exponents(d_c, k))
        if n_c * n_v == 0:
            return h, None
        count = self.stop - self.start + 1
        operators = np.empty((count, self.width * n_c * n_v, self.width * n_c * n_v))
        forcing = np.empty((count, self.width * n_c * n_v))
        for offset, n in enumerate(range(self.start, self.stop + 1)):
            operators[offset], substitution_c = self.operator(n, k)
            if rhs is not None:
                forcing[offset] = coefficient_block(rhs[n], k, self.p).reshape(-1)
            else:
                defect = coefficient_block(self.equation(n, h), k, self.p)
                forcing[offset] = (-defect @ np.kron(substitution_c, np.eye(n_v))).reshape(-1)
        solution = two_sided_solve(self.start, operators, forcing, self.contracting_mask(k), tol, K)
        updated = [
            jet_add(jet, block_jet(self.dims, values.reshape(self.width, -1), k, self.p, self.order))
            for jet, values in zip(h, solution.values)
        ]
        _logger.debug(
            "%s order (k=%s, p=%s): rates=%s truncation=%s", self.kind, k, self.p, solution.rates, solution.truncation
        )
        return updated, solution

    def gap_rates(self) -> tuple[float, float]:
        """Largest (mu1, mu2) over the splits in use."""
        return max(s.mu1 for s in self.splits.values()), max(s.mu2 for s in self.splits.values())

    def check_suspension_gap(self, J: int):
        """Raise ``GapViolation`` when nu_+^J < 1/mu2 or nu_-^J > mu1 fails."""
        report = check_gap(self.spectrum, J, rates=self.gap_rates())
        if report.suspension_margins and min(report.suspension_margins) <= 0:
            raise GapViolation(
                f"Suspension gap fails at order {J} for v-degree {self.p}: margins {report.suspension_margins}.",
                report.to_dict(),
            )

    def as_sequence(self, h: Sequence[JetPoly], trusted: tuple[int, int] | None, diagnostics: dict) -> TimeJetSeq:
        """Wrap unknowns on [start, stop + 1]."""
        return TimeJetSeq(self.start, tuple(h), trusted, diagnostics)


def intersect_ranges(left: tuple[int, int] | None, right: tuple[int, int] | None) -> tuple[int, int] | None:
    """Intersection of two index ranges, where None stands for an unrestricted range."""
    if left is None:
        return right
    if right is None:
        return left
    return max(left[0], right[0]), min(left[1], right[1])


def solve_kappa(
    system: NonlinearSystem, split: MonomialSplit, rhs: TimeJetSeq, tol: float, K: float = 1.0
) -> TimeJetSeq:
    """Solve L_n(0) k_n - k_{n+1} = rhs_n for v-homogeneous center-valued coefficients.

    Here L_n(0) k = A_n^c k(A_n^{su}(0)^{-1} v). The contracting unknowns are the monomials in ``split.s_plus``.

    Args:
        system (NonlinearSystem): The system providing A_n^c and A_n^{su}.
        split (MonomialSplit): Split of the degree-p multi-indices against the center.
        rhs (TimeJetSeq): Center-valued jets of v-degree p and x_c-degree 0 on the system window.
        tol (float): Accuracy of the series truncation.
        K (float): Constant of the geometric bounds.

    Returns:
        (TimeJetSeq): k_n on [start, stop + 1] with the series diagnostics.
    """
    problem = HomologicalProblem(system, split.p, 0, "center", split=split)
    h, solution = problem.solve_order(0, problem.zero(), tol, K, rhs=rhs)
    diagnostics = {} if solution is None else {"kappa": solution.diagnostics(), "M_kappa": solution.bound}
    return problem.as_sequence(h, None if solution is None else solution.trusted, diagnostics)


@dataclass(frozen=True)
class SuspendedCocycle:
    """Block lower-triangular cocycle Delta_n = [[A_n^c, 0], [M_n, L_n(0)]] on X_c x Xi^p.

    Attributes:
        start (int): First time index.
        deltas (np.ndarray): Delta_n, shape (count, d_c + m, d_c + m).
        dims (tuple[int, int]): (d_c, m) with m the dimension of the coefficient space Xi^p.
        p (int): v-degree.
        kappa (TimeJetSeq): The order-0 solution the suspension was built from.
    """

    start: int
    deltas: np.ndarray
    dims: tuple[int, int]
    p: int
    kappa: TimeJetSeq
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def delta(self, n: int) -> np.ndarray:
        """Delta_n."""
        return self.deltas[n - self.start]

    def lower(self, n: int) -> np.ndarray:
        """M_n."""
        d_c = self.dims[0]
        return self.delta(n)[d_c:, :d_c]

    def operator(self, n: int) -> np.ndarray:
        """L_n(0)."""
        d_c = self.dims[0]
        return self.delta(n)[d_c:, d_c:]

    def as_cocycle_spec(self) -> CocycleSpec:
        """The suspension as a cocycle on a symmetric window."""
        stop = self.start + len(self.deltas) - 1
        window = min(-self.start, stop)
        table = {n: self.delta(n) for n in range(-window, window + 1)}
        return CocycleSpec.from_matrices(table, window, name="suspension")


def build_suspension(system: NonlinearSystem, split: MonomialSplit, kappa: TimeJetSeq) -> SuspendedCocycle:
    """Assemble Delta_n from the order-0 solution.

    M_n is the x_c-linear part of T(x_c) k_n(x_c, A(x_c)^{-1} v) - k_{n+1}(w_n(x_c), v) - f_n(x_c, A(x_c)^{-1} v),
    read exactly from the jets as a linear map from X_c to Xi^p.
    """
    problem = HomologicalProblem(system, split.p, 1, "center", split=split)
    d_s, d_c, d_u = system.dims
    n_v = len(graded_exponents(d_s + d_u, split.p))
    size = d_c * n_v
    h = [kappa[n] for n in range(problem.start, problem.stop + 2)]
    deltas = np.zeros((problem.stop - problem.start + 1, d_c + size, d_c + size))
    lower_norm = 0.0
    for offset, n in enumerate(range(problem.start, problem.stop + 1)):
        coupling = problem.couplings[n]
        operator = np.kron(coupling.jacobian[0], substitution_matrix(coupling.transport_inverse[0], split.p).T)
        defect = coefficient_block(problem.equation(n, h), 1, split.p)
        # column j * n_v + a of the defect is the coefficient of x_c_j v^alpha_a
        lower = np.transpose(defect.reshape(d_c, d_c, n_v), (0, 2, 1)).reshape(size, d_c)
        deltas[offset, :d_c, :d_c] = coupling.jacobian[0]
        deltas[offset, d_c:, :d_c] = lower
        deltas[offset, d_c:, d_c:] = operator
        lower_norm = max(lower_norm, spectral_norm(lower) if lower.size else 0.0)
    _logger.debug("Suspension for p=%s built with sup |M_n| = %.4g", split.p, lower_norm)
    return SuspendedCocycle(problem.start, deltas, (d_c, size), split.p, kappa, {"M_sup": lower_norm})


def suspension_center_jets(
    delta: SuspendedCocycle, system: NonlinearSystem, split: MonomialSplit, J: int, tol: float, K: float = 1.0
) -> TimeJetSeq:
    """x_c-jets of orders 1..J of the invariant section of the suspension.

    The order-1 coefficients E_n satisfy E_{n+1} A_n^c = L_n(0) E_n + M_n, so that the graph of E_n is carried by
    Delta_n; higher orders solve the same split series with forcing from the lower orders.

    Returns:
        (TimeJetSeq): Center-valued jets with x_c-degrees 1..J (the order-0 part excluded) on [start, stop + 1].
    """
    problem = HomologicalProblem(system, split.p, J, "center", split=split)
    problem.check_suspension_gap(J)
    h = [delta.kappa[n] for n in range(problem.start, problem.stop + 2)]
    trusted = delta.kappa.trusted
    orders = {}
    for k in range(1, problem.k_max + 1):
        h, solution = problem.solve_order(k, h, tol, K)
        if solution is not None:
            trusted = intersect_ranges(trusted, solution.trusted)
            orders[k] = solution.diagnostics()
    d_c = delta.dims[0]
    orbit_defect = 0.0
    if problem.k_max >= 1:
        for n in range(problem.start, problem.stop + 1):
            here = _order_one_map(h[n - problem.start], split.p, d_c)
            after = _order_one_map(h[n + 1 - problem.start], split.p, d_c)
            defect = after @ delta.delta(n)[:d_c, :d_c] - delta.operator(n) @ here - delta.lower(n)
            orbit_defect = max(orbit_defect, float(np.max(np.abs(defect), initial=0.0)))
    if orbit_defect > max(tol, 1e-8) * max(1.0, float(np.max(np.abs(delta.deltas)))):
        _logger.warning("Suspension orbit property holds only to %.3g", orbit_defect)
    higher = [
        JetPoly(jet.dims, jet.target, jet.max_order, {e: v for e, v in jet.coeffs.items() if c_degree(jet.dims, e)})
        for jet in h
    ]
    return problem.as_sequence(higher, trusted, {"orders": orders, "orbit_defect": orbit_defect})


def _order_one_map(jet: JetPoly, p: int, d_c: int) -> np.ndarray:
    # (d_c * n_v, d_c) matrix of the x_c-linear coefficients, rows ordered (component, alpha)
    matrix = coefficient_block(jet, 1, p)
    n_v = matrix.shape[1] // max(d_c, 1)
    return np.transpose(matrix.reshape(jet.target, d_c, n_v), (0, 2, 1)).reshape(jet.target * n_v, d_c)


def solve_homological_center(
    system: NonlinearSystem,
    p: int,
    J: int,
    tol: float,
    spectrum: SpectrumResult | None = None,
    K: float = 1.0,
) -> TimeJetSeq:
    """Solve -Dw_n(x_c) h_n(x_c, v) + f_n^p(x_c, v) + h_{n+1}(w_n(x_c), A_n(x_c) v) = 0.

    The order-0 part is ``solve_kappa``, the x_c-linear part comes from the suspension and higher x_c-orders
    from the same split series.

    Args:
        system (NonlinearSystem): A straightened system.
        p (int): v-degree of the coupling to remove.
        J (int): Highest x_c-degree.
        tol (float): Series accuracy.
        spectrum (SpectrumResult | None): Spectrum of the linear part; computed when omitted.
        K (float): Constant of the geometric bounds.

    Returns:
        (TimeJetSeq): h_n^p with center-valued coefficients on [start, stop + 1].
    """
    problem = HomologicalProblem(system, p, J, "center", spectrum)
    split = problem.splits[None]
    rhs = TimeJetSeq(
        problem.start,
        tuple(bidegree_part(problem.forcing(n), c_degree_eq=0) for n in range(problem.start, problem.stop + 1)),
    )
    kappa = solve_kappa(system, split, rhs, tol, K)
    if problem.k_max == 0:
        h = list(kappa)
        trusted, orders = kappa.trusted, {0: kappa.diagnostics.get("kappa")}
    else:
        suspension = build_suspension(system, split, kappa)
        higher = suspension_center_jets(suspension, system, split, problem.k_max, tol, K)
        h = [jet_add(kappa[n], higher[n]) for n in kappa.indices()]
        trusted = intersect_ranges(kappa.trusted, higher.trusted)
        orders = {0: kappa.diagnostics.get("kappa"), **higher.diagnostics["orders"]}
    residual = problem.residual(h)
    _logger.info("Center homological equation p=%s solved, residual %.3g", p, residual)
    return problem.as_sequence(h, trusted, {"orders": orders, "residual": residual, "rates": split.rates})


def solve_homological_hyperbolic(
    system: NonlinearSystem,
    p: int,
    J: int,
    tol: float,
    spectrum: SpectrumResult | None = None,
    K: float = 1.0,
) -> TimeJetSeq:
    """Solve -A_n(x_c) h_n(x_c, v) + g_n^p(x_c, v) + h_{n+1}(w_n(x_c), A_n(x_c) v) = 0 on the hyperbolic components.

    Every hyperbolic interval is a target; the contracting unknowns of block i are the monomials whose products
    lie above interval i.

    Returns:
        (TimeJetSeq): h_n^p with hyperbolic-valued coefficients (ordered x_s, x_u) on [start, stop + 1].
    """
    if p < 2:
        raise ArityError(f"Hyperbolic couplings start at v-degree 2, got {p}.", p)
    problem = HomologicalProblem(system, p, J, "hyperbolic", spectrum)
    h = problem.zero()
    trusted = None
    orders = {}
    for k in range(problem.k_max + 1):
        h, solution = problem.solve_order(k, h, tol, K)
        if solution is not None:
            trusted = intersect_ranges(trusted, solution.trusted)
            orders[k] = solution.diagnostics()
    residual = problem.residual(h)
    _logger.info("Hyperbolic homological equation p=%s solved, residual %.3g", p, residual)
    rates = {str(target): split.rates for target, split in problem.splits.items()}
    return problem.as_sequence(h, trusted, {"orders": orders, "residual": residual, "rates": rates})
