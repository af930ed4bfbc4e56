"""Center manifolds of nonautonomous systems at jet level.

The manifold is the graph v = phi_n(x_c), with phi_n(0) = 0 and d_0 phi_n = 0, of an invariant family:
pi_su F_n(x_c, phi_n(x_c)) = phi_{n+1}(pi_c F_n(x_c, phi_n(x_c))). Its x_c-degree-j coefficients solve a linear
nonautonomous equation driven by the lower degrees, handled by ``two_sided_solve``.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import optimize

from takens_nf.cocycle import NonlinearSystem, TrichotomyData
from takens_nf.exceptions import GapViolation, JetOrderError, SplittingError
from takens_nf.homological import block_jet, coefficient_block, intersect_ranges, two_sided_solve
from takens_nf.jets import (
    JetPoly,
    TimeJetSeq,
    bidegree_part,
    graded_exponents,
    jet_add,
    jet_compose,
    jet_evaluate,
    jet_jacobian_at,
    jet_scale,
    substitution_matrix,
    to_records,
)

_logger = logging.getLogger(__name__)

PROJECTION_TOLERANCE = 1e-10


@dataclass(frozen=True)
class CenterManifoldJets:
    """Jets of the center manifold.

    Attributes:
        phi (TimeJetSeq): phi_n over all variables (only x_c-monomials of degree 2..order), target (x_s, x_u), on
            [start, stop + 1] of the system window.
        order (int): Jet order.
        residual (float): Worst invariance residual on the trusted range.
        bound (float): Largest coefficient of phi over the window.
        rates (tuple[float, ...]): Trichotomy rates the jets were solved with.
    """

    phi: TimeJetSeq
    order: int
    residual: float
    bound: float
    rates: tuple[float, float, float, float, float, float]
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def dims(self) -> tuple[int, int, int]:
        """(d_s, d_c, d_u)."""
        return self.phi.jets[0].dims

    def to_dict(self) -> dict[str, Any]:
        """JSON-friendly form with phi at the first trusted index."""
        anchor = self.phi.start if self.phi.trusted is None else self.phi.trusted[0]
        return {
            "order": self.order,
            "residual": self.residual,
            "bound": self.bound,
            "trusted": None if self.phi.trusted is None else list(self.phi.trusted),
            "phi_at": anchor,
            "phi": to_records(self.phi[anchor]),
        }


def _check_coordinate(data: TrichotomyData, dims: tuple[int, int, int], window: tuple[int, int]):
    expected = TrichotomyData.coordinate(dims, 0, 1.0, data.rates).at(0)
    for n in range(max(window[0], data.start), min(window[1], data.stop) + 1):
        if np.max(np.abs(data.at(n) - expected)) > PROJECTION_TOLERANCE:
            raise SplittingError(f"Projections at n={n} are not the coordinate projections of the split system.", n)


def _check_manifold_gap(rates: Sequence[float], dims: tuple[int, int, int], order: int):
    _, mu_plus, lambda_minus, lambda_plus, rho_minus, _ = rates
    d_s, _, d_u = dims
    for j in range(2, order + 1):
        if d_s and mu_plus >= lambda_minus**j:
            raise GapViolation(f"Stable rate {mu_plus:.6g} does not lie below lambda_-^{j}.", ("stable", j))
        if d_u and lambda_plus**j >= rho_minus:
            raise GapViolation(f"lambda_+^{j} does not lie below the unstable rate {rho_minus:.6g}.", ("unstable", j))


def _graph_inner(phi: JetPoly) -> list[JetPoly]:
    # components (x_s, x_c, x_u) -> (phi_s(x_c), x_c, phi_u(x_c))
    d_s, d_c, d_u = phi.dims
    nvars = d_s + d_c + d_u
    identity = [
        JetPoly(phi.dims, 1, phi.max_order, {tuple(int(i == j) for i in range(nvars)): [1.0]}) for j in range(nvars)
    ]
    graph = phi.components()
    return graph[:d_s] + identity[d_s : d_s + d_c] + graph[d_s:]


def invariance_defect(system: NonlinearSystem, phi: Sequence[JetPoly], n: int, order: int) -> JetPoly:
    """pi_su F_n(x_c, phi_n(x_c)) - phi_{n+1}(pi_c F_n(x_c, phi_n(x_c))) truncated at x_c-degree ``order``.

    ``phi`` is indexed from the start of the system window.
    """
    d_s, d_c, d_u = system.dims
    start = system.window[0]
    here, after = phi[n - start], phi[n + 1 - start]
    image = jet_compose(system.map_at(n), _graph_inner(here), system.max_order)
    rows = list(range(d_s)) + list(range(d_s + d_c, d_s + d_c + d_u))
    hyperbolic = jet_scale(image, np.eye(image.target)[rows])
    # phi_{n+1} only depends on x_c; its v-slots receive zeros
    zero = JetPoly.zero(system.dims, 1, system.max_order)
    inner = [zero] * d_s + image.components()[d_s : d_s + d_c] + [zero] * d_u
    transported = jet_compose(after, inner, system.max_order)
    return bidegree_part(jet_add(hyperbolic, jet_scale(transported, -1.0)), v_degree_eq=0, max_c=order)


def center_manifold_jets(system: NonlinearSystem, data: TrichotomyData, order: int, tol: float) -> CenterManifoldJets:
    """Solve the invariance identity of the center manifold order by order in x_c.

    Writing phi_n^j for the degree-j part, the identity at degree j reads
    A_n^su phi_n^j(x_c) - phi_{n+1}^j(A_n^c x_c) = -r_n^j, where r_n^j collects the degree-j terms produced by the
    lower degrees. The stable rows contract forward and the unstable rows backward, given the gaps
    mu_+ < lambda_-^j and lambda_+^j < rho_-.

    Args:
        system (NonlinearSystem): A system in split coordinates.
        data (TrichotomyData): Coordinate projections and rates of its linear part.
        order (int): Jet order of phi, at most the order of the system jets.
        tol (float): Accuracy of the series truncation.

    Returns:
        (CenterManifoldJets): The jets with their invariance residual.

    Raises:
        GapViolation: When a gap needed up to ``order`` fails.
        WindowTooSmallError: When the truncation length leaves no trusted range.
    """
    if not 1 <= order <= system.max_order:
        raise JetOrderError(f"Center manifold order {order} must lie in [1, {system.max_order}].", order)
    d_s, d_c, d_u = dims = system.dims
    start, stop = system.window
    _check_coordinate(data, dims, (start, stop))
    d_v = d_s + d_u
    phi = [JetPoly.zero(dims, d_v, system.max_order)] * (stop - start + 2)
    if d_c == 0 or d_v == 0:
        _logger.info("Degenerate center manifold (dims %s): phi = 0", dims)
        sequence = TimeJetSeq(start, tuple(phi), (start, stop + 1), {"orders": {}})
        return CenterManifoldJets(sequence, order, 0.0, 0.0, data.rates, {"orders": {}})
    _check_manifold_gap(data.rates, dims, order)
    contracting = np.arange(d_v) < d_s
    trusted = None
    orders = {}
    for j in range(2, order + 1):
        n_c = len(graded_exponents(d_c, j))
        count = stop - start + 1
        operators = np.empty((count, d_v * n_c, d_v * n_c))
        forcing = np.empty((count, d_v * n_c))
        for offset, n in enumerate(range(start, stop + 1)):
            a_s, a_c, a_u = system.blocks(n)
            a_su = np.block([[a_s, np.zeros((d_s, d_u))], [np.zeros((d_u, d_s)), a_u]])
            center_inverse = substitution_matrix(np.linalg.inv(a_c), j)
            operators[offset] = np.kron(a_su, center_inverse.T)
            residual = coefficient_block(invariance_defect(system, phi, n, j), j, 0)
            forcing[offset] = (-residual @ center_inverse).reshape(-1)
        mask = np.repeat(contracting, n_c)
        solution = two_sided_solve(start, operators, forcing, mask, tol, data.K)
        phi = [
            jet_add(jet, block_jet(dims, values.reshape(d_v, n_c), j, 0, system.max_order))
            for jet, values in zip(phi, solution.values)
        ]
        trusted = intersect_ranges(trusted, solution.trusted)
        orders[j] = solution.diagnostics()
        _logger.debug("Center manifold degree %s: rates %s, truncation %s", j, solution.rates, solution.truncation)
    low, high = (start, stop) if trusted is None else (trusted[0], min(trusted[1], stop))
    residual = max((invariance_defect(system, phi, n, order).max_abs() for n in range(low, high + 1)), default=0.0)
    bound = max(jet.max_abs() for jet in phi)
    _logger.info("Center manifold of order %s: residual %.3g, coefficient bound %.3g", order, residual, bound)
    sequence = TimeJetSeq(start, tuple(phi), trusted, {"orders": orders})
    return CenterManifoldJets(sequence, order, residual, bound, data.rates, {"orders": orders})


@dataclass(frozen=True)
class InvarianceTable:
    """Sampled invariance residuals per radius and the growth constants of orbits on the manifold."""

    rows: list[dict[str, float]]
    growth: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return {"rows": self.rows, "growth": self.growth}


def _sphere(rng: np.random.Generator, dim: int, samples: int) -> np.ndarray:
    directions = rng.standard_normal((samples, dim))
    return directions / np.linalg.norm(directions, axis=1, keepdims=True)


def _on_graph(phi: JetPoly, x_c: np.ndarray) -> np.ndarray:
    d_s, d_c, d_u = phi.dims
    point = np.zeros(d_s + d_c + d_u)
    point[d_s : d_s + d_c] = x_c
    v = jet_evaluate(phi, point)
    point[:d_s], point[d_s + d_c :] = v[:d_s], v[d_s:]
    return point


def _preimage(jet: JetPoly, image: np.ndarray, guess: np.ndarray) -> np.ndarray | None:
    result = optimize.root(
        lambda y: jet_evaluate(jet, y) - image, guess, jac=lambda y: jet_jacobian_at(jet, y), tol=1e-14
    )
    return result.x if result.success else None


def verify_center_invariance(
    system: NonlinearSystem,
    cm: CenterManifoldJets,
    radii: Sequence[float],
    samples: int = 16,
    gamma1: float | None = None,
    gamma2: float | None = None,
    seed: int = 0,
) -> InvarianceTable:
    """Sample the invariance identity on spheres of x_c and the growth of orbits started on the manifold.

    For each radius the table holds the largest |pi_su F_n(x) - phi_{n+1}(pi_c F_n(x))| over sampled x on the graph
    and n in the trusted range. Orbits started at the smallest radius at time 0 are run forward to the end of the
    window and backward (by solving F_{m-1}(y) = x_m) to its start; the growth constants are
    max |x_m| / (|x_0| gamma2^m) forward and max |x_m| / (|x_0| gamma1^m) backward.

    Args:
        system (NonlinearSystem): The system the jets were computed for.
        cm (CenterManifoldJets): The jets.
        radii (Sequence[float]): Radii of the sampled spheres.
        samples (int): Directions per radius.
        gamma1 (float | None): Backward rate in (mu_+, lambda_-^N); the geometric mean of the ends by default.
        gamma2 (float | None): Forward rate in (lambda_+^N, rho_-); the geometric mean of the ends by default.
        seed (int): Seed of the sampled directions.

    Returns:
        (InvarianceTable): Residual rows and growth constants.
    """
    d_s, d_c, d_u = system.dims
    rng = np.random.default_rng(seed)
    start, stop = system.window
    low, high = (start, stop) if cm.phi.trusted is None else (cm.phi.trusted[0], min(cm.phi.trusted[1], stop))
    directions = _sphere(rng, d_c, samples) if d_c else np.zeros((1, 0))
    rows = []
    for radius in radii:
        worst = 0.0
        for n in range(low, high + 1):
            jet = system.map_at(n)
            for direction in directions:
                image = jet_evaluate(jet, _on_graph(cm.phi[n], radius * direction))
                landing = _on_graph(cm.phi[n + 1], image[d_s : d_s + d_c])
                defect = np.concatenate([image[:d_s] - landing[:d_s], image[d_s + d_c :] - landing[d_s + d_c :]])
                worst = max(worst, float(np.linalg.norm(defect)))
        rows.append({"radius": float(radius), "residual": worst})
    _, mu_plus, lambda_minus, lambda_plus, rho_minus, _ = cm.rates
    if gamma1 is None:
        gamma1 = math.sqrt(mu_plus * lambda_minus**cm.order)
    if gamma2 is None:
        gamma2 = math.sqrt(lambda_plus**cm.order * rho_minus)
    growth: dict[str, Any] = {"gamma1": gamma1, "gamma2": gamma2, "forward": None, "backward": None}
    if d_c and radii and start <= 0 < stop:
        origin = _on_graph(cm.phi[0], min(radii) * directions[0])
        size = float(np.linalg.norm(origin))
        point, forward = origin, 1.0
        for m in range(0, stop):
            point = jet_evaluate(system.map_at(m), point)
            forward = max(forward, float(np.linalg.norm(point)) / (size * gamma2 ** (m + 1)))
        point, backward = origin, 1.0
        for m in range(0, start, -1):
            previous = _preimage(system.map_at(m - 1), point, system.linear.inverse(m - 1) @ point)
            if previous is None:
                _logger.warning("Backward orbit on the center manifold stopped at n=%s", m)
                break
            point = previous
            backward = max(backward, float(np.linalg.norm(point)) / (size * gamma1 ** (m - 1)))
        growth.update(forward=forward, backward=backward)
    _logger.info("Invariance residuals %s, growth %s", [row["residual"] for row in rows], growth)
    return InvarianceTable(rows, growth)


def straightening_maps(cm: CenterManifoldJets) -> tuple[TimeJetSeq, TimeJetSeq]:
    """The maps T_n(x) = (x_s - phi_s(x_c), x_c, x_u - phi_u(x_c)) and their exact inverses."""
    d_s, d_c, d_u = cm.dims
    nvars = d_s + d_c + d_u
    order = cm.phi.jets[0].max_order
    embed = np.eye(nvars)[:, list(range(d_s)) + list(range(d_s + d_c, nvars))]
    identity = JetPoly.identity(cm.dims, order)
    forward = cm.phi.map(lambda n, jet: jet_add(identity, jet_scale(jet, -embed)))
    inverse = cm.phi.map(lambda n, jet: jet_add(identity, jet_scale(jet, embed)))
    return forward, inverse


def straighten(system: NonlinearSystem, cm: CenterManifoldJets) -> NonlinearSystem:
    """Conjugate by the graph transform so that the center manifold becomes {v = 0}.

    Returns:
        (NonlinearSystem): F~_n = T_{n+1} o F_n o T_n^{-1} with the same linear part; the remaining
        v-degree-0 hyperbolic defect is stored in the diagnostics of its nonlinearity.
    """
    d_s, d_c, d_u = system.dims
    start, stop = system.window
    forward, inverse = straightening_maps(cm)
    order = system.max_order
    rows = list(range(d_s)) + list(range(d_s + d_c, d_s + d_c + d_u))
    jets = []
    defect = 0.0
    low, high = (start, stop) if cm.phi.trusted is None else (cm.phi.trusted[0], min(cm.phi.trusted[1], stop))
    for n in range(start, stop + 1):
        conjugated = jet_compose(forward[n + 1], jet_compose(system.map_at(n), inverse[n], order), order)
        higher = {e: v for e, v in conjugated.coeffs.items() if sum(e) >= 2}
        nonlinear = JetPoly(conjugated.dims, conjugated.target, order, higher)
        jets.append(nonlinear)
        if low <= n <= high:
            hyperbolic = jet_scale(nonlinear, np.eye(nonlinear.target)[rows])
            on_center = bidegree_part(hyperbolic, v_degree_eq=0, max_c=cm.order)
            defect = max(defect, on_center.max_abs())
    _logger.info("Straightened system: hyperbolic defect on {v = 0} is %.3g through order %s", defect, cm.order)
    sequence = TimeJetSeq(start, tuple(jets), cm.phi.trusted, {"straightening_defect": defect})
    return system.with_nonlinearity(sequence)
