"""The Takens reduction: straighten the center manifold, remove the couplings order by order, verify the conjugacy.

Every stage conjugates F_n by a near-identity jet H_n, giving H_{n+1} o F_n o H_n^{-1}. All compositions are
truncated at total degree N0 + 1; the x_c-degree of the removed couplings is capped at J.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from takens_nf.cocycle import CocycleSpec, NonlinearSystem, TrichotomyData
from takens_nf.exceptions import ArityError, DivergenceError, StageError
from takens_nf.homological import (
    intersect_ranges,
    resolve_spectrum,
    solve_homological_center,
    solve_homological_hyperbolic,
)
from takens_nf.jets import (
    JetPoly,
    TimeJetSeq,
    bidegree_part,
    c_degree,
    jet_add,
    jet_compose,
    jet_evaluate,
    jet_inverse,
    jet_jacobian_at,
    jet_scale,
    to_records,
    v_degree,
)
from takens_nf.manifold import center_manifold_jets, straighten, straightening_maps
from takens_nf.spectral import trichotomy_rates

_logger = logging.getLogger(__name__)

RADII = (1e-3, 3e-3, 1e-2, 3e-2, 1e-1)
STAGE_TOLERANCE = 1e-10
STRUCTURE_TOLERANCE = 1e-9
INVERSE_DEFECT_TOLERANCE = 1e-9
RK4_STEPS = 64
DIVERGENCE_PATIENCE = 10


@dataclass(frozen=True)
class TransformSeq:
    """Near-identity coordinate changes x -> H_n(x) with their truncated inverses.

    Attributes:
        forward (TimeJetSeq): H_n.
        inverse (TimeJetSeq): H_n^{-1}, truncated at the same order.
        provenance (str): ``straighten``, ``center-p``, ``hyperbolic-p`` or ``composed``.
        trusted (tuple[int, int] | None): Index range where the coefficients match the bi-infinite solution.
    """

    forward: TimeJetSeq
    inverse: TimeJetSeq
    provenance: str
    trusted: tuple[int, int] | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def window(self) -> tuple[int, int]:
        """Index range of the maps."""
        return self.forward.window

    @property
    def order(self) -> int:
        """Truncation order."""
        return self.forward.jets[0].max_order

    def inverse_defect(self) -> float:
        """Largest coefficient of H_n o H_n^{-1} - Id over the window."""
        identity = JetPoly.identity(self.forward.jets[0].dims, self.order)
        return max(
            jet_add(jet_compose(self.forward[n], self.inverse[n], self.order), jet_scale(identity, -1.0)).max_abs()
            for n in self.forward.indices()
        )

    def check_inverse(self) -> float:
        """Return ``inverse_defect`` after checking it against ``INVERSE_DEFECT_TOLERANCE``.

        The tolerance is relative to the largest coefficient of H_n when that exceeds one.

        Raises:
            StageError: When the truncated inverse does not invert H_n.
        """
        defect = self.inverse_defect()
        scale = max(1.0, max(jet.max_abs() for jet in self.forward))
        if defect > INVERSE_DEFECT_TOLERANCE * scale:
            raise StageError(
                f"Inverse of {self.provenance} has defect {defect:.3g} above {INVERSE_DEFECT_TOLERANCE:g}.",
                self.provenance,
                defect,
            )
        return defect

    def linear_defect(self) -> float:
        """Largest constant or linear coefficient of H_n - Id outside the center rows.

        The first center stage may carry a linear term x_c += h(v); every other entry of the linear part is Id.
        """
        d_s, d_c, _ = dims = self.forward.jets[0].dims
        nvars = sum(dims)
        worst = 0.0
        for jet in self.forward:
            worst = max(worst, float(np.max(np.abs(jet.coefficient((0,) * nvars)))))
            for j in range(nvars):
                column = jet.coefficient(tuple(int(i == j) for i in range(nvars))) - np.eye(nvars)[j]
                if not d_s <= j < d_s + d_c:
                    column = np.concatenate([column[:d_s], column[d_s + d_c :]])
                worst = max(worst, float(np.max(np.abs(column), initial=0.0)))
        return worst


def compose_transforms(transforms: Sequence[TransformSeq]) -> TransformSeq:
    """Psi_n = H^k_n o ... o H^1_n for transforms listed in the order they were applied."""
    if not transforms:
        raise ArityError("Nothing to compose.")
    first = transforms[0]
    order = first.order
    forward = list(first.forward)
    inverse = list(first.inverse)
    trusted = first.trusted
    for later in transforms[1:]:
        if later.window != first.window:
            raise ArityError(f"Transforms on {first.window} and {later.window} cannot be composed.")
        forward = [jet_compose(outer, inner, order) for outer, inner in zip(later.forward, forward)]
        inverse = [jet_compose(outer, inner, order) for outer, inner in zip(inverse, later.inverse)]
        trusted = intersect_ranges(trusted, later.trusted)
    start = first.forward.start
    provenance = " > ".join(transform.provenance for transform in transforms)
    return TransformSeq(
        TimeJetSeq(start, tuple(forward)),
        TimeJetSeq(start, tuple(inverse)),
        "composed",
        trusted,
        {"stages": provenance},
    )


def _rows(dims: tuple[int, int, int], kind: str) -> list[int]:
    d_s, d_c, d_u = dims
    if kind == "center":
        return list(range(d_s, d_s + d_c))
    return list(range(d_s)) + list(range(d_s + d_c, d_s + d_c + d_u))


def coupling_size(system: NonlinearSystem, kind: str, p: int, max_c: int | None = None) -> float:
    """Largest coefficient of v-degree p in the center (or hyperbolic) rows of F_n over the window."""
    rows = _rows(system.dims, kind)
    worst = 0.0
    start, stop = system.window
    for n in range(start, stop + 1):
        jet = system.map_at(n)
        part = bidegree_part(jet_scale(jet, np.eye(jet.target)[rows]), v_degree_eq=p, max_c=max_c)
        worst = max(worst, part.max_abs())
    return worst


def _decoupled(linear: CocycleSpec, dims: tuple[int, int, int]) -> CocycleSpec:
    center, hyperbolic = _rows(dims, "center"), _rows(dims, "hyperbolic")

    def generator(n: int) -> np.ndarray:
        matrix = linear.matrix(n).copy()
        matrix[np.ix_(center, hyperbolic)] = 0.0
        return matrix

    return CocycleSpec(linear.dim, generator, linear.window, name=linear.name)


def _linear_part(jet: JetPoly) -> np.ndarray:
    return np.stack([jet.coefficient(tuple(int(i == j) for i in range(jet.nvars))) for j in range(jet.nvars)], axis=1)


def _conjugate(system: NonlinearSystem, transform: TransformSeq) -> NonlinearSystem:
    # G_n = H_{n+1} o F_n o H_n^{-1}; a removed linear center coupling leaves the linear part block diagonal
    order = system.max_order
    start, stop = system.window
    jets, linear_parts = [], {}
    for n in range(start, stop + 1):
        pulled = jet_compose(system.map_at(n), transform.inverse[n], order)
        conjugated = jet_compose(transform.forward[n + 1], pulled, order)
        linear_parts[n] = _linear_part(conjugated)
        higher = {e: v for e, v in conjugated.coeffs.items() if sum(e) >= 2}
        jets.append(JetPoly(conjugated.dims, conjugated.target, order, higher))
    linear = system.linear
    scale = STAGE_TOLERANCE * max(1.0, linear.bounds[0])
    if any(np.max(np.abs(matrix - linear.matrix(n))) > scale for n, matrix in linear_parts.items()):
        linear = _decoupled(linear, system.dims)
        moved = max(float(np.max(np.abs(matrix - linear.matrix(n)))) for n, matrix in linear_parts.items())
        if moved > scale:
            raise StageError(
                f"Stage {transform.provenance} changed the linear part by {moved:.3g}.", transform.provenance, moved
            )
        _logger.debug("Stage %s removed the linear center coupling", transform.provenance)
    nonlinearity = TimeJetSeq(start, tuple(jets), transform.trusted, {"stage": transform.provenance})
    return replace(system, linear=linear, nonlinearity=nonlinearity, smallness=None, deriv_bound=None)


def _transform(system: NonlinearSystem, h: TimeJetSeq, kind: str, p: int) -> TransformSeq:
    dims = system.dims
    order = system.max_order
    embed = np.eye(sum(dims))[:, _rows(dims, kind)]
    identity = JetPoly.identity(dims, order)
    forward = h.map(lambda n, jet: jet_add(identity, jet_scale(jet, embed)))
    inverse = forward.map(lambda n, jet: jet_inverse(jet, order))
    transform = TransformSeq(forward, inverse, f"{kind}-{p}", h.trusted, dict(h.diagnostics))
    transform.check_inverse()
    return transform


def _stage(system: NonlinearSystem, kind: str, p: int, J: int, tol: float) -> tuple[NonlinearSystem, TransformSeq]:
    stage = f"{kind}-{p}"
    first = 1 if kind == "center" else 2
    k_max = min(J, system.max_order - p)
    for lower in range(first, p):
        leftover = coupling_size(system, kind, lower, k_max)
        if leftover > STAGE_TOLERANCE:
            raise StageError(
                f"Stage {stage} expects the v-degree {lower} couplings to vanish, found {leftover:.3g}.", stage, lower
            )
    solve = solve_homological_center if kind == "center" else solve_homological_hyperbolic
    h = solve(system, p, J, tol, spectrum=system.spectrum)
    transform = _transform(system, h, kind, p)
    conjugated = _conjugate(system, transform)
    remaining = coupling_size(conjugated, kind, p, k_max)
    scale = max(1.0, coupling_size(system, kind, p, k_max))
    if remaining > max(tol, STAGE_TOLERANCE) * scale:
        raise StageError(f"Stage {stage} leaves v-degree {p} couplings of size {remaining:.3g}.", stage, remaining)
    for lower in range(first, p):
        if coupling_size(conjugated, kind, lower, k_max) > STAGE_TOLERANCE:
            raise StageError(f"Stage {stage} re-introduced v-degree {lower} couplings.", stage, lower)
    _logger.info("Stage %s done: remaining coupling %.3g, trusted %s", stage, remaining, transform.trusted)
    return conjugated, transform


def eliminate_center_order(system: NonlinearSystem, p: int, J: int, tol: float) -> tuple[NonlinearSystem, TransformSeq]:
    """Remove the v-degree p terms of the center component with H_n = Id + (h_n^p, 0).

    The lower v-degrees 1..p-1 of the center component must already vanish.

    Raises:
        StageError: When a pre- or postcondition on the coupling coefficients fails.
    """
    return _stage(system, "center", p, J, tol)


def eliminate_hyperbolic_order(
    system: NonlinearSystem, p: int, J: int, tol: float
) -> tuple[NonlinearSystem, TransformSeq]:
    """Remove the v-degree p terms of the hyperbolic components with H_n = Id + (0, h_n^p)."""
    return _stage(system, "hyperbolic", p, J, tol)


@dataclass(frozen=True)
class TakensForm:
    """The normal form (A_n^s(x_c) x_s, w_n(x_c), A_n^u(x_c) x_u).

    Attributes:
        w (TimeJetSeq): Center dynamics w_n(x_c) = A_n^c x_c + f_n^c(x_c), target d_c.
        a_su (TimeJetSeq): Hyperbolic components A_n^su(x_c) v, linear in v, target d_s + d_u.
        order (int): N0.
        J (int): Highest x_c-degree of the coefficients of A_n^su(x_c).
    """

    w: TimeJetSeq
    a_su: TimeJetSeq
    order: int
    J: int

    @property
    def dims(self) -> tuple[int, int, int]:
        """(d_s, d_c, d_u)."""
        return self.w.jets[0].dims

    def map_at(self, n: int) -> JetPoly:
        """The full normal-form jet at time n."""
        dims = self.dims
        nvars = sum(dims)
        center = jet_scale(self.w[n], np.eye(nvars)[:, _rows(dims, "center")])
        hyperbolic = jet_scale(self.a_su[n], np.eye(nvars)[:, _rows(dims, "hyperbolic")])
        return jet_add(center, hyperbolic)

    def to_dict(self, n: int = 0) -> dict[str, Any]:
        """Records of w_n and A_n^su at one time index."""
        return {"order": self.order, "J": self.J, "n": n, "w": to_records(self.w[n]), "a_su": to_records(self.a_su[n])}


def takens_form_of(system: NonlinearSystem, N0: int, J: int) -> tuple[TakensForm, float]:
    """Read the normal form off a reduced system, with the largest coefficient that breaks its structure.

    Structure is checked through total degree N0 and x_c-degree J: the center component must not depend on v
    and the hyperbolic components must be linear in v.
    """
    dims = system.dims
    center_rows, hyperbolic_rows = _rows(dims, "center"), _rows(dims, "hyperbolic")
    w_jets, a_jets = [], []
    defect = 0.0
    for n in range(system.window[0], system.window[1] + 1):
        jet = system.map_at(n)
        center = jet_scale(jet, np.eye(jet.target)[center_rows])
        hyperbolic = jet_scale(jet, np.eye(jet.target)[hyperbolic_rows])
        w_jets.append(bidegree_part(center, v_degree_eq=0))
        a_jets.append(bidegree_part(hyperbolic, v_degree_eq=1))
        for part, allowed in ((center, 0), (hyperbolic, 1)):
            for exponent, value in part.coeffs.items():
                if sum(exponent) <= N0 and c_degree(dims, exponent) <= J and v_degree(dims, exponent) != allowed:
                    defect = max(defect, float(np.max(np.abs(value))))
    start = system.window[0]
    form = TakensForm(TimeJetSeq(start, tuple(w_jets)), TimeJetSeq(start, tuple(a_jets)), N0, J)
    return form, defect


def fit_log_slope(radii: Sequence[float], residuals: Sequence[float]) -> float | None:
    """Least-squares slope of log(residual) against log(radius) over the positive residuals."""
    points = [(math.log(r), math.log(e)) for r, e in zip(radii, residuals) if e > 0 and r > 0]
    if len(points) < 2:
        return None
    x, y = np.array(points).T
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class ConjugacyReport:
    """Sampled residuals of Psi_{n+1} o F_n - NF_n o Psi_n."""

    radii: tuple[float, ...]
    residuals: tuple[float, ...]
    slope: float | None
    validity_radius: float | None
    indices: tuple[int, int]
    structure_defect: float
    inverse_defect: float
    stages: dict[str, Any] = field(default_factory=dict)

    def rows(self) -> list[dict[str, float]]:
        """One CSV row per radius."""
        return [{"radius": r, "residual": e} for r, e in zip(self.radii, self.residuals)]

    def to_dict(self) -> dict[str, Any]:
        return {
            "radii": list(self.radii),
            "residuals": list(self.residuals),
            "slope": self.slope,
            "validity_radius": self.validity_radius,
            "indices": list(self.indices),
            "structure_defect": self.structure_defect,
            "inverse_defect": self.inverse_defect,
            "stages": self.stages,
        }


def conjugacy_residuals(
    system: NonlinearSystem,
    psi: TransformSeq,
    form: TakensForm,
    radii: Sequence[float] = RADII,
    samples: int = 8,
    seed: int = 0,
    indices: tuple[int, int] | None = None,
) -> list[float]:
    """Largest |Psi_{n+1}(F_n(x)) - NF_n(Psi_n(x))| over seeded directions x of each radius."""
    rng = np.random.default_rng(seed)
    directions = rng.standard_normal((samples, sum(system.dims)))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    low, high = system.window if indices is None else indices
    residuals = []
    for radius in radii:
        worst = 0.0
        for n in range(low, high + 1):
            jet, nf = system.map_at(n), form.map_at(n)
            for direction in directions:
                x = radius * direction
                left = jet_evaluate(psi.forward[n + 1], jet_evaluate(jet, x))
                right = jet_evaluate(nf, jet_evaluate(psi.forward[n], x))
                worst = max(worst, float(np.linalg.norm(left - right)))
        residuals.append(worst)
    return residuals


def takens_normal_form(
    system: NonlinearSystem,
    N0: int,
    J: int,
    tol: float,
    varsigma: float = 1e-6,
    radii: Sequence[float] = RADII,
    seed: int = 0,
) -> tuple[TakensForm, TransformSeq, ConjugacyReport]:
    """Reduce ``system`` to its Takens normal form of order N0.

    Straightens the center manifold, removes the center couplings of v-degree 1..N0 and then the hyperbolic
    couplings of v-degree 2..N0, composes all coordinate changes into Psi_n and samples the conjugacy residual.

    Args:
        system (NonlinearSystem): The system, in split coordinates.
        N0 (int): Order of the normal form.
        J (int): Highest x_c-degree of the removed couplings; N0 - 1 reaches every term of total degree N0.
        tol (float): Accuracy of the series solutions.
        varsigma (float): Inflation of the spectral endpoints used as trichotomy rates.
        radii (Sequence[float]): Radii of the conjugacy samples.
        seed (int): Seed of the sampled directions.

    Returns:
        (tuple[TakensForm, TransformSeq, ConjugacyReport]): Normal form, Psi_n and the residual report.

    Raises:
        StageError: When a stage fails its checks; the message names the stage.
    """
    if N0 < 1 or J < 0:
        raise ArityError(f"Need N0 >= 1 and J >= 0, got N0={N0}, J={J}.")
    spectrum = resolve_spectrum(system)
    order = N0 + 1
    truncated = system.nonlinearity.map(lambda n, jet: jet.with_order(order))
    original = replace(system, nonlinearity=truncated, spectrum=spectrum)
    data = TrichotomyData.coordinate(system.dims, system.linear.window, 1.0, trichotomy_rates(spectrum, varsigma))
    d_s, d_c, d_u = system.dims
    transforms = []
    current = original
    if d_c and d_s + d_u:
        cm = center_manifold_jets(original, data, N0, tol)
        current = straighten(original, cm)
        forward, inverse = straightening_maps(cm)
        transforms.append(TransformSeq(forward, inverse, "straighten", cm.phi.trusted, {"residual": cm.residual}))
        for p in range(1, N0 + 1):
            current, transform = eliminate_center_order(current, p, J, tol)
            transforms.append(transform)
    if d_s + d_u:
        for p in range(2, N0 + 1):
            current, transform = eliminate_hyperbolic_order(current, p, J, tol)
            transforms.append(transform)
    if transforms:
        psi = compose_transforms(transforms)
    else:
        identity = TimeJetSeq.from_function(
            (system.window[0], system.window[1] + 1), lambda n: JetPoly.identity(system.dims, order)
        )
        psi = TransformSeq(identity, identity, "composed", None, {"stages": ""})
    form, structure_defect = takens_form_of(current, N0, J)
    if structure_defect > STRUCTURE_TOLERANCE:
        raise StageError(
            f"Normal form structure is broken by a coefficient of size {structure_defect:.3g}.", "structure", N0
        )
    start, stop = system.window
    low, high = psi.trusted if psi.trusted is not None else (start, stop)
    indices = (max(low, start), min(high, stop))
    residuals = conjugacy_residuals(system, psi, form, radii, seed=seed, indices=indices)
    valid = [r for r, e in zip(radii, residuals) if e <= tol]
    report = ConjugacyReport(
        tuple(float(r) for r in radii),
        tuple(residuals),
        fit_log_slope(radii, residuals),
        max(valid) if valid else None,
        indices,
        structure_defect,
        psi.check_inverse(),
        {transform.provenance: _stage_summary(transform) for transform in transforms},
    )
    _logger.info(
        "Takens normal form of order %s: slope %s, validity radius %s", N0, report.slope, report.validity_radius
    )
    return form, psi, report


def _stage_summary(transform: TransformSeq) -> dict[str, Any]:
    return {
        "trusted": None if transform.trusted is None else list(transform.trusted),
        "residual": transform.diagnostics.get("residual"),
        "size": max(jet.max_abs() for jet in transform.forward),
    }


def taylor_split(R: JetPoly, N: int) -> tuple[JetPoly, JetPoly]:
    """Split R into the terms of x_u-degree at most N // 2 and the rest."""
    d_s, d_c, _ = R.dims
    threshold = N // 2
    low, high = {}, {}
    for exponent, value in R.coeffs.items():
        target = low if sum(exponent[d_s + d_c :]) <= threshold else high
        target[exponent] = value
    return JetPoly(R.dims, R.target, R.max_order, low), JetPoly(R.dims, R.target, R.max_order, high)


@dataclass(frozen=True)
class HomotopyResult:
    """The field h(x, tau) of the homotopy G_tau o H_tau = H_tau o G_0 at one point.

    Attributes:
        h (np.ndarray): h(x, tau).
        residual (float): |DG_tau(x) h(x) - h(G_tau x) + R1(x)|.
        terms (int): Series terms used.
        H (np.ndarray | None): Time-one map of the tau-flow at x, when requested.
        flow_defect (float | None): |H(G_0 x) - G_1(H x)|, when requested.
    """

    h: np.ndarray
    residual: float
    terms: int
    H: np.ndarray | None = None
    flow_defect: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "h": self.h.tolist(),
            "residual": self.residual,
            "terms": self.terms,
            "H": None if self.H is None else self.H.tolist(),
            "flow_defect": self.flow_defect,
        }


def _homotopy_field(
    G0: JetPoly, R1: JetPoly, x: np.ndarray, tau: float, tol: float, max_terms: int
) -> tuple[np.ndarray, int]:
    # h(x, tau) = -sum_{n >= 1} [D G^n(x)]^{-1} R1(G^{n-1} x)
    total = np.zeros_like(x)
    point = x.copy()
    jacobian = np.eye(len(x))
    previous = math.inf
    stalled = 0
    for n in range(1, max_terms + 1):
        step = jet_jacobian_at(G0, point) + tau * jet_jacobian_at(R1, point)
        jacobian = step @ jacobian
        term = -np.linalg.solve(jacobian, jet_evaluate(R1, point))
        total += term
        size = float(np.linalg.norm(term))
        if size < tol:
            return total, n
        stalled = stalled + 1 if size >= previous else 0
        if stalled >= DIVERGENCE_PATIENCE:
            raise DivergenceError(f"Homotopy series terms stopped decreasing after {n} terms at x={x}.", n)
        previous = size
        point = jet_evaluate(G0, point) + tau * jet_evaluate(R1, point)
    raise DivergenceError(f"Homotopy series did not reach {tol:g} within {max_terms} terms.", max_terms)


def homotopy_series_conjugacy(
    G0: JetPoly,
    R1: JetPoly,
    x: Sequence[float] | np.ndarray,
    tau: float,
    tol: float,
    flow: bool = False,
    max_terms: int = 2000,
) -> HomotopyResult:
    """Evaluate the homotopy field at (x, tau), its equation residual and optionally the time-one conjugacy.

    With G_tau = G0 + tau R1, the field h solves DG_tau(x) h(x) - h(G_tau x) = -R1(x) whenever the series converges,
    which needs the forward orbit of x to contract. With ``flow`` the tau-flow of (h, 1) is integrated from 0 to 1 by
    the classical Runge-Kutta scheme with 64 steps, giving H with H o G_0 = G_1 o H.

    Raises:
        DivergenceError: When ten consecutive series terms fail to decrease.
    """
    if G0.target != G0.nvars or R1.target != R1.nvars or G0.dims != R1.dims:
        raise ArityError("G0 and R1 must be self-maps over the same variables.")
    x = np.asarray(x, dtype=float).reshape(-1)
    h, terms = _homotopy_field(G0, R1, x, tau, tol, max_terms)
    image = jet_evaluate(G0, x) + tau * jet_evaluate(R1, x)
    h_image, _ = _homotopy_field(G0, R1, image, tau, tol, max_terms)
    derivative = jet_jacobian_at(G0, x) + tau * jet_jacobian_at(R1, x)
    residual = float(np.linalg.norm(derivative @ h - h_image + jet_evaluate(R1, x)))
    if not flow:
        return HomotopyResult(h, residual, terms)

    def time_one(point: np.ndarray) -> np.ndarray:
        dt = 1.0 / RK4_STEPS
        state = point.copy()
        for k in range(RK4_STEPS):
            s = k * dt
            k1 = _homotopy_field(G0, R1, state, s, tol, max_terms)[0]
            k2 = _homotopy_field(G0, R1, state + 0.5 * dt * k1, s + 0.5 * dt, tol, max_terms)[0]
            k3 = _homotopy_field(G0, R1, state + 0.5 * dt * k2, s + 0.5 * dt, tol, max_terms)[0]
            k4 = _homotopy_field(G0, R1, state + dt * k3, s + dt, tol, max_terms)[0]
            state = state + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return state

    conjugacy = time_one(x)
    left = time_one(jet_evaluate(G0, x))
    right = jet_evaluate(G0, conjugacy) + jet_evaluate(R1, conjugacy)
    defect = float(np.linalg.norm(left - right))
    _logger.debug("Homotopy at x=%s: residual %.3g, flow defect %.3g", x, residual, defect)
    return HomotopyResult(h, residual, terms, conjugacy, defect)
