"""Linear cocycles of bounded invertible matrices and nonlinear systems built on them.

Sequences are sampled on a finite window [-W, W]; any index outside raises ``OutOfWindowError`` instead of
extrapolating. All matrix norms are spectral norms.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Callable, Mapping, Sequence

import numpy as np

from takens_nf.exceptions import (
    ArityError,
    FamilyError,
    InvertibilityError,
    JetOrderError,
    OutOfWindowError,
    ProjectionRankError,
    SplittingError,
    WindowTooSmallError,
)
from takens_nf.jets import JetPoly, TimeJetSeq, graded_exponents, join_exponent

if TYPE_CHECKING:  # pragma: no cover
    from takens_nf.spectral import SpectrumResult

_logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
INVERSE_TOLERANCE = 1e-10
FAMILIES = ("autonomous", "step", "quasiperiodic-diagonal", "random-bounded", "block-trichotomic")
FAMILY_PARAMETERS = {
    "autonomous": ("matrix",),
    "step": ("left", "right"),
    "quasiperiodic-diagonal": ("c", "beta", "omega"),
    "random-bounded": ("base", "delta"),
    "block-trichotomic": ("intervals", "sizes", "delta"),
}
GOLDEN_OMEGA = 2.0 * math.pi * (1.0 + math.sqrt(5.0)) / 2.0


def spectral_norm(matrix: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(matrix, 2))


def guarded_inverse(matrix: np.ndarray, index: int | None = None) -> np.ndarray:
    """Invert a matrix, refusing when its condition number exceeds 1e12."""
    condition = np.linalg.cond(matrix)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise InvertibilityError(f"Matrix at index {index} is not safely invertible (cond = {condition:.3e}).", index)
    return np.linalg.inv(matrix)


@dataclass(frozen=True)
class CocycleSpec:
    """A two-sided sequence of invertible d x d matrices sampled on [-window, window].

    Attributes:
        dim (int): The dimension d.
        generator (Callable[[int], np.ndarray]): n -> A_n.
        window (int): Half-width W of the sampled window.
        inv_generator (Callable[[int], np.ndarray] | None): n -> A_n^{-1}. When omitted, inverses are computed
            numerically with a condition-number guard.
        bounds (tuple[float, float] | None): Declared (sup |A_n|, sup |A_n^{-1}|). Computed from the samples when
            omitted; when given they must dominate the sampled norms.
        name (str): Family name, for reports.
    """

    dim: int
    generator: Callable[[int], np.ndarray]
    window: int
    inv_generator: Callable[[int], np.ndarray] | None = None
    bounds: tuple[float, float] | None = None
    name: str = "custom"
    _matrices: np.ndarray = field(init=False, repr=False, compare=False)
    _inverses: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1 or self.window < 0:
            raise ArityError(f"Invalid cocycle dimension {self.dim} or window {self.window}.")
        indices = range(-self.window, self.window + 1)
        matrices = np.empty((len(indices), self.dim, self.dim))
        inverses = np.empty_like(matrices)
        for k, n in enumerate(indices):
            matrix = np.atleast_2d(np.asarray(self.generator(n), dtype=float))
            if matrix.shape != (self.dim, self.dim):
                raise ArityError(f"Generator returned shape {matrix.shape} at n={n}, expected {(self.dim, self.dim)}.")
            if self.inv_generator is None:
                inverse = guarded_inverse(matrix, n)
            else:
                inverse = np.atleast_2d(np.asarray(self.inv_generator(n), dtype=float))
            defect = spectral_norm(matrix @ inverse - np.eye(self.dim))
            if defect > INVERSE_TOLERANCE:
                raise InvertibilityError(f"A_n A_n^-1 differs from Id by {defect:.3e} at n={n}.", n)
            matrices[k], inverses[k] = matrix, inverse
        object.__setattr__(self, "_matrices", matrices)
        object.__setattr__(self, "_inverses", inverses)
        sampled = (
            max(spectral_norm(m) for m in matrices),
            max(spectral_norm(m) for m in inverses),
        )
        if self.bounds is None:
            object.__setattr__(self, "bounds", sampled)
        elif self.bounds[0] < sampled[0] * (1 - 1e-12) or self.bounds[1] < sampled[1] * (1 - 1e-12):
            raise InvertibilityError(f"Declared bounds {self.bounds} do not dominate the sampled norms {sampled}.")

    @classmethod
    def from_matrices(cls, matrices: Mapping[int, np.ndarray], window: int, name: str = "tabulated") -> "CocycleSpec":
        """Cocycle given by a table n -> A_n covering [-window, window]."""
        table = {n: np.atleast_2d(np.asarray(m, dtype=float)) for n, m in matrices.items()}
        missing = [n for n in range(-window, window + 1) if n not in table]
        if missing:
            raise OutOfWindowError(f"Table does not cover index {missing[0]}.", missing[0])
        dim = table[0].shape[0]
        return cls(dim, table.__getitem__, window, name=name)

    def _position(self, n: int) -> int:
        if abs(n) > self.window:
            raise OutOfWindowError(f"Index {n} outside the window [-{self.window}, {self.window}].", n)
        return n + self.window

    def matrix(self, n: int) -> np.ndarray:
        """A_n."""
        return self._matrices[self._position(n)]

    def inverse(self, n: int) -> np.ndarray:
        """A_n^{-1}."""
        return self._inverses[self._position(n)]

    def scaled(self, factor: float) -> "CocycleSpec":
        """The cocycle (factor * A_n)."""
        return CocycleSpec(
            self.dim,
            lambda n: factor * self.matrix(n),
            self.window,
            lambda n: self.inverse(n) / factor,
            name=f"{factor}*{self.name}",
        )


def eval_cocycle(spec: CocycleSpec, m: int, n: int) -> np.ndarray:
    """Evaluate the cocycle from time n to time m.

    Returns:
        (np.ndarray): A_{m-1} ... A_n if m > n, Id if m == n, A_m^{-1} ... A_{n-1}^{-1} if m < n.
    """
    spec._position(m)
    spec._position(n)
    result = np.eye(spec.dim)
    if m > n:
        for k in range(n, m):
            result = spec.matrix(k) @ result
    elif m < n:
        for k in range(n - 1, m - 1, -1):
            result = spec.inverse(k) @ result
    return result


def cocycle_identity_defect(spec: CocycleSpec, m: int, k: int, n: int) -> float:
    """Norm of A(m, k) A(k, n) - A(m, n)."""
    return spectral_norm(eval_cocycle(spec, m, k) @ eval_cocycle(spec, k, n) - eval_cocycle(spec, m, n))


def _as_matrix(value: Any, key: str) -> np.ndarray:
    try:
        matrix = np.atleast_2d(np.asarray(value, dtype=float))
    except (TypeError, ValueError) as error:
        raise FamilyError(f"Parameter {key!r} is not numeric: {error}", key) from error
    if matrix.shape[0] != matrix.shape[1]:
        raise FamilyError(f"Parameter {key!r} must be a square matrix, got shape {matrix.shape}.", key)
    return matrix


def _require(params: Mapping[str, Any], *keys: str) -> list[Any]:
    missing = [key for key in keys if key not in params]
    if missing:
        raise FamilyError(f"Missing family parameter {missing[0]!r}.", missing[0])
    return [params[key] for key in keys]


def _index_rng(seed: int, n: int) -> np.random.Generator:
    # Deterministic per-index stream; negative indices map to odd entropy words.
    return np.random.default_rng([seed, 2 * abs(n) + (n < 0)])


def _autonomous(params: Mapping[str, Any], seed: int, window: int) -> CocycleSpec:
    (matrix,) = _require(params, "matrix")
    matrix = _as_matrix(matrix, "matrix")
    inverse = guarded_inverse(matrix)
    return CocycleSpec(matrix.shape[0], lambda n: matrix, window, lambda n: inverse, name="autonomous")


def _step(params: Mapping[str, Any], seed: int, window: int) -> CocycleSpec:
    left, right = (_as_matrix(value, key) for key, value in zip(("left", "right"), _require(params, "left", "right")))
    if left.shape != right.shape:
        raise FamilyError("Parameters 'left' and 'right' must have the same shape.")
    left_inverse, right_inverse = guarded_inverse(left), guarded_inverse(right)
    return CocycleSpec(
        left.shape[0],
        lambda n: left if n < 0 else right,
        window,
        lambda n: left_inverse if n < 0 else right_inverse,
        name="step",
    )


def _quasiperiodic(params: Mapping[str, Any], seed: int, window: int) -> CocycleSpec:
    offsets = np.atleast_1d(np.asarray(params.get("c", 0.0), dtype=float))
    beta = np.atleast_1d(np.asarray(params.get("beta", 0.3), dtype=float))
    omega = float(params.get("omega", GOLDEN_OMEGA))
    dim = max(offsets.size, beta.size)
    offsets, beta = np.broadcast_to(offsets, (dim,)), np.broadcast_to(beta, (dim,))

    def exponent(n: int) -> np.ndarray:
        return offsets + beta * math.cos(omega * n)

    return CocycleSpec(
        dim,
        lambda n: np.diag(np.exp(exponent(n))),
        window,
        lambda n: np.diag(np.exp(-exponent(n))),
        name="quasiperiodic-diagonal",
    )


def _random_bounded(params: Mapping[str, Any], seed: int, window: int) -> CocycleSpec:
    (base,) = _require(params, "base")
    base = _as_matrix(base, "base")
    delta = float(params.get("delta", 0.01))

    def generator(n: int) -> np.ndarray:
        return base + delta * _index_rng(seed, n).uniform(-1.0, 1.0, size=base.shape)

    return CocycleSpec(base.shape[0], generator, window, name="random-bounded")


def _block_trichotomic(params: Mapping[str, Any], seed: int, window: int) -> CocycleSpec:
    (intervals,) = _require(params, "intervals")
    intervals = np.atleast_2d(np.asarray(intervals, dtype=float))
    if intervals.shape[1] != 2 or np.any(intervals <= 0.0):
        raise InvertibilityError("Block intervals must be pairs of positive endpoints.", intervals.tolist())
    sizes = [int(size) for size in params.get("sizes", [1] * len(intervals))]
    if len(sizes) != len(intervals):
        raise FamilyError("Parameter 'sizes' must give one block size per interval.")
    lows = np.repeat(intervals.min(axis=1), sizes)
    highs = np.repeat(intervals.max(axis=1), sizes)
    delta = float(params.get("delta", 0.0))

    def diagonal(n: int) -> np.ndarray:
        entries = lows if n < 0 else highs
        if delta:
            entries = entries * np.exp(delta * _index_rng(seed, n).uniform(-1.0, 1.0, size=entries.size))
        return entries

    return CocycleSpec(
        int(sum(sizes)),
        lambda n: np.diag(diagonal(n)),
        window,
        lambda n: np.diag(1.0 / diagonal(n)),
        name="block-trichotomic",
    )


_BUILDERS: dict[str, Callable[[Mapping[str, Any], int, int], CocycleSpec]] = {
    "autonomous": _autonomous,
    "step": _step,
    "quasiperiodic-diagonal": _quasiperiodic,
    "random-bounded": _random_bounded,
    "block-trichotomic": _block_trichotomic,
}


def builtin_family(name: str, params: Mapping[str, Any], seed: int = 0, window: int = 32) -> CocycleSpec:
    """Build one of the builtin cocycle families.

    Args:
        name (str): One of ``autonomous``, ``step``, ``quasiperiodic-diagonal``, ``random-bounded``,
            ``block-trichotomic``.
        params (Mapping[str, Any]): Family parameters, e.g. ``{"left": 2, "right": 0.5}`` for ``step``.
        seed (int): Seed of the random families. Identical seeds give identical sequences.
        window (int): Half-width of the sampled window.

    Returns:
        (CocycleSpec): The sampled cocycle.
    """
    builder = _BUILDERS.get(name)
    if builder is None:
        raise FamilyError(f"Unknown family {name!r}. Expected one of {', '.join(FAMILIES)}.", name)
    spec = builder(params, seed, window)
    _logger.info("Built %s cocycle of dimension %s on window %s", name, spec.dim, window)
    if name == "random-bounded":
        _logger.warning("Norm bounds of the %s cocycle are certified on [-%s, %s] only", name, window, window)
    return spec


TRICHOTOMY_INEQUALITIES = (
    "stable_forward",
    "unstable_backward",
    "center_forward",
    "center_backward",
    "stable_backward",
    "unstable_forward",
)


@dataclass(frozen=True)
class TrichotomyData:
    """Invariant projections and growth constants of an exponential trichotomy.

    Attributes:
        start (int): Time index of the first projection triple.
        projections (np.ndarray): Array of shape (count, 3, d, d) holding (P_s, P_c, P_u) per time.
        K (float): Growth constant.
        rates (tuple[float, ...]): (mu_minus, mu_plus, lambda_minus, lambda_plus, rho_minus, rho_plus).
    """

    start: int
    projections: np.ndarray
    K: float
    rates: tuple[float, float, float, float, float, float]

    def __post_init__(self):
        mu_minus, mu_plus, lambda_minus, lambda_plus, rho_minus, rho_plus = self.rates
        if self.K <= 0:
            raise ArityError("The trichotomy constant K must be positive.")
        if not 0 < mu_minus <= mu_plus < lambda_minus <= 1 <= lambda_plus < rho_minus <= rho_plus:
            raise ArityError(f"Trichotomy rates {self.rates} are not ordered.", self.rates)
        if self.projections.ndim != 4 or self.projections.shape[1] != 3:
            raise ArityError("Projections must have shape (count, 3, d, d).")

    @property
    def stop(self) -> int:
        """Time index of the last projection triple."""
        return self.start + self.projections.shape[0] - 1

    def at(self, n: int) -> np.ndarray:
        """Projection triple (3, d, d) at time n."""
        if not self.start <= n <= self.stop:
            raise OutOfWindowError(f"No projections at index {n}.", n)
        return self.projections[n - self.start]

    @classmethod
    def coordinate(cls, dims: tuple[int, int, int], window: int, K: float, rates: Sequence[float]) -> "TrichotomyData":
        """Coordinate projections onto (x_s, x_c, x_u) on [-window, window]."""
        dim = sum(dims)
        triple = np.zeros((3, dim, dim))
        offset = 0
        for k, size in enumerate(dims):
            triple[k, offset : offset + size, offset : offset + size] = np.eye(size)
            offset += size
        projections = np.repeat(triple[None], 2 * window + 1, axis=0)
        return cls(-window, projections, K, tuple(rates))


@dataclass(frozen=True)
class TrichotomyReport:
    """Outcome of ``verify_trichotomy``."""

    passed: bool
    K_obs: float
    observed: dict[str, float]
    inequality_pass: dict[str, bool]
    defects: dict[str, float]
    ranks: tuple[int, int, int]
    failed: tuple[str, ...]


def _batched_norms(matrices: np.ndarray) -> np.ndarray:
    if matrices.size == 0:
        return np.zeros(0)
    return np.linalg.svd(matrices, compute_uv=False)[..., 0]


def verify_trichotomy(spec: CocycleSpec, data: TrichotomyData, tol: float = 1e-8) -> TrichotomyReport:
    """Check the projection identities and the six growth inequalities of a trichotomy on the window.

    The window is the intersection of the cocycle window and the index range of ``data``. Each inequality is
    checked for all pairs m >= n and reported with its worst observed constant.

    Args:
        spec (CocycleSpec): The cocycle.
        data (TrichotomyData): Claimed projections, constant and rates.
        tol (float): Relative slack on the claimed constant K.

    Returns:
        (TrichotomyReport): Defects, observed constants and pass/fail per inequality.
    """
    low, high = max(-spec.window, data.start), min(spec.window, data.stop)
    if high - low < 16:
        raise WindowTooSmallError(f"Trichotomy verification needs a window span of at least 16, got [{low}, {high}].")
    dim = spec.dim
    ranks_per_n = [
        tuple(int(round(np.trace(p))) for p in data.at(n)) for n in range(low, high + 1)
    ]
    if len(set(ranks_per_n)) != 1:
        raise ProjectionRankError("Projection ranks change across the window.", sorted(set(ranks_per_n)))
    scale = max(1.0, max(spectral_norm(p) for n in range(low, high + 1) for p in data.at(n)))
    defects = {"sum": 0.0, "equivariance": 0.0, "idempotent": 0.0}
    for n in range(low, high + 1):
        triple = data.at(n)
        defects["sum"] = max(defects["sum"], spectral_norm(triple.sum(axis=0) - np.eye(dim)))
        defects["idempotent"] = max(defects["idempotent"], max(spectral_norm(p @ p - p) for p in triple))
        if n < high:
            after = data.at(n + 1)
            matrix = spec.matrix(n)
            defects["equivariance"] = max(
                defects["equivariance"], max(spectral_norm(after[k] @ matrix - matrix @ triple[k]) for k in range(3))
            )
    mu_minus, mu_plus, lambda_minus, lambda_plus, rho_minus, rho_plus = data.rates
    observed = dict.fromkeys(TRICHOTOMY_INEQUALITIES, 0.0)
    for n in range(low, high + 1):
        forward = [np.eye(dim)]
        backward = [np.eye(dim)]
        for m in range(n, high):
            forward.append(spec.matrix(m) @ forward[-1])
            backward.append(backward[-1] @ spec.inverse(m))
        forward_arr, backward_arr = np.array(forward), np.array(backward)
        steps = np.arange(len(forward))
        # projections at the later time m for the backward maps
        later = np.array([data.at(m) for m in range(n, high + 1)])
        here = data.at(n)
        checks = {
            "stable_forward": (forward_arr @ here[0], mu_plus),
            "center_forward": (forward_arr @ here[1], lambda_plus),
            "unstable_forward": (forward_arr @ here[2], rho_plus),
            "unstable_backward": (backward_arr @ later[:, 2], 1.0 / rho_minus),
            "center_backward": (backward_arr @ later[:, 1], 1.0 / lambda_minus),
            "stable_backward": (backward_arr @ later[:, 0], 1.0 / mu_minus),
        }
        for key, (matrices, rate) in checks.items():
            ratios = _batched_norms(matrices) / np.power(rate, steps)
            observed[key] = max(observed[key], float(np.max(ratios)))
    inequality_pass = {key: value <= data.K * (1.0 + tol) for key, value in observed.items()}
    limits = {
        "sum": INVERSE_TOLERANCE * scale,
        "idempotent": INVERSE_TOLERANCE * scale**2,
        "equivariance": 1e-8 * scale * spec.bounds[0],
    }
    failed = tuple(key for key in TRICHOTOMY_INEQUALITIES if not inequality_pass[key])
    failed = failed + tuple(key for key, value in defects.items() if value > limits[key])
    report = TrichotomyReport(
        passed=not failed,
        K_obs=max(observed.values()),
        observed=observed,
        inequality_pass=inequality_pass,
        defects=defects,
        ranks=ranks_per_n[0],
        failed=failed,
    )
    _logger.info("Trichotomy verification: passed=%s K_obs=%.4g failed=%s", report.passed, report.K_obs, failed)
    return report


@dataclass(frozen=True)
class NonlinearSystem:
    """The system x_{n+1} = A_n x_n + f_n(x_n) in split coordinates (x_s, x_c, x_u).

    Attributes:
        linear (CocycleSpec): The linear part A_n, block diagonal with respect to the split.
        nonlinearity (TimeJetSeq): Jets f_n with zero constant and zero linear part.
        smallness (float | None): Lipschitz bound of f_n on the unit ball. Computed when omitted.
        deriv_bound (float | None): Bound of the second derivative of f_n on the unit ball. Computed when omitted.
        v_blocks (tuple[int, ...] | None): For each hyperbolic variable (x_s then x_u), the index of its hyperbolic
            spectral interval. Resolved from the spectrum when omitted.
        spectrum (SpectrumResult | None): Dichotomy spectrum of the linear part, when computed.
    """

    linear: CocycleSpec
    nonlinearity: TimeJetSeq
    smallness: float | None = None
    deriv_bound: float | None = None
    v_blocks: tuple[int, ...] | None = None
    spectrum: "SpectrumResult | None" = None

    def __post_init__(self):
        first = self.nonlinearity.jets[0]
        if first.target != first.nvars or first.nvars != self.linear.dim:
            raise ArityError(
                f"Nonlinearity maps {first.nvars} variables to {first.target}, linear part has dimension "
                f"{self.linear.dim}."
            )
        start, stop = self.nonlinearity.window
        if start < -self.linear.window or stop > self.linear.window:
            raise OutOfWindowError(f"Nonlinearity window [{start}, {stop}] exceeds the linear window.")
        lipschitz, second = 0.0, 0.0
        for n, jet in zip(self.nonlinearity.indices(), self.nonlinearity):
            for exponent, value in jet.coeffs.items():
                degree = sum(exponent)
                if degree < 2:
                    raise JetOrderError(f"f_{n} has a monomial {exponent} of degree {degree} < 2.", (n, exponent))
                size = float(np.linalg.norm(value))
                lipschitz = max(lipschitz, degree * size)
                second = max(second, degree * (degree - 1) * size)
        if self.smallness is None:
            object.__setattr__(self, "smallness", lipschitz)
        if self.deriv_bound is None:
            object.__setattr__(self, "deriv_bound", second)
        if self.v_blocks is not None:
            object.__setattr__(self, "v_blocks", tuple(int(b) for b in self.v_blocks))

    @property
    def dims(self) -> tuple[int, int, int]:
        """(d_s, d_c, d_u)."""
        return self.nonlinearity.jets[0].dims

    @property
    def window(self) -> tuple[int, int]:
        """Index range of the nonlinearity."""
        return self.nonlinearity.window

    @property
    def max_order(self) -> int:
        """Truncation order of the jets."""
        return self.nonlinearity.jets[0].max_order

    def map_at(self, n: int, max_order: int | None = None) -> JetPoly:
        """The full jet F_n(x) = A_n x + f_n(x)."""
        order = self.max_order if max_order is None else max_order
        jet = self.nonlinearity[n].with_order(order)
        coeffs = dict(jet.coeffs)
        for exponent, value in JetPoly.linear(self.dims, self.linear.matrix(n), order).coeffs.items():
            coeffs[exponent] = value
        return JetPoly(self.dims, jet.target, order, coeffs)

    def blocks(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(A_s, A_c, A_u) at time n.

        The center rows may couple to the hyperbolic variables (that coupling is removed by the first center
        elimination); every other off-diagonal block must vanish, else ``SplittingError``.
        """
        d_s, d_c, _ = self.dims
        matrix = self.linear.matrix(n)
        cuts = [slice(0, d_s), slice(d_s, d_s + d_c), slice(d_s + d_c, None)]
        coupling = max(
            (
                float(np.max(np.abs(matrix[row, col]), initial=0.0))
                for i, row in enumerate(cuts)
                for j, col in enumerate(cuts)
                if i != j and i != 1
            ),
            default=0.0,
        )
        if coupling > 1e-12 * max(1.0, float(np.max(np.abs(matrix)))):
            raise SplittingError(f"A_{n} couples the split coordinates outside the center rows.", n)
        return matrix[cuts[0], cuts[0]], matrix[cuts[1], cuts[1]], matrix[cuts[2], cuts[2]]

    def with_nonlinearity(self, nonlinearity: TimeJetSeq) -> "NonlinearSystem":
        """Same linear part and metadata with new jets."""
        return replace(self, nonlinearity=nonlinearity, smallness=None, deriv_bound=None)

    def with_spectrum(self, spectrum: "SpectrumResult") -> "NonlinearSystem":
        """Attach a computed spectrum."""
        return replace(self, spectrum=spectrum)


def nonlinearity_from_records(
    records: Sequence[Mapping[str, Any]], dims: tuple[int, int, int], window: int, max_order: int
) -> TimeJetSeq:
    """Time sequence of jets from ``{"alpha", "beta", "coeff"}`` records.

    A record may carry ``"modulation": m``, in which case its coefficient at time n is multiplied by (1 + m cos n).
    """
    target = sum(dims)

    def build(n: int) -> JetPoly:
        coeffs: dict[tuple[int, ...], np.ndarray] = {}
        for record in records:
            exponent = join_exponent(dims, record["alpha"], record["beta"])
            factor = 1.0 + float(record.get("modulation", 0.0)) * math.cos(n)
            coeffs[exponent] = coeffs.get(exponent, 0.0) + factor * np.asarray(record["coeff"], dtype=float)
        return JetPoly(dims, target, max_order, coeffs)

    return TimeJetSeq.from_function((-window, window), build)


def random_nonlinearity(
    dims: tuple[int, int, int],
    window: int,
    degrees: Sequence[int] = (2, 3),
    scale: float = 0.05,
    seed: int = 0,
    modulation: float = 0.1,
) -> TimeJetSeq:
    """Seed-fixed nonautonomous nonlinearity with every monomial of the given degrees present.

    Each coefficient is a fixed draw c in [-scale, scale] times (1 + modulation cos(n + phase)), with a phase drawn per
    coefficient, so the family is bounded uniformly in n.
    """
    nvars = sum(dims)
    rng = np.random.default_rng(seed)
    exponents = [e for degree in degrees for e in graded_exponents(nvars, degree)]
    base = rng.uniform(-scale, scale, size=(len(exponents), nvars))
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(len(exponents), nvars))
    max_order = max(degrees)

    def build(n: int) -> JetPoly:
        values = base * (1.0 + modulation * np.cos(n + phases))
        return JetPoly(dims, nvars, max_order, dict(zip(exponents, values)))

    return TimeJetSeq.from_function((-window, window), build)
