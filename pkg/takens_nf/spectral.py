"""Exponential dichotomy tests and the dichotomy spectrum of a cocycle.

A scaled cocycle (A_n / gamma) is classified on a finite window by two measurements:

* the smallest singular value of the finite section (x_n) -> (x_{n+1} - A_n x_n / gamma) at widths W and 2W;
* growth rates of the cocycle along orthonormal flags, computed by repeated QR factorisation over [0, 2W] and
  [-2W, 0], together with the angle between the stable subspace seen from the future and the unstable subspace
  seen from the past.

The scaled cocycle is dichotomic when both margins survive the doubled window, no growth rate sits within the
threshold of log(gamma), the stable and unstable counts add up to d and the two subspaces are transversal.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np
from scipy import linalg

from takens_nf.cocycle import CocycleSpec, TrichotomyData, verify_trichotomy
from takens_nf.exceptions import (
    ArityError,
    IntervalOverlapError,
    SpectrumInconsistencyError,
    SplittingError,
    WindowTooSmallError,
)

_logger = logging.getLogger(__name__)

Interval = tuple[float, float]
DEFAULT_THRESHOLD = 1e-4
MARGIN_RATIO = 0.5
REFINE_PRECISION = 1e-3
MAX_REFINE_STEPS = 60


@dataclass(frozen=True)
class DichotomyVerdict:
    """Classification of a single gamma.

    A gamma is dichotomic when four checks pass. First, the free-boundary finite sections of widths W and 2W have
    margins above the threshold, and the 2W margin keeps at least half of the W margin. A zero left boundary is not
    used: it only recognises all-stable cocycles. Second, no forward or backward growth rate lies within the
    threshold of log(gamma). Third, the rates below and above log(gamma) account for all d directions. Fourth, the
    stable and unstable frames at time 0 are transversal.

    Attributes:
        gamma (float): The scaling.
        has_dichotomy (bool): Whether (A_n / gamma) admits an exponential dichotomy on the tested windows.
        margin (float): Smallest singular value of the finite section at width W.
        margin_double (float): The same at width 2W.
        rank (int | None): Dimension of the stable subspace, when dichotomic.
        rate_gap (float): Distance in log scale from log(gamma) to the nearest growth rate.
        transversality (float): Smallest singular value of the joined stable and unstable frames.
    """

    gamma: float
    has_dichotomy: bool
    margin: float
    margin_double: float
    rank: int | None
    rate_gap: float
    transversality: float

    def row(self) -> dict[str, Any]:
        """CSV row for the gamma sweep."""
        return {
            "gamma": self.gamma,
            "sigma_min_w": self.margin,
            "sigma_min_2w": self.margin_double,
            "verdict": "dichotomy" if self.has_dichotomy else "resonant",
            "rank": "" if self.rank is None else self.rank,
        }


@dataclass(frozen=True)
class SpectrumResult:
    """Dichotomy spectrum as sorted disjoint intervals with the center interval singled out.

    Attributes:
        hyperbolic_intervals (tuple[Interval, ...]): Intervals not containing 1, sorted.
        center_interval (Interval | None): The interval containing 1, or None when 1 is in the resolvent set.
        samples (tuple[DichotomyVerdict, ...]): The gamma grid with its verdicts.
        multiplicities (tuple[int, ...] | None): Dimension carried by each hyperbolic interval, when known.
        center_multiplicity (int | None): Dimension carried by the center interval, when known.
        diagnostics (dict): Window, threshold, nearest interval to 1 and similar run information.
    """

    hyperbolic_intervals: tuple[Interval, ...]
    center_interval: Interval | None
    samples: tuple[DichotomyVerdict, ...] = ()
    multiplicities: tuple[int, ...] | None = None
    center_multiplicity: int | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        hyperbolic = tuple(sorted((float(lo), float(hi)) for lo, hi in self.hyperbolic_intervals))
        object.__setattr__(self, "hyperbolic_intervals", hyperbolic)
        if self.center_interval is not None:
            center = (float(self.center_interval[0]), float(self.center_interval[1]))
            object.__setattr__(self, "center_interval", center)
            if not center[0] <= 1.0 <= center[1]:
                raise SpectrumInconsistencyError(f"Center interval {center} does not contain 1.", center)
        for lo, hi in hyperbolic:
            if not 0 < lo <= hi:
                raise SpectrumInconsistencyError(f"Interval [{lo}, {hi}] is not a positive interval.", (lo, hi))
            if lo <= 1.0 <= hi:
                raise SpectrumInconsistencyError(f"Hyperbolic interval [{lo}, {hi}] contains 1.", (lo, hi))
        ordered = self.intervals
        for left, right in zip(ordered, ordered[1:]):
            if left[1] >= right[0]:
                raise IntervalOverlapError(f"Intervals {left} and {right} overlap.", (left, right))
        if self.multiplicities is not None and len(self.multiplicities) != len(hyperbolic):
            raise ArityError("One multiplicity per hyperbolic interval is required.")

    @classmethod
    def from_intervals(cls, intervals: Iterable[Iterable[float]], center: Iterable[float] | None) -> "SpectrumResult":
        """Spectrum given directly as hyperbolic intervals plus an optional center interval."""
        hyperbolic = tuple(tuple(float(x) for x in interval) for interval in intervals)
        return cls(hyperbolic, None if center is None else tuple(float(x) for x in center))

    @property
    def intervals(self) -> tuple[Interval, ...]:
        """All intervals, center included, sorted."""
        everything = list(self.hyperbolic_intervals)
        if self.center_interval is not None:
            everything.append(self.center_interval)
        return tuple(sorted(everything))

    @property
    def r(self) -> int:
        """Number of hyperbolic intervals."""
        return len(self.hyperbolic_intervals)

    @property
    def ell(self) -> int:
        """Number of hyperbolic intervals below the center (below 1 when there is no center)."""
        return sum(1 for _, hi in self.hyperbolic_intervals if hi < 1.0)

    @property
    def center_or_unit(self) -> Interval:
        """The center interval, or the degenerate {1} for purely hyperbolic spectra."""
        return self.center_interval if self.center_interval is not None else (1.0, 1.0)

    @property
    def is_hyperbolic(self) -> bool:
        """True when 1 lies in the resolvent set."""
        return self.center_interval is None

    def to_dict(self) -> dict[str, Any]:
        """JSON-friendly representation."""
        return {
            "intervals": [list(interval) for interval in self.intervals],
            "hyperbolic_intervals": [list(interval) for interval in self.hyperbolic_intervals],
            "center_interval": None if self.center_interval is None else list(self.center_interval),
            "ell": self.ell,
            "status": "hyperbolic, no center" if self.is_hyperbolic else "center",
            "multiplicities": None if self.multiplicities is None else list(self.multiplicities),
            "diagnostics": self.diagnostics,
        }


def _generic_frame(dim: int) -> np.ndarray:
    # Fixed orthonormal start so that flags sort by growth without depending on coordinates.
    return np.linalg.qr(np.random.default_rng(0).standard_normal((dim, dim)))[0]


def flag_iteration(factors: Iterable[np.ndarray], dim: int) -> tuple[list[np.ndarray], np.ndarray]:
    """Propagate an orthonormal frame through a product by repeated QR factorisation.

    Args:
        factors (Iterable[np.ndarray]): Matrices in the order they are applied.
        dim (int): Dimension of the frame.

    Returns:
        (tuple[list[np.ndarray], np.ndarray]): Frames after each step (the start included) and the cumulative
        log growth along each frame column, shape (steps + 1, dim).
    """
    frame = _generic_frame(dim)
    frames = [frame]
    logs = [np.zeros(dim)]
    for factor in factors:
        frame, upper = np.linalg.qr(factor @ frame)
        diagonal = np.diag(upper)
        signs = np.where(diagonal < 0, -1.0, 1.0)
        frame = frame * signs
        logs.append(logs[-1] + np.log(np.abs(diagonal)))
        frames.append(frame)
    return frames, np.array(logs)


@dataclass(frozen=True)
class GrowthProfile:
    """Gamma-independent growth data of a cocycle around time 0.

    Attributes:
        window (int): The window W; data is collected over [-2W, 2W].
        forward_rates (np.ndarray): Per-step log growth rates seen from [0, 2W], aligned with ``stable_frame``
            columns (most contracting first).
        backward_rates (np.ndarray): Per-step log growth rates seen from [-2W, 0], aligned with ``unstable_frame``
            columns (most expanding first).
        stable_frame (np.ndarray): Orthonormal frame at time 0, most contracting directions first.
        unstable_frame (np.ndarray): Orthonormal frame at time 0, most expanding directions first.
    """

    window: int
    forward_rates: np.ndarray
    backward_rates: np.ndarray
    stable_frame: np.ndarray
    unstable_frame: np.ndarray


def growth_profile(spec: CocycleSpec, window: int) -> GrowthProfile:
    """Collect growth rates and flags of ``spec`` on [-2 window, 2 window]."""
    if window < 4:
        raise WindowTooSmallError(f"Dichotomy window must be at least 4, got {window}.")
    if 2 * window > spec.window:
        raise WindowTooSmallError(f"Doubled window {2 * window} does not fit the cocycle window {spec.window}.")
    # inverse products from the future: leading columns contract fastest under the forward cocycle
    future_frames, future_logs = flag_iteration((spec.inverse(n) for n in range(2 * window - 1, -1, -1)), spec.dim)
    past_frames, past_logs = flag_iteration((spec.matrix(n) for n in range(-2 * window, 0)), spec.dim)
    forward_rates = -(future_logs[-1] - future_logs[window]) / window
    backward_rates = (past_logs[-1] - past_logs[window]) / window
    return GrowthProfile(window, forward_rates, backward_rates, future_frames[-1], past_frames[-1])


def _section_margin(spec: CocycleSpec, gamma: float, half_width: int) -> float:
    """Smallest singular value of the free-boundary finite section on [-half_width, half_width]."""
    dim = spec.dim
    rows = 2 * half_width
    size = rows * dim
    gram = np.zeros((size, size))
    for k in range(rows):
        scaled = spec.matrix(-half_width + k) / gamma
        block = slice(k * dim, (k + 1) * dim)
        gram[block, block] = np.eye(dim) + scaled @ scaled.T
        if k > 0:
            previous = slice((k - 1) * dim, k * dim)
            # row k is x_{k+1} - B_k x_k; rows k and k-1 share the column of x_k
            gram[block, previous] = -scaled
            gram[previous, block] = -scaled.T
    smallest = linalg.eigvalsh(gram, subset_by_index=[0, 0])[0]
    return math.sqrt(max(float(smallest), 0.0))


def dichotomy_test(
    spec: CocycleSpec,
    gamma: float,
    window: int | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    profile: GrowthProfile | None = None,
) -> DichotomyVerdict:
    """Decide whether (A_n / gamma) admits an exponential dichotomy.

    Args:
        spec (CocycleSpec): The cocycle.
        gamma (float): Positive scaling.
        window (int | None): Window W, at most half the cocycle window. Defaults to ``spec.window // 2``.
        threshold (float): Minimal margin, minimal distance of log(gamma) to a growth rate and minimal angle.
        profile (GrowthProfile | None): Precomputed growth data for ``window``.

    Returns:
        (DichotomyVerdict): The verdict with its margins.
    """
    if gamma <= 0:
        raise ArityError(f"gamma must be positive, got {gamma}.", gamma)
    window = spec.window // 2 if window is None else window
    if profile is None or profile.window != window:
        profile = growth_profile(spec, window)
    margin = _section_margin(spec, gamma, window // 2)
    margin_double = _section_margin(spec, gamma, window)
    log_gamma = math.log(gamma)
    stable_count = int(np.sum(profile.forward_rates < log_gamma))
    unstable_count = int(np.sum(profile.backward_rates > log_gamma))
    rate_gap = float(
        min(np.min(np.abs(profile.forward_rates - log_gamma)), np.min(np.abs(profile.backward_rates - log_gamma)))
    )
    joined = np.hstack([profile.stable_frame[:, :stable_count], profile.unstable_frame[:, :unstable_count]])
    transversality = float(np.linalg.svd(joined, compute_uv=False).min()) if joined.shape[1] else 1.0
    margins_ok = margin > threshold and margin_double > threshold and margin_double >= MARGIN_RATIO * margin
    has_dichotomy = (
        margins_ok
        and stable_count + unstable_count == spec.dim
        and rate_gap > threshold
        and transversality > threshold
    )
    verdict = DichotomyVerdict(
        gamma=gamma,
        has_dichotomy=has_dichotomy,
        margin=margin,
        margin_double=margin_double,
        rank=stable_count if has_dichotomy else None,
        rate_gap=rate_gap,
        transversality=transversality,
    )
    _logger.debug("gamma=%.6g dichotomy=%s margin=%.3g rank=%s", gamma, has_dichotomy, margin, verdict.rank)
    return verdict


class _Classifier:
    """Dichotomy tests sharing one growth profile."""

    def __init__(self, spec: CocycleSpec, window: int, threshold: float, precision: float = REFINE_PRECISION):
        self.spec = spec
        self.window = window
        self.threshold = threshold
        self.precision = precision
        self.profile = growth_profile(spec, window)

    def __call__(self, gamma: float) -> DichotomyVerdict:
        return dichotomy_test(self.spec, gamma, self.window, self.threshold, self.profile)

    def refine(self, dichotomic: DichotomyVerdict, resonant: DichotomyVerdict, iterations: int) -> float:
        """Bisect in log scale between a dichotomic and a resonant gamma; returns the boundary estimate.

        Runs at least ``iterations`` steps and continues until the bracket is narrower than ``precision`` in log scale.
        """
        outside, inside = dichotomic.gamma, resonant.gamma
        steps = 0
        while steps < MAX_REFINE_STEPS and (steps < iterations or abs(math.log(outside / inside)) > self.precision):
            steps += 1
            middle = math.sqrt(outside * inside)
            if self(middle).has_dichotomy:
                outside = middle
            else:
                inside = middle
        return math.sqrt(outside * inside)

    def locate_jumps(
        self, low: DichotomyVerdict, high: DichotomyVerdict, depth: int
    ) -> list[tuple[float, float, int]]:
        """Find spectral intervals hidden between two dichotomic gammas of different rank."""
        if depth == 0:
            return [(low.gamma, high.gamma, high.rank - low.rank)]
        middle = self(math.sqrt(low.gamma * high.gamma))
        if not middle.has_dichotomy:
            return [(self.refine(low, middle, depth), self.refine(high, middle, depth), high.rank - low.rank)]
        found = []
        if middle.rank > low.rank:
            found += self.locate_jumps(low, middle, depth - 1)
        if high.rank > middle.rank:
            found += self.locate_jumps(middle, high, depth - 1)
        return found


def compute_spectrum(
    spec: CocycleSpec,
    gamma_lo: float | None = None,
    gamma_hi: float | None = None,
    samples: int = 64,
    refine_iters: int = 10,
    window: int | None = None,
    threshold: float = DEFAULT_THRESHOLD,
    workers: int | None = None,
    precision: float = REFINE_PRECISION,
) -> SpectrumResult:
    """Compute the dichotomy spectrum of ``spec`` on a log-uniform gamma grid.

    Contiguous resonant samples merge into one interval whose endpoints are refined by bisection. A change of
    stable rank between two adjacent dichotomic samples signals an interval thinner than the grid step; it is
    located by recursive bisection and reported as a (nearly) degenerate interval.

    Args:
        spec (CocycleSpec): The cocycle.
        gamma_lo (float | None): Lower end of the grid. Defaults to half the reciprocal inverse bound.
        gamma_hi (float | None): Upper end of the grid. Defaults to twice the norm bound.
        samples (int): Number of grid points, at least 16.
        refine_iters (int): Minimal number of bisection steps per endpoint.
        window (int | None): Dichotomy window W. Defaults to ``spec.window // 2``.
        threshold (float): Dichotomy threshold.
        workers (int | None): Threads for the grid classification.
        precision (float): Log-scale width of the bracket at which an endpoint counts as refined.

    Returns:
        (SpectrumResult): The spectrum.
    """
    gamma_lo = 0.5 / spec.bounds[1] if gamma_lo is None else gamma_lo
    gamma_hi = 2.0 * spec.bounds[0] if gamma_hi is None else gamma_hi
    if not 0 < gamma_lo < gamma_hi:
        raise ArityError(f"Expected 0 < gamma_lo < gamma_hi, got {gamma_lo}, {gamma_hi}.")
    if samples < 16:
        raise ArityError(f"At least 16 samples are required, got {samples}.", samples)
    window = spec.window // 2 if window is None else window
    if precision <= 0:
        raise ArityError(f"precision must be positive, got {precision}.", precision)
    classify = _Classifier(spec, window, threshold, precision)
    grid = np.exp(np.linspace(math.log(gamma_lo), math.log(gamma_hi), samples))
    with ThreadPoolExecutor(max_workers=workers) as executor:
        verdicts = list(
            executor.map(lambda gamma: dichotomy_test(spec, float(gamma), window, threshold, classify.profile), grid)
        )
    if not any(verdict.has_dichotomy for verdict in verdicts):
        raise SpectrumInconsistencyError(
            f"No gamma in [{gamma_lo:.4g}, {gamma_hi:.4g}] is dichotomic; the grid does not bracket the spectrum."
        )
    found: list[tuple[float, float, int]] = []
    k = 0
    while k < samples:
        verdict = verdicts[k]
        if verdict.has_dichotomy:
            if k + 1 < samples and verdicts[k + 1].has_dichotomy and verdicts[k + 1].rank != verdict.rank:
                found += classify.locate_jumps(verdict, verdicts[k + 1], refine_iters)
            k += 1
            continue
        end = k
        while end + 1 < samples and not verdicts[end + 1].has_dichotomy:
            end += 1
        before = verdicts[k - 1] if k > 0 else None
        after = verdicts[end + 1] if end + 1 < samples else None
        if before is None or after is None:
            _logger.warning("Resonant samples reach the end of the gamma grid; widen [gamma_lo, gamma_hi].")
        lower = verdicts[k].gamma if before is None else classify.refine(before, verdicts[k], refine_iters)
        upper = verdicts[end].gamma if after is None else classify.refine(after, verdicts[end], refine_iters)
        rank_below = 0 if before is None else before.rank
        rank_above = spec.dim if after is None else after.rank
        found.append((lower, upper, rank_above - rank_below))
        k = end + 1
    found.sort()
    if len(found) > spec.dim:
        raise SpectrumInconsistencyError(
            f"Detected {len(found)} spectral intervals for a {spec.dim}-dimensional cocycle; lower the threshold or "
            "enlarge the window.",
            found,
        )
    unit = dichotomy_test(spec, 1.0, window, threshold, classify.profile)
    diagnostics: dict[str, Any] = {
        "window": window,
        "threshold": threshold,
        "samples": samples,
        "precision": precision,
    }
    center, center_multiplicity = None, None
    hyperbolic = [(lo, hi) for lo, hi, _ in found]
    multiplicities = [count for _, _, count in found]
    if unit.has_dichotomy:
        if found:
            nearest = min(found, key=lambda item: min(abs(math.log(item[0])), abs(math.log(item[1]))))
            diagnostics["nearest_interval"] = [nearest[0], nearest[1]]
        _logger.info("1 lies in the resolvent set; reporting a hyperbolic spectrum without center")
    else:
        containing = [k for k, (lo, hi, _) in enumerate(found) if lo <= 1.0 <= hi]
        if containing:
            index = containing[0]
        else:
            index = min(
                range(len(found)), key=lambda j: min(abs(math.log(found[j][0])), abs(math.log(found[j][1])))
            )
            _logger.warning("No interval contains the resonant value 1; extending the nearest interval")
        lo, hi, center_multiplicity = found[index]
        center = (min(lo, 1.0), max(hi, 1.0))
        del hyperbolic[index], multiplicities[index]
    result = SpectrumResult(
        tuple(hyperbolic),
        center,
        samples=tuple(verdicts),
        multiplicities=tuple(multiplicities),
        center_multiplicity=center_multiplicity,
        diagnostics=diagnostics,
    )
    _logger.info("Spectrum of %s: %s", spec.name, [list(interval) for interval in result.intervals])
    return result


def sweep_rows(result: SpectrumResult) -> list[dict[str, Any]]:
    """Rows of the gamma sweep, sorted by gamma."""
    return [verdict.row() for verdict in sorted(result.samples, key=lambda verdict: verdict.gamma)]


def inflate_spectrum(spectrum: SpectrumResult, varsigma: float) -> SpectrumResult:
    """Replace every interval [a, b], the center included, by [a - varsigma, b + varsigma]."""
    if varsigma < 0:
        raise ArityError(f"varsigma must be non-negative, got {varsigma}.", varsigma)
    if varsigma == 0:
        return spectrum
    ordered = spectrum.intervals
    for left, right in zip(ordered, ordered[1:]):
        if left[1] + varsigma >= right[0] - varsigma:
            raise IntervalOverlapError(
                f"Inflating by {varsigma} merges {list(left)} and {list(right)}.", (left, right)
            )
    if ordered and ordered[0][0] - varsigma <= 0:
        raise IntervalOverlapError(f"Inflating by {varsigma} reaches zero.", ordered[0])
    center = spectrum.center_interval
    return SpectrumResult(
        tuple((lo - varsigma, hi + varsigma) for lo, hi in spectrum.hyperbolic_intervals),
        None if center is None else (center[0] - varsigma, center[1] + varsigma),
        samples=spectrum.samples,
        multiplicities=spectrum.multiplicities,
        center_multiplicity=spectrum.center_multiplicity,
        diagnostics={**spectrum.diagnostics, "varsigma": varsigma},
    )


def _split_gammas(spectrum: SpectrumResult) -> tuple[float, float]:
    stable = [interval for interval in spectrum.hyperbolic_intervals if interval[1] < 1.0]
    unstable = [interval for interval in spectrum.hyperbolic_intervals if interval[0] > 1.0]
    nu_lo, nu_hi = spectrum.center_or_unit
    below = stable[-1][1] if stable else nu_lo / 4.0
    above = unstable[0][0] if unstable else nu_hi * 4.0
    if spectrum.is_hyperbolic:
        middle = math.sqrt(below * above)
        return middle, middle
    return math.sqrt(below * nu_lo), math.sqrt(nu_hi * above)


def trichotomy_rates(spectrum: SpectrumResult, varsigma: float) -> tuple[float, float, float, float, float, float]:
    """Rates (mu-, mu+, lambda-, lambda+, rho-, rho+) of the splitting, inflated by ``varsigma``.

    A missing stable side gets mu = lambda- / 2 and a missing unstable side rho = 2 lambda+.
    """
    stable = [interval for interval in spectrum.hyperbolic_intervals if interval[1] < 1.0]
    unstable = [interval for interval in spectrum.hyperbolic_intervals if interval[0] > 1.0]
    lambda_minus, lambda_plus = spectrum.center_or_unit
    lambda_minus, lambda_plus = lambda_minus - varsigma, lambda_plus + varsigma
    if stable:
        mu_minus, mu_plus = stable[0][0] - varsigma, stable[-1][1] + varsigma
    else:
        mu_minus = mu_plus = lambda_minus / 2.0
    if unstable:
        rho_minus, rho_plus = unstable[0][0] - varsigma, unstable[-1][1] + varsigma
    else:
        rho_minus = rho_plus = lambda_plus * 2.0
    return mu_minus, mu_plus, lambda_minus, lambda_plus, rho_minus, rho_plus


def extract_splitting(
    spec: CocycleSpec,
    spectrum: SpectrumResult,
    threshold: float = DEFAULT_THRESHOLD,
    varsigma: float = 1e-6,
) -> TrichotomyData:
    """Build the stable, center and unstable projections of ``spec`` on the inner half of its window.

    A gamma is placed in each gap next to the center (or in the single gap around 1 for hyperbolic spectra).
    Stable flags come from inverse products over the future of each time, unstable flags from forward products
    over its past, so every subspace is carried along by the cocycle and the projections are equivariant. The
    center subspace is the intersection of the two intermediate flags. Flags are iterated over the whole window
    and kept only where they had W steps on both sides to converge.

    Args:
        spec (CocycleSpec): The cocycle.
        spectrum (SpectrumResult): Its spectrum, with at least one gap.
        threshold (float): Dichotomy threshold used to confirm the chosen gammas.
        varsigma (float): Inflation applied to the interval endpoints that become the rates.

    Returns:
        (TrichotomyData): Projections on [-W, W], W = spec.window // 2, with rates and the observed constant.
    """
    if not spectrum.hyperbolic_intervals and spectrum.center_interval is not None:
        raise SplittingError("The spectrum has no gap around the center interval.")
    window = spec.window // 2
    gamma_low, gamma_high = _split_gammas(spectrum)
    verdicts = [dichotomy_test(spec, gamma, window, threshold) for gamma in (gamma_low, gamma_high)]
    for verdict in verdicts:
        if not verdict.has_dichotomy:
            raise SplittingError(
                f"Gap at gamma={verdict.gamma:.6g} is too narrow for a reliable splitting (margin "
                f"{verdict.margin:.3g}).",
                verdict.gamma,
            )
    dim = spec.dim
    d_s = verdicts[0].rank
    d_cs = verdicts[1].rank
    d_u = dim - d_cs
    low, high = -spec.window, spec.window
    future_frames, _ = flag_iteration((spec.inverse(n) for n in range(high - 1, low - 1, -1)), dim)
    past_frames, _ = flag_iteration((spec.matrix(n) for n in range(low, high)), dim)
    future_frames = future_frames[::-1]
    # flags near the window ends have not converged; keep times with at least `window` steps on each side
    projections = np.empty((2 * window + 1, 3, dim, dim))
    for k, n in enumerate(range(-window, window + 1)):
        stable_side, unstable_side = future_frames[n - low], past_frames[n - low]
        stable = stable_side[:, :d_s]
        unstable = unstable_side[:, :d_u]
        # center = (stable + center) meets (center + unstable)
        kernel = linalg.null_space(np.hstack([stable_side[:, :d_cs], -unstable_side[:, : dim - d_s]]))
        center = stable_side[:, :d_cs] @ kernel[:d_cs] if kernel.size else np.zeros((dim, 0))
        if center.shape[1] != d_cs - d_s:
            raise SplittingError(
                f"Center subspace at n={n} has dimension {center.shape[1]}, expected {d_cs - d_s}.", n
            )
        basis = np.hstack([stable, center, unstable])
        inverse = np.linalg.inv(basis)
        sizes = (d_s, d_cs - d_s, d_u)
        offset = 0
        for slot, size in enumerate(sizes):
            projections[k, slot] = basis[:, offset : offset + size] @ inverse[offset : offset + size]
            offset += size
    rates = trichotomy_rates(spectrum, varsigma)
    trial = TrichotomyData(-window, projections, 1.0, rates)
    report = verify_trichotomy(spec, trial)
    data = TrichotomyData(-window, projections, max(1.0, report.K_obs), rates)
    _logger.info("Extracted splitting with ranks (%s, %s, %s) and K=%.4g", d_s, d_cs - d_s, d_u, data.K)
    return data
