"""Interval products over spectral intervals, non-resonance conditions and spectral gap conditions."""
import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from takens_nf.exceptions import ArityError, EnumerationBudgetError
from takens_nf.jets import graded_exponents
from takens_nf.spectral import Interval, SpectrumResult, inflate_spectrum

_logger = logging.getLogger(__name__)

ENUMERATION_BUDGET = 10**7
CENTER_CONDITION = "center"
HYPERBOLIC_CONDITION = "hyperbolic"


@dataclass(frozen=True)
class MultiIndex:
    """A multi-index q = (q_1, ..., q_r) of nonnegative integers."""

    entries: tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(q) for q in self.entries)
        if any(q < 0 for q in entries):
            raise ArityError(f"Multi-index entries must be nonnegative, got {entries}.", entries)
        object.__setattr__(self, "entries", entries)

    @property
    def order(self) -> int:
        """|q| = q_1 + ... + q_r."""
        return sum(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def enumerate_multi_indices(r: int, lo: int, hi: int) -> Iterator[MultiIndex]:
    """Yield every q with lo <= |q| <= hi exactly once, in graded lexicographic order."""
    if r < 0 or not 0 <= lo <= hi:
        raise ArityError(f"Expected r >= 0 and 0 <= lo <= hi, got r={r}, lo={lo}, hi={hi}.")
    for order in range(lo, hi + 1):
        for exponent in graded_exponents(r, order):
            yield MultiIndex(exponent)


def count_multi_indices(r: int, lo: int, hi: int) -> int:
    """Number of multi-indices yielded by ``enumerate_multi_indices``."""
    if r == 0:
        return 1 if lo == 0 else 0
    return sum(math.comb(order + r - 1, r - 1) for order in range(lo, hi + 1))


def interval_power_product(spectrum: SpectrumResult, q: MultiIndex | Sequence[int], center_power: int) -> Interval:
    """[prod a_i^{q_i} nu_-^{center_power}, prod b_i^{q_i} nu_+^{center_power}], computed in log space.

    A purely hyperbolic spectrum uses the degenerate center {1}.
    """
    q = q if isinstance(q, MultiIndex) else MultiIndex(tuple(q))
    if len(q) != spectrum.r:
        raise ArityError(f"Multi-index {q.entries} does not match {spectrum.r} hyperbolic intervals.", q.entries)
    if center_power < 0:
        raise ArityError(f"center_power must be nonnegative, got {center_power}.", center_power)
    nu_lo, nu_hi = spectrum.center_or_unit
    log_lo = center_power * math.log(nu_lo)
    log_hi = center_power * math.log(nu_hi)
    for power, (lo, hi) in zip(q, spectrum.hyperbolic_intervals):
        if power:
            log_lo += power * math.log(lo)
            log_hi += power * math.log(hi)
    return math.exp(log_lo), math.exp(log_hi)


def log_separation(product: Interval, target: Interval) -> tuple[float, str | None]:
    """Signed log distance between two intervals and the side on which ``product`` lies.

    Returns:
        (tuple[float, str | None]): A positive margin with ``"above"`` or ``"below"`` when the intervals are
        disjoint; otherwise the non-positive negated log-width of the overlap and None. Shared endpoints count as
        overlap.
    """
    if product[1] < target[0]:
        return math.log(target[0] / product[1]), "below"
    if product[0] > target[1]:
        return math.log(product[0] / target[1]), "above"
    return -math.log(min(product[1], target[1]) / max(product[0], target[0])), None


@dataclass(frozen=True)
class ResonanceWitness:
    """A multi-index whose interval product meets a target interval."""

    condition: str
    q: tuple[int, ...]
    target: int | None
    target_interval: Interval
    product: Interval
    margin: float

    def to_dict(self) -> dict:
        """JSON-friendly representation."""
        return {
            "condition": self.condition,
            "q": list(self.q),
            "target": "center" if self.target is None else self.target,
            "target_interval": list(self.target_interval),
            "product": list(self.product),
            "overlap_margin": self.margin,
        }


@dataclass(frozen=True)
class GapReport:
    """Spectral gap conditions b_l < nu_-^N and nu_+^N < a_{l+1}, with log margins.

    Margins are positive when a condition holds and infinite when it holds vacuously.
    """

    N: int
    left_margin: float
    right_margin: float
    suspension_margins: tuple[float, float] | None = None
    vacuous: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        """All evaluated conditions hold."""
        margins = [self.left_margin, self.right_margin, *(self.suspension_margins or ())]
        return all(margin > 0 for margin in margins)

    def to_dict(self) -> dict:
        """JSON-friendly representation."""
        return {
            "N": self.N,
            "pass": self.passed,
            "left_margin": _finite_or_none(self.left_margin),
            "right_margin": _finite_or_none(self.right_margin),
            "suspension_margins": None
            if self.suspension_margins is None
            else [_finite_or_none(margin) for margin in self.suspension_margins],
            "vacuous": list(self.vacuous),
        }


def _finite_or_none(value: float) -> float | None:
    return value if math.isfinite(value) else None


@dataclass(frozen=True)
class NonResonanceReport:
    """Outcome of ``check_non_resonance``.

    Attributes:
        N (int): Order bound.
        nr1_pass (bool): No center resonance up to order N.
        nr2_pass (bool): No hyperbolic resonance for orders 2..N.
        violations (tuple[ResonanceWitness, ...]): Every witness found.
        gap (GapReport): The spectral gap conditions at order N.
        branches (dict): (condition, q, target) -> "above" or "below" for every passing index.
        varsigma (float): Inflation applied before checking.
    """

    N: int
    nr1_pass: bool
    nr2_pass: bool
    violations: tuple[ResonanceWitness, ...]
    gap: GapReport
    branches: dict[tuple[str, tuple[int, ...], int | None], str] = field(default_factory=dict)
    varsigma: float = 0.0

    @property
    def gap_pass(self) -> bool:
        """Spectral gap conditions hold."""
        return self.gap.passed

    @property
    def passed(self) -> bool:
        """Both non-resonance conditions hold."""
        return self.nr1_pass and self.nr2_pass

    def witnesses(self, condition: str | None = None) -> set[tuple[str, tuple[int, ...], int | None]]:
        """Witness keys, optionally filtered by condition."""
        return {
            (witness.condition, witness.q, witness.target)
            for witness in self.violations
            if condition is None or witness.condition == condition
        }

    def to_dict(self) -> dict:
        """JSON-friendly representation."""
        return {
            "N": self.N,
            "varsigma": self.varsigma,
            "nr1_pass": self.nr1_pass,
            "nr2_pass": self.nr2_pass,
            "gap_pass": self.gap_pass,
            "gap": self.gap.to_dict(),
            "violations": [witness.to_dict() for witness in self.violations],
        }


def check_non_resonance(
    spectrum: SpectrumResult, N: int, varsigma: float = 1e-6, budget: int = ENUMERATION_BUDGET
) -> NonResonanceReport:
    """Check the center and hyperbolic non-resonance conditions up to order N.

    After inflating every interval by ``varsigma``, the center condition requires that [a, b]^q [nu]^N misses
    the center interval for 1 <= |q| <= N, and the hyperbolic condition that [a, b]^t [nu]^N misses every
    hyperbolic interval for 2 <= |t| <= N. Shared endpoints are violations.

    Args:
        spectrum (SpectrumResult): The spectrum.
        N (int): Order bound, at least 2.
        varsigma (float): Inflation of the intervals.
        budget (int): Maximal number of multi-indices to enumerate.

    Returns:
        (NonResonanceReport): Pass flags, witnesses and the side of every passing product.
    """
    if N < 2:
        raise ArityError(f"The order bound N must be at least 2, got {N}.", N)
    r = spectrum.r
    total = count_multi_indices(r, 1, N)
    if total > budget:
        raise EnumerationBudgetError(f"{total} multi-indices exceed the enumeration budget {budget}.", total)
    inflated = inflate_spectrum(spectrum, varsigma)
    violations: list[ResonanceWitness] = []
    branches: dict[tuple[str, tuple[int, ...], int | None], str] = {}
    targets: list[tuple[str, int | None, Interval, int]] = []
    if inflated.center_interval is not None:
        targets.append((CENTER_CONDITION, None, inflated.center_interval, 1))
    else:
        _logger.info("No center interval; the center resonance condition holds vacuously")
    targets += [(HYPERBOLIC_CONDITION, j, interval, 2) for j, interval in enumerate(inflated.hyperbolic_intervals)]
    for q in enumerate_multi_indices(r, 1, N):
        product = interval_power_product(inflated, q, N)
        for condition, target, interval, lowest in targets:
            if q.order < lowest:
                continue
            margin, side = log_separation(product, interval)
            if side is None:
                violations.append(ResonanceWitness(condition, q.entries, target, interval, product, margin))
            else:
                branches[(condition, q.entries, target)] = side
    nr1_pass = not any(witness.condition == CENTER_CONDITION for witness in violations)
    nr2_pass = not any(witness.condition == HYPERBOLIC_CONDITION for witness in violations)
    report = NonResonanceReport(
        N=N,
        nr1_pass=nr1_pass,
        nr2_pass=nr2_pass,
        violations=tuple(violations),
        gap=check_gap(inflated, N),
        branches=branches,
        varsigma=varsigma,
    )
    for witness in violations[:5]:
        _logger.warning("%s resonance at q=%s against %s", witness.condition, witness.q, witness.target_interval)
    _logger.info("Non-resonance up to N=%s: center=%s hyperbolic=%s", N, nr1_pass, nr2_pass)
    return report


def check_gap(spectrum: SpectrumResult, N: int, rates: tuple[float, float] | None = None) -> GapReport:
    """Check b_l < nu_-^N and nu_+^N < a_{l+1}, and optionally the suspension gaps.

    A side without hyperbolic intervals passes vacuously, as if a dummy variable with an arbitrarily contracting
    (or expanding) rate had been added.

    Args:
        spectrum (SpectrumResult): The spectrum.
        N (int): Power of the center endpoints.
        rates (tuple[float, float] | None): (mu_1, mu_2) of a monomial split; adds nu_+^N < 1/mu_2 and
            nu_-^N > mu_1. A zero rate makes its condition vacuous.

    Returns:
        (GapReport): Log margins of each condition.
    """
    nu_lo, nu_hi = spectrum.center_or_unit
    ell = spectrum.ell
    vacuous = []
    if ell > 0:
        left = N * math.log(nu_lo) - math.log(spectrum.hyperbolic_intervals[ell - 1][1])
    else:
        left = math.inf
        vacuous.append("left")
    if ell < spectrum.r:
        right = math.log(spectrum.hyperbolic_intervals[ell][0]) - N * math.log(nu_hi)
    else:
        right = math.inf
        vacuous.append("right")
    if vacuous:
        _logger.warning("Spectral gap on the %s side holds vacuously: no hyperbolic interval there", "/".join(vacuous))
    suspension = None
    if rates is not None:
        mu_1, mu_2 = rates
        upper = math.inf if mu_2 == 0 else -math.log(mu_2) - N * math.log(nu_hi)
        lower = math.inf if mu_1 == 0 else N * math.log(nu_lo) - math.log(mu_1)
        suspension = (upper, lower)
    return GapReport(N, left, right, suspension, tuple(vacuous))


def scalar_takens_resonances(
    moduli: Sequence[float], N: int, tolerance: float = 1e-9
) -> set[tuple[str, tuple[int, ...], int | None]]:
    """Resonances |lambda^q| = 1 (1 <= |q| <= N) and |lambda^t| = |lambda_j| (2 <= |t| <= N) of point moduli.

    This is the autonomous case of the non-resonance conditions with a center at modulus 1; equality is tested in
    log scale up to ``tolerance``.
    """
    logs = [math.log(modulus) for modulus in moduli]
    found = set()
    for q in enumerate_multi_indices(len(logs), 1, N):
        value = sum(power * log for power, log in zip(q, logs))
        if abs(value) <= tolerance:
            found.add((CENTER_CONDITION, q.entries, None))
        if q.order >= 2:
            for j, log in enumerate(logs):
                if abs(value - log) <= tolerance:
                    found.add((HYPERBOLIC_CONDITION, q.entries, j))
    return found


def resonance_order(n0: int) -> int:
    """Order N = 3 N0 + 1 of the non-resonance conditions needed for a normal form of order N0."""
    if n0 < 1:
        raise ArityError(f"N0 must be positive, got {n0}.", n0)
    return 3 * n0 + 1
