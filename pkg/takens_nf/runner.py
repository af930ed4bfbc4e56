"""Command runner.

Build the cocycle and the nonlinear system described by a ``RunConfig`` and run one command on them. Every command
returns ``(status, results, diagnostics, warnings)``; ``run`` writes these into ``<command>.json`` in the output
directory, plus CSV tables when requested.

Status 0 means success and status 2 means that a hypothesis of the reduction does not hold (resonance, gap or stage
failure); usage errors are raised as ``TakensNFException`` and never produce a report.
"""
# mypy: disable-error-code="union-attr"
import logging
from typing import Any

import numpy as np

from takens_nf.base_runner import BaseRunner
from takens_nf.base_runner.base_runner import to_builtin
from takens_nf.cocycle import (
    CocycleSpec,
    NonlinearSystem,
    TrichotomyData,
    builtin_family,
    nonlinearity_from_records,
    random_nonlinearity,
    verify_trichotomy,
)
from takens_nf.exceptions import (
    DivergenceError,
    MathematicalPreconditionError,
    SplittingError,
    TakensNFException,
    WindowTooSmallError,
)
from takens_nf.jets import JetPoly, TimeJetSeq, to_records
from takens_nf.manifold import center_manifold_jets, verify_center_invariance
from takens_nf.pipeline import homotopy_series_conjugacy, takens_normal_form, taylor_split
from takens_nf.resonance import check_non_resonance, resonance_order
from takens_nf.schemas import RunConfig
from takens_nf.spectral import (
    SpectrumResult,
    compute_spectrum,
    extract_splitting,
    sweep_rows,
    trichotomy_rates,
)

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
COMMANDS = ("spectrum", "resonance", "center-manifold", "normal-form", "verify-conjugacy")

CommandResult = tuple[int, dict[str, Any], dict[str, Any], list[str]]


class _WarningCollector(logging.Handler):
    """Keep the distinct warning messages logged by the package while a command runs."""

    def __init__(self):
        super().__init__(level=logging.WARNING)
        self.messages: list[str] = []

    def emit(self, record: logging.LogRecord):
        message = record.getMessage()
        if message not in self.messages:
            self.messages.append(message)


def describe_error(error: TakensNFException) -> dict[str, Any]:
    """JSON-friendly description of a failure with its witness."""
    witness = error.witness
    if hasattr(witness, "entries"):
        witness = witness.entries
    try:
        witness = to_builtin(witness)
    except TypeError:
        witness = repr(witness)
    description = {"type": type(error).__name__, "message": str(error), "witness": witness}
    if hasattr(error, "stage"):
        description["stage"] = error.stage
    return description


class TakensRunner(BaseRunner):
    """Run the commands of the command line tool on a validated configuration.

    Attributes:
        config (RunConfig): The run configuration.
        force (bool): Compute the normal form even when the resonance or gap checks fail.
    """

    def __init__(self, config: RunConfig, force: bool = False):
        super().__init__(config)
        self.force = force
        self._cocycle: CocycleSpec | None = None
        self._spectrum: SpectrumResult | None = None

    def run(self, command: str) -> int:
        """Run ``command``, write its report and return the exit status."""
        if command not in COMMANDS:
            raise TakensNFException(f"Unknown command {command!r}. Expected one of {', '.join(COMMANDS)}.", command)
        collector = _WarningCollector()
        package_logger = logging.getLogger("takens_nf")
        package_logger.addHandler(collector)
        try:
            status, results, diagnostics, warnings = getattr(self, command.replace("-", "_"))()
        except MathematicalPreconditionError as error:
            _logger.error("%s failed: %s", command, error)
            status, results, diagnostics, warnings = EXIT_PRECONDITION, {"error": describe_error(error)}, {}, []
        finally:
            package_logger.removeHandler(collector)
        warnings = warnings + [message for message in collector.messages if message not in warnings]
        self.write_report(results, f"{command}.json", diagnostics, warnings, command)
        return status

    # builders

    def cocycle(self) -> CocycleSpec:
        """The linear cocycle, sampled on twice the configured window."""
        if self._cocycle is None:
            system = self.config.system
            window = 2 * self.config.window
            if system.linear is not None:
                self._cocycle = builtin_family("autonomous", {"matrix": system.linear}, system.seed, window)
            else:
                self._cocycle = builtin_family(system.family, system.params, system.seed, window)
        return self._cocycle

    def spectrum(self) -> CommandResult:
        """Compute the dichotomy spectrum, the gamma sweep and, when there is a gap, the trichotomy splitting."""
        spectrum = self.compute_spectrum()
        results: dict[str, Any] = {"spectrum": spectrum.to_dict()}
        warnings = []
        if spectrum.hyperbolic_intervals:
            try:
                data = extract_splitting(
                    self.cocycle(), spectrum, self.config.spectrum.threshold, self.config.tolerances.varsigma
                )
                report = verify_trichotomy(self.cocycle(), data, self.config.tolerances.tol)
                results["trichotomy"] = _trichotomy_summary(report)
            except (SplittingError, WindowTooSmallError) as error:
                warnings.append(f"No trichotomy splitting: {error}")
        if self.config.output.csv:
            self.write_csv(sweep_rows(spectrum), "spectrum_sweep.csv")
        return EXIT_OK, results, {"window": self.config.window, "cocycle": self.cocycle().name}, warnings

    def compute_spectrum(self) -> SpectrumResult:
        """The spectrum of the linear part, always computed from the cocycle."""
        if self._spectrum is None:
            settings = self.config.spectrum
            self._spectrum = compute_spectrum(
                self.cocycle(),
                settings.gamma_lo,
                settings.gamma_hi,
                samples=settings.samples,
                refine_iters=settings.refine,
                window=self.config.window,
                threshold=settings.threshold,
                workers=settings.workers,
            )
        return self._spectrum

    def resolved_spectrum(self) -> SpectrumResult:
        """The inline spectrum of the configuration when given, the computed one otherwise."""
        settings = self.config.spectrum
        if settings.inline:
            return SpectrumResult.from_intervals(settings.intervals, settings.center)
        return self.compute_spectrum()

    def split(self) -> tuple[int, int, int]:
        """(d_s, d_c, d_u): the configured split, or the one carried by the computed spectrum."""
        if self.config.system.split is not None:
            return self.config.system.split
        spectrum = self.compute_spectrum()
        d_s = sum(m for (_, hi), m in zip(spectrum.hyperbolic_intervals, spectrum.multiplicities) if hi < 1.0)
        d_u = sum(m for (lo, _), m in zip(spectrum.hyperbolic_intervals, spectrum.multiplicities) if lo > 1.0)
        d_c = spectrum.center_multiplicity or 0
        if d_s + d_c + d_u != self.cocycle().dim:
            raise TakensNFException(
                f"Spectral multiplicities ({d_s}, {d_c}, {d_u}) do not add up to the dimension {self.cocycle().dim}; "
                "give system.split explicitly."
            )
        _logger.info("Split (%s, %s, %s) read off the spectrum", d_s, d_c, d_u)
        return d_s, d_c, d_u

    def build_system(self, with_spectrum: bool = True) -> NonlinearSystem:
        """The nonlinear system on [-window, window], with its linear part on twice that window."""
        system = self.config.system
        dims = self.split()
        linear = self.cocycle()
        if sum(dims) != linear.dim:
            raise TakensNFException(f"Split {dims} does not match the cocycle dimension {linear.dim}.", dims)
        order = system.jet_order(self.config.orders.N0 + 1)
        window = self.config.window
        if system.jets is not None:
            records = [record.model_dump() for record in system.jets]
            nonlinearity = nonlinearity_from_records(records, dims, window, order)
        elif system.nonlinearity is not None:
            settings = system.nonlinearity
            nonlinearity = random_nonlinearity(
                dims,
                window,
                settings.degrees,
                settings.scale,
                seed=system.seed if settings.seed is None else settings.seed,
                modulation=settings.modulation,
            ).map(lambda n, jet: jet.with_order(order))
        else:
            nonlinearity = TimeJetSeq.from_function((-window, window), lambda n: JetPoly.zero(dims, sum(dims), order))
        return NonlinearSystem(
            linear,
            nonlinearity,
            v_blocks=system.v_blocks,
            spectrum=self.resolved_spectrum() if with_spectrum else None,
        )

    # commands

    def resonance(self) -> CommandResult:
        """Check the non-resonance and gap conditions up to order N."""
        spectrum = self.resolved_spectrum()
        report = check_non_resonance(
            spectrum, self.config.orders.N, self.config.tolerances.varsigma, self.config.tolerances.budget
        )
        warnings = self._order_warnings()
        results = {
            "spectrum": spectrum.to_dict(),
            "non_resonance": report.to_dict(),
            "resonance_order": resonance_order(self.config.orders.N0),
        }
        if self.config.output.csv:
            self.write_csv([witness.to_dict() for witness in report.violations], "resonance_witnesses.csv")
        status = EXIT_OK if report.passed and report.gap_pass else EXIT_PRECONDITION
        return status, results, {"multi_indices": len(report.branches) + len(report.violations)}, warnings

    def center_manifold(self) -> CommandResult:
        """Center manifold jets of order N0 and their sampled invariance residuals."""
        system = self.build_system()
        data, trichotomy = self._coordinate_trichotomy(system)
        cm = center_manifold_jets(system, data, self.config.orders.N0, self.config.tolerances.tol)
        table = verify_center_invariance(system, cm, self.config.output.radii, seed=self.config.system.seed)
        if self.config.output.csv:
            self.write_csv(table.rows, "invariance.csv")
        results = {"center_manifold": cm.to_dict(), "invariance": table.to_dict(), "trichotomy": trichotomy}
        warnings = [] if trichotomy["passed"] else [f"Trichotomy checks failed: {', '.join(trichotomy['failed'])}"]
        return EXIT_OK, results, dict(cm.diagnostics), warnings

    def normal_form(self) -> CommandResult:
        """Takens normal form of order N0 with the sampled conjugacy residuals."""
        system = self.build_system()
        orders, tolerances = self.config.orders, self.config.tolerances
        report = check_non_resonance(system.spectrum, orders.N, tolerances.varsigma, tolerances.budget)
        warnings = self._order_warnings()
        checks = {"non_resonance": report.to_dict(), "resonance_order": resonance_order(orders.N0)}
        if not (report.passed and report.gap_pass):
            if not self.force:
                warnings.append("Resonance or gap checks failed; rerun with --force to compute the normal form anyway.")
                return EXIT_PRECONDITION, checks, {}, warnings
            warnings.append("Resonance or gap checks failed; the normal form was forced.")
        form, psi, conjugacy = takens_normal_form(
            system,
            orders.N0,
            orders.J,
            tolerances.tol,
            tolerances.varsigma,
            self.config.output.radii,
            self.config.system.seed,
        )
        anchor = 0 if system.window[0] <= 0 <= system.window[1] else system.window[0]
        if self.config.output.csv:
            self.write_csv(conjugacy.rows(), "conjugacy.csv")
        results = {**checks, "normal_form": form.to_dict(anchor), "conjugacy": conjugacy.to_dict()}
        diagnostics = {
            "provenance": psi.provenance,
            "trusted": None if psi.trusted is None else list(psi.trusted),
            "inverse_defect": psi.inverse_defect(),
            "linear_defect": psi.linear_defect(),
            "truncation_order": orders.N0 + 1,
        }
        return EXIT_OK, results, diagnostics, warnings

    def verify_conjugacy(self) -> CommandResult:
        """Homotopy verifier on the time-0 map: G0 is the linear part and R1 the low x_u-degree part of f_0."""
        system = self.build_system(with_spectrum=False)
        settings = self.config.homotopy
        dims = system.dims
        order = system.max_order
        G0 = JetPoly.linear(dims, system.linear.matrix(0), order)
        R1, R2 = taylor_split(system.nonlinearity[0], self.config.orders.N)
        rng = np.random.default_rng(self.config.system.seed)
        directions = rng.standard_normal((settings.samples, sum(dims)))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        rows, warnings = [], []
        for radius in self.config.output.radii:
            for direction in directions:
                try:
                    outcome = homotopy_series_conjugacy(
                        G0,
                        R1,
                        radius * direction,
                        settings.tau,
                        self.config.tolerances.tol,
                        flow=settings.flow,
                        max_terms=settings.max_terms,
                    )
                except DivergenceError as error:
                    warnings.append(f"radius {radius:g}: {error}")
                    continue
                rows.append(
                    {
                        "radius": float(radius),
                        "residual": outcome.residual,
                        "flow_defect": outcome.flow_defect,
                        "terms": outcome.terms,
                        "h_norm": float(np.linalg.norm(outcome.h)),
                    }
                )
        if not rows:
            raise DivergenceError("The homotopy series diverged at every sampled point.")
        if self.config.output.csv:
            self.write_csv(rows, "homotopy.csv")
        defects = [row["flow_defect"] for row in rows if row["flow_defect"] is not None]
        results = {
            "rows": rows,
            "max_residual": max(row["residual"] for row in rows),
            "max_flow_defect": max(defects) if defects else None,
            "R1": to_records(R1),
            "R2": to_records(R2),
        }
        return EXIT_OK, results, {"tau": settings.tau, "split_threshold": self.config.orders.N // 2}, warnings

    # private

    def _order_warnings(self) -> list[str]:
        orders = self.config.orders
        required = resonance_order(orders.N0)
        if orders.N < required:
            return [f"N={orders.N} is below 3*N0+1={required} for N0={orders.N0}; reported, not enforced."]
        return []

    def _coordinate_trichotomy(self, system: NonlinearSystem) -> tuple[TrichotomyData, dict[str, Any]]:
        """Coordinate projections with the spectral rates and the observed growth constant."""
        rates = trichotomy_rates(system.spectrum, self.config.tolerances.varsigma)
        trial = TrichotomyData.coordinate(system.dims, system.linear.window, 1.0, rates)
        report = verify_trichotomy(system.linear, trial, self.config.tolerances.tol)
        data = TrichotomyData.coordinate(system.dims, system.linear.window, max(1.0, report.K_obs), rates)
        return data, _trichotomy_summary(report)


def _trichotomy_summary(report) -> dict[str, Any]:
    return {
        "passed": report.passed,
        "K_obs": report.K_obs,
        "ranks": list(report.ranks),
        "failed": list(report.failed),
        "observed": report.observed,
        "defects": report.defects,
    }
