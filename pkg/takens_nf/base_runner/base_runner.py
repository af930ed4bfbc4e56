"""Base runner for the takens_nf commands.

Hold the validated configuration and write JSON reports and CSV tables.
"""
import csv
import hashlib
import json
import logging
import math
from datetime import datetime
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from dateutil import tz

from takens_nf import __version__
from takens_nf.schemas import RunConfig

_logger = logging.getLogger(__name__)

REPORT_SCHEMA = 1
TOOL_NAME = "takens-nf"


def to_builtin(value: Any) -> Any:
    """Convert numpy scalars and arrays, tuples and non-finite floats into plain JSON values."""
    if isinstance(value, dict):
        return {str(key): to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.generic):
        return to_builtin(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def canonical_json(value: Any) -> str:
    """Compact JSON with sorted keys, used for hashing."""
    return json.dumps(to_builtin(value), sort_keys=True, separators=(",", ":"))


class BaseRunner:
    """Base runner writing reproducible reports."""

    def __init__(self, config: RunConfig):
        """Initialise an instance of the BaseRunner.

        Args:
            config (RunConfig): The validated run configuration.
        """
        self.config = config
        self.out_dir = Path(config.output.out)

    @property
    def config_hash(self) -> str:
        """sha256 of the canonical config echo."""
        return hashlib.sha256(canonical_json(self.config.echo()).encode("utf-8")).hexdigest()

    def report_body(
        self,
        results: Any,
        diagnostics: dict | None = None,
        warnings: Sequence[str] | None = None,
        command: str | None = None,
    ) -> dict:
        """Everything the report holds except the timestamp. Identical configurations give identical bodies."""
        meta = {"tool": TOOL_NAME, "version": __version__, "config_hash": self.config_hash}
        if command is not None:
            meta["command"] = command
        return to_builtin(
            {
                "schema": REPORT_SCHEMA,
                "meta": meta,
                "config": self.config.echo(),
                "results": {} if results is None else results,
                "diagnostics": diagnostics or {},
                "warnings": list(warnings or ()),
            }
        )

    def write_report(
        self,
        results: Any,
        path: str | Path,
        diagnostics: dict | None = None,
        warnings: Sequence[str] | None = None,
        command: str | None = None,
    ) -> Path:
        """Write the JSON report with sorted keys; filesystem errors propagate unchanged.

        Args:
            results (Any): Results of the command.
            path (str | Path): Destination file. Relative paths are resolved against the output directory.
            diagnostics (dict | None): Residuals, bounds, conditioning and similar run information.
            warnings (Sequence[str] | None): Human readable warnings.
            command (str | None): The command that produced the results.

        Returns:
            (Path): The written file.
        """
        report = self.report_body(results, diagnostics, warnings, command)
        report["meta"]["timestamp"] = datetime.now(tz.tzutc()).replace(microsecond=0).isoformat()
        target = self._resolve(path)
        target.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        _logger.info("Wrote report %s", target)
        return target

    def write_csv(self, rows: Sequence[dict], path: str | Path) -> Path:
        """Write rows as CSV with the columns of the first row."""
        target = self._resolve(path)
        rows = [to_builtin(row) for row in rows]
        with target.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(handle, fieldnames=list(rows[0]) if rows else [])
            writer.writeheader()
            writer.writerows(rows)
        _logger.info("Wrote %s rows to %s", len(rows), target)
        return target

    # private

    def _resolve(self, path: str | Path) -> Path:
        target = Path(path)
        if not target.is_absolute():
            target = self.out_dir / target
        target.parent.mkdir(parents=True, exist_ok=True)
        return target
