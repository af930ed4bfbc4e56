"""Base runner to write the reports."""

from takens_nf.base_runner.base_runner import BaseRunner

__all__ = ["BaseRunner"]
