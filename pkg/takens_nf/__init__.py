# -*- coding: utf-8 -*-
"""Nonautonomous Takens normal forms at jet level."""
__version__ = "0.1.0"  # pragma: no cover
