"""Tests for takens_nf."""
