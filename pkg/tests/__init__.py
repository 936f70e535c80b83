"""Tests for morethan package."""
