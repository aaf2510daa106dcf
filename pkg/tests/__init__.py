"""Tests for los-coverage."""
