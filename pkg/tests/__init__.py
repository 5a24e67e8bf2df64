"""Tests for the qell package."""
