"""Tests for the feedback circuit analysis."""
