"""Tests for the measbench package."""
