"""Tests for Jubilee."""
