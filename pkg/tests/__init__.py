"""Tests for the hyperswitch toolkit."""
