"""Metric derivation and the from-scratch statistical battery."""
