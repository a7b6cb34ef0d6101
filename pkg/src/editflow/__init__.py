"""Benchmark and optimize subsequent-edit recommenders against developer flows."""

__version__ = "0.1.0"
