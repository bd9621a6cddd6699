"""Benchmark network builders and drivers."""
