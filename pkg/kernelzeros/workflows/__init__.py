"""Scenario and sweep pipelines."""
