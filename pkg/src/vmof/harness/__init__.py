"""Experiment plans, baselines, statistics and the command line."""
