"""Experiment configuration, runners, reports and the command-line interface."""
