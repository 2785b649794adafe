"""Budgeted random-search AutoML with stacked super learners for binary classification."""

__version__ = "0.1.0"
