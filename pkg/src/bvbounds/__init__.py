"""Information inequalities for bias-variance trade-offs: divergences, information matrices, bounds and estimators."""

__version__ = "0.1.0"
