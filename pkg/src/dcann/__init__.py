"""Multinomial logit versus a small feed-forward network on synthetic binary choice data."""

__version__ = "0.1.0"
