"""Bayesian point estimates and lowest posterior loss credible regions."""

from ._core import (
    Model,
    RipeError,
    binomial_coverage,
    estimate,
    expected_loss,
    loss_curve,
    mc_coverage,
    region,
)

__all__ = [
    "Model",
    "RipeError",
    "binomial_coverage",
    "estimate",
    "expected_loss",
    "loss_curve",
    "mc_coverage",
    "region",
]
