"""Random Fourier features with Monte Carlo, quasi-Monte Carlo, Bayesian
quadrature and Stein-effect shrinkage weighting."""

from .approximation import RandomFourierFeatures
from .kernels import GaussianKernel, exact_gram, kernel_estimate, relative_error

__version__ = "0.1.0"

__all__ = [
    "GaussianKernel",
    "RandomFourierFeatures",
    "exact_gram",
    "kernel_estimate",
    "relative_error",
]
