"""Weak-form learning of continuous-time latent dynamics with control.

Subpackages cover dense numerics, reverse-mode autodiff, ODE solvers,
benchmark systems, weak-form constraint assembly, spectral graph
convolutions, the model families, training/evaluation, and a CLI.
"""

from .backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
