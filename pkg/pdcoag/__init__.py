"""pdcoag - Poisson-Dirichlet coagulation/fragmentation toolkit."""

__version__ = "0.1.0"
