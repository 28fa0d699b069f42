"""Lattice experiments for quasilinear elliptic equations in planar domains.

Solvers for p-Laplace type Dirichlet problems plus detectors for nodal
domains, vanishing sets, Harnack ratios and eps-connectivity.
"""

__version__ = "0.1.0"
