"""Epsilon-connectivity of a sampled zero set, and corridors around chains.

The zero set of x*y near the origin is a cross.  Sampled on a lattice it is
eps-connected as soon as eps exceeds the sampling gap.  A chain through it
thickens into a lattice corridor of balls of radius 1.5 eps, and a lattice
path joins the chain ends inside that corridor.
"""

import numpy as np

from nodalab.geometry import build_disk_domain
from nodalab.topology import chain_corridor, connectivity_vs_eps_profile, eps_chain_between, path_in_region

dom = build_disk_domain(1.0, 1 / 32)
X, Y = dom.xy
near = dom.interior & (np.abs(X * Y) <= 1e-12) & (np.hypot(X, Y) < 0.5)
S = np.column_stack([X[near], Y[near]])
print(f"{len(S)} zero-set samples")

for eps, n in connectivity_vs_eps_profile(S, dom.h * np.array([0.5, 0.99, 1.0, 2.0])):
    print(f"  eps = {eps / dom.h:4.2f} h: {n} component(s)")

eps = 4 * dom.h
start, end = (-15 * dom.h, 0.0), (0.0, 15 * dom.h)
chain = eps_chain_between(S, start, end, eps)
print(f"chain from {start} to {end}: {len(chain)} points")
region = chain_corridor(chain, dom)
path = path_in_region(region, start, end)
print(f"corridor: {region.size} nodes; lattice path of {len(path) - 1} steps")
