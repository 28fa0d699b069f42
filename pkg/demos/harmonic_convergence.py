"""Mesh convergence of the Dirichlet solver against r^k sin(k theta).

For p = 2 the boundary data sin(k theta) on the unit disk extends to the
harmonic polynomial r^k sin(k theta).  Halving h should roughly halve the
max-norm error on the interior nodes (the boundary nodes sit up to h off
the circle, which limits the rate to first order).
"""

import numpy as np

from nodalab.geometry import BoundaryData, boundary_angle, build_disk_domain
from nodalab.solver import solve_p_laplace


def interior_error(k, h):
    dom = build_disk_domain(1.0, h)
    u = solve_p_laplace(dom, BoundaryData(np.sin(k * boundary_angle(dom))), 2.0)
    X, Y = dom.xy
    exact = np.hypot(X, Y) ** k * np.sin(k * np.arctan2(Y, X))
    return np.abs(u.values - exact)[dom.interior].max()


if __name__ == "__main__":
    spacings = [1 / 16, 1 / 32, 1 / 64]
    print(f"{'k':>2} " + " ".join(f"h=1/{round(1 / h):<4}" for h in spacings) + "  rates")
    for k in (1, 2, 3):
        errs = [interior_error(k, h) for h in spacings]
        rates = [a / b for a, b in zip(errs, errs[1:])]
        print(f"{k:>2} " + " ".join(f"{e:9.2e}" for e in errs) + "  " + " ".join(f"{r:.2f}" for r in rates))
