"""Nodal domains of a p-harmonic function with oscillating boundary data.

Solve the 3-Laplace equation on the unit disk with g = sin(3 theta) and
split the solution into its positive and negative nodal domains.  Each
domain should reach the boundary, have no holes, and own one boundary
extremum of its sign.  The label image is written as a plain PPM file.
"""

import sys
from pathlib import Path

import numpy as np

from nodalab.export import label_colors, write_ppm
from nodalab.geometry import BoundaryData, boundary_angle, build_disk_domain, count_relative_extrema
from nodalab.nodal import check_nodal_count_bound, extract_nodal_decomposition, nodal_lines_touch_boundary
from nodalab.solver import solve_p_laplace

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
dom = build_disk_domain(1.0, 1 / 48)
g = BoundaryData(np.sin(3 * boundary_angle(dom)))
u = solve_p_laplace(dom, g, 3.0)
print(f"Newton: {u.info['iterations']} iterations, residual {u.info['residual']:.1e}")

for rel in (1e-2, 1e-3, 1e-4):
    dec = extract_nodal_decomposition(dom, u, rel * np.nanmax(np.abs(u.values)))
    lines = nodal_lines_touch_boundary(dec, dom)
    print(
        f"tau/max|u|={rel:.0e}: domains {dec.counts}, "
        f"lines reach boundary {all(v.ok for v in lines)}, "
        f"simply connected {all(c.simply_connected for c in dec.components)}"
    )

dec = extract_nodal_decomposition(dom, u)
print("boundary extrema (max, min):", count_relative_extrema(g))
print("count bound holds:", check_nodal_count_bound(dec, g).ok)

write_ppm(out / "nodal_domains.ppm", label_colors(dec.labels, dom.kind))
print("wrote", out / "nodal_domains.ppm")
