"""Euclidean hybrid iteration on a plane rotation.

A rotation by 1 rad fixes only the origin and never moves points closer to
it, so plain iteration goes in circles. The two half-plane cuts of the
Euclidean scheme bring ||x_n|| down slowly and unevenly, while ||x - x_n||
climbs monotonically toward ||x|| = sqrt 2. The trace is written as CSV for plotting.
"""

import math
import os

from hybridproj import Geometry, Schedule, rotation, run_scheme, write_trace


def main():
    g = Geometry(2, 2)
    trace = run_scheme(g, rotation(g, 1.0), [1.0, 1.0], "nt",
                       alpha_schedule=Schedule("constant_alpha", {"alpha": 0.5}),
                       max_iter=300, stop_tol=1e-300)
    print(f"  {'n':>4} {'||x_n||':>10} {'sqrt2 - ||x - x_n||':>20}")
    for row in trace.rows[::25]:
        print(f"  {row['n']:>4} {math.hypot(*row['x']):10.3e}"
              f" {math.sqrt(2) - row['anchor_dist']:20.3e}")
    out = os.path.join(os.path.dirname(__file__), "out", "rotation_nt.csv")
    write_trace(trace, out)
    print(f"trace written to {out}")


if __name__ == "__main__":
    main()
