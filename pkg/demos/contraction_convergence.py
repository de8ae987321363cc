"""Nested and non-nested hybrid iterations on a contraction in l^2 and l^3.

T x = x / 2 on [-1, 1]^2 has the single fixed point 0, so both schemes must
drive the iterates from the anchor (1, 1) to 0 while the anchor distance
grows monotonically (nested scheme) toward ||x - 0||.
"""

import numpy as np

from hybridproj import Geometry, SamplerConfig, contraction_scale, norm, run_scheme


def table(trace, every=2):
    g = Geometry(trace.dim, trace.p)
    print(f"  {'n':>3} {'||x_n||':>10} {'||x - x_n||':>12} {'res':>10} {'hull':>5}")
    for row in trace.rows[::every]:
        print(f"  {row['n']:>3} {norm(g, np.array(row['x'])):10.3e} {row['anchor_dist']:12.6f}"
              f" {row['res_t']:10.3e} {row['hull_vertices']:>5.0f}")


def main():
    anchor = [1.0, 1.0]
    for p in (2.0, 3.0):
        g = Geometry(2, p)
        op = contraction_scale(g, 0.5)
        for scheme in ("nested", "mt"):
            trace = run_scheme(g, op, anchor, scheme, sampler=SamplerConfig(2000),
                               max_iter=12, stop_tol=1e-12)
            print(f"p={p:g} scheme={scheme}: stop={trace.stop_reason},"
                  f" ||x - 0|| = {norm(g, np.array(anchor)):.6f}")
            table(trace)


if __name__ == "__main__":
    main()
