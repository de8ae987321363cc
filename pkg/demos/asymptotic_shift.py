"""A map that is not nonexpansive but whose powers settle: the truncated shift.

T(x1, x2, x3) = (0, x1^2, a x2) on the unit ball of R^3 has k_1 = 2, yet
T^3 = 0. The nested scheme uses T^n in its level sets, so it still converges
to P_F x = 0; the residual ||x_n - T^(n-1) x_n|| is the diagnostic that
has to vanish along the way.
"""

from hybridproj import Geometry, empirical_lipschitz, gk_truncated, norm, run_scheme


def main():
    g = Geometry(3, 2)
    op = gk_truncated(g)
    print("declared vs sampled Lipschitz constants of T^n")
    for n in range(1, 5):
        print(f"  n={n}: k_n = {op.kn(n):.4f}, sampled = {empirical_lipschitz(op, n):.4f}")

    trace = run_scheme(g, op, [0.9, 0.1, 0.1], "nested", max_iter=30, stop_tol=1e-12)
    print(f"\nnested run: {trace.iterations} steps, stop={trace.stop_reason}")
    print(f"  {'n':>3} {'||x_n||':>10} {'||x_n - T^(n-1) x_n||':>22} {'level bound':>12}")
    for row in trace.rows:
        print(f"  {row['n']:>3} {norm(g, row['x']):10.3e} {row['res_tnm1']:22.3e}"
              f" {row['level_bound']:12.3e}")


if __name__ == "__main__":
    main()
