"""How the level-set schedule t_n = c / (n + 1) affects the nested scheme.

Smaller c shrinks the level sets faster: fewer steps to a given residual,
but thinner sets to sample. Each run is written to its own CSV.
"""

import json
import os

from hybridproj.harness import read_trace, sweep

HERE = os.path.dirname(__file__)


def main():
    with open(os.path.join(HERE, "configs", "contraction_nested.json")) as fh:
        doc = json.load(fh)
    doc["output"]["csv_path"] = None
    doc["stopping"] = {"max_iter": 30, "stop_tol": 1e-10}
    out = os.path.join(HERE, "out")
    results = sweep(doc, "scheme.t_schedule.params.c", [0.1, 0.5, 1.0, 1.5],
                    out_dir=out, stem="schedule", jobs=2)
    print(f"  {'c':>4} {'steps':>6} {'final ||x_n - T x_n||':>22}")
    for r in results:
        trace = read_trace(r["csv"])
        print(f"  {r['value']:>4} {r['iterations']:>6} {trace.rows[-1]['res_t']:22.3e}")


if __name__ == "__main__":
    main()
