#!/usr/bin/env python3
"""Simulation 1: minimum-uncertainty state at the beam center.

Benchmark dimensionless set (beta=0.25, eta=0.0125, mu=2.310), N=40,
300 trajectories to tau=80.  Writes series.csv into the output
directory; render the figure analogues afterwards with the glatom-figs
package, e.g.

    render_fig --spec fig1.json --out fig1.png
"""

import argparse
import json
import subprocess
import sys
import tempfile

CONFIG = {
    "params": {"beta": 0.25, "eta": 0.0125, "mu": 2.310},
    "engine": {
        "cutoff": 40,
        "n_traj": 300,
        "tau_max": 80.0,
        "sample_dt": 0.25,
        "seed": 2024,
        "initial": [0.0, 0.0, 0.0, 0.0],
    },
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/sim1")
    ap.add_argument("--threads", type=int, default=2)
    ap.add_argument("--n-traj", type=int, default=None)
    args = ap.parse_args()
    cfg = dict(CONFIG)
    if args.n_traj:
        cfg["engine"] = dict(cfg["engine"], n_traj=args.n_traj)
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(cfg, fh)
        path = fh.name
    return subprocess.call(
        [
            sys.executable,
            "-m",
            "glatom.cli",
            "simulate",
            "--config",
            path,
            "--out",
            args.out,
            "--threads",
            str(args.threads),
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
