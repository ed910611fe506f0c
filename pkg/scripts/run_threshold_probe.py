"""Hölder and BV threshold probes on midpoint-displacement paths.

Writes ``probe.csv`` (one row per trial) and ``medians.csv`` (median witness
size and box dimension per class, parameter and resolution) and prints the
median table.  Box dimensions of finite grid subsets are proxies, not
Hausdorff dimensions.

    python scripts/run_threshold_probe.py --trials 10 --n 65,129,257 --jobs 4
"""
from __future__ import annotations

import argparse
import csv
import time
from pathlib import Path

from dimlab.agreement import probe_csv, probe_medians, threshold_probe

HOLDER_ALPHAS = ["1/4", "1/3", "1/2", "2/3", "3/4"]
BV_BOUNDS = ["1/2", "1", "2", "4"]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/probe")
    ap.add_argument("--family", default="midpoint_displacement:hurst=1/2")
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--n", default="129", help="comma-separated grid sizes")
    ap.add_argument("--seed", type=int, default=20240101)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    ns = tuple(int(x) for x in args.n.split(","))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    t = time.time()
    rows = (threshold_probe(args.family, "holder", HOLDER_ALPHAS, args.trials, args.seed, ns,
                            jobs=args.jobs)
            + threshold_probe(args.family, "bv", BV_BOUNDS, args.trials, args.seed, ns,
                              jobs=args.jobs))
    (out / "probe.csv").write_text(probe_csv(rows))
    medians = probe_medians(rows)
    with open(out / "medians.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(medians[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(medians)
    print(f"{'class':7} {'param':6} {'n':>5} {'size':>7} {'box_dim':>8} {'ref':>6}")
    for m in medians:
        print(f"{m['class']:7} {m['param']:6} {m['n']:5d} {m['median_size']:7.1f} "
              f"{m['median_box_dim']:8.3f} {m['reference']:6.3f}")
    print(f"{len(rows)} rows in {time.time() - t:.1f}s -> {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
