"""Mushroom clustering errors for st = 7..16: lossy clusterer (s=0, s=0.5), Squeezer, k-modes.

Uses the full 8124-row file when STREAMCLUCD_MUSHROOM points at it, else the
bundled complete-cases subset.

    python3 scripts/mushroom_thresholds.py --out results/mushroom.csv
"""
import argparse
import logging

import numpy as np

from streamclucd.datasets import find_full_mushroom, load_complete_cases, load_mushroom
from streamclucd.evaluation import sweep
from streamclucd.io import write_table


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--epsilon", type=float, default=0.001)
    ap.add_argument("--out", help="per-run table (.csv or .json)")
    args = ap.parse_args()
    logging.basicConfig(level=logging.WARNING)

    path = find_full_mushroom()
    if path:
        records, labels = load_mushroom(path)
    else:
        records, labels = load_complete_cases()
    print(f"dataset: {path or 'bundled complete cases'} ({len(records)} rows)")

    thresholds = list(range(7, 17))
    runs = {
        "s=0": sweep("streamclucd", {"sim_threshold": thresholds}, records, labels,
                     epsilon=args.epsilon, support=0.0),
        "s=0.5": sweep("streamclucd", {"sim_threshold": thresholds}, records, labels,
                       epsilon=args.epsilon, support=0.5),
        "squeezer": sweep("squeezer", {"sim_threshold": thresholds}, records, labels),
        "kmodes": sweep("kmodes", {"sim_threshold": thresholds}, records, labels),
    }
    print(f"{'st':>4} " + " ".join(f"{name:>10}" for name in runs))
    for i, st in enumerate(thresholds):
        print(f"{st:>4} " + " ".join(f"{runs[n][i].error:>10.3f}" for n in runs))
    print("mean " + " ".join(f"{np.mean([r.error for r in reps]):>10.3f}" for reps in runs.values()))

    if args.out:
        rows = []
        for name, reps in runs.items():
            for rep in reps:
                rows.append({"variant": name, **rep.row()})
        write_table(rows, args.out)


if __name__ == "__main__":
    main()
