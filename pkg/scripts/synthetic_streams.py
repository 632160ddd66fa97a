"""Scalability experiments on the synthetic stream analogs (100k rows, m = classes = 10..40).

Three experiments, picked with --experiment:
  time     clustering time at 10k..100k prefixes, mc = class count
  memory   entry counts at 10k..100k prefixes, lossy vs exact Squeezer
  epsilon  accuracy and entries for eps = 0.01..0.1
"""
import argparse
import time

from streamclucd.baselines import Squeezer
from streamclucd.clusterer import ClustererConfig, ClusterModel, feed
from streamclucd.datagen import generate, benchmark_spec
from streamclucd.evaluation import run_streamclucd
from streamclucd.io import write_table

STEPS = range(10_000, 100_001, 10_000)


def time_experiment(streams, eps, rows):
    out = []
    for s in streams:
        spec = benchmark_spec(s, rows=rows)
        records, _ = generate(spec)
        model = ClusterModel(ClustererConfig(epsilon=eps, max_clusters=spec.classes))
        elapsed = 0.0
        for i, r in enumerate(records, 1):
            t0 = time.perf_counter()
            feed(model, r)
            elapsed += time.perf_counter() - t0
            if i % 10_000 == 0:
                out.append({"stream": s, "records": i, "seconds": elapsed})
                print(f"stream {s} {i:>7} {elapsed:8.2f}s")
    return out


def memory_experiment(streams, eps, rows, domain_size):
    out = []
    for s in streams:
        records, _ = generate(benchmark_spec(s, rows=rows, domain_size=domain_size))
        model = ClusterModel(ClustererConfig(epsilon=eps))
        sq = Squeezer()
        for i, r in enumerate(records, 1):
            feed(model, r)
            sq.process(r)
            if i % 10_000 == 0:
                row = {"stream": s, "records": i, "streamclucd": model.entry_count(),
                       "squeezer": sq.entry_count()}
                out.append(row)
                print(f"stream {s} {i:>7} {row['streamclucd']:>8} {row['squeezer']:>8}")
    return out


def epsilon_experiment(streams, rows):
    out = []
    for s in streams:
        records, labels = generate(benchmark_spec(s, rows=rows))
        for i in range(1, 11):
            rep = run_streamclucd(records, labels, epsilon=i / 100)
            out.append({"stream": s, **rep.row()})
            print(f"stream {s} eps {i / 100:.2f} accuracy {rep.accuracy:.4f} "
                  f"entries {rep.total_entries} peak {rep.peak_entries} k {rep.k}")
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--experiment", choices=["time", "memory", "epsilon"], required=True)
    ap.add_argument("--streams", type=int, nargs="+", default=[1, 2, 3, 4])
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--rows", type=int, default=100_000)
    ap.add_argument("--domain-size", type=int, default=10_000,
                    help="tokens per attribute for the memory experiment")
    ap.add_argument("--out", help="results table (.csv or .json)")
    args = ap.parse_args()

    if args.experiment == "time":
        rows = time_experiment(args.streams, args.epsilon, args.rows)
    elif args.experiment == "memory":
        rows = memory_experiment(args.streams, args.epsilon, args.rows, args.domain_size)
    else:
        rows = epsilon_experiment(args.streams, args.rows)
    if args.out:
        write_table(rows, args.out)


if __name__ == "__main__":
    main()
