#!/usr/bin/env python3
"""Writes a small synthetic click log (user, item, timestamp) for smoke runs."""
import argparse
import random


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/toy.tsv")
    ap.add_argument("--users", type=int, default=100)
    ap.add_argument("--items", type=int, default=300)
    ap.add_argument("--events", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    # Skewed item popularity so retrieval has something to learn.
    weights = [1.0 / (i + 1) ** 0.8 for i in range(args.items)]
    with open(args.out, "w") as f:
        for t in range(args.events):
            u = rng.randrange(args.users)
            i = rng.choices(range(args.items), weights)[0]
            f.write(f"u{u}\ti{i}\t{t}\n")


if __name__ == "__main__":
    main()
