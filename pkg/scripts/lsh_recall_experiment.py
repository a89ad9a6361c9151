#!/usr/bin/env python3
"""Sweep LSH band/plane splits and measure recall vs candidate rate.

Plants vector pairs at fixed cosine levels, indexes them alongside random
background vectors, and reports how often the planted partner is retrieved
(recall) and how much of the index a query touches (candidate rate).
Justifies the default 8 bands x 4 hyperplanes: ~0.98 recall at cosine 0.8.

Usage: python scripts/lsh_recall_experiment.py [--n 4000] [--pairs 400]
"""

import argparse
import math
import sys

import numpy as np

from srcvul.lsh import LshParams, build_index, cobucket_probability, query
from srcvul.metrics import SlicingVector


def planted_pair(rng, target_cos):
    a = rng.uniform(0.05, 1.0, size=4)
    for _ in range(500):
        noise = rng.normal(0, 1, size=4)
        noise -= (noise @ a) / (a @ a) * a  # orthogonal component
        b = target_cos * a / np.linalg.norm(a) + math.sqrt(
            max(0.0, 1 - target_cos**2)
        ) * noise / np.linalg.norm(noise)
        if (b >= 0).all():
            return a, b * rng.uniform(0.3, 1.5)
    return a, a.copy()  # degenerate but safe fallback


def run(n_background, n_pairs, combos, cos_levels, seed):
    rng = np.random.default_rng(seed)
    print(f"{'bands':>5} {'planes':>6} {'cos':>5} {'recall':>7} {'cand%':>7} {'model':>7}")
    for bands, planes in combos:
        params = LshParams(hyperplanes_per_band=planes, bands=bands, seed=seed)
        for cos_level in cos_levels:
            vectors = [rng.uniform(0.01, 1.0, size=4) for _ in range(n_background)]
            probes = []
            for _ in range(n_pairs):
                a, b = planted_pair(rng, cos_level)
                probes.append(len(vectors))
                vectors.extend([a, b])
            entries = {
                f"r{i:06d}": SlicingVector(dims=tuple(map(float, v)))
                for i, v in enumerate(vectors)
            }
            index = build_index(entries, params)
            hits = 0
            candidates = 0
            for row in probes:
                got = query(index, entries[f"r{row:06d}"])
                candidates += len(got)
                if f"r{row + 1:06d}" in got:
                    hits += 1
            recall = hits / n_pairs
            cand_rate = candidates / (n_pairs * len(vectors))
            model = cobucket_probability(cos_level, params)
            print(
                f"{bands:>5} {planes:>6} {cos_level:>5.2f} {recall:>7.3f} "
                f"{100 * cand_rate:>6.1f}% {model:>7.3f}"
            )


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=4000, help="background vectors")
    parser.add_argument("--pairs", type=int, default=400, help="planted pairs per level")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args(argv)
    combos = [(8, 4), (4, 8), (16, 2), (2, 16)]
    cos_levels = [0.5, 0.8, 0.95, 1.0]
    run(args.n, args.pairs, combos, cos_levels, args.seed)
    return 0


if __name__ == "__main__":
    sys.exit(main())
