"""Uniqueness certificates for random 3D lattices.

Draws Grams either from Gaussian bases or from positive Selling parameters
and tallies verdict/route and Fedorov type.
"""

import argparse
import time
from collections import Counter
from dataclasses import dataclass

import numpy as np

from isodia import (
    Lattice, SellingParameters, fedorov_classify, selling_to_gram, uniqueness_certificate,
    voronoi_cell,
)
from isodia.lattice import random_gram


@dataclass
class Config:
    count: int = 500
    seed: int = 1
    source: str = "gaussian"  # or "selling"
    max_cond: float = 50.0
    zero_prob: float = 0.3  # selling: chance that a parameter is zero


def draw(rng, cfg):
    if cfg.source == "gaussian":
        return random_gram(rng, 3, cfg.max_cond)
    while True:
        p = rng.uniform(0.1, 3.0, 6) * (rng.random(6) > cfg.zero_prob)
        try:
            return selling_to_gram(SellingParameters.from_json(list(p)))
        except ValueError:
            continue


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    for name, default in vars(Config()).items():
        p.add_argument(f"--{name}", type=type(default), default=default)
    cfg = Config(**vars(p.parse_args(argv)))
    rng = np.random.default_rng(cfg.seed)
    tally, types = Counter(), Counter()
    t = time.perf_counter()
    for _ in range(cfg.count):
        L = Lattice.from_gram(draw(rng, cfg))
        cell = voronoi_cell(L)
        cert = uniqueness_certificate(L, cell)
        tally[(cert.verdict, cert.route)] += 1
        types[str(fedorov_classify(cell))] += 1
    print(f"{cfg.count} lattices ({cfg.source}) in {time.perf_counter() - t:.1f}s")
    for (verdict, route), n in tally.most_common():
        print(f"  {verdict:20s} {route:14s} {n}")
    for name, n in types.most_common():
        print(f"  {name:26s} {n}")
    return 0 if set(v for v, _ in tally) == {"unique_all_V"} else 1


if __name__ == "__main__":
    raise SystemExit(main())
