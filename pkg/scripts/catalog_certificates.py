"""Cell sizes, metrics and certificates for the lattice catalog."""

import argparse
import time
from dataclasses import dataclass

from isodia import ResourceLimitError, metrics, named_lattice, uniqueness_certificate, voronoi_cell
from isodia.errors import GeometryError


@dataclass
class Config:
    max_dim: int = 5
    exceptional: bool = True


def catalog(cfg):
    for d in range(2, cfg.max_dim + 1):
        yield "Z", d
        yield "A", d
        yield "A*", d
        if d >= 3:
            yield "D", d
            yield "D*", d
    if cfg.exceptional:
        yield from [("E6*", None), ("E7*", None), ("E6", None), ("E7", None), ("E8", None)]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max_dim", type=int, default=Config.max_dim)
    p.add_argument("--no-exceptional", dest="exceptional", action="store_false")
    cfg = Config(**vars(p.parse_args(argv)))
    print(f"{'lattice':8s} {'facets':>6s} {'verts':>6s} {'lambda':>9s} {'mu':>9s}  verdict/route  time")
    for name, d in catalog(cfg):
        L = named_lattice(name, d)
        t = time.perf_counter()
        try:
            cell = voronoi_cell(L)
        except (ResourceLimitError, GeometryError, ValueError) as exc:
            print(f"{L.name:8s} skipped: {exc}")
            continue
        m = metrics(L, cell)
        cert = uniqueness_certificate(L, cell)
        print(f"{L.name:8s} {len(cell.facets):6d} {len(cell.vertices):6d} {m.lam:9.6f} {m.mu:9.6f}  "
              f"{cert.verdict}/{cert.route}  {time.perf_counter() - t:.2f}s")


if __name__ == "__main__":
    main()
