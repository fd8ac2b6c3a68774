"""Build the Bruhat-Tits tree of SL2 over Q_p to a given depth and compare with lattice counting."""
import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from hovelkit.group_instances import INSTANCES
from hovelkit.parahoric_hovel import ParahoricFamily, build_tree, tree_cross_check

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
import oracles  # noqa: E402


@dataclass
class TreeConfig:
    p: int = 2
    depth: int = 4
    threads: int = 1
    dot: Optional[str] = None


def main(cfg: TreeConfig) -> int:
    print(json.dumps(asdict(cfg), sort_keys=True))
    start = time.perf_counter()
    tree = build_tree(ParahoricFamily(INSTANCES["sl2"](cfg.p)), cfg.depth, threads=cfg.threads)
    lattice = oracles.tree_spheres(cfg.p, cfg.depth)
    print("spheres ", *tree.spheres)
    print("lattices", *lattice)
    print("regular", tree.regular(), "geodesic apartment", tree.apartment_is_geodesic(), "cycles", tree.cycles)
    bad = tree_cross_check(tree, pairs=20)
    print(f"cross-check mismatches {len(bad)}  ({time.perf_counter() - start:.2f} s)")
    if cfg.dot:
        Path(cfg.dot).write_text(tree.to_dot())
    return 0 if tree.spheres == lattice and not bad else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(TreeConfig()).items():
        ap.add_argument(f"--{name}", type=type(default) if default is not None else str, default=default)
    sys.exit(main(TreeConfig(**vars(ap.parse_args()))))
