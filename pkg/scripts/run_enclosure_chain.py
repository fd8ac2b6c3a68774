"""Random shapes in rank-2 models: time every enclosure variant and check the containment chain."""
import argparse
import random
import sys
import time
from collections import Counter
from dataclasses import asdict, dataclass
from fractions import Fraction

from hovelkit.affine_apartment import FiniteSet, OpenSegmentGerm, Point, Segment, enclosure_chain, make_model
from hovelkit.kac_core import ALIASES


@dataclass
class ChainConfig:
    models: str = "a2,b2,g2,aff_a1,hyp_33"
    inputs: int = 100
    cap: int = 4
    seed: int = 1


def random_shape(rng: random.Random, dim: int):
    def p():
        return tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 3)) for _ in range(dim))
    a, b = p(), p()
    while b == a:
        b = p()
    return rng.choice([Point(a), Segment(a, b), OpenSegmentGerm(a, b), FiniteSet((a, b, p()))])


def main(cfg: ChainConfig) -> int:
    print(asdict(cfg))
    rng = random.Random(cfg.seed)
    failures = 0
    for name in cfg.models.split(","):
        model = make_model(ALIASES[name], 1, cfg.cap)
        sizes: Counter = Counter()
        start = time.perf_counter()
        for _ in range(cfg.inputs):
            rep = enclosure_chain(model, random_shape(rng, model.dim), raise_on_violation=False)
            failures += not rep.ok
            for spec, ci in rep.results.items():
                sizes[spec] += len(ci.closed)
        avg = "  ".join(f"{k}={v / cfg.inputs:.1f}" for k, v in sorted(sizes.items()))
        print(f"{name:7s} {time.perf_counter() - start:6.2f} s  mean facets: {avg}")
    print("chain violations", failures)
    return 1 if failures else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(ChainConfig()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    sys.exit(main(ChainConfig(**vars(ap.parse_args()))))
