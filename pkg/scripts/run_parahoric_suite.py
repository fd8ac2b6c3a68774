"""Parahoric axioms, membership certification and the segment check on SL2/SL3."""
import argparse
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

from hovelkit.group_instances import INSTANCES
from hovelkit.parahoric_hovel import ParahoricFamily, certify_membership, check_MAO, check_parahoric_axioms


@dataclass
class ParahoricConfig:
    instances: str = "sl2,sl3"
    p: int = 2
    points: int = 20
    length: int = 6
    mao_trials: int = 100
    seed: int = 0


def main(cfg: ParahoricConfig) -> int:
    print(asdict(cfg))
    bad = 0
    for name in cfg.instances.split(","):
        fam = ParahoricFamily(INSTANCES[name](cfg.p))
        start = time.perf_counter()
        print(f"== {name}")
        for r in check_parahoric_axioms(fam, cfg.points, cfg.seed):
            bad += r.status == "fail"
            print(f"  {r.axiom:5s} {r.status:9s} {r.reason or ''}")
        origin = tuple(Fraction(0) for _ in range(fam.model.dim))
        inner = tuple(Fraction(k + 1, 3 + k) for k in range(fam.model.dim))
        cert = certify_membership(fam, [origin, inner], cfg.length, seed=cfg.seed)
        bad += not cert.ok
        print(f"  certification: {cert.enumerated} words, {len(cert.disagreements)} disagreements, "
              f"{cert.discriminations} discriminations, {cert.completeness_checked} completeness checks")
        if name == "sl2":
            mao = check_MAO(fam, cfg.mao_trials, cfg.seed)
            bad += mao.status == "fail"
            print(f"  MAO {mao.status} over {mao.samples} grid points")
        print(f"  ({time.perf_counter() - start:.1f} s)")
    return 1 if bad else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(ParahoricConfig()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    sys.exit(main(ParahoricConfig(**vars(ap.parse_args()))))
