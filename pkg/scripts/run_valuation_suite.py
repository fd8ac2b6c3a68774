"""Valuation, root-datum and nu checks on the classical and loop instances."""
import argparse
import sys
import time
from dataclasses import asdict, dataclass

from hovelkit.group_instances import INSTANCES
from hovelkit.valuated_datum import check_nu_homomorphism, check_nu_reflections, check_RD_axioms, check_valuation


@dataclass
class SuiteConfig:
    instances: str = "sl2,sl3,loop_sl2"
    p: int = 2
    samples: int = 500
    seed: int = 0


def main(cfg: SuiteConfig) -> int:
    print(asdict(cfg))
    bad = 0
    for name in cfg.instances.split(","):
        inst = INSTANCES[name](cfg.p)
        start = time.perf_counter()
        reps = check_valuation(inst, cfg.samples, cfg.seed)
        if name != "loop_sl2":
            reps += check_RD_axioms(inst, cfg.samples, cfg.seed)
        reps += [check_nu_reflections(inst, 50, cfg.seed), check_nu_homomorphism(inst, 50, cfg.seed)]
        print(f"== {name} ({time.perf_counter() - start:.1f} s)")
        for r in reps:
            bad += r.status == "fail"
            note = f"  [{r.reason}]" if r.reason else ""
            print(f"  {r.axiom:20s} {r.status:13s} {r.samples:6d}{note}")
    return 1 if bad else 0


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(SuiteConfig()).items():
        ap.add_argument(f"--{name}", type=type(default), default=default)
    sys.exit(main(SuiteConfig(**vars(ap.parse_args()))))
