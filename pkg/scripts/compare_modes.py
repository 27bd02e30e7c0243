"""Run stepwise and Newton normalization on random Cartan families and compare.

Usage: python3 scripts/compare_modes.py [--order 16] [--seeds 3]
"""

from __future__ import annotations

import argparse
import time

from cartannf.families import FamilyConfig, random_cartan_family, standard_morphisms
from cartannf.normalizer import Mode, normalize_family

CASES = [("saddle", (1,)), ("resonant3", (1,)), ("ito2", (1, 1)), ("ito2", (1, 3))]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--order", type=int, default=16)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()
    morph = standard_morphisms()
    print(f"{'family':<18}{'seed':>5}{'mode':>10}{'steps':>7}{'normal':>8}{'master':>8}{'time':>9}")
    for name, orders in CASES:
        N = args.order if len(orders) == 1 else min(args.order, 8)
        for seed in range(args.seeds):
            fam = random_cartan_family(morph[name], FamilyConfig(N=N, orders=orders), seed)
            for mode in Mode:
                t0 = time.perf_counter()
                _, _, rep = normalize_family(fam.fields, fam.S, N, mode)
                dt = time.perf_counter() - t0
                label = f"{name}{list(orders)}"
                print(f"{label:<18}{seed:>5}{mode.value:>10}{len(rep.steps):>7}"
                      f"{str(rep.normalized):>8}{str(rep.master_invariant):>8}{dt:>8.2f}s")


if __name__ == "__main__":
    main()
