"""Print the per-step estimate checks for small and large random families.

Usage: python3 scripts/estimates_demo.py [--seeds 3]
"""

from __future__ import annotations

import argparse

from gmpy2 import mpq

from cartannf.families import FamilyConfig, random_cartan_family, standard_morphisms
from cartannf.normalizer import Mode, normalize_family


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args()
    morph = standard_morphisms()
    for scale in (mpq(1, 1000), mpq(1)):
        for name, orders in [("saddle", (1,)), ("ito2", (1, 1)), ("ito2", (1, 3))]:
            for seed in range(args.seeds):
                fam = random_cartan_family(morph[name], FamilyConfig(N=8, orders=orders, scale=scale), seed)
                _, _, rep = normalize_family(fam.fields, fam.S, 8, Mode.NEWTON, estimates=True)
                for e in rep.estimates:
                    status = "unmet" if e["hypotheses_unmet"] or e["error"] else ("holds" if e["all_hold"] else "FAILS")
                    print(f"scale={str(scale):<7}{name}{list(orders)} seed={seed} m={e.get('m')}: {status}")


if __name__ == "__main__":
    main()
