"""Write the sample inputs under data/ (random Cartan families and an Ito pair).

Usage: python3 scripts/make_inputs.py [--out data] [--seed 0]
"""

from __future__ import annotations

import argparse
import json
import os

from cartannf.families import FamilyConfig, random_cartan_family, standard_morphisms
from cartannf.hamiltonian import integrable_family


def family_json(fam) -> dict:
    return {
        "morphism": {"Lambda": [[str(v) for v in row] for row in fam.S.Lambda]},
        "fields": [X.to_json() for X in fam.fields],
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    S = standard_morphisms()
    samples = {
        "saddle_family.json": random_cartan_family(S["saddle"], FamilyConfig(N=8), args.seed),
        "ito2_family.json": random_cartan_family(S["ito2"], FamilyConfig(N=8, orders=(1, 3)), args.seed),
    }
    for name, fam in samples.items():
        with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
            json.dump(family_json(fam), fh, indent=1)
    Hs, _ = integrable_family([["1", "7/23"], ["0", "1"]], 12, seed=args.seed + 1)
    ito = {
        "n_pairs": 2,
        "star_bound": 20,
        "hamiltonians": [H.H.to_json() for H in Hs],
    }
    with open(os.path.join(args.out, "ito_pair.json"), "w", encoding="utf-8") as fh:
        json.dump(ito, fh, indent=1)
    print(f"wrote {len(samples) + 1} files to {args.out}/")


if __name__ == "__main__":
    main()
