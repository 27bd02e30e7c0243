"""Normalize x^2 d/dx + (x + y) d/dy and print the (k-1)! coefficients.

Usage: python3 scripts/two_dim_example.py [--order 12]
"""

from __future__ import annotations

import argparse
from math import factorial

from cartannf.fields import VectorField, pullback
from cartannf.normalizer import Gauge, poincare_dulac_normalize


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--order", type=int, default=12)
    args = ap.parse_args()
    N = args.order
    # diagonal coordinates u = x, v = x + y
    X = VectorField.from_terms({((2, 0), 0): 1, ((2, 0), 1): 1, ((0, 1), 1): 1}, 2, N)
    NF, psi = poincare_dulac_normalize(X, gauge=Gauge.ZERO_ON_KERNEL)
    print("normal form:", NF)
    print("conjugation exact:", pullback(psi, X) == NF)
    v = psi.components[1]
    for k in range(2, N + 1):
        c = v.coeff((k, 0))
        print(f"k={k:2d}  coefficient {str(c):>12}  (k-1)! = {factorial(k - 1)}")


if __name__ == "__main__":
    main()
