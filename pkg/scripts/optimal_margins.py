"""Energy margins of random star bodies over the optimal Sobolev body."""

import argparse
import sys

from fracbody import harness
from fracbody.core import validate_params
from fracbody.projbody import QuadConfig
from fracbody.quadrature import BoxQuad, TGrid


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--field", default="skewed")
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--candidates", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    quad = QuadConfig(8, BoxQuad(None, 40), TGrid(points=80))
    params = validate_params(args.n, args.s, args.p)
    rep = harness.optimal_body_report(harness.preset_field(args.field, args.n), params, args.candidates, args.seed, quad)
    r = rep.results
    print(f"optimal energy {r['energy_optimal']:.6f}  violations {r['violations']}")
    print(f"margin min {r['margin_min']:.3e}  median {r['margin_median']:.3e}  max {r['margin_max']:.3e}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
