"""p(1-s) * energy along an s-sweep against the gradient-energy limit."""

import argparse
import sys

import numpy as np

from fracbody import harness
from fracbody.projbody import QuadConfig
from fracbody.quadrature import BoxQuad, TGrid
from fracbody.starbody import ball, ellipsoid


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--field", default="gaussian")
    ap.add_argument("--body", choices=["ball", "ellipse"], default="ball")
    ap.add_argument("--s", type=float, nargs="+", default=[0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.98])
    args = ap.parse_args(argv)
    quad = QuadConfig(8, BoxQuad(None, 40), TGrid(points=80))
    grid = quad.grid(args.n)
    K = ball(grid) if args.body == "ball" else ellipsoid(grid, np.diag([1.3, 1 / 1.3, 1.0][: args.n]))
    rep = harness.bbm_limit_report(harness.preset_field(args.field, args.n), K, args.p, args.s, quad)
    print(f"target {rep.results['target']:.6f}")
    print(f"{'s':>6} {'scaled energy':>14} {'residual':>10} {'rel':>8}")
    for r in rep.rows:
        print(f"{r['s']:6.3f} {r['scaled_energy']:14.6f} {r['residual']:10.6f} {r['residual'] / r['target']:8.2%}")
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
