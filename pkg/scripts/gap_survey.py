"""Affine Polya-Szego and asymmetric gaps across the field presets."""

import argparse
import sys

from fracbody import harness
from fracbody.core import validate_params
from fracbody.projbody import QuadConfig
from fracbody.quadrature import BoxQuad, TGrid

FIELDS = ("gaussian", "bump", "offset_bump", "sheared_bump", "two_bump", "even_pair", "skewed")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--p", type=float, default=2.0)
    args = ap.parse_args(argv)
    quad = QuadConfig(8, BoxQuad(None, 40), TGrid(points=80))
    params = validate_params(args.n, args.s, args.p)
    print(f"{'field':>16} {'ps gap sym':>11} {'ps gap plus':>11} {'asym gap':>10}")
    ok = True
    for name in FIELDS:
        f = harness.preset_field(name, args.n)
        ps = harness.affine_ps_report(f, params, quad)
        asym = harness.asym_strengthening_report(f, params, quad)
        r, a = ps.results, asym.results
        gs = (r["sym_lhs"] - r["sym_rhs"]) / r["sym_lhs"]
        gp = (r["plus_lhs"] - r["plus_rhs"]) / r["plus_lhs"]
        ga = (a["lhs"] - a["rhs"]) / a["lhs"]
        print(f"{name:>16} {gs:11.2e} {gp:11.2e} {ga:10.2e}")
        ok &= ps.passed and asym.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
