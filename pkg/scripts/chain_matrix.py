"""Sobolev chain over the 5-field x 3-parameter matrix; one CSV row per run."""

import argparse
import csv
import sys

from fracbody import harness
from fracbody.core import validate_params
from fracbody.projbody import QuadConfig
from fracbody.quadrature import BoxQuad, TGrid

FIELDS = ("gaussian", "bump", "offset_bump", "skewed", "sheared_gaussian")
PARAMS = ((0.5, 2.0), (0.3, 3.0), (0.7, 1.5))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--level", type=int, default=8)
    ap.add_argument("--box-points", type=int, default=40)
    ap.add_argument("--t-points", type=int, default=80)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)
    quad = QuadConfig(args.level, BoxQuad(None, args.box_points), TGrid(points=args.t_points))
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(["field", "s", "p", "A", "B", "C", "C_identity", "margin", "passed"])
    ok = True
    for s, p in PARAMS:
        params = validate_params(args.n, s, p)
        for name in FIELDS:
            rep = harness.sobolev_chain_report(harness.preset_field(name, args.n), params, quad)
            r = rep.results
            w.writerow([name, s, p, r["A"], r["B"], r["C"], r["C_identity"], (r["C"] - r["B"]) / r["C"], int(rep.passed)])
            fh.flush()
            ok &= rep.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
