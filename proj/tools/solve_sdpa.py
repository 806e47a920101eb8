#!/usr/bin/env python3
"""Independent check of an exported .dat-s file.

Parses SDPA sparse format and solves the embedded problem with cvxpy in the
form the exporter uses: the file's dual pair

    maximize tr(F0 Y)  s.t.  tr(Fi Y) = c_i,  Y >= 0 (blockwise)

whose optimum equals the negated minimum of the source problem. Prints that
source minimum on stdout.
"""

import argparse
import sys

import numpy as np


def parse_dats(path):
    tokens = []
    with open(path) as f:
        for line in f:
            line = line.split("*")[0].split('"')[0]
            tokens.extend(line.replace(",", " ").split())
    it = iter(tokens)
    m = int(next(it))
    nblock = int(next(it))
    sizes = [int(next(it)) for _ in range(nblock)]
    c = np.array([float(next(it)) for _ in range(m)])
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    while True:
        try:
            mat = int(next(it))
        except StopIteration:
            break
        blk, i, j, v = int(next(it)), int(next(it)), int(next(it)), float(next(it))
        mats[mat][blk - 1][i - 1, j - 1] = v
        mats[mat][blk - 1][j - 1, i - 1] = v
    return m, sizes, c, mats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("file")
    ap.add_argument("--solver", default="SCS")
    args = ap.parse_args()

    import cvxpy as cp

    m, sizes, c, mats = parse_dats(args.file)
    Ys, cons = [], []
    for s in sizes:
        if s < 0:
            y = cp.Variable(-s)
            cons.append(y >= 0)
            Ys.append(cp.diag(y))
        else:
            Y = cp.Variable((s, s), PSD=True)
            Ys.append(Y)
    obj = sum(cp.trace(mats[0][k] @ Ys[k]) for k in range(len(sizes)))
    for i in range(m):
        cons.append(
            sum(cp.trace(mats[i + 1][k] @ Ys[k]) for k in range(len(sizes))) == c[i]
        )
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver=args.solver, verbose=False)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        print(f"status: {prob.status}", file=sys.stderr)
        return 1
    print(f"{-prob.value:.10g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
