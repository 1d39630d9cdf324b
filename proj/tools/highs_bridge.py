#!/usr/bin/env python3
"""Solve an MPS file with HiGHS (through scipy) and write a JSON solution.

usage: highs_bridge.py MODEL.mps OUT.json [method=highs-ipm] [presolve=true] [time_limit=SECONDS]

Row duals are written as d(objective)/d(rhs): >= rows nonnegative, <= rows
nonpositive. Names may be longer than 8 characters; records are split on
whitespace.
"""

import json
import math
import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix


def parse_mps(path):
    rows = {}          # name -> (index, sense)
    row_order = []
    obj_name = None
    cols = {}
    col_order = []
    obj = []
    entries = []       # (row index, col index, value)
    rhs = {}
    lower, upper = [], []
    section = None

    def col_index(name):
        if name not in cols:
            cols[name] = len(col_order)
            col_order.append(name)
            obj.append(0.0)
            lower.append(0.0)
            upper.append(math.inf)
        return cols[name]

    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("*"):
                continue
            if not line[0].isspace():
                section = line.split()[0]
                if section == "ENDATA":
                    break
                if section in ("RANGES", "SOS") or "MARKER" in line:
                    raise ValueError("unsupported MPS section " + section)
                continue
            tok = line.split()
            if section == "ROWS":
                sense, name = tok
                if sense == "N":
                    if obj_name is None:
                        obj_name = name
                    continue
                rows[name] = (len(row_order), sense)
                row_order.append(name)
            elif section == "COLUMNS":
                if "'MARKER'" in tok:
                    raise ValueError("integer markers are not supported")
                j = col_index(tok[0])
                for k in range(1, len(tok) - 1, 2):
                    rname, val = tok[k], float(tok[k + 1])
                    if rname == obj_name:
                        obj[j] += val
                    elif rname in rows:
                        entries.append((rows[rname][0], j, val))
                    else:
                        raise ValueError("unknown row " + rname)
            elif section == "RHS":
                for k in range(1, len(tok) - 1, 2):
                    if tok[k] == obj_name:
                        continue
                    rhs[rows[tok[k]][0]] = float(tok[k + 1])
            elif section == "BOUNDS":
                kind, col = tok[0], tok[2]
                j = col_index(col)
                val = float(tok[3]) if len(tok) > 3 else 0.0
                if kind == "UP":
                    upper[j] = val
                elif kind == "LO":
                    lower[j] = val
                elif kind == "FX":
                    lower[j] = upper[j] = val
                elif kind == "FR":
                    lower[j], upper[j] = -math.inf, math.inf
                elif kind == "MI":
                    lower[j] = -math.inf
                elif kind == "PL":
                    upper[j] = math.inf
                else:
                    raise ValueError("unsupported bound type " + kind)
    senses = [rows[name][1] for name in row_order]
    b = np.array([rhs.get(i, 0.0) for i in range(len(row_order))])
    return np.array(obj), entries, senses, b, lower, upper


def main(argv):
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    mps, out = argv[1], argv[2]
    opts = {"method": "highs-ipm", "presolve": "true"}
    for kv in argv[3:]:
        key, _, value = kv.partition("=")
        opts[key] = value

    c, entries, senses, b, lower, upper = parse_mps(mps)
    m, n = len(senses), len(c)
    ub_rows = [i for i, s in enumerate(senses) if s in ("L", "G")]
    eq_rows = [i for i, s in enumerate(senses) if s == "E"]
    ub_pos = {i: k for k, i in enumerate(ub_rows)}
    eq_pos = {i: k for k, i in enumerate(eq_rows)}
    sign = np.array([-1.0 if s == "G" else 1.0 for s in senses])

    def block(positions, size):
        data, ri, ci = [], [], []
        for i, j, v in entries:
            if i in positions:
                data.append(v * sign[i])
                ri.append(positions[i])
                ci.append(j)
        return csr_matrix((data, (ri, ci)), shape=(size, n))

    a_ub = block(ub_pos, len(ub_rows)) if ub_rows else None
    b_ub = np.array([b[i] * sign[i] for i in ub_rows]) if ub_rows else None
    a_eq = block(eq_pos, len(eq_rows)) if eq_rows else None
    b_eq = np.array([b[i] for i in eq_rows]) if eq_rows else None
    bounds = [(None if math.isinf(lo) else lo, None if math.isinf(hi) else hi)
              for lo, hi in zip(lower, upper)]
    options = {"presolve": opts["presolve"] == "true"}
    if "time_limit" in opts:
        options["time_limit"] = float(opts["time_limit"])

    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                  method=opts["method"], options=options)
    status = {0: "Optimal", 2: "Infeasible", 3: "Unbounded"}.get(res.status, "Error")
    result = {"status": status, "message": str(res.message),
              "iterations": int(getattr(res, "nit", 0) or 0)}
    if status == "Optimal":
        y = np.zeros(m)
        if ub_rows:
            y[ub_rows] = np.asarray(res.ineqlin.marginals) * sign[ub_rows]
        if eq_rows:
            y[eq_rows] = np.asarray(res.eqlin.marginals)
        result["objective"] = float(res.fun)
        result["x"] = [float(v) for v in res.x]
        result["y"] = [float(v) + 0.0 for v in y]
    with open(out, "w") as fh:
        json.dump(result, fh)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
