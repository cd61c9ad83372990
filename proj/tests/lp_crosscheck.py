"""Solve exported LP files with SciPy's HiGHS and compare objectives.

Usage: lp_crosscheck.py <dump-executable> <work-dir>
"""
import math
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import linprog

TOKEN = re.compile(r"\S+")


def parse_terms(tokens):
    terms, sign, coef = {}, 1.0, None
    for t in tokens:
        if t == "+":
            sign = 1.0
        elif t == "-":
            sign = -1.0
        else:
            try:
                coef = float(t)
                continue
            except ValueError:
                pass
            terms[t] = terms.get(t, 0.0) + sign * (1.0 if coef is None else coef)
            sign, coef = 1.0, None
    return terms


def parse_lp(text):
    section, obj, rows, upper, names = None, {}, [], {}, []

    def note(ts):
        for n in ts:
            if n not in names:
                names.append(n)

    for line in text.splitlines():
        tok = TOKEN.findall(line)
        if not tok:
            continue
        if tok[0] == "maximize":
            section = "obj"
            continue
        if tok[:2] == ["subject", "to"]:
            section = "rows"
            continue
        if tok[0] == "bounds":
            section = "bounds"
            continue
        if tok[0] == "end":
            break
        if tok[0].endswith(":"):
            tok = tok[1:]
        ops = [i for i, t in enumerate(tok) if t in ("<=", ">=", "=")]
        if section == "obj":
            obj = parse_terms(tok)
            note(obj)
        elif section == "rows":
            i = ops[0]
            terms = parse_terms(tok[:i])
            note(terms)
            rows.append((terms, tok[i], float(tok[i + 1])))
        elif section == "bounds":
            upper[tok[0]] = float(tok[2])
            note([tok[0]])
        else:
            raise ValueError("content outside a section: " + line)
    return names, obj, rows, upper


def solve(text):
    names, obj, rows, upper = parse_lp(text)
    if not names:
        return 0.0
    idx = {n: i for i, n in enumerate(names)}
    c = np.zeros(len(names))
    for n, v in obj.items():
        c[idx[n]] = -v
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for terms, op, rhs in rows:
        row = np.zeros(len(names))
        for n, v in terms.items():
            row[idx[n]] = v
        if op == "<=":
            a_ub.append(row)
            b_ub.append(rhs)
        elif op == ">=":
            a_ub.append(-row)
            b_ub.append(-rhs)
        else:
            a_eq.append(row)
            b_eq.append(rhs)
    bounds = [(0.0, upper.get(n)) for n in names]
    res = linprog(c, A_ub=a_ub or None, b_ub=b_ub or None, A_eq=a_eq or None, b_eq=b_eq or None,
                  bounds=bounds, method="highs")
    if res.status != 0:
        raise RuntimeError(res.message)
    return -res.fun


def main():
    exe, work = sys.argv[1], Path(sys.argv[2])
    subprocess.run([exe, str(work)], check=True)
    bad = 0
    lines = (work / "expected.txt").read_text().splitlines()
    for line in lines:
        name, ours = line.split()
        ours = float(ours)
        theirs = solve((work / (name + ".lp")).read_text())
        rel = abs(ours - theirs) / max(1.0, abs(theirs))
        ok = rel <= 1e-6
        bad += not ok
        print(f"{'ok ' if ok else 'BAD'} {name}: qdist {ours:.10g} highs {theirs:.10g} rel {rel:.2e}")
    print(f"{len(lines) - bad}/{len(lines)} agree")
    return 1 if bad or not lines else 0


if __name__ == "__main__":
    sys.exit(main())
