#!/usr/bin/env python3
"""Reference values for the arc-flow master LP over *all* feasible arcs.

Enumerates every capacity-feasible batch, places it at every position on
every machine, adds the empty placeholder arcs when m > 1 and solves the
complete LP with HiGHS. At convergence column generation must reach the
same optimum, so these values serve as fixtures for the Rust tests.

Output lines: `C m value p1:s1 p2:s2 ...`
"""
import itertools
import random
import sys

import numpy as np
from scipy.optimize import linprog


def full_master_lp(jobs, cap, m):
    n = len(jobs)
    batches = []
    for r in range(1, n + 1):
        for combo in itertools.combinations(range(n), r):
            if sum(jobs[j][1] for j in combo) <= cap:
                batches.append(combo)
    cols = []  # (machine, tail, head, batch)
    for h in range(m):
        for b in batches:
            for i in range(1, n - len(b) + 2):
                cols.append((h, i, i + len(b), b))
        if m > 1:
            for k in range(2, n + 2):
                cols.append((h, 1, k, ()))
    rows = m * (n + 1) + n
    a = np.zeros((rows, len(cols)))
    cost = np.zeros(len(cols))
    for c, (h, i, k, b) in enumerate(cols):
        if b:
            cost[c] = (n - i + 1) * max(jobs[j][0] for j in b)
        a[h * (n + 1) + i - 1, c] += 1
        a[h * (n + 1) + k - 1, c] -= 1
        for j in b:
            a[m * (n + 1) + j, c] = 1
    rhs = np.zeros(rows)
    for h in range(m):
        rhs[h * (n + 1)] = 1
        rhs[h * (n + 1) + n] = -1
    rhs[m * (n + 1):] = 1
    res = linprog(cost, A_eq=a, b_eq=rhs, bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return res.fun


def main():
    rng = random.Random(int(sys.argv[1]) if len(sys.argv) > 1 else 2024)
    cases = [([(5, 6), (3, 5), (2, 4)], 10, 1), ([(5, 6), (3, 5), (2, 4)], 10, 2)]
    for _ in range(40):
        n = rng.randint(3, 7)
        m = rng.choice([1, 1, 2])
        jobs = [(rng.randint(1, 30), rng.randint(1, 10)) for _ in range(n)]
        cases.append((jobs, 10, m))
    for jobs, cap, m in cases:
        value = full_master_lp(jobs, cap, m)
        print(cap, m, f"{value:.9f}", " ".join(f"{p}:{s}" for p, s in jobs))


if __name__ == "__main__":
    main()
