#!/usr/bin/env python3
"""Independent implementation of the instance generator used to freeze the
golden files under crates/core/tests/data/golden/.

splitmix64 seeded with seed ^ replica; uniform integers in [a, b] by
rejection below (2^64 // r) * r; p in [1, 100] then s per job in id order.
"""
import os
import sys

MASK = (1 << 64) - 1
SIGMA = {1: (1, 10), 2: (2, 8), 3: (3, 10), 4: (1, 5)}


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self, lo, hi):
        r = hi - lo + 1
        zone = ((1 << 64) // r) * r
        while True:
            x = self.next()
            if x < zone:
                return lo + x % r


def instance_text(n, m, cap, sigma, seed, replica):
    rng = SplitMix64(seed ^ replica)
    lo, hi = SIGMA[sigma]
    lines = [f"{n} {m} {cap}"]
    for _ in range(n):
        p = rng.uniform(1, 100)
        s = rng.uniform(lo, hi)
        lines.append(f"{p} {s}")
    return "\n".join(lines) + "\n"


CASES = [
    # n, m, C, sigma, seed, replica
    (20, 1, 10, 1, 0, 0),
    (20, 1, 10, 4, 0, 3),
    (15, 2, 30, 2, 42, 1),
    (50, 1, 50, 3, 42, 9),
    (12, 3, 10, 4, 0xDEADBEEFCAFEF00D, 5),
]


def main():
    out = sys.argv[1]
    os.makedirs(out, exist_ok=True)
    for n, m, cap, sigma, seed, replica in CASES:
        name = f"n{n}_sigma{sigma}_c{cap}_m{m}_seed{seed}_r{replica}.txt"
        with open(os.path.join(out, name), "w", newline="\n") as f:
            f.write(instance_text(n, m, cap, sigma, seed, replica))


if __name__ == "__main__":
    main()
