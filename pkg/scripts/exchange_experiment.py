"""Experiment: filtration/image exchange for special triangular matrices.

Draws random block matrices that are special lower-triangular of type s and
checks M(Fil^{i+s}) = im(M) cap Fil^i for every admissible i; also shows that
a merely triangular (non-special) control violates the exchange.

Usage: python scripts/exchange_experiment.py [--count 200] [--seed 0]
"""

import argparse

import numpy as np

from loghodge.fplin import PrimeMatrix
from loghodge.modcx import fil_image_exchange, special_triangular_check


def random_special(rng, p, max_size=12):
    """Random (matrix, partition, s) with verdict 'special'."""
    while True:
        parts = int(rng.integers(2, 5))
        partition = [int(rng.integers(1, 4)) for _ in range(parts)]
        if sum(partition) > max_size:
            continue
        s = int(rng.integers(0, parts))
        d = sum(partition)
        offs = np.concatenate([[0], np.cumsum(partition)])
        a = np.zeros((d, d), dtype=np.int64)
        # dense type-s superdiagonal blocks plus sparse entries in the lower
        # blocks, accepted only when the rank condition actually holds
        for i in range(parts):
            for j in range(parts):
                if j - i > s:
                    continue
                rows = slice(offs[i], offs[i + 1])
                cols = slice(offs[j], offs[j + 1])
                block = rng.integers(0, p, size=(partition[i], partition[j]))
                if j - i < s:
                    block *= rng.random(block.shape) < 0.25
                a[rows, cols] = block
        m = PrimeMatrix(p, a)
        if special_triangular_check(m, partition, s) == "special":
            return m, partition, s


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    bad = 0
    for _ in range(args.count):
        p = int(rng.choice([3, 5, 7]))
        m, partition, s = random_special(rng, p)
        for i in range(0, len(partition) - s):
            if not fil_image_exchange(m, partition, s, i).equal:
                bad += 1
                print(f"exchange FAILED: p={p} partition={partition} s={s} i={i}")
    print(f"{args.count} special matrices checked, {bad} exchange failures")

    # non-special control: triangular of type 1 with a rank defect
    a = np.array([[1, 0], [0, 0]], dtype=np.int64)
    m = PrimeMatrix(3, a)
    verdict = special_triangular_check(m, (1, 1), 1)
    r = fil_image_exchange(m, (1, 1), 1, 0)
    print(f"control: verdict={verdict} exchange_equal={r.equal} "
          f"(dims {r.dim_image_of_fil} vs {r.dim_image_cap_fil})")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
