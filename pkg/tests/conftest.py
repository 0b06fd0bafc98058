from fractions import Fraction

import numpy as np
import pytest


def brute_force_grid(n, box_fits, ranges):
    """Enumerate lattice indices with a plain Python loop and an exact box test.

    ``box_fits(lo, hi)`` receives the closed box corners as Fractions.
    """
    out = []
    for i in range(ranges[0][0], ranges[0][1] + 1):
        for j in range(ranges[1][0], ranges[1][1] + 1):
            lo = (Fraction(i - 1, n[0]), Fraction(j - 1, n[1]))
            hi = (Fraction(i + 1, n[0]), Fraction(j + 1, n[1]))
            if box_fits(lo, hi):
                out.append((i, j))
    return out


def cusp_box_fits(lo, hi):
    # g is nonincreasing, so the top edge is tightest at the right end
    g = Fraction(1) if hi[0] <= 1 else 1 / hi[0] ** 2
    return lo[0] >= 0 and lo[1] >= 0 and hi[1] <= g


def disk_box_fits(lo, hi, c=Fraction(1, 2), r=Fraction(1, 2)):
    far = [max(abs(lo[k] - c), abs(hi[k] - c)) for k in range(2)]
    return far[0] ** 2 + far[1] ** 2 <= r * r


def square_box_fits(lo, hi):
    return min(lo) >= 0 and max(hi) <= 1


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
