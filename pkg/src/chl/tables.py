"""Numerical constants attached to a symplectic automorphism of order N = 1..8 on a K3 surface."""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

LEVELS = tuple(range(1, 9))

# Euler characteristics e_d of the points with stabilizer of order d.
EULER_E_D: dict[int, dict[int, int]] = {
    1: {1: 24},
    2: {1: 8, 2: 8},
    3: {1: 6, 3: 6},
    4: {1: 4, 2: 2, 4: 4},
    5: {1: 4, 5: 4},
    6: {1: 2, 2: 2, 3: 2, 6: 2},
    7: {1: 3, 7: 3},
    8: {1: 2, 2: 1, 4: 1, 8: 2},
}

# Singular fibers of the elliptic fibration of the quotient: {n: number of I_n fibers}.
SINGULAR_FIBERS: dict[int, dict[int, int]] = {
    1: {1: 24},
    2: {1: 8, 2: 8},
    3: {1: 6, 3: 6},
    4: {4: 4, 2: 2, 1: 4},
    5: {5: 4, 1: 4},
    6: {6: 2, 3: 2, 2: 2, 1: 2},
    7: {7: 3, 1: 3},
    8: {8: 2, 4: 1, 2: 1, 1: 2},
}

# Number of fixed points and rank of the coinvariant lattice.
FIXED_POINTS: dict[int, int] = {2: 8, 3: 6, 4: 4, 5: 4, 6: 2, 7: 3, 8: 2}
COINVARIANT_RANK: dict[int, int] = {1: 0, 2: 8, 3: 12, 4: 14, 5: 16, 6: 16, 7: 18, 8: 18}


def lift_weight(N: int) -> int:
    """Weight of the multiplicative lift at level N: ceil(24 / (N + 1)) - 2."""
    return ceil(24 / (N + 1)) - 2


@dataclass(frozen=True)
class EulerTable:
    """Per-level constants: stabilizer Euler numbers, fiber types and fixed-point data."""

    N: int

    def __post_init__(self):
        if self.N not in LEVELS:
            raise ValueError(f"level {self.N} is not tabulated")

    @property
    def e_d(self) -> dict[int, int]:
        return dict(EULER_E_D[self.N])

    def e_d_open(self) -> dict[int, int]:
        """The same numbers for the complement of the fixed section: e_1 drops by 2."""
        out = dict(EULER_E_D[self.N])
        out[1] -= 2
        return out

    @property
    def fibers(self) -> dict[int, int]:
        return dict(SINGULAR_FIBERS[self.N])

    @property
    def fixed_points(self) -> int | None:
        return FIXED_POINTS.get(self.N)

    @property
    def coinvariant_rank(self) -> int:
        return COINVARIANT_RANK[self.N]

    def weighted_euler_sum(self) -> int:
        """sum_d d e_d, which is the Euler characteristic 24 of the K3 surface."""
        return sum(d * e for d, e in EULER_E_D[self.N].items())

    def plain_euler_sum(self) -> int:
        return sum(EULER_E_D[self.N].values())
