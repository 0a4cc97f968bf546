"""Small symmetric-group helpers shared by the Fock-space and projector code.

Permutations are tuples ``p`` of length n with ``p[i]`` the image of slot i.
"""

from __future__ import annotations

import itertools
from functools import lru_cache


@lru_cache(maxsize=None)
def all_permutations(n: int) -> tuple[tuple[int, ...], ...]:
    """All permutations of range(n) in lexicographic order."""
    return tuple(itertools.permutations(range(n)))


def compose(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    """(a o b)[i] = a[b[i]]: apply b first, then a."""
    return tuple(a[b[i]] for i in range(len(b)))


def inverse(p: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, pi in enumerate(p):
        inv[pi] = i
    return tuple(inv)


def inversions(p: tuple[int, ...]) -> int:
    """Number of pairs i < j with p[i] > p[j]."""
    return sum(
        1
        for i, j in itertools.combinations(range(len(p)), 2)
        if p[i] > p[j]
    )


def cycle_type(p: tuple[int, ...]) -> tuple[int, ...]:
    """Cycle lengths of p, sorted descending (a partition of n)."""
    seen = [False] * len(p)
    lengths = []
    for start in range(len(p)):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = p[i]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))
