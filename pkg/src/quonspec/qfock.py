"""q-deformed Fock space built on the q-mutator a_k a+_l - q a+_l a_k = delta_kl.

Inner products between creation-operator words are evaluated by recursive
normal ordering against the vacuum (a_k|0> = 0).  For n distinct modes the
resulting Gram matrix over the n! orderings equals q**inv(sigma^-1 tau),
which the tests use as an independent closed-form route.

Arithmetic is exact (Python ints) for q in {-1, 0, 1}; double precision
otherwise.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from ._permutations import all_permutations, compose, inverse, inversions

N_MAX_DEFAULT = 6  # 6! = 720-dimensional Gram matrix; beyond is a hard error

FockWord = tuple  # ordered mode labels applied to the vacuum; () is |0>


class CapExceededError(ValueError):
    """Requested particle number exceeds the configured factorial cap."""


@dataclass(frozen=True)
class QParameter:
    """Deformation parameter, restricted to the closed interval [-1, 1]."""

    value: float

    def __post_init__(self):
        v = self.value
        if not np.isfinite(v) or not -1.0 <= v <= 1.0:
            raise ValueError(f"q must lie in [-1, 1], got {v!r}")

    @property
    def scalar(self):
        """int for the exact endpoints/zero, float otherwise."""
        if self.value in (-1.0, 0.0, 1.0):
            return int(self.value)
        return float(self.value)


def _as_q(q) -> QParameter:
    return q if isinstance(q, QParameter) else QParameter(float(q))


def _check_word(word: Iterable[int]) -> tuple:
    w = tuple(word)
    for m in w:
        if not isinstance(m, (int, np.integer)) or m < 0:
            raise ValueError(f"mode labels must be non-negative integers, got {m!r}")
    return tuple(int(m) for m in w)


@lru_cache(maxsize=None)
def _contract(bra: tuple, ket: tuple, q):
    # <0| a_{bra[-1]}..a_{bra[0]} a+_{ket[0]}..a+_{ket[-1]} |0>.
    # Commuting a_{bra[0]} past j creators costs a factor q**j, then it
    # either contracts (delta) or dies on the vacuum.
    if not bra:
        return 1
    total = 0
    qpow = 1
    first = bra[0]
    for j, mode in enumerate(ket):
        if mode == first:
            total += qpow * _contract(bra[1:], ket[:j] + ket[j + 1 :], q)
        qpow = qpow * q
    return total


def inner_product(bra: Iterable[int], ket: Iterable[int], q) -> float:
    """Vacuum expectation <bra|ket> under the q-mutator algebra.

    Words of unequal length return 0 (particle-number conservation).
    """
    b = _check_word(bra)
    k = _check_word(ket)
    if len(b) != len(k):
        return 0
    return _contract(b, k, _as_q(q).scalar)


def q_power_inversions(sigma: tuple, tau: tuple, q) -> float:
    """Closed form q**inv(sigma^-1 tau); the independent check on contraction."""
    return _as_q(q).scalar ** inversions(compose(inverse(sigma), tau))


@dataclass(frozen=True)
class FockState:
    """Linear combination of equal-length Fock words."""

    terms: Mapping[tuple, complex]

    def __post_init__(self):
        cleaned = {}
        length = None
        for word, coeff in self.terms.items():
            w = _check_word(word)
            if length is None:
                length = len(w)
            elif len(w) != length:
                raise ValueError("FockState words must all have the same length")
            if coeff != 0:
                cleaned[w] = complex(coeff)
        object.__setattr__(self, "terms", cleaned)

    @property
    def n_particles(self) -> int:
        return len(next(iter(self.terms))) if self.terms else 0

    def is_zero(self) -> bool:
        return not self.terms


def state_norm2(state: FockState, q) -> float:
    """Squared norm sum_{w,w'} conj(c_w) c_w' <w|w'> at the given q."""
    qq = _as_q(q)
    total = 0.0 + 0.0j
    for w, cw in state.terms.items():
        for wp, cwp in state.terms.items():
            total += np.conj(cw) * cwp * inner_product(w, wp, qq)
    return float(total.real)


@dataclass(frozen=True)
class GramMatrix:
    """Inner products among the n! orderings of n distinct modes."""

    n: int
    q: float
    entries: np.ndarray
    permutations: tuple

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def to_json(self) -> str:
        return json.dumps(
            {"n": self.n, "q": self.q, "entries": self.entries.tolist()},
            sort_keys=True,
        )

    def to_csv(self) -> str:
        lines = [",".join(repr(float(v)) for v in row) for row in self.entries]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PositivityReport:
    n: int
    q: float
    tol: float
    min_eigenvalue: float
    is_psd: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "q": self.q,
                "tol": self.tol,
                "min_eigenvalue": self.min_eigenvalue,
                "is_psd": self.is_psd,
            },
            sort_keys=True,
        )


def _check_cap(n: int, n_max: int):
    if n < 1:
        raise ValueError(f"particle number must be >= 1, got {n}")
    if n > n_max:
        raise CapExceededError(
            f"n={n} exceeds the cap n_max={n_max} ({n}! = {math.factorial(n)}-dim Gram matrix)"
        )


def gram_matrix(n: int, q, n_max: int = N_MAX_DEFAULT, method: str = "contraction") -> GramMatrix:
    """Gram matrix of the n! words over n distinct modes.

    method="contraction" evaluates every entry by recursive normal
    ordering; method="closed_form" uses q**inv(sigma^-1 tau) directly.
    Both must agree (tested), the closed form is just cheaper.
    """
    _check_cap(n, n_max)
    qq = _as_q(q)
    perms = all_permutations(n)
    d = len(perms)
    entries = np.empty((d, d), dtype=float)
    if method == "contraction":
        for i, sigma in enumerate(perms):
            for j in range(i, d):
                val = inner_product(sigma, perms[j], qq)
                entries[i, j] = entries[j, i] = val
    elif method == "closed_form":
        for i, sigma in enumerate(perms):
            sigma_inv = inverse(sigma)
            for j in range(i, d):
                val = qq.scalar ** inversions(compose(sigma_inv, perms[j]))
                entries[i, j] = entries[j, i] = val
    else:
        raise ValueError(f"unknown method {method!r}")
    return GramMatrix(n=n, q=float(qq.value), entries=entries, permutations=perms)


def check_positivity(n: int, q, tol: float = 1e-10, n_max: int = N_MAX_DEFAULT) -> PositivityReport:
    """Minimum Gram eigenvalue and a PSD verdict at tolerance tol."""
    gram = gram_matrix(n, q, n_max=n_max)
    min_eig = float(gram.eigenvalues().min())
    return PositivityReport(
        n=n, q=float(_as_q(q).value), tol=tol, min_eigenvalue=min_eig, is_psd=min_eig >= -tol
    )


# Theory relates the violation weight to q, but the map depends on the
# physical system; it stays a user-supplied hook rather than a built-in.
_q_to_violation_hook = None


def register_q_violation_map(fn) -> None:
    """Install a callable q -> beta2_half used by beta2_half_from_q."""
    global _q_to_violation_hook
    _q_to_violation_hook = fn


def beta2_half_from_q(q) -> float:
    if _q_to_violation_hook is None:
        raise LookupError(
            "no q -> beta2_half map registered; call register_q_violation_map first"
        )
    return float(_q_to_violation_hook(_as_q(q).value))
