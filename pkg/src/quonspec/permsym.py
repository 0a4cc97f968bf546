"""Permutation-symmetry machinery on the n!-dimensional ordering space.

Central projectors P_lam = (d_lam/n!) sum_sigma chi_lam(sigma) M(sigma) are
built from embedded S_n character tables (n = 2..4); M(sigma) is the left
regular action on orderings of n distinct labels.  The same space hosts the
violation mixture rho = (1 - x) rho_s + x rho_a and the superselection
drift check for exchange-symmetric Hamiltonians.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, Sequence

import numpy as np

from ._permutations import all_permutations, compose, cycle_type
from .qfock import FockState

PROJECTOR_TOL = 1e-10
SECTOR_TOL = 1e-10
COMMUTATOR_TOL = 1e-10


class DimensionMismatchError(ValueError):
    """Matrix dimension does not match the n! ordering space."""


class SectorSupportError(ValueError):
    """Density matrix leaks outside its required symmetry sector."""


class NonCommutingHamiltonianError(ValueError):
    """Hamiltonian fails to commute with the slot-permutation action."""


# chi[partition][cycle_type]; integer character tables of S_2..S_4.
# Cross-checked in the tests against a brute-force class-enumeration oracle.
CHARACTER_TABLES: Dict[int, Dict[tuple, Dict[tuple, int]]] = {
    2: {
        (2,): {(1, 1): 1, (2,): 1},
        (1, 1): {(1, 1): 1, (2,): -1},
    },
    3: {
        (3,): {(1, 1, 1): 1, (2, 1): 1, (3,): 1},
        (2, 1): {(1, 1, 1): 2, (2, 1): 0, (3,): -1},
        (1, 1, 1): {(1, 1, 1): 1, (2, 1): -1, (3,): 1},
    },
    4: {
        (4,): {(1, 1, 1, 1): 1, (2, 1, 1): 1, (2, 2): 1, (3, 1): 1, (4,): 1},
        (3, 1): {(1, 1, 1, 1): 3, (2, 1, 1): 1, (2, 2): -1, (3, 1): 0, (4,): -1},
        (2, 2): {(1, 1, 1, 1): 2, (2, 1, 1): 0, (2, 2): 2, (3, 1): -1, (4,): 0},
        (2, 1, 1): {(1, 1, 1, 1): 3, (2, 1, 1): -1, (2, 2): -1, (3, 1): 0, (4,): 1},
        (1, 1, 1, 1): {(1, 1, 1, 1): 1, (2, 1, 1): -1, (2, 2): 1, (3, 1): 1, (4,): -1},
    },
}


def partitions_of(n: int) -> tuple:
    """Partitions of n in descending lexicographic order ([n] first)."""

    def gen(remaining, cap):
        if remaining == 0:
            yield ()
            return
        for first in range(min(cap, remaining), 0, -1):
            for rest in gen(remaining - first, first):
                yield (first,) + rest

    return tuple(gen(n, n))


def partition_label(partition: Sequence[int]) -> str:
    return "[" + ",".join(str(p) for p in partition) + "]"


@lru_cache(maxsize=None)
def permutation_matrices(n: int) -> dict:
    """Left-regular permutation action M(sigma) e_tau = e_{sigma o tau}."""
    perms = all_permutations(n)
    index = {p: i for i, p in enumerate(perms)}
    d = len(perms)
    mats = {}
    for sigma in perms:
        m = np.zeros((d, d))
        for tau in perms:
            m[index[compose(sigma, tau)], index[tau]] = 1.0
        mats[sigma] = m
    return mats


@dataclass(frozen=True)
class SymmetryProjector:
    """Central projector onto one permutation-symmetry class."""

    partition: tuple
    matrix: np.ndarray

    def __post_init__(self):
        p = self.matrix
        if np.max(np.abs(p @ p - p)) > PROJECTOR_TOL:
            raise ValueError(f"projector for {self.partition} is not idempotent")

    @property
    def irrep_dimension(self) -> int:
        n = sum(self.partition)
        return CHARACTER_TABLES[n][tuple(self.partition)][(1,) * n]

    @property
    def class_dimension(self) -> int:
        """trace(P) = d_lam * m_lam with m_lam = d_lam in the regular action."""
        return int(round(np.trace(self.matrix)))


@lru_cache(maxsize=None)
def young_projectors(n: int) -> tuple:
    """One orthogonal central projector per partition of n, 2 <= n <= 4."""
    if not 2 <= n <= 4:
        raise ValueError(f"projectors are provided for n in [2, 4], got {n}")
    table = CHARACTER_TABLES[n]
    mats = permutation_matrices(n)
    factor = math.factorial(n)
    projectors = []
    for lam in partitions_of(n):
        chi = table[lam]
        dim = chi[(1,) * n]
        p = np.zeros((factor, factor))
        for sigma, m in mats.items():
            p += chi[cycle_type(sigma)] * m
        projectors.append(SymmetryProjector(lam, p * (dim / factor)))
    return tuple(projectors)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-12:
            raise ValueError("density matrix must have unit trace")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("density matrix must be positive semidefinite")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_json(self) -> str:
        nested = [[[v.real, v.imag] for v in row] for row in self.matrix]
        return json.dumps({"dim": self.dim, "matrix": nested})

    @classmethod
    def from_json(cls, text: str) -> "DensityMatrix":
        data = json.loads(text)
        nested = data["matrix"] if isinstance(data, dict) else data
        m = np.array([[complex(re, im) for re, im in row] for row in nested])
        return cls(m)

    @classmethod
    def pure(cls, vector: np.ndarray) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))


def _n_from_dim(dim: int) -> int:
    for n in range(2, 5):
        if math.factorial(n) == dim:
            return n
    raise DimensionMismatchError(f"dimension {dim} is not n! for any n in [2, 4]")


@dataclass(frozen=True)
class TwoParticleStates:
    symmetric: FockState
    antisymmetric: FockState
    degenerate: bool


def two_particle_states(psi_a: int, psi_b: int) -> TwoParticleStates:
    """Symmetric and antisymmetric combinations of two single-particle labels.

    Identical labels are legal input (catalogs hit this case): the
    antisymmetric state collapses to zero and the result is flagged
    degenerate instead of raising.
    """
    if psi_a == psi_b:
        return TwoParticleStates(
            symmetric=FockState({(psi_a, psi_a): 1.0}),
            antisymmetric=FockState({}),
            degenerate=True,
        )
    amp = 1.0 / math.sqrt(2.0)
    sym = FockState({(psi_a, psi_b): amp, (psi_b, psi_a): amp})
    anti = FockState({(psi_a, psi_b): amp, (psi_b, psi_a): -amp})
    return TwoParticleStates(symmetric=sym, antisymmetric=anti, degenerate=False)


def symmetry_decompose(rho: DensityMatrix, n: int) -> Dict[tuple, float]:
    """Class weights tr(P_lam rho) for every partition of n."""
    if rho.dim != math.factorial(n):
        raise DimensionMismatchError(
            f"density matrix dimension {rho.dim} does not match n!={math.factorial(n)}"
        )
    weights = {}
    for proj in young_projectors(n):
        weights[proj.partition] = float(np.trace(proj.matrix @ rho.matrix).real)
    return weights


def decomposition_to_json(n: int, weights: Dict[tuple, float]) -> str:
    return json.dumps(
        {"n": n, "weights": {partition_label(k): v for k, v in weights.items()}}
    )


@dataclass(frozen=True)
class ViolationMixture:
    """rho = (1 - beta2_half) rho_s + beta2_half rho_a."""

    beta2_half: float
    rho_s: DensityMatrix
    rho_a: DensityMatrix
    rho: DensityMatrix

    def __post_init__(self):
        expected = (1.0 - self.beta2_half) * self.rho_s.matrix + self.beta2_half * self.rho_a.matrix
        if np.max(np.abs(self.rho.matrix - expected)) > 1e-14:
            raise ValueError("mixture matrix is not the stated convex combination")


def violation_mixture(beta2_half: float, rho_s: DensityMatrix, rho_a: DensityMatrix) -> ViolationMixture:
    """Convex mixture of a symmetric-sector and an antisymmetric-sector state."""
    if not 0.0 <= beta2_half <= 1.0:
        raise ValueError(f"beta2_half must lie in [0, 1], got {beta2_half}")
    if rho_s.dim != rho_a.dim:
        raise DimensionMismatchError("rho_s and rho_a dimensions differ")
    n = _n_from_dim(rho_s.dim)
    sym, anti = (n,), (1,) * n
    ws = symmetry_decompose(rho_s, n)
    if abs(ws[sym] - 1.0) > SECTOR_TOL:
        raise SectorSupportError(
            f"rho_s carries weight {1 - ws[sym]:.3e} outside the symmetric sector"
        )
    wa = symmetry_decompose(rho_a, n)
    if abs(wa[anti] - 1.0) > SECTOR_TOL:
        raise SectorSupportError(
            f"rho_a carries weight {1 - wa[anti]:.3e} outside the antisymmetric sector"
        )
    mixed = DensityMatrix((1.0 - beta2_half) * rho_s.matrix + beta2_half * rho_a.matrix)
    return ViolationMixture(beta2_half=beta2_half, rho_s=rho_s, rho_a=rho_a, rho=mixed)


def random_symmetric_hamiltonian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix group-averaged into the exchange-symmetric algebra."""
    d = math.factorial(n)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h0 = (a + a.conj().T) / 2.0
    mats = permutation_matrices(n)
    h = np.zeros((d, d), dtype=complex)
    for m in mats.values():
        h += m @ h0 @ m.T
    return h / len(mats)


def superselection_drift(
    H: np.ndarray, rho0: DensityMatrix, t_max: float, steps: int
) -> float:
    """Max change of any symmetry-class weight under exp(-iHt) evolution.

    H must commute with every slot permutation; for such H the weights are
    conserved and the returned drift is numerical noise (<= 1e-10).
    """
    H = np.asarray(H, dtype=complex)
    if H.shape != rho0.matrix.shape:
        raise DimensionMismatchError("Hamiltonian and state dimensions differ")
    if np.max(np.abs(H - H.conj().T)) > COMMUTATOR_TOL:
        raise ValueError("Hamiltonian must be Hermitian")
    n = _n_from_dim(H.shape[0])
    for sigma, m in permutation_matrices(n).items():
        if np.max(np.abs(H @ m - m @ H)) > COMMUTATOR_TOL:
            raise NonCommutingHamiltonianError(
                f"[H, M(sigma)] != 0 for sigma={sigma}; the conservation claim "
                "only holds for exchange-symmetric Hamiltonians"
            )
    evals, vecs = np.linalg.eigh(H)
    w0 = symmetry_decompose(rho0, n)
    projectors = young_projectors(n)
    drift = 0.0
    for t in np.linspace(0.0, t_max, steps):
        u = (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T
        rho_t = u @ rho0.matrix @ u.conj().T
        for proj in projectors:
            w_t = float(np.trace(proj.matrix @ rho_t).real)
            drift = max(drift, abs(w_t - w0[proj.partition]))
    return drift


class ParticleStatistics(Enum):
    BOSON = "boson"
    FERMION = "fermion"


def composite_statistics(n_protons: int, n_neutrons: int, n_electrons: int) -> ParticleStatistics:
    """Composite of an even number of fermions is a boson, odd a fermion."""
    counts = (n_protons, n_neutrons, n_electrons)
    if any(c < 0 or c != int(c) for c in counts):
        raise ValueError(f"constituent counts must be non-negative integers, got {counts}")
    total = sum(int(c) for c in counts)
    return ParticleStatistics.BOSON if total % 2 == 0 else ParticleStatistics.FERMION
