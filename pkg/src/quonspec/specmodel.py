"""Rovibrational line catalogs for linear molecules with two identical spin-0 nuclei.

The exchange symmetry of the total wavefunction admits only one parity of
the rotational quantum number; lines from the other parity class are
forbidden and enter the catalog with their nuclear statistical weight
replaced by the violation parameter beta2_half.

Positions follow the standard rigid-rotor + centrifugal-distortion term
values F(J) = B J(J+1) - D J^2 (J+1)^2.  Spectroscopic constants are
configuration: the shipped default profile uses illustrative round numbers,
not reference data for any real molecule.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

# Second radiation constant hc/k_B in cm*K; the single embedded physical
# constant, kept to 5 significant figures.
C2_CM_K = 1.4388


class ElectronicParity(Enum):
    SYMMETRIC = "symmetric"
    ANTISYMMETRIC = "antisymmetric"


class RotationalParity(Enum):
    EVEN = "even"
    ODD = "odd"


class Branch(Enum):
    R = "R"
    P = "P"


@dataclass(frozen=True)
class MoleculeSpec:
    """Band and molecule parameters; wavenumbers in cm-1, temperature in K."""

    name: str
    electronic_parity: ElectronicParity
    b_lower: float
    b_upper: float
    nu0: float
    temperature: float
    d_lower: float = 0.0
    d_upper: float = 0.0
    nuclear_spin: int = 0

    def __post_init__(self):
        if self.nuclear_spin != 0:
            raise ValueError("only identical spin-0 nuclei are modeled")
        if self.b_lower <= 0 or self.b_upper <= 0:
            raise ValueError("rotational constants must be positive")
        if self.d_lower < 0 or self.d_upper < 0:
            raise ValueError("distortion constants must be non-negative")
        if self.nu0 <= 0:
            raise ValueError("band origin must be positive")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "electronic_parity": self.electronic_parity.value,
            "b_lower": self.b_lower,
            "b_upper": self.b_upper,
            "d_lower": self.d_lower,
            "d_upper": self.d_upper,
            "nu0": self.nu0,
            "temperature": self.temperature,
            "nuclear_spin": self.nuclear_spin,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MoleculeSpec":
        return cls(
            name=data["name"],
            electronic_parity=ElectronicParity(data["electronic_parity"]),
            b_lower=float(data["b_lower"]),
            b_upper=float(data["b_upper"]),
            d_lower=float(data.get("d_lower", 0.0)),
            d_upper=float(data.get("d_upper", 0.0)),
            nu0=float(data["nu0"]),
            temperature=float(data["temperature"]),
            nuclear_spin=int(data.get("nuclear_spin", 0)),
        )


def co2_like_default() -> MoleculeSpec:
    """Illustrative 2-um-band profile with round numbers (not reference data)."""
    return MoleculeSpec(
        name="CO2-like-2um",
        electronic_parity=ElectronicParity.SYMMETRIC,
        b_lower=0.39,
        b_upper=0.39,
        d_lower=1.3e-7,
        d_upper=1.3e-7,
        nu0=5000.0,
        temperature=296.0,
    )


def allowed_parity(electronic_parity: ElectronicParity) -> RotationalParity:
    """Rotational parity admitted by a symmetric total wavefunction."""
    if electronic_parity is ElectronicParity.SYMMETRIC:
        return RotationalParity.EVEN
    return RotationalParity.ODD


def is_allowed(electronic_parity: ElectronicParity, j_lower: int) -> bool:
    even_allowed = allowed_parity(electronic_parity) is RotationalParity.EVEN
    return (j_lower % 2 == 0) == even_allowed


def rotational_term(b: float, d: float, j: int) -> float:
    """Term value F(J) = B J(J+1) - D J^2 (J+1)^2 in cm-1."""
    x = j * (j + 1)
    return b * x - d * x * x


def _upper_j(branch: Branch, j_lower: int) -> int:
    if j_lower < 0:
        raise ValueError("J_lower must be non-negative")
    if branch is Branch.R:
        return j_lower + 1
    if j_lower < 1:
        raise ValueError("P(0) does not exist: the P branch starts at J_lower = 1")
    return j_lower - 1


def line_position(molecule: MoleculeSpec, branch: Branch, j_lower: int) -> float:
    """Transition wavenumber nu0 + F'(J') - F''(J'') in cm-1."""
    j_upper = _upper_j(branch, j_lower)
    return (
        molecule.nu0
        + rotational_term(molecule.b_upper, molecule.d_upper, j_upper)
        - rotational_term(molecule.b_lower, molecule.d_lower, j_lower)
    )


def honl_london(branch: Branch, j_lower: int) -> int:
    """Sigma-Sigma band rotational strength factor: J''+1 for R, J'' for P."""
    return j_lower + 1 if branch is Branch.R else j_lower


def line_strength(
    molecule: MoleculeSpec, branch: Branch, j_lower: int, beta2_half: float
) -> float:
    """Unnormalized line weight g_ns (2J+1) exp(-c2 F(J)/T) * Honl-London.

    The nuclear statistical weight g_ns is 1 for the allowed parity class
    and beta2_half for the forbidden one.  build_catalog rescales so the
    strongest allowed line is exactly 1.
    """
    _upper_j(branch, j_lower)  # validates indices
    g_ns = 1.0 if is_allowed(molecule.electronic_parity, j_lower) else beta2_half
    boltzmann = math.exp(
        -C2_CM_K * rotational_term(molecule.b_lower, molecule.d_lower, j_lower)
        / molecule.temperature
    )
    return g_ns * (2 * j_lower + 1) * boltzmann * honl_london(branch, j_lower)


@dataclass(frozen=True)
class RoVibLine:
    branch: Branch
    j_lower: int
    position: float
    strength: float
    allowed: bool

    def __post_init__(self):
        if self.position <= 0:
            raise ValueError("line position must be positive")
        if self.strength < 0:
            raise ValueError("line strength must be non-negative")

    def to_dict(self) -> dict:
        return {
            "branch": self.branch.value,
            "J_lower": self.j_lower,
            "position_cm1": self.position,
            "strength": self.strength,
            "allowed": self.allowed,
        }


@dataclass(frozen=True)
class LineCatalog:
    """Lines sorted by position, strengths normalized to max allowed = 1."""

    molecule: MoleculeSpec
    beta2_half: float
    lines: tuple
    normalization: float = field(repr=False, default=1.0)

    @property
    def positions(self) -> list:
        return [line.position for line in self.lines]

    def allowed_lines(self) -> list:
        return [line for line in self.lines if line.allowed]

    def forbidden_lines(self) -> list:
        return [line for line in self.lines if not line.allowed]

    def unit_violation_strength(self, line: RoVibLine) -> float:
        """Normalized strength the forbidden line would carry at beta2_half = 1."""
        if line.allowed:
            raise ValueError("line is allowed; its strength does not scale with beta2_half")
        raw = line_strength(self.molecule, line.branch, line.j_lower, 1.0)
        return raw / self.normalization

    def to_json(self) -> str:
        return json.dumps(
            {
                "molecule": self.molecule.to_dict(),
                "beta2_half": self.beta2_half,
                "lines": [line.to_dict() for line in self.lines],
            },
            sort_keys=True,
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["branch", "J_lower", "position_cm1", "strength", "allowed"])
        for line in self.lines:
            writer.writerow(
                [
                    line.branch.value,
                    line.j_lower,
                    repr(line.position),
                    repr(line.strength),
                    str(line.allowed).lower(),
                ]
            )
        return buf.getvalue()

    def sha256(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def build_catalog(
    molecule: MoleculeSpec,
    branches: Iterable = (Branch.R,),
    j_max: int = 20,
    beta2_half: float = 0.0,
) -> LineCatalog:
    """All P/R lines up to j_max, flagged and weighted by the selection rule."""
    if j_max < 0:
        raise ValueError("j_max must be non-negative")
    if not 0.0 <= beta2_half <= 1.0:
        raise ValueError(f"beta2_half must lie in [0, 1], got {beta2_half}")
    branch_set = [Branch(b) for b in branches]
    raw = []
    for branch in branch_set:
        j_start = 1 if branch is Branch.P else 0
        for j in range(j_start, j_max + 1):
            raw.append(
                (
                    branch,
                    j,
                    line_position(molecule, branch, j),
                    line_strength(molecule, branch, j, beta2_half),
                    is_allowed(molecule.electronic_parity, j),
                )
            )
    allowed_weights = [w for _, _, _, w, ok in raw if ok]
    if not allowed_weights:
        raise ValueError("catalog contains no allowed lines to normalize against")
    norm = max(allowed_weights)
    lines = tuple(
        sorted(
            (
                RoVibLine(branch, j, pos, weight / norm, ok)
                for branch, j, pos, weight, ok in raw
            ),
            key=lambda line: line.position,
        )
    )
    return LineCatalog(
        molecule=molecule, beta2_half=beta2_half, lines=lines, normalization=norm
    )
