"""Run configuration: one validated record driving catalog, synth, and fit.

The on-disk format is TOML with [molecule], [catalog], [synth], [fit],
[calibrate], and [output] sections.  Serialization lists every value,
defaults included, so a written config fully describes its run; the

sha256 of that canonical text is the provenance hash stamped on outputs.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .specmodel import Branch, LineCatalog, MoleculeSpec, build_catalog, co2_like_default
from .synth import LineShapeParams


@dataclass(frozen=True)
class RunConfig:
    molecule: MoleculeSpec
    branches: Tuple[Branch, ...] = (Branch.R,)
    j_max: int = 20
    beta2_half: float = 0.0
    shape: LineShapeParams = LineShapeParams(gaussian_hwhm=0.005, lorentzian_hwhm=0.002)
    column: float = 0.008
    snr: float = 1.0e4
    seed: int = 42
    grid_start: float = 4999.0
    grid_stop: float = 5018.0
    grid_step: float = 0.001
    n_average: int = 1
    confidence_level: float = 0.95
    baseline_degree: int = 1
    n_trials: int = 200
    output_dir: str = "out"

    def __post_init__(self):
        if not self.branches:
            raise ValueError("at least one branch is required")
        if self.j_max < 0:
            raise ValueError("j_max must be non-negative")
        if not 0.0 <= self.beta2_half <= 1.0:
            raise ValueError("beta2_half must lie in [0, 1]")
        if self.column < 0:
            raise ValueError("column must be non-negative")
        if not self.snr > 0:
            raise ValueError("snr must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.grid_step <= 0 or self.grid_stop <= self.grid_start:
            raise ValueError("grid must have positive step and stop > start")
        if self.n_average < 1:
            raise ValueError("n_average must be at least 1")
        if not 0.0 < self.confidence_level < 1.0:
            raise ValueError("confidence level must lie in (0, 1)")
        if not 0 <= self.baseline_degree <= 3:
            raise ValueError("baseline degree must be between 0 and 3")
        if self.n_trials < 1:
            raise ValueError("n_trials must be positive")

    def grid(self) -> np.ndarray:
        n = int(math.floor((self.grid_stop - self.grid_start) / self.grid_step)) + 1
        return self.grid_start + self.grid_step * np.arange(n)

    def template_catalog(self) -> LineCatalog:
        """The beta2_half = 0 catalog used as the fit template."""
        return build_catalog(self.molecule, self.branches, self.j_max, 0.0)

    def injected_catalog(self) -> LineCatalog:
        """The catalog actually rendered, carrying the configured violation."""
        return build_catalog(self.molecule, self.branches, self.j_max, self.beta2_half)

    def to_toml(self) -> str:
        m = self.molecule
        lines = [
            "[molecule]",
            f'name = "{m.name}"',
            f'electronic_parity = "{m.electronic_parity.value}"',
            f"nuclear_spin = {m.nuclear_spin}",
            f"b_lower = {_toml_float(m.b_lower)}",
            f"b_upper = {_toml_float(m.b_upper)}",
            f"d_lower = {_toml_float(m.d_lower)}",
            f"d_upper = {_toml_float(m.d_upper)}",
            f"nu0 = {_toml_float(m.nu0)}",
            f"temperature = {_toml_float(m.temperature)}",
            "",
            "[catalog]",
            "branches = [" + ", ".join(f'"{b.value}"' for b in self.branches) + "]",
            f"j_max = {self.j_max}",
            f"beta2_half = {_toml_float(self.beta2_half)}",
            "",
            "[synth]",
            f"gaussian_hwhm = {_toml_float(self.shape.gaussian_hwhm)}",
            f"lorentzian_hwhm = {_toml_float(self.shape.lorentzian_hwhm)}",
            f"column = {_toml_float(self.column)}",
            f"snr = {_toml_float(self.snr)}",
            f"seed = {self.seed}",
            f"grid_start = {_toml_float(self.grid_start)}",
            f"grid_stop = {_toml_float(self.grid_stop)}",
            f"grid_step = {_toml_float(self.grid_step)}",
            f"n_average = {self.n_average}",
            "",
            "[fit]",
            f"confidence_level = {_toml_float(self.confidence_level)}",
            f"baseline_degree = {self.baseline_degree}",
            "",
            "[calibrate]",
            f"n_trials = {self.n_trials}",
            "",
            "[output]",
            f'directory = "{self.output_dir}"',
        ]
        return "\n".join(lines) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.to_toml().encode()).hexdigest()

    def provenance(self) -> dict:
        return {"config_sha256": self.sha256(), "seed": self.seed}


def _toml_float(value: float) -> str:
    # TOML floats need a decimal point or exponent; repr(5000.0) already
    # qualifies and round-trips exactly.
    text = repr(float(value))
    return text


def default_config() -> RunConfig:
    return RunConfig(molecule=co2_like_default())


def config_from_toml(text: str) -> RunConfig:
    """Parse a TOML config; missing keys fall back to the documented defaults."""
    data = tomllib.loads(text)
    base = default_config()
    mol_data = data.get("molecule")
    molecule = MoleculeSpec.from_dict(mol_data) if mol_data else base.molecule
    cat = data.get("catalog", {})
    syn = data.get("synth", {})
    fit = data.get("fit", {})
    cal = data.get("calibrate", {})
    out = data.get("output", {})
    shape = LineShapeParams(
        gaussian_hwhm=float(syn.get("gaussian_hwhm", base.shape.gaussian_hwhm)),
        lorentzian_hwhm=float(syn.get("lorentzian_hwhm", base.shape.lorentzian_hwhm)),
    )
    return RunConfig(
        molecule=molecule,
        branches=tuple(Branch(b) for b in cat.get("branches", ["R"])),
        j_max=int(cat.get("j_max", base.j_max)),
        beta2_half=float(cat.get("beta2_half", base.beta2_half)),
        shape=shape,
        column=float(syn.get("column", base.column)),
        snr=float(syn.get("snr", base.snr)),
        seed=int(syn.get("seed", base.seed)),
        grid_start=float(syn.get("grid_start", base.grid_start)),
        grid_stop=float(syn.get("grid_stop", base.grid_stop)),
        grid_step=float(syn.get("grid_step", base.grid_step)),
        n_average=int(syn.get("n_average", base.n_average)),
        confidence_level=float(fit.get("confidence_level", base.confidence_level)),
        baseline_degree=int(fit.get("baseline_degree", base.baseline_degree)),
        n_trials=int(cal.get("n_trials", base.n_trials)),
        output_dir=str(out.get("directory", base.output_dir)),
    )


def load_config(path) -> RunConfig:
    with open(path, "rb") as fh:
        text = fh.read().decode()
    return config_from_toml(text)
