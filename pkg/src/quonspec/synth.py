"""Synthetic absorbance spectra from line catalogs.

Transmittance follows Beer-Lambert, t = exp(-column * sum strength * V),
with V an area-normalized Voigt density (scipy's Faddeeva-based
implementation, exact Gaussian/Lorentzian limits).  Detector noise is
added in transmittance, Normal(0, 1/snr) per sample, drawn from a Philox
counter-based generator so fixed seeds reproduce spectra bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import voigt_profile

from . import __version__
from .specmodel import LineCatalog

TRANSMITTANCE_FLOOR = 1e-12


class GridRangeError(ValueError):
    """Wavenumber grid does not cover the catalog lines."""


@dataclass(frozen=True)
class LineShapeParams:
    """Gaussian and Lorentzian half widths at half maximum, cm-1."""

    gaussian_hwhm: float
    lorentzian_hwhm: float = 0.0

    def __post_init__(self):
        if self.gaussian_hwhm < 0 or self.lorentzian_hwhm < 0:
            raise ValueError("half-widths must be non-negative")
        if self.gaussian_hwhm == 0 and self.lorentzian_hwhm == 0:
            raise ValueError("at least one half-width must be positive")

    @property
    def gaussian_sigma(self) -> float:
        return self.gaussian_hwhm / math.sqrt(2.0 * math.log(2.0))

    @property
    def total_hwhm(self) -> float:
        """Olivero-Longbothum approximation to the Voigt half-width (<0.02% error)."""
        gl, gg = self.lorentzian_hwhm, self.gaussian_hwhm
        return 0.5346 * gl + math.sqrt(0.2166 * gl * gl + gg * gg)

    def to_dict(self) -> dict:
        return {
            "gaussian_hwhm": self.gaussian_hwhm,
            "lorentzian_hwhm": self.lorentzian_hwhm,
        }


def profile(delta_nu, params: LineShapeParams):
    """Area-normalized Voigt density (1/cm-1) at offset delta_nu from center."""
    return voigt_profile(delta_nu, params.gaussian_sigma, params.lorentzian_hwhm)


@dataclass(frozen=True)
class Spectrum:
    """Sampled absorbance with a provenance record."""

    grid: np.ndarray
    absorbance: np.ndarray
    meta: dict

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        absorbance = np.asarray(self.absorbance, dtype=float)
        if grid.ndim != 1 or grid.shape != absorbance.shape:
            raise ValueError("grid and absorbance must be 1-d arrays of equal length")
        if grid.size >= 2 and not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "absorbance", absorbance)

    def transmittance(self) -> np.ndarray:
        return np.exp(-self.absorbance)

    def to_csv(self) -> str:
        # 18 significant digits: lossless float64 round trip
        rows = [
            f"{w:.17e},{a:.17e}" for w, a in zip(self.grid, self.absorbance)
        ]
        return "wavenumber_cm1,absorbance\n" + "\n".join(rows) + "\n"

    def meta_json(self) -> str:
        return json.dumps(self.meta, sort_keys=True)

    @classmethod
    def from_csv(cls, csv_text: str, meta_json: str = "{}") -> "Spectrum":
        reader = csv.reader(io.StringIO(csv_text))
        header = next(reader)
        if header != ["wavenumber_cm1", "absorbance"]:
            raise ValueError(f"unexpected spectrum CSV header: {header}")
        grid, absorbance = [], []
        for row in reader:
            if not row:
                continue
            grid.append(float(row[0]))
            absorbance.append(float(row[1]))
        return cls(np.array(grid), np.array(absorbance), json.loads(meta_json))


def default_grid(catalog: LineCatalog, shape: LineShapeParams, pad_hwhm: float = 20.0) -> np.ndarray:
    """Uniform grid at gaussian_hwhm/5 spacing covering the catalog plus margin."""
    width = shape.gaussian_hwhm if shape.gaussian_hwhm > 0 else shape.lorentzian_hwhm
    step = width / 5.0
    lo = min(catalog.positions) - pad_hwhm * shape.total_hwhm
    hi = max(catalog.positions) + pad_hwhm * shape.total_hwhm
    n = int(math.floor((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


def clean_transmittance(
    catalog: LineCatalog, grid: np.ndarray, shape: LineShapeParams, column: float
) -> np.ndarray:
    """Noise-free Beer-Lambert transmittance of the catalog on the grid."""
    optical_depth = np.zeros_like(grid, dtype=float)
    for line in catalog.lines:
        if line.strength == 0.0:
            continue
        optical_depth += line.strength * profile(grid - line.position, shape)
    return np.exp(-column * optical_depth)


def synthesize(
    catalog: LineCatalog,
    grid: np.ndarray,
    shape: LineShapeParams,
    column: float,
    snr: float,
    seed: int,
) -> Spectrum:
    """Render the catalog to a noisy absorbance spectrum.

    Args:
        catalog: line list to render; the grid must cover all its lines.
        grid: strictly increasing wavenumbers, cm-1.
        shape: Voigt half-widths.
        column: absorber column (concentration x pathlength, arbitrary units).
        snr: transmittance signal-to-noise; math.inf disables noise.
        seed: Philox stream key; identical inputs give identical bytes.
    """
    grid = np.asarray(grid, dtype=float)
    if not snr > 0:
        raise ValueError(f"snr must be positive, got {snr}")
    if column < 0:
        raise ValueError("column must be non-negative")
    if catalog.lines:
        lo, hi = min(catalog.positions), max(catalog.positions)
        if lo < grid[0] or hi > grid[-1]:
            raise GridRangeError(
                f"grid [{grid[0]:g}, {grid[-1]:g}] does not cover catalog lines "
                f"in [{lo:g}, {hi:g}]"
            )
    t = clean_transmittance(catalog, grid, shape, column)
    rng = Generator(Philox(key=seed))
    sigma = 0.0 if math.isinf(snr) else 1.0 / snr
    noisy = t + sigma * rng.standard_normal(grid.size)
    absorbance = -np.log(np.maximum(noisy, TRANSMITTANCE_FLOOR))
    meta = {
        "tool_version": __version__,
        "catalog_sha256": catalog.sha256(),
        "seed": int(seed),
        "snr": snr,
        "column": column,
        "gaussian_hwhm": shape.gaussian_hwhm,
        "lorentzian_hwhm": shape.lorentzian_hwhm,
        "n_averaged": 1,
    }
    return Spectrum(grid=grid, absorbance=absorbance, meta=meta)


def average_spectra(spectra: Sequence[Spectrum]) -> Spectrum:
    """Average independent spectra in the transmittance (detector) domain."""
    if not spectra:
        raise ValueError("need at least one spectrum to average")
    first = spectra[0]
    if len(spectra) == 1:
        return first
    mean_t = np.zeros_like(first.grid)
    for spec in spectra:
        if not np.array_equal(spec.grid, first.grid):
            raise ValueError("spectra to average must share the same grid")
        mean_t += spec.transmittance()
    mean_t /= len(spectra)
    absorbance = -np.log(np.maximum(mean_t, TRANSMITTANCE_FLOOR))
    meta = dict(first.meta)
    meta["n_averaged"] = len(spectra)
    meta["seed"] = [int(s.meta.get("seed", -1)) for s in spectra]
    return Spectrum(grid=first.grid, absorbance=absorbance, meta=meta)
