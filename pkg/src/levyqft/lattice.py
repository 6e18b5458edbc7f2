"""Periodic hypercubic lattices, unitary DFT and ensemble persistence.

Sites are indexed row-major with axis 0 the Euclidean time direction.
Both transform directions carry a symmetric ``1/sqrt(N)`` factor and the
forward transform uses ``exp(-i k.x)``.  Spectra are returned in numpy's
FFT ordering (zero momentum at index 0 on every axis).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


class ShapeMismatchError(ValueError):
    """Raised when an ensemble file disagrees with its sidecar metadata."""


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic lattice with ``extents[i]`` sites of spacing ``spacings[i]``."""

    extents: tuple[int, ...]
    spacings: tuple[float, ...] = ()

    def __post_init__(self):
        extents = tuple(int(n) for n in self.extents)
        spacings = tuple(float(a) for a in self.spacings) or (1.0,) * len(extents)
        if len(extents) < 1:
            raise ValueError("lattice needs at least one axis")
        if len(spacings) != len(extents):
            raise ValueError("spacings and extents must have the same length")
        if any(n < 2 for n in extents):
            raise ValueError(f"all extents must be >= 2, got {extents}")
        if any(not (a > 0 and math.isfinite(a)) for a in spacings):
            raise ValueError(f"all spacings must be finite and > 0, got {spacings}")
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "spacings", spacings)

    @classmethod
    def cubic(cls, dim: int, n: int, a: float = 1.0) -> "LatticeSpec":
        return cls((n,) * dim, (a,) * dim)

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.extents

    @property
    def size(self) -> int:
        return math.prod(self.extents)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacings)

    def wrap(self, site: Sequence[int]) -> tuple[int, ...]:
        """Reduce integer coordinates modulo the extents."""
        if len(site) != self.dim:
            raise ValueError(f"site {tuple(site)} does not have {self.dim} coordinates")
        return tuple(int(x) % n for x, n in zip(site, self.extents))

    def to_dict(self) -> dict[str, Any]:
        return {"dim": self.dim, "extents": list(self.extents), "spacings": list(self.spacings)}


@dataclass(frozen=True)
class FieldSample:
    """Real field configuration on a lattice; ``values`` has the lattice shape."""

    lattice: LatticeSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.size != self.lattice.size:
            raise ShapeMismatchError(
                f"{values.size} values for a lattice of {self.lattice.size} sites"
            )
        values = values.reshape(self.lattice.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __getitem__(self, site):
        return self.values[self.lattice.wrap(site)]


def momentum_axes(lattice: LatticeSpec) -> list[np.ndarray]:
    """Dual momenta per axis, in FFT order: ``2 pi/(N a) * {0, 1, ..., -1}``."""
    return [
        2.0 * np.pi * np.fft.fftfreq(n, d=a)
        for n, a in zip(lattice.extents, lattice.spacings)
    ]


@dataclass(frozen=True)
class MomentumGrid:
    lattice: LatticeSpec
    axes: tuple[np.ndarray, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(momentum_axes(self.lattice)))

    def mesh(self) -> list[np.ndarray]:
        """Broadcastable per-axis momentum arrays (sparse meshgrid)."""
        return np.meshgrid(*self.axes, indexing="ij", sparse=True)

    def vectors(self) -> np.ndarray:
        """Dense array of shape ``lattice.shape + (dim,)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)

    def sorted_axis(self, i: int) -> np.ndarray:
        """Axis ``i`` momenta in the symmetric order ``-N/2 .. N/2-1``."""
        return np.fft.fftshift(self.axes[i])


def _values(field_or_array) -> np.ndarray:
    if isinstance(field_or_array, FieldSample):
        return field_or_array.values
    return np.asarray(field_or_array)


def dft_forward(field: FieldSample | np.ndarray, axes: Sequence[int] | None = None) -> np.ndarray:
    """Unitary forward DFT, ``sum_x f(x) exp(-i k.x) / sqrt(N)``.

    ``axes`` allows batched transforms of stacked samples.
    """
    return np.fft.fftn(_values(field), axes=axes, norm="ortho")


def dft_backward(
    spectrum: np.ndarray,
    lattice: LatticeSpec | None = None,
    axes: Sequence[int] | None = None,
    imag_tol: float = 1e-10,
) -> FieldSample | np.ndarray:
    """Inverse of :func:`dft_forward`, returning the real part.

    The imaginary residue must stay below ``imag_tol`` times the norm of
    the result, otherwise the input was not Hermitian and a ValueError is
    raised.  With ``lattice`` given a FieldSample is returned.
    """
    out = np.fft.ifftn(spectrum, axes=axes, norm="ortho")
    norm = np.linalg.norm(out)
    residue = np.linalg.norm(out.imag)
    if residue > imag_tol * max(norm, np.finfo(float).tiny):
        raise ValueError(
            f"imaginary residue {residue:.3e} exceeds {imag_tol:g} of norm {norm:.3e}; "
            "spectrum is not Hermitian"
        )
    real = np.ascontiguousarray(out.real)
    if lattice is not None:
        return FieldSample(lattice, real)
    return real


def translate(values: np.ndarray, shift: Sequence[int]) -> np.ndarray:
    """Cyclic shift so that ``out[x] = values[x - shift]``."""
    return np.roll(values, tuple(int(t) for t in shift), axis=tuple(range(len(shift))))


# ---------------------------------------------------------------------------
# Ensemble files: raw little-endian float64, sample-major, plus a JSON sidecar.

SIDECAR_SUFFIX = ".json"
FORMAT_TAG = "levyqft-ensemble-v1"


def _sidecar_path(path: str | os.PathLike) -> str:
    return os.fspath(path) + SIDECAR_SUFFIX


def save_ensemble(ensemble, path: str | os.PathLike) -> None:
    """Write ``ensemble.samples`` to ``path`` and metadata to ``path + '.json'``."""
    lattice = ensemble.lattice
    data = np.asarray(ensemble.samples, dtype="<f8").reshape((-1,) + lattice.shape)
    meta = {
        "format": FORMAT_TAG,
        **lattice.to_dict(),
        "sample_count": int(data.shape[0]),
        "site_count": lattice.size,
        "seed": ensemble.seed,
        "model": ensemble.model_dict(),
    }
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(data).tobytes(order="C"))
    with open(_sidecar_path(path), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_ensemble(path: str | os.PathLike):
    """Read an ensemble written by :func:`save_ensemble`."""
    from .montecarlo import Ensemble

    with open(_sidecar_path(path)) as fh:
        meta = json.load(fh)
    if meta.get("format") != FORMAT_TAG:
        raise ShapeMismatchError(f"unknown ensemble format {meta.get('format')!r}")
    lattice = LatticeSpec(tuple(meta["extents"]), tuple(meta["spacings"]))
    if meta["dim"] != lattice.dim or meta["site_count"] != lattice.size:
        raise ShapeMismatchError(
            f"sidecar site count {meta['site_count']} / dim {meta['dim']} "
            f"disagrees with extents {lattice.extents}"
        )
    raw = np.fromfile(path, dtype="<f8")
    expected = meta["sample_count"] * lattice.size
    if raw.size != expected:
        raise ShapeMismatchError(
            f"{path}: {raw.size} values on disk, sidecar implies {expected}"
        )
    samples = raw.astype(np.float64).reshape((meta["sample_count"],) + lattice.shape)
    return Ensemble.from_model_dict(lattice, samples, meta["seed"], meta["model"])
