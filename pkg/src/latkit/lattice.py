"""Lattice geometry, field descriptors, and SoA storage.

A field holds `ncomp` double-precision values per lattice site, laid out
structure-of-arrays: all sites of component 0, then component 1, and so on.
Consecutive site indices are consecutive in memory, so a chunk of sites can
be loaded as one vector.

Fields are padded up to a multiple of the configured maximum virtual vector
length (VVL) at creation, so the lane loop inside kernels never needs a tail
guard. Padding elements are zero and never visible through the public read
operations here.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field as dc_field
from typing import BinaryIO, Callable

import numpy as np

from .errors import BoundsError, ConfigError, ShapeError

# Fields are padded to a multiple of this at creation; any VVL dividing the
# padded extent is then legal at launch time without reallocation.
DEFAULT_MAX_VVL = 16


@dataclass(frozen=True)
class LatticeShape:
    """Extents of a 3-D structured grid."""

    nx: int
    ny: int
    nz: int

    def __post_init__(self) -> None:
        if min(self.nx, self.ny, self.nz) < 1:
            raise ConfigError(f"lattice extents must be >= 1, got {self}")

    @property
    def nsites(self) -> int:
        return self.nx * self.ny * self.nz

    @classmethod
    def parse(cls, text: str) -> "LatticeShape":
        """Parse 'NXxNYxNZ', e.g. '16x16x16'."""
        parts = text.lower().split("x")
        if len(parts) != 3:
            raise ConfigError(f"shape must be NXxNYxNZ, got {text!r}")
        try:
            nx, ny, nz = (int(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"shape must be NXxNYxNZ, got {text!r}") from exc
        return cls(nx, ny, nz)

    def __str__(self) -> str:
        return f"{self.nx}x{self.ny}x{self.nz}"


@dataclass(frozen=True)
class FieldDescriptor:
    """Shape of a lattice field: components per site, sites, padded sites."""

    ncomp: int
    nsites: int
    padded_sites: int

    def __post_init__(self) -> None:
        if self.ncomp < 1:
            raise ConfigError(f"ncomp must be >= 1, got {self.ncomp}")
        if self.nsites < 1:
            raise ConfigError(f"nsites must be >= 1, got {self.nsites}")
        if self.padded_sites < self.nsites:
            raise ConfigError("padded_sites must be >= nsites")

    @property
    def nelem(self) -> int:
        """Total stored elements, padding included."""
        return self.ncomp * self.padded_sites

    @classmethod
    def create(cls, ncomp: int, nsites: int, max_vvl: int = DEFAULT_MAX_VVL) -> "FieldDescriptor":
        return cls(ncomp, nsites, pad_sites(nsites, max_vvl))


def pad_sites(nsites: int, vvl: int) -> int:
    """Smallest multiple of `vvl` that is >= `nsites`."""
    if vvl < 1:
        raise ConfigError(f"vvl must be >= 1, got {vvl}")
    if nsites < 1:
        raise ConfigError(f"nsites must be >= 1, got {nsites}")
    return ((nsites + vvl - 1) // vvl) * vvl


def soa_index(c: int, s: int, padded_sites: int, ncomp: int | None = None) -> int:
    """Linear index of (component c, site s) in SoA layout."""
    if s < 0 or s >= padded_sites:
        raise BoundsError(f"site index {s} outside [0, {padded_sites})")
    if c < 0 or (ncomp is not None and c >= ncomp):
        raise BoundsError(f"component index {c} outside [0, {ncomp})")
    return c * padded_sites + s


@dataclass
class Field:
    """Host-side SoA buffer: ncomp * padded_sites doubles."""

    descriptor: FieldDescriptor
    data: np.ndarray = dc_field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.data is None:
            self.data = np.zeros(self.descriptor.nelem, dtype=np.float64)
        elif self.data.shape != (self.descriptor.nelem,) or self.data.dtype != np.float64:
            raise ShapeError("field data must be a float64 vector of ncomp*padded_sites")

    def component(self, c: int) -> np.ndarray:
        """View of component c over the real (unpadded) sites."""
        d = self.descriptor
        if c < 0 or c >= d.ncomp:
            raise BoundsError(f"component index {c} outside [0, {d.ncomp})")
        off = c * d.padded_sites
        return self.data[off : off + d.nsites]


def field_create(desc: FieldDescriptor) -> Field:
    """Zero-initialized field (padding included)."""
    return Field(desc)


def field_fill(f: Field, gen: Callable[[int, int], float]) -> None:
    """Fill real sites from gen(c, s); padding stays zero."""
    d = f.descriptor
    for c in range(d.ncomp):
        comp = f.component(c)
        for s in range(d.nsites):
            comp[s] = gen(c, s)


def field_max_abs_diff(a: Field, b: Field) -> float:
    """Max |a - b| over real sites only; padding is excluded by contract."""
    if a.descriptor != b.descriptor:
        raise ShapeError(f"descriptor mismatch: {a.descriptor} vs {b.descriptor}")
    worst = 0.0
    for c in range(a.descriptor.ncomp):
        worst = max(worst, float(np.max(np.abs(a.component(c) - b.component(c)))))
    return worst


def aos_to_soa(flat: np.ndarray, desc: FieldDescriptor) -> Field:
    """Ingest site-major data [site0: c0..cN, site1: c0..cN, ...] into a field."""
    flat = np.asarray(flat, dtype=np.float64)
    if flat.shape != (desc.ncomp * desc.nsites,):
        raise ShapeError(f"expected {desc.ncomp * desc.nsites} elements, got {flat.size}")
    f = field_create(desc)
    by_site = flat.reshape(desc.nsites, desc.ncomp)
    for c in range(desc.ncomp):
        f.component(c)[:] = by_site[:, c]
    return f


def soa_to_aos(f: Field) -> np.ndarray:
    """Export real-site data in site-major order."""
    d = f.descriptor
    out = np.empty((d.nsites, d.ncomp), dtype=np.float64)
    for c in range(d.ncomp):
        out[:, c] = f.component(c)
    return out.reshape(d.ncomp * d.nsites)


_DUMP_HEADER = struct.Struct("<4Q")  # ncomp, nx, ny, nz


def field_dump(f: Field, shape: LatticeShape, fh: BinaryIO) -> None:
    """Write little-endian header + real-site doubles in SoA order."""
    if shape.nsites != f.descriptor.nsites:
        raise ShapeError(f"shape {shape} has {shape.nsites} sites, field has {f.descriptor.nsites}")
    fh.write(_DUMP_HEADER.pack(f.descriptor.ncomp, shape.nx, shape.ny, shape.nz))
    for c in range(f.descriptor.ncomp):
        fh.write(f.component(c).astype("<f8").tobytes())


def field_load(fh: BinaryIO, max_vvl: int = DEFAULT_MAX_VVL) -> tuple[Field, LatticeShape]:
    """Read a field dumped by field_dump; padding is re-created as zeros."""
    raw = fh.read(_DUMP_HEADER.size)
    if len(raw) != _DUMP_HEADER.size:
        raise ShapeError("truncated field header")
    ncomp, nx, ny, nz = _DUMP_HEADER.unpack(raw)
    shape = LatticeShape(nx, ny, nz)
    desc = FieldDescriptor.create(ncomp, shape.nsites, max_vvl)
    f = field_create(desc)
    for c in range(ncomp):
        body = fh.read(8 * shape.nsites)
        if len(body) != 8 * shape.nsites:
            raise ShapeError("truncated field body")
        f.component(c)[:] = np.frombuffer(body, dtype="<f8")
    return f, shape
