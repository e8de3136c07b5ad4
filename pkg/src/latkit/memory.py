"""Host/target dual-memory discipline.

The "target" is the memory-and-compute space where lattice operations run.
Even when it is physically the host, the host and target copies of a field
stay distinct: kernels see only target buffers, and data moves between the
two sides through explicit copies.

Backends:
  reference  -- single worker, synchronous launches; the baseline.
  threaded   -- chunks distributed over a worker pool.
  emulated   -- emulated discrete target: a separate, capacity-capped
                allocation arena, so the copy discipline of a real
                accelerator (nothing is visible until copied in) is
                preserved and testable without one.

Masked copies always stage through a packed scratch buffer holding exactly
included_count * ncomp doubles, on every backend: pack, transfer, unpack.
The transfer counters make that staging observable.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field as dc_field
from typing import Any

import numpy as np

from .errors import (
    AllocationError,
    ConcurrencyError,
    ConfigError,
    LifecycleError,
    ShapeError,
    TypeConflictError,
)
from .lattice import Field, FieldDescriptor

BACKENDS = ("reference", "threaded", "emulated")

_DEFAULT_EMULATED_ARENA = 2 * 1024**3  # bytes


@dataclass
class TransferCounters:
    """Instrumentation for the CLI's --stats output."""

    elements_packed: int = 0
    bytes_transferred: int = 0
    launches: int = 0

    def reset(self) -> None:
        self.elements_packed = 0
        self.bytes_transferred = 0
        self.launches = 0


@dataclass
class SiteMask:
    """Per-site inclusion flags for masked transfers."""

    flags: np.ndarray

    def __post_init__(self) -> None:
        self.flags = np.ascontiguousarray(self.flags, dtype=bool)
        if self.flags.ndim != 1:
            raise ShapeError("mask flags must be a 1-D boolean vector")

    @property
    def nsites(self) -> int:
        return self.flags.size

    @property
    def included_count(self) -> int:
        return int(np.count_nonzero(self.flags))


class ConstantBlock:
    """Keyed parameter store mirrored onto the target.

    Entries are copied in on set, so later host-side mutation of the source
    never reaches a kernel. A key keeps its kind for the lifetime of the
    store; rebinding to a different kind is an error.
    """

    _KINDS = ("double", "int", "double_array", "int_array")

    def __init__(self) -> None:
        self._entries: dict[str, tuple[str, Any]] = {}

    def _set(self, key: str, kind: str, value: Any) -> None:
        if key in self._entries and self._entries[key][0] != kind:
            raise TypeConflictError(
                f"constant {key!r} is {self._entries[key][0]}, cannot rebind as {kind}"
            )
        self._entries[key] = (kind, value)

    def set_double(self, key: str, v: float) -> None:
        self._set(key, "double", float(v))

    def set_int(self, key: str, v: int) -> None:
        self._set(key, "int", int(v))

    def set_double_array(self, key: str, values: Any, dims: tuple[int, ...] | list[int]) -> None:
        arr = np.array(values, dtype=np.float64).reshape(tuple(dims)).copy()
        if arr.ndim not in (1, 2):
            raise ConfigError("double arrays may be 1-D or 2-D")
        arr.setflags(write=False)
        self._set(key, "double_array", arr)

    def set_int_array(self, key: str, values: Any, dims: tuple[int, ...] | list[int]) -> None:
        arr = np.array(values, dtype=np.int64).reshape(tuple(dims)).copy()
        if arr.ndim != 1:
            raise ConfigError("int arrays must be 1-D")
        arr.setflags(write=False)
        self._set(key, "int_array", arr)

    def get(self, key: str) -> Any:
        if key not in self._entries:
            raise KeyError(f"constant {key!r} not set")
        return self._entries[key][1]

    def kind(self, key: str) -> str:
        return self._entries[key][0]

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def keys(self):
        return self._entries.keys()


class TargetDevice:
    """A target memory space plus its execution resources."""

    def __init__(
        self,
        backend: str = "reference",
        workers: int | None = None,
        arena_bytes: int | None = None,
        debug: bool = False,
    ) -> None:
        if backend not in BACKENDS:
            raise ConfigError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
        import os

        self.backend = backend
        self.workers = workers if workers is not None else (os.cpu_count() or 1)
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        self.debug = debug
        if arena_bytes is None and backend == "emulated":
            arena_bytes = _DEFAULT_EMULATED_ARENA
        self.arena_bytes = arena_bytes
        self.arena_used = 0
        self.constants = ConstantBlock()
        self.counters = TransferCounters()
        self._lock = threading.Lock()
        self._active = None  # in-flight LaunchHandle, managed by execution.launch
        self._executor = None
        self._executor_size = 0

    # -- launch bookkeeping (used by latkit.execution) ----------------------

    def _require_idle(self, what: str) -> None:
        active = self._active
        if active is not None and not active.done():
            raise ConcurrencyError(f"{what} while a launch is in flight")

    def _pool(self, nworkers: int):
        from concurrent.futures import ThreadPoolExecutor

        if self._executor is None or self._executor_size < nworkers:
            if self._executor is not None:
                self._executor.shutdown(wait=True)
            self._executor = ThreadPoolExecutor(max_workers=nworkers)
            self._executor_size = nworkers
        return self._executor

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    # -- constants ----------------------------------------------------------

    def constant_set_double(self, key: str, v: float) -> None:
        self._require_idle("constant update")
        self.constants.set_double(key, v)

    def constant_set_int(self, key: str, v: int) -> None:
        self._require_idle("constant update")
        self.constants.set_int(key, v)

    def constant_set_double_array(self, key: str, values: Any, dims) -> None:
        self._require_idle("constant update")
        self.constants.set_double_array(key, values, dims)

    def constant_set_int_array(self, key: str, values: Any, dims) -> None:
        self._require_idle("constant update")
        self.constants.set_int_array(key, values, dims)


class TargetBuffer:
    """Opaque handle to an allocation in a device's memory space.

    Valid only between target_malloc and target_free. Storage uses the same
    SoA layout as Field.
    """

    def __init__(self, device: TargetDevice, descriptor: FieldDescriptor, storage: np.ndarray):
        self.device = device
        self.descriptor = descriptor
        self._storage = storage
        self._valid = True

    @property
    def valid(self) -> bool:
        return self._valid

    def _array(self) -> np.ndarray:
        if not self._valid:
            raise LifecycleError("use of a freed target buffer")
        return self._storage

    @property
    def nbytes(self) -> int:
        return self.descriptor.nelem * 8


def target_malloc(device: TargetDevice, desc: FieldDescriptor) -> TargetBuffer:
    """Allocate a zero-initialized buffer in the device arena."""
    nbytes = desc.nelem * 8
    if device.arena_bytes is not None and device.arena_used + nbytes > device.arena_bytes:
        raise AllocationError(
            f"arena exhausted: {nbytes} bytes requested, "
            f"{device.arena_bytes - device.arena_used} available"
        )
    storage = np.zeros(desc.nelem, dtype=np.float64)
    device.arena_used += nbytes
    return TargetBuffer(device, desc, storage)


def target_free(buf: TargetBuffer) -> None:
    """Release a buffer; the arena space is reclaimed."""
    if not buf._valid:
        raise LifecycleError("double free of a target buffer")
    active = buf.device._active
    if active is not None and not active.done():
        raise LifecycleError("target_free while a launch is in flight")
    buf.device.arena_used -= buf.nbytes
    buf._valid = False
    buf._storage = None  # type: ignore[assignment]


def _check_pair(buf: TargetBuffer, f: Field) -> None:
    if buf.descriptor != f.descriptor:
        raise ShapeError(f"descriptor mismatch: buffer {buf.descriptor} vs field {f.descriptor}")


def copy_to_target(buf: TargetBuffer, f: Field) -> None:
    """Full copy host -> target, padding included."""
    _check_pair(buf, f)
    buf.device._require_idle("copy_to_target")
    buf._array()[:] = f.data
    buf.device.counters.bytes_transferred += buf.nbytes


def copy_from_target(f: Field, buf: TargetBuffer) -> None:
    """Full copy target -> host, padding included."""
    _check_pair(buf, f)
    buf.device._require_idle("copy_from_target")
    f.data[:] = buf._array()
    buf.device.counters.bytes_transferred += buf.nbytes


def _pack(src: np.ndarray, desc: FieldDescriptor, idx: np.ndarray) -> np.ndarray:
    """Component-major pack of the masked sites into a scratch buffer."""
    k = idx.size
    scratch = np.empty(k * desc.ncomp, dtype=np.float64)
    for c in range(desc.ncomp):
        scratch[c * k : (c + 1) * k] = src[c * desc.padded_sites + idx]
    return scratch


def _unpack(dst: np.ndarray, desc: FieldDescriptor, idx: np.ndarray, scratch: np.ndarray) -> None:
    k = idx.size
    for c in range(desc.ncomp):
        dst[c * desc.padded_sites + idx] = scratch[c * k : (c + 1) * k]


def _masked_copy(dst: np.ndarray, src: np.ndarray, desc: FieldDescriptor,
                 mask: SiteMask, counters: TransferCounters) -> None:
    if mask.nsites != desc.nsites:
        raise ShapeError(f"mask has {mask.nsites} sites, field has {desc.nsites}")
    idx = np.flatnonzero(mask.flags)
    scratch = _pack(src, desc, idx)
    transferred = scratch.copy()  # the transfer phase crosses the host/target boundary
    counters.elements_packed += scratch.size
    counters.bytes_transferred += scratch.nbytes
    _unpack(dst, desc, idx, transferred)


def copy_to_target_masked(buf: TargetBuffer, f: Field, mask: SiteMask) -> None:
    """Copy only masked sites host -> target; excluded sites and padding are untouched."""
    _check_pair(buf, f)
    buf.device._require_idle("copy_to_target_masked")
    _masked_copy(buf._array(), f.data, buf.descriptor, mask, buf.device.counters)


def copy_from_target_masked(f: Field, buf: TargetBuffer, mask: SiteMask) -> None:
    """Copy only masked sites target -> host; excluded sites and padding are untouched."""
    _check_pair(buf, f)
    buf.device._require_idle("copy_from_target_masked")
    _masked_copy(f.data, buf._array(), buf.descriptor, mask, buf.device.counters)
