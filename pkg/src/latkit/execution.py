"""Two-level execution model: chunked site loop (TLP) x lane loop (ILP).

The site loop is strip-mined into chunks of VVL (virtual vector length)
sites. Chunks are distributed over workers -- that is the thread-level
parallelism. Within a chunk, a kernel runs a fixed-trip-count lane loop over
the VVL sites -- the instruction-level parallelism a vectorizing compiler
can map to hardware vector instructions.

Kernels are values dispatched through launch(), never called directly. A
kernel may carry a compiled range runner (numba) as its fast path; the
per-chunk Python path is canonical and is what the debug device uses for
write-tracking.

Because every site's arithmetic sequence is independent of how sites are
grouped into chunks or assigned to workers, output is bitwise identical
across backends, worker counts, and VVL values for any kernel honoring the
disjoint-write and lane-independence contracts.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import ContractViolationError, DeviceError, LifecycleError, PlanError
from .memory import TargetBuffer, TargetDevice

DEFAULT_TPB = 128


@dataclass(frozen=True)
class LaunchPlan:
    """Chunk decomposition of one kernel launch."""

    extent: int          # padded site count to process
    vvl: int             # lanes per chunk
    workers: int = 1     # worker threads for TLP
    tpb: int = DEFAULT_TPB  # chunks per worker-group on the emulated backend

    def __post_init__(self) -> None:
        if self.vvl < 1:
            raise PlanError(f"vvl must be >= 1, got {self.vvl}")
        if self.workers < 1:
            raise PlanError(f"workers must be >= 1, got {self.workers}")
        if self.tpb < 1:
            raise PlanError(f"tpb must be >= 1, got {self.tpb}")
        if self.extent < 1:
            raise PlanError(f"extent must be >= 1, got {self.extent}")
        if self.extent % self.vvl != 0:
            raise PlanError(f"VVL {self.vvl} does not divide extent {self.extent}")

    @property
    def chunk_count(self) -> int:
        return self.extent // self.vvl


@dataclass
class KernelContext:
    """Per-chunk view handed to Python kernels.

    A kernel invocation may write only sites [base_index, base_index + vvl)
    of its buffers, and its lane iterations must be mutually independent.
    """

    base_index: int
    vvl: int
    arrays: tuple[np.ndarray, ...]
    padded: tuple[int, ...]
    constants: Mapping[str, Any]

    def lane_view(self, b: int, c: int) -> np.ndarray:
        """Chunk-wide view of component c of buffer b: vvl consecutive sites."""
        off = c * self.padded[b] + self.base_index
        return self.arrays[b][off : off + self.vvl]

    def constant(self, key: str) -> Any:
        return self.constants[key]


def for_each_lane(ctx: KernelContext, body: Callable[[int], None]) -> None:
    """Run body(lane) for lane = 0 .. vvl-1: the inner (ILP) loop."""
    for lane in range(ctx.vvl):
        body(lane)


class Kernel:
    """A per-chunk function plus its launch-time argument assembly.

    prepare(device, plan, buffers, arrays, padded, constants) -> args
    validates the binding and builds the argument pack. chunk_fn(base, vvl,
    args) runs one chunk; range_fn(chunk_lo, chunk_hi, vvl, args), when
    present, runs a contiguous chunk range as one compiled call.
    """

    def __init__(
        self,
        name: str,
        chunk_fn: Callable[[int, int, Any], None],
        prepare: Callable[..., Any] | None = None,
        range_fn: Callable[[int, int, int, Any], None] | None = None,
    ) -> None:
        self.name = name
        self.chunk_fn = chunk_fn
        self.prepare = prepare or (lambda device, plan, buffers, arrays, padded, constants:
                                   (arrays, padded, constants))
        self.range_fn = range_fn


def python_kernel(name: str, fn: Callable[[KernelContext], None]) -> Kernel:
    """Wrap a Python function fn(ctx) as a launchable kernel."""

    def chunk_fn(base: int, vvl: int, args) -> None:
        arrays, padded, constants = args
        fn(KernelContext(base, vvl, arrays, padded, constants))

    return Kernel(name, chunk_fn)


def backend_schedule(plan: LaunchPlan, backend: str) -> list[list[tuple[int, int]]]:
    """Chunk-to-worker assignment as half-open chunk-index ranges per worker.

    reference: worker 0 gets every chunk in order. threaded: static block
    partition over plan.workers. emulated: chunks grouped tpb at a time,
    groups dealt round-robin to the worker pool.
    """
    n = plan.chunk_count
    if backend == "reference":
        return [[(0, n)]]
    if backend == "threaded":
        w = plan.workers
        base, rem = divmod(n, w)
        out: list[list[tuple[int, int]]] = []
        lo = 0
        for i in range(w):
            hi = lo + base + (1 if i < rem else 0)
            out.append([(lo, hi)] if hi > lo else [])
            lo = hi
        return out
    if backend == "emulated":
        ngroups = (n + plan.tpb - 1) // plan.tpb
        out = [[] for _ in range(plan.workers)]
        for g in range(ngroups):
            out[g % plan.workers].append((g * plan.tpb, min((g + 1) * plan.tpb, n)))
        return out
    raise PlanError(f"unknown backend {backend!r}")


class LaunchHandle:
    """Completion handle for one launch; resolved by sync_target."""

    def __init__(self) -> None:
        self.futures: list = []
        self.errors: list[BaseException] = []
        self._done = threading.Event()

    def done(self) -> bool:
        return self._done.is_set() or all(f.done() for f in self.futures)

    def wait(self) -> None:
        for f in self.futures:
            exc = f.exception()
            if exc is not None:
                self.errors.append(exc)
        self._done.set()


def _bitwise_changed(before: np.ndarray, after: np.ndarray) -> np.ndarray:
    # uint64 view so NaN payload changes still register
    return np.flatnonzero(before.view(np.uint64) != after.view(np.uint64))


def _run_chunks_debug(kernel: Kernel, plan: LaunchPlan, args, arrays, padded) -> None:
    """Sequential execution with per-chunk write tracking."""
    for i in range(plan.chunk_count):
        base = i * plan.vvl
        snapshots = [a.copy() for a in arrays]
        kernel.chunk_fn(base, plan.vvl, args)
        for a, snap, p in zip(arrays, snapshots, padded):
            for idx in _bitwise_changed(snap, a):
                site = int(idx) % p
                if not (base <= site < base + plan.vvl):
                    raise ContractViolationError(
                        f"kernel {kernel.name!r} wrote site {site} outside chunk "
                        f"[{base}, {base + plan.vvl})"
                    )


def _run_ranges(kernel: Kernel, ranges: Sequence[tuple[int, int]], vvl: int, args,
                use_compiled: bool) -> None:
    for lo, hi in ranges:
        if use_compiled:
            kernel.range_fn(lo, hi, vvl, args)  # type: ignore[misc]
        else:
            for i in range(lo, hi):
                kernel.chunk_fn(i * vvl, vvl, args)


def launch(
    device: TargetDevice,
    kernel: Kernel,
    plan: LaunchPlan,
    buffers: Sequence[TargetBuffer],
    constant_keys: Sequence[str] | None = None,
) -> LaunchHandle:
    """Dispatch a kernel: exactly one invocation per VVL-sized chunk.

    The launch is asynchronous on the threaded and emulated backends;
    sync_target is the completion barrier. The reference backend executes
    synchronously. Kernel-raised errors are deferred to sync_target.
    """
    arrays = []
    padded = []
    for buf in buffers:
        if buf.device is not device:
            raise DeviceError(f"buffer belongs to a different device than the launch target")
        if not buf.valid:
            raise LifecycleError("launch with a freed buffer")
        if plan.extent > buf.descriptor.padded_sites:
            raise PlanError(
                f"extent {plan.extent} exceeds buffer padded_sites "
                f"{buf.descriptor.padded_sites}"
            )
        arrays.append(buf._array())
        padded.append(buf.descriptor.padded_sites)
    arrays = tuple(arrays)
    padded = tuple(padded)

    # one launch at a time per device: launch-after-launch waits
    prev = device._active
    if prev is not None and not prev.done():
        prev.wait()
        device._deferred_errors = getattr(device, "_deferred_errors", []) + prev.errors
        device._active = None

    keys = list(constant_keys) if constant_keys is not None else list(device.constants.keys())
    constants = {k: device.constants.get(k) for k in keys}

    args = kernel.prepare(device, plan, tuple(buffers), arrays, padded, constants)
    device.counters.launches += 1

    handle = LaunchHandle()
    use_compiled = kernel.range_fn is not None and not device.debug
    schedule = backend_schedule(plan, device.backend)

    if device.debug:
        try:
            _run_chunks_debug(kernel, plan, args, arrays, padded)
        except Exception as exc:  # deferred to sync_target
            handle.errors.append(exc)
        handle._done.set()
    elif device.backend == "reference":
        try:
            _run_ranges(kernel, schedule[0], plan.vvl, args, use_compiled)
        except Exception as exc:
            handle.errors.append(exc)
        handle._done.set()
    else:
        pool = device._pool(plan.workers)
        for ranges in schedule:
            if ranges:
                handle.futures.append(
                    pool.submit(_run_ranges, kernel, ranges, plan.vvl, args, use_compiled)
                )
    device._active = handle
    return handle


def sync_target(device: TargetDevice) -> None:
    """Wait for all issued launches on device; raise any deferred kernel error."""
    handle = device._active
    if handle is not None:
        handle.wait()
        device._active = None
        device._deferred_errors = getattr(device, "_deferred_errors", []) + handle.errors
    pending = getattr(device, "_deferred_errors", [])
    if pending:
        device._deferred_errors = []
        raise pending[0]
