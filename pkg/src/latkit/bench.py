"""Benchmark runs, sweeps, and reporting.

Timing covers kernel launches only: host<->target copies happen once during
setup and are excluded, as in a collision micro-benchmark. Every run does
one untimed warm-up iteration (which also absorbs JIT compilation).
"""

from __future__ import annotations

import io
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .execution import LaunchPlan, launch, sync_target
from .kernels import (
    kernel_by_id,
    random_binary_state,
    random_vector_field,
    set_model_constants,
)
from .lattice import LatticeShape, DEFAULT_MAX_VVL
from .memory import TargetDevice, TransferCounters, copy_to_target, target_malloc
from .model import D3Q19Model

# bytes moved per site per iteration (read + write of every component)
_BYTES_PER_SITE = {"scale": 3 * 8 * 2, "binary-collision": 2 * 19 * 8 * 2}


@dataclass
class BenchResult:
    kernel: str
    backend: str
    nx: int
    ny: int
    nz: int
    vvl: int
    workers: int
    tpb: int
    iters: int
    elapsed_s: float
    sites_per_s: float
    bandwidth_gb_s: float
    counters: TransferCounters


def benchmark_run(
    kernel_id: str,
    shape: LatticeShape,
    vvl: int,
    workers: int,
    backend: str,
    iterations: int,
    tpb: int = 128,
    seed: int = 1234,
    max_vvl: int = DEFAULT_MAX_VVL,
) -> BenchResult:
    """Time `iterations` launches of one kernel configuration."""
    if iterations < 1:
        raise ConfigError("iterations must be >= 1")
    rng = np.random.default_rng(seed)
    device = TargetDevice(backend=backend, workers=workers)
    kernel = kernel_by_id(kernel_id)

    if kernel_id == "scale":
        field = random_vector_field(shape, rng, max_vvl)
        device.constant_set_double("a", 1.0)  # full work, no drift over many iterations
        bufs = [target_malloc(device, field.descriptor)]
        copy_to_target(bufs[0], field)
    else:
        model = D3Q19Model()
        f, g = random_binary_state(shape, rng, model, max_vvl)
        set_model_constants(device, model)
        bufs = [target_malloc(device, f.descriptor), target_malloc(device, g.descriptor)]
        copy_to_target(bufs[0], f)
        copy_to_target(bufs[1], g)

    plan = LaunchPlan(extent=bufs[0].descriptor.padded_sites, vvl=vvl, workers=workers, tpb=tpb)

    launch(device, kernel, plan, bufs)  # warm-up, untimed
    sync_target(device)

    t0 = time.perf_counter()
    for _ in range(iterations):
        launch(device, kernel, plan, bufs)
        sync_target(device)
    elapsed = time.perf_counter() - t0

    sites_per_s = shape.nsites * iterations / elapsed
    bandwidth = sites_per_s * _BYTES_PER_SITE[kernel_id] / 1e9
    result = BenchResult(
        kernel=kernel_id, backend=backend,
        nx=shape.nx, ny=shape.ny, nz=shape.nz,
        vvl=vvl, workers=workers, tpb=tpb, iters=iterations,
        elapsed_s=elapsed, sites_per_s=sites_per_s, bandwidth_gb_s=bandwidth,
        counters=device.counters,
    )
    device.close()
    return result


def run_sweep(
    kernel_id: str,
    shape: LatticeShape,
    vvls: list[int],
    workers_list: list[int],
    backends: list[str],
    iterations: int,
    tpb: int = 128,
    seed: int = 1234,
) -> list[BenchResult]:
    """One benchmark_run per (backend, workers, vvl), in input order."""
    if not vvls or not workers_list or not backends:
        raise ConfigError("vvl, workers, and backend lists must be non-empty")
    results = []
    for backend in backends:
        for workers in workers_list:
            for vvl in vvls:
                results.append(benchmark_run(kernel_id, shape, vvl, workers,
                                             backend, iterations, tpb=tpb, seed=seed))
    return results


CSV_HEADER = "kernel,backend,nx,ny,nz,vvl,workers,tpb,iters,elapsed_s,sites_per_s"


def emit_csv(results: list[BenchResult]) -> str:
    """CSV with one row per configuration, in input order."""
    if not results:
        raise ConfigError("no results to emit")
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in results:
        out.write(
            f"{r.kernel},{r.backend},{r.nx},{r.ny},{r.nz},{r.vvl},{r.workers},"
            f"{r.tpb},{r.iters},{r.elapsed_s:.9g},{r.sites_per_s:.9g}\n"
        )
    return out.getvalue()


def emit_table(results: list[BenchResult]) -> str:
    cols = CSV_HEADER.split(",")
    rows = [cols]
    for r in results:
        rows.append([r.kernel, r.backend, str(r.nx), str(r.ny), str(r.nz),
                     str(r.vvl), str(r.workers), str(r.tpb), str(r.iters),
                     f"{r.elapsed_s:.4f}", f"{r.sites_per_s:.4g}"])
    widths = [max(len(row[i]) for row in rows) for i in range(len(cols))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in rows]
    return "\n".join(lines) + "\n"


def report_best(results: list[BenchResult]) -> list[str]:
    """Per (kernel, backend): best VVL and its speedup over the VVL=1 run.

    The speedup baseline is the VVL=1 result with the same worker count as
    the best configuration; ties on throughput go to the smaller VVL.
    """
    groups: dict[tuple[str, str], list[BenchResult]] = {}
    for r in results:
        groups.setdefault((r.kernel, r.backend), []).append(r)
    lines = []
    for (kernel, backend), rows in groups.items():
        baselines = {r.workers: r for r in rows if r.vvl == 1}
        for r in rows:
            if r.workers not in baselines:
                raise ConfigError(
                    f"missing VVL=1 baseline for {kernel}/{backend} workers={r.workers}"
                )
        best = max(rows, key=lambda r: (r.sites_per_s, -r.vvl))
        speedup = best.sites_per_s / baselines[best.workers].sites_per_s
        lines.append(f"{kernel}/{backend}: best VVL={best.vvl}, {speedup:.2f}x over VVL=1")
    return lines
