"""Verification suites: oracle equivalence and conservation checks.

Used by the CLI's --verify mode and by the acceptance tests. The reference
path is the pure-scalar oracle in latkit.oracle; the framework path goes
through target buffers and launch().
"""

from __future__ import annotations

import numpy as np

from .execution import LaunchPlan, launch, sync_target
from .kernels import (
    binary_collision_kernel,
    equilibrium_binary_state,
    random_binary_state,
    random_vector_field,
    scale_kernel,
    set_model_constants,
)
from .lattice import Field, LatticeShape, field_create
from .memory import TargetDevice, copy_from_target, copy_to_target, target_malloc
from .model import D3Q19Model, Q
from .oracle import collide_reference, scale_reference

DEFAULT_VVLS = (1, 2, 4, 8)
DEFAULT_WORKERS = (1, 2, 4)
DEFAULT_BACKENDS = ("reference", "threaded", "emulated")


def run_framework_collision(f: Field, g: Field, backend: str, vvl: int, workers: int,
                            steps: int = 1, model: D3Q19Model | None = None,
                            tpb: int = 128, debug: bool = False) -> tuple[Field, Field]:
    """Collide copies of (f, g) through the framework; inputs are untouched."""
    model = model or D3Q19Model()
    device = TargetDevice(backend=backend, workers=workers, debug=debug)
    set_model_constants(device, model)
    bf = target_malloc(device, f.descriptor)
    bg = target_malloc(device, g.descriptor)
    copy_to_target(bf, f)
    copy_to_target(bg, g)
    plan = LaunchPlan(extent=f.descriptor.padded_sites, vvl=vvl, workers=workers, tpb=tpb)
    for _ in range(steps):
        launch(device, binary_collision_kernel, plan, [bf, bg])
        sync_target(device)
    f_out = field_create(f.descriptor)
    g_out = field_create(g.descriptor)
    copy_from_target(f_out, bf)
    copy_from_target(g_out, bg)
    device.close()
    return f_out, g_out


def run_framework_scale(field: Field, a: float, backend: str, vvl: int, workers: int,
                        tpb: int = 128, debug: bool = False) -> Field:
    """Scale a copy of `field` through the framework; the input is untouched."""
    device = TargetDevice(backend=backend, workers=workers, debug=debug)
    device.constant_set_double("a", a)
    buf = target_malloc(device, field.descriptor)
    copy_to_target(buf, field)
    plan = LaunchPlan(extent=field.descriptor.padded_sites, vvl=vvl, workers=workers, tpb=tpb)
    launch(device, scale_kernel, plan, [buf])
    sync_target(device)
    out = field_create(field.descriptor)
    copy_from_target(out, buf)
    device.close()
    return out


def observables(f: Field, g: Field, model: D3Q19Model | None = None):
    """Per-site (rho, momentum[3], phi) over real sites."""
    model = model or D3Q19Model()
    nsites = f.descriptor.nsites
    rho = np.zeros(nsites)
    mom = np.zeros((3, nsites))
    phi = np.zeros(nsites)
    for i in range(Q):
        fi = f.component(i)
        rho += fi
        for d in range(3):
            mom[d] += fi * model.cvf[i, d]
        phi += g.component(i)
    return rho, mom, phi


def _bitwise_equal(a: Field, b: Field) -> bool:
    return bool(np.array_equal(a.data.view(np.uint64), b.data.view(np.uint64)))


def verify_equivalence(kernel_id: str, shape: LatticeShape, seed: int = 1234,
                       vvls=DEFAULT_VVLS, workers_list=DEFAULT_WORKERS,
                       backends=DEFAULT_BACKENDS, steps: int = 1) -> tuple[bool, list[str]]:
    """Bitwise equality of every configuration against the scalar oracle."""
    rng = np.random.default_rng(seed)
    model = D3Q19Model()
    lines = []
    ok = True

    if kernel_id == "scale":
        base = random_vector_field(shape, rng)
        ref = Field(base.descriptor, base.data.copy())
        scale_reference(ref, 0.37)
    else:
        f0, g0 = random_binary_state(shape, rng, model)
        ref_f = Field(f0.descriptor, f0.data.copy())
        ref_g = Field(g0.descriptor, g0.data.copy())
        collide_reference(ref_f, ref_g, shape, model, steps=steps)

    for backend in backends:
        for workers in workers_list:
            for vvl in vvls:
                if kernel_id == "scale":
                    out = run_framework_scale(base, 0.37, backend, vvl, workers)
                    same = _bitwise_equal(out, ref)
                else:
                    of, og = run_framework_collision(f0, g0, backend, vvl, workers,
                                                     steps=steps, model=model)
                    same = _bitwise_equal(of, ref_f) and _bitwise_equal(og, ref_g)
                tag = f"equivalence {kernel_id} backend={backend} workers={workers} vvl={vvl}"
                lines.append(f"{'PASS' if same else 'FAIL'} {tag}")
                ok = ok and same
    return ok, lines


def verify_conservation(shape: LatticeShape, seed: int = 1234,
                        rel_tol: float = 1e-13) -> tuple[bool, list[str]]:
    """Per-site rho, momentum, and phi preserved by one collision step."""
    rng = np.random.default_rng(seed)
    model = D3Q19Model()
    f0, g0 = random_binary_state(shape, rng, model)
    rho0, mom0, phi0 = observables(f0, g0, model)
    f1, g1 = run_framework_collision(f0, g0, "reference", 4, 1, model=model)
    rho1, mom1, phi1 = observables(f1, g1, model)

    def rel(a, b):
        scale = np.maximum(np.abs(a), 1.0)
        return float(np.max(np.abs(a - b) / scale))

    checks = [
        ("rho", rel(rho0, rho1)),
        ("momentum", rel(mom0, mom1)),
        ("phi", rel(phi0, phi1)),
    ]
    ok = True
    lines = []
    for name, err in checks:
        good = err <= rel_tol
        lines.append(f"{'PASS' if good else 'FAIL'} conservation {name} "
                     f"rel_err={err:.3e} (tol {rel_tol:g})")
        ok = ok and good
    return ok, lines


def verify_fixed_point(shape: LatticeShape, rho: float = 1.0,
                       u=(0.02, -0.01, 0.03), phi: float = 0.3,
                       tol: float = 1e-13) -> tuple[bool, list[str]]:
    """A uniform equilibrium state is (near-)invariant under one collision."""
    model = D3Q19Model()
    f0, g0 = equilibrium_binary_state(shape, rho, u, phi, model)
    f1, g1 = run_framework_collision(f0, g0, "reference", 4, 1, model=model)
    err = max(float(np.max(np.abs(f1.data - f0.data))),
              float(np.max(np.abs(g1.data - g0.data))))
    good = err < tol
    return good, [f"{'PASS' if good else 'FAIL'} equilibrium fixed point "
                  f"max_abs_change={err:.3e} (tol {tol:g})"]


def run_verify_suite(kernel_id: str, shape: LatticeShape, seed: int = 1234,
                     vvls=DEFAULT_VVLS, workers_list=DEFAULT_WORKERS,
                     backends=DEFAULT_BACKENDS) -> tuple[bool, list[str]]:
    """The --verify bundle: equivalence always, physics suites for collision."""
    ok, lines = verify_equivalence(kernel_id, shape, seed, vvls, workers_list, backends)
    if kernel_id == "binary-collision":
        ok2, lines2 = verify_conservation(shape, seed)
        ok3, lines3 = verify_fixed_point(shape)
        ok = ok and ok2 and ok3
        lines += lines2 + lines3
    return ok, lines
