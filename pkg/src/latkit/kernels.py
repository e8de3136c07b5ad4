"""Workload kernels: 3-vector scaling and D3Q19 binary-fluid BGK collision.

The collision kernel carries two 19-component distributions: f transports
mass and momentum, g an order parameter phi distinguishing the two fluids.
Each site relaxes both toward second-order equilibria built from f's own
moments -- dense per-site arithmetic with inner loops of extent 19 and 3,
the access pattern the lane loop is meant to vectorize. There is no
streaming step; the benchmark is collision only.

Site-level helpers (moments, equilibrium, bgk_relax) are written with the
exact operation order the compiled kernels use, so a scalar loop built from
them reproduces the framework output bitwise.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import ConfigError, ShapeError, SingularStateError
from .execution import Kernel
from .lattice import Field, FieldDescriptor, LatticeShape, field_create
from .memory import TargetDevice
from .model import D3Q19Model, Q

# -- site-level operations ---------------------------------------------------


def moments(f_site, model: D3Q19Model) -> tuple[float, tuple[float, float, float]]:
    """Density rho = sum_i f_i and velocity u = sum_i f_i c_i / rho."""
    cvf = model.cvf
    rho = 0.0
    fx = 0.0
    fy = 0.0
    fz = 0.0
    for i in range(Q):
        fi = float(f_site[i])
        rho += fi
        fx += fi * cvf[i, 0]
        fy += fi * cvf[i, 1]
        fz += fi * cvf[i, 2]
    if rho == 0.0:
        raise SingularStateError("moments undefined: rho = 0")
    return rho, (fx / rho, fy / rho, fz / rho)


def equilibrium(rho: float, u, model: D3Q19Model) -> np.ndarray:
    """Second-order equilibrium distribution for density rho and velocity u.

    Also used with the order parameter phi in place of rho (same bracket);
    positivity is required of rho only when u is derived from it.
    """
    cvf = model.cvf
    wv = model.wv
    cs2 = model.cs2
    ux, uy, uz = float(u[0]), float(u[1]), float(u[2])
    usq = ux * ux + uy * uy + uz * uz
    out = np.empty(Q)
    for i in range(Q):
        udotc = ux * cvf[i, 0] + uy * cvf[i, 1] + uz * cvf[i, 2]
        bracket = 1.0 + udotc / cs2 + (udotc * udotc) / (2.0 * cs2 * cs2) - usq / (2.0 * cs2)
        out[i] = wv[i] * rho * bracket
    return out


def bgk_relax(f_site, f_eq, tau: float) -> np.ndarray:
    """Single-relaxation-time update f' = f - (f - f_eq)/tau."""
    if tau <= 0.5:
        raise ConfigError("tau must be > 0.5")
    out = np.empty(Q)
    for i in range(Q):
        out[i] = f_site[i] - (f_site[i] - f_eq[i]) / tau
    return out


# -- compiled chunk ranges ---------------------------------------------------


@njit(nogil=True, cache=True)
def _scale_range(chunk_lo, chunk_hi, vvl, field, padded, a):  # pragma: no cover
    for chunk in range(chunk_lo, chunk_hi):
        base = chunk * vvl
        for c in range(3):
            off = c * padded + base
            for v in range(vvl):
                field[off + v] = a * field[off + v]


@njit(nogil=True, cache=True)
def _collision_range(chunk_lo, chunk_hi, vvl, f, g, padded, nsites,
                     wv, cvx, cvy, cvz, cs2, tau_f, tau_g):  # pragma: no cover
    for chunk in range(chunk_lo, chunk_hi):
        base = chunk * vvl
        for v in range(vvl):
            s = base + v
            rho = 0.0
            fx = 0.0
            fy = 0.0
            fz = 0.0
            for i in range(Q):
                fi = f[i * padded + s]
                rho += fi
                fx += fi * cvx[i]
                fy += fi * cvy[i]
                fz += fi * cvz[i]
            if rho <= 0.0:
                if s < nsites:
                    raise SingularStateError("rho <= 0 at a lattice site")
                continue  # zero-filled padding site: leave untouched
            ux = fx / rho
            uy = fy / rho
            uz = fz / rho
            phi = 0.0
            for i in range(Q):
                phi += g[i * padded + s]
            usq = ux * ux + uy * uy + uz * uz
            for i in range(Q):
                udotc = ux * cvx[i] + uy * cvy[i] + uz * cvz[i]
                bracket = (1.0 + udotc / cs2 + (udotc * udotc) / (2.0 * cs2 * cs2)
                           - usq / (2.0 * cs2))
                feq = wv[i] * rho * bracket
                geq = wv[i] * phi * bracket
                idx = i * padded + s
                f[idx] = f[idx] - (f[idx] - feq) / tau_f
                g[idx] = g[idx] - (g[idx] - geq) / tau_g


# -- kernel objects ----------------------------------------------------------


def _scale_prepare(device, plan, buffers, arrays, padded, constants):
    if len(buffers) != 1:
        raise ShapeError("scale kernel binds exactly one buffer")
    if buffers[0].descriptor.ncomp != 3:
        raise ShapeError(f"scale kernel needs ncomp=3, got {buffers[0].descriptor.ncomp}")
    try:
        a = float(constants["a"])
    except KeyError:
        raise ConfigError("scale kernel requires constant 'a'") from None
    return (arrays[0], padded[0], a)


scale_kernel = Kernel(
    "scale",
    chunk_fn=lambda base, vvl, args: _scale_range(base // vvl, base // vvl + 1, vvl, *args),
    prepare=_scale_prepare,
    range_fn=lambda lo, hi, vvl, args: _scale_range(lo, hi, vvl, *args),
)


def _collision_prepare(device, plan, buffers, arrays, padded, constants):
    if len(buffers) != 2:
        raise ShapeError("collision kernel binds exactly two buffers (f, g)")
    for buf in buffers:
        if buf.descriptor.ncomp != Q:
            raise ShapeError(f"collision kernel needs ncomp={Q}, got {buf.descriptor.ncomp}")
    if buffers[0].descriptor != buffers[1].descriptor:
        raise ShapeError("f and g must share one descriptor")
    try:
        wv = np.ascontiguousarray(constants["wv"], dtype=np.float64)
        cv = np.asarray(constants["cv"], dtype=np.float64)
        cs2 = float(constants["cs2"])
        tau_f = float(constants["tau_f"])
        tau_g = float(constants["tau_g"])
    except KeyError as exc:
        raise ConfigError(f"collision kernel requires constant {exc.args[0]!r}") from None
    if wv.shape != (Q,) or cv.shape != (Q, 3):
        raise ShapeError("wv must be (19,), cv must be (19, 3)")
    cvx = np.ascontiguousarray(cv[:, 0])
    cvy = np.ascontiguousarray(cv[:, 1])
    cvz = np.ascontiguousarray(cv[:, 2])
    nsites = buffers[0].descriptor.nsites
    return (arrays[0], arrays[1], padded[0], nsites, wv, cvx, cvy, cvz, cs2, tau_f, tau_g)


binary_collision_kernel = Kernel(
    "binary-collision",
    chunk_fn=lambda base, vvl, args: _collision_range(base // vvl, base // vvl + 1, vvl, *args),
    prepare=_collision_prepare,
    range_fn=lambda lo, hi, vvl, args: _collision_range(lo, hi, vvl, *args),
)

KERNEL_IDS = ("scale", "binary-collision")


def kernel_by_id(kernel_id: str) -> Kernel:
    if kernel_id == "scale":
        return scale_kernel
    if kernel_id == "binary-collision":
        return binary_collision_kernel
    raise ConfigError(f"unknown kernel {kernel_id!r}; expected one of {KERNEL_IDS}")


def set_model_constants(device: TargetDevice, model: D3Q19Model) -> None:
    """Mirror the D3Q19 parameters into the device constant store."""
    device.constant_set_double_array("wv", model.wv, (Q,))
    device.constant_set_double_array("cv", model.cvf, (Q, 3))
    device.constant_set_double("cs2", model.cs2)
    device.constant_set_double("tau_f", model.tau_f)
    device.constant_set_double("tau_g", model.tau_g)


# -- state construction ------------------------------------------------------


def random_vector_field(shape: LatticeShape, rng: np.random.Generator,
                        max_vvl: int | None = None) -> Field:
    """Random 3-component field on the given lattice."""
    desc = _descriptor(3, shape, max_vvl)
    f = field_create(desc)
    for c in range(3):
        f.component(c)[:] = rng.random(desc.nsites)
    return f


def random_binary_state(shape: LatticeShape, rng: np.random.Generator,
                        model: D3Q19Model | None = None,
                        max_vvl: int | None = None) -> tuple[Field, Field]:
    """Random admissible (f, g) pair: every f_i > 0, so rho > 0 at all sites."""
    model = model or D3Q19Model()
    fdesc = _descriptor(Q, shape, max_vvl)
    f = field_create(fdesc)
    g = field_create(fdesc)
    for i in range(Q):
        f.component(i)[:] = model.wv[i] * (1.0 + 0.2 * rng.random(fdesc.nsites))
        g.component(i)[:] = model.wv[i] * (0.3 + 0.1 * (rng.random(fdesc.nsites) - 0.5))
    return f, g


def equilibrium_binary_state(shape: LatticeShape, rho: float, u, phi: float,
                             model: D3Q19Model | None = None,
                             max_vvl: int | None = None) -> tuple[Field, Field]:
    """(f, g) initialized to the uniform equilibrium state everywhere."""
    model = model or D3Q19Model()
    feq = equilibrium(rho, u, model)
    geq = equilibrium(phi, u, model)
    fdesc = _descriptor(Q, shape, max_vvl)
    f = field_create(fdesc)
    g = field_create(fdesc)
    for i in range(Q):
        f.component(i)[:] = feq[i]
        g.component(i)[:] = geq[i]
    return f, g


def _descriptor(ncomp: int, shape: LatticeShape, max_vvl: int | None) -> FieldDescriptor:
    if max_vvl is None:
        return FieldDescriptor.create(ncomp, shape.nsites)
    return FieldDescriptor.create(ncomp, shape.nsites, max_vvl)
