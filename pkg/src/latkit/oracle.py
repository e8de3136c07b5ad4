"""Plain scalar reference implementations.

These walk the lattice with triple-nested x/y/z loops and per-site scalar
arithmetic, with no chunking, no workers, and no compiled code. They are the
independent path the framework kernels are verified against: given the same
input they must reproduce the framework output bit for bit.
"""

from __future__ import annotations

import numpy as np

from .kernels import bgk_relax, equilibrium, moments
from .lattice import Field, LatticeShape
from .model import D3Q19Model, Q


def scale_reference(field: Field, a: float) -> None:
    """Scale every stored element (padding included) by a, in place."""
    data = field.data
    padded = field.descriptor.padded_sites
    for c in range(field.descriptor.ncomp):
        off = c * padded
        for s in range(padded):
            data[off + s] = a * data[off + s]


def collide_reference(f: Field, g: Field, shape: LatticeShape,
                      model: D3Q19Model | None = None, steps: int = 1) -> None:
    """Run `steps` binary BGK collision steps on host fields, in place.

    Visits real sites only; padding is untouched (matching the framework
    kernel, which skips zero-density padding sites).
    """
    model = model or D3Q19Model()
    padded = f.descriptor.padded_sites
    fd = f.data
    gd = g.data
    f_site = np.empty(Q)
    g_site = np.empty(Q)
    for _ in range(steps):
        for x in range(shape.nx):
            for y in range(shape.ny):
                for z in range(shape.nz):
                    s = (x * shape.ny + y) * shape.nz + z
                    for i in range(Q):
                        f_site[i] = fd[i * padded + s]
                        g_site[i] = gd[i * padded + s]
                    rho, u = moments(f_site, model)
                    phi = 0.0
                    for i in range(Q):
                        phi += g_site[i]
                    f_eq = equilibrium(rho, u, model)
                    g_eq = equilibrium(phi, u, model)
                    f_new = bgk_relax(f_site, f_eq, model.tau_f)
                    g_new = bgk_relax(g_site, g_eq, model.tau_g)
                    for i in range(Q):
                        fd[i * padded + s] = f_new[i]
                        gd[i * padded + s] = g_new[i]


def masked_copy_reference(dst: np.ndarray, src: np.ndarray, ncomp: int,
                          padded: int, flags: np.ndarray) -> None:
    """Element-by-element masked copy: the oracle for masked transfers."""
    for c in range(ncomp):
        for s in range(flags.size):
            if flags[s]:
                dst[c * padded + s] = src[c * padded + s]
