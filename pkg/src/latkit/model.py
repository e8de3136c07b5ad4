"""D3Q19 lattice Boltzmann model constants.

Velocity set ordering: the rest vector, then the six axis unit vectors, then
the twelve face diagonals. Weights are 1/3, 1/18, 1/36 respectively; the set
is closed under negation and satisfies the usual moment identities
(sum w = 1, sum w*c = 0, sum w*c_a*c_b = delta_ab / 3) to 1e-15 in doubles.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConfigError

Q = 19
CS2 = 1.0 / 3.0


def _velocity_set() -> np.ndarray:
    cv = [(0, 0, 0)]
    for d in range(3):
        for sgn in (1, -1):
            v = [0, 0, 0]
            v[d] = sgn
            cv.append(tuple(v))
    for a, b in ((0, 1), (0, 2), (1, 2)):
        for sa in (1, -1):
            for sb in (1, -1):
                v = [0, 0, 0]
                v[a], v[b] = sa, sb
                cv.append(tuple(v))
    return np.array(cv, dtype=np.int64)


def _weights() -> np.ndarray:
    return np.array([1.0 / 3.0] + [1.0 / 18.0] * 6 + [1.0 / 36.0] * 12)


@dataclass(frozen=True)
class D3Q19Model:
    """Velocity set, weights, sound speed, and the two relaxation times."""

    cv: np.ndarray = dc_field(default_factory=_velocity_set)
    wv: np.ndarray = dc_field(default_factory=_weights)
    cs2: float = CS2
    tau_f: float = 1.0
    tau_g: float = 1.0

    def __post_init__(self) -> None:
        if self.tau_f <= 0.5 or self.tau_g <= 0.5:
            raise ConfigError("relaxation times must be > 0.5")
        self.cv.setflags(write=False)
        self.wv.setflags(write=False)

    @property
    def cvf(self) -> np.ndarray:
        """Velocity set as float64, shape (19, 3)."""
        return self.cv.astype(np.float64)

    def negation_index(self) -> np.ndarray:
        """Index map i -> j with cv[j] = -cv[i]."""
        out = np.empty(Q, dtype=np.int64)
        for i in range(Q):
            (j,) = np.nonzero((self.cv == -self.cv[i]).all(axis=1))[0]
            out[i] = j
        return out
