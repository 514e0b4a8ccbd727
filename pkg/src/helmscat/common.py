"""Shared conventions: jet channel layout, boundary-condition kinds.

A "jet" bundles the value, gradient, and Hessian of a scalar field at a
point. Throughout the package jets travel as arrays whose second-to-last
axis is the channel axis in the fixed order below; the mixed second
derivative appears once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VAL, DX, DY, DXX, DXY, DYY = range(6)

#: number of jet channels carried for derivative order 0 / 1 / 2
CHANNELS_FOR_ORDER = {0: 1, 1: 3, 2: 6}

SOUND_SOFT = "sound-soft"
SOUND_HARD = "sound-hard"
IMPEDANCE = "impedance"
BC_KINDS = (SOUND_SOFT, SOUND_HARD, IMPEDANCE)


def validate_bc(bc: str) -> str:
    if bc not in BC_KINDS:
        raise ValueError(f"unknown boundary condition {bc!r}; expected one of {BC_KINDS}")
    return bc


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and symmetric Hessian of a scalar field at a point."""

    value: float
    grad: np.ndarray  # (2,)
    hess: np.ndarray  # (2, 2), symmetric

    @classmethod
    def from_channels(cls, channels: np.ndarray) -> "Jet2":
        h = np.array(
            [[channels[DXX], channels[DXY]], [channels[DXY], channels[DYY]]]
        )
        return cls(value=channels[VAL], grad=np.array(channels[DX:DY + 1]), hess=h)

    def to_channels(self) -> np.ndarray:
        return np.array(
            [
                self.value,
                self.grad[0],
                self.grad[1],
                self.hess[0, 0],
                self.hess[0, 1],
                self.hess[1, 1],
            ]
        )
