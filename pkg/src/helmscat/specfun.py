"""Cylinder functions for the annular scattering solver.

Real-argument Bessel functions J_n, Y_n, Hankel functions of the first
kind H_n^(1) = J_n + i Y_n, their derivatives, and the outgoing-wave
symbol h_n(z) = z H_n^(1)'(z) / H_n^(1)(z) used by the truncated
transparent boundary operator.

Evaluation is delegated to scipy.special (double precision, relative
accuracy ~1e-13 over the supported range); this module owns the domain
contract: order cap, strict domain checks, the reflection identity for
negative orders, and the guarantee that no NaN/Inf escapes.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

# Orders above this overflow/underflow double precision for small moduli
# long before the solver would ever need them (DtN truncation stays at a
# few dozen modes).
MAX_ORDER = 128


def _check_order(n: int) -> int:
    if n != int(n):
        raise ValueError(f"order must be an integer, got {n!r}")
    n = int(n)
    if abs(n) > MAX_ORDER:
        raise ValueError(f"order overflow: |n|={abs(n)} exceeds cap {MAX_ORDER}")
    return n


def _finite(value, n: int, x: float, name: str):
    if not np.all(np.isfinite(value)):
        raise ValueError(
            f"{name}(n={n}, x={x}) is not representable in double precision"
        )
    return value


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind J_n(x) for n >= 0, x >= 0."""
    n = _check_order(n)
    if n < 0:
        raise ValueError(f"bessel_j requires order n >= 0, got {n}")
    if x < 0:
        raise ValueError(f"bessel_j requires x >= 0, got {x}")
    return float(_finite(_sp.jv(n, x), n, x, "bessel_j"))


def bessel_y(n: int, x: float) -> float:
    """Bessel function of the second kind Y_n(x) for n >= 0, x > 0."""
    n = _check_order(n)
    if n < 0:
        raise ValueError(f"bessel_y requires order n >= 0, got {n}")
    if x <= 0:
        raise ValueError(f"bessel_y requires x > 0, got {x}")
    return float(_finite(_sp.yv(n, x), n, x, "bessel_y"))


def hankel1(n: int, x: float) -> complex:
    """Hankel function of the first kind H_n^(1)(x) = J_n(x) + i Y_n(x).

    Assembled from the real Bessel pair so it agrees bitwise with
    bessel_j/bessel_y. Negative orders use the reflection identity
    H_{-n} = (-1)^n H_n, applied exactly (same double-precision value,
    flipped sign for odd n).
    """
    n = _check_order(n)
    if x <= 0:
        raise ValueError(f"hankel1 requires x > 0, got {x}")
    m = abs(n)
    value = complex(bessel_j(m, x), bessel_y(m, x))
    if n < 0 and m % 2 == 1:
        value = -value
    return value


def hankel1_deriv(n: int, x: float) -> complex:
    """Derivative H_n^(1)'(x) via the recurrence H_n' = H_{n-1} - (n/x) H_n."""
    n = _check_order(n)
    if x <= 0:
        raise ValueError(f"hankel1_deriv requires x > 0, got {x}")
    return hankel1(n - 1, x) - (n / x) * hankel1(n, x)


def dtn_symbol(n: int, z: float) -> complex:
    """Outgoing-wave symbol h_n(z) = z H_n^(1)'(z) / H_n^(1)(z).

    Even in the order n. The imaginary part is evaluated through the
    Bessel Wronskian, Im h_n(z) = 2 / (pi |H_n(z)|^2): it is strictly
    positive for every real z > 0 (the outgoing-wave sign), whereas the
    naive complex ratio cancels catastrophically once n >> z.
    """
    n = abs(_check_order(n))
    if z <= 0:
        raise ValueError(f"dtn_symbol requires z > 0, got {z}")
    j, y = bessel_j(n, z), bessel_y(n, z)
    if n == 0:
        jp, yp = -bessel_j(1, z), -bessel_y(1, z)
    else:
        jp = bessel_j(n - 1, z) - (n / z) * j
        yp = bessel_y(n - 1, z) - (n / z) * y
    den = _finite(j * j + y * y, n, z, "dtn_symbol")
    re = z * (jp * j + yp * y) / den
    im = 2.0 / (np.pi * den)
    return complex(re, im)
