"""Fused elementwise kernels for the jet propagation.

Each kernel works on channel-first 2-D views (channels, points*units) so
every channel row is one contiguous slab; tanh itself is evaluated by
numpy's SIMD implementation and passed in. All kernels are single-threaded
and loop in a fixed order, keeping results bitwise reproducible.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def nl_forward_o1(pre, t, out):
    for k in range(t.shape[0]):
        tt = t[k]
        u = 1.0 - tt * tt
        out[0, k] = tt
        out[1, k] = u * pre[1, k]
        out[2, k] = u * pre[2, k]


@numba.njit(cache=True)
def nl_forward_o2(pre, t, out):
    for k in range(t.shape[0]):
        tt = t[k]
        u = 1.0 - tt * tt
        v = -2.0 * tt * u
        gx = pre[1, k]
        gy = pre[2, k]
        out[0, k] = tt
        out[1, k] = u * gx
        out[2, k] = u * gy
        out[3, k] = u * pre[3, k] + v * gx * gx
        out[4, k] = u * pre[4, k] + v * gx * gy
        out[5, k] = u * pre[5, k] + v * gy * gy


@numba.njit(cache=True)
def nl_backward_o0(t, bar, pre_bar):
    for k in range(t.shape[0]):
        tt = t[k]
        pre_bar[0, k] = bar[0, k] * (1.0 - tt * tt)


@numba.njit(cache=True)
def nl_backward_o1(pre, t, bar, pre_bar):
    for k in range(t.shape[0]):
        tt = t[k]
        u = 1.0 - tt * tt
        v = -2.0 * tt * u
        u_bar = pre[1, k] * bar[1, k] + pre[2, k] * bar[2, k]
        pre_bar[1, k] = u * bar[1, k]
        pre_bar[2, k] = u * bar[2, k]
        pre_bar[0, k] = bar[0, k] * u + u_bar * v


@numba.njit(cache=True)
def nl_backward_o2(pre, t, bar, pre_bar):
    for k in range(t.shape[0]):
        tt = t[k]
        u = 1.0 - tt * tt
        v = -2.0 * tt * u
        gx = pre[1, k]
        gy = pre[2, k]
        bxx = bar[3, k]
        bxy = bar[4, k]
        byy = bar[5, k]
        u_bar = (
            gx * bar[1, k]
            + gy * bar[2, k]
            + pre[3, k] * bxx
            + pre[4, k] * bxy
            + pre[5, k] * byy
        )
        v_bar = gx * gx * bxx + gx * gy * bxy + gy * gy * byy
        pre_bar[1, k] = u * bar[1, k] + v * (2.0 * gx * bxx + gy * bxy)
        pre_bar[2, k] = u * bar[2, k] + v * (2.0 * gy * byy + gx * bxy)
        pre_bar[3, k] = u * bxx
        pre_bar[4, k] = u * bxy
        pre_bar[5, k] = u * byy
        pre_bar[0, k] = bar[0, k] * u + u_bar * v + v_bar * (6.0 * tt * tt - 2.0) * u


@numba.njit(cache=True)
def nl_backward_o0_bcast(t, fb, pre_bar):
    p_count, n = t.shape
    for p in range(p_count):
        b0 = fb[0, p]
        for j in range(n):
            tt = t[p, j]
            pre_bar[0, p, j] = b0 * (1.0 - tt * tt)


@numba.njit(cache=True)
def nl_backward_o1_bcast(pre, t, fb, pre_bar):
    p_count, n = t.shape
    for p in range(p_count):
        b0 = fb[0, p]
        b1 = fb[1, p]
        b2 = fb[2, p]
        for j in range(n):
            tt = t[p, j]
            u = 1.0 - tt * tt
            v = -2.0 * tt * u
            u_bar = pre[1, p, j] * b1 + pre[2, p, j] * b2
            pre_bar[1, p, j] = u * b1
            pre_bar[2, p, j] = u * b2
            pre_bar[0, p, j] = b0 * u + u_bar * v


@numba.njit(cache=True)
def nl_backward_o2_bcast(pre, t, fb, pre_bar):
    p_count, n = t.shape
    for p in range(p_count):
        b0 = fb[0, p]
        b1 = fb[1, p]
        b2 = fb[2, p]
        b3 = fb[3, p]
        b4 = fb[4, p]
        b5 = fb[5, p]
        for j in range(n):
            tt = t[p, j]
            u = 1.0 - tt * tt
            v = -2.0 * tt * u
            gx = pre[1, p, j]
            gy = pre[2, p, j]
            u_bar = gx * b1 + gy * b2 + pre[3, p, j] * b3 + pre[4, p, j] * b4 + pre[5, p, j] * b5
            v_bar = gx * gx * b3 + gx * gy * b4 + gy * gy * b5
            pre_bar[1, p, j] = u * b1 + v * (2.0 * gx * b3 + gy * b4)
            pre_bar[2, p, j] = u * b2 + v * (2.0 * gy * b5 + gx * b4)
            pre_bar[3, p, j] = u * b3
            pre_bar[4, p, j] = u * b4
            pre_bar[5, p, j] = u * b5
            pre_bar[0, p, j] = b0 * u + u_bar * v + v_bar * (6.0 * tt * tt - 2.0) * u


def nl_backward_broadcast(pre3d, t2d, fb2d, pre_bar3d, order):
    """Backward nonlinearity for a cotangent that is constant across units
    (the unit-coefficients training convention): bitwise identical to
    nl_backward with the broadcast cotangent, without materializing it."""
    if order == 0:
        nl_backward_o0_bcast(t2d, fb2d, pre_bar3d)
    elif order == 1:
        nl_backward_o1_bcast(pre3d, t2d, fb2d, pre_bar3d)
    else:
        nl_backward_o2_bcast(pre3d, t2d, fb2d, pre_bar3d)


def nl_forward(pre2d, t1d, out2d, order):
    if order == 0:
        out2d[0, :] = t1d
    elif order == 1:
        nl_forward_o1(pre2d, t1d, out2d)
    else:
        nl_forward_o2(pre2d, t1d, out2d)


def nl_backward(pre2d, t1d, bar2d, pre_bar2d, order):
    if order == 0:
        nl_backward_o0(t1d, bar2d, pre_bar2d)
    elif order == 1:
        nl_backward_o1(pre2d, t1d, bar2d, pre_bar2d)
    else:
        nl_backward_o2(pre2d, t1d, bar2d, pre_bar2d)
