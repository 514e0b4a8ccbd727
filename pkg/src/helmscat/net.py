"""Subspace network: a tanh MLP whose last layer's M neurons are basis
functions, with analytic propagation of spatial derivatives up to order two
and a hand-derived reverse pass for parameter gradients.

Forward evaluation carries a stack of jet channels (value, two gradient
components, three distinct Hessian components) through every layer: the
affine part maps all channels with the same weight matrix, and tanh mixes
them pointwise via its first and second derivatives. The reverse pass walks
the same recurrence backwards, so losses built from values, gradients, or
Laplacians (third-order mixed derivatives with respect to parameters)
differentiate exactly, with no numerical differentiation anywhere.

Internally the stacks are channel-first (channels, points, units) so each
channel is one contiguous slab for the fused kernels; public arrays are
point-first (points, channels[, units]). Parameters live in one flat
float64 buffer; weight matrices and bias vectors are views into it, which
lets the optimizer update the buffer in place. The output combination
(coefficients omega) carries no bias and no activation and is not part of
the buffer.

Training evaluates the same collocation batch thousands of times;
``FieldEvaluator`` owns all intermediate buffers for a fixed point set so
the hot loop performs no large allocations and big products stay
cache-resident via point chunking.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .common import CHANNELS_FOR_ORDER, DX, DXX, DXY, DY, DYY, VAL, Jet2

_SNAPSHOT_MAGIC = b"SNET"
_SNAPSHOT_VERSION = 1
_ACTIVATION_TANH = 0


class SubspaceNetwork:
    """tanh MLP from R^2 to an M-dimensional subspace layer.

    ``hidden_widths`` may be empty (input feeds the subspace layer
    directly). All layers through the subspace layer apply tanh.
    """

    def __init__(self, layer_sizes, flat, seed=0):
        self.layer_sizes = tuple((int(a), int(b)) for a, b in layer_sizes)
        expected = sum(a * b + b for a, b in self.layer_sizes)
        if flat.shape != (expected,):
            raise ValueError(f"flat buffer has {flat.shape[0]} entries, need {expected}")
        self.flat = flat
        self.seed = seed
        self.weights = []
        self.biases = []
        offset = 0
        for n_in, n_out in self.layer_sizes:
            self.weights.append(flat[offset : offset + n_in * n_out].reshape(n_out, n_in))
            offset += n_in * n_out
            self.biases.append(flat[offset : offset + n_out])
            offset += n_out

    @property
    def hidden_widths(self):
        return tuple(n_out for _, n_out in self.layer_sizes[:-1])

    @property
    def subspace_width(self):
        return self.layer_sizes[-1][1]

    @property
    def n_params(self):
        return self.flat.shape[0]

    @property
    def n_weight_params(self):
        """Weight entries only (biases excluded)."""
        return sum(a * b for a, b in self.layer_sizes)

    def copy(self) -> "SubspaceNetwork":
        return SubspaceNetwork(self.layer_sizes, self.flat.copy(), self.seed)

    def set_flat(self, values: np.ndarray) -> None:
        self.flat[:] = values


def layer_shapes(hidden_widths, subspace_width, input_dim=2):
    widths = [input_dim, *hidden_widths, subspace_width]
    if any(w < 1 for w in widths):
        raise ValueError(f"all layer widths must be >= 1, got {widths}")
    return [(widths[i], widths[i + 1]) for i in range(len(widths) - 1)]


def init(seed: int, hidden_widths, subspace_width: int) -> SubspaceNetwork:
    """Glorot-uniform weights, uniform(+-1/sqrt(fan_in)) biases; the draw
    order is fixed per layer so the same seed is bitwise reproducible."""
    sizes = layer_shapes(hidden_widths, subspace_width)
    rng = np.random.default_rng(seed)
    parts = []
    for n_in, n_out in sizes:
        limit = np.sqrt(6.0 / (n_in + n_out))
        parts.append(rng.uniform(-limit, limit, n_in * n_out))
        parts.append(rng.uniform(-1.0, 1.0, n_out) / np.sqrt(n_in))
    return SubspaceNetwork(sizes, np.concatenate(parts), seed)


def input_stack(points: np.ndarray, order: int) -> np.ndarray:
    """Channel-first jet stack of the two coordinate functions: (C, P, 2)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    c = CHANNELS_FOR_ORDER[order]
    s = np.zeros((c, points.shape[0], 2))
    s[VAL] = points
    if order >= 1:
        s[DX, :, 0] = 1.0
        s[DY, :, 1] = 1.0
    return s


def _layer_forward(weight, bias, s_in, order, pre=None, t=None, out=None):
    """One affine + tanh layer on a channel-first stack; optional buffers."""
    c, p, n_in = s_in.shape
    n_out = weight.shape[0]
    if pre is None:
        pre = np.empty((c, p, n_out))
    np.matmul(s_in.reshape(c * p, n_in), weight.T, out=pre.reshape(c * p, n_out))
    pre[VAL] += bias
    if t is None:
        t = np.empty((p, n_out))
    np.tanh(pre[VAL], out=t)
    if out is None:
        out = np.empty_like(pre)
    kernels.nl_forward(pre.reshape(c, p * n_out), t.reshape(p * n_out), out.reshape(c, p * n_out), order)
    return pre, t, out


def _backward_layer(weight, s_in, pre, t, out_bar, order, pre_bar=None):
    """Cotangents of one layer: returns (pre_bar, grad_w, grad_b, in_bar)."""
    c, p, n_out = pre.shape
    n_in = s_in.shape[2]
    if pre_bar is None:
        pre_bar = np.empty_like(pre)
    kernels.nl_backward(
        pre.reshape(c, p * n_out),
        t.reshape(p * n_out),
        out_bar.reshape(c, p * n_out),
        pre_bar.reshape(c, p * n_out),
        order,
    )
    flat_bar = pre_bar.reshape(c * p, n_out)
    grad_w = flat_bar.T @ s_in.reshape(c * p, n_in)
    grad_b = pre_bar[VAL].sum(axis=0)
    return pre_bar, grad_w, grad_b, flat_bar


@dataclass
class Tape:
    """Forward intermediates retained for the reverse pass (channel-first)."""

    order: int
    inputs: list  # per layer: input stack (C, P, n_in)
    pres: list    # per layer: pre-activation stack (C, P, n_out)
    tanhs: list   # per layer: tanh of pre-activation values (P, n_out)

    @property
    def jets(self) -> np.ndarray:
        """Subspace-layer jets as a point-first (P, C, M) view."""
        # forward stores the last layer's activations as the final "input"
        return np.moveaxis(self.inputs[-1], 0, 1)


def forward_tape(net: SubspaceNetwork, points: np.ndarray, order: int = 2) -> Tape:
    s = input_stack(points, order)
    inputs, pres, tanhs = [], [], []
    for weight, bias in zip(net.weights, net.biases):
        inputs.append(s)
        pre, t, s = _layer_forward(weight, bias, s, order)
        pres.append(pre)
        tanhs.append(t)
    inputs.append(s)  # subspace-layer activations
    return Tape(order=order, inputs=inputs, pres=pres, tanhs=tanhs)


def subspace_jets(net: SubspaceNetwork, points: np.ndarray, order: int = 2) -> np.ndarray:
    """Jet channels of every basis function at every point: (P, C, M)."""
    s = input_stack(points, order)
    for weight, bias in zip(net.weights, net.biases):
        _, _, s = _layer_forward(weight, bias, s, order)
    return np.ascontiguousarray(np.moveaxis(s, 0, 1))


def combine_stack(jets: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Combined-field jet channels sum_j omega_j phi_j: (P, C)."""
    if jets.shape[-1] != omega.shape[0]:
        raise ValueError(f"coefficient length {omega.shape[0]} != basis count {jets.shape[-1]}")
    return jets @ omega


def backward_tape(net: SubspaceNetwork, tape: Tape, out_bar: np.ndarray) -> np.ndarray:
    """Reverse accumulation through the jet propagation.

    ``out_bar`` is the cotangent of the subspace-layer jets, channel-first
    (C, P, M); returns the flat parameter gradient (layout of net.flat).
    """
    grad = np.empty_like(net.flat)
    offset = net.flat.shape[0]
    bar = out_bar
    for idx in range(len(net.weights) - 1, -1, -1):
        weight = net.weights[idx]
        s_in, pre, t = tape.inputs[idx], tape.pres[idx], tape.tanhs[idx]
        _, grad_w, grad_b, flat_bar = _backward_layer(weight, s_in, pre, t, bar, tape.order)
        n_out, n_in = weight.shape
        offset -= n_out
        grad[offset : offset + n_out] = grad_b
        offset -= n_in * n_out
        grad[offset : offset + n_in * n_out] = grad_w.ravel()
        if idx > 0:
            c, p, _ = pre.shape
            bar = (flat_bar @ weight).reshape(c, p, n_in)
    return grad


def field_gradients(net, tape, field_bar, omega=None):
    """Flat parameter gradient of a scalar built from the combined field.

    ``field_bar`` is the cotangent of the combined jet channels (P, C);
    ``omega`` defaults to all-ones (the training convention). Also returns
    the cotangent with respect to omega for joint training.
    """
    m = net.subspace_width
    jets_cf = tape.inputs[-1]  # (C, P, M)
    w = np.ones(m) if omega is None else np.asarray(omega, dtype=float)
    out_bar = field_bar.T[:, :, None] * w[None, None, :]
    grad_theta = backward_tape(net, tape, out_bar)
    grad_omega = np.einsum("cp,cpm->m", field_bar.T, jets_cf)
    return grad_theta, grad_omega


def param_gradient(net, points, loss_fn, omega=None, order: int = 2):
    """Gradient with respect to the network parameters of a scalar loss.

    ``loss_fn`` maps the combined-field jet channels (P, C) to
    ``(value, cotangent)`` where the cotangent has the same shape. Returns
    (value, flat gradient).
    """
    tape = forward_tape(net, points, order)
    w = np.ones(net.subspace_width) if omega is None else np.asarray(omega, dtype=float)
    field = combine_stack(tape.jets, w)
    value, field_bar = loss_fn(field)
    grad_theta, _ = field_gradients(net, tape, np.asarray(field_bar, dtype=float), omega)
    return value, grad_theta


class FieldEvaluator:
    """Preallocated forward/backward engine for one network over a fixed
    point set: same math as the plain functions, no per-epoch allocation of
    large buffers, deterministic chunk order."""

    def __init__(self, net: SubspaceNetwork, points: np.ndarray, order: int = 2, chunk_size: int = 1024):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        self.net = net
        self.order = order
        self.n_points = points.shape[0]
        self.channels = CHANNELS_FOR_ORDER[order]
        c = self.channels
        size = max(int(chunk_size), 1)
        self.chunks = []
        for start in range(0, self.n_points, size):
            stop = min(start + size, self.n_points)
            p = stop - start
            stack0 = input_stack(points[start:stop], order)
            layers = []
            for n_in, n_out in net.layer_sizes:
                layers.append(
                    {
                        "pre": np.empty((c, p, n_out)),
                        "t": np.empty((p, n_out)),
                        "out": np.empty((c, p, n_out)),
                        "bar": np.empty((c, p, n_out)),
                    }
                )
            self.chunks.append({"span": (start, stop), "stack0": stack0, "layers": layers})
        self.field = np.empty((self.n_points, c))
        self.grad = np.empty(net.n_params)

    def forward(self, omega=None) -> np.ndarray:
        """Combined-field jets (P, C) at the bound points for current params."""
        net = self.net
        m = net.subspace_width
        w = np.ones(m) if omega is None else omega
        for chunk in self.chunks:
            s = chunk["stack0"]
            for (weight, bias), buf in zip(zip(net.weights, net.biases), chunk["layers"]):
                _layer_forward(weight, bias, s, self.order, pre=buf["pre"], t=buf["t"], out=buf["out"])
                s = buf["out"]
            start, stop = chunk["span"]
            c, p, _ = s.shape
            self.field[start:stop] = (s.reshape(c * p, m) @ w).reshape(c, p).T
        return self.field

    def backward(self, field_bar: np.ndarray, omega=None, want_omega_grad: bool = False):
        """Parameter gradient for a cotangent of the combined field (P, C).

        Must follow a forward() with the same parameters. Returns
        (flat gradient, omega gradient or None). The gradient buffer is
        reused across calls; copy it if it must outlive the next call.
        """
        net = self.net
        m = net.subspace_width
        w = np.ones(m) if omega is None else omega
        self.grad[:] = 0.0
        g_omega = np.zeros(m) if want_omega_grad else None
        n_layers = len(net.weights)
        offsets = []
        offset = 0
        for n_in, n_out in net.layer_sizes:
            offsets.append((offset, offset + n_in * n_out))
            offset += n_in * n_out + n_out
        unit_coeffs = omega is None
        for chunk in self.chunks:
            start, stop = chunk["span"]
            fb = field_bar[start:stop]  # (p, C)
            layers = chunk["layers"]
            last = layers[-1]
            if want_omega_grad:
                c, p, _ = last["out"].shape
                g_omega += last["out"].reshape(c * p, m).T @ np.ascontiguousarray(fb.T).ravel()
            bar = None
            if not unit_coeffs:
                np.multiply(fb.T[:, :, None], w[None, None, :], out=last["bar"])
                bar = last["bar"]
            for idx in range(n_layers - 1, -1, -1):
                buf = layers[idx]
                s_in = chunk["stack0"] if idx == 0 else layers[idx - 1]["out"]
                weight = net.weights[idx]
                c, p, n_out = buf["pre"].shape
                pre_bar = buf["out"]  # forward activations are dead here
                if bar is None:
                    # last layer with unit coefficients: cotangent is the
                    # field cotangent broadcast across units
                    kernels.nl_backward_broadcast(
                        buf["pre"], buf["t"], np.ascontiguousarray(fb.T), pre_bar, self.order
                    )
                else:
                    kernels.nl_backward(
                        buf["pre"].reshape(c, p * n_out),
                        buf["t"].reshape(p * n_out),
                        bar.reshape(c, p * n_out),
                        pre_bar.reshape(c, p * n_out),
                        self.order,
                    )
                flat_bar = pre_bar.reshape(c * p, n_out)
                grad_w = flat_bar.T @ s_in.reshape(c * p, s_in.shape[2])
                grad_b = pre_bar[VAL].sum(axis=0)
                w_lo, w_hi = offsets[idx]
                self.grad[w_lo:w_hi] += grad_w.ravel()
                self.grad[w_hi : w_hi + weight.shape[0]] += grad_b
                if idx > 0:
                    prev = layers[idx - 1]
                    c, p, _ = prev["pre"].shape
                    n_in = weight.shape[1]
                    np.matmul(flat_bar, weight, out=prev["bar"].reshape(c * p, n_in))
                    bar = prev["bar"]
        return self.grad, g_omega


@dataclass(frozen=True)
class BasisJets:
    """Jets of all M basis functions at a single point."""

    values: np.ndarray    # (M,)
    grads: np.ndarray     # (M, 2)
    hessians: np.ndarray  # (M, 2, 2)

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, j: int) -> Jet2:
        return Jet2(value=float(self.values[j]), grad=self.grads[j].copy(), hess=self.hessians[j].copy())


def eval_jets(net: SubspaceNetwork, point) -> BasisJets:
    """Analytic value/gradient/Hessian of every basis function at one point."""
    stack = subspace_jets(net, np.asarray(point, dtype=float).reshape(1, 2), order=2)[0]
    m = stack.shape[-1]
    hess = np.empty((m, 2, 2))
    hess[:, 0, 0] = stack[DXX]
    hess[:, 0, 1] = hess[:, 1, 0] = stack[DXY]
    hess[:, 1, 1] = stack[DYY]
    return BasisJets(values=stack[VAL].copy(), grads=stack[[DX, DY]].T.copy(), hessians=hess)


def combine(jets: BasisJets, omega: np.ndarray) -> Jet2:
    """Linear combination sum_j omega_j phi_j of basis jets at one point."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape[0] != len(jets):
        raise ValueError(f"coefficient length {omega.shape[0]} != basis count {len(jets)}")
    return Jet2(
        value=float(jets.values @ omega),
        grad=jets.grads.T @ omega,
        hess=np.tensordot(jets.hessians, omega, axes=(0, 0)),
    )


def save_snapshot(net: SubspaceNetwork, path) -> None:
    """Write the parameter snapshot: small little-endian header (magic,
    version, activation id, seed, layer shapes) followed by the flat
    float64 parameter array."""
    with open(path, "wb") as fh:
        fh.write(_SNAPSHOT_MAGIC)
        fh.write(struct.pack("<IIQ", _SNAPSHOT_VERSION, _ACTIVATION_TANH, net.seed))
        fh.write(struct.pack("<I", len(net.layer_sizes)))
        for n_in, n_out in net.layer_sizes:
            fh.write(struct.pack("<II", n_in, n_out))
        fh.write(net.flat.astype("<f8").tobytes())


def load_snapshot(path) -> SubspaceNetwork:
    with open(path, "rb") as fh:
        if fh.read(4) != _SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: not a network snapshot")
        version, activation, seed = struct.unpack("<IIQ", fh.read(16))
        if version != _SNAPSHOT_VERSION:
            raise ValueError(f"{path}: unsupported snapshot version {version}")
        if activation != _ACTIVATION_TANH:
            raise ValueError(f"{path}: unknown activation id {activation}")
        (n_layers,) = struct.unpack("<I", fh.read(4))
        sizes = [struct.unpack("<II", fh.read(8)) for _ in range(n_layers)]
        count = sum(a * b + b for a, b in sizes)
        flat = np.frombuffer(fh.read(count * 8), dtype="<f8").astype(np.float64)
    return SubspaceNetwork(sizes, flat, seed=int(seed))
