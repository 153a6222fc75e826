"""Dense feed-forward network with exact backprop and Adam, numpy only.

Layers hold a (fan_out, fan_in) weight matrix, a bias vector, and an
activation tag ("tanh" or "identity"). `forward` works on a single input
vector or a batch; `backward` consumes the cache from the matching
forward call and returns per-layer gradients via the chain rule.

Checkpoint format (little-endian throughout):

    8s   magic  b"PIDLABNN"
    u16  format version (currently 1)
    u16  layer count
    per layer: u32 fan_in, u32 fan_out, u8 activation tag (0=identity, 1=tanh)
    payload: per layer, weights row-major then bias, float64
    u32  CRC-32 of the payload bytes

Loading verifies the header, the layer size chain, the exact stream
length, and the checksum; any mismatch raises CheckpointError.
"""

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import CheckpointError
from .validation import as_generator

TANH = "tanh"
IDENTITY = "identity"
_ACT_TAGS = {IDENTITY: 0, TANH: 1}
_TAG_ACTS = {v: k for k, v in _ACT_TAGS.items()}

_MAGIC = b"PIDLABNN"
_VERSION = 1
_HEAD = struct.Struct("<8sHH")
_LAYER_HEAD = struct.Struct("<IIB")
_CRC = struct.Struct("<I")


@dataclass
class DenseLayer:
    weights: np.ndarray  # (fan_out, fan_in)
    bias: np.ndarray  # (fan_out,)
    activation: str

    def __post_init__(self):
        if self.activation not in _ACT_TAGS:
            raise CheckpointError(f"unknown activation {self.activation!r}")
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise CheckpointError(
                f"inconsistent layer shapes {self.weights.shape} / {self.bias.shape}"
            )


@dataclass
class DenseNet:
    layers: list

    @property
    def sizes(self):
        return [self.layers[0].weights.shape[1]] + [l.weights.shape[0] for l in self.layers]


def init_net(sizes, rng=None, activations=None) -> DenseNet:
    """Glorot-uniform weights in +-sqrt(6/(fan_in+fan_out)), zero biases.

    Hidden layers default to tanh with an identity output layer.
    """
    if len(sizes) < 2:
        raise CheckpointError("a network needs at least one layer")
    rng = as_generator(rng)
    if activations is None:
        activations = [TANH] * (len(sizes) - 2) + [IDENTITY]
    if len(activations) != len(sizes) - 1:
        raise CheckpointError("one activation per layer is required")
    layers = []
    for fan_in, fan_out, act in zip(sizes[:-1], sizes[1:], activations):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append(DenseLayer(w, np.zeros(fan_out), act))
    return DenseNet(layers)


def clone_net(net: DenseNet) -> DenseNet:
    return DenseNet(
        [DenseLayer(l.weights.copy(), l.bias.copy(), l.activation) for l in net.layers]
    )


def forward(net: DenseNet, x):
    """Network output and the activation cache needed by backward."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    h = x[None, :] if single else x
    if h.shape[1] != net.layers[0].weights.shape[1]:
        raise CheckpointError(
            f"input width {h.shape[1]} does not match network input {net.layers[0].weights.shape[1]}"
        )
    inputs = []
    outputs = []
    for layer in net.layers:
        inputs.append(h)
        z = h @ layer.weights.T + layer.bias
        h = np.tanh(z) if layer.activation == TANH else z
        outputs.append(h)
    y = h[0] if single else h
    return y, (inputs, outputs, single)


def backward(net: DenseNet, cache, grad_output):
    """Per-layer (dW, db) for a loss whose output gradient is grad_output.

    Gradients are summed over the batch; fold any 1/batch factor into
    grad_output itself.
    """
    inputs, outputs, single = cache
    g = np.asarray(grad_output, dtype=float)
    if single:
        g = g[None, :]
    grads = [None] * len(net.layers)
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        # tanh'(z) expressed through the cached post-activation value
        dz = g * (1.0 - outputs[i] ** 2) if layer.activation == TANH else g
        grads[i] = (dz.T @ inputs[i], dz.sum(axis=0))
        if i > 0:
            g = dz @ layer.weights
    return grads


@dataclass
class AdamState:
    """First/second moment accumulators plus the shared step counter."""

    m: list
    v: list
    step: int = 0
    learning_rate: float = 0.005
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


def init_adam(net: DenseNet, learning_rate=0.005, beta1=0.9, beta2=0.999, epsilon=1e-8) -> AdamState:
    zeros = lambda l: (np.zeros_like(l.weights), np.zeros_like(l.bias))
    return AdamState(
        m=[zeros(l) for l in net.layers],
        v=[zeros(l) for l in net.layers],
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def adam_update(net: DenseNet, grads, opt: AdamState):
    """Bias-corrected Adam step; returns the updated (net, opt)."""
    t = opt.step + 1
    b1, b2, eps, lr = opt.beta1, opt.beta2, opt.epsilon, opt.learning_rate
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    new_layers = []
    new_m = []
    new_v = []
    for layer, (dw, db), (mw, mb), (vw, vb) in zip(net.layers, grads, opt.m, opt.v):
        mw = b1 * mw + (1.0 - b1) * dw
        mb = b1 * mb + (1.0 - b1) * db
        vw = b2 * vw + (1.0 - b2) * dw**2
        vb = b2 * vb + (1.0 - b2) * db**2
        w = layer.weights - lr * (mw / c1) / (np.sqrt(vw / c2) + eps)
        b = layer.bias - lr * (mb / c1) / (np.sqrt(vb / c2) + eps)
        new_layers.append(DenseLayer(w, b, layer.activation))
        new_m.append((mw, mb))
        new_v.append((vw, vb))
    return DenseNet(new_layers), AdamState(new_m, new_v, t, lr, b1, b2, eps)


def save_net(net: DenseNet) -> bytes:
    """Serialize to the checkpoint byte format (bit-exact round trip)."""
    head = _HEAD.pack(_MAGIC, _VERSION, len(net.layers))
    layer_heads = b"".join(
        _LAYER_HEAD.pack(l.weights.shape[1], l.weights.shape[0], _ACT_TAGS[l.activation])
        for l in net.layers
    )
    payload = b"".join(
        np.ascontiguousarray(arr, dtype="<f8").tobytes()
        for l in net.layers
        for arr in (l.weights, l.bias)
    )
    return head + layer_heads + payload + _CRC.pack(zlib.crc32(payload) & 0xFFFFFFFF)


def load_net(blob: bytes) -> DenseNet:
    """Inverse of save_net; rejects malformed or corrupted streams."""
    if len(blob) < _HEAD.size:
        raise CheckpointError("stream shorter than the fixed header")
    magic, version, n_layers = _HEAD.unpack_from(blob, 0)
    if magic != _MAGIC:
        raise CheckpointError("bad magic bytes: not a network checkpoint")
    if version != _VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if n_layers < 1:
        raise CheckpointError("checkpoint declares zero layers")
    offset = _HEAD.size
    shapes = []
    for _ in range(n_layers):
        if offset + _LAYER_HEAD.size > len(blob):
            raise CheckpointError("truncated layer table")
        fan_in, fan_out, tag = _LAYER_HEAD.unpack_from(blob, offset)
        offset += _LAYER_HEAD.size
        if tag not in _TAG_ACTS:
            raise CheckpointError(f"unknown activation tag {tag}")
        if fan_in < 1 or fan_out < 1:
            raise CheckpointError("layer with zero width")
        shapes.append((fan_in, fan_out, tag))
    for (_, prev_out, _), (next_in, _, _) in zip(shapes, shapes[1:]):
        if prev_out != next_in:
            raise CheckpointError("layer size chain mismatch")
    n_params = sum(fi * fo + fo for fi, fo, _ in shapes)
    expected = offset + 8 * n_params + _CRC.size
    if len(blob) != expected:
        raise CheckpointError(f"stream length {len(blob)} != expected {expected}")
    payload = blob[offset : offset + 8 * n_params]
    (crc,) = _CRC.unpack_from(blob, offset + 8 * n_params)
    if crc != (zlib.crc32(payload) & 0xFFFFFFFF):
        raise CheckpointError("payload checksum mismatch")
    values = np.frombuffer(payload, dtype="<f8")
    layers = []
    pos = 0
    for fan_in, fan_out, tag in shapes:
        w = values[pos : pos + fan_in * fan_out].reshape(fan_out, fan_in).copy()
        pos += fan_in * fan_out
        b = values[pos : pos + fan_out].copy()
        pos += fan_out
        layers.append(DenseLayer(w, b, _TAG_ACTS[tag]))
    return DenseNet(layers)


def save_net_file(net: DenseNet, path):
    with open(path, "wb") as fh:
        fh.write(save_net(net))


def load_net_file(path) -> DenseNet:
    with open(path, "rb") as fh:
        return load_net(fh.read())
