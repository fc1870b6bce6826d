"""Dense encoder/decoder networks with hand-written forward/backward passes.

The loss convention is the halved MSE, L = 1/(2N) * sum_i ||x_i - net(x_i)||^2,
so gradients carry no factor of 2. Analysis code that needs the unhalved
squared error doubles the loss explicitly.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError
from .ndcore import as_matrix

IDENTITY = "identity"
LEAKY_RELU = "leaky_relu"
SIGMOID = "sigmoid"

_ACT_TAGS = {IDENTITY: 0, LEAKY_RELU: 1, SIGMOID: 2}
_TAG_ACTS = {v: k for k, v in _ACT_TAGS.items()}

_MAGIC = b"AEN1"


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = IDENTITY
    alpha: float = 0.01  # leaky-relu slope

    def __post_init__(self):
        self.weights = as_matrix(self.weights)
        self.bias = np.asarray(self.bias, dtype=np.float64).ravel()
        if self.bias.shape[0] != self.weights.shape[0]:
            raise ShapeError(
                f"bias length {self.bias.shape[0]} != weight rows {self.weights.shape[0]}"
            )
        if self.activation not in _ACT_TAGS:
            raise ShapeError(f"unknown activation {self.activation!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ShapeError(f"leaky-relu slope must be in (0,1), got {self.alpha}")

    @property
    def in_dim(self):
        return self.weights.shape[1]

    @property
    def out_dim(self):
        return self.weights.shape[0]

    def activate(self, pre):
        if self.activation == IDENTITY:
            return pre
        if self.activation == LEAKY_RELU:
            return np.where(pre >= 0.0, pre, self.alpha * pre)
        return 1.0 / (1.0 + np.exp(-pre))

    def activate_grad(self, pre, post):
        # derivative of the activation w.r.t. pre-activation
        if self.activation == IDENTITY:
            return np.ones_like(pre)
        if self.activation == LEAKY_RELU:
            return np.where(pre >= 0.0, 1.0, self.alpha)
        return post * (1.0 - post)


@dataclass
class Network:
    encoder: list
    decoder: list
    latent_dim: int = field(init=False)

    def __post_init__(self):
        if not self.encoder or not self.decoder:
            raise ShapeError("encoder and decoder must each have at least one layer")
        layers = self.encoder + self.decoder
        for prev, nxt in zip(layers, layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise ShapeError(
                    f"layer widths do not chain: {prev.out_dim} -> {nxt.in_dim}"
                )
        m = self.encoder[-1].out_dim
        n = self.encoder[0].in_dim
        if m >= n:
            raise ShapeError(f"latent width {m} must be < input width {n}")
        if self.decoder[-1].out_dim != n:
            raise ShapeError(
                f"decoder output width {self.decoder[-1].out_dim} != input width {n}"
            )
        self.latent_dim = m

    @property
    def layers(self):
        return self.encoder + self.decoder

    @property
    def input_dim(self):
        return self.encoder[0].in_dim

    def parameters(self):
        """Flat list of (weights, bias) pairs, encoder first."""
        return [(l.weights, l.bias) for l in self.layers]

    def param_bytes(self):
        chunks = []
        for w, b in self.parameters():
            chunks.append(w.tobytes())
            chunks.append(b.tobytes())
        return b"".join(chunks)


def _layer_forward(layer, x):
    pre = x @ layer.weights.T + layer.bias
    return pre, layer.activate(pre)


def forward_cached(net, batch):
    """Forward pass keeping per-layer (input, pre, post) for backprop."""
    batch = as_matrix(batch)
    if batch.shape[1] != net.input_dim:
        raise ShapeError(
            f"batch width {batch.shape[1]} != network input width {net.input_dim}"
        )
    cache = []
    x = batch
    for layer in net.layers:
        pre, post = _layer_forward(layer, x)
        cache.append((x, pre, post))
        x = post
    latent = cache[len(net.encoder) - 1][2]
    return latent, x, cache


def forward(net, batch):
    """Run the network; returns (latent codes, reconstructions)."""
    latent, output, _ = forward_cached(net, batch)
    return latent, output


def encode(net, batch):
    return forward(net, batch)[0]


def reconstruct(net, batch):
    return forward(net, batch)[1]


def mse_loss(output, target):
    """Halved MSE: 1/(2N) * sum of squared entry differences."""
    output, target = as_matrix(output), as_matrix(target)
    if output.shape != target.shape:
        raise ShapeError(f"mse_loss: shapes differ, {output.shape} vs {target.shape}")
    diff = output - target
    return float(np.sum(diff * diff)) / (2.0 * output.shape[0])


@dataclass
class GradientSet:
    weight_grads: list
    bias_grads: list


def backward(net, batch, target):
    """Analytic gradient of mse_loss(net(batch), target) w.r.t. all parameters."""
    return loss_and_gradients(net, batch, target)[1]


def loss_and_gradients(net, batch, target):
    """One forward/backward sweep; returns (loss, GradientSet)."""
    batch = as_matrix(batch)
    target = as_matrix(target)
    _, output, cache = forward_cached(net, batch)
    if target.shape != output.shape:
        raise ShapeError(f"backward: target shape {target.shape} != output {output.shape}")
    n_rows = batch.shape[0]
    loss = float(np.sum((output - target) ** 2)) / (2.0 * n_rows)
    layers = net.layers
    w_grads = [None] * len(layers)
    b_grads = [None] * len(layers)
    delta = (output - target) / n_rows  # dL/d(output)
    for i in range(len(layers) - 1, -1, -1):
        layer = layers[i]
        x, pre, post = cache[i]
        dpre = delta * layer.activate_grad(pre, post)
        w_grads[i] = dpre.T @ x
        b_grads[i] = dpre.sum(axis=0)
        if i > 0:
            delta = dpre @ layer.weights
    return loss, GradientSet(w_grads, b_grads)


@dataclass
class AdamState:
    m: list
    v: list
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_network(cls, net):
        m, v = [], []
        for w, b in net.parameters():
            m.append((np.zeros_like(w), np.zeros_like(b)))
            v.append((np.zeros_like(w), np.zeros_like(b)))
        return cls(m=m, v=v)


def optimizer_step(net, grads, state, lr):
    """One Adam update, in place on the network's parameters."""
    layers = net.layers
    if len(grads.weight_grads) != len(layers):
        raise ShapeError("gradient set does not match network layer count")
    state.t += 1
    b1, b2, eps = state.beta1, state.beta2, state.eps
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for i, layer in enumerate(layers):
        for params, g, m, v in (
            (layer.weights, grads.weight_grads[i], state.m[i][0], state.v[i][0]),
            (layer.bias, grads.bias_grads[i], state.m[i][1], state.v[i][1]),
        ):
            if g.shape != params.shape:
                raise ShapeError(f"gradient shape {g.shape} != parameter shape {params.shape}")
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            params -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    return net, state


def _init_layer(rng, in_dim, out_dim, activation, alpha=0.01):
    # uniform +-sqrt(6/(fan_in+fan_out)) keeps early activations in the
    # leaky-relu linear regime
    bound = np.sqrt(6.0 / (in_dim + out_dim))
    w = rng.uniform(-bound, bound, size=(out_dim, in_dim))
    b = np.zeros(out_dim)
    return DenseLayer(w, b, activation, alpha)


def build_network(
    input_dim,
    encoder_widths,
    decoder_widths,
    hidden_activation=LEAKY_RELU,
    output_activation=IDENTITY,
    alpha=0.01,
    seed=0,
):
    """Seeded construction of an undercomplete encoder/decoder pair.

    `encoder_widths` ends at the latent width; `decoder_widths` must end at
    `input_dim`. All layers use `hidden_activation` except the last decoder
    layer, which uses `output_activation`.
    """
    if not encoder_widths or not decoder_widths:
        raise ShapeError("need at least one encoder and one decoder layer")
    if decoder_widths[-1] != input_dim:
        raise ShapeError(
            f"decoder must end at input width {input_dim}, got {decoder_widths[-1]}"
        )
    rng = np.random.default_rng(seed)
    enc, dec = [], []
    prev = input_dim
    for w in encoder_widths:
        enc.append(_init_layer(rng, prev, w, hidden_activation, alpha))
        prev = w
    for i, w in enumerate(decoder_widths):
        act = output_activation if i == len(decoder_widths) - 1 else hidden_activation
        dec.append(_init_layer(rng, prev, w, act, alpha))
        prev = w
    return Network(enc, dec)


def preset_breastcancer(input_dim=30, seed=0):
    """Dense [64, 8, 8, 64] autoencoder: leaky-relu hidden, sigmoid output, latent 8."""
    return build_network(
        input_dim,
        encoder_widths=[64, 8],
        decoder_widths=[8, 64, input_dim],
        hidden_activation=LEAKY_RELU,
        output_activation=SIGMOID,
        seed=seed,
    )


def save_network(net, path):
    """Flat binary format: magic AEN1, u32 layer count, then per layer
    u32 rows, u32 cols, u8 activation tag, float64-LE weights (row-major)
    and bias."""
    layers = net.layers
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(layers)))
        for layer in layers:
            rows, cols = layer.weights.shape
            fh.write(struct.pack("<IIB", rows, cols, _ACT_TAGS[layer.activation]))
            fh.write(layer.weights.astype("<f8").tobytes())
            fh.write(layer.bias.astype("<f8").tobytes())


def load_network(path):
    """Inverse of save_network.

    The encoder/decoder split is recovered at the bottleneck: the first layer
    whose output width equals the minimum width across layers ends the encoder.
    """
    from .errors import FormatError

    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _MAGIC:
        raise FormatError(f"bad magic {blob[:4]!r} at offset 0")
    off = 4
    (count,) = struct.unpack_from("<I", blob, off)
    off += 4
    layers = []
    for _ in range(count):
        if off + 9 > len(blob):
            raise FormatError(f"truncated layer header at offset {off}")
        rows, cols, tag = struct.unpack_from("<IIB", blob, off)
        off += 9
        nbytes = 8 * rows * (cols + 1)
        if off + nbytes > len(blob):
            raise FormatError(f"truncated layer data at offset {off}")
        w = np.frombuffer(blob, dtype="<f8", count=rows * cols, offset=off).reshape(rows, cols)
        off += 8 * rows * cols
        b = np.frombuffer(blob, dtype="<f8", count=rows, offset=off)
        off += 8 * rows
        if tag not in _TAG_ACTS:
            raise FormatError(f"unknown activation tag {tag}")
        layers.append(DenseLayer(w.copy(), b.copy(), _TAG_ACTS[tag]))
    widths = [l.out_dim for l in layers]
    split = widths.index(min(widths)) + 1
    return Network(layers[:split], layers[split:])
