import struct
import numpy as np
import logManager
from dataclasses import dataclass
from network import dueling_combine
from network.Adam import adam_step
from functions.errors import ShapeError, UsageError, NumericError, ConfigError

logging = logManager.logger.get_logger(__name__)

HEADS = ["scalar_value", "action_values", "action_preferences", "dueling"]
ACTIVATIONS = ["relu", "identity"]

SNAPSHOT_MAGIC = b"AYSNET"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<6sHBI")
_LAYER = struct.Struct("<IIB")


@dataclass(frozen=True)
class LayerSpec:
    input_width: int
    output_width: int
    activation: str = "relu"

    def __post_init__(self):
        if self.input_width <= 0 or self.output_width <= 0:
            raise ShapeError("layer widths must be positive, got %d -> %d" % (self.input_width, self.output_width))
        if self.activation not in ACTIVATIONS:
            raise ShapeError("unknown activation " + str(self.activation))


class GradientBundle():
    """Per-parameter gradients, ordered like Mlp.parameters()."""

    def __init__(self, tensors):
        self.tensors = list(tensors)

    def __iter__(self):
        return iter(self.tensors)

    def __len__(self):
        return len(self.tensors)

    def global_norm(self):
        return float(np.sqrt(sum(float(np.sum(t * t)) for t in self.tensors)))

    def is_finite(self):
        return all(bool(np.all(np.isfinite(t))) for t in self.tensors)

    def scaled(self, factor):
        return GradientBundle([t * factor for t in self.tensors])

    @classmethod
    def zeros_like(cls, params):
        return cls([np.zeros_like(p) for p in params])


@dataclass
class ForwardCache:
    owner: int
    version: int
    inputs: list
    pre_activations: list
    batch: int
    output_width: int
    squeeze: bool


class Mlp():
    def __init__(self, layers, head, weights=None, biases=None, rng=None):
        if head not in HEADS:
            raise ShapeError("unknown head " + str(head))
        self.layers = list(layers)
        self.head = head
        self._check_chain()
        if weights is None:
            if rng is None:
                raise UsageError("an rng is needed to initialise weights")
            weights, biases = [], []
            for spec in self.layers:
                # He-style uniform fan-in scaling
                limit = np.sqrt(6.0 / spec.input_width)
                weights.append(rng.uniform(-limit, limit, size=(spec.output_width, spec.input_width)))
                biases.append(np.zeros(spec.output_width))
        self.weights = [np.array(w, dtype=np.float64) for w in weights]
        self.biases = [np.array(b, dtype=np.float64).reshape(-1) for b in biases]
        for spec, w, b in zip(self.layers, self.weights, self.biases):
            if w.shape != (spec.output_width, spec.input_width) or b.shape != (spec.output_width,):
                raise ShapeError("parameters do not match layer " + str(spec))
        self.version = 0

    @classmethod
    def build(cls, input_width, hidden_widths, output_width, head, rng):
        widths = [input_width] + list(hidden_widths)
        layers = [LayerSpec(widths[i], widths[i + 1], "relu") for i in range(len(widths) - 1)]
        if head == "dueling":
            layers.append(LayerSpec(widths[-1], 1, "identity"))
            layers.append(LayerSpec(widths[-1], output_width, "identity"))
        else:
            if head == "scalar_value":
                output_width = 1
            layers.append(LayerSpec(widths[-1], output_width, "identity"))
        return cls(layers, head, rng=rng)

    def _check_chain(self):
        if not self.layers:
            raise ShapeError("a network needs at least one layer")
        trunk = self.layers[:-2] if self.head == "dueling" else self.layers
        for first, second in zip(trunk, trunk[1:]):
            if first.output_width != second.input_width:
                raise ShapeError("layer widths do not chain: %s -> %s" % (first, second))
        if self.head == "dueling":
            if len(self.layers) < 2:
                raise ShapeError("dueling head needs a value and an advantage branch")
            value, advantage = self.layers[-2], self.layers[-1]
            width = trunk[-1].output_width if trunk else value.input_width
            if value.input_width != width or advantage.input_width != width:
                raise ShapeError("dueling branches must both read the trunk output")
            if value.output_width != 1:
                raise ShapeError("value branch must be one unit wide")
        elif self.head == "scalar_value" and self.layers[-1].output_width != 1:
            raise ShapeError("scalar_value head must be one unit wide")

    @property
    def input_width(self):
        return self.layers[0].input_width

    @property
    def output_width(self):
        return self.layers[-1].output_width

    def parameters(self):
        params = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            params.append(b)
        return params

    def _layer_forward(self, k, h, inputs, pre_activations):
        inputs.append(h)
        z = h @ self.weights[k].T + self.biases[k]
        pre_activations.append(z)
        if self.layers[k].activation == "relu":
            return np.maximum(z, 0.0)
        return z

    def forward(self, input):
        x = np.asarray(input, dtype=np.float64)
        squeeze = x.ndim == 1
        x = np.atleast_2d(x)
        if x.ndim != 2 or x.shape[1] != self.input_width:
            raise ShapeError("expected input width %d, got shape %s" % (self.input_width, str(np.shape(input))))
        inputs, pre_activations = [], []
        h = x
        if self.head == "dueling":
            for k in range(len(self.layers) - 2):
                h = self._layer_forward(k, h, inputs, pre_activations)
            value = self._layer_forward(len(self.layers) - 2, h, inputs, pre_activations)
            advantages = self._layer_forward(len(self.layers) - 1, h, inputs, pre_activations)
            output = dueling_combine(value[:, 0], advantages)
        else:
            for k in range(len(self.layers)):
                h = self._layer_forward(k, h, inputs, pre_activations)
            output = h
        cache = ForwardCache(id(self), self.version, inputs, pre_activations, x.shape[0], output.shape[1], squeeze)
        return (output[0] if squeeze else output), cache

    def predict(self, input):
        return self.forward(input)[0]

    def _layer_backward(self, k, g_post, cache, grads):
        if self.layers[k].activation == "relu":
            g_pre = g_post * (cache.pre_activations[k] > 0)
        else:
            g_pre = g_post
        grads[2 * k] = g_pre.T @ cache.inputs[k]
        grads[2 * k + 1] = g_pre.sum(axis=0)
        return g_pre @ self.weights[k]

    def backward(self, cache, output_gradient):
        if cache.owner != id(self) or cache.version != self.version:
            raise UsageError("forward cache is stale or belongs to another network")
        g = np.asarray(output_gradient, dtype=np.float64)
        if cache.squeeze:
            g = g.reshape(1, -1)
        if g.shape != (cache.batch, cache.output_width):
            raise ShapeError("output gradient shape %s does not match output (%d, %d)" % (str(g.shape), cache.batch, cache.output_width))
        grads = [None] * (2 * len(self.layers))
        if self.head == "dueling":
            value_k, advantage_k = len(self.layers) - 2, len(self.layers) - 1
            g_value = g.sum(axis=1, keepdims=True)
            g_advantages = g - g.mean(axis=1, keepdims=True)
            g_h = self._layer_backward(value_k, g_value, cache, grads) + self._layer_backward(advantage_k, g_advantages, cache, grads)
            trunk_top = len(self.layers) - 3
        else:
            g_h = g
            trunk_top = len(self.layers) - 1
        for k in range(trunk_top, -1, -1):
            g_h = self._layer_backward(k, g_h, cache, grads)
        bundle = GradientBundle(grads)
        if not bundle.is_finite():
            raise NumericError("non-finite gradient in backward pass")
        return bundle

    def apply_gradients(self, grads, adam_state):
        adam_step(self.parameters(), grads, adam_state)
        self.version += 1

    def copy(self):
        return Mlp(self.layers, self.head, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def load_parameters(self, other):
        if other.layers != self.layers or other.head != self.head:
            raise ShapeError("cannot copy parameters between differently shaped networks")
        for mine, theirs in zip(self.parameters(), other.parameters()):
            np.copyto(mine, theirs)
        self.version += 1

    def dump(self):
        chunks = [_HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, HEADS.index(self.head), len(self.layers))]
        for spec in self.layers:
            chunks.append(_LAYER.pack(spec.input_width, spec.output_width, ACTIVATIONS.index(spec.activation)))
        for w, b in zip(self.weights, self.biases):
            chunks.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
            chunks.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
        return b"".join(chunks)

    @classmethod
    def load(cls, data, offset=0):
        """Decode a snapshot; returns (network, offset just past it)."""
        try:
            magic, version, head, count = _HEADER.unpack_from(data, offset)
        except struct.error:
            raise ConfigError("truncated network snapshot")
        if magic != SNAPSHOT_MAGIC or version != SNAPSHOT_VERSION:
            raise ConfigError("not a network snapshot of version %d" % SNAPSHOT_VERSION)
        offset += _HEADER.size
        layers = []
        for _ in range(count):
            input_width, output_width, activation = _LAYER.unpack_from(data, offset)
            offset += _LAYER.size
            layers.append(LayerSpec(input_width, output_width, ACTIVATIONS[activation]))
        weights, biases = [], []
        for spec in layers:
            size = spec.output_width * spec.input_width
            weights.append(np.frombuffer(data, dtype="<f8", count=size, offset=offset).reshape(spec.output_width, spec.input_width).astype(np.float64))
            offset += 8 * size
            biases.append(np.frombuffer(data, dtype="<f8", count=spec.output_width, offset=offset).astype(np.float64))
            offset += 8 * spec.output_width
        return cls(layers, HEADS[head], weights, biases), offset


def save_network(net, path):
    with open(path, "wb") as fp:
        fp.write(net.dump())
    logging.debug("Network snapshot written to " + str(path))


def load_network(path):
    with open(path, "rb") as fp:
        return Mlp.load(fp.read())[0]
