"""Three-layer feedforward classifier with prunable connections.

Hidden nodes use tanh, output nodes the logistic sigmoid; training is
per-pattern gradient descent on squared error with optional weight decay.
Every connection carries a boolean mask so the pruning phase can switch
single weights off without touching the rest of the network.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

CHECKPOINT_FORMAT = "reann-network-v1"


class NetworkError(ValueError):
    pass


class TrainingDiverged(RuntimeError):
    """Training produced a non-finite error; the learning rate is too high."""


@dataclass(frozen=True)
class NetworkConfig:
    input_count: int
    hidden_count: int = 1
    output_count: int = 2
    learning_rate: float = 0.5
    weight_init_range: tuple[float, float] = (-1.0, 1.0)
    weight_decay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (0.1 <= self.learning_rate <= 1.0):
            raise NetworkError("learning_rate must lie in [0.1, 1.0]")
        lo, hi = self.weight_init_range
        if lo < -1.0 or hi > 1.0 or lo >= hi:
            raise NetworkError("weight_init_range must be a subinterval of [-1, 1]")
        if self.hidden_count < 1 or self.input_count < 1 or self.output_count < 1:
            raise NetworkError("layer sizes must be positive")
        if self.weight_decay < 0:
            raise NetworkError("weight_decay must be nonnegative")


@dataclass(frozen=True)
class EpochStats:
    epoch_index: int
    mean_squared_error: float
    training_accuracy: float


@dataclass
class Network:
    config: NetworkConfig
    w_ih: np.ndarray          # (inputs, hidden)
    w_ho: np.ndarray          # (hidden, outputs)
    bias_h: np.ndarray        # (hidden,)
    bias_o: np.ndarray        # (outputs,)
    mask_ih: np.ndarray       # bool, same shape as w_ih
    mask_ho: np.ndarray       # bool, same shape as w_ho
    rng: np.random.Generator = field(repr=False, default=None)

    # ---- structure ----------------------------------------------------

    @property
    def input_count(self) -> int:
        return self.w_ih.shape[0]

    @property
    def hidden_count(self) -> int:
        return self.w_ih.shape[1]

    @property
    def output_count(self) -> int:
        return self.w_ho.shape[1]

    def active_inputs(self) -> np.ndarray:
        """An input node is active while any of its outgoing connections is."""
        return self.mask_ih.any(axis=1)

    def active_hidden(self) -> np.ndarray:
        """A hidden node is active while it has both incoming and outgoing
        active connections."""
        return self.mask_ih.any(axis=0) & self.mask_ho.any(axis=1)

    def node_count(self) -> int:
        return int(self.active_inputs().sum() + self.active_hidden().sum()
                   + self.output_count)

    def connection_count(self) -> int:
        """Active non-bias connections."""
        hid = self.active_hidden()
        return int(self.mask_ih[:, hid].sum() + self.mask_ho[hid, :].sum())

    def copy(self) -> "Network":
        return Network(config=self.config,
                       w_ih=self.w_ih.copy(), w_ho=self.w_ho.copy(),
                       bias_h=self.bias_h.copy(), bias_o=self.bias_o.copy(),
                       mask_ih=self.mask_ih.copy(), mask_ho=self.mask_ho.copy(),
                       rng=self.rng)

    # ---- forward pass -------------------------------------------------

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.input_count:
            raise NetworkError(
                f"input has {x.shape[-1]} values, network expects {self.input_count}")
        hid_act = self.active_hidden()
        hidden = np.tanh(x @ (self.w_ih * self.mask_ih) + self.bias_h)
        hidden = hidden * hid_act
        output = _logistic(hidden @ (self.w_ho * self.mask_ho) + self.bias_o)
        return hidden, output

    def forward_from_hidden(self, hidden: np.ndarray) -> np.ndarray:
        """Output-layer pass for externally supplied (e.g. discretized)
        hidden activations."""
        return _logistic(hidden @ (self.w_ho * self.mask_ho) + self.bias_o)

    # ---- serialization ------------------------------------------------

    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "format": CHECKPOINT_FORMAT,
            "config": {
                "input_count": cfg.input_count,
                "hidden_count": cfg.hidden_count,
                "output_count": cfg.output_count,
                "learning_rate": cfg.learning_rate,
                "weight_init_range": list(cfg.weight_init_range),
                "weight_decay": cfg.weight_decay,
                "seed": cfg.seed,
            },
            "w_ih": self.w_ih.tolist(),
            "w_ho": self.w_ho.tolist(),
            "bias_h": self.bias_h.tolist(),
            "bias_o": self.bias_o.tolist(),
            "mask_ih": self.mask_ih.astype(int).tolist(),
            "mask_ho": self.mask_ho.astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        if d.get("format") != CHECKPOINT_FORMAT:
            raise NetworkError(f"unsupported checkpoint format {d.get('format')!r}")
        c = d["config"]
        cfg = NetworkConfig(input_count=c["input_count"],
                            hidden_count=c["hidden_count"],
                            output_count=c["output_count"],
                            learning_rate=c["learning_rate"],
                            weight_init_range=tuple(c["weight_init_range"]),
                            weight_decay=c["weight_decay"], seed=c["seed"])
        return cls(config=cfg,
                   w_ih=np.array(d["w_ih"], dtype=float),
                   w_ho=np.array(d["w_ho"], dtype=float),
                   bias_h=np.array(d["bias_h"], dtype=float),
                   bias_o=np.array(d["bias_o"], dtype=float),
                   mask_ih=np.array(d["mask_ih"], dtype=bool),
                   mask_ho=np.array(d["mask_ho"], dtype=bool),
                   rng=np.random.default_rng(cfg.seed))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path) -> "Network":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _logistic(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def init_network(cfg: NetworkConfig, rng: np.random.Generator = None) -> Network:
    """Seeded uniform initialization; identical config gives identical weights."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.weight_init_range
    return Network(
        config=cfg,
        w_ih=rng.uniform(lo, hi, (cfg.input_count, cfg.hidden_count)),
        w_ho=rng.uniform(lo, hi, (cfg.hidden_count, cfg.output_count)),
        bias_h=rng.uniform(lo, hi, cfg.hidden_count),
        bias_o=rng.uniform(lo, hi, cfg.output_count),
        mask_ih=np.ones((cfg.input_count, cfg.hidden_count), dtype=bool),
        mask_ho=np.ones((cfg.hidden_count, cfg.output_count), dtype=bool),
        rng=rng,
    )


def add_hidden_node(net: Network) -> Network:
    """Grow the hidden layer by one node with fresh seeded incident weights;
    existing weights are retained."""
    lo, hi = net.config.weight_init_range
    rng = net.rng
    w_ih = np.column_stack([net.w_ih, rng.uniform(lo, hi, net.input_count)])
    w_ho = np.vstack([net.w_ho, rng.uniform(lo, hi, net.output_count)])
    bias_h = np.append(net.bias_h, rng.uniform(lo, hi))
    mask_ih = np.column_stack([net.mask_ih, np.ones(net.input_count, dtype=bool)])
    mask_ho = np.vstack([net.mask_ho, np.ones(net.output_count, dtype=bool)])
    cfg = net.config
    cfg = NetworkConfig(cfg.input_count, cfg.hidden_count + 1, cfg.output_count,
                        cfg.learning_rate, cfg.weight_init_range,
                        cfg.weight_decay, cfg.seed)
    return Network(config=cfg, w_ih=w_ih, w_ho=w_ho, bias_h=bias_h,
                   bias_o=net.bias_o.copy(), mask_ih=mask_ih, mask_ho=mask_ho,
                   rng=rng)


def pattern_loss(net: Network, x: np.ndarray, target: np.ndarray) -> float:
    """Squared-error loss 0.5 * sum((output - target)^2) for one pattern."""
    _, out = net.forward(x)
    return float(0.5 * np.sum((out - target) ** 2))


def pattern_gradients(net: Network, x: np.ndarray, target: np.ndarray):
    """Analytic gradients of :func:`pattern_loss` w.r.t. all weights."""
    hidden, out = net.forward(x)
    delta_o = (out - target) * out * (1.0 - out)
    g_w_ho = np.outer(hidden, delta_o) * net.mask_ho
    g_bias_o = delta_o
    hid_act = net.active_hidden()
    delta_h = ((net.w_ho * net.mask_ho) @ delta_o) * (1.0 - hidden ** 2) * hid_act
    g_w_ih = np.outer(x, delta_h) * net.mask_ih
    g_bias_h = delta_h
    return g_w_ih, g_bias_h, g_w_ho, g_bias_o


def train_epoch(net: Network, inputs: np.ndarray, targets: np.ndarray,
                epoch_index: int = 0, weight_decay: float = None) -> EpochStats:
    """One pass of per-pattern gradient descent in pattern order.

    ``weight_decay`` overrides the config value when given (the decay term is
    only active during the pre-pruning training phase).  Masked weights are
    never updated.
    """
    lr = net.config.learning_rate
    lam = net.config.weight_decay if weight_decay is None else weight_decay
    total = 0.0
    for x, t in zip(inputs, targets):
        g_w_ih, g_bias_h, g_w_ho, g_bias_o = pattern_gradients(net, x, t)
        if lam:
            g_w_ih = g_w_ih + lam * net.w_ih * net.mask_ih
            g_w_ho = g_w_ho + lam * net.w_ho * net.mask_ho
        net.w_ih -= lr * g_w_ih
        net.w_ho -= lr * g_w_ho
        net.bias_h -= lr * g_bias_h
        net.bias_o -= lr * g_bias_o
        _, out = net.forward(x)
        total += float(np.sum((out - t) ** 2))
    mse = total / len(inputs)
    if not np.isfinite(mse):
        raise TrainingDiverged(f"non-finite training error at epoch {epoch_index}")
    return EpochStats(epoch_index=epoch_index, mean_squared_error=mse,
                      training_accuracy=accuracy(net, inputs,
                                                 targets.argmax(axis=1)))


def classify(output: np.ndarray) -> int:
    """Argmax class index; ties break toward the lowest index."""
    output = np.asarray(output)
    if output.size == 0:
        raise NetworkError("empty output vector")
    return int(np.argmax(output))


def predictions(net: Network, inputs: np.ndarray) -> np.ndarray:
    _, out = net.forward(inputs)
    return out.argmax(axis=1)


def accuracy(net: Network, inputs: np.ndarray, class_indices: np.ndarray) -> float:
    if len(inputs) == 0:
        raise NetworkError("accuracy over empty dataset")
    return float(np.mean(predictions(net, inputs) == np.asarray(class_indices)))


def one_hot(class_indices: np.ndarray, n_classes: int) -> np.ndarray:
    t = np.zeros((len(class_indices), n_classes))
    t[np.arange(len(class_indices)), class_indices] = 1.0
    return t
