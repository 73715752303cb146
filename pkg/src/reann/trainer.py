"""Constructive hidden-layer sizing and accuracy-gated magnitude pruning.

Phase 1 starts from a single hidden node, trains in stages and adds nodes
while the training accuracy keeps improving by at least a threshold.
Phase 2 repeatedly masks the smallest-magnitude active connection, retrains
briefly, and commits the removal only if the training accuracy stays within
``accuracy_floor_drop`` of the pre-pruning baseline.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import (Network, NetworkConfig, NetworkError, add_hidden_node,
                      accuracy, init_network, one_hot, train_epoch)


@dataclass(frozen=True)
class ConstructiveSpec:
    max_hidden: int = 5
    epochs_per_stage: int = 50
    add_threshold: float = 0.005      # minimum accuracy gain per added node
    error_plateau_patience: int = 10  # epochs without MSE improvement

    def __post_init__(self):
        if self.max_hidden < 1 or self.epochs_per_stage < 1 or self.add_threshold < 0:
            raise NetworkError("invalid constructive spec")


@dataclass(frozen=True)
class PruneSpec:
    accuracy_floor_drop: float = 0.005
    retrain_epochs: int = 25

    def __post_init__(self):
        if self.accuracy_floor_drop < 0 or self.retrain_epochs < 0:
            raise NetworkError("invalid prune spec")


@dataclass(frozen=True)
class ArchitectureSnapshot:
    node_count: int
    connection_count: int
    layers: tuple[int, int, int]  # active inputs, active hidden, outputs


@dataclass
class ArchitectureTrace:
    initial: ArchitectureSnapshot = None
    intermediate: ArchitectureSnapshot = None
    final: ArchitectureSnapshot = None
    total_epochs: int = 0
    epoch_log: list = field(default_factory=list)   # EpochStats, in order
    prune_log: list = field(default_factory=list)   # PruneEvent, in order

    def to_dict(self) -> dict:
        def snap(s):
            return None if s is None else {
                "node_count": s.node_count,
                "connection_count": s.connection_count,
                "layers": list(s.layers),
            }
        return {
            "initial": snap(self.initial),
            "intermediate": snap(self.intermediate),
            "final": snap(self.final),
            "total_epochs": self.total_epochs,
        }


@dataclass(frozen=True)
class PruneEvent:
    """One pruning trial: which connection, the post-retrain accuracy, the
    floor in force, and whether the removal was committed."""
    layer: str          # "ih" or "ho"
    index: tuple[int, int]
    weight: float
    post_accuracy: float
    floor: float
    committed: bool


def snapshot(net: Network) -> ArchitectureSnapshot:
    layers = (int(net.active_inputs().sum()), int(net.active_hidden().sum()),
              net.output_count)
    return ArchitectureSnapshot(node_count=net.node_count(),
                                connection_count=net.connection_count(),
                                layers=layers)


def _train_stage(net, inputs, targets, epochs, patience, trace, weight_decay):
    """Train up to ``epochs`` epochs, stopping early once the error stops
    improving for ``patience`` consecutive epochs."""
    best = np.inf
    stale = 0
    stats = None
    for _ in range(epochs):
        stats = train_epoch(net, inputs, targets,
                            epoch_index=trace.total_epochs,
                            weight_decay=weight_decay)
        trace.total_epochs += 1
        trace.epoch_log.append(stats)
        if stats.mean_squared_error < best - 1e-6:
            best = stats.mean_squared_error
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                break
    return stats


def constructive_train(cfg: NetworkConfig, spec: ConstructiveSpec,
                       inputs: np.ndarray, class_indices: np.ndarray,
                       trace: ArchitectureTrace = None) -> tuple[Network, ArchitectureTrace]:
    """Grow the hidden layer until accuracy gains fall below the threshold."""
    if cfg.hidden_count != 1:
        raise NetworkError("constructive training starts from one hidden node")
    if trace is None:
        trace = ArchitectureTrace()
    targets = one_hot(class_indices, cfg.output_count)
    net = init_network(cfg)
    trace.initial = snapshot(net)

    _train_stage(net, inputs, targets, spec.epochs_per_stage,
                 spec.error_plateau_patience, trace, cfg.weight_decay)
    prev_net = net.copy()
    prev_acc = accuracy(net, inputs, class_indices)
    while net.hidden_count < spec.max_hidden:
        net = add_hidden_node(net)
        _train_stage(net, inputs, targets, spec.epochs_per_stage,
                     spec.error_plateau_patience, trace, cfg.weight_decay)
        acc = accuracy(net, inputs, class_indices)
        if acc - prev_acc < spec.add_threshold:
            # the addition did not pay off: keep the better of the last two
            # networks, preferring the smaller one on ties
            if acc > prev_acc:
                prev_net, prev_acc = net, acc
            net = prev_net
            break
        prev_net, prev_acc = net.copy(), acc
    else:
        net = prev_net
    trace.intermediate = snapshot(net)
    return net, trace


def retrain(net: Network, epochs: int, inputs: np.ndarray,
            class_indices: np.ndarray, trace: ArchitectureTrace = None,
            stop_at_accuracy: float = None) -> Network:
    """Run plain (no weight decay) training epochs honoring all masks."""
    if epochs and not net.active_hidden().any():
        raise NetworkError("no active hidden nodes")
    targets = one_hot(class_indices, net.output_count)
    for _ in range(epochs):
        stats = train_epoch(net, inputs, targets,
                            epoch_index=trace.total_epochs if trace else 0,
                            weight_decay=0.0)
        if trace is not None:
            trace.total_epochs += 1
            trace.epoch_log.append(stats)
        if stop_at_accuracy is not None and stats.training_accuracy >= stop_at_accuracy:
            break
    return net


def _candidates(net: Network, blocked: set):
    """Active connections sorted by ascending |weight|."""
    out = []
    for (i, j), on in np.ndenumerate(net.mask_ih):
        if on and ("ih", i, j) not in blocked:
            out.append((abs(net.w_ih[i, j]), "ih", (i, j), net.w_ih[i, j]))
    for (j, k), on in np.ndenumerate(net.mask_ho):
        if on and ("ho", j, k) not in blocked:
            out.append((abs(net.w_ho[j, k]), "ho", (j, k), net.w_ho[j, k]))
    out.sort(key=lambda t: (t[0], t[1], t[2]))
    return out


def prune(net: Network, spec: PruneSpec, inputs: np.ndarray,
          class_indices: np.ndarray,
          trace: ArchitectureTrace = None) -> tuple[Network, ArchitectureTrace]:
    """Mask connections smallest-|weight| first while accuracy holds.

    Each trial retrains up to ``retrain_epochs`` epochs; a removal is
    committed only if the training accuracy recovers to at least
    baseline - accuracy_floor_drop, otherwise the connection is restored and
    marked unprunable.  A final retrain follows the loop.
    """
    if trace is None:
        trace = ArchitectureTrace()
    baseline = accuracy(net, inputs, class_indices)
    floor = baseline - spec.accuracy_floor_drop
    blocked: set = set()
    while True:
        cands = _candidates(net, blocked)
        if not cands:
            break
        _, layer, idx, w = cands[0]
        saved = net.copy()
        mask = net.mask_ih if layer == "ih" else net.mask_ho
        mask[idx] = False
        if not net.active_hidden().any():
            post = 0.0
        else:
            retrain(net, spec.retrain_epochs, inputs, class_indices, trace,
                    stop_at_accuracy=floor)
            post = accuracy(net, inputs, class_indices)
        committed = post >= floor
        trace.prune_log.append(PruneEvent(layer=layer, index=idx, weight=w,
                                          post_accuracy=post, floor=floor,
                                          committed=committed))
        if not committed:
            net.w_ih, net.w_ho = saved.w_ih, saved.w_ho
            net.bias_h, net.bias_o = saved.bias_h, saved.bias_o
            net.mask_ih, net.mask_ho = saved.mask_ih, saved.mask_ho
            blocked.add((layer,) + idx)
    if net.active_hidden().any():
        before = net.copy()
        before_acc = accuracy(net, inputs, class_indices)
        retrain(net, spec.retrain_epochs, inputs, class_indices, trace)
        after_acc = accuracy(net, inputs, class_indices)
        if after_acc < floor and after_acc < before_acc:
            # the final retrain drifted below the floor: keep the pre-retrain
            # weights, which met the floor at the last commit
            net.w_ih, net.w_ho = before.w_ih, before.w_ho
            net.bias_h, net.bias_o = before.bias_h, before.bias_o
    trace.final = snapshot(net)
    return net, trace
