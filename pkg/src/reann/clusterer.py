"""Discretization of hidden-node activations by single-pass clustering.

Each hidden node's activation series (in pattern order) is swept once: a
value joins the nearest existing cluster when it lies within ``epsilon`` of
that cluster's seed, otherwise it opens a new cluster.  After the sweep each
representative becomes its cluster's mean.  If replacing activations by their
representatives costs accuracy, epsilon is shrunk and the sweep repeated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Network


class ClusteringFailed(RuntimeError):
    """Epsilon hit the schedule floor without reaching the required accuracy.

    Carries the best attempt so callers can inspect or fall back to it."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class ClusterModel:
    epsilon: float
    representatives: tuple[float, ...]
    counts: tuple[int, ...]
    sums: tuple[float, ...]

    @property
    def cluster_count(self) -> int:
        return len(self.representatives)

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon,
                "representatives": list(self.representatives),
                "counts": list(self.counts)}


@dataclass(frozen=True)
class ConstantNode:
    """Marker for a hidden node whose output barely moves over the training
    set; such nodes are not clustered."""
    value: float


@dataclass(frozen=True)
class EpsilonSchedule:
    start: float = 0.5
    factor: float = 0.5
    floor: float = 1e-3

    def __post_init__(self):
        if not (0 < self.start < 1) or not (0 < self.factor < 1) or self.floor <= 0:
            raise ValueError("invalid epsilon schedule")


@dataclass
class DiscretizedNetwork:
    network: Network
    # one entry per hidden node index: ClusterModel, ConstantNode, or None
    # for masked-out nodes
    models: list
    achieved_accuracy: float
    epsilon: float

    def active_model_nodes(self) -> list[int]:
        """Hidden node indices that carry a genuine (non-constant) model."""
        return [j for j, m in enumerate(self.models) if isinstance(m, ClusterModel)]

    def discretize_activations(self, hidden: np.ndarray) -> np.ndarray:
        """Replace each activation by its nearest representative (constant
        nodes by their constant)."""
        out = hidden.copy()
        for j, m in enumerate(self.models):
            if isinstance(m, ClusterModel):
                reps = np.asarray(m.representatives)
                idx = np.abs(out[:, j][:, None] - reps[None, :]).argmin(axis=1)
                out[:, j] = reps[idx]
            elif isinstance(m, ConstantNode):
                out[:, j] = m.value
        return out

    def codes(self, hidden: np.ndarray) -> dict[int, np.ndarray]:
        """Cluster index per pattern for every clustered hidden node."""
        return {j: assign_many(self.models[j], hidden[:, j])
                for j in self.active_model_nodes()}


def is_constant_output(values: np.ndarray, tolerance: float = 0.02):
    """(is_constant, constant_value): true when max-min <= tolerance."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty activation series")
    if values.max() - values.min() <= tolerance:
        return True, float(values.mean())
    return False, None


def cluster_activations(values: np.ndarray, epsilon: float) -> ClusterModel:
    """Single sweep in series order; distances are measured to cluster seeds,
    representatives are finalized to cluster means afterwards."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empty activation series")
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must lie in (0, 1)")
    seeds = [values[0]]
    counts = [1]
    sums = [values[0]]
    for delta in values[1:]:
        dists = [abs(delta - s) for s in seeds]
        j = int(np.argmin(dists))
        if dists[j] <= epsilon:
            counts[j] += 1
            sums[j] += delta
        else:
            seeds.append(delta)
            counts.append(1)
            sums.append(delta)
    reps = tuple(s / c for s, c in zip(sums, counts))
    return ClusterModel(epsilon=epsilon, representatives=reps,
                        counts=tuple(counts), sums=tuple(float(s) for s in sums))


def assign(model: ClusterModel, delta: float) -> int:
    """Index of the nearest representative; ties go to the lowest index."""
    reps = np.asarray(model.representatives)
    return int(np.abs(reps - delta).argmin())


def assign_many(model: ClusterModel, values: np.ndarray) -> np.ndarray:
    reps = np.asarray(model.representatives)
    return np.abs(np.asarray(values)[:, None] - reps[None, :]).argmin(axis=1)


def discretize_network(net: Network, inputs: np.ndarray,
                       class_indices: np.ndarray,
                       required_accuracy: float,
                       schedule: EpsilonSchedule = EpsilonSchedule(),
                       constant_tolerance: float = 0.02) -> DiscretizedNetwork:
    """Cluster every active hidden node, shrinking epsilon until the network
    with discretized activations reaches ``required_accuracy`` on the
    training patterns."""
    hidden, _ = net.forward(inputs)
    active = net.active_hidden()
    class_indices = np.asarray(class_indices)

    eps = schedule.start
    best = None
    while True:
        models = []
        for j in range(net.hidden_count):
            if not active[j]:
                models.append(None)
                continue
            const, value = is_constant_output(hidden[:, j], constant_tolerance)
            if const:
                models.append(ConstantNode(value))
            else:
                models.append(cluster_activations(hidden[:, j], eps))
        dn = DiscretizedNetwork(network=net, models=models,
                                achieved_accuracy=0.0, epsilon=eps)
        disc = dn.discretize_activations(hidden)
        out = net.forward_from_hidden(disc)
        acc = float(np.mean(out.argmax(axis=1) == class_indices))
        dn.achieved_accuracy = acc
        if best is None or acc > best.achieved_accuracy:
            best = dn
        if acc >= required_accuracy:
            return dn
        eps *= schedule.factor
        if eps < schedule.floor:
            raise ClusteringFailed(
                f"epsilon schedule exhausted below {schedule.floor} "
                f"(best accuracy {best.achieved_accuracy:.4f} < "
                f"required {required_accuracy:.4f})", best)
