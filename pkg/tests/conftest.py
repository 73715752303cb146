"""Shared helpers for building small in-memory datasets and networks."""
import numpy as np
import pytest

from reann.dataset import (AttributeSpec, CATEGORICAL, CONTINUOUS, DatasetSchema,
                           load_dataset, normalize)
from reann.network import NetworkConfig, init_network


def continuous_schema(n_attrs, class_names=("a", "b"), name="toy", **kw):
    return DatasetSchema(
        name=name,
        attributes=tuple(AttributeSpec(f"x{i}", CONTINUOUS) for i in range(n_attrs)),
        class_names=tuple(class_names), **kw)


def dataset_from_rows(rows, schema):
    """rows: iterable of (values..., label) tuples."""
    lines = [",".join(str(v) for v in row) for row in rows]
    return normalize(load_dataset(lines, schema))


def random_network(rng, max_inputs=4, max_hidden=3, max_outputs=3,
                   mask_drop=0.0):
    cfg = NetworkConfig(
        input_count=int(rng.integers(1, max_inputs + 1)),
        hidden_count=int(rng.integers(1, max_hidden + 1)),
        output_count=int(rng.integers(2, max_outputs + 1)),
        seed=int(rng.integers(0, 2 ** 31)))
    net = init_network(cfg)
    if mask_drop:
        net.mask_ih &= rng.random(net.mask_ih.shape) >= mask_drop
        net.mask_ho &= rng.random(net.mask_ho.shape) >= mask_drop
    return net


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
