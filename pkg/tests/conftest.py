"""Shared helpers for the test suite."""

from __future__ import annotations

import itertools

import pytest

from ppir.harness import auto_field_size
from ppir.model import (
    InstanceParams,
    build_layout,
    held_messages,
    random_store,
    sample_side_info,
)


def make_world(class_sizes, side_counts, msg_len=1, q=None, seed=0):
    """Layout, store, side info and held values for one seeded instance."""
    q = q or auto_field_size(class_sizes, side_counts)
    params = InstanceParams(class_sizes, side_counts, msg_len=msg_len, q=q)
    layout = build_layout(params, seed)
    store = random_store(layout, seed + 1)
    side = sample_side_info(layout, seed + 2)
    values = held_messages(store, side)
    return params, layout, store, side, values


def compositions(total, parts):
    """Ordered compositions of `total` into `parts` positive integers."""
    if parts == 1:
        yield (total,)
        return
    for head in range(1, total - parts + 2):
        for rest in compositions(total - head, parts - 1):
            yield (head,) + rest


def grid_params(gammas=(2, 3), max_class_size=5, msg_lens=(1,), demand=1):
    """Instance grid, exhaustive up to class relabeling."""
    out = []
    pairs = [
        (mu, k)
        for mu in range(1, max_class_size + 1)
        for k in range(mu)
        if mu >= k + demand
    ]
    for gamma in gammas:
        for combo in itertools.combinations_with_replacement(pairs, gamma):
            class_sizes = tuple(mu for mu, _ in combo)
            side_counts = tuple(k for _, k in combo)
            q = auto_field_size(class_sizes, side_counts, demand)
            for msg_len in msg_lens:
                out.append(
                    InstanceParams(class_sizes, side_counts, msg_len=msg_len, q=q)
                )
    return out


@pytest.fixture(scope="session")
def acceptance_grid():
    return grid_params(gammas=(2, 3), max_class_size=5, msg_lens=(1, 4))
