"""Planted synthetic entity/action tables for end-to-end checks.

Entity activity is label-independent. For informative base features the
label shifts both the value mean and the chance a row carries the feature,
so every window/aggregator column derived from them carries signal. Noise
features get entity-level offsets unrelated to the label.
"""

from __future__ import annotations

import numpy as np

from .data_core import ActionTable, EntityTable

DAY = 86400
EPOCH0 = 1_600_000_000


def make_synthetic(n_entities: int, n_informative: int, n_noise: int, ell: int = 90,
                   seed: int = 0, label_noise: float = 0.05, shift: float = 1.0,
                   rate_range=(0.3, 1.5), noise_frac: float = 0.25) -> tuple[ActionTable, EntityTable]:
    """Return (actions, entities); informative features are named ``inf_*``."""
    rng = np.random.default_rng(seed)
    names = [f"inf_{j:02d}" for j in range(n_informative)] + \
            [f"noise_{j:02d}" for j in range(n_noise)]
    n_feat = len(names)
    informative = np.arange(n_feat) < n_informative
    base_mu = rng.uniform(5.0, 20.0, n_feat)
    base_sd = noise_frac * base_mu

    truth = rng.integers(0, 2, n_entities)
    flip = rng.random(n_entities) < label_noise
    labels = np.where(flip, 1 - truth, truth)

    ids, stamps, cols = [], [], [[] for _ in names]
    for e in range(n_entities):
        eid = f"e{e:05d}"
        rate = rng.uniform(*rate_range)
        counts = rng.poisson(rate, ell)
        n = int(counts.sum())
        day = np.repeat(np.arange(ell), counts)
        ts = EPOCH0 + day * DAY + rng.integers(0, DAY, n)
        offset = rng.normal(0.0, 0.3, n_feat) * base_sd
        present_p = np.where(informative, 0.5 + 0.3 * truth[e], rng.uniform(0.4, 0.9, n_feat))
        mean = base_mu + offset + informative * shift * base_sd * truth[e]
        present = rng.random((n, n_feat)) < present_p
        vals = rng.normal(mean, base_sd, (n, n_feat))
        vals = np.where(present, vals, np.nan)
        ids.extend([eid] * n)
        stamps.append(ts)
        for j in range(n_feat):
            cols[j].append(vals[:, j])

    stamps = np.concatenate(stamps) if stamps else np.empty(0)
    features = {name: (np.concatenate(c) if c else np.empty(0)) for name, c in zip(names, cols)}
    actions = ActionTable(entity_ids=np.array(ids, dtype=object), timestamps=stamps.astype(np.float64),
                          features=features)
    entities = EntityTable(entity_ids=tuple(f"e{e:05d}" for e in range(n_entities)),
                           labels=tuple(int(v) for v in labels))
    return actions, entities
