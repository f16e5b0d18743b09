"""User-side decoding shared by the refined and lifted schemes.

Decoding works from what the user knows after the exchange: the queries it
sent, the answers, each slot's server and message tag, and the family
records.  Interference at a generated slot is predicted from the member
answers of its family and subtracted.  Every slot whose tag holds the
desired message then yields one linear functional of that message's L
symbols; the functionals are solved jointly.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import gf
from .linalg import rank_mod, solve_mod
from .storage import StorageConfig, response_functional


def predicted_interference(
    config: StorageConfig,
    servers: Sequence[int],
    families: dict,
    answers: np.ndarray,
) -> np.ndarray:
    """Interference part of each slot's answer (zero outside generated slots)."""
    p = config.p
    pred = np.zeros(len(servers), dtype=np.int64)
    for fam in families.values():
        if not fam.interference:
            continue
        pts = [config.point(servers[m]) for m in fam.members]
        resp = np.array([answers[m] for m in fam.members], dtype=np.int64)
        for g in fam.generated:
            w = gf.interpolation_weights(p, pts, config.point(servers[g]), fam.degree_bound)
            pred[g] = (pred[g] + int(w @ resp % p)) % p
    return pred


def desired_functionals(
    config: StorageConfig,
    servers: Sequence[int],
    tags: Sequence[tuple],
    queries: np.ndarray,
    desired: int,
) -> tuple[list[int], np.ndarray]:
    """Slots carrying the desired message and their functionals over its symbols."""
    ids = [i for i, t in enumerate(tags) if desired in t]
    blk = config.block(desired)
    rows = [response_functional(config, servers[i], queries[i][blk]) for i in ids]
    if not rows:
        return ids, np.zeros((0, config.L), dtype=np.int64)
    return ids, np.array(rows, dtype=np.int64)


def desired_rank(config, servers, tags, queries, desired) -> int:
    _, A = desired_functionals(config, servers, tags, queries, desired)
    return rank_mod(A, config.p)


def solve_desired(
    config: StorageConfig,
    servers: Sequence[int],
    tags: Sequence[tuple],
    families: dict,
    queries: np.ndarray,
    answers: np.ndarray,
    desired: int,
) -> np.ndarray:
    """Recover the desired message's L symbols.

    Raises ``SingularMatrixError`` when the functionals do not span.
    """
    p = config.p
    answers = np.asarray(answers, dtype=np.int64)
    clean = (answers - predicted_interference(config, servers, families, answers)) % p
    ids, A = desired_functionals(config, servers, tags, queries, desired)
    if len(ids) != config.L:
        raise ValueError(f"{len(ids)} desired-carrying slots for L={config.L} symbols")
    return solve_mod(A, clean[ids], p)
