"""Refinement of a one-shot scheme into a two-message scheme of rate N/(N+r).

Group servers receive two 1-queries, a_i on the desired message and b_i on
the other one; generated servers receive a single 2-query a_i + b_i.  The
b's are a one-shot family restricted to the other message, so their
generated parts cancel.  The a's are a one-shot family on the desired
message plus basis corrections at the generated servers, which keeps all N
a-responses independent while leaving every T-view uniform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .decode import desired_rank, solve_desired
from .linalg import SingularMatrixError
from .oneshot import OneShotScheme, add_share_family, correction_set
from .plan import AffinePlan, FamilyRecord
from .storage import Database, Message, answer

MAX_REDRAWS = 16


def refined_rate(N: int, r: int) -> Fraction:
    if not 1 <= r < N:
        raise ValueError(f"need 1 <= r < N, got r={r}, N={N}")
    return Fraction(N, N + r)


def refined_length(N: int, K: int) -> int:
    """Message length for one retrieval: N symbols per run, runs until K | L."""
    return N * (K // math.gcd(K, N))


@dataclass
class RefinedScheme:
    base: OneShotScheme
    desired: int
    plan: AffinePlan
    queries: np.ndarray  # one row per plan slot
    layout: list  # per server: slot ids in the (shuffled) order sent

    @property
    def query_count(self) -> int:
        return len(self.plan.slots)

    def server_queries(self, server: int) -> list:
        return [self.queries[i] for i in self.layout[server - 1]]


def refined_plan(base: OneShotScheme, desired: int) -> AffinePlan:
    cfg = base.config
    if cfg.M != 2:
        raise ValueError(f"refinement is a two-message construction, got M={cfg.M}")
    if desired not in (1, 2):
        raise ValueError(f"desired must be 1 or 2, got {desired}")
    if cfg.L != refined_length(cfg.N, cfg.K):
        raise ValueError(f"refinement needs L={refined_length(cfg.N, cfg.K)}, got {cfg.L}")
    other = 3 - desired
    N, r = cfg.N, base.r
    plan = AffinePlan(cfg)
    for t in range(cfg.L // N):
        sch = base.rotated(t * (N - r))
        a_slot, b_slot = {}, {}
        for s in sch.group_servers:
            a_slot[s] = plan.add_slot(s, (desired,), (t, 0), role="a", run=t)
            b_slot[s] = plan.add_slot(s, (other,), (t, 1), role="b", run=t)
        for s in sch.generated_servers:
            a_slot[s] = b_slot[s] = plan.add_slot(s, (1, 2), (t, 0), role="a+b", run=t)
        add_share_family(plan, b_slot, (other,), base.degree, family_id=("b", t))
        add_share_family(plan, a_slot, (desired,), base.degree, family_id=("a", t))
        corr = correction_set(sch, desired, first_symbol=t * (N - r))
        for vec, (_, _, s) in zip(corr.vectors, corr.stripe_assignment):
            plan.add_offset(a_slot[s], desired, vec[cfg.block(desired)])
        members = [b_slot[s] for s in sch.group_servers]
        gens = [b_slot[s] for s in sch.generated_servers]
        plan.families[("b", t)] = FamilyRecord(members, gens, r, True, (other,))
        plan.families[("a", t)] = FamilyRecord(
            [a_slot[s] for s in sch.group_servers], gens, r, False, (desired,))
    return plan


def refine(base: OneShotScheme, desired: int, rng: np.random.Generator,
           verify: bool = True) -> RefinedScheme:
    """Draw the refined queries for ``desired`` and shuffle each server's slots.

    With ``verify`` the a-side functionals are checked for independence and
    redrawn up to MAX_REDRAWS times.
    """
    plan = refined_plan(base, desired)
    cfg = plan.config
    for _ in range(MAX_REDRAWS):
        _, queries = plan.sample(rng)
        if not verify or desired_rank(cfg, plan.servers, plan.tags, queries, desired) == cfg.L:
            break
    else:
        raise SingularMatrixError(
            f"a-side responses stayed dependent after {MAX_REDRAWS} draws; field F_{cfg.p} too small"
        )
    layout = []
    for s in range(1, cfg.N + 1):
        ids = plan.server_slots(s)
        layout.append([ids[i] for i in rng.permutation(len(ids))])
    return RefinedScheme(base, desired, plan, queries, layout)


def decode_refined(scheme: RefinedScheme, answers: dict) -> Message:
    """``answers`` maps (server, position in layout) to the server's reply."""
    plan = scheme.plan
    flat = np.zeros(len(plan.slots), dtype=np.int64)
    for s, ids in enumerate(scheme.layout, start=1):
        for pos, slot in enumerate(ids):
            flat[slot] = answers[(s, pos)]
    sym = solve_desired(plan.config, plan.servers, plan.tags, plan.families,
                        scheme.queries, flat, scheme.desired)
    return Message(sym, scheme.desired)


def retrieve_refined(db: Database, base: OneShotScheme, desired: int,
                     rng: np.random.Generator) -> tuple[Message, Fraction]:
    scheme = refine(base, desired, rng)
    answers = {}
    for s in range(1, db.config.N + 1):
        for pos, q in enumerate(scheme.server_queries(s)):
            answers[(s, pos)] = answer(db.shard(s), q, db.config.p)
    msg = decode_refined(scheme, answers)
    return msg, Fraction(db.config.L, len(answers))
