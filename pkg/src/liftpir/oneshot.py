"""One-shot PIR schemes: each server is queried exactly once.

Two samplers are provided.  The Reed-Solomon sampler works on coded data:
every coordinate of the query gets its own random polynomial of degree
< T, and server i's query is the coordinatewise evaluation at its point.
A response is then a polynomial of degree < K+T-1 evaluated at the server's
point, so any r = K+T-1 responses determine the others.  The secret-sharing
sampler is the same construction on replicated data (K = 1, r = T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import gf
from .linalg import rank_mod
from .plan import AffinePlan
from .storage import (
    Database,
    Message,
    StorageConfig,
    answer,
    rs_decode_stripe,
    response_functional,
)

KINDS = ("reed_solomon", "secret_sharing")


def codimension(N: int, K: int, T: int, kind: str = "reed_solomon") -> int:
    """Co-dimension r of a one-shot scheme family.

    ``rational_formula`` is the formula-only value (NK - N + T) / K; it
    raises when that is not an integer.
    """
    if not (1 <= K < N and 1 <= T <= N - K) and kind != "secret_sharing":
        raise ValueError(f"invalid parameters N={N}, K={K}, T={T}")
    if kind == "reed_solomon":
        return K + T - 1
    if kind == "secret_sharing":
        if K != 1:
            raise ValueError("secret sharing works on replicated data (K = 1)")
        if not 1 <= T < N:
            raise ValueError(f"need 1 <= T < N, got T={T}, N={N}")
        return T
    if kind == "rational_formula":
        num = N * K - N + T
        if num % K:
            raise ValueError(f"(NK-N+T)/K = {num}/{K} is not an integer")
        return num // K
    raise ValueError(f"unknown kind {kind!r}")


def one_shot_rate(N: int, r: int) -> Fraction:
    if not 1 <= r < N:
        raise ValueError(f"need 1 <= r < N, got r={r}, N={N}")
    return Fraction(N - r, N)


def repetitions(N: int, r: int, K: int) -> int:
    """Runs needed before the retrieved symbols close into whole stripes."""
    if not 1 <= r < N:
        raise ValueError(f"need 1 <= r < N, got r={r}, N={N}")
    return math.lcm(N - r, K) // (N - r)


@dataclass(frozen=True)
class OneShotScheme:
    config: StorageConfig
    r: int
    sampler_kind: str
    group_servers: tuple
    generated_servers: tuple

    def __post_init__(self):
        N = self.config.N
        if self.sampler_kind not in KINDS:
            raise ValueError(f"unknown sampler {self.sampler_kind!r}")
        if not 1 <= self.r < N:
            raise ValueError(f"need 1 <= r < N, got r={self.r}")
        expected = codimension(N, self.config.K, self.config.T, self.sampler_kind)
        if self.r != expected:
            raise ValueError(f"{self.sampler_kind} needs r={expected}, got {self.r}")
        if len(self.group_servers) != self.r:
            raise ValueError("group must hold exactly r servers")
        if sorted(self.group_servers + self.generated_servers) != list(range(1, N + 1)):
            raise ValueError("group and generated servers must partition 1..N")

    @property
    def degree(self) -> int:
        """Number of coefficients of each query polynomial (T)."""
        return self.config.T

    def rotated(self, shift: int) -> "OneShotScheme":
        N = self.config.N
        rot = lambda s: (s - 1 + shift) % N + 1  # noqa: E731
        return OneShotScheme(
            self.config, self.r, self.sampler_kind,
            tuple(rot(s) for s in self.group_servers),
            tuple(rot(s) for s in self.generated_servers),
        )


def make_scheme(
    config: StorageConfig,
    kind: str = "reed_solomon",
    group_servers: Optional[Sequence[int]] = None,
) -> OneShotScheme:
    r = codimension(config.N, config.K, config.T, kind)
    group = tuple(group_servers) if group_servers is not None else tuple(range(1, r + 1))
    rest = tuple(s for s in range(1, config.N + 1) if s not in group)
    return OneShotScheme(config, r, kind, group, rest)


@dataclass
class InterferenceFamily:
    queries: list  # N query vectors, index server-1
    support: tuple
    randomness_tag: str
    coeffs: dict = field(default_factory=dict)  # message -> (T, S) polynomial coefficients


@dataclass
class CorrectionSet:
    vectors: list  # one basis vector in V_desired per generated server
    stripe_assignment: list  # (message, stripe, server) per vector


def add_share_family(
    plan: AffinePlan,
    slot_of: dict,
    support: Sequence[int],
    T: int,
    family_id=None,
) -> dict:
    """Attach a Shamir-style family to existing plan slots.

    ``slot_of`` maps server -> slot id (one per column).  For each message in
    ``support`` it creates T coefficient variables; the share at a server is
    the coefficient polynomial evaluated at that server's point.  Returns
    ``{message: [var ids by degree]}``.
    """
    cfg = plan.config
    out = {}
    for j in sorted(support):
        vars_ = [plan.new_var(j, ("family", family_id, t)) for t in range(T)]
        out[j] = vars_
        for server, slot in slot_of.items():
            row = gf.monomials(cfg.p, cfg.point(server), T)
            for t, var in enumerate(vars_):
                if row[t]:
                    plan.add_term(slot, var, int(row[t]))
    return out


def _check_support(config: StorageConfig, support) -> tuple:
    support = tuple(sorted(set(support)))
    if not support:
        raise ValueError("family support must be nonempty")
    if support[0] < 1 or support[-1] > config.M:
        raise ValueError(f"support {support} outside 1..{config.M}")
    return support


def sample_family(
    scheme: OneShotScheme,
    support: Sequence[int],
    rng: np.random.Generator,
    tag: str = "",
) -> InterferenceFamily:
    cfg = scheme.config
    support = _check_support(cfg, support)
    plan = AffinePlan(cfg)
    slot_of = {s: plan.add_slot(s, support) for s in range(1, cfg.N + 1)}
    vars_ = add_share_family(plan, slot_of, support, scheme.degree)
    values, queries = plan.sample(rng)
    coeffs = {j: values[v] for j, v in vars_.items()}
    return InterferenceFamily([queries[slot_of[s]] for s in range(1, cfg.N + 1)],
                              support, tag, coeffs)


def correction_set(scheme: OneShotScheme, desired: int, first_symbol: int = 0) -> CorrectionSet:
    """Basis corrections for the generated servers.

    Correction number g (counted globally from ``first_symbol``) selects
    stripe ``g // K``; as long as consecutive corrections land on distinct
    servers every stripe collects K evaluations at distinct points.
    """
    cfg = scheme.config
    vectors, assignment = [], []
    for i, server in enumerate(scheme.generated_servers):
        stripe = ((first_symbol + i) // cfg.K) % cfg.stripes
        e = np.zeros(cfg.shard_len, dtype=np.int64)
        e[cfg.block(desired).start + stripe] = 1
        vectors.append(e)
        assignment.append((desired, stripe, server))
    return CorrectionSet(vectors, assignment)


def one_shot_plan(scheme: OneShotScheme, desired: int, first_symbol: int = 0) -> AffinePlan:
    """Affine plan of one run: shares everywhere, corrections at generated servers."""
    cfg = scheme.config
    if not 1 <= desired <= cfg.M:
        raise ValueError(f"desired index {desired} outside 1..{cfg.M}")
    plan = AffinePlan(cfg)
    support = tuple(range(1, cfg.M + 1))
    slot_of = {s: plan.add_slot(s, support, role="group" if s in scheme.group_servers
                                else "generated") for s in range(1, cfg.N + 1)}
    add_share_family(plan, slot_of, support, scheme.degree, family_id=0)
    corr = correction_set(scheme, desired, first_symbol)
    for vec, (_, stripe, server) in zip(corr.vectors, corr.stripe_assignment):
        plan.add_offset(slot_of[server], desired, vec[cfg.block(desired)])
        plan.slots[slot_of[server]].meta["stripe"] = stripe
    return plan


def build_one_shot(
    scheme: OneShotScheme,
    desired: int,
    rng: np.random.Generator,
    first_symbol: int = 0,
) -> tuple[list, CorrectionSet]:
    """Queries for one run: group servers get q_i, generated ones q_i + a_j."""
    cfg = scheme.config
    if not 1 <= desired <= cfg.M:
        raise ValueError(f"desired index {desired} outside 1..{cfg.M}")
    family = sample_family(scheme, range(1, cfg.M + 1), rng)
    corr = correction_set(scheme, desired, first_symbol)
    queries = [q.copy() for q in family.queries]
    for vec, (_, _, server) in zip(corr.vectors, corr.stripe_assignment):
        queries[server - 1] = (queries[server - 1] + vec) % cfg.p
    return queries, corr


def corrections_independent(config: StorageConfig, corr: CorrectionSet) -> bool:
    """True when the correction responses are independent functionals."""
    rows = [
        response_functional(config, server, vec[config.block(msg)])
        for vec, (msg, _, server) in zip(corr.vectors, corr.stripe_assignment)
    ]
    return rank_mod(np.array(rows), config.p) == len(rows)


def predict(config: StorageConfig, group: Sequence[int], responses: Sequence[int],
            target: int, degree_bound: int) -> int:
    """Response at ``target`` implied by the group's responses."""
    w = gf.interpolation_weights(config.p, [config.point(s) for s in group],
                                 config.point(target), degree_bound)
    return int(w @ np.asarray(responses, dtype=np.int64) % config.p)


def retrieve_one_shot(
    db: Database,
    scheme: OneShotScheme,
    desired: int,
    rng: np.random.Generator,
) -> tuple[Message, Fraction]:
    """Run the one-shot scheme until every stripe of the desired message closes.

    Run t rotates the group by t(N-r) so the generated servers walk around
    all N servers.  Needs (N - r) | L.
    """
    cfg = db.config
    N, r, L = cfg.N, scheme.r, cfg.L
    if L % (N - r):
        raise ValueError(f"message length L={L} is not a multiple of N-r={N - r}")
    runs = L // (N - r)
    evals: dict[int, list] = {s: [] for s in range(cfg.stripes)}
    downloads = 0
    for t in range(runs):
        sch = scheme.rotated(t * (N - r))
        queries, corr = build_one_shot(sch, desired, rng, first_symbol=t * (N - r))
        resp = {s: answer(db.shard(s), queries[s - 1], cfg.p) for s in range(1, N + 1)}
        downloads += N
        group_resp = [resp[s] for s in sch.group_servers]
        for _, stripe, server in corr.stripe_assignment:
            interference = predict(cfg, sch.group_servers, group_resp, server, r)
            evals[stripe].append((server, (resp[server] - interference) % cfg.p))
    symbols = []
    for stripe in range(cfg.stripes):
        symbols.extend(rs_decode_stripe(evals[stripe], cfg))
    return Message(np.array(symbols, dtype=np.int64), desired), Fraction(L, downloads)
