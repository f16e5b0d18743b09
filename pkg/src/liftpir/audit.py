"""Correctness and T-privacy audits.

Algebraic privacy: for a server subset J and desired index d, the queries J
receives are ``offset + G @ randomness`` with uniform randomness, i.e. they
are uniform on a coset.  Two desired indices are indistinguishable to J
exactly when the two cosets coincide.  Slots are put in a canonical order
(by message tag, then symbolic row) first; the real schedule shuffles each
server's slots uniformly whatever d is, so comparing canonical views is
enough.

Because every variable is one field element per stripe coordinate with the
same coefficients on all stripes, the generator is ``G_j (x) I`` per
message j.  Views therefore keep one small ``G_j`` and an offset matrix per
message, and the coset test runs per message.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.stats import chi2_contingency

from .linalg import joint_ranks
from .plan import AffinePlan
from .storage import Database

P_THRESHOLD = 1e-4
MUTATIONS = ("group_correction", "raw_basis", "low_degree")


@dataclass
class AffineView:
    subset: tuple
    desired: int
    signature: tuple  # (server, tag) of every row, canonical order
    generators: dict  # message -> (rows, n_vars_j) coefficient matrix
    offsets: dict  # message -> (rows, stripes) constant part
    p: int

    @property
    def rows(self) -> int:
        return len(self.signature)

    @property
    def offset(self) -> np.ndarray:
        """Concatenated constant part of the subset's queries."""
        per_row = [self.offsets[j] for j in sorted(self.offsets)]
        return np.hstack(per_row).reshape(-1) if per_row else np.zeros(0, dtype=np.int64)

    @property
    def generator(self) -> np.ndarray:
        """Dense map from the randomness to the concatenated queries (G_j kron I per message)."""
        msgs = sorted(self.generators)
        S = self.offsets[msgs[0]].shape[1]
        blocks = []
        for k, j in enumerate(msgs):
            G = self.generators[j]
            full = np.zeros((self.rows, len(msgs), S, G.shape[1], S), dtype=np.int64)
            for s in range(S):
                full[:, k, s, :, s] = G
            blocks.append(full.reshape(self.rows * len(msgs) * S, G.shape[1] * S))
        return np.hstack(blocks)


@dataclass
class AuditReport:
    params: dict
    verdicts: list = field(default_factory=list)
    p_values: list = field(default_factory=list)
    kind: str = "privacy"

    @property
    def passed(self) -> bool:
        return all(v["ok"] for v in self.verdicts) and all(
            pv["p_value"] >= P_THRESHOLD for pv in self.p_values
        )

    @property
    def failures(self) -> list:
        bad = [v for v in self.verdicts if not v["ok"]]
        bad += [pv for pv in self.p_values if pv["p_value"] < P_THRESHOLD]
        return bad

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": self.params,
            "passed": self.passed,
            "verdicts": self.verdicts,
            "p_values": self.p_values,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, default=str)


# -- views ---------------------------------------------------------------

def extract_view(builder, desired: int, subset: Sequence[int]) -> AffineView:
    """Affine description of what ``subset`` receives when ``desired`` is wanted.

    ``builder`` maps a desired index to an AffinePlan (or is a plan already
    fixed for ``desired``).
    """
    plan = builder(desired) if callable(builder) else builder
    if not isinstance(plan, AffinePlan):
        raise TypeError(
            f"builder returned {type(plan).__name__}, not an affine plan; "
            "use chi_square_audit for black-box samplers"
        )
    cfg = plan.config
    subset = tuple(sorted(subset))
    rows = [i for s in subset for i in plan.server_slots(s)]
    signature = tuple((plan.slots[i].server, plan.slots[i].tag) for i in rows)
    gens, offs = {}, {}
    for j in range(1, cfg.M + 1):
        cols: dict[int, int] = {}
        entries = []
        for r, i in enumerate(rows):
            for var, c in plan.slots[i].terms:
                if plan.var_message[var] == j:
                    entries.append((r, cols.setdefault(var, len(cols)), c))
        G = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for r, c, v in entries:
            G[r, c] = (G[r, c] + v) % cfg.p
        O = np.zeros((len(rows), cfg.stripes), dtype=np.int64)
        for r, i in enumerate(rows):
            if j in plan.slots[i].offsets:
                O[r] = plan.slots[i].offsets[j]
        gens[j], offs[j] = G, O
    return AffineView(subset, desired, signature, gens, offs, cfg.p)


def coset_equal(v1: AffineView, v2: AffineView) -> bool:
    """True iff both views are uniform on the same coset."""
    if v1.signature != v2.signature or v1.p != v2.p or set(v1.generators) != set(v2.generators):
        raise ValueError("views have different shapes")
    p = v1.p
    for j in v1.generators:
        G1, G2 = v1.generators[j], v2.generators[j]
        delta = (v1.offsets[j] - v2.offsets[j]) % p
        delta = delta[:, delta.any(axis=0)]
        if delta.shape[1]:
            delta = np.unique(delta, axis=1)
        r1, r2, r12, r1d = joint_ranks([G1, G2, delta], [(0,), (1,), (0, 1), (0, 2)], p)
        if not (r1 == r2 == r12 and r1d == r1):
            return False
    return True


# -- builders and canned mutations ----------------------------------------

def lifted_builder(config, S=None) -> Callable[[int], AffinePlan]:
    from .retrieval import lifted_matrix, schedule_plan

    S = lifted_matrix(config) if S is None else S
    return lambda d: schedule_plan(S, config, d)


def refined_builder(base) -> Callable[[int], AffinePlan]:
    from .refine import refined_plan

    return lambda d: refined_plan(base, d)


def one_shot_builder(scheme) -> Callable[[int], AffinePlan]:
    from .oneshot import one_shot_plan

    return lambda d: one_shot_plan(scheme, d)


def _first_slot(plan: AffinePlan, pick) -> int:
    for s in range(1, plan.config.N + 1):
        for i in plan.server_slots(s):
            if pick(plan.slots[i]):
                return i
    raise ValueError("mutation has no slot to act on in this scheme")


def mutate(plan: AffinePlan, desired: int, kind: str) -> AffinePlan:
    """Return a copy of ``plan`` with a known privacy break.

    group_correction: the desired-message correction e_1 is also added to
        the first interference query of the lowest server (leaks through the
        query's support).
    raw_basis: the first desired-carrying query of the lowest server loses
        its randomness on V_desired and carries e_1 in the clear.
    low_degree: every family polynomial loses its top coefficient, so T
        shares are no longer jointly uniform.
    """
    out = plan.copy()
    cfg = out.config
    e = np.zeros(cfg.stripes, dtype=np.int64)
    e[0] = 1
    if kind == "group_correction":
        i = _first_slot(out, lambda s: desired not in s.tag)
        out.add_offset(i, desired, e)
    elif kind == "raw_basis":
        i = _first_slot(out, lambda s: desired in s.tag)
        slot = out.slots[i]
        slot.terms = [(v, c) for v, c in slot.terms if out.var_message[v] != desired]
        slot.offsets[desired] = e.copy()
    elif kind == "low_degree":
        top = cfg.T - 1
        for slot in out.slots:
            slot.terms = [
                (v, c) for v, c in slot.terms
                if not (out.var_role[v][:1] == ("family",) and out.var_role[v][2] == top)
            ]
    else:
        raise ValueError(f"unknown mutation {kind!r}; choose from {MUTATIONS}")
    out.compile()
    return out


def mutated(builder, kind: str) -> Callable[[int], AffinePlan]:
    return lambda d: mutate(builder(d), d, kind)


# -- audits ----------------------------------------------------------------

def audit_privacy(builder, config, subsets: Optional[Sequence] = None,
                  params: Optional[dict] = None) -> AuditReport:
    """Coset comparison over all T-subsets of servers and all message pairs."""
    N, T, M = config.N, config.T, config.M
    report = AuditReport(params or {"N": N, "K": config.K, "T": T, "M": M, "p": config.p})
    plans = {d: builder(d) for d in range(1, M + 1)}
    for J in subsets or combinations(range(1, N + 1), T):
        views = {d: extract_view(plans[d], d, J) for d in plans}
        for d1, d2 in combinations(range(1, M + 1), 2):
            try:
                ok = coset_equal(views[d1], views[d2])
                reason = "" if ok else "cosets differ"
            except ValueError:
                ok, reason = False, "query counts or tags differ"
            report.verdicts.append(
                {"subset": list(J), "pair": [d1, d2], "ok": ok, "reason": reason}
            )
    return report


def plan_sampler(builder) -> Callable:
    """Black-box sampler over a plan builder: shuffled per-server query lists."""
    plans: dict = {}

    def sample(desired: int, rng: np.random.Generator) -> list:
        plan = plans.get(desired)
        if plan is None:
            plan = plans[desired] = builder(desired)
            plan.compile()
        _, Q = plan.sample(rng)
        out = []
        for s in range(1, plan.config.N + 1):
            ids = plan.server_slots(s)
            out.append([Q[ids[i]] for i in rng.permutation(len(ids))])
        return out

    return sample


def _canonical(queries: list) -> np.ndarray:
    """Sort one server's queries lexicographically (a function of the multiset)."""
    if not queries:
        return np.zeros(0, dtype=np.int64)
    Q = np.array(queries, dtype=np.int64)
    order = np.lexsort(Q.T[::-1])
    return Q[order].reshape(-1)


def chi_square_audit(
    black_box,
    config,
    trials: int = 10_000,
    rng=None,
    subsets: Optional[Sequence] = None,
    chunk: int = 3,
    min_expected: float = 5.0,
) -> AuditReport:
    """Chi-square homogeneity of the T-views across desired indices.

    Each view (servers in J, each server's queries sorted) is cut into
    chunks of ``chunk`` coordinates; every chunk gives one contingency table
    of value counts against the desired index.
    """
    p, N, T, M = config.p, config.N, config.T, config.M
    if p > 7:
        raise ValueError(f"chi-square audit needs a small field (p <= 7), got p={p}")
    if trials < 10_000:
        raise ValueError(f"need at least 10^4 trials, got {trials}")
    rng = np.random.default_rng(rng)
    subsets = [tuple(J) for J in (subsets or combinations(range(1, N + 1), T))]
    views: dict = {J: {d: [] for d in range(1, M + 1)} for J in subsets}
    for d in range(1, M + 1):
        for _ in range(trials):
            per_server = black_box(d, rng)
            canon = {s: _canonical(per_server[s - 1]) for s in range(1, N + 1)}
            for J in subsets:
                views[J][d].append(np.concatenate([canon[s] for s in J]))
    report = AuditReport({"N": N, "K": config.K, "T": T, "M": M, "p": p,
                          "trials": trials, "chunk": chunk}, kind="chi_square")
    for J in subsets:
        lengths = {len(v[0]) for v in views[J].values()}
        if len(lengths) != 1 or any(len({len(x) for x in v}) != 1 for v in views[J].values()):
            report.p_values.append({"subset": list(J), "chunk": None, "p_value": 0.0,
                                    "reason": "view sizes depend on the desired index"})
            continue
        arrays = {d: np.array(v) for d, v in views[J].items()}
        width = lengths.pop()
        for start in range(0, width, chunk):
            cols = range(start, min(start + chunk, width))
            weights = np.array([p ** i for i in range(len(cols))], dtype=np.int64)
            codes = {d: a[:, list(cols)] @ weights for d, a in arrays.items()}
            values = np.unique(np.concatenate(list(codes.values())))
            if values.size < 2:
                continue
            table = np.array([[np.count_nonzero(c == v) for v in values]
                              for c in codes.values()])
            table = _pool_sparse(table, min_expected)
            if table.shape[1] < 2:
                continue
            stat, pval, dof, expected = chi2_contingency(table, correction=False)
            report.p_values.append({"subset": list(J), "chunk": start,
                                    "p_value": float(pval), "statistic": float(stat)})
    return report


def _pool_sparse(table: np.ndarray, min_expected: float) -> np.ndarray:
    """Merge columns whose expected counts fall below ``min_expected``.

    Raises when the sparse columns carry most of the mass, i.e. the chunk
    is too wide for the number of trials.
    """
    total = table.sum()
    need = min_expected * total / table.sum(axis=1).min()
    sparse = table.sum(axis=0) < need
    if not sparse.any():
        return table
    pooled = table[:, sparse].sum(axis=1)
    if pooled.sum() * 2 > total:
        raise ValueError(
            f"under-populated bins ({int(sparse.sum())} of {table.shape[1]} sparse); "
            "raise trials or lower chunk size"
        )
    rest = table[:, ~sparse]
    if pooled.sum() < need:
        # fold a still-sparse remainder into the smallest dense column
        k = int(np.argmin(rest.sum(axis=0)))
        rest = rest.copy()
        rest[:, k] += pooled
        return rest
    return np.hstack([rest, pooled[:, None]])


def verify_correctness(S, db: Database, trials: int = 1, rng=None) -> AuditReport:
    """Retrieve every message ``trials`` times and compare with the plaintext."""
    from .lift import lifted_rate
    from .retrieval import retrieve

    rng = np.random.default_rng(rng)
    cfg = db.config
    expected_rate = lifted_rate(cfg.N, S.r, cfg.M)
    report = AuditReport({"N": cfg.N, "K": cfg.K, "T": cfg.T, "M": cfg.M, "p": cfg.p,
                          "trials": trials}, kind="correctness")
    for d in range(1, cfg.M + 1):
        for t in range(trials):
            msg, rate = retrieve(db, S, d, rng)
            exact = bool(np.array_equal(msg.symbols, db.messages[d - 1].symbols))
            report.verdicts.append({
                "desired": d, "trial": t, "ok": exact and rate == expected_rate,
                "rate": str(rate), "exact": exact,
            })
    return report


def rate_of(report: AuditReport) -> Optional[Fraction]:
    rates = {v["rate"] for v in report.verdicts if "rate" in v}
    return Fraction(rates.pop()) if len(rates) == 1 else None
