"""Turning a symbolic matrix into queries, running them, and decoding.

Slots: every entry k at (row, col) expands to one slot per k-subset of
messages, sent to server col.  For a desired index d:

* a slot whose subset U misses d is an interference query.  Its position is
  a member of exactly one Group at level |U|, and it holds that group's
  share of the family (Group, U);
* a slot whose subset contains d holds a fresh uniform component on V_d
  and, when |subset| >= 2, the share of the family (G', subset - {d}) where
  G' is the group that generated its position.

Each family is a one-shot family spread over the N columns of its group, so
the user predicts its generated shares' responses from the member ones.
What remains at the desired-carrying slots are L independent-looking
functionals of W^d, solved jointly.  Every T-subset of servers sees
independent uniform vectors on each slot's subspaces whatever d is.

When K does not divide N^(M-1) the schedule is repeated rho times (each
repetition column-shifted by its index) so that L = rho * N^(M-1) is a
multiple of K.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np

from .decode import desired_rank, solve_desired
from .lift import SymbolicMatrix, shift_left, symbolic_matrix
from .linalg import SingularMatrixError
from .oneshot import add_share_family
from .plan import AffinePlan, FamilyRecord
from .storage import Database, Message, StorageConfig

MAX_REDRAWS = 16


def message_length(N: int, K: int, M: int) -> int:
    """Smallest L = rho * N^(M-1) that K divides."""
    base = N ** (M - 1)
    return base * (K // math.gcd(K, base))


def repetition_factor(config: StorageConfig) -> int:
    base = config.N ** (config.M - 1)
    if config.L % base:
        raise ValueError(
            f"L={config.L} must be a multiple of N^(M-1)={base}; "
            f"use L={message_length(config.N, config.K, config.M)}"
        )
    return config.L // base


@dataclass
class SlotMeta:
    position: tuple  # (row, col) in the repetition's symbolic matrix
    tag: tuple
    rep: int
    family: Optional[str]  # family the slot belongs to, if any
    role: str  # "member", "generated" or "desired"


@dataclass
class QuerySchedule:
    config: StorageConfig
    desired: int
    servers: list  # server of each slot
    tags: list  # message subset of each slot
    families: dict  # family id -> FamilyRecord over slot ids
    queries: np.ndarray  # one row per slot
    layout: list  # per server: slot ids in the order sent
    slot_meta: dict  # (server, position in layout) -> SlotMeta
    seed: Optional[int] = None
    plan: Optional[AffinePlan] = field(default=None, repr=False)

    @property
    def per_server(self) -> list:
        return [[self.queries[i] for i in ids] for ids in self.layout]

    @property
    def query_count(self) -> int:
        return len(self.servers)


@dataclass
class Transcript:
    answers: list  # per server, aligned with QuerySchedule.layout
    download_count: int


def _validate(S: SymbolicMatrix, config: StorageConfig, desired: int) -> None:
    if (S.N, S.M) != (config.N, config.M):
        raise ValueError(f"matrix is for N={S.N}, M={S.M}; storage has N={config.N}, M={config.M}")
    if S.r != config.K + config.T - 1:
        raise ValueError(f"matrix co-dimension r={S.r} but K+T-1={config.K + config.T - 1}")
    if not 1 <= desired <= config.M:
        raise ValueError(f"desired index {desired} outside 1..{config.M}")


def schedule_plan(S: SymbolicMatrix, config: StorageConfig, desired: int) -> AffinePlan:
    """Affine plan of the lifted scheme for ``desired`` (before sampling)."""
    _validate(S, config, desired)
    M, T, d = config.M, config.T, desired
    plan = AffinePlan(config)
    for rep in range(repetition_factor(config)):
        Sr = shift_left(S, rep)
        slot = {}
        for pos in Sr.positions():
            k = Sr[pos]
            for sub in combinations(range(1, M + 1), k):
                slot[(pos, sub)] = plan.add_slot(pos.col, sub, (rep, pos.row),
                                                 position=tuple(pos), rep=rep)
        covered = set()
        for gi, g in enumerate(Sr.groups):
            for U in combinations([j for j in range(1, M + 1) if j != d], g.level):
                UD = tuple(sorted(U + (d,)))
                members = [slot[(m, U)] for m in g.members]
                gens = [slot[(x, UD)] for x in g.generated]
                fid = f"{rep}:{gi}:{','.join(map(str, U))}"
                slot_of = {plan.slots[s].server: s for s in members + gens}
                add_share_family(plan, slot_of, U, T, family_id=fid)
                plan.families[fid] = FamilyRecord(members, gens, Sr.r, True, U)
                for s in members:
                    plan.slots[s].meta.update(family=fid, role="member")
                for s in gens:
                    plan.slots[s].meta.update(family=fid, role="generated")
                covered.update(members + gens)
        for (pos, sub), s in slot.items():
            if d in sub:
                plan.add_term(s, plan.new_var(d, ("desired", s)))
                plan.slots[s].meta.setdefault("role", "desired")
            elif s not in covered:
                raise AssertionError(f"interference slot {pos}, {sub} has no family")
        missing = [s for (pos, sub), s in slot.items() if len(sub) >= 2 and d in sub and s not in covered]
        if missing:
            raise AssertionError(f"generated slots without lineage: {missing}")
    return plan


def build_schedule(
    S: SymbolicMatrix,
    config: StorageConfig,
    desired: int,
    rng=None,
    verify: bool = True,
) -> QuerySchedule:
    """Sample concrete queries and shuffle each server's slot order.

    With ``verify`` the desired functionals are checked to span the message
    and the draw repeated (at most MAX_REDRAWS times) otherwise.
    """
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    plan = schedule_plan(S, config, desired)
    servers, tags = plan.servers, plan.tags
    for _ in range(MAX_REDRAWS):
        _, queries = plan.sample(rng)
        if not verify or desired_rank(config, servers, tags, queries, desired) == config.L:
            break
    else:
        raise SingularMatrixError(
            f"desired functionals stayed dependent after {MAX_REDRAWS} draws; "
            f"F_{config.p} is too small for these parameters"
        )
    layout, meta = [], {}
    for s in range(1, config.N + 1):
        ids = plan.server_slots(s)
        ids = [ids[i] for i in rng.permutation(len(ids))]
        layout.append(ids)
        for k, i in enumerate(ids):
            m = plan.slots[i].meta
            meta[(s, k)] = SlotMeta(m["position"], plan.slots[i].tag, m["rep"],
                                    m.get("family"), m.get("role", "desired"))
    return QuerySchedule(config, desired, servers, tags, plan.families, queries,
                         layout, meta, None if seed is None else int(seed), plan)


def run(schedule: QuerySchedule, db: Database) -> Transcript:
    cfg = db.config
    if cfg.N != schedule.config.N or cfg.shard_len != schedule.queries.shape[1]:
        raise ValueError("schedule shape does not match the database")
    answers = []
    for s, ids in enumerate(schedule.layout, start=1):
        D = db.shard(s).data
        if ids:
            answers.append([int(v) for v in schedule.queries[ids] @ D % cfg.p])
        else:
            answers.append([])
    return Transcript(answers, sum(len(a) for a in answers))


def decode(transcript: Transcript, schedule: QuerySchedule, config: StorageConfig) -> Message:
    flat = np.zeros(schedule.query_count, dtype=np.int64)
    for ids, ans in zip(schedule.layout, transcript.answers):
        if len(ids) != len(ans):
            raise ValueError("transcript does not match the schedule layout")
        flat[ids] = ans
    sym = solve_desired(config, schedule.servers, schedule.tags, schedule.families,
                        schedule.queries, flat, schedule.desired)
    return Message(sym, schedule.desired)


def retrieve(db: Database, S: SymbolicMatrix, desired: int, rng=None) -> tuple[Message, Fraction]:
    schedule = build_schedule(S, db.config, desired, rng)
    transcript = run(schedule, db)
    msg = decode(transcript, schedule, db.config)
    return msg, Fraction(db.config.L, transcript.download_count)


def lifted_config(N: int, K: int, T: int, M: int, field=None, eval_points=None) -> StorageConfig:
    kw = {} if field is None else {"field": field}
    return StorageConfig(N, K, T, M, message_length(N, K, M), eval_points=eval_points, **kw)


def lifted_matrix(config: StorageConfig) -> SymbolicMatrix:
    return symbolic_matrix(config.N, config.K + config.T - 1, config.M)


# -- JSON replay ---------------------------------------------------------

def schedule_to_dict(schedule: QuerySchedule) -> dict:
    where = {}
    for s, ids in enumerate(schedule.layout, start=1):
        for k, i in enumerate(ids):
            where[i] = [s, k]
    return {
        "config": schedule.config.to_dict(),
        "desired": schedule.desired,
        "seed": schedule.seed,
        "servers": [
            {
                "server": s,
                "queries": [[int(x) for x in schedule.queries[i]] for i in ids],
                "slots": [
                    {
                        "tag": list(m.tag),
                        "rep": m.rep,
                        "position": list(m.position),
                        "family": m.family,
                        "role": m.role,
                    }
                    for m in (schedule.slot_meta[(s, k)] for k in range(len(ids)))
                ],
            }
            for s, ids in enumerate(schedule.layout, start=1)
        ],
        "families": {
            fid: {
                "members": [where[i] for i in f.members],
                "generated": [where[i] for i in f.generated],
                "degree_bound": f.degree_bound,
                "support": list(f.support),
            }
            for fid, f in schedule.families.items()
        },
    }


def schedule_from_dict(d: dict) -> QuerySchedule:
    config = StorageConfig.from_dict(d["config"])
    servers, tags, rows, layout, meta, index = [], [], [], [], {}, {}
    for entry in d["servers"]:
        s = entry["server"]
        ids = []
        for k, (q, m) in enumerate(zip(entry["queries"], entry["slots"])):
            i = len(servers)
            index[(s, k)] = i
            servers.append(s)
            tags.append(tuple(m["tag"]))
            rows.append(q)
            ids.append(i)
            meta[(s, k)] = SlotMeta(tuple(m["position"]), tuple(m["tag"]), m["rep"],
                                    m["family"], m["role"])
        layout.append(ids)
    families = {
        fid: FamilyRecord([index[tuple(x)] for x in f["members"]],
                          [index[tuple(x)] for x in f["generated"]],
                          f["degree_bound"], True, tuple(f["support"]))
        for fid, f in d["families"].items()
    }
    queries = np.array(rows, dtype=np.int64).reshape(len(rows), config.shard_len)
    return QuerySchedule(config, d["desired"], servers, tags, families, queries,
                         layout, meta, d.get("seed"))


def transcript_to_dict(t: Transcript) -> dict:
    return {"answers": t.answers, "download_count": t.download_count}


def transcript_from_dict(d: dict) -> Transcript:
    return Transcript([list(a) for a in d["answers"]], d["download_count"])


def dump_schedule(schedule: QuerySchedule) -> str:
    return json.dumps(schedule_to_dict(schedule))


def load_schedule(text: str) -> QuerySchedule:
    return schedule_from_dict(json.loads(text))
