"""Reed-Solomon coded storage of M messages across N servers.

Message j is cut into L/K stripes of K symbols.  Each stripe is read as the
coefficient vector of a polynomial of degree < K, and server i stores that
polynomial evaluated at its point.  A shard is laid out message-major, then
stripe-major, so the block for message j is ``data[j*S:(j+1)*S]`` with
``S = L/K``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import gf
from .gf import FieldSpec, Point
from .linalg import SingularMatrixError, solve_mod


@dataclass(frozen=True)
class StorageConfig:
    N: int
    K: int
    T: int
    M: int
    L: int
    field: FieldSpec = field(default_factory=FieldSpec)
    eval_points: Optional[tuple] = None

    def __post_init__(self):
        N, K, T, M, L = self.N, self.K, self.T, self.M, self.L
        if not 1 <= K < N:
            raise ValueError(f"need 1 <= K < N, got K={K}, N={N}")
        if not 1 <= T <= N - K:
            raise ValueError(f"need 1 <= T <= N-K, got T={T} (N={N}, K={K})")
        if M < 1:
            raise ValueError(f"need M >= 1, got {M}")
        if L < 1 or L % K:
            raise ValueError(f"K={K} must divide the message length L={L}")
        p = self.field.p
        if self.eval_points is None:
            if N >= p:
                raise ValueError(f"default points 1..{N} collide in F_{p}; pass eval_points")
            pts = tuple((1, i) for i in range(1, N + 1))
        else:
            if len(self.eval_points) != N:
                raise ValueError(f"need {N} evaluation points, got {len(self.eval_points)}")
            pts = tuple(gf.as_point(p, x) for x in self.eval_points)
        if not gf.points_distinct(list(pts)):
            raise ValueError("evaluation points must be pairwise distinct")
        object.__setattr__(self, "eval_points", pts)

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def stripes(self) -> int:
        return self.L // self.K

    @property
    def shard_len(self) -> int:
        return self.M * self.stripes

    def point(self, server: int) -> Point:
        return self.eval_points[server - 1]

    def block(self, message: int) -> slice:
        """Coordinates of the subspace V_message inside a query or shard."""
        S = self.stripes
        return slice((message - 1) * S, message * S)

    def replace(self, **changes) -> "StorageConfig":
        kw = dict(N=self.N, K=self.K, T=self.T, M=self.M, L=self.L,
                  field=self.field, eval_points=self.eval_points)
        kw.update(changes)
        return StorageConfig(**kw)

    def to_dict(self) -> dict:
        return {
            "N": self.N, "K": self.K, "T": self.T, "M": self.M, "L": self.L,
            "p": self.p,
            "eval_points": [list(pt) for pt in self.eval_points],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StorageConfig":
        return cls(N=d["N"], K=d["K"], T=d["T"], M=d["M"], L=d["L"],
                   field=FieldSpec(d["p"]),
                   eval_points=tuple(tuple(pt) for pt in d["eval_points"]))


@dataclass(frozen=True, eq=False)
class Message:
    symbols: np.ndarray
    index: int


@dataclass(frozen=True, eq=False)
class ServerShard:
    server_id: int
    data: np.ndarray


@dataclass(frozen=True, eq=False)
class Database:
    config: StorageConfig
    shards: tuple
    messages: tuple  # plaintext kept for test oracles only

    def shard(self, server: int) -> ServerShard:
        return self.shards[server - 1]


def random_messages(config: StorageConfig, rng: np.random.Generator) -> list[Message]:
    return [
        Message(gf.uniform(config.p, rng, config.L), j)
        for j in range(1, config.M + 1)
    ]


def rs_encode(messages: Sequence[Message], config: StorageConfig) -> Database:
    if len(messages) != config.M:
        raise ValueError(f"expected {config.M} messages, got {len(messages)}")
    p, K, S = config.p, config.K, config.stripes
    stripes = []
    for j, msg in enumerate(messages, start=1):
        if msg.index != j:
            raise ValueError(f"message at position {j} carries index {msg.index}")
        sym = np.asarray(msg.symbols, dtype=np.int64)
        if sym.shape != (config.L,):
            raise ValueError(f"message {j} has length {sym.size}, expected {config.L}")
        stripes.append(sym.reshape(S, K) % p)
    coeffs = np.concatenate(stripes)  # (M*S, K)
    G = gf.vandermonde(p, list(config.eval_points), K)  # (N, K)
    data = (coeffs @ G.T) % p  # (M*S, N)
    shards = tuple(ServerShard(i + 1, data[:, i].copy()) for i in range(config.N))
    msgs = tuple(Message(np.asarray(m.symbols, dtype=np.int64) % p, m.index) for m in messages)
    return Database(config, shards, msgs)


def rs_decode_stripe(values: Sequence[tuple[int, int]], config: StorageConfig) -> list[int]:
    """Recover one stripe's K symbols from K (server_id, stored value) pairs."""
    if len(values) != config.K:
        raise ValueError(f"need exactly K={config.K} values, got {len(values)}")
    servers = [s for s, _ in values]
    if len(set(servers)) != len(servers):
        raise ValueError(f"repeated server id in {servers}")
    V = gf.vandermonde(config.p, [config.point(s) for s in servers], config.K)
    y = np.array([int(v) for _, v in values], dtype=np.int64)
    try:
        return [int(c) for c in solve_mod(V, y, config.p)]
    except SingularMatrixError as exc:  # pragma: no cover - distinct points make V invertible
        raise ValueError("stripe system is singular") from exc


def answer(shard: ServerShard, q: np.ndarray, p: int) -> int:
    """The server's reply ``<D_i, q>``."""
    q = np.asarray(q, dtype=np.int64)
    if q.shape != shard.data.shape:
        raise ValueError(f"query length {q.size} != shard length {shard.data.size}")
    return int((q % p) @ shard.data % p)


def response_functional(config: StorageConfig, server: int, block: np.ndarray) -> np.ndarray:
    """Row over one message's L symbols equal to ``<shard block, block>``.

    ``block`` holds the query's coordinates on that message's subspace.
    """
    row = gf.monomials(config.p, config.point(server), config.K)
    return np.outer(np.asarray(block, dtype=np.int64), row).reshape(-1) % config.p


def database_to_dict(db: Database) -> dict:
    return {
        "config": db.config.to_dict(),
        "messages": [[int(x) for x in m.symbols] for m in db.messages],
        "shards": [
            {"server_id": s.server_id, "data": [int(x) for x in s.data]}
            for s in db.shards
        ],
    }


def database_from_dict(d: dict) -> Database:
    config = StorageConfig.from_dict(d["config"])
    messages = [Message(np.array(m, dtype=np.int64), j) for j, m in enumerate(d["messages"], 1)]
    db = rs_encode(messages, config)
    for stored, shard in zip(d["shards"], db.shards):
        if stored["server_id"] != shard.server_id or list(shard.data) != stored["data"]:
            raise ValueError(f"shard {stored['server_id']} does not match its messages")
    return db


def dump_database(db: Database) -> str:
    return json.dumps(database_to_dict(db), indent=1)


def load_database(text: str) -> Database:
    return database_from_dict(json.loads(text))
