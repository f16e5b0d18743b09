"""Affine description of a query schedule.

Every query built in this package is an affine function of independent
uniform random variables.  A variable ranges over one message subspace V_j
(one independent field element per stripe coordinate), and a slot's query
restricted to V_j is ``sum coeff * var + offset``.  The same scalar
coefficients apply to every stripe coordinate, which is what lets the
privacy audit work on one small matrix per message instead of the full
query space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf
from .storage import StorageConfig


@dataclass
class Slot:
    server: int
    tag: tuple  # sorted message indices the query is supported on
    order: tuple = ()  # tie-break inside (server, tag), e.g. the symbolic row
    terms: list = field(default_factory=list)  # (var id, scalar coefficient)
    offsets: dict = field(default_factory=dict)  # message -> (S,) constant part
    meta: dict = field(default_factory=dict)

    def sort_key(self) -> tuple:
        return (self.tag, self.order)


@dataclass
class FamilyRecord:
    """Slots whose responses obey one polynomial dependency.

    ``members`` and ``generated`` are slot ids; the responses at generated
    slots follow from the member responses by interpolation with
    ``degree_bound`` = r.  Interference families are cancelled while
    decoding; a desired-message family is not.
    """

    members: list
    generated: list
    degree_bound: int
    interference: bool = True
    support: tuple = ()


class AffinePlan:
    def __init__(self, config: StorageConfig):
        self.config = config
        self.var_message: list[int] = []
        self.var_role: list[tuple] = []
        self.slots: list[Slot] = []
        self.families: dict = {}
        self._compiled = None

    @property
    def n_vars(self) -> int:
        return len(self.var_message)

    def new_var(self, message: int, role: tuple = ()) -> int:
        if not 1 <= message <= self.config.M:
            raise ValueError(f"message {message} out of range")
        self.var_message.append(message)
        self.var_role.append(tuple(role))
        return len(self.var_message) - 1

    def copy(self) -> "AffinePlan":
        out = AffinePlan(self.config)
        out.var_message = list(self.var_message)
        out.var_role = list(self.var_role)
        out.slots = [
            Slot(s.server, s.tag, s.order, list(s.terms),
                 {j: v.copy() for j, v in s.offsets.items()}, dict(s.meta))
            for s in self.slots
        ]
        out.families = {k: FamilyRecord(list(f.members), list(f.generated), f.degree_bound,
                                        f.interference, f.support)
                        for k, f in self.families.items()}
        return out

    @property
    def servers(self) -> list[int]:
        return [s.server for s in self.slots]

    @property
    def tags(self) -> list[tuple]:
        return [s.tag for s in self.slots]

    def add_slot(self, server: int, tag, order=(), **meta) -> int:
        self._compiled = None
        if not 1 <= server <= self.config.N:
            raise ValueError(f"server {server} out of range")
        self.slots.append(Slot(server, tuple(sorted(tag)), tuple(order), meta=dict(meta)))
        return len(self.slots) - 1

    def add_term(self, slot: int, var: int, coeff: int = 1) -> None:
        self._compiled = None
        s = self.slots[slot]
        if self.var_message[var] not in s.tag:
            raise ValueError(
                f"variable on message {self.var_message[var]} outside slot tag {s.tag}"
            )
        s.terms.append((var, int(coeff) % self.config.p))

    def add_offset(self, slot: int, message: int, vector: np.ndarray) -> None:
        self._compiled = None
        s = self.slots[slot]
        prev = s.offsets.get(message, np.zeros(self.config.stripes, dtype=np.int64))
        s.offsets[message] = (prev + np.asarray(vector, dtype=np.int64)) % self.config.p

    def server_slots(self, server: int) -> list[int]:
        """Slot ids held by ``server`` in canonical (tag, order) order."""
        ids = [i for i, s in enumerate(self.slots) if s.server == server]
        return sorted(ids, key=lambda i: self.slots[i].sort_key())

    def compile(self) -> tuple:
        """Flat term arrays and the dense offset tensor used by ``evaluate``.

        Call again after editing the plan.
        """
        cfg = self.config
        base = np.zeros((len(self.slots), cfg.M, cfg.stripes), dtype=np.int64)
        rows, msgs, vars_, coeffs = [], [], [], []
        for i, s in enumerate(self.slots):
            for var, c in s.terms:
                rows.append(i)
                msgs.append(self.var_message[var] - 1)
                vars_.append(var)
                coeffs.append(c)
            for j, off in s.offsets.items():
                base[i, j - 1] = (base[i, j - 1] + off) % cfg.p
        self._compiled = (
            np.array(rows, dtype=np.intp), np.array(msgs, dtype=np.intp),
            np.array(vars_, dtype=np.intp), np.array(coeffs, dtype=np.int64), base,
        )
        return self._compiled

    def evaluate(self, values: np.ndarray) -> np.ndarray:
        """Queries (one row per slot) for given variable values ``(n_vars, S)``."""
        cfg = self.config
        rows, msgs, vars_, coeffs, base = self._compiled or self.compile()
        Q = base.copy()
        if rows.size:
            contrib = (coeffs[:, None] * values[vars_]) % cfg.p
            np.add.at(Q, (rows, msgs), contrib)
        return (Q % cfg.p).reshape(len(self.slots), cfg.M * cfg.stripes)

    def sample(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Draw all variables uniformly; return ``(values, queries)``."""
        values = gf.uniform(self.config.p, rng, (self.n_vars, self.config.stripes))
        return values, self.evaluate(values)

    def check_supports(self, queries: np.ndarray) -> bool:
        """Every query is zero outside the subspaces named by its tag."""
        cfg = self.config
        for s, q in zip(self.slots, queries):
            blocks = q.reshape(cfg.M, cfg.stripes)
            outside = [j for j in range(1, cfg.M + 1) if j not in s.tag]
            if any(blocks[j - 1].any() for j in outside):
                return False
        return True
