"""Symbolic matrices and the lifting operation.

An entry k in column c of S_M stands for C(M, k) k-queries sent to server
c, one per k-subset of messages (0 is an empty slot).  Lifting stacks r
left-shifted copies of S_M and appends one row per entry of value M; row i
of the appended block holds M+1 outside the columns of the i-th tau-chain.

Besides the bare grid we keep lineage: a Group records which r entries of
level k generate which N-r entries of level k+1.  Groups of S_M are carried
into each shifted copy by the same row offset and column rotation that the
copy applies to positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import NamedTuple, Union


class Position(NamedTuple):
    row: int  # 1-based
    col: int  # 1-based


@dataclass(frozen=True)
class Group:
    level: int
    members: tuple  # r Positions: b, tau(b), ..., tau^(r-1)(b)
    generated: tuple  # N-r Positions at level+1

    def moved(self, row_offset: int, shift: int, N: int) -> "Group":
        mv = lambda pos: _move(pos, row_offset, shift, N)  # noqa: E731
        return Group(self.level, tuple(map(mv, self.members)), tuple(map(mv, self.generated)))


@dataclass(frozen=True)
class SymbolicMatrix:
    entries: tuple  # rows of N ints
    M: int
    N: int
    r: int
    groups: tuple = ()

    @property
    def rows(self) -> int:
        return len(self.entries)

    def __getitem__(self, pos) -> int:
        i, j = pos
        return self.entries[i - 1][j - 1]

    def positions(self, value: int | None = None) -> list:
        """Nonzero positions in lexicographic order (optionally of one value)."""
        return [
            Position(i, j)
            for i, row in enumerate(self.entries, start=1)
            for j, v in enumerate(row, start=1)
            if v and (value is None or v == value)
        ]


def _move(pos: Position, row_offset: int, shift: int, N: int) -> Position:
    return Position(pos.row + row_offset, (pos.col - 1 - shift) % N + 1)


def _check(N: int, r) -> None:
    if not 1 <= r < N:
        raise ValueError(f"need 1 <= r < N, got r={r}, N={N}")


def initial_matrix(N: int, r: int) -> SymbolicMatrix:
    """S_2: r ones followed by N-r twos, with the level-1 group."""
    _check(N, r)
    row = (1,) * r + (2,) * (N - r)
    group = Group(1, tuple(Position(1, c) for c in range(1, r + 1)),
                  tuple(Position(1, c) for c in range(r + 1, N + 1)))
    return SymbolicMatrix((row,), 2, N, r, (group,))


def shift_left(S: SymbolicMatrix, times: int = 1) -> SymbolicMatrix:
    """sigma: column j+1 moves to column j, column 1 wraps to column N."""
    N = S.N
    t = times % N
    entries = tuple(row[t:] + row[:t] for row in S.entries)
    groups = tuple(g.moved(0, t, N) for g in S.groups)
    return SymbolicMatrix(entries, S.M, N, S.r, groups)


def tau(pos: Position, base_rows: int, N: int) -> Position:
    return _move(Position(*pos), base_rows, 1, N)


def lift(S: SymbolicMatrix) -> SymbolicMatrix:
    N, r, M, R = S.N, S.r, S.M, S.rows
    entries = []
    groups = []
    for t in range(r):
        shifted = shift_left(S, t)
        entries.extend(shifted.entries)
        groups.extend(g.moved(t * R, 0, N) for g in shifted.groups)
    for i, b in enumerate(S.positions(M), start=1):
        chain = [b]
        for _ in range(r - 1):
            chain.append(tau(chain[-1], R, N))
        cols = {pos.col for pos in chain}
        a_row = r * R + i
        row = tuple(0 if c in cols else M + 1 for c in range(1, N + 1))
        entries.append(row)
        gen = tuple(Position(a_row, c) for c in range(1, N + 1) if c not in cols)
        groups.append(Group(M, tuple(chain), gen))
    return SymbolicMatrix(tuple(entries), M + 1, N, r, tuple(groups))


def symbolic_matrix(N: int, r: int, M: int) -> SymbolicMatrix:
    """S_M for M >= 1.  S_1 is a single 1-entry in column 1 (no groups)."""
    _check(N, r)
    if M < 1:
        raise ValueError(f"need M >= 1, got {M}")
    if M == 1:
        return SymbolicMatrix(((1,) + (0,) * (N - 1),), 1, N, r, ())
    S = initial_matrix(N, r)
    while S.M < M:
        S = lift(S)
    return S


def count_entries(k: int, S: SymbolicMatrix) -> int:
    if not 1 <= k <= S.M:
        raise ValueError(f"k={k} outside 1..{S.M}")
    return sum(row.count(k) for row in S.entries)


def entry_count_formula(N: int, r: int, M: int, k: int) -> int:
    return (N - r) ** (k - 1) * r ** (M - k)


def lifted_rate(N: int, r: Union[int, Fraction], M: int) -> Fraction:
    """(N - r) N^(M-1) / (N^M - r^M); r may be rational (formula-only use)."""
    _check(N, r)
    if M < 1:
        raise ValueError(f"need M >= 1, got {M}")
    r = Fraction(r)
    return (N - r) * Fraction(N) ** (M - 1) / (Fraction(N) ** M - r ** M)


def query_counts(N: int, r: int, M: int) -> tuple[int, int]:
    """(total queries, queries touching the desired message) of S_M."""
    _check(N, r)
    counts = [entry_count_formula(N, r, M, k) for k in range(1, M + 1)]
    total = sum(c * comb(M, k) for k, c in enumerate(counts, start=1))
    desired = sum(c * comb(M - 1, k - 1) for k, c in enumerate(counts, start=1))
    return total, desired


def render_text(S: SymbolicMatrix) -> str:
    """Aligned grid with zeros left blank, one line per row."""
    width = max(len(str(v)) for row in S.entries for v in row)
    lines = []
    for row in S.entries:
        cells = [str(v).rjust(width) if v else " " * width for v in row]
        lines.append(" ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def to_dict(S: SymbolicMatrix) -> dict:
    return {
        "N": S.N,
        "r": S.r,
        "M": S.M,
        "entries": [list(row) for row in S.entries],
        "groups": [
            {
                "level": g.level,
                "members": [list(p) for p in g.members],
                "generated": [list(p) for p in g.generated],
            }
            for g in S.groups
        ],
    }
