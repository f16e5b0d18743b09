"""Closed-form rate table: one-shot, refined, lifted and capacity.

All values are exact Fractions.  Decimal output is for display only.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .lift import lifted_rate
from .oneshot import codimension, one_shot_rate
from .refine import refined_rate

COLUMNS = ("N", "K", "T", "M", "r", "one_shot", "refined", "lifted_eq5",
           "lifted_eq4_corrected", "capacity_k1", "equality_flag", "eq4_literal", "note")

VARIANT_FOOTNOTE = (
    "eq4_literal is the closed form with an (N+T) numerator; lifted_eq4_corrected applies "
    "the lifted-rate formula to r=(NK-N+T)/K, which yields (N-T) in its place"
)


def capacity(N: int, T: int, M: int) -> Fraction:
    """(1 + T/N + ... + (T/N)^(M-1))^-1."""
    q = Fraction(T, N)
    return 1 / sum(q ** i for i in range(M))


def rational_codim(N: int, K: int, T: int) -> Fraction:
    """(NK - N + T) / K, the co-dimension of the competing one-shot family."""
    return Fraction(N * K - N + T, K)


def rational_codim_rate(N: int, K: int, T: int, M: int) -> Fraction:
    return lifted_rate(N, rational_codim(N, K, T), M)


def plus_variant_rate(N: int, K: int, T: int, M: int) -> Fraction:
    """(N+T)(NK)^(M-1) / ((NK)^M - (NK-N+T)^M); reported only, not a valid rate."""
    NK = N * K
    return Fraction((N + T) * NK ** (M - 1), NK ** M - (NK - N + T) ** M)


def equality_expected(N: int, K: int, T: int, M: int) -> bool:
    """The two lifted rates agree iff K = 1 or N = K + T (M >= 2); always at M = 1."""
    return M == 1 or K == 1 or N == K + T


@dataclass(frozen=True)
class RateRow:
    N: int
    K: int
    T: int
    M: int
    r: int
    one_shot: Fraction
    refined: Fraction
    lifted_eq5: Fraction
    lifted_eq4_corrected: Fraction
    capacity_k1: Fraction
    equality_flag: bool
    eq4_literal: Fraction
    note: str = ""

    def cells(self, decimal: bool = False) -> list[str]:
        def fmt(x):
            if isinstance(x, bool):
                return str(x).lower()
            if isinstance(x, Fraction):
                return f"{float(x):.6g}" if decimal else str(x)
            return str(x)

        return [fmt(getattr(self, c)) for c in COLUMNS]


def rate_row(N: int, K: int, T: int, M: int) -> RateRow:
    r = codimension(N, K, T)
    notes = []
    try:
        codimension(N, K, T, "rational_formula")
    except ValueError:
        notes.append(f"(NK-N+T)/K={rational_codim(N, K, T)} not an integer; formula value only")
    base = lifted_rate(N, r, M)
    alt = rational_codim_rate(N, K, T, M)
    flag = alt == base
    if flag != equality_expected(N, K, T, M):
        notes.append("equality condition violated")
    return RateRow(N, K, T, M, r, one_shot_rate(N, r), refined_rate(N, r), base, alt,
                   capacity(N, T, M), flag, plus_variant_rate(N, K, T, M), "; ".join(notes))


def rate_grid(Ns: Iterable[int], Ks: Iterable[int], Ts: Iterable[int],
              Ms: Iterable[int]) -> list[RateRow]:
    """Rows for every valid (N, K, T, M), in grid order; invalid points are skipped."""
    Ks, Ts, Ms = list(Ks), list(Ts), list(Ms)
    return [
        rate_row(N, K, T, M)
        for N in Ns for K in Ks for T in Ts for M in Ms
        if 1 <= K < N and 1 <= T <= N - K and M >= 1
    ]


def to_csv(rows: list[RateRow], decimal: bool = False, footnote: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow(row.cells(decimal))
    if footnote:
        buf.write(f"# {VARIANT_FOOTNOTE}\n")
    return buf.getvalue()


def equality_sweep(max_N: int = 8, Ms: Optional[Iterable[int]] = None) -> list[dict]:
    """Compare the two lifted rates over all valid (N, K, T, M) with N <= max_N.

    Each record reports whether the rational co-dimension rate is at most
    the integer one, and whether equality occurs exactly under the condition.
    """
    Ms = list(range(2, 6) if Ms is None else Ms)
    out = []
    for N in range(2, max_N + 1):
        for K in range(1, N):
            for T in range(1, N - K + 1):
                for M in Ms:
                    a, b = rational_codim_rate(N, K, T, M), lifted_rate(N, K + T - 1, M)
                    out.append({
                        "N": N, "K": K, "T": T, "M": M,
                        "le": a <= b,
                        "equal": a == b,
                        "condition": K == 1 or N == K + T,
                    })
    return out
