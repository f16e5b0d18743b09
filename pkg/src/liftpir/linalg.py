"""Dense linear algebra over F_p on int64 arrays (p < 2**31)."""

from __future__ import annotations

import numpy as np


class SingularMatrixError(ArithmeticError):
    pass


def rref_mod(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of ``A`` mod p and its pivot columns."""
    R = np.array(A, dtype=np.int64) % p
    m, n = R.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.nonzero(R[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + nz[0]
        if piv != row:
            R[[row, piv]] = R[[piv, row]]
        R[row] = R[row] * pow(int(R[row, col]), -1, p) % p
        factors = R[:, col].copy()
        factors[row] = 0
        hit = np.nonzero(factors)[0]
        if hit.size:
            R[hit] = (R[hit] - np.outer(factors[hit], R[row])) % p
        pivots.append(col)
        row += 1
    return R, pivots


def rank_mod(A: np.ndarray, p: int) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    # eliminate along the shorter side
    if A.shape[0] > A.shape[1]:
        A = A.T
    return len(rref_mod(A, p)[1])


def solve_mod(A: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Solve the square system ``A x = b`` mod p; ``b`` may be a matrix."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    b = np.asarray(b, dtype=np.int64)
    vec = b.ndim == 1
    B = b.reshape(n, -1)
    R, pivots = rref_mod(np.hstack([A % p, B % p]), p)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise SingularMatrixError("system matrix is singular mod p")
    x = R[:n, n:]
    return x[:, 0] if vec else x


def _components(support: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Connected components of the bipartite row/column graph of ``support``."""
    m, n = support.shape
    parent = list(range(m + n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    rows, cols = np.nonzero(support)
    for r, c in zip(rows.tolist(), cols.tolist()):
        a, b = find(r), find(m + c)
        if a != b:
            parent[a] = b
    groups: dict[int, tuple[list[int], list[int]]] = {}
    for r in range(m):
        groups.setdefault(find(r), ([], []))[0].append(r)
    for c in range(n):
        groups.setdefault(find(m + c), ([], []))[1].append(c)
    return [
        (np.array(rs, dtype=np.intp), np.array(cs, dtype=np.intp))
        for rs, cs in groups.values()
        if rs and cs
    ]


def joint_ranks(blocks: list[np.ndarray], combos: list[tuple], p: int) -> list[int]:
    """Rank of ``hstack([blocks[i] for i in combo])`` for every combo.

    All blocks share one row set.  The row/column graph of the full stack is
    split into connected components; each requested concatenation is
    block-diagonal along that split, so its rank is the sum over components.
    """
    m = blocks[0].shape[0]
    widths = [b.shape[1] for b in blocks]
    if sum(widths) == 0 or m == 0:
        return [0] * len(combos)
    joint = np.hstack([np.asarray(b, dtype=np.int64).reshape(m, -1) % p for b in blocks])
    owner = np.repeat(np.arange(len(blocks)), widths)
    ranks = [0] * len(combos)
    for rows, cols in _components(joint != 0):
        for n, combo in enumerate(combos):
            sel = cols[np.isin(owner[cols], combo)]
            if sel.size:
                ranks[n] += rank_mod(joint[np.ix_(rows, sel)], p)
    return ranks
