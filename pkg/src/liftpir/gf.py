"""Prime-field arithmetic, polynomial evaluation and interpolation weights.

Scalars are small immutable wrappers used at API boundaries; bulk work
(shards, queries, linear systems) runs on ``np.int64`` arrays reduced mod p.

Evaluation points are homogeneous pairs ``(u, v)`` on the projective line.
An affine point ``x`` is ``(1, x)`` and ``(0, 1)`` is the point at infinity,
which evaluates a polynomial to its leading coefficient.  A polynomial
``f_0 + f_1 x + ... + f_{D-1} x^{D-1}`` evaluates at ``(u, v)`` to
``sum_t f_t u^(D-1-t) v^t``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .linalg import solve_mod

MAX_PRIME = 2**31  # keeps products of two residues inside int64

Point = tuple[int, int]
INFINITY: Point = (0, 1)


class FieldMismatchError(ValueError):
    """Operands belong to different prime fields."""


def _is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; bases 2, 7, 61 suffice below 2**32."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 61):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d, s = d // 2, s + 1
    for a in (2, 7, 61):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The prime field F_p."""

    p: int = 65537

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or isinstance(self.p, bool):
            raise TypeError(f"modulus must be an integer, got {self.p!r}")
        if self.p >= MAX_PRIME:
            raise ValueError(f"modulus must be below 2**31, got {self.p}")
        if self.p < 3 or not _is_prime(int(self.p)):
            raise ValueError(f"modulus must be a prime >= 3, got {self.p}")

    def __call__(self, value: int) -> "Scalar":
        return Scalar(int(value) % self.p, self)

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in F_p")
        return pow(a, -1, self.p)


@dataclass(frozen=True)
class Scalar:
    value: int
    field: FieldSpec

    def __post_init__(self):
        if not 0 <= self.value < self.field.p:
            raise ValueError(f"{self.value} is not reduced mod {self.field.p}")

    def _other(self, other: Union["Scalar", int]) -> int:
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise FieldMismatchError(
                    f"F_{self.field.p} and F_{other.field.p} operands"
                )
            return other.value
        if isinstance(other, (int, np.integer)):
            return int(other) % self.field.p
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        return self.field(self.value + b)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        return self.field(self.value - b)

    def __rsub__(self, other):
        b = self._other(other)
        return self.field(b - self.value)

    def __mul__(self, other):
        b = self._other(other)
        return self.field(self.value * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._other(other)
        return self.field(self.value * self.field.inv(b))

    def __rtruediv__(self, other):
        b = self._other(other)
        return self.field(b * self.field.inv(self.value))

    def __neg__(self):
        return self.field(-self.value)

    def __pow__(self, e: int):
        if e < 0:
            return self.field(pow(self.field.inv(self.value), -e, self.field.p))
        return self.field(pow(self.value, e, self.field.p))

    def inverse(self) -> "Scalar":
        return self.field(self.field.inv(self.value))

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"Scalar({self.value} mod {self.field.p})"


def field_arith(a: Scalar, b: Scalar, op: str) -> Scalar:
    """Apply ``op`` in {'add', 'sub', 'mul', 'div'} to two scalars of one field."""
    if not isinstance(a, Scalar) or not isinstance(b, Scalar):
        raise TypeError("field_arith takes two Scalars")
    if a.field != b.field:
        raise FieldMismatchError(f"F_{a.field.p} and F_{b.field.p} operands")
    ops = {
        "add": a.__add__,
        "sub": a.__sub__,
        "mul": a.__mul__,
        "div": a.__truediv__,
    }
    if op not in ops:
        raise ValueError(f"unknown operation {op!r}")
    return ops[op](b)


def _common_field(values: Sequence[Scalar]) -> FieldSpec:
    fields = {v.field for v in values}
    if len(fields) != 1:
        raise FieldMismatchError("scalars come from different fields")
    return fields.pop()


def poly_eval(coeffs: Sequence[Scalar], x: Scalar) -> Scalar:
    """Evaluate ``sum coeffs[i] * x**i`` by Horner's rule."""
    if len(coeffs) == 0:
        raise ValueError("polynomial needs at least one coefficient")
    field = _common_field([*coeffs, x])
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x.value + c.value) % field.p
    return field(acc)


def as_point(p: int, x: Union[int, Scalar, Sequence[int]]) -> Point:
    """Normalise an affine value or a homogeneous pair to a projective point."""
    if isinstance(x, Scalar):
        if x.field.p != p:
            raise FieldMismatchError(f"point from F_{x.field.p}, expected F_{p}")
        return (1, x.value)
    if isinstance(x, (int, np.integer)):
        return (1, int(x) % p)
    u, v = (int(c) % p for c in x)
    if u == 0 and v == 0:
        raise ValueError("(0, 0) is not a projective point")
    if u != 0:
        inv = pow(u, -1, p)
        return (1, v * inv % p)
    return INFINITY


def points_distinct(points: Sequence[Point]) -> bool:
    return len(set(points)) == len(points)


def monomials(p: int, point: Point, degree_bound: int) -> np.ndarray:
    """Row ``(u^(D-1-t) v^t)_t`` so that ``row @ coeffs`` evaluates at ``point``."""
    u, v = point
    return np.array(
        [pow(u, degree_bound - 1 - t, p) * pow(v, t, p) % p for t in range(degree_bound)],
        dtype=np.int64,
    )


def vandermonde(p: int, points: Sequence[Point], degree_bound: int) -> np.ndarray:
    if not points:
        return np.zeros((0, degree_bound), dtype=np.int64)
    return np.stack([monomials(p, pt, degree_bound) for pt in points])


def evaluate(p: int, coeffs: np.ndarray, point: Point) -> np.ndarray:
    """Evaluate polynomials stored along axis 0 of ``coeffs`` at one point."""
    row = monomials(p, point, coeffs.shape[0])
    return np.tensordot(row, coeffs, axes=1) % p


def interpolation_weights(
    p: int, points: Sequence[Point], target: Point, degree_bound: int
) -> np.ndarray:
    """Weights ``w`` with ``F(target) = sum_j w_j F(points[j])`` for deg F < degree_bound."""
    if len(points) != degree_bound:
        raise ValueError(
            f"need exactly {degree_bound} points, got {len(points)}"
        )
    if not points_distinct(list(points)):
        raise ValueError("interpolation points must be pairwise distinct")
    if target in points:
        raise ValueError("target point coincides with an interpolation point")
    V = vandermonde(p, points, degree_bound)
    # sum_j w_j V[j] = m(target)  <=>  V^T w = m(target)
    return solve_mod(V.T.copy(), monomials(p, target, degree_bound), p)


def dependency_coeffs(
    group_points: Sequence[Union[Scalar, Sequence[int]]],
    target_point: Union[Scalar, Sequence[int]],
    degree_bound: int,
    field: FieldSpec | None = None,
) -> list[Scalar]:
    """Coefficients expressing a polynomial's value at ``target_point``
    through its values at ``group_points``.

    Points are Scalars (affine) or homogeneous pairs; pass ``field`` when
    only pairs are given.
    """
    if field is None:
        scalars = [x for x in (*group_points, target_point) if isinstance(x, Scalar)]
        if not scalars:
            raise ValueError("field is required when no Scalar points are given")
        field = _common_field(scalars)
    p = field.p
    pts = [as_point(p, x) for x in group_points]
    target = as_point(p, target_point)
    return [field(w) for w in interpolation_weights(p, pts, target, degree_bound)]


def interpolate(xs: Sequence[Scalar], ys: Sequence[Scalar]) -> list[Scalar]:
    """Coefficients of the unique polynomial of degree < len(xs) through the pairs."""
    if len(xs) != len(ys) or not xs:
        raise ValueError("need equally many, nonzero, points and values")
    field = _common_field([*xs, *ys])
    pts = [as_point(field.p, x) for x in xs]
    if not points_distinct(pts):
        raise ValueError("interpolation points must be pairwise distinct")
    V = vandermonde(field.p, pts, len(xs))
    coeffs = solve_mod(V, np.array([y.value for y in ys], dtype=np.int64), field.p)
    return [field(c) for c in coeffs]


def uniform(p: int, rng: np.random.Generator, shape) -> np.ndarray:
    return rng.integers(0, p, size=shape, dtype=np.int64)


def sample_uniform(field: FieldSpec, rng: np.random.Generator, count: int) -> list[Scalar]:
    """``count`` independent uniform elements of the field drawn from ``rng``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    return [field(int(v)) for v in uniform(field.p, rng, count)]
