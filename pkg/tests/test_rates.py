import csv
import io
from fractions import Fraction

from hypothesis import given
from hypothesis import strategies as st

from liftpir.lift import lifted_rate
from liftpir.rates import (
    COLUMNS, capacity, plus_variant_rate, rational_codim_rate, equality_sweep, rate_grid, rate_row, to_csv,
)


def test_three_message_row():
    row = rate_row(4, 2, 2, 3)
    assert row.r == 3
    assert row.one_shot == Fraction(1, 4)
    assert row.refined == Fraction(4, 7)
    assert row.lifted_eq5 == Fraction(16, 37)
    assert row.lifted_eq4_corrected == Fraction(16, 37)
    assert row.equality_flag
    # (4+2) * 8^2 / (8^3 - 6^3)
    assert row.eq4_literal == Fraction(48, 37)


def test_secret_sharing_row_hits_capacity():
    row = rate_row(4, 1, 2, 3)
    assert row.lifted_eq5 == Fraction(4, 7) == row.capacity_k1


@given(N=st.integers(2, 8), data=st.data())
def test_capacity_closed_form(N, data):
    T = data.draw(st.integers(1, N - 1))
    M = data.draw(st.integers(1, 6))
    assert capacity(N, T, M) == Fraction((N - T) * N ** (M - 1), N**M - T**M)
    assert lifted_rate(N, T, M) == capacity(N, T, M)


def test_rational_codim_rate_closed_form():
    for N, K, T, M in [(5, 2, 1, 3), (7, 3, 2, 4), (6, 4, 2, 2)]:
        NK = N * K
        assert rational_codim_rate(N, K, T, M) == Fraction((N - T) * NK ** (M - 1), NK**M - (NK - N + T) ** M)


def test_equality_sweep():
    sweep = equality_sweep(8)
    assert sweep and all(r["le"] for r in sweep)
    assert all(r["equal"] == r["condition"] for r in sweep)


def test_plus_variant_differs_from_rational_rate():
    assert all(plus_variant_rate(N, 1, T, 3) != rational_codim_rate(N, 1, T, 3) for N in range(2, 8) for T in range(1, N))


def test_non_integer_codimension_is_annotated():
    assert "not an integer" in rate_row(5, 2, 2, 3).note
    assert rate_row(4, 2, 2, 3).note == ""


def test_grid_skips_invalid_points_and_keeps_order():
    rows = rate_grid([3, 4], [1, 2, 3], [1, 2], [2])
    assert [(r.N, r.K, r.T) for r in rows] == [(3, 1, 1), (3, 1, 2), (3, 2, 1),
                                               (4, 1, 1), (4, 1, 2), (4, 2, 1), (4, 2, 2), (4, 3, 1)]


def test_csv_output():
    text = to_csv(rate_grid([4], [2], [2], [3]))
    lines = text.splitlines()
    assert lines[-1].startswith("# ")
    rows = list(csv.reader(io.StringIO("\n".join(lines[:-1]))))
    assert tuple(rows[0]) == COLUMNS
    assert rows[1][:5] == ["4", "2", "2", "3", "3"]
    assert rows[1][COLUMNS.index("lifted_eq5")] == "16/37"
    dec = to_csv(rate_grid([4], [2], [2], [3]), decimal=True, footnote=False).splitlines()
    assert dec[1].split(",")[COLUMNS.index("lifted_eq5")] == "0.432432"
    assert to_csv(rate_grid(range(2, 7), [1, 2], [1, 2], [2, 3])) == to_csv(rate_grid(range(2, 7), [1, 2], [1, 2], [2, 3]))
