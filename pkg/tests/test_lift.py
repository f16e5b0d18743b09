import json
from fractions import Fraction
from math import comb
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from liftpir.lift import (
    Position, count_entries, entry_count_formula, initial_matrix, lift, lifted_rate,
    query_counts, render_text, shift_left, symbolic_matrix, tau, to_dict,
)

GOLDEN = Path(__file__).parent / "golden"

nr = st.integers(2, 6).flatmap(lambda N: st.tuples(st.just(N), st.integers(1, N - 1)))


@pytest.mark.parametrize("M,name", [(3, "S3_4_3.txt"), (4, "S4_4_3.txt")])
def test_rendering_matches_golden(M, name):
    assert render_text(symbolic_matrix(4, 3, M)) == (GOLDEN / name).read_text()


def test_initial_matrix_and_its_group():
    S = initial_matrix(5, 2)
    assert S.entries == ((1, 1, 2, 2, 2),)
    (g,) = S.groups
    assert g.members == (Position(1, 1), Position(1, 2))
    assert [p.col for p in g.generated] == [3, 4, 5]


def test_shift_left_wraps_the_first_column():
    S = shift_left(initial_matrix(4, 3))
    assert S.entries == ((1, 1, 2, 1),)
    assert S.groups[0].generated == (Position(1, 3),)


def test_tau_moves_down_and_left():
    assert tau(Position(1, 3), 4, 4) == Position(5, 2)
    assert tau(Position(2, 1), 4, 4) == Position(6, 4)


def test_single_message_matrix():
    S = symbolic_matrix(4, 2, 1)
    assert S.entries == ((1, 0, 0, 0),)
    assert lifted_rate(4, 2, 1) == 1


def test_guards():
    with pytest.raises(ValueError):
        symbolic_matrix(4, 4, 2)
    with pytest.raises(ValueError):
        symbolic_matrix(4, 2, 0)
    with pytest.raises(ValueError):
        count_entries(4, symbolic_matrix(4, 2, 3))


@given(nr, st.integers(2, 5))
def test_entry_counts_follow_the_closed_form(nr_, M):
    N, r = nr_
    S = symbolic_matrix(N, r, M)
    for k in range(1, M + 1):
        assert count_entries(k, S) == entry_count_formula(N, r, M, k)


@given(nr, st.integers(1, 5))
def test_query_totals(nr_, M):
    N, r = nr_
    total, desired = query_counts(N, r, M)
    assert total * (N - r) == N**M - r**M
    assert desired == N ** (M - 1)
    assert lifted_rate(N, r, M) == Fraction(desired, total)


@given(nr, st.integers(2, 5))
def test_lineage_partitions_columns(nr_, M):
    N, r = nr_
    S = symbolic_matrix(N, r, M)
    used = set()
    for g in S.groups:
        assert len(g.members) == r and len(g.generated) == N - r
        assert all(S[p] == g.level for p in g.members)
        assert all(S[p] == g.level + 1 for p in g.generated)
        cols = {p.col for p in g.members + g.generated}
        assert cols == set(range(1, N + 1))
        assert used.isdisjoint(g.members)
        used.update(g.members)
    # every entry below M lies in exactly one group
    assert used == {p for p in S.positions() if S[p] < M}


def test_rows_recursion():
    S = symbolic_matrix(4, 3, 3)
    assert lift(S).rows == 3 * S.rows + count_entries(3, S)


def test_lifted_rate_of_the_three_message_fixture():
    assert lifted_rate(4, 3, 3) == Fraction(16, 37)


def test_two_one_three_is_self_consistent():
    S = symbolic_matrix(2, 1, 3)
    assert render_text(S) == "1 2\n3\n"
    assert [count_entries(k, S) for k in (1, 2, 3)] == [1, 1, 1]
    total, _ = query_counts(2, 1, 3)
    assert total == sum(count_entries(k, S) * comb(3, k) for k in (1, 2, 3))


def test_rational_codimension_is_accepted():
    assert lifted_rate(4, Fraction(3), 3) == lifted_rate(4, 3, 3)


def test_to_dict_is_json_ready():
    d = json.loads(json.dumps(to_dict(symbolic_matrix(4, 3, 3))))
    assert d["entries"][3] == [3, 0, 0, 0]
    assert d["groups"][-1] == {"level": 2, "members": [[1, 4], [2, 3], [3, 2]], "generated": [[4, 1]]}
