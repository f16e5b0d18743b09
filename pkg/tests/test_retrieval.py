from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liftpir.gf import FieldSpec
from liftpir.lift import lifted_rate, query_counts, symbolic_matrix
from liftpir.retrieval import (
    build_schedule, decode, dump_schedule, lifted_config, lifted_matrix, load_schedule,
    message_length, repetition_factor, retrieve, run, schedule_plan, transcript_from_dict,
    transcript_to_dict,
)
from liftpir.storage import Message, StorageConfig, random_messages, rs_encode

GRID = [(N, K, T, M) for N in range(2, 6) for K in (1, 2) for T in (1, 2)
        for M in range(1, 5) if K + T <= N]


def setup(N, K, T, M, seed=0, p=65537):
    cfg = lifted_config(N, K, T, M, field=FieldSpec(p))
    db = rs_encode(random_messages(cfg, np.random.default_rng(seed)), cfg)
    return cfg, db, lifted_matrix(cfg)


def test_three_message_fixture(rng):
    cfg, db, S = setup(4, 2, 2, 3)
    assert cfg.L == 16
    for d in (1, 2, 3):
        schedule = build_schedule(S, cfg, d, rng)
        transcript = run(schedule, db)
        assert transcript.download_count == 37
        msg = decode(transcript, schedule, cfg)
        assert np.array_equal(msg.symbols, db.messages[d - 1].symbols)
        assert Fraction(cfg.L, transcript.download_count) == Fraction(16, 37)


def test_message_length_and_repetitions():
    assert message_length(4, 2, 3) == 16
    assert message_length(5, 2, 3) == 50
    assert message_length(3, 2, 1) == 2
    assert repetition_factor(lifted_config(5, 2, 2, 3)) == 2
    with pytest.raises(ValueError):
        repetition_factor(StorageConfig(4, 2, 2, 3, 6))


@settings(max_examples=25, deadline=None)
@given(params=st.sampled_from(GRID), d_seed=st.integers(0, 2**32 - 1))
def test_random_instances_decode_exactly(params, d_seed):
    N, K, T, M = params
    cfg, db, S = setup(N, K, T, M, seed=d_seed)
    rng = np.random.default_rng(d_seed)
    d = int(rng.integers(1, M + 1))
    msg, rate = retrieve(db, S, d, rng)
    assert np.array_equal(msg.symbols, db.messages[d - 1].symbols)
    assert rate == lifted_rate(N, K + T - 1, M)


@pytest.mark.parametrize("params", GRID)
def test_slot_counts_follow_the_matrix(params):
    N, K, T, M = params
    cfg = lifted_config(N, K, T, M)
    plan = schedule_plan(lifted_matrix(cfg), cfg, 1)
    total, desired = query_counts(N, K + T - 1, M)
    rho = repetition_factor(cfg)
    assert len(plan.slots) == rho * total
    assert sum(1 in s.tag for s in plan.slots) == rho * desired == cfg.L


def test_slots_hold_all_message_subsets():
    cfg = lifted_config(4, 2, 2, 3)
    plan = schedule_plan(lifted_matrix(cfg), cfg, 2)
    sizes = Counter(len(s.tag) for s in plan.slots)
    # #(k) * C(3, k): 9*3, 3*3, 1*1
    assert sizes == {1: 27, 2: 9, 3: 1}


def test_all_zero_messages(rng):
    cfg = lifted_config(4, 2, 2, 3)
    db = rs_encode([Message(np.zeros(cfg.L, dtype=np.int64), j) for j in (1, 2, 3)], cfg)
    msg, _ = retrieve(db, lifted_matrix(cfg), 2, rng)
    assert not msg.symbols.any()


def test_secret_sharing_four_messages(rng):
    cfg, db, S = setup(4, 1, 2, 4)
    for d in range(1, 5):
        msg, rate = retrieve(db, S, d, rng)
        assert np.array_equal(msg.symbols, db.messages[d - 1].symbols)
        assert rate == Fraction(4 - 2, 1) * 4**3 / (4**4 - 2**4)


def test_single_message_is_trivial(rng):
    cfg, db, S = setup(4, 2, 2, 1)
    msg, rate = retrieve(db, S, 1, rng)
    assert rate == 1
    assert np.array_equal(msg.symbols, db.messages[0].symbols)


def test_schedule_and_transcript_json_replay(rng):
    cfg, db, S = setup(5, 2, 1, 3)
    schedule = build_schedule(S, cfg, 3, rng)
    transcript = run(schedule, db)
    loaded = load_schedule(dump_schedule(schedule))
    replay = transcript_from_dict(transcript_to_dict(transcript))
    assert run(loaded, db).answers == transcript.answers
    assert np.array_equal(decode(replay, loaded, cfg).symbols, db.messages[2].symbols)


def test_seeded_schedules_repeat():
    cfg = lifted_config(4, 2, 2, 3)
    S = lifted_matrix(cfg)
    a, b = build_schedule(S, cfg, 1, 7), build_schedule(S, cfg, 1, 7)
    assert np.array_equal(a.queries, b.queries) and a.layout == b.layout
    assert a.seed == 7


def test_guards(rng):
    cfg = lifted_config(4, 2, 2, 3)
    with pytest.raises(ValueError):
        schedule_plan(symbolic_matrix(4, 2, 3), cfg, 1)
    with pytest.raises(ValueError):
        schedule_plan(symbolic_matrix(4, 3, 2), cfg, 1)
    with pytest.raises(ValueError):
        schedule_plan(lifted_matrix(cfg), cfg, 4)
    cfg2, db2, _ = setup(5, 2, 1, 2)
    schedule = build_schedule(lifted_matrix(cfg), cfg, 1, rng)
    with pytest.raises(ValueError):
        run(schedule, db2)


def test_transcript_must_match_layout(rng):
    cfg, db, S = setup(4, 2, 2, 2)
    schedule = build_schedule(S, cfg, 1, rng)
    t = run(schedule, db)
    t.answers[0] = t.answers[0][:-1]
    with pytest.raises(ValueError):
        decode(t, schedule, cfg)
