from collections import Counter

import pytest

from mvmc import top_user_score, top_users, unique_user_ratio
from mvmc.analytics import cluster_report_rows, hashtag_report_rows, token_frequencies
from mvmc.graph import GraphUsageError

from oracles import brute_top_user_score


def test_top_users_takes_ceil_third():
    usage = {f"u{i}": 10 - i for i in range(7)}
    got = top_users(usage)  # ceil(7/3) = 3
    assert got == {"u0", "u1", "u2"}


def test_top_users_tie_breaks_by_id():
    usage = {"b": 5, "a": 5, "c": 5}
    assert top_users(usage, fraction=1 / 3) == {"a"}


def test_top_users_edge_cases():
    assert top_users({}) == frozenset()
    assert top_users({"x": 1}, fraction=1.0) == {"x"}
    with pytest.raises(GraphUsageError):
        top_users({"x": 1}, fraction=0)


def test_top_user_score_examples():
    tops = {"#a": frozenset({"u1", "u2"}), "#b": frozenset({"u3", "u4"})}
    assert top_user_score(["#a", "#b"], tops) == 1.0  # disjoint
    tops["#b"] = frozenset({"u1", "u2"})
    assert top_user_score(["#a", "#b"], tops) == 0.5  # identical
    assert top_user_score(["#a"], tops) == 1.0


def test_top_user_score_matches_bruteforce():
    import random

    rng = random.Random(50)
    for _ in range(20):
        tags = [f"#t{i}" for i in range(rng.randint(1, 6))]
        tops = {
            t: frozenset(f"u{rng.randint(0, 9)}" for _ in range(rng.randint(0, 5)))
            for t in tags
        }
        got = top_user_score(tags, tops)
        assert got == pytest.approx(brute_top_user_score([tops[t] for t in tags]))
        assert 0.0 < got <= 1.0 or got == 1.0


def test_unique_user_ratio():
    assert unique_user_ratio({"u1": 1, "u2": 1}) == 1.0
    assert unique_user_ratio({"u1": 119}) == pytest.approx(1 / 119)
    assert unique_user_ratio({"u1": 3, "u2": 1}) == 0.5
    with pytest.raises(GraphUsageError):
        unique_user_ratio({})


def test_cluster_report_rows():
    clusters = {0: ["#a", "#b"], 1: ["#c"]}
    usage = {
        "#a": {"u1": 4, "u2": 1, "u3": 1},
        "#b": {"u1": 2},
        "#c": {"u9": 1},
    }
    rows = cluster_report_rows(clusters, usage)
    assert rows[0] == (0, 2, 1, 0.5)  # top user u1 shared by #a and #b
    assert rows[1] == (1, 1, 1, 1.0)


def test_hashtag_report_rows():
    usage = {"#b": {"u1": 2, "u2": 2}, "#a": {"u1": 1}}
    rows = hashtag_report_rows(usage)
    assert rows == [("#a", 1, 1, 1.0), ("#b", 4, 2, 0.5)]


def test_token_frequencies():
    counts = {
        "#a": Counter({"mask": 3, "stay": 1}),
        "#b": Counter({"mask": 2, "home": 2}),
    }
    ranked = token_frequencies(["#a", "#b"], counts, top_n=2)
    assert ranked == [("mask", 5), ("home", 2)]
    assert token_frequencies(["#zz"], counts) == []
