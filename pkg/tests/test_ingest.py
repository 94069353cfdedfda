from datetime import date, datetime, timezone

import numpy as np
import pytest

from mvmc import PostRecord, build_daily_views, preprocess_text
from mvmc.ingest import (
    MIN_POSTS_PER_HASHTAG,
    RecordError,
    VIEW_NAMES,
    group_by_day,
    parse_json_record,
    parse_tsv_record,
    read_posts,
)

DAY = date(2020, 3, 1)


def post(pid, tags, text="", user="u1", urls=(), hour=12):
    return PostRecord(
        post_id=pid,
        timestamp=datetime(2020, 3, 1, hour, tzinfo=timezone.utc),
        user_id=user,
        text=text,
        hashtags=tuple(tags),
        urls=tuple(urls),
    )


def test_preprocess_strips_markup():
    assert preprocess_text("Check #covid19 https://x.co NOW!") == ["check", "now"]


def test_preprocess_retweet_and_mentions():
    assert preprocess_text("RT @user: Stay RESTful, art of RT") == [
        "stay",
        "restful",
        "art",
        "of",
    ]


def test_preprocess_keeps_unicode_words_and_digits():
    assert preprocess_text("Café N°5 costs 10€ www.shop.example") == [
        "café",
        "n",
        "5",
        "costs",
        "10",
    ]


def test_parse_json_record():
    rec = parse_json_record(
        '{"post_id": "1", "timestamp": "2020-03-01T12:00:00Z", "user_id": "u9",'
        ' "text": "hi", "hashtags": ["#a"], "urls": []}'
    )
    assert rec.user_id == "u9" and rec.day == DAY
    with pytest.raises(RecordError):
        parse_json_record('{"timestamp": "2020-03-01T00:00:00Z"}')


def test_parse_tsv_record():
    rec = parse_tsv_record("1\t2020-03-01T12:00:00Z\tu9\thi there\t#a,#b\t\n")
    assert rec.hashtags == ("#a", "#b") and rec.urls == ()
    with pytest.raises(RecordError):
        parse_tsv_record("too\tfew\tfields")


def test_read_posts_reports_bad_lines(tmp_path):
    path = tmp_path / "posts.jsonl"
    path.write_text(
        '{"post_id": "1", "timestamp": "2020-03-01T12:00:00Z", "user_id": "u",'
        ' "text": "", "hashtags": [], "urls": []}\n'
        "this is not json\n"
    )
    errors = []
    records = read_posts(path, on_error=lambda ln, msg: errors.append(ln))
    assert len(records) == 1
    assert errors == [2]


def test_group_by_day_sorted():
    a = post("1", ["#x"])
    b = PostRecord("2", datetime(2020, 2, 28, tzinfo=timezone.utc), "u", "", (), ())
    grouped = group_by_day([a, b])
    assert list(grouped) == [date(2020, 2, 28), DAY]


def test_rare_hashtags_dropped():
    posts = [post(str(i), ["#keep", "#rare"] if i == 0 else ["#keep"]) for i in range(3)]
    views = build_daily_views(posts, DAY)
    assert views.hashtags == ("#keep",)
    assert MIN_POSTS_PER_HASHTAG == 3


def test_threshold_counts_distinct_posts_not_uses():
    # three mentions of #x inside a single post must not rescue it
    posts = [post("0", ["#x", "#x", "#x"])] + [post(str(i), ["#y"]) for i in range(1, 4)]
    views = build_daily_views(posts, DAY)
    assert views.hashtags == ("#y",)


def test_hashtags_case_sensitive():
    posts = [post(str(i), ["#Covid"]) for i in range(3)]
    posts += [post(str(i + 10), ["#covid"]) for i in range(2)]
    views = build_daily_views(posts, DAY)
    assert views.hashtags == ("#Covid",)


def test_views_share_row_registry():
    posts = [
        post(str(i), ["#a", "#b"], text="hello world", user=f"u{i}", urls=["http://s.co/1"])
        for i in range(3)
    ]
    views = build_daily_views(posts, DAY)
    rows = views.text_view.row_names
    for v in views.as_list():
        assert v.row_names == rows
    assert len(VIEW_NAMES) == 4


def test_cooccurrence_symmetric_counts():
    posts = [post(str(i), ["#a", "#b"]) for i in range(3)]
    posts.append(post("9", ["#a"]))
    views = build_daily_views(posts, DAY)
    co = views.cooccur_view.counts.toarray()
    rows = views.hashtags
    ia, ib = rows.index("#a"), rows.index("#b")
    assert co[ia, ib] == co[ib, ia] == 3
    assert co[ia, ia] == 0


def test_user_and_url_views_count_posts():
    posts = [
        post("0", ["#a"], user="alice", urls=["http://x.co/p"]),
        post("1", ["#a"], user="alice", urls=["http://x.co/p", "http://y.co/q"]),
        post("2", ["#a"], user="bob"),
    ]
    views = build_daily_views(posts, DAY)
    users = views.user_view
    assert users.counts[0, users.col_names.index("alice")] == 2
    assert users.counts[0, users.col_names.index("bob")] == 1
    urls = views.url_view
    assert urls.counts[0, urls.col_names.index("http://x.co/p")] == 2


def test_url_domain_mode():
    posts = [
        post(str(i), ["#a"], urls=[f"http://news.example/article{i}"]) for i in range(3)
    ]
    views = build_daily_views(posts, DAY, url_mode="domain")
    assert views.url_view.col_names == ("news.example",)
    assert views.url_view.counts[0, 0] == 3


def test_wrong_day_rejected():
    with pytest.raises(RecordError):
        build_daily_views([post("1", ["#a"])], date(2020, 3, 2))
