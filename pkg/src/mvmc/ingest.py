"""Turning raw post records into the four daily hashtag views.

Views per day: accompanying text tokens, posting users, co-occurring URLs,
and hashtag co-occurrence. Hashtags used in fewer than 3 distinct posts are
dropped; hashtag matching is case-sensitive.
"""
from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from datetime import date, datetime, timezone
from urllib.parse import urlparse

from .views import ViewMatrix

MIN_POSTS_PER_HASHTAG = 3

_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_HASHTAG_RE = re.compile(r"#\S+")
_MENTION_RE = re.compile(r"@\w+")
_RT_RE = re.compile(r"\bRT\b")


class RecordError(ValueError):
    """Raised for malformed input records."""


@dataclass(frozen=True)
class PostRecord:
    post_id: str
    timestamp: datetime
    user_id: str
    text: str
    hashtags: tuple[str, ...]
    urls: tuple[str, ...]

    @property
    def day(self) -> date:
        return self.timestamp.date()


@dataclass(frozen=True)
class DailyViews:
    """The four views of one day, sharing a single hashtag row registry."""

    day: date
    text_view: ViewMatrix
    user_view: ViewMatrix
    url_view: ViewMatrix
    cooccur_view: ViewMatrix

    def as_list(self) -> list[ViewMatrix]:
        return [self.text_view, self.user_view, self.url_view, self.cooccur_view]

    @property
    def hashtags(self) -> tuple[str, ...]:
        return self.text_view.row_names


VIEW_NAMES = ("text", "user", "url", "cooccur")


def preprocess_text(raw: str) -> list[str]:
    """Strip hashtags, URLs, mentions and retweet markers, then keep only
    letter/number characters, lowercase, and split on whitespace."""
    text = _URL_RE.sub(" ", raw)
    text = _HASHTAG_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    text = _RT_RE.sub(" ", text)
    cleaned = []
    for ch in text:
        cat = unicodedata.category(ch)
        if cat[0] in ("L", "N"):
            cleaned.append(ch.lower())
        else:
            cleaned.append(" ")
    return "".join(cleaned).split()


def _parse_timestamp(value: str) -> datetime:
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def parse_json_record(line: str) -> PostRecord:
    """One line-delimited JSON record with the PostRecord fields."""
    obj = json.loads(line)
    try:
        return PostRecord(
            post_id=str(obj["post_id"]),
            timestamp=_parse_timestamp(obj["timestamp"]),
            user_id=str(obj["user_id"]),
            text=str(obj.get("text", "")),
            hashtags=tuple(obj.get("hashtags", [])),
            urls=tuple(obj.get("urls", [])),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise RecordError(f"bad record: {exc}") from exc


def parse_tsv_record(line: str) -> PostRecord:
    """TSV fallback: post_id, timestamp, user_id, text, hashtags, urls
    (last two comma-separated, may be empty)."""
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 6:
        raise RecordError(f"expected 6 TSV fields, got {len(parts)}")
    post_id, ts, user, text, tags, urls = parts
    try:
        return PostRecord(
            post_id=post_id,
            timestamp=_parse_timestamp(ts),
            user_id=user,
            text=text,
            hashtags=tuple(t for t in tags.split(",") if t),
            urls=tuple(u for u in urls.split(",") if u),
        )
    except ValueError as exc:
        raise RecordError(f"bad record: {exc}") from exc


def read_posts(path, on_error=None) -> list[PostRecord]:
    """Read a .jsonl or .tsv corpus; malformed lines go to on_error and are
    skipped."""
    parse = parse_tsv_record if str(path).endswith(".tsv") else parse_json_record
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                records.append(parse(line))
            except (RecordError, json.JSONDecodeError) as exc:
                if on_error is not None:
                    on_error(lineno, str(exc))
    return records


def group_by_day(posts: list[PostRecord]) -> dict[date, list[PostRecord]]:
    days: dict[date, list[PostRecord]] = {}
    for p in posts:
        days.setdefault(p.day, []).append(p)
    return dict(sorted(days.items()))


def build_daily_views(
    posts: list[PostRecord], day: date, url_mode: str = "exact"
) -> DailyViews:
    """Aggregate one day's posts into the four hashtag views.

    url_mode="domain" reduces URLs to their host before counting, for the
    case where exact URLs almost never repeat.
    """
    if any(p.day != day for p in posts):
        raise RecordError("posts must all fall on the given day")

    post_counts: dict[str, set[str]] = {}
    for p in posts:
        for h in set(p.hashtags):
            post_counts.setdefault(h, set()).add(p.post_id)
    surviving = []
    seen = set()
    for p in posts:
        for h in p.hashtags:
            if h not in seen and len(post_counts.get(h, ())) >= MIN_POSTS_PER_HASHTAG:
                seen.add(h)
                surviving.append(h)

    def norm_url(u: str) -> str:
        if url_mode == "domain":
            return urlparse(u).netloc or u
        return u

    text_triplets, user_triplets, url_triplets, co_triplets = [], [], [], []
    text_acc: dict[tuple[str, str], float] = {}
    user_acc: dict[tuple[str, str], float] = {}
    url_acc: dict[tuple[str, str], float] = {}
    co_acc: dict[tuple[str, str], float] = {}
    for p in posts:
        tags_here = [h for h in dict.fromkeys(p.hashtags) if h in seen]
        if not tags_here:
            continue
        tokens = preprocess_text(p.text)
        for h in tags_here:
            for tok in tokens:
                text_acc[(h, tok)] = text_acc.get((h, tok), 0.0) + 1.0
            user_acc[(h, p.user_id)] = user_acc.get((h, p.user_id), 0.0) + 1.0
            for u in p.urls:
                u = norm_url(u)
                url_acc[(h, u)] = url_acc.get((h, u), 0.0) + 1.0
            for other in tags_here:
                if other != h:
                    co_acc[(h, other)] = co_acc.get((h, other), 0.0) + 1.0

    for acc, trips in (
        (text_acc, text_triplets),
        (user_acc, user_triplets),
        (url_acc, url_triplets),
        (co_acc, co_triplets),
    ):
        trips.extend((r, c, v) for (r, c), v in acc.items())

    registry = tuple(surviving)
    views = []
    for trips, cols in (
        (text_triplets, None),
        (user_triplets, None),
        (url_triplets, None),
        (co_triplets, registry),
    ):
        if cols is None:
            # column registry in first-appearance order over posts
            col_order: dict[str, int] = {}
            for _r, c, _v in trips:
                col_order.setdefault(c, len(col_order))
            cols = tuple(col_order)
        views.append(ViewMatrix.from_triplets(trips, registry, cols))
    return DailyViews(day, *views)
