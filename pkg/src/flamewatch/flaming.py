"""Flaming-event detection over labeled comment streams.

Pipeline: bucket labeled comments into a daily/hourly time series, compute
per-post Very-Negative counts, standardize them with a z-score, and flag
posts above the z threshold. Each flagged post is annotated with its
Very-Negative share and the densest short time window of its Very-Negative
comments.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone

from .lexicon import LabeledComment, SentimentLabel

VERY_NEGATIVE = SentimentLabel.VERY_NEGATIVE
NEGATIVE = SentimentLabel.NEGATIVE


@dataclass
class TimeBucket:
    start: datetime
    width: str  # "day" or "hour"
    counts: list[int]  # indexed by label code 0..4


@dataclass
class PostStats:
    post_id: str
    first_comment_time: datetime
    total: int
    label_counts: list[int]
    vn_count: int
    vn_share: float


@dataclass
class ZScoreStats:
    mean: float
    std: float  # population by default
    z: dict[str, float]  # post_id -> z value


@dataclass
class BurstWindow:
    start: datetime
    window_hours: float
    contained: int
    fraction: float


@dataclass
class FlamingEvent:
    post_id: str
    z: float
    vn_count: int
    vn_share: float
    share_exceeded: bool
    burst: BurstWindow | None = None


def _bucket_floor(ts: datetime, width: str) -> datetime:
    ts = ts.astimezone(timezone.utc)
    if width == "day":
        return ts.replace(hour=0, minute=0, second=0, microsecond=0)
    if width == "hour":
        return ts.replace(minute=0, second=0, microsecond=0)
    raise ValueError(f"unknown bucket width {width!r}")


def aggregate(labeled: list[LabeledComment], width: str = "day") -> list[TimeBucket]:
    """Per-bucket label counts, with empty buckets filled between first and last."""
    if not labeled:
        return []
    step = timedelta(days=1) if width == "day" else timedelta(hours=1)
    by_start: dict[datetime, list[int]] = {}
    for lc in labeled:
        start = _bucket_floor(lc.comment.created_time, width)
        by_start.setdefault(start, [0] * 5)[int(lc.label)] += 1
    first = min(by_start)
    last = max(by_start)
    buckets = []
    cur = first
    while cur <= last:
        buckets.append(TimeBucket(cur, width, by_start.get(cur, [0] * 5)))
        cur += step
    return buckets


def post_stats(labeled: list[LabeledComment]) -> list[PostStats]:
    grouped: dict[str, list[LabeledComment]] = {}
    for lc in labeled:
        grouped.setdefault(lc.comment.post_id, []).append(lc)
    stats = []
    for post_id in sorted(grouped):
        group = grouped[post_id]
        counts = [0] * 5
        for lc in group:
            counts[int(lc.label)] += 1
        vn = counts[VERY_NEGATIVE]
        stats.append(PostStats(
            post_id=post_id,
            first_comment_time=min(lc.comment.created_time for lc in group),
            total=len(group),
            label_counts=counts,
            vn_count=vn,
            vn_share=vn / len(group),
        ))
    return stats


def zscores(
    stats: list[PostStats],
    sample_std: bool = False,
    include_negative: bool = False,
) -> ZScoreStats:
    """Standardize per-post Very-Negative counts (optionally VN+N)."""
    if len(stats) < 2:
        raise ValueError("need at least 2 posts to compute z-scores")

    def count_of(s: PostStats) -> int:
        if include_negative:
            return s.vn_count + s.label_counts[NEGATIVE]
        return s.vn_count

    xs = [count_of(s) for s in stats]
    n = len(xs)
    mean = sum(xs) / n
    var = sum((x - mean) ** 2 for x in xs) / (n - 1 if sample_std else n)
    std = math.sqrt(var)
    if std == 0:
        z = {s.post_id: 0.0 for s in stats}
    else:
        z = {s.post_id: (x - mean) / std for s, x in zip(stats, xs)}
    return ZScoreStats(mean=mean, std=std, z=z)


def burst_profile(
    vn_times: list[datetime], window_hours: float = 3.0
) -> BurstWindow:
    """Window of the given width holding the most Very-Negative comments.

    Candidate windows are anchored at each comment timestamp, which is
    sufficient: any optimal window can be slid right until its left edge
    touches a comment.
    """
    if not vn_times:
        raise ValueError("post has no Very Negative comments")
    times = sorted(vn_times)
    width = timedelta(hours=window_hours)
    best_start, best_count = times[0], 1
    for i, start in enumerate(times):
        count = sum(1 for t in times[i:] if t <= start + width)
        if count > best_count:
            best_start, best_count = start, count
    return BurstWindow(
        start=best_start,
        window_hours=window_hours,
        contained=best_count,
        fraction=best_count / len(times),
    )


def detect(
    stats: list[PostStats],
    labeled: list[LabeledComment] | None = None,
    z_threshold: float = 5.0,
    share_threshold: float = 0.20,
    window_hours: float = 3.0,
    sample_std: bool = False,
    include_negative: bool = False,
) -> list[FlamingEvent]:
    """Posts whose standardized VN count exceeds the threshold, z-descending."""
    zs = zscores(stats, sample_std=sample_std, include_negative=include_negative)
    vn_times: dict[str, list[datetime]] = {}
    if labeled is not None:
        for lc in labeled:
            if lc.label == VERY_NEGATIVE:
                vn_times.setdefault(lc.comment.post_id, []).append(
                    lc.comment.created_time
                )
    events = []
    for s in stats:
        z = zs.z[s.post_id]
        if z > z_threshold:
            burst = None
            if vn_times.get(s.post_id):
                burst = burst_profile(vn_times[s.post_id], window_hours)
            events.append(FlamingEvent(
                post_id=s.post_id,
                z=z,
                vn_count=s.vn_count,
                vn_share=s.vn_share,
                share_exceeded=s.vn_share > share_threshold,
                burst=burst,
            ))
    events.sort(key=lambda e: (-e.z, e.post_id))
    return events


def _atomic_write(path, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def event_to_dict(e: FlamingEvent) -> dict:
    d = {
        "post_id": e.post_id,
        "z": e.z,
        "vn_count": e.vn_count,
        "vn_share": e.vn_share,
        "share_exceeded": e.share_exceeded,
        "burst": None,
    }
    if e.burst is not None:
        d["burst"] = {
            "start": e.burst.start.isoformat().replace("+00:00", "Z"),
            "window_hours": e.burst.window_hours,
            "contained": e.burst.contained,
            "fraction": e.burst.fraction,
        }
    return d


def write_report(
    events: list[FlamingEvent], buckets: list[TimeBucket], json_path, csv_path
) -> None:
    """Events as JSON plus the time series as a plottable CSV, atomically."""
    _atomic_write(json_path, json.dumps(
        {"events": [event_to_dict(e) for e in events]}, indent=2
    ) + "\n")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["bucket_start", "label0", "label1", "label2", "label3", "label4"])
    for b in buckets:
        writer.writerow(
            [b.start.isoformat().replace("+00:00", "Z")] + list(b.counts)
        )
    _atomic_write(csv_path, buf.getvalue())


def read_report(json_path) -> list[FlamingEvent]:
    with open(json_path, encoding="utf-8") as fh:
        obj = json.load(fh)
    events = []
    for d in obj["events"]:
        burst = None
        if d.get("burst"):
            b = d["burst"]
            burst = BurstWindow(
                start=datetime.fromisoformat(b["start"].replace("Z", "+00:00")),
                window_hours=b["window_hours"],
                contained=b["contained"],
                fraction=b["fraction"],
            )
        events.append(FlamingEvent(
            post_id=d["post_id"],
            z=d["z"],
            vn_count=d["vn_count"],
            vn_share=d["vn_share"],
            share_exceeded=d["share_exceeded"],
            burst=burst,
        ))
    return events
