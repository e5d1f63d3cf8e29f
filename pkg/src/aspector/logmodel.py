"""Query-log ingestion, sessionization and count statistics."""

from __future__ import annotations

import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

log = logging.getLogger(__name__)

DEFAULT_GAP_SECONDS = 1800

_SPACE = re.compile(r"\s+")


def normalize_query(raw: str, keep: str = "'") -> str:
    """Lowercase, strip punctuation and collapse whitespace.

    Characters in ``keep`` survive only between two word characters, so
    ``o'neil`` stays intact while a quoted ``'word'`` loses its quotes.
    Returns ``""`` when nothing is left.
    """
    text = raw.lower()
    out = []
    n = len(text)
    for i, ch in enumerate(text):
        if ch.isalnum():
            out.append(ch)
        elif ch in keep and 0 < i < n - 1 and text[i - 1].isalnum() and text[i + 1].isalnum():
            out.append(ch)
        else:
            out.append(" ")
    return _SPACE.sub(" ", "".join(out)).strip()


def tokenize(text: str) -> list[str]:
    return normalize_query(text).split()


@dataclass(frozen=True)
class QueryEvent:
    user_id: str
    timestamp: int
    query: str

    def __post_init__(self):
        if not self.query:
            raise ValueError("query must be non-empty after normalization")
        if self.timestamp < 0:
            raise ValueError(f"negative timestamp {self.timestamp}")


@dataclass(frozen=True)
class Session:
    user_id: str
    events: tuple[QueryEvent, ...]

    @property
    def queries(self) -> list[str]:
        return [e.query for e in self.events]


@dataclass(frozen=True)
class LogStats:
    """Immutable count tables over a sessionized log.

    ``follows[q][qj]`` is the number of sessions in which ``qj`` occurs after
    ``q``; ``query_counts[q]`` is the raw number of occurrences of ``q``.
    """

    follows: dict[str, dict[str, int]]
    query_counts: dict[str, int]
    session_counts: dict[str, int] = field(default_factory=dict)
    n_sessions: int = 0
    _token_index: dict[str, frozenset[str]] = field(default_factory=dict, repr=False)

    @property
    def vocabulary(self) -> frozenset[str]:
        return frozenset(self.query_counts)

    @property
    def session_follow_counts(self) -> dict[tuple[str, str], int]:
        return {(q, qj): c for q, row in self.follows.items() for qj, c in row.items()}

    def f_s(self, q: str, qj: str) -> int:
        return self.follows.get(q, {}).get(qj, 0)

    def f(self, q: str) -> int:
        return self.query_counts.get(q, 0)

    def queries_with_token(self, token: str) -> frozenset[str]:
        return self._token_index.get(token, frozenset())


def parse_log_lines(lines: Iterable[str]) -> tuple[list[QueryEvent], int]:
    """Parse TSV ``user_id<TAB>timestamp<TAB>query`` rows.

    Returns the events and the number of dropped rows (bad timestamp, wrong
    column count, or a query that normalizes to nothing).
    """
    events = []
    dropped = 0
    for line in lines:
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            dropped += 1
            continue
        user, ts, raw = parts
        try:
            timestamp = int(ts)
        except ValueError:
            dropped += 1
            continue
        query = normalize_query(raw)
        if not query or timestamp < 0:
            dropped += 1
            continue
        events.append(QueryEvent(user, timestamp, query))
    return events, dropped


def read_log(path: str | Path) -> list[QueryEvent]:
    with open(path, encoding="utf-8") as fh:
        events, dropped = parse_log_lines(fh)
    if dropped:
        log.warning("dropped %d unparsable log rows from %s", dropped, path)
    return events


def write_log(events: Iterable[QueryEvent], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in events:
            fh.write(f"{e.user_id}\t{e.timestamp}\t{e.query}\n")


def sessionize(events: list[QueryEvent], gap_seconds: int = DEFAULT_GAP_SECONDS) -> list[Session]:
    """Split each user's time-ordered events wherever the idle gap exceeds ``gap_seconds``.

    Users appear in order of their first event; sorting is stable, so events
    sharing a timestamp keep their input order.
    """
    if gap_seconds <= 0:
        raise ValueError("gap_seconds must be positive")
    by_user: dict[str, list[QueryEvent]] = {}
    for e in events:
        by_user.setdefault(e.user_id, []).append(e)

    sessions = []
    for user, evs in by_user.items():
        evs = sorted(evs, key=lambda e: e.timestamp)
        current = [evs[0]]
        for prev, e in zip(evs, evs[1:]):
            if e.timestamp - prev.timestamp > gap_seconds:
                sessions.append(Session(user, tuple(current)))
                current = []
            current.append(e)
        sessions.append(Session(user, tuple(current)))
    return sessions


def count_stats(sessions: Iterable[Session]) -> LogStats:
    follows: dict[str, dict[str, int]] = defaultdict(dict)
    counts: dict[str, int] = defaultdict(int)
    in_sessions: dict[str, int] = defaultdict(int)
    n_sessions = 0
    for s in sessions:
        n_sessions += 1
        qs = s.queries
        for q in qs:
            counts[q] += 1
        for q in set(qs):
            in_sessions[q] += 1
        pairs = set()
        for i, q in enumerate(qs):
            for qj in qs[i + 1:]:
                if qj != q:
                    pairs.add((q, qj))
        for q, qj in pairs:
            row = follows[q]
            row[qj] = row.get(qj, 0) + 1

    index: dict[str, set[str]] = defaultdict(set)
    for q in counts:
        for tok in q.split():
            index[tok].add(q)
    return LogStats(
        follows={q: dict(row) for q, row in follows.items()},
        query_counts=dict(counts),
        session_counts=dict(in_sessions),
        n_sessions=n_sessions,
        _token_index={t: frozenset(qs) for t, qs in index.items()},
    )


def load_stats(path: str | Path, gap_seconds: int = DEFAULT_GAP_SECONDS) -> LogStats:
    return count_stats(sessionize(read_log(path), gap_seconds))
