from __future__ import annotations

from dataclasses import dataclass

import pytest

from aspector.kb import KnowledgeBase, build_kb
from aspector.logmodel import LogStats, QueryEvent, count_stats, sessionize
from aspector.retrieval import Corpus, Document, index
from aspector.synthgen import World, build_world, default_world


@dataclass
class Loaded:
    world: World | None
    stats: LogStats
    kb: KnowledgeBase
    corpus: Corpus


def load(world: World) -> Loaded:
    stats = count_stats(sessionize(world.events))
    return Loaded(world, stats, build_kb(*world.kb_rows()), index(world.documents))


@pytest.fixture(scope="session")
def synth():
    """Default five-class world, seed 0, with one zero-log entity per class."""
    return load(build_world(default_world(0)))


def sessions_log(sessions, gap=60, user_prefix="u"):
    """Events for a list of query lists; each list becomes its own session."""
    events = []
    for i, qs in enumerate(sessions):
        for j, q in enumerate(qs):
            events.append(QueryEvent(f"{user_prefix}{i}", i * 100_000 + j * gap, q))
    return events


def yale_fixture() -> Loaded:
    """Query "yale university" with sibling universities, an alias, and ambiguous terms."""
    aspects = [
        "harvard university", "oxford university", "nyu", "history", "food",
        "mount hood", "mount baker", "yale university admissions",
    ]
    sessions = []
    for rank, a in enumerate(aspects):
        sessions += [["yale university", a]] * (len(aspects) - rank)
    # eight private documents per aspect fill each top-8 result set on their own
    docs = []
    for a in aspects + ["yale university"]:
        tag = a.replace(" ", "")
        for r in range(8):
            docs.append(Document(f"{tag}-{r}", a, f"{tag}w{r} {tag}x {tag}y {tag}z"))
    kb = build_kb(
        [
            ("yale university", "University"), ("harvard university", "University"),
            ("oxford university", "University"), ("new york university", "University"),
            ("mount hood", "Mountain"), ("mount baker", "Mountain"),
            ("history", "Album"),
        ],
        [("nyu", "new york university")],
        ["history", "food", "mount hood", "mount baker"],
    )
    return Loaded(None, count_stats(sessionize(sessions_log(sessions))), kb, index(docs))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
