"""Local document corpus: pre-parsed page snapshots with infobox rows,
passages and hyperlinks, plus the change feed driving streaming mode.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

from .model import parse_ts

CORPUS_SCHEMA = "factmill.corpus"
FEED_SCHEMA = "factmill.feed"
SCHEMA_VERSION = 1


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class Hyperlink:
    char_start: int
    char_end: int
    target: str  # entity id (Q…/odke:…) or raw url


@dataclass(frozen=True)
class InfoboxRow:
    key: str
    raw_value: str
    hyperlinks: Tuple[Hyperlink, ...] = ()

    def __post_init__(self):
        for link in self.hyperlinks:
            if not (0 <= link.char_start <= link.char_end <= len(self.raw_value)):
                raise CorpusError(
                    f"hyperlink span [{link.char_start}, {link.char_end}) outside "
                    f"row value of key {self.key!r}"
                )


@dataclass(frozen=True)
class Document:
    url: str
    language: str
    revision_id: str
    revision_time: str
    subject_hint: Optional[str] = None
    infobox: Tuple[InfoboxRow, ...] = ()
    passages: Tuple[Tuple[str, str], ...] = ()  # (passage_id, text)
    tables: Tuple[Tuple[Tuple[str, ...], ...], ...] = ()

    def passage(self, passage_id: str) -> Optional[str]:
        for pid, text in self.passages:
            if pid == passage_id:
                return text
        return None


@dataclass(frozen=True)
class ChangeEvent:
    url: str
    revision_id: str
    event_time: str
    editor_flags: FrozenSet[str] = frozenset()


def _row_from_json(obj: dict) -> InfoboxRow:
    return InfoboxRow(
        key=obj["key"],
        raw_value=obj["raw_value"],
        hyperlinks=tuple(Hyperlink(*link) for link in obj.get("hyperlinks", [])),
    )


def _row_to_json(row: InfoboxRow) -> dict:
    return {
        "key": row.key,
        "raw_value": row.raw_value,
        "hyperlinks": [[h.char_start, h.char_end, h.target] for h in row.hyperlinks],
    }


def document_from_json(obj: dict) -> Document:
    return Document(
        url=obj["url"],
        language=obj["language"],
        revision_id=obj["revision_id"],
        revision_time=obj["revision_time"],
        subject_hint=obj.get("subject_hint"),
        infobox=tuple(_row_from_json(r) for r in obj.get("infobox", [])),
        passages=tuple((p[0], p[1]) for p in obj.get("passages", [])),
        tables=tuple(tuple(tuple(c) for c in t) for t in obj.get("tables", [])),
    )


def document_to_json(doc: Document) -> dict:
    return {
        "url": doc.url,
        "language": doc.language,
        "revision_id": doc.revision_id,
        "revision_time": doc.revision_time,
        "subject_hint": doc.subject_hint,
        "infobox": [_row_to_json(r) for r in doc.infobox],
        "passages": [[pid, text] for pid, text in doc.passages],
        "tables": [[list(row) for row in t] for t in doc.tables],
    }


class CorpusHandle:
    """Read-only after load; safe for concurrent readers."""

    def __init__(self):
        self._by_url: Dict[str, List[Document]] = {}
        self._by_revision: Dict[Tuple[str, str], Document] = {}

    def _add(self, doc: Document, where: str) -> None:
        rev_key = (doc.url, doc.revision_id)
        if rev_key in self._by_revision:
            raise CorpusError(f"{where}: duplicate (url, revision_id) {rev_key}")
        self._by_revision[rev_key] = doc
        self._by_url.setdefault(doc.url, []).append(doc)

    def __len__(self) -> int:
        return len(self._by_revision)

    def urls(self) -> List[str]:
        return sorted(self._by_url)

    def documents(self) -> Iterator[Document]:
        for url in sorted(self._by_url):
            yield from self._by_url[url]

    def latest_documents(self) -> Iterator[Document]:
        for url in sorted(self._by_url):
            yield self.latest(url)

    def latest(self, url: str) -> Optional[Document]:
        docs = self._by_url.get(url)
        if not docs:
            return None
        return max(docs, key=lambda d: (parse_ts(d.revision_time), d.revision_id))

    def revision(self, url: str, revision_id: str) -> Optional[Document]:
        return self._by_revision.get((url, revision_id))


def load_corpus(path) -> CorpusHandle:
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    handle = CorpusHandle()
    with path.open(encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError:
            raise CorpusError(f"{path}: missing schema header") from None
        if header.get("schema") != CORPUS_SCHEMA:
            raise CorpusError(f"{path}: unexpected schema {header.get('schema')!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                doc = document_from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: malformed document record: {exc}") from exc
            handle._add(doc, f"{path}:{lineno}")
    return handle


def save_corpus(documents: List[Document], path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": CORPUS_SCHEMA, "version": SCHEMA_VERSION}) + "\n")
        for doc in documents:
            fh.write(json.dumps(document_to_json(doc), ensure_ascii=False) + "\n")


# ---------------------------------------------------------------------------
# Change feed
# ---------------------------------------------------------------------------


def event_from_json(obj: dict) -> ChangeEvent:
    return ChangeEvent(
        url=obj["url"],
        revision_id=obj["revision_id"],
        event_time=obj["event_time"],
        editor_flags=frozenset(obj.get("editor_flags", [])),
    )


def event_to_json(ev: ChangeEvent) -> dict:
    return {
        "url": ev.url,
        "revision_id": ev.revision_id,
        "event_time": ev.event_time,
        "editor_flags": sorted(ev.editor_flags),
    }


class ChangeFeed:
    def __init__(self, events: List[ChangeEvent]):
        self.events = events

    def __len__(self) -> int:
        return len(self.events)


def load_feed(path) -> ChangeFeed:
    path = Path(path)
    events: List[ChangeEvent] = []
    last_time = None
    with path.open(encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != FEED_SCHEMA:
            raise CorpusError(f"{path}: unexpected schema {header.get('schema')!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                ev = event_from_json(json.loads(line))
            except (json.JSONDecodeError, KeyError) as exc:
                raise CorpusError(f"{path}:{lineno}: malformed event record: {exc}") from exc
            t = parse_ts(ev.event_time)
            if last_time is not None and t < last_time:
                raise CorpusError(f"{path}:{lineno}: event_time decreases within feed")
            last_time = t
            events.append(ev)
    return ChangeFeed(events)


def save_feed(events: List[ChangeEvent], path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": FEED_SCHEMA, "version": SCHEMA_VERSION}) + "\n")
        for ev in events:
            fh.write(json.dumps(event_to_json(ev), ensure_ascii=False) + "\n")


def poll_feed(feed: ChangeFeed, since) -> List[ChangeEvent]:
    """Events strictly newer than ``since``, in feed (time) order."""
    since_dt = parse_ts(since) if isinstance(since, str) else since
    return [ev for ev in feed.events if parse_ts(ev.event_time) > since_dt]


def filter_vandalism(events: List[ChangeEvent]) -> List[ChangeEvent]:
    """Drop reverted edits, and anonymous edits that a later edit of the
    same url supersedes within this batch. Order of survivors preserved;
    idempotent."""
    kept: List[ChangeEvent] = []
    for i, ev in enumerate(events):
        if "reverted" in ev.editor_flags:
            continue
        if "anonymous" in ev.editor_flags and any(
            later.url == ev.url for later in events[i + 1 :]
        ):
            continue
        kept.append(ev)
    return kept
