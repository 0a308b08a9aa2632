"""Evidence retrieval: crawl-index lookup for known urls, and a local
tf-idf inverted index plus query templates for the search-based path.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .corpus import CorpusHandle, Document

TEMPLATE_SCHEMA = "factmill.query_templates"
INDEX_SCHEMA = "factmill.search_index"
SCHEMA_VERSION = 1

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


class RetrieverError(Exception):
    pass


def tokenize(text: str) -> List[str]:
    """Lowercase Unicode-alphanumeric word segmentation (documented so
    index builds are reproducible)."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


@dataclass(frozen=True)
class QueryTemplate:
    predicate: str
    language: str
    pattern: str
    predicate_phrase: str = ""

    def __post_init__(self):
        if "{subject}" not in self.pattern:
            raise RetrieverError(f"template for {self.predicate} lacks {{subject}}")


@dataclass(frozen=True)
class SearchHit:
    url: str
    score: float
    matched_terms: Tuple[str, ...]


@dataclass
class RetrievalResult:
    documents: List[Document]
    missing_urls: List[str] = field(default_factory=list)

    @property
    def empty_evidence(self) -> bool:
        return not self.documents


def retrieve_crawl(task, corpus: CorpusHandle) -> RetrievalResult:
    """Fetch the newest revision of each task url; missing urls are
    reported, not fatal."""
    if not task.urls:
        raise RetrieverError("retrieve_crawl requires a task with urls")
    docs: List[Document] = []
    missing: List[str] = []
    for url in task.urls:
        doc = corpus.latest(url)
        if doc is None:
            missing.append(url)
        else:
            docs.append(doc)
    return RetrievalResult(documents=docs, missing_urls=missing)


class SearchIndex:
    """Immutable inverted index over passages and infobox values.

    Scoring: sum over query terms of tf × idf, divided by sqrt(document
    token count); idf = 1 + ln(N / df). Ties break by url ascending.
    """

    def __init__(self):
        self.postings: Dict[str, Dict[str, int]] = {}  # term -> url -> tf
        self.doc_lengths: Dict[str, int] = {}

    @property
    def doc_count(self) -> int:
        return len(self.doc_lengths)

    def search(self, query: str, k: int = 5) -> List[SearchHit]:
        if k < 1:
            raise RetrieverError("k must be >= 1")
        terms = tokenize(query)
        n = self.doc_count
        scores: Dict[str, float] = {}
        matched: Dict[str, List[str]] = {}
        for term in terms:
            posting = self.postings.get(term)
            if not posting:
                continue
            idf = 1.0 + math.log(n / len(posting))
            for url, tf in posting.items():
                scores[url] = scores.get(url, 0.0) + tf * idf
            for url in posting:
                matched.setdefault(url, []).append(term)
        hits = [
            SearchHit(url, score / math.sqrt(self.doc_lengths[url]), tuple(sorted(set(matched[url]))))
            for url, score in scores.items()
        ]
        hits.sort(key=lambda h: (-h.score, h.url))
        return hits[:k]

    def to_json(self) -> dict:
        return {
            "schema": INDEX_SCHEMA,
            "version": SCHEMA_VERSION,
            "doc_lengths": dict(sorted(self.doc_lengths.items())),
            "postings": {
                term: dict(sorted(posting.items()))
                for term, posting in sorted(self.postings.items())
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SearchIndex":
        if obj.get("schema") != INDEX_SCHEMA:
            raise RetrieverError(f"unexpected index schema {obj.get('schema')!r}")
        index = cls()
        index.doc_lengths = {k: int(v) for k, v in obj["doc_lengths"].items()}
        index.postings = {t: {u: int(c) for u, c in p.items()} for t, p in obj["postings"].items()}
        return index


def document_terms(doc: Document) -> List[str]:
    terms: List[str] = []
    for row in doc.infobox:
        terms.extend(tokenize(row.key))
        terms.extend(tokenize(row.raw_value))
    for _pid, text in doc.passages:
        terms.extend(tokenize(text))
    if doc.subject_hint:
        terms.append(doc.subject_hint.lower())
    return terms


def build_index(corpus: CorpusHandle) -> SearchIndex:
    """Index the latest revision of each url; deterministic for a fixed
    corpus (sorted url iteration, sorted serialization)."""
    index = SearchIndex()
    for doc in corpus.latest_documents():
        terms = document_terms(doc)
        index.doc_lengths[doc.url] = max(len(terms), 1)
        for term, tf in Counter(terms).items():
            index.postings.setdefault(term, {})[doc.url] = tf
    return index


def save_index(index: SearchIndex, path) -> None:
    Path(path).write_text(
        json.dumps(index.to_json(), ensure_ascii=False, sort_keys=True, indent=None),
        encoding="utf-8",
    )


def load_index(path) -> SearchIndex:
    return SearchIndex.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def load_templates(path) -> List[QueryTemplate]:
    path = Path(path)
    templates: List[QueryTemplate] = []
    with path.open(encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        if header.get("schema") != TEMPLATE_SCHEMA:
            raise RetrieverError(f"{path}: unexpected schema {header.get('schema')!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            templates.append(
                QueryTemplate(
                    predicate=obj["predicate"],
                    language=obj["language"],
                    pattern=obj["pattern"],
                    predicate_phrase=obj.get("predicate_phrase", ""),
                )
            )
    return templates


MAX_ALIASES = 3
MAX_TEMPLATES = 2


def generate_queries(task, templates: Sequence[QueryTemplate]) -> List[str]:
    """Substitute subject names/aliases into matching templates.

    Capped at 3 aliases × 2 templates per task, deduplicated in order;
    pure in (task, templates).
    """
    matching = [
        t
        for t in templates
        if t.predicate == task.predicate and t.language in (task.language, "*")
    ][:MAX_TEMPLATES]
    if not matching:
        raise RetrieverError(f"no query template for predicate {task.predicate!r}")
    names = [task.subject_name, *task.subject_aliases][: MAX_ALIASES]
    queries: List[str] = []
    for template in matching:
        for name in names:
            q = template.pattern.format(
                subject=name, predicate_phrase=template.predicate_phrase
            )
            if q not in queries:
                queries.append(q)
    return queries


def search(index: SearchIndex, query: str, k: int) -> List[SearchHit]:
    return index.search(query, k)
