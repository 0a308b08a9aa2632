"""factmill: automated knowledge extraction and ingestion for a
versioned knowledge graph.

Pipeline stages: initiation (gap/staleness profiling, change events),
evidence retrieval (crawl index or local search), pattern-based fact
extraction, corroboration (normalize, cluster, score, route), ingestion
(batch or streaming into an append-only versioned fact log), link
inference, and a human curation service.
"""

__version__ = "0.1.0"
