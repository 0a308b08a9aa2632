"""Pipeline configuration: file paths, thresholds, mode, worker count."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import yaml

CONFIG_SCHEMA = "factmill.config"


class ConfigError(Exception):
    pass


@dataclass
class PipelineConfig:
    ontology_path: Path
    entities_path: Path
    corpus_path: Path
    log_path: Path
    rules_paths: List[Path] = field(default_factory=list)
    templates_path: Optional[Path] = None
    link_rules_path: Optional[Path] = None
    feed_path: Optional[Path] = None
    escalations_path: Optional[Path] = None
    golden_path: Optional[Path] = None
    journal_path: Optional[Path] = None
    metrics_path: Optional[Path] = None

    mode: str = "batch"
    targets: List[Tuple[str, str]] = field(default_factory=list)
    full_scan: bool = True
    auto_threshold: float = 0.8
    curation_floor: float = 0.4
    quantity_merge_tolerance: float = 0.01
    base_weights: Dict[str, float] = field(
        default_factory=lambda: {"pattern": 1.0, "link": 1.0, "model": 0.7}
    )
    sla_minutes: float = 240.0
    poll_interval_minutes: float = 60.0
    workers: int = 1
    search_k: int = 5
    languages: List[str] = field(default_factory=lambda: ["en"])

    def validate(self) -> None:
        if not 0 <= self.curation_floor < self.auto_threshold <= 1:
            raise ConfigError(
                "thresholds must satisfy 0 <= curation_floor < auto_threshold <= 1"
            )
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        required = [self.ontology_path, self.entities_path, self.corpus_path]
        required.extend(self.rules_paths)
        for optional in (self.templates_path, self.link_rules_path, self.feed_path,
                         self.escalations_path, self.golden_path):
            if optional is not None:
                required.append(optional)
        for path in required:
            if not Path(path).exists():
                raise ConfigError(f"configured path does not exist: {path}")


def load_config(path, overrides: Optional[dict] = None) -> PipelineConfig:
    path = Path(path)
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    if data.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(f"{path}: unexpected schema {data.get('schema')!r}")
    if overrides:
        data.update(overrides)
    base = path.parent

    def p(key, required=False) -> Optional[Path]:
        value = data.get("paths", {}).get(key)
        if value is None:
            if required:
                raise ConfigError(f"{path}: missing required path {key!r}")
            return None
        value = Path(value)
        return value if value.is_absolute() else base / value

    thresholds = data.get("thresholds", {})
    config = PipelineConfig(
        ontology_path=p("ontology", required=True),
        entities_path=p("entities", required=True),
        corpus_path=p("corpus", required=True),
        log_path=p("log", required=True),
        rules_paths=[
            (Path(r) if Path(r).is_absolute() else base / r)
            for r in data.get("paths", {}).get("rules", [])
        ],
        templates_path=p("templates"),
        link_rules_path=p("link_rules"),
        feed_path=p("feed"),
        escalations_path=p("escalations"),
        golden_path=p("golden"),
        journal_path=p("journal"),
        metrics_path=p("metrics"),
        mode=data.get("mode", "batch"),
        targets=[tuple(t) for t in data.get("targets", [])],
        full_scan=bool(data.get("full_scan", True)),
        auto_threshold=float(thresholds.get("auto", 0.8)),
        curation_floor=float(thresholds.get("floor", 0.4)),
        quantity_merge_tolerance=float(thresholds.get("merge_tolerance", 0.01)),
        base_weights=data.get("weights", {"pattern": 1.0, "link": 1.0, "model": 0.7}),
        sla_minutes=float(data.get("sla_minutes", 240.0)),
        poll_interval_minutes=float(data.get("poll_interval_minutes", 60.0)),
        workers=int(data.get("workers", 1)),
        search_k=int(data.get("search_k", 5)),
        languages=list(data.get("languages", ["en"])),
    )
    config.validate()
    return config
