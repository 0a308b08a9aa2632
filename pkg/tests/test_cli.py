"""Command-line interface: exit codes and report artifacts."""

import json

import yaml
from click.testing import CliRunner

from factmill.cli import main
from tests.conftest import FIXTURES


def _write_config(tmp_path, **extra):
    paths = {
        "ontology": str(FIXTURES / "ontology.ndjson"),
        "entities": str(FIXTURES / "entities.ndjson"),
        "corpus": str(FIXTURES / "corpus_golden.ndjson"),
        "log": str(tmp_path / "factlog.ndjson"),
        "rules": [str(FIXTURES / "rules" / "en.yaml"), str(FIXTURES / "rules" / "es.yaml")],
    }
    paths.update(extra.pop("paths", {}))
    data = {"schema": "factmill.config", "version": 1, "paths": paths, **extra}
    config_path = tmp_path / "config.yaml"
    config_path.write_text(yaml.safe_dump(data))
    return config_path


def test_run_batch_success(tmp_path):
    config = _write_config(tmp_path, paths={"golden": str(FIXTURES / "golden.ndjson")})
    out = tmp_path / "report.json"
    result = CliRunner().invoke(main, ["run-batch", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["precision"] == 1.0 and report["recall"] == 1.0
    assert report["appended"] == 72


def test_run_batch_golden_mismatch_exit_code(tmp_path):
    wrong_golden = tmp_path / "golden.ndjson"
    lines = (FIXTURES / "golden.ndjson").read_text().splitlines()
    doctored = json.loads(lines[1])
    doctored["object"] = {"kind": "quantity", "magnitude": 999.0, "unit": "cm"}
    wrong_golden.write_text("\n".join([lines[0], json.dumps(doctored)] + lines[2:]) + "\n")
    config = _write_config(tmp_path, paths={"golden": str(wrong_golden)})
    result = CliRunner().invoke(main, ["run-batch", "--config", str(config)])
    assert result.exit_code == 3


def test_bad_config_exit_code(tmp_path):
    config = _write_config(tmp_path, paths={"corpus": str(tmp_path / "missing.ndjson")})
    result = CliRunner().invoke(main, ["run-batch", "--config", str(config)])
    assert result.exit_code == 1
    assert "config error" in result.output


def test_run_stream_reports_sla(tmp_path):
    config = _write_config(
        tmp_path,
        paths={"feed": str(FIXTURES / "feed_200.ndjson"), "metrics": str(tmp_path / "m.ndjson")},
    )
    out = tmp_path / "stream.json"
    result = CliRunner().invoke(
        main,
        ["run-stream", "--config", str(config), "--start", "2024-03-01T00:00:00Z",
         "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(out.read_text())
    assert payload["sla"]["violations"] == 0
    assert payload["sla"]["count"] == 600
    assert payload["report"]["tasks"] == 200


def test_materialize_and_stats(tmp_path):
    config = _write_config(tmp_path)
    runner = CliRunner()
    assert runner.invoke(main, ["run-batch", "--config", str(config)]).exit_code == 0
    view_out = tmp_path / "view.json"
    assert (
        runner.invoke(main, ["materialize", "--config", str(config), "--out", str(view_out)])
        .exit_code
        == 0
    )
    view = json.loads(view_out.read_text())
    assert view["schema"] == "factmill.latest_view"
    assert len(view["facts"]) == 72
    stats_result = runner.invoke(main, ["stats", "--config", str(config)])
    assert stats_result.exit_code == 0
    stats = json.loads(stats_result.output)
    assert stats["facts"] == 72
    assert stats["per_predicate"] == {"P19": 24, "P2048": 24, "P569": 24}


def test_infer_links_command(tmp_path, ontology):
    # seed the log with a one-way spouse fact, then close the loop
    from factmill.store import FactLog
    from factmill.model import EntityRef
    from tests.conftest import make_fact

    config = _write_config(tmp_path, paths={"link_rules": str(FIXTURES / "link_rules.yaml")})
    log = FactLog(tmp_path / "factlog.ndjson", ontology)
    log.append_facts(
        [make_fact("Q100001", "has_spouse", EntityRef("Q100002"), confidence=0.95)], "seed"
    )
    result = CliRunner().invoke(main, ["infer-links", "--config", str(config)])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["inferred"] == 1 and payload["appended"] == 1


def test_rerun_is_idempotent(tmp_path):
    config = _write_config(tmp_path)
    runner = CliRunner()
    first = runner.invoke(main, ["run-batch", "--config", str(config), "--out",
                                 str(tmp_path / "r1.json")])
    second = runner.invoke(main, ["run-batch", "--config", str(config), "--out",
                                  str(tmp_path / "r2.json")])
    assert first.exit_code == 0 and second.exit_code == 0
    r1 = json.loads((tmp_path / "r1.json").read_text())
    r2 = json.loads((tmp_path / "r2.json").read_text())
    # second run recognizes every auto fact as already current: no appends
    assert r1["appended"] == 72
    assert r2["appended"] == 0
    assert r2["unchanged"] == 72
