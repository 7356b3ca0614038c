"""Command-line interface: flags, report schema, exit codes, determinism."""

import json


from grafcet_lint.cli import main


def _run(capsys, *args):
    code = main(list(args))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_text_report_and_exit_code(corpus, capsys):
    code, out, _ = _run(capsys, "analyze", str(corpus("fig5.grafcet.json")))
    assert code == 0
    assert "covered=True, bound=2" in out
    assert "no findings" in out


def test_findings_fail_the_run(corpus, capsys):
    code, out, _ = _run(capsys, "analyze", str(corpus("fig2_g2.grafcet.json")))
    assert code == 1
    assert "[error] race" in out


def test_fail_on_error_ignores_warnings(corpus, capsys):
    path = str(corpus("fig2_g7.grafcet.json"))
    assert _run(capsys, "analyze", path)[0] == 1
    assert _run(capsys, "analyze", path, "--fail-on", "error")[0] == 0


def test_missing_file_is_usage_error(capsys):
    code, _, err = _run(capsys, "analyze", "missing.json")
    assert code == 2
    assert "missing.json" in err


def test_malformed_spec_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.grafcet.json"
    bad.write_text("{not json")
    code, _, err = _run(capsys, "analyze", str(bad))
    assert code == 2
    assert "invalid JSON" in err


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == 2


def test_json_report_schema(corpus, capsys):
    code, out, _ = _run(capsys, "analyze", str(corpus("fig5.grafcet.json")),
                        "--format", "json", "--dump-invariants")
    assert code == 0
    report = json.loads(out)
    assert report["schema_version"] == 1
    assert len(report["spec"]["sha256"]) == 64
    partial = report["partials"]["c"]
    assert partial["boundedness"] == {
        "covered": True, "bound": 2, "uncovered_steps": [],
        "per_step_bound": {"s1": 2, "s2": 2, "s3": 1, "s4": 1, "s5": 1},
    }
    assert partial["s_invariants"] == [
        {"s1": 2, "s2": 2, "s3": 1, "s4": 1, "s5": 1}]
    assert partial["t_invariants"] == []
    assert report["variables"]["k"] == {"type": "int", "lo": 0, "hi": 4}
    assert report["execution_bounds"]["c.actions[0]"]["count"] == 4


def test_json_report_is_deterministic(corpus, capsys):
    args = ("analyze", str(corpus("g_rit.grafcet.json")), "--format", "json",
            "--no-timings", "--jobs", "1")
    _, first, _ = _run(capsys, *args)
    _, second, _ = _run(capsys, *args)
    assert first == second
    assert "timings_ms" not in json.loads(first)


def test_infinite_bounds_serialize(corpus, capsys):
    _, out, _ = _run(capsys, "analyze", str(corpus("fig2_g7.grafcet.json")),
                     "--format", "json")
    report = json.loads(out)
    assert report["execution_bounds"]["G7.actions[0]"]["count"] == "inf"


def test_queries_sidecar_and_naive_flag(corpus, capsys):
    spec = str(corpus("g_rit.grafcet.json"))
    queries = str(corpus("g_rit.queries.json"))
    code, out, _ = _run(capsys, "analyze", spec, "--queries", queries,
                        "--fail-on", "error")
    assert code == 0
    assert "query-violation" not in out
    code, out, _ = _run(capsys, "analyze", spec, "--queries", queries,
                        "--naive", "--fail-on", "error")
    assert code == 1
    assert "query-violation" in out


def test_queries_embedded_in_spec(tmp_path, corpus, capsys):
    doc = json.loads(corpus("fig5.grafcet.json").read_text())
    doc["queries"] = [{"name": "q", "kind": "never-concurrent",
                       "steps": ["c.s3", "c.s4"]}]
    path = tmp_path / "embedded.grafcet.json"
    path.write_text(json.dumps(doc))
    code, out, _ = _run(capsys, "analyze", str(path), "--fail-on", "error")
    assert code == 1
    assert "query-violation" in out


def test_bad_queries_file(tmp_path, corpus, capsys):
    q = tmp_path / "q.json"
    q.write_text(json.dumps({"queries": [{"kind": "nope"}]}))
    code, _, err = _run(capsys, "analyze", str(corpus("fig5.grafcet.json")),
                        "--queries", str(q))
    assert code == 2
    assert "unknown kind" in err


def test_parallel_jobs_agree_with_serial(corpus, capsys):
    spec = str(corpus("g_rit.grafcet.json"))
    _, serial, _ = _run(capsys, "analyze", spec, "--format", "json",
                        "--no-timings", "--jobs", "1")
    _, parallel, _ = _run(capsys, "analyze", spec, "--format", "json",
                          "--no-timings", "--jobs", "4")
    assert serial == parallel


def test_oracle_subcommand(corpus, capsys):
    code, out, _ = _run(capsys, "oracle", str(corpus("fig5.grafcet.json")))
    assert code == 0
    facts = json.loads(out)
    assert "c.s5" in facts["reachable"]
    assert ["c.s3", "c.s4"] in facts["concurrent_pairs"]
    assert facts["var_values"]["k"] == [0, 1]
