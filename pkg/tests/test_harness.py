import json

import numpy as np
import pytest

from drsub.harness import ConfigError, dump_config, instance_seed, load_config, parse_config
from drsub.harness.cli import main, parse_spec
from drsub.harness.io import csv_body, read_csv, read_instance, render_csv, write_instance
from drsub.instances import GeneratorSpec, generate

OFFLINE = """
[experiment]
kind = offline-quadratic
master_seed = 3
repeats = 2

[generator]
family = quadratic_uniform
n = 3
m = 2

[algorithm]
T = 20
"""


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_config_defaults_and_round_trip():
    cfg = parse_config(OFFLINE)
    assert cfg.kind == "offline-quadratic" and cfg["algorithm"]["T"] == 20
    assert cfg["experiment"]["repeats"] == 2 and cfg["algorithm"]["delta"] is None
    again = parse_config(dump_config(cfg))
    assert again == cfg


@pytest.mark.parametrize("text", [
    "[experiment]\nkind = offline-quadratic\n[bogus]\nx = 1\n",
    "[experiment]\nkind = offline-quadratic\ncolour = red\n",
    "[experiment]\nkind = sideways\n",
    "[experiment]\nrepeats = 3\n",
    "[experiment]\nkind = verify\n[verify]\ntrials = 0\n",
    "[experiment]\nkind = offline-quadratic\n[algorithm]\nT = 1\n",
    "[experiment]\nkind = offline-quadratic\nrepeats = many\n",
    "not an ini file",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_set_validates():
    cfg = parse_config(OFFLINE)
    with pytest.raises(ConfigError):
        cfg.set("algorithm", "T", 0)
    with pytest.raises(ConfigError):
        cfg.set("algorithm", "nope", 1)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


def test_instance_seed_frozen():
    assert instance_seed(0, "offline-quadratic", 0) == 8903850174595726011
    assert instance_seed(7, "exp", 3) == 7377848143637427908
    assert instance_seed(7, "exp", 3) != instance_seed(7, "exp", 4)
    assert 0 <= instance_seed(2**64 - 1, "x", 10**9) < 2**64


def test_csv_header_and_body():
    cfg = parse_config(OFFLINE)
    text = render_csv(cfg, [{"experiment": "e", "value": 0.1, "n": np.int64(3)}], trailer=["status: complete"])
    lines = text.split("\n")
    assert lines[0] == "# drsub 0.1.0 csv-schema 1"
    assert "\r" not in text and text.endswith("\n")
    assert "kind = offline-quadratic" in text
    assert csv_body(text).splitlines()[0].startswith("experiment,row_kind,instance")
    assert csv_body(text).splitlines()[1] == "e,,,,3,,,,0.1,,,,"


def test_run_offline_and_overrides(tmp_path):
    cfg = write(tmp_path, OFFLINE)
    out = tmp_path / "r.csv"
    assert main(["run", cfg, "--out", str(out), "--repeats", "1", "--T", "5", "--seed", "9"]) == 0
    comments, rows = read_csv(out)
    assert "# master_seed = 9" in comments and comments[-1] == "# status: complete"
    summaries = [r for r in rows if r["row_kind"] == "summary"]
    assert {r["algorithm"] for r in summaries} == {"frank_wolfe", "projected_gradient_ascent"}
    assert all(r["t"] == "5" for r in summaries)
    assert all(r["wall_time"] == "" for r in rows)
    fw = next(r for r in summaries if r["algorithm"] == "frank_wolfe")
    assert "floor=" in fw["note"] and 0 < float(fw["ratio_vs_oracle"]) <= 1 + 1e-9
    assert sum(r["row_kind"] == "oracle" for r in rows) == 1
    assert sum(r["row_kind"] == "iteration" for r in rows) == 12


def test_run_is_deterministic(tmp_path):
    cfg = write(tmp_path, OFFLINE)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", cfg, "--out", str(a), "--T", "5"]) == 0
    assert main(["run", cfg, "--out", str(b), "--T", "5"]) == 0
    # headers differ only in the out path
    assert csv_body(a.read_text()) == csv_body(b.read_text())
    assert a.read_text().replace("a.csv", "b.csv") == b.read_text()


def test_run_partial_output(tmp_path):
    cfg = write(tmp_path, f"""
[experiment]
kind = offline-revenue
repeats = 2
[generator]
family = revenue_graph
graph = {tmp_path / "missing.txt"}
""")
    out = tmp_path / "r.csv"
    assert main(["run", cfg, "--out", str(out)]) == 1
    comments, rows = read_csv(out)
    assert comments[-1].startswith("# status: partial") and rows == []


def test_cli_usage_errors(tmp_path, capsys):
    assert main([]) == 2
    assert main(["run"]) == 2
    assert main(["run", str(tmp_path / "missing.ini")]) == 2
    assert main(["verify", write(tmp_path, OFFLINE)]) == 2
    bad = write(tmp_path, "[experiment]\nkind = verify\n[verify]\ntrials = 0\n", "v.ini")
    assert main(["verify", bad]) == 2
    assert "trials" in capsys.readouterr().err
    assert main(["run", write(tmp_path, OFFLINE), "--T", "1"]) == 2


def test_verify_cli(tmp_path, capsys):
    text = "[experiment]\nkind = verify\nout = {out}\n[verify]\ntrials = 20\nn = 3\nfw_runs = 1\n"
    ok = write(tmp_path, text.format(out=tmp_path / "v.txt"), "v.ini")
    assert main(["verify", ok]) == 0
    report = capsys.readouterr().out
    assert report.splitlines()[-1].endswith("suites passed") and "FAIL" not in report
    bad = write(tmp_path, text.format(out=tmp_path / "w.txt") + "inject_violation = true\n", "w.ini")
    assert main(["verify", bad]) == 1
    report = capsys.readouterr().out
    assert "FAIL" in report and "witness" in report


def test_project_bench(tmp_path):
    cfg = write(tmp_path, f"""
[experiment]
kind = project-bench
out = {tmp_path / "b.csv"}
[bench]
sizes = 1, 4
trials = 30
""")
    assert main(["project-bench", cfg]) == 0
    _, rows = read_csv(tmp_path / "b.csv")
    assert len(rows) == 6 and all(r["total_seconds"] == "" for r in rows)
    assert all(float(r["max_disagreement"]) == 0.0 for r in rows if r["n"] == "1")
    assert all(float(r["max_disagreement"]) <= 1e-8 for r in rows)


def test_gen_and_instance_round_trip(tmp_path):
    out = tmp_path / "i.json"
    assert main(["gen", "quadratic_uniform:n=3,m=2,seed=4", "--out", str(out)]) == 0
    F, P = read_instance(out)
    G, Q = generate(GeneratorSpec("quadratic_uniform", 3, 2, 4))
    assert P == Q and np.array_equal(F.H, G.H) and F.c == G.c
    assert json.loads(out.read_text())["generator"]["seed"] == 4
    for spec in (GeneratorSpec("softmax_uniform", 3, 2, 1), GeneratorSpec("revenue_synthetic", 8, seed=1)):
        F, P = generate(spec)
        write_instance(tmp_path / "j.json", F, P, spec)
        F2, P2 = read_instance(tmp_path / "j.json")
        x = np.full(F.dim, 0.1)
        assert F2.value(x) == F.value(x) and P2 == P
    assert main(["gen", "nonsense:n=3", "--out", str(out)]) == 2
    assert main(["gen", "quadratic_uniform:n", "--out", str(out)]) == 2


def test_parse_spec_from_config(tmp_path):
    spec = parse_spec(write(tmp_path, OFFLINE))
    assert (spec.family, spec.n, spec.m, spec.seed) == ("quadratic_uniform", 3, 2, 3)


def test_worker_count_does_not_change_body(tmp_path):
    cfg = write(tmp_path, OFFLINE)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", cfg, "--out", str(a), "--T", "5"]) == 0
    par = write(tmp_path, OFFLINE.replace("repeats = 2", "repeats = 2\nworkers = 2"), "p.ini")
    assert main(["run", par, "--out", str(b), "--T", "5"]) == 0
    assert csv_body(a.read_text()) == csv_body(b.read_text())
