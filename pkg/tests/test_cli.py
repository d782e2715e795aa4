import json

import pytest

from alctrie.analysis import prob_poisson_ge2
from alctrie.cli import build_parser, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    lines = [l for l in text.strip().split("\n") if l]
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


def test_predict_prints_both_predictors(capsys):
    code, out, _ = run_cli(capsys, "predict", "--n", "65536", "--p", "0.7",
                           "--alpha", "0.5")
    assert code == 0
    rows = {r["model"]: r for r in csv_rows(out)}
    closed = float(rows["fixed_n:closed_form"]["value"])
    calibrated = float(rows["fixed_n:calibrated"]["value"])
    assert abs(closed - calibrated) <= 3.0
    assert float(rows["fixed_n:depth_alpha_lc"]["value"]) == pytest.approx(
        0.4539, abs=1e-3)
    assert float(rows["fixed_n:depth_full_lc"]["value"]) == pytest.approx(
        0.9790, abs=1e-3)


def test_predict_symmetric_source_omits_depth_constants(capsys):
    code, out, _ = run_cli(capsys, "predict", "--n", "1024", "--p", "0.5",
                           "--alpha", "0.5")
    assert code == 0
    models = [r["model"] for r in csv_rows(out)]
    assert models == ["fixed_n:closed_form", "fixed_n:calibrated"]


def test_expect_symmetric_poisson_closed_form(capsys):
    code, out, _ = run_cli(capsys, "expect", "--p", "0.5", "--lambda", "1024",
                           "--k", "0..20")
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 21
    for row in rows:
        k = int(row["k"])
        assert float(row["value"]) == pytest.approx(
            prob_poisson_ge2(1024.0 * 2.0**-k), abs=1e-12)


def test_expect_single_level_and_fixed_n(capsys):
    code, out, _ = run_cli(capsys, "expect", "--p", "0.7", "--n", "64",
                           "--k", "0")
    assert code == 0
    rows = csv_rows(out)
    assert len(rows) == 1 and rows[0]["model"] == "fixed_n"
    assert float(rows[0]["value"]) == 1.0


def test_query_empty_keyfile(tmp_path, capsys):
    keys = tmp_path / "keys.txt"
    keys.write_text("# nothing here\n")
    queries = tmp_path / "queries.txt"
    queries.write_text("0101\n11\n")
    code, out, _ = run_cli(capsys, "query", "--keys", str(keys),
                           "--queries", str(queries))
    assert code == 0
    assert out == "none\nnone\n"


def test_query_cidr_match(tmp_path, capsys):
    keys = tmp_path / "keys.txt"
    keys.write_text("11.0.0.0/8\n10.0.0.0/16\n")
    queries = tmp_path / "queries.txt"
    queries.write_text("10.0.0.1/32\n")
    code, out, _ = run_cli(capsys, "query", "--keys", str(keys),
                           "--queries", str(queries), "--alpha", "0.5")
    assert code == 0
    assert out == "1,16\n"


def test_build_stats(tmp_path, capsys):
    keys = tmp_path / "keys.txt"
    keys.write_text("00\n01\n10\n11\n")
    code, out, _ = run_cli(capsys, "build", "--keys", str(keys),
                           "--alpha", "1.0", "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["keys"] == 4
    assert payload["node_count"] == 1
    assert payload["consumed_histogram"] == {"2": 1}
    assert payload["empty_slot_fraction"] == 0.0


def test_seed_determines_output(capsys):
    args = ("sim-fillup", "--n", "64", "--p", "0.7", "--alpha", "0.5",
            "--trials", "8", "--seed", "17", "--jobs", "1")
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    assert first == second
    _, third, _ = run_cli(capsys, "sim-fillup", "--n", "64", "--p", "0.7",
                          "--alpha", "0.5", "--trials", "8", "--seed", "18",
                          "--jobs", "1")
    assert third != first


def test_jobs_do_not_change_output(capsys):
    base = ("sim-depth", "--n", "32", "--p", "0.7", "--alpha", "0.5",
            "--trials", "6", "--seed", "3")
    _, serial, _ = run_cli(capsys, *base, "--jobs", "1")
    _, parallel, _ = run_cli(capsys, *base, "--jobs", "2")
    assert serial == parallel


def test_format_changes_encoding_not_values(capsys):
    base = ("sim-fillup", "--n", "32", "--p", "0.7", "--alpha", "0.5",
            "--trials", "5", "--seed", "11", "--jobs", "1")
    _, as_csv, _ = run_cli(capsys, *base, "--format", "csv")
    _, as_json, _ = run_cli(capsys, *base, "--format", "json")
    payload = json.loads(as_json)
    csv_f = [line.split(",")[2] for line in as_csv.strip().split("\n")[1:]]
    json_f = [str(row[2]) for row in payload["rows"]]
    assert csv_f == json_f


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as err:
        main(["expect", "--p", "0.5", "--k", "0..3"])  # missing --n/--lambda
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["bogus-command"])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["predict", "--n", "100", "--lambda", "100", "--p", "0.7",
              "--alpha", "0.5"])
    assert err.value.code == 2


def test_runtime_error_exits_one(tmp_path, capsys):
    code = main(["build", "--keys", str(tmp_path / "missing.txt"),
                 "--alpha", "0.5"])
    assert code == 1
    err = capsys.readouterr().err
    assert "error:" in err


def test_parse_error_reports_line(tmp_path, capsys):
    keys = tmp_path / "keys.txt"
    keys.write_text("01\nnot-a-key\n")
    code = main(["build", "--keys", str(keys), "--alpha", "0.5"])
    assert code == 1
    assert "line 2" in capsys.readouterr().err


def test_help_documents_every_flag():
    parser = build_parser()
    expected = {
        "predict": ["--n", "--lambda", "--p", "--alpha", "--format"],
        "expect": ["--n", "--lambda", "--p", "--k", "--alpha", "--format"],
        "sim-fillup": ["--n", "--lambda", "--p", "--alpha", "--trials",
                       "--seed", "--jobs", "--format"],
        "sim-depth": ["--n", "--p", "--alpha", "--trials", "--seed", "--jobs",
                      "--format"],
        "build": ["--keys", "--alpha", "--format"],
        "query": ["--keys", "--queries", "--alpha", "--format"],
    }
    subactions = next(
        a for a in parser._actions
        if isinstance(a, type(parser._subparsers._group_actions[0]))
    )
    for name, flags in expected.items():
        help_text = subactions.choices[name].format_help()
        for flag in flags:
            assert flag in help_text, f"{name} help missing {flag}"
