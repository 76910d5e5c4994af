import json

import jsonschema
import numpy as np
import pytest

from heavytail.cli import EXIT_COMPUTATION, EXIT_INPUT, EXIT_OK, EXIT_USAGE, main, parse_levels
from heavytail.report import PLOT_FILES, load_schema

HEADER = "tender_id,authority_id,winner_id,price,n_bidders,date\n"


def run(*argv):
    return main([str(a) for a in argv])


def read_tsv(path):
    lines = path.read_text().splitlines()
    return lines[0].split("\t"), np.array([[float(v) for v in row.split("\t")] for row in lines[1:]])


def test_simulate_is_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        assert run("simulate", "--family", "pareto", "--alpha", 1.2, "-n", 50, "--seed", 9, "--output", tmp_path / name) == 0
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    assert run("simulate", "--family", "pareto", "--alpha", 1.2, "--x-min", 3, "-n", 1, "--seed", 1) == 0
    assert float(capsys.readouterr().out) >= 3.0


@pytest.mark.parametrize(
    "extra",
    [
        ["--family", "exponential", "--beta", 0.5],
        ["--family", "q_exponential", "--q", 1.3, "--scale", 2.0],
        ["--family", "boltzmann", "--levels", "1,2,3,4", "--target", 2.0],
        ["--family", "tsallis", "--levels", "linear:1:50:50", "--target", 5.0, "--q", 0.6],
    ],
)
def test_simulate_families(tmp_path, extra):
    out = tmp_path / "s.txt"
    assert run("simulate", *extra, "-n", 100, "--seed", 2, "--output", out) == 0
    assert len(out.read_text().split()) == 100


def test_simulate_bad_parameters():
    assert run("simulate", "--family", "pareto", "--alpha", -1, "-n", 5, "--seed", 1) == EXIT_USAGE
    assert run("simulate", "--family", "pareto", "--alpha", 1, "-n", 0, "--seed", 1) == EXIT_USAGE


def test_simulate_then_fit(tmp_path, capsys):
    data = tmp_path / "s.txt"
    run("simulate", "--family", "pareto", "--alpha", 1.236, "-n", 20_000, "--seed", 4, "--output", data)
    assert run("fit", "--input", data, "--no-standardize") == 0
    result = json.loads(capsys.readouterr().out)
    assert result["scale"] is None and result["n_tail"] == 20_000
    assert result["fits"][0]["exponent"] == pytest.approx(1.236, abs=0.05)


def test_fit_exponential(tmp_path, capsys):
    data = tmp_path / "b.txt"
    run("simulate", "--family", "boltzmann", "--levels", "linear:1:60:60", "--target", 4.2, "-n", 20_000, "--seed", 3, "--output", data)
    assert run("fit", "--input", data, "--family", "exponential") == 0
    fits = json.loads(capsys.readouterr().out)["fits"]
    assert fits[0]["method"] == "regression" and fits[0]["exponent"] > 0


def test_maxent_symmetric_is_uniform(tmp_path, capsys):
    tsv = tmp_path / "p.tsv"
    assert run("maxent", "--levels", "1,2,3", "--target", 2, "--tsv", tsv) == 0
    sol = json.loads(capsys.readouterr().out)
    assert sol["probabilities"] == pytest.approx([1 / 3] * 3, rel=1e-15)
    assert tsv.read_text().startswith("level\tprobability\n")


def test_maxent_tsallis_near_one_matches_shannon(capsys):
    run("maxent", "--levels", "log:1:100:20", "--target", 10)
    shannon = json.loads(capsys.readouterr().out)["probabilities"]
    run("maxent", "--levels", "log:1:100:20", "--target", 10, "--entropy", "tsallis", "--q", 1.000001)
    tsallis = json.loads(capsys.readouterr().out)["probabilities"]
    assert np.max(np.abs(np.subtract(shannon, tsallis))) < 1e-3


def test_maxent_infeasible(capsys):
    assert run("maxent", "--levels", "1,2,3", "--target", 3.5) == EXIT_COMPUTATION
    assert "infeasible" in capsys.readouterr().err


def test_maxent_usage_errors():
    assert run("maxent", "--levels", "1,x", "--target", 1.5) == EXIT_USAGE
    assert run("maxent", "--target", 1.5) == EXIT_USAGE
    assert run("maxent", "--levels", "cubic:1:2:3", "--target", 1.5) == EXIT_USAGE
    assert parse_levels("linear:1:3:3").tolist() == [1.0, 2.0, 3.0]


def test_missing_required_flag_exits_with_usage():
    with pytest.raises(SystemExit) as info:
        main(["analyze", "--input", "x.csv"])
    assert info.value.code == EXIT_USAGE


def test_empty_input_writes_nothing(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    out = tmp_path / "out"
    assert run("analyze", "--input", empty, "--seed", 1, "--out-dir", out) == EXIT_INPUT
    assert not out.exists() or not any(out.iterdir())


def test_missing_file(tmp_path):
    assert run("analyze", "--input", tmp_path / "nope.csv", "--seed", 1, "--out-dir", tmp_path / "o") == EXIT_INPUT


def test_header_only_input(tmp_path):
    path = tmp_path / "h.csv"
    path.write_text(HEADER)
    assert run("analyze", "--input", path, "--seed", 1, "--out-dir", tmp_path / "o") == EXIT_INPUT


def test_series_failures_name_the_series(tmp_path, capsys):
    path = tmp_path / "tiny.csv"
    path.write_text(HEADER + "t1,A1,W1,5e6,3,\nt2,A2,W2,6e6,2,\n")
    assert run("analyze", "--input", path, "--seed", 1, "--replicates", 100, "--out-dir", tmp_path / "o") == EXIT_COMPUTATION
    assert "revenues" in capsys.readouterr().err


@pytest.fixture(scope="module")
def analyzed(small_register, tmp_path_factory):
    root = tmp_path_factory.mktemp("analyze")
    dirs = {}
    for name, workers in (("one", 1), ("again", 1), ("four", 4)):
        dirs[name] = root / name
        code = run(
            "analyze", "--input", small_register, "--seed", 11, "--replicates", 500,
            "--workers", workers, "--out-dir", dirs[name],
        )
        assert code == EXIT_OK
    return dirs


def test_analyze_is_reproducible(analyzed):
    for name in ("report.json", *PLOT_FILES):
        first = (analyzed["one"] / name).read_bytes()
        assert first == (analyzed["again"] / name).read_bytes()
        assert first == (analyzed["four"] / name).read_bytes()


def test_report_matches_schema(analyzed):
    report = json.loads((analyzed["one"] / "report.json").read_text())
    jsonschema.validate(report, load_schema())
    assert report["config"]["replicates"] == 500
    assert "workers" not in report["config"]
    assert report["series"]["bidders"]["zipf"] is None


def test_schema_rejects_broken_report(analyzed):
    report = json.loads((analyzed["one"] / "report.json").read_text())
    del report["series"]["revenues"]["fits"]
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(report, load_schema())


def test_plot_files(analyzed):
    for name in PLOT_FILES:
        header, rows = read_tsv(analyzed["one"] / name)
        assert len(header) == 2 and rows.shape[0] > 0
        x, y = rows[:, 0], rows[:, 1]
        if name.endswith("cdf.tsv"):
            assert np.all(np.diff(x) >= 0) and np.all(np.diff(y) <= 0)
            assert y[0] == 1.0 and y[-1] > 0
        elif name.endswith("zipf.tsv"):
            assert np.array_equal(x, np.arange(1, x.size + 1)) and np.all(np.diff(y) <= 0)
        else:
            assert np.all(np.diff(x) > 0) and np.sum(y) == pytest.approx(1.0)


def test_staging_leaves_no_debris(analyzed):
    assert sorted(p.name for p in analyzed["one"].iterdir()) == sorted(["report.json", *PLOT_FILES])
