import csv
import io
import json
import math
import subprocess
import sys

import pytest

from ecsmetro import __version__
from ecsmetro import io as eio
from ecsmetro.cli import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK, ConfigError, main, resolve_config


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def data_lines(text):
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


def csv_rows(text):
    return list(csv.DictReader(data_lines(text)))


def test_qfi_qwp(capsys):
    code, out, _ = run(["qfi", "--state", "qwp", "--n-bar", "10", "--loss", "0"], capsys)
    assert code == EXIT_OK
    row = csv_rows(out)[0]
    assert float(row["qfi"]) == pytest.approx(110.0, rel=1e-14)
    assert float(row["delta_phi_min"]) == pytest.approx(110**-0.5)


def test_qfi_noon_json(capsys):
    code, out, _ = run(["qfi", "--state", "noon", "--N", "10", "--format", "json"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["rows"][0]["qfi"] == 100.0
    assert doc["meta"]["version"] == __version__
    assert doc["meta"]["config"]["N"] == 10


@pytest.mark.parametrize(
    "argv",
    [
        ["qfi", "--state", "ecs"],
        ["qfi", "--state", "ecs", "--alpha", "1", "--n-bar", "2"],
        ["qfi", "--state", "cat", "--alpha", "1"],
        ["qfi", "--state", "noon"],
        ["qfi", "--alpha", "1", "--loss", "1.5"],
        ["qfi", "--alpha", "1", "--phi", "0.1", "--phi1", "0.2"],
        ["sample", "--scheme", "homodyne", "--alpha", "1", "--phi", "0.3", "--count", "5"],
        ["sample", "--scheme", "homodyne", "--alpha", "1", "--count", "5", "--seed", "1"],
        ["sweep", "--alpha", "1", "--scheme", "parity", "--from", "0", "--to", "1"],
        ["sweep", "--alpha", "1"],
        ["wigner", "--alpha", "1", "--phi1", "0", "--phi2", "0", "--loss", "0.1"],
        ["qfi", "--alpha", "1", "--format", "xml"],
        ["qfi", "--state", "noon", "--N", "3", "--loss", "0.1"],
    ],
)
def test_config_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == EXIT_CONFIG
    assert "configuration error" in err


@pytest.mark.parametrize("argv", [["frobnicate"], ["qfi", "--alpha", "abc"], []])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == EXIT_CONFIG


def test_missing_amplitude_message(capsys):
    code, _, err = run(["qfi", "--state", "ecs"], capsys)
    assert code == EXIT_CONFIG
    assert "--alpha or --n-bar" in err


def test_numerical_failure_exit_3(capsys, monkeypatch):
    import ecsmetro.cli as cli
    from ecsmetro.fisher_c import QuadratureError

    def boom(*a, **k):
        raise QuadratureError("did not converge")

    monkeypatch.setattr(cli, "precision_sweep", boom)
    code, _, err = run(["sweep", "--alpha", "1", "--from", "0", "--to", "1", "--points", "3"], capsys)
    assert code == EXIT_NUMERICAL
    assert "numerical failure" in err


def test_io_failure_exit_4(capsys, tmp_path):
    code, _, _ = run(["qfi", "--alpha", "1", "--output", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == EXIT_IO
    code, _, _ = run(["qfi", "--alpha", "1", "--config", str(tmp_path / "nope.json")], capsys)
    assert code == EXIT_IO


def test_sweep_three_scheme_layout(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    argv = [
        "sweep", "--state", "ecs", "--n-bar", "10", "--loss", "0.05", "--axis", "phi",
        "--from", "0.05", "--to", "3.09", "--points", "16", "--scheme", "homodyne,counting,quantum",
        "--output", str(out),
    ]
    code, _, _ = run(argv, capsys)
    assert code == EXIT_OK
    text = out.read_text()
    meta = eio.read_meta(io.StringIO(text))
    assert meta["tool"] == "ecsmetro" and meta["version"] == __version__
    assert meta["config"]["n_bar"] == 10.0 and meta["config"]["points"] == 16
    rows = eio.read_reports_csv(io.StringIO(text))
    assert len(rows) == 48
    assert {r["scheme"] for r in rows} == {"homodyne", "counting", "quantum"}
    hom = [r for r in rows if r["scheme"] == "homodyne"]
    assert max(r["cfi"] for r in hom) == pytest.approx(min(r["cfi"] for r in hom), rel=1e-10)


def test_sweep_n_bar_json_with_inf(capsys):
    code, out, _ = run(
        ["sweep", "--n-bar", "10", "--loss", "0.05", "--grid", "0,1.0", "--scheme", "counting", "--format", "json"],
        capsys,
    )
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["rows"][0]["delta_phi"] == {"special": "inf"}
    assert isinstance(doc["rows"][1]["delta_phi"], float)


def test_sample_and_mle(tmp_path, capsys):
    samples = tmp_path / "s.csv"
    argv = ["sample", "--scheme", "homodyne", "--state", "ecs", "--alpha", "3", "--phi", "0.5",
            "--loss", "0", "--count", "1000", "--seed", "7", "--output", str(samples)]
    assert run(argv, capsys)[0] == EXIT_OK
    text = samples.read_text()
    assert len(data_lines(text)) == 1001
    assert data_lines(text)[0] == "x_plus,x_minus"
    code, out, _ = run(["mle", "--scheme", "homodyne", "--alpha", "3", "--samples", str(samples)], capsys)
    assert code == EXIT_OK
    row = csv_rows(out)[0]
    assert abs(float(row["phi_hat"]) - 0.5) < 5 / math.sqrt(1000 * 90)
    assert row["multimodal"] == "0"


def test_sample_jsonl_qwp(capsys):
    code, out, _ = run(["sample", "--scheme", "counting", "--state", "qwp", "--n-bar", "4", "--phi", "0.2",
                        "--count", "5", "--seed", "1", "--format", "jsonl"], capsys)
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert "meta" in json.loads(lines[0])
    assert set(json.loads(lines[1])) == {"m", "n", "qubit_x"}
    assert len(lines) == 6


def test_campaign_summary(capsys):
    code, out, _ = run(["mle-campaign", "--scheme", "homodyne", "--alpha", "2", "--phi", "0.5", "--M", "100",
                        "--trials", "100", "--seed", "3", "--threads", "2"], capsys)
    assert code == EXIT_OK
    row = csv_rows(out)[0]
    assert 0.7 < float(row["crb_ratio"]) < 1.4
    assert row["trials"] == "100"


def test_wigner_grid_json(tmp_path, capsys):
    out = tmp_path / "w.json"
    code, _, _ = run(["wigner", "--alpha", "3", "--phi1", "0.5", "--phi2", "0", "--format", "json",
                      "--output", str(out)], capsys)
    assert code == EXIT_OK
    doc = json.loads(out.read_text())
    assert len(doc["x_axis"]) == 400 and len(doc["rows"]) == 400
    assert doc["meta"]["total"] == pytest.approx(1.0, abs=1e-6)
    assert doc["x_axis"][0] == pytest.approx(-7.0)


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"state": "qwp", "alpha": 2.0, "loss_p": 0.1, "M": 4}))
    code, out, _ = run(["qfi", "--config", str(cfg)], capsys)
    assert code == EXIT_OK
    assert float(csv_rows(out)[0]["n_bar"]) == pytest.approx(4.0)
    # a flag amplitude replaces the file's amplitude instead of clashing with it
    code, out, _ = run(["qfi", "--config", str(cfg), "--n-bar", "10", "--loss", "0"], capsys)
    assert code == EXIT_OK
    row = csv_rows(out)[0]
    assert float(row["qfi"]) == pytest.approx(110.0)
    assert row["M"] == "4"


def test_config_file_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    for content in ["[1, 2]", "{not json", json.dumps({"alpah": 1.0}), json.dumps({"alpha": [1]}),
                    json.dumps({"alpha": "x"}), json.dumps({"M": 1.5, "alpha": 1})]:
        bad.write_text(content)
        code, _, err = run(["qfi", "--config", str(bad)], capsys)
        assert code == EXIT_CONFIG, content
        assert "configuration error" in err


def test_resolve_config_direct():
    cfg = resolve_config("qfi", {"alpha": 1.0}, {"n_bar": 5.0, "phi1": 0.1, "phi2": 0.0})
    assert cfg.alpha == 1.0 and cfg.n_bar is None
    cfg = resolve_config("qfi", {"phi": 0.3}, {"alpha": 1.0, "phi1": 0.1})
    assert cfg.phi1 is None and cfg.params().phi == pytest.approx(0.3)
    with pytest.raises(ConfigError):
        resolve_config("sample", {"alpha": 1.0, "phi": 0.1, "scheme": "homodyne", "count": 3})


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "--scheme", "homodyne", "--alpha", "3", "--phi", "0.5", "--count", "200", "--seed", "7"],
        ["sample", "--scheme", "counting", "--state", "qwp", "--alpha", "2", "--phi", "0.5", "--chi", "0.1",
         "--count", "200", "--seed", "7", "--format", "jsonl"],
        ["sweep", "--n-bar", "10", "--loss", "0.05", "--from", "0.05", "--to", "3.09", "--points", "8"],
        ["mle-campaign", "--scheme", "counting", "--alpha", "2", "--phi", "0.6", "--loss", "0.02", "--M", "100",
         "--trials", "100", "--seed", "11", "--window-lo", "0", "--window-hi", "1.5"],
        ["wigner", "--alpha", "1.5", "--phi", "0.4", "--resolution", "40", "--format", "json"],
    ],
)
def test_echoed_config_reproduces_payload(argv, tmp_path, capsys):
    first = tmp_path / "first.out"
    second = tmp_path / "second.out"
    assert run(argv + ["--output", str(first)], capsys)[0] == EXIT_OK
    fmt = argv[argv.index("--format") + 1] if "--format" in argv else "csv"
    meta, _ = split_output(first.read_text(), fmt)
    echoed = tmp_path / "echo.json"
    echoed.write_text(json.dumps(meta["config"]))
    assert run([argv[0], "--config", str(echoed), "--output", str(second)], capsys)[0] == EXIT_OK
    assert split_output(first.read_text(), fmt)[1] == split_output(second.read_text(), fmt)[1]


def split_output(text, fmt):
    """(metadata, numeric body) of a command output."""
    if fmt == "json":
        doc = json.loads(text)
        return doc.pop("meta"), json.dumps(doc, sort_keys=True)
    if fmt == "jsonl":
        head, body = text.split("\n", 1)
        return json.loads(head)["meta"], body
    return eio.read_meta(io.StringIO(text)), "\n".join(data_lines(text))


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "ecsmetro", "qfi", "--state", "noon", "--N", "3"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0
    assert csv_rows(res.stdout)[0]["qfi"] == "9"
    res = subprocess.run([sys.executable, "-m", "ecsmetro", "qfi"], capture_output=True, text=True, check=False)
    assert res.returncode == EXIT_CONFIG
