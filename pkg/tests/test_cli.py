import csv
import io
import json

import pytest
from click.testing import CliRunner

from dipolar_media import __version__
from dipolar_media.cli import COMMANDS, main
from dipolar_media.emission import decay_breakdown_mg


def run(*args):
    return CliRunner().invoke(main, list(args), catch_exceptions=False)


def parse_csv(text):
    comments = [line for line in text.splitlines() if line.startswith("#")]
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    rows = list(csv.DictReader(io.StringIO(body)))
    header = body.splitlines()[0].split(",") if body else []
    return comments, header, rows


def test_decay_csv_header_and_values():
    res = run("decay", "--eps-re", "1.1", "--zeta", "0.1")
    assert res.exit_code == 0
    comments, header, rows = parse_csv(res.output)
    assert comments[:3] == ["# tool: dipolar-media", f"# version: {__version__}",
                            "# command: decay"]
    config = json.loads(comments[3].removeprefix("# config: "))
    assert config == {"chi": None, "eps-im": 0.0, "eps-re": 1.1, "order": 5, "zeta": 0.1}
    assert comments[-1].startswith("# units: coherent=rate/ref")
    assert header == [c for c, _ in COMMANDS["decay"].columns]
    expected = decay_breakdown_mg(1.1, 0.1)
    assert float(rows[0]["total"]) == expected.total  # 17 significant digits round-trip
    assert float(rows[0]["coherent"]) == expected.coherent


@pytest.mark.parametrize("name", sorted(COMMANDS))
def test_every_command_has_help(name):
    res = run(name, "--help")
    assert res.exit_code == 0
    for p in COMMANDS[name].params:
        assert f"--{p.name}" in res.output


def test_chi_sweep_rows():
    res = run("sweep", "--target", "decay", "--axis", "chi",
              "--values", "0,0.05,0.1,0.15,0.2,0.25", "--set", "zeta=0.1")
    assert res.exit_code == 0
    _, header, rows = parse_csv(res.output)
    assert len(rows) == 6
    assert header[0] == "axis_value" and header[-1] == "error"
    assert float(rows[0]["coherent"]) == 1.0
    totals = [float(r["total"]) for r in rows]
    assert totals == sorted(totals)
    assert all(r["error"] == "" for r in rows)


def test_empty_sweep_is_header_only():
    res = run("sweep", "--target", "decay", "--axis", "chi", "--values", "",
              "--set", "zeta=0.1")
    assert res.exit_code == 0
    _, header, rows = parse_csv(res.output)
    assert rows == [] and header[0] == "axis_value"


def test_sweep_records_failures_per_row():
    res = run("sweep", "--target", "decay", "--axis", "chi", "--values", "0.1,5",
              "--set", "zeta=0.1")
    assert res.exit_code == 0
    _, _, rows = parse_csv(res.output)
    assert rows[0]["error"] == ""
    assert rows[1]["error"].startswith("SeriesRadiusError")


def test_unknown_config_key_exits_with_config_code(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"eps-re": 1.1, "zeta": 0.1, "bogus": 1}))
    res = CliRunner().invoke(main, ["decay", "--config", str(cfg)])
    assert res.exit_code == 2
    report = json.loads(res.stderr.strip().splitlines()[-1])
    assert report["error"] == "ConfigError" and "bogus" in report["message"]


def test_missing_required_value_exits_with_config_code():
    res = CliRunner().invoke(main, ["decay", "--zeta", "0.1"])
    assert res.exit_code == 2


def test_numerical_failure_exit_code():
    res = CliRunner().invoke(main, ["gamma", "--chi", "5", "--zeta", "0.1"])
    assert res.exit_code == 3


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"eps-re": 1.2, "zeta": 0.1}))
    from_file = run("decay", "--config", str(cfg), "--format", "json")
    override = run("decay", "--config", str(cfg), "--eps-re", "1.1", "--format", "json")
    a = json.loads(from_file.output)
    b = json.loads(override.output)
    assert a["meta"]["config"]["eps-re"] == 1.2
    assert b["meta"]["config"]["eps-re"] == 1.1
    assert b["rows"][0]["total"] == decay_breakdown_mg(1.1, 0.1).total


def test_json_output_round_trips_config(tmp_path):
    first = json.loads(run("pressure", "--preset", "potassium", "--xi", "0.49",
                           "--rho-m3", "1e22", "--format", "json").output)
    cfg = tmp_path / "again.json"
    cfg.write_text(json.dumps(first["meta"]["config"]))
    second = json.loads(run("pressure", "--config", str(cfg), "--format", "json").output)
    assert second == first


def test_simulate_is_deterministic(tmp_path):
    args = ["simulate", "--n", "20", "--samples", "4", "--seed", "3"]
    a = run(*args)
    b = run(*args, "--workers", "2")
    assert a.exit_code == 0
    assert a.output == b.output.replace('"workers": 2', '"workers": 1')
    comments, _, rows = parse_csv(a.output)
    assert "# seed: 3" in comments
    assert any(c.startswith("# rng: numpy.random.Philox") for c in comments)
    assert int(rows[0]["n_samples"]) == 4


def test_output_file(tmp_path):
    out = tmp_path / "r.csv"
    res = run("real-cavity", "--chi", "0.02", "--k0r", "0.1", "-o", str(out))
    assert res.exit_code == 0 and res.output == ""
    _, _, rows = parse_csv(out.read_text())
    assert float(rows[0]["total"]) == pytest.approx(1.0, abs=0.1)


def test_epsilon_command_reports_residual():
    res = run("epsilon", "--preset", "potassium", "--xi", "0.49", "--rho-m3", "1e21",
              "--detunings", "-1e-3,1e-3")
    assert res.exit_code == 0
    _, _, rows = parse_csv(res.output)
    assert len(rows) == 2
    assert all(float(r["residual"]) < 1e-10 for r in rows)
    assert float(rows[0]["eps_re"]) > 1 > float(rows[1]["eps_re"])


def test_version_flag():
    res = run("--version")
    assert __version__ in res.output
