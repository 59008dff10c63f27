import json
import os
import subprocess
import sys

import pytest

from finsler_santalo import cli

FAST = """
metric.family = funk
measure = bh
domain.type = ball
domain.radius = 0.5
quadrature.boundary = 32   # coarse but well inside tolerance
quadrature.hemisphere = 16
quadrature.radial = 8
quadrature.angular = 16
quadrature.indicatrix = 32
flow.dt = 4e-3
santalo.integrands = one, bump
santalo.tol = 1e-3
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_comments_and_dotted_keys():
    raw = cli.parse_config_text("# header\n\nquadrature.boundary = 64  # inline\nmeasure=ht\n")
    assert raw == {"quadrature.boundary": "64", "measure": "ht"}


@pytest.mark.parametrize("text", ["just words", "= 3", "a = 1\na = 2"])
def test_malformed_config(text):
    with pytest.raises(cli.ConfigError):
        cli.parse_config_text(text)


def test_resolved_config_has_every_key():
    cfg = cli.resolve_config(cli.parse_config_text(FAST), "verify-santalo")
    assert set(cfg) == set(cli.SCHEMA)
    assert cfg["quadrature.boundary"] == 32 and cfg["santalo.integrands"] == ["one", "bump"]


def test_missing_key_exit_code_names_key(tmp_path, capsys):
    path = write(tmp_path, FAST.replace("measure = bh", ""))
    assert cli.main(["verify-santalo", "--config", path, "--out", str(tmp_path)]) == 2
    assert "'measure'" in capsys.readouterr().err


@pytest.mark.parametrize("key, value", [("flow.dt", "-1"), ("quadrature.indicatrix", "4"), ("measure", "volume"),
                                        ("metric.family", "hyperbolic"), ("typo.key", "1"),
                                        ("santalo.integrands", "one, nope"), ("domain.radius", "2.0")])
def test_bad_values_exit_2(tmp_path, capsys, key, value):
    raw = cli.parse_config_text(FAST)
    raw[key] = value
    path = write(tmp_path, "".join(f"{k} = {v}\n" for k, v in raw.items()))
    assert cli.main(["verify-santalo", "--config", path, "--out", str(tmp_path)]) == 2
    assert key in capsys.readouterr().err


def test_unknown_config_file_exit_2(tmp_path):
    assert cli.main(["funk-report", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path)]) == 2


def test_verify_santalo_outputs(tmp_path):
    path = write(tmp_path, FAST)
    assert cli.main(["verify-santalo", "--config", path, "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verify-santalo.json").read_text())
    assert report["schema_version"] == 1 and report["passed"]
    assert report["config"]["domain.radius"] == 0.5
    assert len(report["results"]["reports"]) == 4
    assert "runtime" not in json.dumps(report)
    meta = json.loads((tmp_path / "verify-santalo.meta.json").read_text())
    assert meta["runtime_seconds"] > 0
    lines = (tmp_path / "verify-santalo.csv").read_text().splitlines()
    assert lines[0].startswith("integrand,formula,lhs,rhs") and len(lines) == 5


def test_deterministic_json(tmp_path):
    path = write(tmp_path, FAST)
    outs = []
    for k in range(2):
        d = tmp_path / f"o{k}"
        assert cli.main(["verify-santalo", "--config", path, "--out", str(d), "--workers", "2"]) == 0
        outs.append((d / "verify-santalo.json").read_bytes())
    assert outs[0] == outs[1]


def test_tolerance_override_fails_check(tmp_path):
    assert cli.main(["funk-report", "--config", "funk-disk", "--out", str(tmp_path), "--tol", "1e-30"]) == 1
    assert not json.loads((tmp_path / "funk-report.json").read_text())["passed"]


def test_numerical_failure_exit_3(tmp_path, capsys):
    path = write(tmp_path, FAST + "flow.t_max = 0.01\n")
    assert cli.main(["verify-santalo", "--config", path, "--out", str(tmp_path)]) == 3
    assert "RunawayError" in capsys.readouterr().err


def test_funk_report_bundled(tmp_path):
    assert cli.main(["funk-report", "--config", "funk-disk", "--out", str(tmp_path)]) == 0
    rows = json.loads((tmp_path / "funk-report.json").read_text())["results"]["rows"]
    assert {r["quantity"] for r in rows} == {"mu", "A_plus", "A_minus", "Lambda", "diam", "omega"}


def test_constants_bundled(tmp_path):
    assert cli.main(["constants", "--config", "torus", "--out", str(tmp_path)]) == 0


def test_eigenvalue_euclidean(tmp_path):
    text = "metric.family = euclidean\nmeasure = bh\ndomain.type = ball\neigen.resolution = 64\n"
    assert cli.main(["eigenvalue", "--config", write(tmp_path, text), "--out", str(tmp_path)]) == 0
    checks = json.loads((tmp_path / "eigenvalue.json").read_text())["results"]["checks"]
    assert [c["id"] for c in checks] == ["thm12", "disk_oracle"]


def test_bounds_fast(tmp_path):
    text = ("metric.family = funk\nmeasure = ht\ndomain.type = ball\ndomain.radius = 0.5\n"
            "bounds.boundary_points = 32\nbounds.samples = 50\nbounds.distortion_samples = 200\n"
            "bounds.ball_radii = 0.3\nbounds.cor55.resolution = 24\n")
    assert cli.main(["bounds", "--config", write(tmp_path, text), "--out", str(tmp_path)]) == 0
    ids = [r["id"] for r in json.loads((tmp_path / "bounds.json").read_text())["results"]["reports"]]
    assert "lemma51+" in ids and "thm13.2-" in ids and "cor55.torus" in ids


def test_bundled_configs_listed():
    assert cli.bundled_configs() == ["euclidean-disk", "funk-disk", "torus"]


def test_console_entry_point(tmp_path):
    exe = [sys.executable, "-m", "finsler_santalo.cli"]
    res = subprocess.run(exe + ["funk-report", "--config", "funk-disk", "--out", str(tmp_path)],
                         capture_output=True, text=True, timeout=300)
    assert res.returncode == 0, res.stderr
    assert "funk-report: PASS" in res.stdout
    res = subprocess.run(exe + ["--help"], capture_output=True, text=True, timeout=60)
    assert "verify-santalo" in res.stdout
