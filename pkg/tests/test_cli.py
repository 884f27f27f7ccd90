import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from qsminimal.cli import ExperimentConfig, loglog_svg, main
from qsminimal.errors import ConfigError

MIDDLE = {"branching": [2], "ratio": ["1/3"], "gaps": [["0", "1/3", "0"]], "tail": "periodic"}
FULL = {"branching": [2], "ratio": ["1/2"], "gaps": [["0", "0", "0"]], "tail": "periodic"}
DIM_ONE = {"branching": {"rule": "constant", "params": {"n": 2}},
           "ratio": {"rule": "defect_power", "params": {"n": 2, "power": 2}},
           "gaps": {"rule": "uniform"}}


def write_config(tmp_path, name="run.json", **doc):
    doc.setdefault("output", str(tmp_path / "out"))
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def run(cmd, path, *extra):
    return main([cmd, "--config", str(path), *extra])


def test_validate_messages(tmp_path, capsys):
    assert run("validate", write_config(tmp_path, params=MIDDLE, depth=6)) == 0
    assert "valid, uniform Cantor, n·c = 2/3" in capsys.readouterr().out
    assert run("validate", write_config(tmp_path, params=FULL, depth=6)) == 0
    assert "valid, degenerate (E = [0,1])" in capsys.readouterr().out


def test_validate_inconsistent_exit_2(tmp_path, capsys):
    bad = dict(MIDDLE, gaps=[["0", "1/2", "0"]])
    assert run("validate", write_config(tmp_path, params=bad, depth=3)) == 2
    err = capsys.readouterr().err
    assert "level 1" in err and "1/6" in err


@pytest.mark.parametrize("doc", [
    {"params": MIDDLE, "depth": 0},
    {"params": MIDDLE, "precision": 12},
    {"params": MIDDLE, "d_fraction": 1.0},
    {"params": MIDDLE, "colour": "red"},
    {"depth": 3},
    {"params": dict(MIDDLE, ratio=[0.3333])},
    {"params": "missing.json"},
])
def test_config_errors_exit_2(tmp_path, doc):
    assert run("validate", write_config(tmp_path, **doc)) == 2


def test_missing_config_exit_2(tmp_path):
    assert run("validate", tmp_path / "nope.json") == 2


def test_config_invariants():
    with pytest.raises(ConfigError):
        ExperimentConfig(params=MIDDLE, depth=0)
    cfg = ExperimentConfig(params=MIDDLE)
    assert cfg.precision >= 15 and 0 < cfg.d_fraction < 1


def test_params_from_file(tmp_path, capsys):
    (tmp_path / "p.json").write_text(json.dumps(MIDDLE))
    assert run("validate", write_config(tmp_path, params="p.json", depth=2)) == 0


def test_flags_override(tmp_path):
    path = write_config(tmp_path, params=MIDDLE, depth=3)
    out = tmp_path / "elsewhere"
    assert run("build", path, "--depth", "5", "--out", str(out)) == 0
    assert json.loads((out / "report.json").read_text())["count"] == 32


def test_dim_outputs(tmp_path):
    path = write_config(tmp_path, params=MIDDLE)
    assert run("dim", path) == 0
    out = tmp_path / "out"
    report = json.loads((out / "report.json").read_text())
    assert report["estimate"] == pytest.approx(0.6309297535714574, abs=1e-12)
    rows = list(csv.reader(open(out / "partials.csv")))
    assert rows[0][:4] == ["k", "numerator", "denominator_argument", "partial_value"]
    assert len(rows) == 31
    assert "partials_with_end_gaps" in report


@pytest.mark.parametrize("params,expect", [(DIM_ONE, 0.95), (FULL, 1.0)])
def test_dim_examples(tmp_path, params, expect):
    assert run("dim", write_config(tmp_path, params=params)) == 0
    est = json.loads((tmp_path / "out" / "report.json").read_text())["estimate"]
    assert est >= expect - 1e-12


def test_degenerate_exit_3(tmp_path):
    path = write_config(tmp_path, params=MIDDLE, depth=5, scales=["1/9", "1/9", "1/9"])
    assert run("boxdim", path) == 3


def test_precision_exit_4(tmp_path):
    path = write_config(tmp_path, params=MIDDLE, depth=20, map={"kind": "power", "alpha": "8"})
    assert run("qs-estimate", path) == 4


@pytest.mark.parametrize("map_doc,M", [
    ({"kind": "identity"}, 1.0),
    ({"kind": "power", "alpha": "2"}, 3.0),
    ([{"kind": "power", "alpha": "2"}, {"kind": "power", "alpha": "1/2"}], 1.0),
])
def test_distortion_command(tmp_path, map_doc, M):
    path = write_config(tmp_path, params=MIDDLE, depth=12, precision=30, map=map_doc)
    assert run("distortion", path) == 0
    out = tmp_path / "out"
    report = json.loads((out / "report.json").read_text())
    assert report["pass"] and report["failures"] == 0
    assert report["M_hat"] == pytest.approx(M, rel=1e-3)
    rows = list(csv.DictReader(open(out / "distortion.csv")))
    assert all(float(r["slack_lower"]) >= 0 and float(r["slack_upper"]) >= 0 for r in rows)


def test_measure_certificate_fields(tmp_path):
    path = write_config(tmp_path, params=DIM_ONE, depth=10, samples=200,
                        map={"kind": "power", "alpha": "4/5"})
    assert run("measure", path) == 0
    out = tmp_path / "out"
    report = json.loads((out / "report.json").read_text())
    assert {"d", "C_empirical", "windows_tested", "seed", "pass", "r_growth",
            "xi_zeta_margin"} <= set(report)
    assert report["pass"] and report["windows_tested"] == 200
    assert (out / "rchains.csv").exists()


def test_mlema_command(tmp_path):
    assert run("mlema", write_config(tmp_path, params=DIM_ONE)) == 0
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert report["total_length_root"][-1] >= 0.9


@pytest.mark.parametrize("params,map_doc,lo,hi,flagged", [
    (MIDDLE, {"kind": "identity"}, 0.60, 0.66, True),
    (FULL, {"kind": "identity"}, 0.99, 1.01, False),
])
def test_minimality_command(tmp_path, params, map_doc, lo, hi, flagged):
    path = write_config(tmp_path, params=params, depth=10, samples=100, map=map_doc)
    assert run("minimality", path) == 0
    out = tmp_path / "out"
    report = json.loads((out / "report.json").read_text())
    assert lo <= report["box_dim"] <= hi
    assert bool(report["flags"]) is flagged
    svg = (out / "plot.svg").read_text()
    assert svg.startswith("<svg") and "<polyline" in svg
    rows = list(csv.reader(open(out / "loglog.csv")))
    assert rows[0] == ["eps", "count", "log_inv_eps", "log_count"]


def test_determinism(tmp_path):
    def once(tag):
        out = tmp_path / tag
        path = write_config(tmp_path, f"{tag}.json", params=DIM_ONE, depth=10, samples=100,
                            seed=5, output=str(out), map={"kind": "power", "alpha": "5/4"})
        assert run("minimality", path) == 0
        assert run("dim", path, "--out", str(out / "dim")) == 0
        return {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}

    assert once("a") == once("b")


def test_svg_is_well_formed():
    import xml.etree.ElementTree as ET
    root = ET.fromstring(loglog_svg([(0.0, 0.0), (1.0, 0.6), (2.0, 1.3)], 0.65, -0.01, "t"))
    assert root.tag.endswith("svg")


def test_module_entry_point(tmp_path):
    path = write_config(tmp_path, params=MIDDLE, depth=3)
    proc = subprocess.run([sys.executable, "-m", "qsminimal", "validate", "--config", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("valid")


def test_shipped_configs(tmp_path):
    root = Path(__file__).resolve().parents[1] / "configs"
    for name in ("middle_thirds.json", "dim_one.json", "dim_one_pl.json", "full_interval.json"):
        assert run("validate", root / name, "--out", str(tmp_path / name), "--depth", "4") == 0
    assert run("validate", root / "inconsistent.json", "--out", str(tmp_path / "bad")) == 2
