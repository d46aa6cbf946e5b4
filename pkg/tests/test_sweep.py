import json
import math

import numpy as np
import pytest

from jcdicke.cli import main
from jcdicke.exceptions import ConfigError
from jcdicke.meanfield import omega_zero_beta_squared
from jcdicke.sweep import (
    RECORD_FIELDS,
    Axis,
    SweepSpec,
    csv_text,
    evaluate_point,
    expand_series,
    format_value,
    parse_config_text,
    plot_script_text,
    resolve_point,
    run_grid,
    run_point,
    series_output,
    spec_from_settings,
)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    return header, [dict(zip(header, line.split(","))) for line in lines[1:]]


# ---- config grammar --------------------------------------------------------

def test_axis_parse():
    a = Axis.parse("Omega:-2:2:201")
    assert (a.name, a.start, a.stop, a.steps, a.linear) == ("Omega", -2.0, 2.0, 201, True)
    assert Axis.parse("w:0.1:10:5:log").values()[2] == pytest.approx(1.0)
    assert Axis.parse("omega-b:0:1:3").name == "omega_b"


@pytest.mark.parametrize("text", ["w:1:1:10", "w:0:1:1", "w:0:1", "zeta:0:1:3",
                                  "w:0:x:3", "w:0:1:3:cubic", "w:-1:1:3:log"])
def test_axis_rejects(text):
    with pytest.raises(ConfigError):
        Axis.parse(text)


def test_config_text():
    s = parse_config_text("""
        # comment
        mode = sweep2d
        omega_b = 1          # trailing comment
        axis = Omega:-2:2:5
        axis = w:0.1:3:4
        out = a.csv
        plot-script = yes
        jobs = 2
    """)
    spec = spec_from_settings(s)
    assert spec.mode == "sweep2d"
    assert spec.fixed == {"omega_b": 1.0}
    assert [a.name for a in spec.axes] == ["Omega", "w"]
    assert spec.emit_plot_script and spec.jobs == 2
    assert len(spec.grid()) == 20
    # row-major: the last axis varies fastest
    g = spec.grid()
    assert g[0]["Omega"] == g[1]["Omega"] == -2.0 and g[1]["w"] != g[0]["w"]


@pytest.mark.parametrize("text", ["omega_b 1", "colour = red", "N = 2.5", "omega_b = x",
                                  "omega_b = ,"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_series_expansion():
    runs = expand_series(parse_config_text("w = 0.5, 1, 2\nomega_b = 1"))
    assert [s for s, _ in runs] == ["_w=0.5", "_w=1", "_w=2"]
    assert [r["w"] for _, r in runs] == [0.5, 1.0, 2.0]
    assert series_output("out/a.csv", "_w=2") == "out/a_w=2.csv"
    assert series_output("a.csv", "") == "a.csv"


@pytest.mark.parametrize("kwargs", [
    dict(mode="sweep1d", axes=()),
    dict(mode="sweep2d", axes=(Axis("w", 0, 1, 3),)),
    dict(mode="sweep1d", axes=(Axis("w", 0, 1, 3),), fixed={"w": 1.0}),
    dict(mode="sweep2d", axes=(Axis("w", 0, 1, 3), Axis("w", 0, 2, 3))),
    dict(mode="point", axes=(Axis("w", 0, 1, 3),)),
    dict(mode="bogus"),
    dict(jobs=0),
    dict(fixed={"gamma": 1.0}),
])
def test_spec_invariants(kwargs):
    with pytest.raises(ConfigError):
        SweepSpec(**kwargs)


# ---- point evaluation ------------------------------------------------------

def test_resolve_with_full_model_and_w():
    pt = {"omega_a": 1.0, "omega_b": 1.0, "eta": 0.5, "lambda": 1.0, "Omega": 0.0}
    problem, model = resolve_point(pt)
    assert problem.w == 1.5 and model is not None
    resolve_point({**pt, "w": 1.5})
    with pytest.raises(ConfigError):
        resolve_point({**pt, "w": 1.6})
    with pytest.raises(ConfigError):
        resolve_point({"omega_b": 1.0, "Omega": 0.0, "eta": 0.1})
    with pytest.raises(ConfigError):
        resolve_point({"omega_b": 1.0, "w": 1.0})


def test_evaluate_point_values():
    rec = evaluate_point({"omega_a": 1.0, "omega_b": 1.0, "eta": 1.0, "lambda": 1.0,
                          "Omega": 0.0})
    # w = 2: beta^2 = 1/4, alpha = beta sqrt(1 - beta^2)
    assert rec.beta == pytest.approx(0.5, abs=1e-10)
    assert rec.alpha == pytest.approx(0.5 * math.sqrt(0.75), abs=1e-10)
    assert rec.label == "L12"
    assert evaluate_point({"omega_b": 1.0, "Omega": 0.0, "w": 2.0}).alpha != rec.alpha


def test_run_point_degenerate_example():
    rec = run_point(SweepSpec("point", {"omega_b": 1.0, "Omega": 0.0, "w": 2.0}))
    assert rec.beta == pytest.approx(0.5, abs=1e-12)
    assert rec.energy == pytest.approx(-0.125, abs=1e-12)
    assert rec.degenerate
    with pytest.raises(ConfigError):
        run_point(SweepSpec("sweep1d", {"Omega": 0.0, "w": 1.0}, (Axis("omega_b", 0, 1, 3),)))


def test_evaluate_point_deterministic():
    pt = {"omega_b": 0.4, "Omega": -0.7, "w": 1.3}
    assert evaluate_point(pt) == evaluate_point(pt)


def test_omega_zero_column_matches_closed_form():
    spec = SweepSpec("sweep1d", {"Omega": 0.0, "w": 1.0}, (Axis("omega_b", -2, 2, 81),))
    for point, rec in zip(spec.grid(), run_grid(spec)):
        assert rec.beta_squared == pytest.approx(
            omega_zero_beta_squared(point["omega_b"], 1.0), abs=1e-8)


# ---- output formats --------------------------------------------------------

def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(True) == "1" and format_value(np.bool_(False)) == "0"
    assert format_value(math.nan) == "nan"
    assert float(format_value(1 / 3)) == 1 / 3


def test_csv_layout():
    spec = SweepSpec("sweep1d", {"Omega": 0.1, "w": 1.0}, (Axis("omega_b", 0, 1, 3),))
    text = csv_text(run_grid(spec), ("omega_b",))
    assert text.endswith("\n") and "\r" not in text
    lines = text.splitlines()
    assert lines[0] == ",".join(("omega_b",) + RECORD_FIELDS)
    assert len(lines) == 4
    row = lines[2].split(",")
    assert row[0] == "0.5"
    assert len(row[1].replace("-", "").replace(".", "").lstrip("0")) >= 15


def test_plot_script_refers_to_relative_csv():
    spec = SweepSpec("sweep2d", {"omega_b": 1.0},
                     (Axis("Omega", -1, 1, 3), Axis("w", 0.1, 2, 3)))
    text = plot_script_text("phase.csv", spec)
    assert "data = 'phase.csv'" in text
    assert "/" not in text.split("data = ")[1].splitlines()[0]
    assert "splot data using 1:2:3" in text


# ---- command line ----------------------------------------------------------

def test_cli_solve_json(capsys, tmp_path):
    out = tmp_path / "p.json"
    code = main(["solve", "--omega-b", "1", "--omega-mw-coupling", "0", "--w", "2",
                 "--json", "--out", str(out)])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["beta"] == pytest.approx(0.5)
    assert payload["alpha"] is None
    assert payload["label"] == "L12"
    assert "label=L12" in capsys.readouterr().out


def test_cli_sweep1d_with_plot(tmp_path):
    out = tmp_path / "s.csv"
    code = main(["sweep1d", "--omega-mw-coupling", "0", "--w", "1",
                 "--axis", "omega_b:0.5:1.5:11", "--out", str(out), "--plot-script"])
    assert code == 0
    header, rows = read_csv(out)
    assert header[0] == "omega_b" and len(rows) == 11
    assert "data = 's.csv'" in (tmp_path / "s.gp").read_text()


def test_cli_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("omega_b = 1\nOmega = 0\nw = 0.5\naxis = omega_b:0:1:3\n")
    out = tmp_path / "o.csv"
    # the config fixes omega_b and also sweeps it: rejected
    assert main(["sweep1d", "--config", str(cfg), "--out", str(out)]) == 1
    cfg.write_text("Omega = 0\nw = 0.5\naxis = omega_b:0:1:3\nout = ignored.csv\n")
    assert main(["sweep1d", "--config", str(cfg), "--w", "2", "--out", str(out)]) == 0
    _, rows = read_csv(out)
    assert float(rows[0]["beta_squared"]) == pytest.approx(0.5)


def test_cli_series_writes_one_csv_per_value(tmp_path):
    out = tmp_path / "fig.csv"
    code = main(["sweep1d", "--omega-mw-coupling", "0", "--w", "0.5,1,2",
                 "--axis", "omega_b:0:3:31", "--out", str(out)])
    assert code == 0
    for w in ("0.5", "1", "2"):
        _, rows = read_csv(tmp_path / f"fig_w={w}.csv")
        for row in rows:
            if float(row["omega_b"]) / float(w) >= 1:
                assert float(row["beta"]) == 0.0


def test_cli_omega_series_three_csvs(tmp_path):
    out = tmp_path / "beta.csv"
    code = main(["sweep1d", "--w", "1", "--omega-mw-coupling", "0,0.1,0.5",
                 "--axis", "omega_b:0:3:301", "--out", str(out), "--plot-script"])
    assert code == 0
    written = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert written == ["beta_Omega=0.1.csv", "beta_Omega=0.5.csv", "beta_Omega=0.csv"]
    _, rows = read_csv(tmp_path / "beta_Omega=0.csv")
    assert len(rows) == 301
    assert all(float(r["beta"]) == 0.0 for r in rows if float(r["omega_b"]) >= 1)
    _, rows = read_csv(tmp_path / "beta_Omega=0.5.csv")
    assert all(float(r["beta"]) > 0 for r in rows)


def test_cli_phase_diagram_labels(tmp_path):
    out = tmp_path / "pd.csv"
    code = main(["sweep2d", "--omega-b", "1", "--axis", "Omega:-2:2:41",
                 "--axis", "w:0.1:3:41", "--out", str(out)])
    assert code == 0
    _, rows = read_csv(out)
    labels = {r["label"] for r in rows}
    assert labels <= {"P1", "P2", "L0", "L12", "A", "Unclassified"}
    assert {"P1", "P2", "L0", "L12"} <= labels


def test_cli_error_rows_exit_2(tmp_path, capsys):
    out = tmp_path / "bad.csv"
    # sweeping omega_a through zero makes some points invalid
    code = main(["sweep1d", "--omega-b", "1", "--omega-mw-coupling", "0.1", "--eta", "0",
                 "--lambda", "1", "--axis", "omega_a:-1:1:5", "--out", str(out)])
    assert code == 2
    _, rows = read_csv(out)
    assert rows[0]["beta"] == "nan" and rows[0]["error"].startswith("NonPositiveOmegaA")
    assert rows[-1]["error"] == ""


@pytest.mark.parametrize("argv", [
    ["sweep1d", "--axis", "w:1:1:5", "--omega-b", "1", "--omega-mw-coupling", "0",
     "--out", "x.csv"],
    ["solve", "--omega-b", "1"],
    ["solve", "--omega-b", "abc"],
    ["sweep2d", "--omega-b", "1", "--axis", "w:0.1:1:3", "--out", "x.csv"],
    ["solve", "--omega-a", "1", "--omega-b", "1", "--eta", "0", "--lambda", "1",
     "--omega-mw-coupling", "0", "--w", "3"],
    ["bogus"],
])
def test_cli_config_errors_exit_1(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(argv) == 1


def test_cli_ed(tmp_path, capsys):
    coo = tmp_path / "h.coo"
    code = main(["ed", "--omega-a", "1", "--omega-b", "1", "--eta", "0.3", "--lambda", "0",
                 "--omega-mw-coupling", "0", "--n-atoms", "4", "--dump-matrix", str(coo)])
    assert code == 0
    assert "energy_per_atom=-0.425" in capsys.readouterr().out
    assert coo.read_text().startswith("# dimension")
    assert main(["ed", "--omega-b", "1", "--omega-mw-coupling", "0", "--w", "1"]) == 1
    assert main(["ed", "--omega-a", "1", "--omega-b", "1", "--eta", "0", "--lambda", "1",
                 "--omega-mw-coupling", "0", "--n-atoms", "4", "--n-max", "50",
                 "--max-dim", "20"]) == 2


def test_cli_parallel_equals_serial(tmp_path):
    args = ["sweep2d", "--omega-b", "1", "--axis", "Omega:-1:1:15", "--axis", "w:0.1:3:15"]
    assert main(args + ["--out", str(tmp_path / "a.csv"), "--jobs", "1"]) == 0
    assert main(args + ["--out", str(tmp_path / "b.csv"), "--jobs", "3"]) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


@pytest.mark.slow
def test_cli_validate(tmp_path):
    out = tmp_path / "v.json"
    assert main(["validate", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] and len(report["checks"]) == 14
