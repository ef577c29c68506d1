import csv
import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spuridium import runner
from spuridium.cli import main
from spuridium.config import RunConfig
from spuridium.errors import NoConvergence
from spuridium.report import parse_report, parse_sumrule

HO = ["--problem", "harmonic", "--omega", "1", "--n", "200", "--box", "20", "--solver", "dense"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def ho_report(tmp_path_factory):
    path = tmp_path_factory.mktemp("ho") / "ho.csv"
    assert main(["solve", *HO, "-o", str(path)]) == 0
    return path


def rows_of(text):
    return parse_report(text)[0].rows


# --- solve ------------------------------------------------------------------

def test_solve_oscillator(ho_report):
    report, fmt = parse_report(ho_report.read_text())
    assert fmt == "csv"
    final = min((r for r in report.rows if r.iteration == 200), key=lambda r: r.energy)
    assert abs(final.energy - 0.5) < 1e-6
    assert final.verdict == "GenuineBound"
    assert final.forbidden_fraction == pytest.approx(0.1573, abs=1e-4)
    assert sorted(report.adequacy) == [160, 180, 200]
    assert abs(report.adequacy[200] - 0.5) < 1e-6


def test_rows_sorted_and_config_echo(ho_report):
    report, _ = parse_report(ho_report.read_text())
    keys = [(r.track_id, r.iteration) for r in report.rows]
    assert keys == sorted(keys)
    echoed = RunConfig.from_dict(report.config)
    assert echoed.to_dict() == report.config
    assert echoed.basis.n_basis == 200 and echoed.problem.name == "harmonic"


def test_csv_header(ho_report):
    lines = ho_report.read_text().splitlines()
    assert lines[0] == "# schema: spuridium-report/1"
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "track_id,iteration,energy,delta,delta_rel,verdict,trend,forbidden_fraction"
    first = next(csv.DictReader(l for l in lines if not l.startswith("#")))
    assert "e" in first["energy"] and len(first["energy"].split("e")[0].replace("-", "").replace(".", "")) == 17


def test_hydrogen_scan_energies(capsys):
    code, out, _ = run(capsys, "solve", "--problem", "hydrogen", "--z", 1, "--ell", 0,
                       "--scan", "100,200,300", "--box", 40)
    assert code == 0
    final = sorted((r for r in rows_of(out) if r.iteration == 300), key=lambda r: r.energy)
    for row, exact, tol in zip(final, (-0.5, -0.125, -1 / 18), (1e-3, 1e-3, 5e-3)):
        assert abs(row.energy - exact) < tol


@pytest.mark.xfail(strict=True, reason="cusp-limited bound-state delta_rel (~1e-1) never drops "
                   "below tol_bound at these sizes; see the decisions ledger")
def test_hydrogen_scan_verdicts(capsys):
    _, out, _ = run(capsys, "solve", "--problem", "hydrogen", "--z", 1, "--ell", 0,
                    "--scan", "100,200,300", "--box", 40)
    rows = rows_of(out)
    assert sum(1 for r in rows if r.iteration == 300 and r.energy < 0
               and r.verdict == "GenuineBound") >= 3


def test_json_output_round_trips(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "solve", "--problem", "poschl_teller", "--lambda", 4, "--n", 60,
                     "--box", 20, "--format", "json", "-o", path)
    assert code == 0
    text = path.read_text()
    report, fmt = parse_report(text)
    assert fmt == "json"
    doc = json.loads(text)
    assert doc["metadata"]["wall_time"] > 0
    assert set(doc["rows"][0]) == {"track_id", "iteration", "energy", "delta", "delta_rel",
                                   "verdict", "trend", "forbidden_fraction"}
    assert parse_report(report.to_json())[0].rows == report.rows


def test_dirac_report_has_no_forbidden_fraction(capsys):
    code, out, _ = run(capsys, "solve", "--problem", "dirac_coulomb", "--z", 1, "--kappa", -1,
                       "--n", 40, "--box", 30)
    assert code == 0
    report, _ = parse_report(out)
    assert report.adequacy is None
    assert all(r.forbidden_fraction is None for r in report.rows)
    assert max(r.iteration for r in report.rows) == 40


def test_lanczos_solve(capsys):
    code, out, _ = run(capsys, "solve", "--problem", "harmonic", "--n", 80, "--box", 20,
                       "--solver", "lanczos", "--max-iter", 60, "--seed", 3)
    assert code == 0
    rows = rows_of(out)
    assert max(r.iteration for r in rows) == 60
    last = min((r for r in rows if r.iteration == 60), key=lambda r: r.energy)
    assert abs(last.energy - 0.5) < 1e-6
    ground = [r for r in rows if r.track_id == last.track_id]
    assert len(ground) > 3 and last.verdict == "GenuineBound"


def test_threads_do_not_change_output(capsys, monkeypatch):
    argv = ["solve", "--problem", "harmonic", "--scan", "20,30,40", "--box", 15]
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("SPURIDIUM_THREADS", threads)
        outs.append(run(capsys, *argv)[1])
    assert outs[0] == outs[1]


def test_deterministic_csv(capsys, tmp_path):
    # the output path is part of the echoed config, so both runs use the same one
    path = tmp_path / "a.csv"
    blobs = []
    for _ in range(2):
        assert run(capsys, "solve", *HO, "-o", path)[0] == 0
        blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1]


# --- config -----------------------------------------------------------------

def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": {"name": "harmonic", "omega": 2.0},
                               "basis": {"scan": [30, 40, 50], "box_length": 12.0}}))
    code, out, _ = run(capsys, "solve", "--config", cfg, "--n", 60)
    assert code == 0
    report, _ = parse_report(out)
    assert report.config["problem"]["omega"] == 2.0
    assert report.config["basis"]["n_basis"] == 60 and report.config["basis"]["scan"] == []
    assert min(r.energy for r in report.rows) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("argv", [
    ["solve", *HO[:-4], "--box", "-20"],
    ["solve", "--problem", "harmonic", "--n", "0", "--box", "10"],
    ["solve", "--problem", "harmonic", "--scan", "30,20", "--box", "10"],
    ["solve", "--problem", "harmonic", "--box", "10"],
    ["solve", "--problem", "nosuch", "--n", "10"],
    ["solve", "--problem", "harmonic", "--n", "10", "--omega", "-1"],
    ["solve", "--problem", "harmonic", "--n", "10", "--tol-bound", "0"],
    ["solve", "--problem", "harmonic", "--n", "10", "--solver", "lanczos"],
    ["solve", "--problem", "harmonic", "--n", "10", "--solver", "lanczos", "--seed", "1",
     "--max-iter", "11"],
    ["solve", "--problem", "dirac_coulomb", "--z", "200", "--kappa", "-1", "--n", "10"],
    ["solve", "--problem", "harmonic", "--n", "10", "--map-strength", "1"],
    ["solve", "--bogus"],
    ["sumrule", "--problem", "dirac_coulomb", "--n", "10"],
])
def test_config_errors_exit_2_without_output(capsys, tmp_path, argv):
    out = tmp_path / "out.csv"
    code, stdout, err = run(capsys, *argv, "-o", out)
    assert code == 2
    assert err.strip()
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_bad_config_file(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    for text in ("{not json", "[1, 2]", '{"basis": {"n_basis": 10, "colour": 1}}'):
        cfg.write_text(text)
        assert run(capsys, "solve", "--config", cfg)[0] == 2
    assert run(capsys, "solve", "--config", tmp_path / "missing.json")[0] == 2


def test_numerical_failure_exit_3(capsys, tmp_path, monkeypatch):
    def broken(_):
        raise NoConvergence("forced")
    monkeypatch.setattr(runner, "eigh_dense", broken)
    out = tmp_path / "x.csv"
    code, _, err = run(capsys, "solve", "--problem", "harmonic", "--n", 10, "-o", out)
    assert code == 3 and "numerical" in err
    assert not out.exists()


@settings(max_examples=50, deadline=None)
@given(omega=st.floats(0.1, 10), n=st.integers(1, 500), box=st.floats(1, 100),
       tol=st.floats(1e-12, 1e-2), fmt=st.sampled_from(["csv", "json"]),
       scan=st.lists(st.integers(1, 50), max_size=4, unique=True))
def test_config_round_trip(omega, n, box, tol, fmt, scan):
    cfg = RunConfig.from_dict({"problem": {"omega": omega}, "basis": {"n_basis": n, "box_length": box,
                               "scan": sorted(scan)}, "diagnostics": {"tol_bound": tol},
                               "output": {"format": fmt}})
    text = cfg.to_json()
    assert RunConfig.from_json(text).to_json() == text
    assert RunConfig.from_json(text) == cfg


# --- classify ---------------------------------------------------------------

def test_classify_idempotent(capsys, ho_report):
    code, out, _ = run(capsys, "classify", ho_report)
    assert code == 0
    assert out == ho_report.read_text()


def test_classify_idempotent_json(capsys, tmp_path):
    path = tmp_path / "h.json"
    assert run(capsys, "solve", "--problem", "hydrogen", "--scan", "30,40,50", "--box", 30,
               "--format", "json", "-o", path)[0] == 0
    code, out, _ = run(capsys, "classify", path)
    assert code == 0
    a, b = json.loads(path.read_text()), json.loads(out)
    assert a["rows"] == b["rows"] and a["metadata"]["config"] == b["metadata"]["config"]


def test_classify_tiny_tolerance(capsys, ho_report, tmp_path):
    out = tmp_path / "strict.csv"
    assert run(capsys, "classify", ho_report, "--tol-bound", "1e-300", "-o", out)[0] == 0
    before = parse_report(ho_report.read_text())[0]
    after = parse_report(out.read_text())[0]
    assert after.config["diagnostics"]["tol_bound"] == 1e-300
    assert any(r.verdict == "GenuineBound" for r in before.rows)
    for tid, rows in after.tracks().items():
        if rows[-1].delta_rel > 0:
            assert rows[-1].verdict != "GenuineBound"


SYNTHETIC = """# schema: spuridium-report/1
# version: 0.1.0
# config: {CONFIG}
track_id,iteration,energy,delta,delta_rel,verdict,trend,forbidden_fraction
0,1,1.0e+00,1.0e+00,5.0e-01,Undecided,Plateau,
0,2,1.0e+00,1.5e+00,7.5e-01,Undecided,Plateau,
0,3,1.0e+00,1.2e+00,6.0e-01,Undecided,Plateau,
1,1,5.0e+00,5.2e+01,2.0e+00,Undecided,Plateau,
1,2,5.0e+00,5.2e+01,2.0e+00,Undecided,Plateau,
1,3,5.0e+00,5.2e+01,2.0e+00,Undecided,Plateau,
2,1,9.0e+00,8.2e+01,1.0e+00,Undecided,Plateau,
2,2,9.0e+00,8.2e+01,1.0e+00,Undecided,Plateau,
2,3,9.0e+00,6.56e+01,8.0e-01,Undecided,Plateau,
"""


def test_classify_strict_plateau_factor(capsys, tmp_path):
    cfg = RunConfig.from_dict({"basis": {"scan": [1, 2, 3]}})
    path = tmp_path / "syn.csv"
    path.write_text(SYNTHETIC.replace("{CONFIG}", cfg.to_json()))
    _, loose, _ = run(capsys, "classify", path)
    _, strict, _ = run(capsys, "classify", path, "--plateau-factor", "1.0001")
    trend = lambda text: [rows[-1].trend for rows in parse_report(text)[0].tracks().values()]
    assert trend(loose) == ["Plateau", "Plateau", "Plateau"]
    assert trend(strict) == ["Increasing", "Plateau", "Increasing"]


@pytest.mark.parametrize("text", ["", "# schema: other/9\na,b\n", "{\"schema\": 1}",
                                  "# schema: spuridium-report/1\n# config: {}\nx,y\n1,2\n"])
def test_classify_bad_report(capsys, tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    assert run(capsys, "classify", path)[0] == 2


def test_classify_missing_file(capsys, tmp_path):
    assert run(capsys, "classify", tmp_path / "nope.csv")[0] == 2


# --- sumrule ----------------------------------------------------------------

def test_sumrule_single_function(capsys):
    code, out, _ = run(capsys, "sumrule", "--problem", "harmonic", "--n", 1, "--box", 20)
    assert code == 0
    assert parse_sumrule(out).rows == [(1, 0.0)]


def test_sumrule_small_scan_decreasing(capsys):
    code, out, _ = run(capsys, "sumrule", "--problem", "harmonic", "--scan", "5,10,20,30", "--box", 20)
    dev = [abs(s - 0.5) for _, s in parse_sumrule(out).rows]
    assert code == 0 and all(a > b for a, b in zip(dev[:-1], dev[1:]))


@pytest.mark.xfail(strict=True, reason="|S - 1/2| is at roundoff (~1e-14) from N = 50 on; "
                   "see the decisions ledger")
def test_sumrule_reference_scan_decreasing(capsys):
    _, out, _ = run(capsys, "sumrule", "--problem", "harmonic", "--scan", "50,100,200", "--box", 20)
    dev = [abs(s - 0.5) for _, s in parse_sumrule(out).rows]
    assert dev[0] > dev[1] > dev[2]


def test_sumrule_json_round_trip(capsys):
    code, out, _ = run(capsys, "sumrule", "--problem", "harmonic", "--scan", "20,40", "--box", 20,
                       "--format", "json")
    assert code == 0
    rep = parse_sumrule(out)
    assert json.loads(rep.to_json()) == json.loads(out)
    doc = json.loads(out)
    for row in doc["rows"]:
        assert row["deviation"] == abs(row["trk_sum"] - 0.5)


def test_sumrule_csv_round_trip(capsys):
    _, out, _ = run(capsys, "sumrule", "--problem", "harmonic", "--scan", "20,40", "--box", 20)
    assert parse_sumrule(out).to_csv() == out


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "spuridium", "sumrule", "--problem", "harmonic",
                           "--n", "10", "--box", "10"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "n_basis,trk_sum,deviation" in proc.stdout
