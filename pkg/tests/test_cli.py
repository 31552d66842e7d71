import json
import math

import numpy as np
import pytest

from paircal import cli, error_model, io
from paircal.detector import Counts
from paircal.errors import DataError


def run(*argv):
    return cli.main([str(a) for a in argv])


def simulate(path, *extra, seed=42, samples=1000, **kw):
    args = ["simulate", "--dist", kw.get("dist", "poisson"), "--mean", kw.get("mean", 4),
            "--eta1", kw.get("eta1", 1), "--eta2", kw.get("eta2", 1), "--samples", samples,
            "--seed", seed, "--out", path, *extra]
    return run(*args)


def test_simulate_header_and_metadata(tmp_path):
    out = tmp_path / "c.csv"
    assert simulate(out, samples=3) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "# paircal counts v1"
    assert "# seed: 42" in lines
    assert lines[-4] == "l_M,m_M,c"
    counts, meta = io.read_counts(out)
    assert meta["seed"] == 42 and meta["eta1"] == 1.0
    assert len(counts) == 3


def test_simulate_zero_samples(tmp_path):
    out = tmp_path / "c.csv"
    assert simulate(out, samples=0) == 0
    assert out.read_text().splitlines()[-1] == "l_M,m_M,c"
    counts, _ = io.read_counts(out)
    assert len(counts) == 0


def test_simulate_is_byte_identical(tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    for path, workers in ((a, 1), (b, 1), (c, 4)):
        assert simulate(path, "--workers", workers, "--bg1", 0.3, samples=150_000, eta1=0.6, eta2=0.4) == 0
    assert a.read_bytes() == b.read_bytes() == c.read_bytes()


def test_perfect_detection_rows(tmp_path):
    out = tmp_path / "c.csv"
    simulate(out, samples=5000)
    counts, _ = io.read_counts(out)
    assert np.array_equal(counts.l_M, counts.m_M)


def test_estimate_perfect_detection(tmp_path, capsys):
    out = tmp_path / "c.csv"
    simulate(out, samples=5000)
    capsys.readouterr()
    assert run("estimate", "--counts", out) == 0
    report = json.loads(capsys.readouterr().out)
    assert set(report["estimates"]) == {"product", "difference", "equal-difference", "coincidence"}
    for est in report["estimates"].values():
        assert est["eta1"] == 1.0 and est["eta2"] == 1.0


def test_estimate_report_schema(tmp_path):
    counts, report_path = tmp_path / "c.csv", tmp_path / "r.json"
    simulate(counts, "--no-coincidence", samples=2000, eta1=0.6, eta2=0.4)
    assert run("estimate", "--counts", counts, "--out", report_path) == 0
    report = json.loads(report_path.read_text())
    assert list(report) == ["schema", "counts_file", "sample_size", "moments", "background_corrected",
                            "estimates", "unavailable"]
    assert report["schema"] == "paircal.estimate/1"
    assert report["unavailable"] == ["coincidence"]
    assert set(report["moments"]) == {"mean_l", "mean_m", "mean_l2", "mean_m2", "mean_lm", "mean_diff2",
                                      "sample_size", "stats", "cov"}
    est = report["estimates"]["product"]
    assert set(est) == {"method", "eta1", "eta2", "var_eta1", "var_eta2", "background_corrected", "flags",
                        "std_eta1", "std_eta2"}
    # the stored moments are enough to redo the estimate by hand
    m = report["moments"]
    assert est["eta1"] == pytest.approx(m["mean_lm"] / m["mean_m"] - m["mean_l2"] / m["mean_l"] + 1, rel=1e-14)


def test_estimate_recovers_efficiency(tmp_path, capsys):
    out = tmp_path / "c.csv"
    simulate(out, samples=100_000, mean=5, eta1=0.6, eta2=0.4, seed=3)
    capsys.readouterr()
    run("estimate", "--counts", out, "--method", "product")
    est = json.loads(capsys.readouterr().out)["estimates"]["product"]
    sigma = math.sqrt(error_model.analytic_variance_poisson("A", 0.6, 0.4, 5, 100_000).var_eta1)
    assert abs(est["eta1"] - 0.6) < 5 * sigma


def test_estimate_with_background(tmp_path, capsys):
    counts, bg = tmp_path / "c.csv", tmp_path / "b.csv"
    simulate(counts, "--bg1", 0.5, "--bg2", 0.2, samples=50_000, mean=5, eta1=0.6, eta2=0.4)
    assert run("simulate", "--background-run", "--bg1", 0.5, "--bg2", 0.2, "--samples", 50_000,
               "--seed", 9, "--out", bg) == 0
    assert bg.read_text().splitlines()[-50_001] == "l_B,m_B"
    capsys.readouterr()
    assert run("estimate", "--counts", counts, "--background", bg) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["background_corrected"] is True
    assert "corrected_moments" in report and report["background_sample_size"] == 50_000
    assert all(e["background_corrected"] for e in report["estimates"].values())


def test_background_equal_to_counts_is_a_data_error(tmp_path):
    out = tmp_path / "c.csv"
    simulate(out, samples=100, eta1=0.5, eta2=0.5)
    assert run("estimate", "--counts", out, "--background", out) == 3


def test_coincidence_method_unavailable(tmp_path):
    out = tmp_path / "c.csv"
    simulate(out, "--no-coincidence", samples=100, eta1=0.5, eta2=0.5)
    assert run("estimate", "--counts", out, "--method", "coincidence") == 4


def test_malformed_csv_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("# x: 1\nl_M,m_M\n1,2\n3,x\n")
    assert run("estimate", "--counts", bad) == 3
    assert "bad.csv:4" in capsys.readouterr().err
    with pytest.raises(DataError, match=":1:"):
        bad.write_text("a,b\n")
        io.read_counts(bad)


def test_parameter_errors_exit_2(tmp_path):
    out = tmp_path / "c.csv"
    assert simulate(out, eta1=1.5) == 2
    assert simulate(out, seed=-1) == 2
    assert run("simulate", "--dist", "custom", "--eta1", 0.5, "--eta2", 0.5, "--samples", 3,
               "--seed", 1, "--out", out) == 2
    with pytest.raises(SystemExit) as exc:
        run("simulate", "--samples", 3, "--out", out)  # seed is mandatory
    assert exc.value.code == 2


def test_custom_pmf_file(tmp_path):
    pmf, out = tmp_path / "g.txt", tmp_path / "c.csv"
    pmf.write_text("0\n0\n1\n")
    assert run("simulate", "--dist", "custom", "--pmf-file", pmf, "--eta1", 1, "--eta2", 1,
               "--samples", 10, "--seed", 1, "--out", out) == 0
    counts, _ = io.read_counts(out)
    assert np.all(counts.l_M == 2)


def test_variance_curve_panel_b(tmp_path):
    out = tmp_path / "curve.csv"
    assert run("variance-curve", "--method", "B", "--eta2", "equal", "--samples", 1,
               "--grid", "0.25,0.5,0.75,1.0", "--out", out) == 0
    text = out.read_text().splitlines()
    assert text[:5] == ["# method: B", "# eta2: equal", "# N: inf", "# M: 1", "# source: poisson"]
    assert text[5] == "eta1,variance"
    assert io.read_curve(out) == [(0.25, 1.125), (0.5, 0.5), (0.75, 0.125), (1.0, 0.0)]


def test_variance_curve_panel_a_diverges(tmp_path):
    out = tmp_path / "curve.csv"
    run("variance-curve", "--method", "B", "--eta2", "0.1", "--grid", "0.04,0.03,0.02,0.015,0.01", "--out", out)
    values = [v for _, v in io.read_curve(out)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_variance_curve_bad_grid():
    assert run("variance-curve", "--grid", "0.5,abc") == 2
    assert run("variance-curve", "--grid", "0,0.5") == 2


def test_oracle_command(capsys):
    assert run("oracle", "--mean", 1, "--eta1", 0.5, "--eta2", 0.25) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["moments"]["mean_lm"] == pytest.approx(0.25, rel=1e-14)
    assert report["covariances_of_means"]["l"]["m"] == pytest.approx(0.125, rel=1e-14)
    assert run("oracle", "--mean", 0, "--eta1", 0.5, "--eta2", 0.25) == 0
    zero = json.loads(capsys.readouterr().out)["moments"]
    assert all(v == 0 for k, v in zero.items() if k.startswith("mean_"))
    assert run("oracle", "--dist", "thermal", "--mean", 2, "--eta1", 0.5, "--eta2", 0.5) == 0
    assert json.loads(capsys.readouterr().out)["moments"]["mean_diff2"] == pytest.approx(1.0, rel=1e-14)


def test_oracle_json_feeds_estimators(capsys):
    from paircal.estimators import eta_difference
    from paircal.moments import MomentSet

    run("oracle", "--dist", "thermal", "--mean", 5, "--eta1", 0.3, "--eta2", 0.7)
    mom = MomentSet.from_dict(json.loads(capsys.readouterr().out)["moments"])
    est = eta_difference(mom)
    assert est.eta1 == pytest.approx(0.3, rel=1e-10)


def test_atomic_write_leaves_no_temp_files(tmp_path):
    path = tmp_path / "x.csv"
    io.write_counts(path, Counts([1, 2], [3, 4]))
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]
