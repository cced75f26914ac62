import json

import numpy as np
import pytest

from coherence_lab.cli import DEFAULT_SEED, default_seed, parse_spectrum, run
from coherence_lab.errors import NotPSD, NotUnitTrace, ParseError
from coherence_lab.hermlin import format_matrix_text


def run_json(capsys, argv):
    code = run(argv)
    return code, json.loads(capsys.readouterr().out)


def test_measure_fourier_json(capsys):
    code, rep = run_json(capsys, ["measure", "--spectrum", "0.75,0.25", "--basis", "fourier", "--json"])
    assert code == 0
    assert set(rep) == {"dim", "basis", "l1", "rel_entropy", "skew_info", "roc", "weight", "maxima"}
    assert rep["roc"] == pytest.approx(0.5, abs=1e-6)
    assert rep["l1"] == pytest.approx(0.5)


def test_measure_optimal_basis_reaches_maxima(capsys):
    code, rep = run_json(capsys, ["measure", "--spectrum", "0.5,0.3,0.2", "--basis", "optimal", "--json"])
    assert code == 0
    assert rep["skew_info"] == pytest.approx(rep["maxima"]["skew_max"], abs=1e-9)
    assert rep["roc"] == pytest.approx(rep["maxima"]["roc_max"], abs=1e-5)


def test_measure_state_file(tmp_path, capsys):
    path = tmp_path / "rho.txt"
    path.write_text(format_matrix_text(np.array([[0.5, 0.25 - 0.1j], [0.25 + 0.1j, 0.5]])))
    code, rep = run_json(capsys, ["measure", "--state-file", str(path), "--json"])
    assert code == 0
    assert rep["l1"] == pytest.approx(0.5385164807)


def test_bounds_json(capsys):
    code, bs = run_json(capsys, ["bounds", "--spectrum", "0.1,0.1,0.4,0.4", "--json"])
    assert code == 0
    assert bs["o_d"] == pytest.approx(0.848528, abs=1e-6)
    assert bs["b_d"] == pytest.approx(1.0392305, abs=1e-7)


def test_fixture_state(capsys):
    code, bs = run_json(capsys, ["bounds", "--fixture", "mcms-d4-zero-phase", "--json"])
    assert code == 0
    assert bs["purity"] == pytest.approx(1.0)
    assert bs["b_d"] == pytest.approx(3.0)


def test_json_floats_round_trip(capsys):
    _, rep = run_json(capsys, ["measure", "--spectrum", "0.7,0.2,0.1", "--json"])
    assert rep["maxima"]["roc_max"] == 3 * 0.7 - 1


@pytest.mark.parametrize(
    "argv, code",
    [
        (["measure", "--spectrum", "0.5,0.6"], 1),
        (["measure", "--spectrum", "0.5,abc"], 1),
        (["measure", "--spectrum", "1.2,-0.2"], 1),
        ([], 64),
        (["bogus"], 64),
        (["measure"], 64),
        (["measure", "--spectrum", "0.5,0.5", "--basis", "prime:1"], 0),
        (["measure", "--spectrum", "0.25,0.25,0.25,0.25", "--basis", "prime:1"], 1),
    ],
)
def test_exit_codes(argv, code, capsys):
    assert run(argv) == code


def test_parse_spectrum_errors():
    np.testing.assert_array_equal(parse_spectrum("1,0"), [1.0, 0.0])
    with pytest.raises(NotUnitTrace):
        parse_spectrum("0.5,0.6")
    with pytest.raises(NotPSD):
        parse_spectrum("1.5,-0.5")
    with pytest.raises(ParseError) as e:
        parse_spectrum("0.5,x")
    assert e.value.column == 2


def test_seed_environment_override(monkeypatch):
    monkeypatch.delenv("COHERENCE_LAB_SEED", raising=False)
    assert default_seed() == DEFAULT_SEED
    monkeypatch.setenv("COHERENCE_LAB_SEED", "17")
    assert default_seed() == 17


def test_sdp_subcommand(capsys):
    assert run(["sdp", "--spectrum", "0.75,0.25", "--sense", "dominated"]) == 0
    out = capsys.readouterr().out
    assert "objective" in out


def test_bases_gram(tmp_path):
    out = tmp_path / "gram.csv"
    assert run(["bases", "--dim", "3", "--kind", "prime", "--l", "1", "--emit", "gram", "--out", str(out)]) == 0
    assert out.read_text().strip()


def test_scan_writes_stats_and_hist(tmp_path):
    stats, hist = tmp_path / "s.json", tmp_path / "h.csv"
    argv = ["scan", "--fixture", "fig2-d4", "--n", "3000", "--seed", "1", "--out", str(stats), "--hist", str(hist)]
    assert run(argv) == 0
    data = json.loads(stats.read_text())
    assert data["count"] == 3000
    lines = hist.read_text().splitlines()
    assert lines[0] == "bin_left,bin_right,count"
    assert sum(int(l.split(",")[2]) for l in lines[1:]) == 3000


def test_scan_other_measure(tmp_path):
    stats = tmp_path / "s.json"
    argv = ["scan", "--spectrum", "0.7,0.3", "--n", "200", "--seed", "1", "--measure", "skew", "--threshold", "none", "--out", str(stats)]
    assert run(argv) == 0
    assert json.loads(stats.read_text())["max_value"] <= 1 - (np.sqrt(0.7) + np.sqrt(0.3)) ** 2 / 2 + 1e-9


def test_repro_is_deterministic(tmp_path):
    for sub in ("a", "b"):
        argv = ["repro", "rank2", "--n", "3000", "--k-step", "0.25", "--seed", "4", "--out", str(tmp_path / sub)]
        assert run(argv) == 0
    assert (tmp_path / "a" / "rank2.csv").read_bytes() == (tmp_path / "b" / "rank2.csv").read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest_rank2.json").read_text())
    assert manifest["seed"] == 4 and manifest["n"] == 3000


def test_repro_plot_and_gnuplot(tmp_path):
    argv = ["repro", "fig1", "--steps", "200", "--out", str(tmp_path), "--plot", "--gnuplot"]
    assert run(argv) == 0
    assert (tmp_path / "fig1.png").stat().st_size > 0
    assert (tmp_path / "fig1.gp").exists()
    assert json.loads((tmp_path / "manifest_fig1.json").read_text())["seed"] == default_seed()


def test_verify_appendix_suite(capsys):
    assert run(["verify", "--suite", "appendix", "--trials", "100", "--seed", "7"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(l.startswith("PASS") for l in lines)
