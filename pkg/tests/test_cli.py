import json
import subprocess
import sys

import numpy as np
import pytest

from tomolab import pacs_wigner, p_axis, q_axis, read_field, vacuum, write_field
from tomolab.cli import main

SMALL = ["--x-count", "64", "--theta-count", "32", "--q-count", "64"]


def run(*argv):
    return main([str(a) for a in argv])


def manifest(path, name="manifest.json"):
    return json.loads((path / name).read_text())


# -- tomogram ------------------------------------------------------------------------------

def test_tomogram_compare_fock1(tmp_path, capsys):
    assert run("tomogram", "--state", "fock:1", "--analytic", "--radon", "--compare",
               "--out", tmp_path) == 0
    m = manifest(tmp_path)
    assert m["compare"]["sup"] <= 1e-5 and m["compare"]["pass"]
    assert "sup-diff" in capsys.readouterr().out
    assert (tmp_path / "optical_analytic.tomf").exists() and (tmp_path / "optical_radon.tomf").exists()


def test_tomogram_coherent_normalization(tmp_path):
    assert run("tomogram", "--state", "coherent:1+0i", "--out", tmp_path) == 0
    m = manifest(tmp_path)
    assert m["fields"]["optical_analytic"]["normalization_residual"] <= 1e-8
    assert m["wall_time"] >= 0 and m["status"] == "ok"


def test_tomogram_invalid_state(tmp_path, capsys):
    assert run("tomogram", "--state", "squeezed:1", "--out", tmp_path) == 2
    assert "state" in capsys.readouterr().err


def test_tomogram_symplectic_and_csv(tmp_path):
    assert run("tomogram", "--state", "vacuum", "--symplectic", "--csv", *SMALL,
               "--mu-count", "9", "--out", tmp_path) == 0
    M = read_field(tmp_path / "symplectic_analytic.tomf")
    assert M.shape == (64, 9, 9)
    assert (tmp_path / "optical_analytic.csv").read_text().startswith("X,theta,re,im")


def test_tomogram_compare_failure_exits_3(tmp_path):
    code = run("tomogram", "--state", "fock:1", "--compare", "--tol", "1e-30", *SMALL,
               "--out", tmp_path)
    assert code == 3
    m = manifest(tmp_path)
    assert m["status"] == "failed" and not m["compare"]["pass"]


def test_analytic_needs_pacs_state(tmp_path):
    assert run("tomogram", "--state", "gaussian:1,0", "--analytic", "--out", tmp_path) == 2


# -- evolve ---------------------------------------------------------------------------------

@pytest.mark.slow
def test_evolve_rotation(tmp_path):
    assert run("evolve", "--state", "coherent:1", "--t-final", np.pi / 2, "--dt", "5e-3",
               "--snapshot-every", "100", "--out", tmp_path) == 0
    m = manifest(tmp_path)
    assert m["final_vs_rotated_initial"] <= 1e-4
    assert m["snapshots"][-1]["t"] == pytest.approx(np.pi / 2)
    assert all(s["normalization_drift"] <= 1e-6 for s in m["snapshots"])
    last = m["snapshots"][-1]["files"][0]
    assert read_field(tmp_path / last).metadata["t"] == pytest.approx(np.pi / 2)


def test_evolve_fock1_stationary(tmp_path):
    assert run("evolve", "--state", "fock:1", "--steps", "40", "--dt", "0.02",
               "--snapshot-every", "10", "--out", tmp_path) == 0
    m = manifest(tmp_path)
    assert m["max_snapshot_drift"] <= 1e-6 and len(m["snapshots"]) == 5


def test_evolve_large_dt_exits_3(tmp_path, capsys):
    assert run("evolve", "--state", "coherent:1", "--steps", "3", "--dt", "0.1",
               "--out", tmp_path) == 3
    m = manifest(tmp_path)
    assert m["failed_step"] == 0 and m["status"] == "failed"
    assert "step 0" in capsys.readouterr().err


def test_evolve_unknown_generator(tmp_path):
    assert run("evolve", "--generator", "optical-magic", "--steps", "1", "--out", tmp_path) == 2


def test_evolve_classical_gaussian(tmp_path):
    assert run("evolve", "--state", "gaussian:0.5,0", "--generator", "optical-classical",
               "--steps", "5", "--dt", "0.01", *SMALL, "--out", tmp_path) == 0
    assert manifest(tmp_path)["generator"] == "optical-classical"


# -- check ----------------------------------------------------------------------------------------

def test_check_energy_pass(tmp_path, capsys):
    assert run("check", "energy", "--state", "fock:2", "--E", "2.5", "--out", tmp_path) == 0
    rep = manifest(tmp_path, "check.json")
    assert rep["all_pass"]
    optical = next(r for r in rep["rows"] if r["rule"] == "energy-optical")
    assert optical["norm"] <= 1e-6
    assert "PASS" in capsys.readouterr().out


def test_check_energy_fail_still_exits_0(tmp_path, capsys):
    assert run("check", "energy", "--state", "fock:2", "--E", "2.6", "--out", tmp_path) == 0
    rep = manifest(tmp_path, "check.json")
    assert not rep["all_pass"] and all(r["norm"] >= 1e-2 for r in rep["rows"])
    assert "FAIL" in capsys.readouterr().out


def test_check_correspondence_vacuum(tmp_path):
    assert run("check", "correspondence", "--state", "vacuum", "--out", tmp_path) == 0
    rep = manifest(tmp_path, "check.json")
    assert len(rep["rows"]) == 6 and all(r["pass"] for r in rep["rows"])


def test_check_stationarity(tmp_path):
    assert run("check", "stationarity", "--state", "fock:1", "--representation", "optical",
               "--out", tmp_path) == 0
    assert manifest(tmp_path, "check.json")["all_pass"]


def test_check_energy_needs_E(tmp_path):
    assert run("check", "energy", "--state", "fock:1", "--out", tmp_path) == 2


# -- reconstruct, moments, compare -------------------------------------------------------------------

def test_reconstruct_then_compare(tmp_path, capsys):
    assert run("reconstruct", "--state", "vacuum", "--out", tmp_path) == 0
    side = json.loads((tmp_path / "wigner.json").read_text())
    assert side["sup_error_vs_reference"] <= 1e-3
    write_field(tmp_path / "ref.tomf", pacs_wigner(vacuum(), 0.0, q_axis(), p_axis()))
    assert run("compare", tmp_path / "wigner.tomf", tmp_path / "ref.tomf", "--out", tmp_path) == 0
    assert manifest(tmp_path, "compare.json")["sup"] <= 1e-3
    assert "sup" in capsys.readouterr().out


def test_reconstruct_fock1_negativity(tmp_path, capsys):
    assert run("reconstruct", "--state", "fock:1", "--out", tmp_path) == 0
    W = read_field(tmp_path / "wigner.tomf")
    i0 = int(np.argmin(np.abs(W.axes[0].values)))
    assert W.values[i0, i0].real == pytest.approx(-2.0, abs=0.02)


def test_reconstruct_from_file(tmp_path):
    assert run("tomogram", "--state", "vacuum", *SMALL, "--out", tmp_path) == 0
    assert run("reconstruct", "--input", tmp_path / "optical_analytic.tomf", *SMALL,
               "--out", tmp_path / "rec") == 0
    assert "sup_error_vs_reference" not in json.loads((tmp_path / "rec" / "wigner.json").read_text())


def test_compare_self_is_zero(tmp_path):
    assert run("tomogram", "--state", "fock:2", *SMALL, "--out", tmp_path) == 0
    f = tmp_path / "optical_analytic.tomf"
    assert run("compare", f, f, "--out", tmp_path) == 0
    rep = manifest(tmp_path, "compare.json")
    assert rep["sup"] == 0.0 and rep["l2"] == 0.0


def test_compare_mismatched_grids(tmp_path):
    assert run("tomogram", "--state", "vacuum", *SMALL, "--out", tmp_path / "a") == 0
    assert run("tomogram", "--state", "vacuum", "--out", tmp_path / "b") == 0
    assert run("compare", tmp_path / "a" / "optical_analytic.tomf",
               tmp_path / "b" / "optical_analytic.tomf") == 2


def test_compare_missing_file(tmp_path):
    assert run("compare", tmp_path / "nope.tomf", tmp_path / "nope.tomf") == 2


def test_moments(tmp_path):
    assert run("moments", "--state", "vacuum", "--orders", "1,2", "--out", tmp_path) == 0
    data = np.loadtxt(tmp_path / "moments.csv", delimiter=",", skiprows=1)
    assert np.max(np.abs(data[:, 2] - 0.5)) <= 1e-8
    m = manifest(tmp_path)
    assert all(v <= 1e-5 for v in m["characteristic_consistency"].values())


def test_moments_bad_orders(tmp_path):
    assert run("moments", "--orders", "one", "--out", tmp_path) == 2


# -- configuration -------------------------------------------------------------------------------------

def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("state: fock:1\nx_count: 64\ntheta_count: 32\nout: %s\n" % (tmp_path / "o"))
    assert run("tomogram", "--config", cfg) == 0
    assert manifest(tmp_path / "o")["options"]["state"] == "fock:1"
    assert run("tomogram", "--config", cfg, "--state", "fock:2") == 0
    m = manifest(tmp_path / "o")
    assert m["options"]["state"] == "fock:2" and m["options"]["x_count"] == 64


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("state: vacuum\ncolour: blue\n")
    assert run("tomogram", "--config", cfg, "--out", tmp_path) == 2
    assert "colour" in capsys.readouterr().err


def test_config_type_error(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("x_count: many\n")
    assert run("tomogram", "--config", cfg, "--out", tmp_path) == 2


def test_config_missing_file(tmp_path):
    assert run("tomogram", "--config", tmp_path / "absent.yaml") == 2


def test_unknown_flag_is_a_usage_error():
    with pytest.raises(SystemExit) as err:
        run("tomogram", "--colour", "blue")
    assert err.value.code == 2


# -- determinism and environment -------------------------------------------------------------------------

def test_runs_are_bit_identical(tmp_path):
    snapshots = []
    for _ in range(2):
        assert run("evolve", "--state", "coherent:1+0.5i", "--steps", "4", "--dt", "0.01",
                   *SMALL, "--out", tmp_path) == 0
        m = manifest(tmp_path)
        m.pop("wall_time")
        files = {p.name: p.read_bytes() for p in sorted(tmp_path.glob("*.tomf"))}
        snapshots.append((m, files))
    assert snapshots[0] == snapshots[1]


def test_thread_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("TOMOLAB_THREADS", "1")
    assert run("tomogram", "--state", "vacuum", *SMALL, "--out", tmp_path) == 0
    monkeypatch.setenv("TOMOLAB_THREADS", "zero")
    assert run("tomogram", "--state", "vacuum", *SMALL, "--out", tmp_path) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "tomolab", "--version"], capture_output=True,
                         text=True, check=True)
    assert out.stdout.startswith("tomolab ")
