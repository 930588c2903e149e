import csv
import io
import json
import logging
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from cohscat import cli
from cohscat.born import coherent_differential_cross_section
from cohscat.kinematics import relative_kinematics
from cohscat.potentials import Coulomb


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def error(err):
    return json.loads(err.strip().splitlines()[-1])


class TestDelta1d:
    def test_coherent_two_delta(self, capsys):
        code, out, _ = run(capsys, "delta1d", "--beta", "2", "--ka", "1e-6")
        assert code == 0
        (row,) = rows(out)
        assert abs(float(row["R"]) - 0.5) < 1e-5
        assert abs(float(row["R"]) + float(row["T"]) - 1) < 1e-15

    def test_sites_both_solvers_agree(self, capsys):
        args = ("delta1d", "--sites", "0:1.0,0.7:-0.4,1.5:2.0", "--k-grid", "0.2:5:9")
        _, a, _ = run(capsys, *args, "--solver", "tm")
        _, b, _ = run(capsys, *args, "--solver", "bc")
        ra, rb = rows(a), rows(b)
        assert len(ra) == 9
        for x, y in zip(ra, rb):
            assert abs(float(x["R"]) - float(y["R"])) < 1e-12

    def test_json(self, capsys):
        _, out, _ = run(capsys, "delta1d", "--sites", "0:1", "--k", "1,2", "--format", "json")
        data = json.loads(out)
        assert [r["R"] for r in data["rows"]] == pytest.approx([0.5, 0.2])

    def test_seventeen_digits(self, capsys):
        _, out, _ = run(capsys, "delta1d", "--sites", "0:1", "--k", "3")
        r = rows(out)[0]["R"]
        assert float(r) == 0.1 or len(r.replace(".", "").lstrip("0")) >= 15

    @pytest.mark.parametrize("argv", [("delta1d",), ("delta1d", "--beta", "1"),
                                      ("delta1d", "--sites", "0:1:2"), ("delta1d", "--sites", "a:b")])
    def test_bad_input(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 2 and out == ""
        assert error(err)["error"] == "config_error"

    def test_domain_error(self, capsys):
        code, _, err = run(capsys, "delta1d", "--sites", "0:1", "--k", "-1")
        e = error(err)
        assert code == 2
        assert e == {"error": "domain_error", "module": "delta1d", "op": "transfer_matrix_solve",
                     "message": e["message"]}


class TestBorn:
    def test_coulomb_backward(self, capsys):
        code, out, _ = run(capsys, "born", "--potential", "coulomb", "--E-r", "1", "--m-r", "1",
                           "--theta", "3.141592653589793")
        assert code == 0
        assert float(rows(out)[0]["dsigma_dcostheta"]) == pytest.approx(math.pi / 8, rel=1e-14)

    def test_forward_divergence(self, capsys):
        code, out, err = run(capsys, "born", "--potential", "coulomb", "--theta", "0")
        assert code == 2 and out == ""
        e = error(err)
        assert e["error"] == "forward_divergence"
        assert e["module"] == "born"

    def test_target_and_metadata(self, capsys, tmp_path):
        target = tmp_path / "target.json"
        target.write_text(json.dumps({"constituents": [
            {"charge": 1, "position": [0, 0, 0]}, {"charge": 1, "position": [0, 0, 3], "spread": 0.1}]}))
        meta = tmp_path / "meta.json"
        code, out, _ = run(capsys, "born", "--potential", "yukawa", "--mu", "0.5", "--target", str(target),
                           "--theta-grid", "0.1:3.1:7", "--metadata", str(meta))
        assert code == 0
        table = rows(out)
        assert len(table) == 7
        assert all(0 <= float(r["kernel_ratio"]) <= 1 for r in table)
        m = json.loads(meta.read_text())
        assert m["G"] == 2.0 and m["born_validity"]["verdict"] in ("valid", "marginal", "invalid")

    def test_nuclear_units(self, capsys):
        # 1 MeV alpha-like relative energy on a Coulomb coupling of e^2/(4 pi eps0) = 1.44 MeV fm
        _, out, _ = run(capsys, "born", "--potential", "coulomb", "--g", "1.4399645", "--m-r", "3727",
                        "--E-r", "1", "--theta", "1.5707963267948966", "--units", "nuclear", "--format", "json")
        data = json.loads(out)
        # pi g^2 / (8 E^2 sin^4) = pi 1.44^2 / (8 * 0.25) fm^2
        want = math.pi * 1.4399645**2 / (8 * 0.25)
        assert data["rows"][0]["dsigma_dcostheta"] == pytest.approx(want, rel=1e-6)
        assert data["metadata"]["area_unit"] == "fm^2"

    def test_lab_frame_flags(self, capsys):
        _, out, _ = run(capsys, "born", "--potential", "gaussian", "--V0", "1", "--width", "0.5",
                        "--m-d", "1", "--M", "1", "--p-d", "2", "--theta", "1.0", "--format", "json")
        data = json.loads(out)
        assert data["metadata"]["m_r"] == 0.5 and data["metadata"]["E_r"] == pytest.approx(1.0)

    def test_unknown_potential(self, capsys):
        code, _, err = run(capsys, "born", "--potential", "square")
        assert code == 2 and error(err)["error"] == "config_error"


class TestCoherence:
    def test_plane_wave_json(self, capsys):
        _, out, _ = run(capsys, "coherence", "--L", "1", "--p-r", "0.01", "--format", "json")
        data = json.loads(out)
        assert data["plane_wave"]["coherent"] is True
        assert data["plane_wave"]["ratio"] == pytest.approx(0.02)

    def test_packet_csv(self, capsys):
        _, out, _ = run(capsys, "coherence", "--L", "1", "--momentum-spread", "10")
        assert rows(out) == [{"check": "packet", "coherent": "false", "ratio": "10"}]

    def test_ensemble_from_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"L": 1.0, "format": "json", "ensemble": [
            {"weight": 0.5, "mean_momentum": 0, "momentum_spread": 1.0, "position_spread": 0.5},
            {"weight": 0.5, "mean_momentum": 0.2, "momentum_spread": 1.0, "position_spread": 0.5}]}))
        code, out, _ = run(capsys, "coherence", "--config", str(cfg))
        assert code == 0
        data = json.loads(out)
        assert data["ensemble"]["coherent"] is False
        assert data["small_packet_decomposition"] == {"applicable": True, "holds": True,
                                                      "second_moment": pytest.approx(1.02),
                                                      "bound": 0.25}

    def test_nothing_to_check(self, capsys):
        code, _, err = run(capsys, "coherence", "--L", "1")
        assert code == 2 and error(err)["error"] == "config_error"


class TestRutherford:
    REPORTED = ["0.13", "0.15", "0.14", "0.15", "0.13", "0.14", "0.12", "0.10"]

    @pytest.mark.parametrize("argv", [("rutherford", "--table1"), ("table1",)])
    def test_table1(self, capsys, argv):
        code, out, _ = run(capsys, *argv)
        assert code == 0
        table = rows(out)
        assert [r["material"] for r in table][0] == "Lead"
        assert [r["rounded"] for r in table] == self.REPORTED

    def test_table1_json(self, capsys):
        _, out, _ = run(capsys, "table1", "--format", "json")
        data = json.loads(out)
        assert [f"{r['rounded']:.2f}" for r in data["rows"]] == self.REPORTED

    def test_cross_sections(self, capsys):
        _, out, _ = run(capsys, "rutherford", "--Z", "79", "--energy", "5", "--theta", "1.5707963267948966,3.141592653589793")
        a, b = (float(r["dsigma_dcostheta"]) for r in rows(out))
        assert a / b == pytest.approx(4.0, rel=1e-14)

    def test_table_path_override(self, capsys, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("material,A,Z,N_scint\nLead,207,82,62\n")
        _, out, _ = run(capsys, "table1", "--table1-path", str(p))
        assert len(rows(out)) == 1

    def test_missing_arguments(self, capsys):
        code, _, err = run(capsys, "rutherford", "--Z", "79")
        assert code == 2 and error(err)["error"] == "config_error"


class TestSample:
    def test_rutherford_csv(self, capsys):
        _, out, _ = run(capsys, "sample", "--theta-min", "0.5", "--count", "1000", "--seed", "3")
        angles = np.array([float(r["theta"]) for r in rows(out)])
        assert angles.size == 1000 and np.all((angles >= 0.5) & (angles <= math.pi))

    def test_histogram_json(self, capsys):
        _, out, _ = run(capsys, "sample", "--count", "5000", "--format", "json", "--bins", "10")
        data = json.loads(out)
        assert sum(data["counts"]) == 5000 and len(data["cos_edges"]) == 11

    def test_streams_and_workers_agree(self, capsys):
        _, a, _ = run(capsys, "sample", "--count", "3000", "--streams", "3")
        _, b, _ = run(capsys, "sample", "--count", "3000", "--streams", "3", "--workers", "3")
        assert a == b

    def test_from_born_table(self, capsys, tmp_path):
        table = tmp_path / "born.csv"
        run(capsys, "born", "--potential", "coulomb", "--theta-grid", "0.3:3.141592653589793:400",
            "--output", str(table))
        _, out, _ = run(capsys, "sample", "--table", str(table), "--count", "20000", "--format", "json",
                        "--bins", "4")
        counts = json.loads(out)["counts"]
        assert sum(counts) == 20000
        # forward-peaked: the bin nearest theta_min holds most of the mass
        assert counts[-1] == max(counts)

    def test_bad_table(self, capsys, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b\n1,2\n")
        code, _, err = run(capsys, "sample", "--table", str(p))
        assert code == 2 and error(err)["error"] == "config_error"

    def test_invalid_theta_min(self, capsys):
        code, _, err = run(capsys, "sample", "--theta-min", "0")
        assert code == 2 and error(err) ["error"] == "domain_error"


class TestPlumbing:
    def test_byte_identical_repeats(self, capsys):
        outs = {run(capsys, "sample", "--count", "2000", "--seed", "11")[1] for _ in range(3)}
        assert len(outs) == 1
        outs = {run(capsys, "born", "--potential", "yukawa", "--format", "json")[1] for _ in range(3)}
        assert len(outs) == 1

    def test_config_defaults_and_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"count": 50, "seed": 4, "theta_min": 1.0}))
        _, a, _ = run(capsys, "sample", "--config", str(cfg))
        assert len(rows(a)) == 50
        _, b, _ = run(capsys, "sample", "--config", str(cfg), "--count", "20")
        assert len(rows(b)) == 20
        _, c, _ = run(capsys, "sample", "--count", "20", "--seed", "4", "--theta-min", "1.0")
        assert b == c

    def test_bad_config(self, capsys, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text("{not json")
        code, _, err = run(capsys, "sample", "--config", str(cfg))
        assert code == 2 and error(err)["error"] == "config_error"
        cfg.write_text(json.dumps({"count": "many"}))
        code, _, err = run(capsys, "sample", "--config", str(cfg))
        assert code == 2 and error(err)["error"] == "config_error"

    def test_output_file_is_written_atomically(self, capsys, tmp_path):
        target = tmp_path / "out.csv"
        target.write_text("old contents\n")
        code, out, _ = run(capsys, "table1", "--output", str(target))
        assert code == 0 and out == ""
        assert target.read_text().startswith("material,")
        assert sorted(os.listdir(tmp_path)) == ["out.csv"]

    def test_failed_run_leaves_output_untouched(self, capsys, tmp_path):
        target = tmp_path / "out.csv"
        target.write_text("old contents\n")
        code, _, _ = run(capsys, "born", "--potential", "coulomb", "--theta", "0", "--output", str(target))
        assert code == 2
        assert target.read_text() == "old contents\n"
        assert sorted(os.listdir(tmp_path)) == ["out.csv"]

    def test_unknown_subcommand(self, capsys):
        code, _, err = run(capsys, "bogus")
        assert code == 2 and error(err)["error"] == "config_error"

    def test_missing_subcommand(self, capsys):
        code, _, err = run(capsys)
        assert code == 2 and error(err)["error"] == "config_error"

    @pytest.mark.parametrize("level, expected", [("ERROR", 0), ("warning", 1)])
    def test_log_level_env(self, capsys, caplog, monkeypatch, level, expected):
        # strong coupling at low energy: the Born check warns
        monkeypatch.setenv(cli.LOG_ENV, level)
        caplog.set_level(logging.NOTSET)
        code, _, _ = run(capsys, "born", "--potential", "coulomb", "--g", "50", "--extent", "1",
                         "--E-r", "0.01", "--theta", "1.0")
        assert code == 0
        warnings = [r for r in caplog.records if r.name == "cohscat" and r.levelno == logging.WARNING]
        assert len(warnings) == expected

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "cohscat", "delta1d", "--beta", "2", "--ka", "1e-6"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0] == "k,R,T"
        proc = subprocess.run([sys.executable, "-m", "cohscat", "born", "--potential", "coulomb",
                               "--theta", "0"], capture_output=True, text=True, check=False)
        assert proc.returncode == 2
        assert json.loads(proc.stderr)["error"] == "forward_divergence"
