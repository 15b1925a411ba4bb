import math
import struct

import numpy as np
import pytest

from gevrey_evp.cli import main
from gevrey_evp.harness import (
    ConfigError,
    emit_csv,
    emit_svg,
    fit_rate,
    parse_config,
    read_csv,
    serialize_config,
)


class TestParseConfig:
    def test_minimal_gl_study_defaults(self):
        cfg = parse_config("[gl-study]\nmodel = gl-analytic\n")
        assert cfg.experiment == "gl-study"
        assert cfg["m"] == 64
        assert cfg["n_star"] == 40
        assert cfg["out"] == "gl_study.csv"

    def test_range_violation_names_precondition(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[gl-study]\nmodel = gl-analytic\nm = 0\n")
        assert any("m must be >= 2" in v for v in err.value.violations)

    def test_duplicate_key_reports_both_lines(self):
        text = "[gl-study]\nmodel = gl-analytic\nm = 8\nm = 16\n"
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        msg = "; ".join(err.value.violations)
        assert "line 4" in msg and "line 3" in msg and "duplicate" in msg

    def test_all_violations_reported(self):
        text = "[gl-study]\nmodel = mystery\nm = zero\nwhat = 3\n"
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert len(err.value.violations) >= 3

    def test_unknown_section(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[warp-study]\nmodel = gl-analytic\n")
        assert any("unknown experiment" in v for v in err.value.violations)

    def test_missing_required_key(self):
        with pytest.raises(ConfigError) as err:
            parse_config("[gl-study]\nm = 8\n")
        assert any("missing required key 'model'" in v for v in err.value.violations)

    def test_cross_check_n_star(self):
        text = "[gl-study]\nmodel = gl-analytic\nn_max = 50\n"
        with pytest.raises(ConfigError) as err:
            parse_config(text)
        assert any("n_star" in v for v in err.value.violations)

    def test_roundtrip_equality(self):
        text = (
            "[qmc-study]\nmodel = qmc-analytic\nm = 16\ns = 5\nlevels = 3..6\n"
            "shifts = 4\nseed = 99\ntheta = 0.8\n"
        )
        cfg = parse_config(text)
        again = parse_config(serialize_config(cfg))
        assert again == cfg

    def test_roundtrip_all_experiments(self):
        minimal = {
            "gl-study": "model = gl-analytic",
            "qmc-study": "model = qmc-analytic",
            "mc-study": "model = qmc-gevrey2",
            "trunc-study": "model = qmc-analytic",
            "checks": "which = combinatorics",
            "solve-evp": "model = gl-analytic\ny = 0.25,-0.5",
            "cbc": "s = 4",
        }
        for section, body in minimal.items():
            cfg = parse_config(f"[{section}]\n{body}\n")
            assert parse_config(serialize_config(cfg)) == cfg


class TestFitRate:
    def test_exact_semilog(self):
        records = [(n, math.exp(-2.0 * n)) for n in range(1, 9)]
        fit = fit_rate(records, "log-vs-n")
        assert fit.slope == pytest.approx(-2.0, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_exact_cuberoot(self):
        records = [(n, math.exp(-1.5 * n ** (1 / 3))) for n in (1, 8, 27, 64, 125)]
        fit = fit_rate(records, "log-vs-cuberoot-n")
        assert fit.slope == pytest.approx(-1.5, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_exact_loglog(self):
        records = [(n, 3.0 / n) for n in (2, 4, 8, 16, 32)]
        fit = fit_rate(records, "loglog")
        assert fit.slope == pytest.approx(-1.0, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.0), abs=1e-12)

    def test_affine_equivariance(self):
        rng = np.random.default_rng(8)
        records = [(n, float(np.exp(-0.7 * n) * rng.uniform(0.5, 2.0)))
                   for n in range(2, 12)]
        base = fit_rate(records, "log-vs-n")
        scaled = fit_rate([(n, 10.0 * e) for n, e in records], "log-vs-n")
        assert scaled.slope == pytest.approx(base.slope, abs=1e-12)
        assert scaled.intercept == pytest.approx(base.intercept + math.log(10.0),
                                                 abs=1e-12)

    def test_needs_four_positive(self):
        with pytest.raises(ValueError):
            fit_rate([(1, 0.1), (2, 0.0), (3, 0.01), (4, -1.0)], "log-vs-n")

    def test_unknown_transform(self):
        with pytest.raises(ValueError):
            fit_rate([(1, 1.0)] * 5, "sqrt")


class TestCsvSvg:
    def test_empty_records_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        emit_csv([], path, ["n", "error"])
        assert path.read_text() == "n,error\n"

    def test_roundtrip_bit_exact(self, tmp_path):
        path = tmp_path / "data.csv"
        records = [(3, 0.1 + 0.2), (4, 1e-17), (5, math.pi)]
        emit_csv(records, path, ["n", "error"], metadata={"model": "gl-analytic"})
        meta, cols, rows = read_csv(path)
        assert meta == {"model": "gl-analytic"}
        assert cols == ["n", "error"]
        assert rows == records

    def test_svg_requires_records(self, tmp_path):
        with pytest.raises(ValueError):
            emit_svg([], None, tmp_path / "x.svg", "log-vs-n")

    def test_svg_without_fit(self, tmp_path):
        path = tmp_path / "two.svg"
        emit_svg([(1, 0.5), (2, 0.1)], None, path, "log-vs-n")
        text = path.read_text()
        assert "<svg" in text and "polyline" in text
        assert "slope" not in text

    def test_svg_with_fit(self, tmp_path):
        records = [(n, math.exp(-n)) for n in range(1, 8)]
        fit = fit_rate(records, "log-vs-n")
        path = tmp_path / "fit.svg"
        emit_svg(records, fit, path, "log-vs-n")
        assert "slope" in path.read_text()


class TestCli:
    def test_checks_combinatorics_passes(self, capsys):
        code = main(["checks", "combinatorics", "--n-max", "25", "--nu-max", "5"])
        out = capsys.readouterr().out
        assert code == 0
        assert "PASS" in out and "FAIL" not in out

    def test_solve_evp_prints_lambda(self, capsys):
        code = main(["solve-evp", "--model", "constant", "--m", "8",
                     "--tol", "1e-12"])
        out = capsys.readouterr().out
        assert code == 0
        assert "lambda1 = " in out

    def test_solve_evp_second_and_dump(self, tmp_path, capsys):
        vec = tmp_path / "u.bin"
        code = main([
            "solve-evp", "--model", "constant", "--m", "6", "--tol", "1e-10",
            "--second", "--dump", str(vec), "--dump-matrix", str(tmp_path / "mat"),
        ])
        out = capsys.readouterr().out
        assert code == 0
        assert "lambda2 = " in out
        blob = vec.read_bytes()
        assert blob[:8] == b"GEVREVP\x00"
        (n_dof,) = struct.unpack("<Q", blob[8:16])
        assert n_dof == 25
        values = np.frombuffer(blob[16:], dtype="<f8")
        assert values.size == 25
        assert (tmp_path / "mat.A.mtx").exists()
        assert (tmp_path / "mat.M.mtx").exists()

    def test_validation_exit_code(self, capsys):
        assert main(["gl-study", "--model", "not-a-model"]) == 1
        assert main(["solve-evp", "--model", "gl-analytic", "--m", "1"]) == 1

    def test_config_file_with_override(self, tmp_path, capsys):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text(
            "[gl-study]\nmodel = constant\nm = 4\nn_min = 1\nn_max = 3\n"
            f"n_star = 5\nout = {tmp_path}/a.csv\n"
        )
        code = main(["gl-study", "--config", str(cfgfile),
                     "--out", str(tmp_path / "b.csv")])
        assert code == 0
        assert (tmp_path / "b.csv").exists()
        assert not (tmp_path / "a.csv").exists()

    def test_cbc_roundtrip(self, tmp_path, capsys):
        out = tmp_path / "vec.txt"
        code = main(["cbc", "--s", "3", "--n", "16", "--delta", "1",
                     "--theta", "0.8", "--beta", "j^-2", "--out", str(out)])
        assert code == 0
        from gevrey_evp.qmc import load_vector

        z, s, n = load_vector(out)
        assert (s, n) == (3, 16)
        assert len(z) == 3

    def test_gl_study_determinism(self, tmp_path, capsys):
        outs = []
        for name in ("r1.csv", "r2.csv"):
            path = tmp_path / name
            code = main(["gl-study", "--model", "constant", "--m", "4",
                         "--n-min", "1", "--n-max", "4", "--n-star", "6",
                         "--out", str(path), "--svg", str(path) + ".svg"])
            assert code == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_qmc_study_determinism(self, tmp_path, capsys):
        outs = []
        for name in ("q1.csv", "q2.csv"):
            path = tmp_path / name
            code = main(["qmc-study", "--model", "constant", "--m", "4",
                         "--s", "2", "--levels", "2..4", "--shifts", "2",
                         "--mc-shifts", "2", "--seed", "31", "--out", str(path)])
            assert code == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_checks_gevrey_runs_reduced(self, tmp_path, capsys):
        out = tmp_path / "decay.csv"
        code = main(["checks", "gevrey", "--model", "gl-analytic", "--m", "6",
                     "--K", "8", "--quad-n", "20", "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "best delta" in text
        assert out.exists()

    def test_trunc_study_reduced(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        code = main(["trunc-study", "--model", "qmc-analytic", "--m", "4",
                     "--s-list", "1,2", "--ref-s", "4", "--level", "3",
                     "--shifts", "2", "--seed", "5", "--out", str(out)])
        assert code == 0
        meta, cols, rows = __import__("gevrey_evp").harness.read_csv(out)
        assert cols == ["s", "error"]
        assert len(rows) == 2

    def test_custom_model_from_table_file(self, tmp_path, capsys):
        table = tmp_path / "series.txt"
        table.write_text("1 0.4\n2 0.1\n")
        out = tmp_path / "c.csv"
        code = main(["gl-study", "--model", f"custom:{table}", "--m", "4",
                     "--n-min", "1", "--n-max", "3", "--n-star", "5",
                     "--out", str(out)])
        assert code == 0
        assert out.exists()

    def test_mc_study_reduced(self, tmp_path, capsys):
        out = tmp_path / "mc.csv"
        code = main(["mc-study", "--model", "constant", "--m", "4", "--s", "2",
                     "--levels", "2..3", "--shifts", "2", "--seed", "3",
                     "--out", str(out)])
        assert code == 0
        assert out.exists()
