import json
from pathlib import Path

from froth1d.cli import main
from froth1d.profiles import load_profile


def write_config(path: Path, **overrides) -> Path:
    config = {
        "model": {"beta": 2.0, "J0_hat": 1.0, "lambda": 1.0,
                  "measure": [{"weight": 1.0, "alpha": 1.0}], "gamma": 0.01},
        "seed": 7,
        "instanton": {"half_width": 30.0, "dx": 0.015625, "tol": 1e-10},
    }
    config.update(overrides)
    file = path / "config.json"
    file.write_text(json.dumps(config))
    return file


class TestInstantonCommand:
    def test_artifacts(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["instanton", "--config", str(cfg), "--out", str(out)]) == 0
        prof, headers = load_profile(out / "instanton.profile")
        assert headers["tau"] > 0
        payload = json.loads((out / "instanton.json").read_text())
        assert float(payload["tau"]) > 0
        assert float(payload["residual"]) <= 1e-10

    def test_too_small_half_width_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, instanton={"half_width": 1.0})
        assert main(["instanton", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 1

    def test_missing_beta(self, tmp_path, capsys):
        cfg = write_config(tmp_path, model={
            "J0_hat": 1.0, "lambda": 1.0,
            "measure": [{"weight": 1.0, "alpha": 1.0}], "gamma": 0.01})
        assert main(["instanton", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 1
        assert "/model/beta" in capsys.readouterr().err

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = write_config(tmp_path, bogus={"x": 1})
        assert main(["instanton", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 1
        assert "/bogus" in capsys.readouterr().err


class TestEhCurveCommand:
    def test_artifacts_and_ratio(self, tmp_path):
        cfg = write_config(tmp_path, model={
            "beta": 2.0, "J0_hat": 1.0, "lambda": 1.0,
            "measure": [{"weight": 1.0, "alpha": 1.0}], "gamma": 1e-3})
        out = tmp_path / "out"
        assert main(["eh-curve", "--config", str(cfg), "--out", str(out)]) == 0
        payload = json.loads((out / "hstar.json").read_text())
        ratio = float(payload["h_star"]) / float(payload["h_star_asym"])
        assert 0.9 <= ratio <= 1.1
        rows = (out / "eh.csv").read_text().strip().split("\n")
        assert rows[0].startswith("# config_sha256")
        assert rows[1] == "h,e_h,e_h_minus_estar"
        assert len(rows) == 202

    def test_gamma_out_of_range(self, tmp_path):
        cfg = write_config(tmp_path, model={
            "beta": 2.0, "J0_hat": 1.0, "lambda": 1.0,
            "measure": [{"weight": 1.0, "alpha": 1.0}], "gamma": 0.3})
        assert main(["eh-curve", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 1

    def test_nonpositive_tau_rejected(self, tmp_path):
        cfg = write_config(tmp_path, model={
            "beta": 2.0, "J0_hat": 1.0, "lambda": 1.0,
            "measure": [{"weight": 1.0, "alpha": 1.0}], "gamma": 0.01,
            "tau": -0.5})
        assert main(["eh-curve", "--config", str(cfg),
                     "--out", str(tmp_path / "o")]) == 1


class TestPipelineCommands:
    def test_minimize_coarse_grain_report(self, tmp_path):
        cfg = write_config(tmp_path, minimize={
            "L_over_h_star": 3.0, "bc": "periodic", "dx": 0.125,
            "n_starts": 1, "max_iters": 800, "grad_tol": 1e-4,
            "init": "trial"})
        out = tmp_path / "out"
        assert main(["minimize", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "minimized.profile").exists()
        assert (out / "trace.csv").exists()
        assert main(["coarse-grain", "--config", str(cfg),
                     "--out", str(out)]) == 0
        payload = json.loads((out / "coarsegrain.json").read_text())
        assert payload["certificate"]["pass"]
        assert payload["trace"]
        assert main(["report", "--config", str(cfg), "--out", str(out)]) == 0
        rep = json.loads((out / "report.json").read_text())
        assert float(rep["good_measure"]) >= 0.0
        assert (out / "histogram.csv").exists()

    def test_corrupt_profile_is_parse_error(self, tmp_path):
        out = tmp_path / "out"
        out.mkdir()
        bad = tmp_path / "bad.profile"
        bad.write_text("L 1.0\ndx 0.25\nbc open\nnot-a-number\n")
        cfg = write_config(tmp_path, coarsegrain={"profile": str(bad)})
        assert main(["coarse-grain", "--config", str(cfg),
                     "--out", str(out)]) == 1

    def test_determinism(self, tmp_path):
        cfg = write_config(tmp_path, minimize={
            "L": 40.0, "bc": "periodic", "dx": 0.125, "n_starts": 2,
            "max_iters": 150, "grad_tol": 1e-4})
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["minimize", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["minimize", "--config", str(cfg), "--out", str(out2)]) == 0
        for name in ("minimized.profile", "trace.csv", "minimize.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestVerifyCommand:
    def test_passes_with_correct_model(self, tmp_path):
        cfg = write_config(tmp_path, verify={"fast": True})
        out = tmp_path / "out"
        assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 0
        payload = json.loads((out / "certificates.json").read_text())
        assert all(c["pass"] for c in payload["certificates"])

    def test_wrong_tau_fails_identity(self, tmp_path, capsys):
        # doubled surface tension breaks the cell-energy identity: exit 3
        cfg = write_config(tmp_path, verify={"fast": True}, model={
            "beta": 2.0, "J0_hat": 1.0, "lambda": 1.0,
            "measure": [{"weight": 1.0, "alpha": 1.0}], "gamma": 0.01,
            "tau": 2 * 0.19762754872186078})
        out = tmp_path / "out"
        assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 3
        assert "cell_energy_identity" in capsys.readouterr().err
