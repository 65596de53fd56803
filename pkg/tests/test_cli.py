import json

import numpy as np
import pytest

from mimobeam import cli
from mimobeam.config import ConfigError, DEFAULT_CONFIG, build_constraint, build_desired_pattern, resolve_config
from mimobeam.constraints import ConstModulus, EnergyPar, ModulusSimilarity

SMALL = {
    "array": {"M": 4},
    "waveform": {"N": 6},
    "pattern": {"grid": {"min_deg": -90, "max_deg": 90, "step_deg": 5},
                "mainlobes": [{"center_deg": -30, "width_deg": 20}, {"center_deg": 30, "width_deg": 20}]},
    "targets": {"angles_deg": [-30, 30]},
    "sidelobe_weight": 0.2,
    "solver": {"max_iters": 40, "replicates": 2},
}


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


class TestConfig:
    def test_defaults(self):
        cfg = resolve_config()
        assert cfg == DEFAULT_CONFIG
        spec = build_desired_pattern(cfg)
        assert len(spec.grid) == 181
        # three closed 20 degree lobes of 21 grid points each
        assert spec.desired.sum() == 63
        assert spec.desired[np.searchsorted(spec.grid.angles, -50.0)] == 1.0
        assert spec.desired[np.searchsorted(spec.grid.angles, -51.0)] == 0.0

    def test_default_constraint(self):
        c = build_constraint(resolve_config())
        assert isinstance(c, ConstModulus)
        assert c.c_d == pytest.approx(1 / np.sqrt(320), rel=1e-15)

    def test_overrides(self):
        cfg = resolve_config({"solver": {"seed": 4}}, seed=9, replicates=None)
        assert cfg["solver"]["seed"] == 9 and cfg["solver"]["replicates"] == 10

    @pytest.mark.parametrize("bad, where", [
        ({"array": {"M": 0}}, "array/M"),
        ({"array": {"M": 4, "colour": 1}}, "array"),
        ({"constraint": {"type": "box"}}, "constraint/type"),
        ({"pattern": {"weights": [1.0, 2.0]}}, "pattern/weights"),
        ({"constraint": {"type": "energy_par", "params": {}}}, "constraint/params"),
        ({"constraint": {"type": "energy_par", "params": {"par": 1e6}}}, "constraint/params/par"),
        ({"constraint": {"type": "modulus_similarity", "params": {"c_eps_rel": 3}}}, "c_eps_rel"),
        ({"pattern": {"grid": {"min_deg": 10, "max_deg": -10, "step_deg": 1}}}, "pattern/grid"),
    ])
    def test_rejects(self, bad, where):
        with pytest.raises(ConfigError, match=where):
            resolve_config(bad)

    def test_energy_par_and_similarity(self):
        c = build_constraint(resolve_config({"constraint": {"type": "energy_par", "params": {"par": 2.0}}}))
        assert isinstance(c, EnergyPar) and c.c_p == pytest.approx(np.sqrt(2.0 / 320))
        s = build_constraint(resolve_config(
            {"constraint": {"type": "modulus_similarity", "params": {"c_eps_rel": 0.5, "reference": {"seed": 3}}}}))
        assert isinstance(s, ModulusSimilarity)
        assert s.c_eps == pytest.approx(0.5 * s.c_d)
        np.testing.assert_allclose(np.abs(s.x_ref), s.c_d)


class TestDesign:
    def test_outputs(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["design", "--config", str(write_config(tmp_path, SMALL)), "--out", str(out)]) == 0
        names = {p.name for p in out.iterdir()}
        assert names == {"trace.csv", "beampattern.csv", "waveform.json", "report.json", "timing.json"}
        lines = (out / "trace.csv").read_text().splitlines()
        assert lines[0] == "iteration,objective"
        report = json.loads((out / "report.json").read_text())
        assert len(report["replicates"]) == 2
        assert len(report["cross_correlation"]) == 2
        assert report["objective"] == min(r["objective"] for r in report["replicates"])
        bp = np.loadtxt(out / "beampattern.csv", delimiter=",", skiprows=1)
        assert bp.shape == (37, 3)

    def test_json_format(self, tmp_path):
        out = tmp_path / "out"
        cli.main(["design", "--config", str(write_config(tmp_path, SMALL)), "--out", str(out), "--format", "json"])
        trace = json.loads((out / "trace.json").read_text())
        assert trace["iteration"][0] == 0 and len(trace["objective"]) == len(trace["iteration"])

    def test_rescore(self, tmp_path):
        out = tmp_path / "out"
        cli.main(["design", "--config", str(write_config(tmp_path, SMALL)), "--out", str(out)])
        f, alpha = cli.rescore(out)
        report = json.loads((out / "report.json").read_text())
        assert f == pytest.approx(report["objective"], rel=1e-10)
        assert alpha == pytest.approx(report["alpha"], rel=1e-10)

    def test_bad_config_exit_code(self, tmp_path, capsys):
        path = write_config(tmp_path, {"array": {"M": -1}})
        assert cli.main(["design", "--config", str(path), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
        assert "array/M" in capsys.readouterr().err

    def test_unreadable_config(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert cli.main(["design", "--config", str(path)]) == cli.EXIT_CONFIG

    def test_numeric_abort_writes_diagnostics(self, tmp_path, monkeypatch):
        from mimobeam import solver as solver_mod

        def bad(self, state):
            raise solver_mod.MonotonicityError("forced", {
                "iteration": 1, "f_old": 1.0, "f_new": 2.0, "iterate": np.ones(2, complex),
                "parts": type("P", (), dict(psi_J1=1.0, psi_J2=0.0, psi_E1=0.0, psi_E2=0.0, lmax_BJ=0.0))(),
            })

        monkeypatch.setattr(solver_mod.MMSolver, "step", bad)
        out = tmp_path / "o"
        code = cli.main(["design", "--config", str(write_config(tmp_path, SMALL)), "--out", str(out)])
        assert code == cli.EXIT_NUMERIC
        assert json.loads((out / "diagnostics.json").read_text())["f_new"] == 2.0


class TestSelfcheckCommand:
    def test_passes(self, capsys):
        assert cli.main(["selfcheck", "--instances", "10"]) == 0
        assert capsys.readouterr().out.count("PASS") == 7

    def test_failure_exit_code(self, monkeypatch):
        from mimobeam import oracle
        monkeypatch.setattr(oracle, "selfcheck", lambda **kw: [("J", False, 1.0)])
        assert cli.main(["selfcheck"]) == cli.EXIT_SELFCHECK
