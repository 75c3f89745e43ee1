import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from wintgen.ambient import GRW, Explicit, QuasiConstant, SpaceForm
from wintgen.cli import main
from wintgen.report import dumps, render_csv
from wintgen.scenario import ScenarioError, load_scenario, parse_ambient_spec

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, text, name="s.toml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


BASE = '[ambient]\nmodel = "spaceform"\nc = 0.0\n[submanifold]\nn = 3\nm = 6\n'


class TestScenario:
    def test_symmetry_completion(self, tmp_path):
        sc = load_scenario(write(tmp_path, BASE + "h.2.1.3 = 0.5\nh.1.2.2 = 1.0\n"))
        H = sc.forms[0].h
        assert H[1, 0, 2] == H[1, 2, 0] == 0.5
        assert H[0, 1, 1] == 1.0

    def test_consistent_duplicate_is_accepted(self, tmp_path):
        sc = load_scenario(write(tmp_path, BASE + "h.1.1.2 = 0.5\nh.1.2.1 = 0.5\n"))
        assert sc.forms[0].h[0, 0, 1] == 0.5

    def test_conflict_rejected(self, tmp_path):
        with pytest.raises(ScenarioError, match=r"h\.1\.2\.1"):
            load_scenario(write(tmp_path, BASE + "h.1.1.2 = 0.5\nh.1.2.1 = 0.7\n"))

    def test_index_out_of_range(self, tmp_path):
        with pytest.raises(ScenarioError, match="outside"):
            load_scenario(write(tmp_path, BASE + "h.4.1.1 = 1.0\n"))

    def test_syntax_error_reports_line(self, tmp_path):
        with pytest.raises(ScenarioError, match="line 3"):
            load_scenario(write(tmp_path, '[ambient]\nmodel = "spaceform"\nc = \n'))

    def test_missing_field(self, tmp_path):
        with pytest.raises(ScenarioError, match="ambient: missing field 'c'"):
            load_scenario(write(tmp_path, '[ambient]\nmodel = "spaceform"\n[submanifold]\nn = 3\nm = 6\n'))

    def test_wrong_type(self, tmp_path):
        with pytest.raises(ScenarioError, match=r"submanifold\.n"):
            load_scenario(write(tmp_path, '[ambient]\nmodel = "spaceform"\nc = 0\n[submanifold]\nn = "3"\nm = 6\n'))

    def test_unknown_inequality(self, tmp_path):
        with pytest.raises(ScenarioError, match="run.inequalities"):
            load_scenario(write(tmp_path, BASE + '[run]\ninequalities = ["nope"]\n'))

    def test_missing_immersion_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="does not exist"):
            load_scenario(write(tmp_path, BASE.replace("n = 3\nm = 6\n", 'source = "immersion"\nfile = "x.toml"\n')))

    def test_random_source_uses_env_seed(self, tmp_path, monkeypatch):
        text = BASE + 'source = "random"\ncount = 2\n'
        monkeypatch.setenv("WINTGEN_SEED", "5")
        a = load_scenario(write(tmp_path, text))
        monkeypatch.setenv("WINTGEN_SEED", "6")
        b = load_scenario(write(tmp_path, text))
        assert not np.allclose(a.forms[0].h, b.forms[0].h)
        assert a.inputs["submanifold"]["seed"] == 5

    def test_ambient_models(self, tmp_path):
        text = ('[ambient]\nmodel = "grw"\nc = 1.0\nf = 2.0\nf_prime = 0.5\nf_second = 0.1\ntangency = "tangent"\n'
                "[submanifold]\nn = 3\nm = 5\n")
        sc = load_scenario(write(tmp_path, text))
        assert isinstance(sc.ambient, GRW) and sc.ambient.tangent_norm_sq == 1.0

    def test_ambient_specs(self):
        assert parse_ambient_spec("spaceform:0", 3) == SpaceForm(0.0)
        q = parse_ambient_spec("quasi:1,2,0.25", 3)
        assert isinstance(q, QuasiConstant) and q.tangent_norm_sq == pytest.approx(0.25)
        g = parse_ambient_spec("grw:1,2,0.5,0.1,normal", 3)
        assert g.t_normal_norm_sq == 1.0
        assert parse_ambient_spec("explicit:3,6", 3) == Explicit(3.0, 6.0)
        with pytest.raises(ScenarioError):
            parse_ambient_spec("spaceform:x", 3)


class TestReport:
    def test_float_precision(self):
        text = dumps({"x": 0.1, "y": 1.0, "z": [1e-300, -2.5], "ok": True, "n": 3})
        doc = json.loads(text)
        assert doc == {"x": 0.1, "y": 1.0, "z": [1e-300, -2.5], "ok": True, "n": 3}
        assert "0.10000000000000001" in text

    def test_csv_columns(self):
        doc = {"scenarios": [{"results": [{"id": "prop1_rhoN", "n": 3, "m": 6, "ambient": "spaceform:0.0",
                                           "lhs": 1.0, "rhs": 1.5, "gap": 0.5, "equality": False, "tol": 1e-8}]}]}
        rows = list(csv.reader(io.StringIO(render_csv(doc))))
        assert rows[0] == ["id", "n", "m", "ambient", "lhs", "rhs", "gap", "equality"]
        assert rows[1][0] == "prop1_rhoN" and rows[1][-1] == "false"


class TestCommands:
    def test_verify_totally_geodesic(self, capsys):
        code, out, _ = run(capsys, "verify", str(SCENARIOS / "totally_geodesic.toml"), "--format", "json")
        assert code == 0
        rows = json.loads(out)["scenarios"][0]["results"]
        assert rows and all(r["gap"] == 0.0 and r["equality"] for r in rows)
        assert {"id", "lhs", "rhs", "gap", "equality", "tol"} <= set(rows[0])

    def test_verify_table(self, capsys):
        code, out, _ = run(capsys, "verify", str(SCENARIOS / "totally_geodesic.toml"))
        assert code == 0 and "prop1_rhoN" in out and "0.000000e+00" in out

    def test_verify_all_shipped_scenarios(self, capsys):
        paths = sorted(str(p) for p in SCENARIOS.glob("*.toml"))
        code, out, _ = run(capsys, "verify", *paths, "--format", "json")
        assert code == 0
        assert [s["inputs"]["file"] for s in json.loads(out)["scenarios"]] == [Path(p).name for p in paths]

    def test_certificate_in_report(self, capsys):
        code, out, _ = run(capsys, "verify", str(SCENARIOS / "canonical_sphere.toml"), "--format", "json")
        cert = json.loads(out)["scenarios"][0]["certificate"]
        assert code == 0 and cert["verified"] and cert["beta"] == pytest.approx(0.75)

    def test_malformed_scenario_exit_1(self, capsys, tmp_path):
        code, _, err = run(capsys, "verify", str(write(tmp_path, BASE + "h.1.1.2 = 1\nh.1.2.1 = 2\n")))
        assert code == 1 and "h.1.2.1" in err

    def test_missing_file_exit_1(self, capsys, tmp_path):
        code, _, err = run(capsys, "verify", str(tmp_path / "absent.toml"))
        assert code == 1 and "absent.toml" in err

    def test_usage_error_exit_1(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["fuzz", "--samples", "many"])
        assert exc.value.code == 1
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 1

    def test_violation_exit_2(self, capsys):
        code, out, err = run(capsys, "fuzz", "--n", "3", "--codim", "2", "--samples", "3000", "--seed", "1",
                             "--typeset-variant", "--format", "json")
        assert code == 2
        offending = [s["offending"] for s in json.loads(out)["scenarios"] if "offending" in s]
        assert offending and np.asarray(offending[0]["h"]).shape == (2, 3, 3)
        assert "violation" in err

    def test_fuzz_min_slack_line(self, capsys):
        code, out, _ = run(capsys, "fuzz", "--n", "3", "--codim", "3", "--samples", "2000", "--seed", "42")
        assert code == 0 and "min_slack=" in out

    def test_extremal(self, capsys):
        code, out, _ = run(capsys, "extremal", "--ambient", "spaceform:0", "--n", "3", "--m", "6",
                           "--restarts", "1", "--format", "json")
        best = json.loads(out)["scenarios"][0]
        assert code == 0 and abs(best["search"]["best_gap"]) <= 1e-6
        assert best["certificate"]["residual"] <= 1e-4

    def test_immersion_csv(self, capsys):
        code, out, _ = run(capsys, "immersion", "--catalog", "clifford_torus", "--grid", "2", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 8
        assert all(float(r["gap"]) >= -1e-4 for r in rows)

    def test_unknown_catalog_exit_1(self, capsys):
        code, _, err = run(capsys, "immersion", "--catalog", "moebius")
        assert code == 1 and "moebius" in err

    def test_report_round_trip(self, capsys, tmp_path):
        target = tmp_path / "r.json"
        assert main(["fuzz", "--samples", "200", "--format", "json", "--output", str(target)]) == 0
        code, out, _ = run(capsys, "report", str(target), "--format", "json")
        assert code == 0 and out == target.read_text(encoding="utf-8")
        code, out, _ = run(capsys, "report", str(target), "--format", "csv")
        assert out.splitlines()[0] == "id,n,m,ambient,lhs,rhs,gap,equality"

    def test_seed_env_override(self, capsys, monkeypatch):
        monkeypatch.setenv("WINTGEN_SEED", "77")
        _, out, _ = run(capsys, "fuzz", "--samples", "50", "--format", "json")
        assert json.loads(out)["meta"]["seed"] == 77
        _, out, _ = run(capsys, "fuzz", "--samples", "50", "--seed", "3", "--format", "json")
        assert json.loads(out)["meta"]["seed"] == 3
