import json

import pytest

from selfish_caching.cli import main
from selfish_caching.io import load_network, network_to_dict
from selfish_caching.scenarios import build


@pytest.fixture
def fig(tmp_path):
    def make(name, *params):
        out = tmp_path / f"{name}.json"
        args = ["scenario", name, "--out", str(out)]
        for p in params:
            args += ["--param", p]
        assert main(args) == 0
        return str(out)
    return make


def run(capsys, *args):
    code = main(list(args))
    out, err = capsys.readouterr()
    return code, out, err


def test_scenario_round_trips(fig):
    path = fig("fig4_poa_chain", "I=6")
    assert network_to_dict(load_network(path)) == network_to_dict(build("fig4_poa_chain", I=6))


def test_scenario_to_stdout(capsys):
    code, out, _ = run(capsys, "scenario", "fig1")
    assert code == 0 and json.loads(out)["nodes"][0] == "1"


def test_fig5_sides(capsys):
    _, left, _ = run(capsys, "scenario", "fig5_paradox_pair", "--param", "side=left")
    _, right, _ = run(capsys, "scenario", "fig5_paradox_pair")
    assert len(json.loads(left)["nodes"]) == 2 and len(json.loads(right)["nodes"]) == 3


def test_validate(capsys, fig, tmp_path):
    code, _, err = run(capsys, "validate", fig("abilene"))
    assert code == 0 and err == ""
    bad = json.loads(open(fig("fig1")).read())
    bad["paths"][0]["path"] = ["1"]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(bad))
    code, _, err = run(capsys, "validate", str(p))
    assert code == 1 and "does not end" in err


def test_malformed_input(capsys, tmp_path):
    p = tmp_path / "x.json"
    p.write_text("not json")
    assert run(capsys, "props", str(p))[0] == 1
    assert run(capsys, "props", str(tmp_path / "missing.json"))[0] == 1
    p.write_text(json.dumps({"nodes": []}))
    code, _, err = run(capsys, "props", str(p))
    assert code == 1 and "required" in err


def test_props(capsys, fig):
    code, out, _ = run(capsys, "props", fig("fig2_triangle"))
    assert code == 0 and json.loads(out)["loop_witness"] == ["1", "3", "2", "1"]


def test_psne_non_termination(capsys, fig):
    code, _, err = run(capsys, "psne", fig("fig2_triangle"))
    assert code == 2 and "1->3->2->1" in err


def test_psne(capsys, fig):
    code, out, _ = run(capsys, "psne", fig("fig1"), "--seed", "2")
    d = json.loads(out)
    assert code == 0 and d["verified"] and d["seed"] == 2


def test_psne_all_and_limit(capsys, fig):
    code, out, _ = run(capsys, "psne-all", fig("fig2_triangle"))
    assert code == 0 and json.loads(out)["count"] == 0
    assert run(capsys, "psne-all", fig("abilene"), "--limit", "10")[0] == 2


def test_approx_psne(capsys, fig):
    code, out, _ = run(capsys, "approx-psne", fig("abilene", "unequal_sizes=true"))
    assert code == 0 and json.loads(out)["beta"] == 2.0
    assert run(capsys, "approx-psne", fig("fig1"))[0] == 1


def test_opt_and_upper(capsys, fig):
    path = fig("fig4_poa_chain", "I=10")
    code, out, _ = run(capsys, "opt", path)
    assert code == 0 and json.loads(out)["welfare_opt_exact"] == pytest.approx(992)
    code, out, _ = run(capsys, "upper", path)
    assert code == 0 and json.loads(out)["welfare_opt_upper"] >= 992 - 1e-6


def test_analyze_fig4(capsys, fig):
    code, out, _ = run(capsys, "analyze", fig("fig4_poa_chain", "I=10"))
    d = json.loads(out)
    assert code == 0 and d["poa_exact"] == pytest.approx(0.1018, abs=1e-4)


def test_analyze_from_stdin(capsys, monkeypatch, fig):
    import io

    monkeypatch.setattr("sys.stdin", io.StringIO(open(fig("fig7_curvature")).read()))
    code, out, _ = run(capsys, "analyze", "-")
    assert code == 0 and json.loads(out)["delta_g"] == pytest.approx(0.5)


def test_experiment(capsys, tmp_path):
    cfg = {"scenario": "abilene", "sweep": "capacity", "values": [1, 2], "trials": 2}
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    out = tmp_path / "r.csv"
    summary = tmp_path / "s.csv"
    assert main(["experiment", str(p), "--out", str(out), "--summary", str(summary)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "sweep,trial,seed,G_ne,G_opt,L_upper,ratio,status"
    assert len(lines) == 5
    assert "ratio_upper_mean" in summary.read_text().splitlines()[0]


def test_experiment_bad_config(capsys, tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"sweep": "bogus", "values": [1]}))
    assert run(capsys, "experiment", str(p))[0] == 1
