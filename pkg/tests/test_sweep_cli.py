import csv
import json

import pytest

from optograv import cli
from optograv.errors import ConfigError
from optograv.params import preset
from optograv.sweep import (
    RunRecord,
    SweepSpec,
    config_hash,
    evaluate_point,
    reproduce_reference,
    rerun,
    run_sweep,
)


def test_sweep_grid_and_failures(tmp_path):
    out = tmp_path / "sweep.csv"
    spec = SweepSpec.from_dict({
        "base": "A",
        "axes": [{"param": "dy", "log": [1e-8, 1e-6, 3]}, {"param": "m2", "values": [1e-12, 0.0]}],
        "outputs": ["steady", "theta_star", "forces"],
        "output": str(out),
    })
    recs = run_sweep(spec)
    assert len(recs) == 6
    assert [r.status for r in recs].count("invalid") == 3
    bad = next(r for r in recs if r.status != "ok")
    assert "m2 must be positive" in bad.error
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 6
    assert float(rows[0]["dy"]) == 1e-8


def test_sweep_spec_errors():
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"axes": [{"param": "x"}]})
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"axes": [{"param": k, "values": [1]} for k in ("m1", "m2", "dy")]})
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"outputs": ["everything"]})
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"extra": 1})


def test_record_round_trip_and_rerun():
    rec = evaluate_point(preset("B"), ("steady", "theta_star", "variance"))
    assert rec.status == "ok"
    back = RunRecord.from_dict(json.loads(json.dumps(rec.to_dict())))
    assert back.config_hash == config_hash(back.params, back.outputs_requested)
    again = rerun(back)
    assert again.outputs == rec.outputs


def test_reproduce_writes_curves(tmp_path):
    rep = reproduce_reference(tmp_path, n_curve=51)
    names = {r.name: r for r in rep.rows}
    assert all(r.passed for n, r in names.items() if "(A)" not in n or "Theta*_full" not in n)
    assert len(rep.files) == 2
    assert "2.8" in rep.table() or "2.79" in rep.table()


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_steady_json(capsys):
    code, out, err = run(capsys, "steady", "--preset", "A", "--json")
    assert code == 0
    data = json.loads(out)
    assert data[0]["selected"] and data[0]["Delta"] == 0.0
    assert "far-field" in err


def test_cli_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"m2": -1.0}))
    assert run(capsys, "steady", "--config", str(bad))[0] == 2
    bad.write_text("{not json")
    assert run(capsys, "steady", "--config", str(bad))[0] == 2
    assert run(capsys, "steady", "--config", str(bad), "--preset", "A")[0] == 2
    assert run(capsys, "sweep")[0] == 2
    unstable = tmp_path / "u.json"
    unstable.write_text(preset("A").replace(Delta=-3e7).to_json())
    assert run(capsys, "variance", "--config", str(unstable))[0] == 3
    assert run(capsys, "reproduce", "--out", str(tmp_path / "r"))[0] == 4


def test_cli_spectrum_and_theta(capsys, tmp_path):
    code, out, _ = run(capsys, "spectrum", "--points", "5")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "omega_rad_s,S_m2_s" and len(lines) == 6
    # 17 significant digits round-trip
    v = lines[2].split(",")[1]
    assert float(repr(float(v))) == float(v)
    path = tmp_path / "theta.csv"
    code, out, _ = run(capsys, "theta", "--preset", "B", "--points", "11", "--out", str(path))
    assert code == 0
    summary = json.loads(out)
    assert summary["theta_star_simplified_over_G"] == pytest.approx(1.2665e-5, rel=1e-3)
    assert path.read_text().startswith("omega_rad_s,theta_over_G")


def test_cli_variance_gravity(capsys):
    code, out, _ = run(capsys, "variance", "--preset", "B")
    assert code == 0 and json.loads(out)["var0"] > 0
    code, out, _ = run(capsys, "gravity", "--json")
    data = json.loads(out)
    assert data["oracles"]["Semiclassical"]["rel_mixture_vs_average"] < 1e-6


def test_cli_simulate(capsys, tmp_path):
    from conftest import small_system
    cfg = tmp_path / "p.json"
    cfg.write_text(small_system().to_json())
    out = tmp_path / "traj.csv"
    code, _, err = run(capsys, "simulate", "--config", str(cfg), "--seed", "2", "--stride", "100000",
                       "--out", str(out), "--scenario", "cl")
    assert code == 0
    assert out.read_text().splitlines()[0] == "t_s,dx2_m,dp2,re_da,im_da"
    assert json.loads(err.strip().splitlines()[-1])["seed"] == 2
    assert run(capsys, "simulate", "--config", str(cfg), "--dt", "1.0")[0] == 2


def test_cli_sweep(capsys, tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"base": "B", "axes": [{"param": "Delta", "linear": [0, 1e7, 3]}]}))
    code, out, _ = run(capsys, "sweep", "--spec", str(spec), "--out", str(tmp_path / "o.csv"), "--json")
    assert code == 0 and len(json.loads(out)) == 3
