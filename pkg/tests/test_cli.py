import csv
import io
import json

import numpy as np
import pytest

from athermal import cli
from athermal.channels import channel_to_descriptor, encode_matrix, haar_unitary, identity_channel
from athermal.errors import SolverError

from .conftest import LN2

ID2 = channel_to_descriptor(identity_channel(2))
THERMAL = {"din": 2, "dout": 2, "kind": "thermal", "hamiltonian": [[0, 0], [0, 1]]}


def job(command, **kw):
    return {"command": command, "channel": ID2, "hamiltonian": [[0, 0], [0, 0]], **kw}


def invoke(tmp_path, doc, *flags):
    path = tmp_path / "job.json"
    path.write_text(json.dumps(doc))
    out, err = io.StringIO(), io.StringIO()
    rc = cli.main([doc.get("command", "free-energy"), "--job", str(path), *flags], stdout=out, stderr=err)
    return rc, out.getvalue(), err.getvalue()


def test_parse_defaults():
    unitary = {"din": 2, "dout": 2, "kind": "unitary", "data": encode_matrix(haar_unitary(2, 3))}
    spec = cli.parse_job({"command": "free-energy", "channel": unitary, "beta": 1.0})
    assert spec.seed == 42
    assert spec.optimizer_config().restarts == 32
    assert spec.betas == [1.0]
    assert spec.out_format == "json" and spec.out_path is None


def test_parse_sweep():
    spec = cli.parse_job(job("free-energy", beta_sweep={"start": 0.1, "stop": 2.0, "steps": 20}))
    assert len(spec.betas) == 20
    assert spec.betas[0] == pytest.approx(0.1) and spec.betas[-1] == pytest.approx(2.0)


def test_parse_collects_every_error():
    with pytest.raises(cli.JobError) as info:
        cli.parse_job(job("cost", beta=1.0, epsilon=1.5))
    assert any(e.startswith("epsilon") for e in info.value.errors)
    bad = {"command": "nope", "channel": {"din": 0}, "beta": -1, "beta_sweep": {"start": 1}, "alpha": 0.2, "seed": -3}
    with pytest.raises(cli.JobError) as info:
        cli.parse_job(bad)
    fields = {e.split(":")[0].split(".")[0] for e in info.value.errors}
    assert {"command", "channel", "alpha", "seed"} <= fields
    with pytest.raises(cli.JobError):
        cli.parse_job("{not json")


def test_beta_required_except_entropy_and_energy():
    with pytest.raises(cli.JobError) as info:
        cli.parse_job(job("free-energy"))
    assert any("beta" in e for e in info.value.errors)
    cli.parse_job(job("entropy"))
    cli.parse_job(job("energy"))


def test_free_energy_golden_unit():
    rep = cli.run(cli.parse_job(job("free-energy", beta=1.0)))
    row = next(r for r in rep.rows if r.quantity == "resource")
    assert row.value == pytest.approx(2 * LN2, abs=1e-5)
    assert row.converged


def test_cost_at_zero_error():
    rep = cli.run(cli.parse_job(job("cost", beta=1.0, epsilon=0.0)))
    assert rep.rows[0].value == pytest.approx(LN2, abs=1e-6)


def test_verify_thermal_channel_exits_zero(tmp_path):
    rc, out, err = invoke(tmp_path, {"command": "verify", "channel": THERMAL, "beta": 1.0})
    assert rc == 0, err
    rows = json.loads(out)["rows"]
    assert rows and all(r["converged"] for r in rows)


def test_verify_exit_code_tracks_failures(tmp_path, monkeypatch):
    real = cli._rows_at

    def one_bad(spec, beta):
        rows = real(spec, beta)
        rows[0].converged = False
        return rows

    monkeypatch.setattr(cli, "_rows_at", one_bad)
    rc, _, err = invoke(tmp_path, {"command": "verify", "channel": THERMAL, "beta": 1.0})
    assert rc == 1
    assert "check failed" in err


def test_csv_one_row():
    rep = cli.run(cli.parse_job(job("energy")))
    lines = cli.render(rep, "csv").splitlines()
    assert len(lines) == 2
    assert tuple(lines[0].split(",")) == cli.COLUMNS
    rec = next(csv.DictReader(io.StringIO(cli.render(rep, "csv"))))
    assert float(rec["value"]) == pytest.approx(0.0, abs=1e-12)


def test_json_roundtrip_twelve_digits():
    rep = cli.run(cli.parse_job(job("free-energy", beta=0.7)))
    back = json.loads(cli.render(rep, "json"))
    for row, rec in zip(rep.rows, back["rows"]):
        assert float(rec["value"]) == float(cli.fmt_float(row.value))
    assert back["columns"] == list(cli.COLUMNS)


def test_sweep_rows_ascending(tmp_path):
    doc = job("free-energy", beta_sweep={"start": 0.1, "stop": 2.0, "steps": 20}, kind="max")
    rc, out, _ = invoke(tmp_path, doc, "--format", "csv")
    assert rc == 0
    recs = [r for r in csv.DictReader(io.StringIO(out)) if r["quantity"] == "resource"]
    betas = [float(r["beta"]) for r in recs]
    assert len(betas) == 20 and betas == sorted(betas)
    # F_inf[id_2] = 2 ln 2 / beta at every temperature
    for r in recs:
        assert float(r["value"]) == pytest.approx(2 * LN2 / float(r["beta"]), rel=1e-9)


def test_idempotent_output(tmp_path):
    doc = job("free-energy", beta=1.3, optimizer={"restarts": 4})
    paths = []
    for k in range(2):
        p = tmp_path / f"out{k}.json"
        rc, _, _ = invoke(tmp_path, doc, "--out", str(p))
        assert rc == 0
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_output_directory_override(tmp_path, monkeypatch):
    monkeypatch.setenv("ATHERMAL_OUT", str(tmp_path / "reports"))
    rc, out, _ = invoke(tmp_path, job("energy"), "--out", "e.csv")
    assert rc == 0 and out == ""
    text = (tmp_path / "reports" / "e.csv").read_text()
    assert text.startswith(",".join(cli.COLUMNS))


def test_schema_error_exit_code(tmp_path):
    rc, out, err = invoke(tmp_path, job("cost", beta=1.0), "--eps", "1.5")
    assert rc == 2 and out == ""
    assert "epsilon" in err
    (tmp_path / "broken.json").write_text("{")
    assert cli.main(["entropy", "--job", str(tmp_path / "broken.json")], io.StringIO(), io.StringIO()) == 2


def test_solver_breakdown_exit_code_leaves_no_file(tmp_path, monkeypatch):
    def boom(spec, beta):
        raise SolverError("stalled")

    monkeypatch.setattr(cli, "_rows_at", boom)
    target = tmp_path / "r.json"
    rc, _, err = invoke(tmp_path, job("free-energy", beta=1.0), "--out", str(target))
    assert rc == 3 and "stalled" in err
    assert not target.exists()
    assert not list(tmp_path.glob(".athermal-*"))


def test_failed_write_removes_partial(tmp_path, monkeypatch):
    rep = cli.run(cli.parse_job(job("energy")))

    def broken(*a, **k):
        raise OSError(28, "No space left on device")

    monkeypatch.setattr(cli.os, "replace", broken)
    with pytest.raises(OSError) as info:
        cli.emit(rep, "json", str(tmp_path / "x.json"))
    assert "x.json" in str(info.value)
    assert list(tmp_path.iterdir()) == []


def test_help_lists_commands_and_flags(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    for name in cli.COMMANDS:
        assert name in text
    for flag in ("--job", "--beta", "--beta-sweep", "--eps", "--alpha", "--seed", "--restarts", "--out", "--format", "--timing"):
        assert flag in text
    assert "ATHERMAL_OUT" in text


def test_random_command_is_seeded():
    doc = {"command": "random", "random": {"din": 2, "dout": 2, "env_dim": 2}, "beta": 1.0, "hamiltonian": np.diag([0, 1.0]).tolist()}
    doc["optimizer"] = {"restarts": 4}
    a = cli.render(cli.run(cli.parse_job(doc)), "json")
    b = cli.render(cli.run(cli.parse_job(doc)), "json")
    assert a == b
    other = cli.render(cli.run(cli.parse_job({**doc, "seed": 7})), "json")
    assert other != a
