import numpy as np
import pytest

import symfield as sf
from conftest import poly_field, poly_model
from symfield.cli import main
from symfield.features import monomial_basis
from symfield.serialize import (
    load_json,
    load_model,
    model_to_dict,
    read_csv,
    save_json,
    save_model,
    write_csv,
)

EXPERIMENT_OPT = {
    "algorithm": "riemannian-adagrad",
    "loss": "mean-squared",
    "learning_rate": 0.1,
    "epochs": 5000,
}


def run(*argv):
    return main([str(a) for a in argv])


def opt_config_file(tmp_path, **overrides):
    path = tmp_path / "opt.json"
    save_json({**EXPERIMENT_OPT, **overrides}, str(path))
    return str(path)


def test_gen_writes_csv_and_sidecar(tmp_path):
    out = tmp_path / "d.csv"
    assert run("gen", "--name", "cubic", "--size", "50", "--seed", "3",
               "--out", out) == 0
    data, targets = read_csv(str(out))
    assert data.shape == (50, 2)
    assert np.array_equal(targets, data[:, 0] ** 3 - data[:, 1] ** 2)
    sidecar = load_json(str(tmp_path / "d.json"))
    assert sidecar["name"] == "cubic"
    assert sidecar["seed"] == 3


def test_fit_fn_reproduces_polynomial(tmp_path):
    data_csv = tmp_path / "gq.csv"
    model_json = tmp_path / "f.json"
    assert run("gen", "--name", "gaussian-quadratic", "--size", "500",
               "--seed", "0", "--out", data_csv) == 0
    assert run("fit-fn", "--data", data_csv, "--degree", "2",
               "--out", model_json) == 0
    model = load_model(str(model_json))
    # (x-1)^2 + 4(y-1)^2 expanded over (1, x, y, x^2, xy, y^2)
    assert np.allclose(model.coefficients, [5, -2, -8, 1, 0, 4], atol=1e-8)
    assert load_json(str(model_json))["residual"] <= 1e-10


def test_pipeline_recovers_annihilating_field(tmp_path):
    data_csv = tmp_path / "gq.csv"
    run("gen", "--name", "gaussian-quadratic", "--size", "2000",
        "--seed", "0", "--out", data_csv)
    run("fit-fn", "--data", data_csv, "--degree", "2", "--out",
        tmp_path / "f.json")
    assert run("find-vf", "--model", tmp_path / "f.json", "--data", data_csv,
               "--vf-degree", "1", "--c", "1",
               "--opt-config", opt_config_file(tmp_path),
               "--out", tmp_path / "vf.json",
               "--trace-out", tmp_path / "trace.json") == 0
    assert load_json(str(tmp_path / "trace.json"))["final_loss"] <= 1e-6

    # truth: 4(y-1) d/dx - (x-1) d/dy annihilates (x-1)^2 + 4(y-1)^2
    truth = poly_field(2, 1, {(0, 0): -4.0, (0, 1): 4.0},
                       {(0, 0): 1.0, (1, 0): -1.0})
    save_model(truth, str(tmp_path / "truth.json"))
    estimate = load_model(str(tmp_path / "vf.json")).field(0)
    save_model(estimate, str(tmp_path / "est.json"))
    assert run("sim", "--truth", tmp_path / "truth.json",
               "--estimate", tmp_path / "est.json",
               "--data", data_csv, "--out", tmp_path / "sim.json") == 0
    report = load_json(str(tmp_path / "sim.json"))
    assert report["aggregate"] >= 0.99


def test_fit_levelset_project_affine_circle(tmp_path):
    data_csv = tmp_path / "c.csv"
    run("gen", "--name", "circle3d", "--size", "400", "--seed", "0",
        "--out", data_csv)
    out_dir = tmp_path / "ls"
    assert run("fit-levelset", "--data", data_csv, "--degree", "2",
               "--strategy", "project-affine",
               "--opt-config", opt_config_file(tmp_path),
               "--out", out_dir) == 0
    frame = load_json(str(out_dir / "frame.json"))
    assert len(frame["axes"]) == 2
    reduced, _ = read_csv(str(out_dir / "reduced.csv"))
    assert reduced.shape == (400, 2)
    assert np.abs(np.linalg.norm(reduced, axis=1) - 1.0).max() <= 1e-5

    elbow = load_json(str(out_dir / "reduced_elbow.json"))
    assert elbow["selected"] == 1 and not elbow["no_elbow"]
    model = load_model(str(out_dir / "reduced_model.json"))
    w = model.W[:, 0]
    expect = np.array([-1.0, 0, 0, 1.0, 0, 1.0]) / np.sqrt(3)
    assert min(np.abs(w - expect).max(), np.abs(w + expect).max()) <= 1e-2


def test_fit_levelset_extend_columns(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, 300)
    data = np.column_stack([x, 2 * x])
    write_csv(str(tmp_path / "line.csv"), data)
    known = poly_model(monomial_basis(2, 1), {(0, 1): 1.0, (1, 0): -2.0})
    save_model(known, str(tmp_path / "known.json"))
    out_dir = tmp_path / "ext"
    assert run("fit-levelset", "--data", tmp_path / "line.csv",
               "--degree", "2", "--strategy", "extend-columns",
               "--known", tmp_path / "known.json", "--k", "1",
               "--opt-config", opt_config_file(tmp_path),
               "--out", out_dir) == 0
    full = load_model(str(out_dir / "model_full.json"))
    stripped = load_model(str(out_dir / "model.json"))
    assert len(full.basis) > len(stripped.basis)
    assert not any(a.artificial for a in stripped.basis.atoms)


def test_flow_quarter_turn(tmp_path):
    field = poly_field(2, 1, {(0, 1): 1.0}, {(1, 0): -1.0})  # y d/dx - x d/dy
    save_model(field, str(tmp_path / "rot.json"))
    assert run("flow", "--field", tmp_path / "rot.json", "--x0", "1,0",
               "--t", np.pi / 2, "--steps", "2000",
               "--out", tmp_path / "traj.csv") == 0
    traj, _ = read_csv(str(tmp_path / "traj.csv"))
    assert traj.shape == (2001, 2)
    assert np.allclose(traj[0], [1.0, 0.0])
    assert np.allclose(traj[-1], [0.0, -1.0], atol=1e-8)


def test_flow_divergence_exit_code(tmp_path):
    field = poly_field(2, 2, {(2, 0): 1.0}, {})  # x^2 d/dx blows up
    save_model(field, str(tmp_path / "bad.json"))
    assert run("flow", "--field", tmp_path / "bad.json", "--x0", "1,0",
               "--t", "5", "--steps", "200",
               "--out", tmp_path / "traj.csv") == 3


def test_transform_invariant_plus_angle(tmp_path):
    theta = np.linspace(0.1, 2.0, 25)
    data = np.column_stack([np.cos(theta), np.sin(theta)])
    write_csv(str(tmp_path / "circ.csv"), data)
    inv = poly_model(monomial_basis(2, 2), {(2, 0): 1.0, (0, 2): 1.0})
    save_json({"models": [model_to_dict(inv)]}, str(tmp_path / "inv.json"))
    assert run("transform", "--data", tmp_path / "circ.csv",
               "--invariants", tmp_path / "inv.json", "--angle",
               "--out", tmp_path / "t.csv") == 0
    with open(tmp_path / "t.csv") as fh:
        assert fh.readline().strip() == "h1,theta"
    table, _ = read_csv(str(tmp_path / "t.csv"))
    assert np.allclose(table[:, 0], 1.0, atol=1e-12)
    assert np.allclose(table[:, 1], theta, atol=1e-12)


def test_transform_angle_only_single_column(tmp_path):
    write_csv(str(tmp_path / "d.csv"), np.array([[1.0, 1.0], [0.0, 2.0]]))
    assert run("transform", "--data", tmp_path / "d.csv", "--angle",
               "--out", tmp_path / "t.csv") == 0
    table, _ = read_csv(str(tmp_path / "t.csv"))
    assert table.shape == (2, 1)
    assert table[0, 0] == pytest.approx(np.pi / 4)


def test_transform_without_outputs_fails(tmp_path):
    write_csv(str(tmp_path / "d.csv"), np.zeros((3, 2)))
    assert run("transform", "--data", tmp_path / "d.csv",
               "--out", tmp_path / "t.csv") == 2


def _binned_r2(key, targets, bins):
    """In-sample R^2 of a piecewise-constant predictor over equal-count cells."""
    order = np.argsort(key)
    edges = np.array_split(order, bins)
    pred = np.full_like(targets, targets.mean())
    for cell in edges:
        if cell.size:
            pred[cell] = targets[cell].mean()
    ss_res = np.sum((targets - pred) ** 2)
    ss_tot = np.sum((targets - targets.mean()) ** 2)
    return 1.0 - ss_res / ss_tot


def test_angle_coordinate_explains_sector_targets(tmp_path):
    run("gen", "--name", "disc-rot", "--size", "2000", "--seed", "0",
        "--out", tmp_path / "d.csv")
    data, targets = read_csv(str(tmp_path / "d.csv"))
    assert run("transform", "--data", tmp_path / "d.csv", "--angle",
               "--out", tmp_path / "theta.csv") == 0
    theta = read_csv(str(tmp_path / "theta.csv"))[0][:, 0]

    r2_theta = _binned_r2(theta, targets, 196)
    # same cell count in the raw coordinates: a 14x14 grid
    qs = np.linspace(0, 1, 15)[1:-1]
    xcell = np.digitize(data[:, 0], np.quantile(data[:, 0], qs))
    ycell = np.digitize(data[:, 1], np.quantile(data[:, 1], qs))
    raw_key = xcell * 14 + ycell
    pred = np.full_like(targets, targets.mean())
    for cell in np.unique(raw_key):
        mask = raw_key == cell
        pred[mask] = targets[mask].mean()
    r2_raw = 1.0 - np.sum((targets - pred) ** 2) / np.sum(
        (targets - targets.mean()) ** 2
    )
    assert r2_theta >= 0.9
    assert r2_raw <= 0.7


def test_fit_fn_without_targets_fails(tmp_path):
    write_csv(str(tmp_path / "d.csv"), np.zeros((5, 2)))
    assert run("fit-fn", "--data", tmp_path / "d.csv",
               "--out", tmp_path / "f.json") == 2


def test_missing_input_file_fails(tmp_path):
    assert run("fit-fn", "--data", tmp_path / "nope.csv",
               "--out", tmp_path / "f.json") == 2


def test_threads_validation(tmp_path):
    assert run("gen", "--name", "cubic", "--size", "10",
               "--out", tmp_path / "d.csv", "--threads", "0") == 2


def test_seed_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("SYMFIELD_SEED", "7")
    run("gen", "--name", "cubic", "--size", "40", "--seed", "5",
        "--out", tmp_path / "env.csv")
    monkeypatch.delenv("SYMFIELD_SEED")
    run("gen", "--name", "cubic", "--size", "40", "--seed", "7",
        "--out", tmp_path / "direct.csv")
    run("gen", "--name", "cubic", "--size", "40", "--seed", "5",
        "--out", tmp_path / "five.csv")
    env = (tmp_path / "env.csv").read_bytes()
    assert env == (tmp_path / "direct.csv").read_bytes()
    assert env != (tmp_path / "five.csv").read_bytes()


def test_rerun_is_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        d.mkdir()
        run("gen", "--name", "gaussian-quadratic", "--size", "200",
            "--seed", "1", "--out", d / "d.csv")
        run("fit-fn", "--data", d / "d.csv", "--out", d / "f.json")
        run("fit-levelset", "--data", d / "d.csv", "--k", "1",
            "--opt-config", opt_config_file(d, epochs=200),
            "--out", d / "ls")
        outs.append(d)
    for rel in ("d.csv", "f.json", "ls/model.json"):
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes()


def test_grid_command(tmp_path):
    model = poly_model(monomial_basis(2, 2), {(2, 0): 1.0, (0, 2): 1.0})
    save_model(model, str(tmp_path / "m.json"))
    assert run("grid", "--model", tmp_path / "m.json", "--lower=-1,-1",
               "--upper", "1,1", "--resolution", "5",
               "--out", tmp_path / "g.csv") == 0
    with open(tmp_path / "g.csv") as fh:
        assert fh.readline().strip() == "x1,x2,value"
    table, _ = read_csv(str(tmp_path / "g.csv"))
    assert table.shape == (25, 3)
    assert np.allclose(table[:, 2], table[:, 0] ** 2 + table[:, 1] ** 2)
    assert run("grid", "--model", tmp_path / "m.json", "--lower", "1,1",
               "--upper", "0,0", "--out", tmp_path / "g2.csv") == 2


def test_discrete_command_reflection(tmp_path):
    rng = np.random.default_rng(2)
    x = rng.uniform(-2, 2, 300)
    write_csv(str(tmp_path / "p.csv"), np.column_stack([x, x**2]))
    f = poly_model(monomial_basis(2, 2), {(0, 1): 1.0, (2, 0): -1.0})
    save_model(f, str(tmp_path / "f.json"))
    assert run("discrete", "--model", tmp_path / "f.json",
               "--data", tmp_path / "p.csv", "--family", "reflection",
               "--opt-config", opt_config_file(tmp_path, learning_rate=0.05,
                                               epochs=2000),
               "--out", tmp_path / "r.json") == 0
    result = load_json(str(tmp_path / "r.json"))
    a, b = result["parameters"]
    assert abs(a) == pytest.approx(1.0, abs=1e-3)
    assert abs(b) <= 1e-3
