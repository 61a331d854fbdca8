import json
import math
import os
import pathlib

import numpy as np
import pytest

import gsbr


@pytest.fixture
def sigma_x():
    grid = gsbr.ModeGrid.uniform(0.0, 4.0, 2)
    return gsbr.Model("sigma_x", grid, n_max=3)


def test_grid_and_norms():
    grid = gsbr.ModeGrid.uniform(0.0, 4.0, 5, "relativistic", 1.0)
    assert len(grid) == 5
    assert grid.weights[0] == pytest.approx(0.5)
    assert grid.omega[4] == pytest.approx(math.sqrt(17.0))
    f = gsbr.FormFactor(np.full(5, 2.0 + 0j))
    # trapezoid weights on [0, 4] sum to 4
    assert gsbr.scale_norm(f, 0.0, grid) == pytest.approx(4.0)
    assert gsbr.pairing(f, f, grid) == pytest.approx(16.0)


def test_hamiltonian_is_hermitian(sigma_x):
    h = sigma_x.hamiltonian()
    assert h.shape == (sigma_x.dim, sigma_x.dim)
    assert sigma_x.dim == 2 * sigma_x.fock_dim
    assert np.abs(h - h.conj().T).max() == 0.0
    h_free = sigma_x.free_hamiltonian()
    a = sigma_x.interaction()
    assert np.abs(h - (h_free + a + a.conj().T)).max() < 1e-14


def test_krein_matches_numpy_inverse(sigma_x):
    h = sigma_x.hamiltonian()
    for z in (-3.0, 0.5 - 2j, -1 + 5j):
        direct = np.linalg.inv(h - z * np.eye(sigma_x.dim))
        krein = sigma_x.krein_resolvent(z)
        assert np.linalg.norm(krein - direct, 2) < 1e-9 * np.linalg.norm(direct, 2)


def test_singular_point_raises(sigma_x):
    ground = np.linalg.eigvalsh(sigma_x.hamiltonian())[0]
    with pytest.raises(gsbr.SingularFormula):
        sigma_x.krein_resolvent(ground)


def test_validator():
    grid = gsbr.ModeGrid.uniform(0.0, 4.0, 2)
    assert gsbr.Model("sigma_x", grid, 2).validate()["verdict"]
    rwa = gsbr.Model("rwa", grid, 2).validate()
    assert not rwa["verdict"]
    assert "normal" in rwa["failures"]


def test_self_energy_single_mode():
    grid = gsbr.ModeGrid([1.0], [1.0], [2.0], 1.0)
    assert gsbr.self_energy(gsbr.FormFactor(np.ones(1, dtype=complex)), grid) == pytest.approx(-0.5)


def test_convergence_study_runs():
    grid = gsbr.ModeGrid.uniform(0.0, 8.0, 5)
    rep = gsbr.convergence_study(gsbr.Model("sigma_x", grid, 2), [0.0, 2.0, 4.0, 6.0])
    assert rep["reference_cutoff"] == 8.0
    assert rep["strictly_decreasing"]
    dists = [r["resolvent_dist"][0] for r in rep["rungs"]]
    assert dists == sorted(dists, reverse=True)


def test_errors_map_to_python():
    grid = gsbr.ModeGrid.uniform(0.0, 4.0, 2)
    with pytest.raises(ValueError):
        gsbr.Model("no_such_preset", grid, 2)
    with pytest.raises(gsbr.ConfigError):
        gsbr.run_config('{"model": {"strength": 1}}')


def test_run_config(tmp_path):
    cfg_dir = pathlib.Path(os.environ.get("GSBR_CONFIG_DIR", pathlib.Path(__file__).parents[2] / "configs"))
    cfg = json.loads((cfg_dir / "sigma_x_small.json").read_text())
    cfg["output"] = str(tmp_path)
    code, studies, _ = gsbr.run_config(json.dumps(cfg))
    assert code == 0
    assert all(s["pass"] for s in studies)
    for s in studies:
        assert (tmp_path / f"{s['study']}.csv").exists()
    assert "resolvent-check" in gsbr.study_names()
