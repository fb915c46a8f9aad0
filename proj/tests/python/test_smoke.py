import json

import numpy as np
import pytest

import hlpm


def small_config(**particle):
    p = {"N": 5000, "dt": 1e-3, "T": 0.1, "seed": 3}
    p.update(particle)
    return {
        "graph": {"name": "identity"},
        "u0": {"name": "indicator", "a": 0, "b": 1},
        "domain": {"x_max": 5.0, "dx": 0.01},
        "time": {"T": 0.1, "dt": 1e-3, "snapshots": [0.05, 0.1]},
        "particle": p,
    }


def test_graph_catalog():
    g = hlpm.graphs.jump(1.0, 1.0, 2.0)
    iv = g.eval(1.0)
    assert (iv.lo, iv.hi) == (1.0, 2.0)
    r = hlpm.graphs.identity().resolvent(0.5, 3.0)
    assert r.u == pytest.approx(2.0) and r.eta == pytest.approx(2.0)
    with pytest.raises(Exception):
        hlpm.graphs.identity().eval(-1.0)


def test_linear_solve_matches_images():
    grid = hlpm.Grid1D.half_line(400, 0.0125)
    x = grid.centers()
    u0 = hlpm.DensityField(grid, (x < 1.0).astype(float))
    traj = hlpm.solve(u0, hlpm.graphs.identity(), 0.2, 1e-3, snapshots=[0.1])
    assert traj.times[0] == 0.0 and traj.times[-1] == pytest.approx(0.2)
    assert traj.max_mass_deviation < 1e-10
    u = traj.density(0.2)
    exact = hlpm.reflected_heat(u0, 0.2)
    assert hlpm.compare(u, exact)["L1"] < 5e-3
    assert np.all(u.values >= -1e-12)


def test_config_errors_are_value_errors():
    cfg = small_config()
    cfg["domain"]["dx"] = -1
    with pytest.raises(ValueError, match="domain.dx"):
        hlpm.normalize_config(cfg)


def test_hash_stable_under_defaults():
    cfg = small_config()
    assert hlpm.config_hash(cfg) == hlpm.config_hash(hlpm.normalize_config(cfg))


def test_pde_pipeline_writes_report(tmp_path):
    report = hlpm.run(small_config(), "pde", out=tmp_path)
    assert report["passed"]
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["config_hash"] == report["config_hash"]
    assert list(tmp_path.glob("density_t*.csv"))


def test_particle_runs_are_reproducible():
    a = hlpm.run(small_config(), "particle", seed=11)
    b = hlpm.run(small_config(), "particle", seed=11, threads=2)
    assert a["metrics"] == b["metrics"]
