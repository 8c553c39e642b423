import json

import numpy as np
import pytest

from l96gen.dynamics import SystemSpec, Trajectory
from l96gen.experiments import hovmoeller_grid
from l96gen.gmap import G3, G5, tilde
from l96gen.io import (
    fmt, load_site_params, read_csv, read_eigencurve, read_hovmoeller, read_json, read_stationary,
    read_trajectory, spec_from_json, spec_to_json, write_csv, write_eigencurve, write_hovmoeller,
    write_json, write_stationary, write_trajectory,
)
from l96gen.spectral import eigen_curve, laurent_of


def test_fmt():
    assert fmt(None) == "" and fmt(True) == "true" and fmt(np.int64(3)) == "3"
    x = 0.1 + 0.2
    assert float(fmt(x)) == x


def test_trajectory_round_trip_bitwise(tmp_path, rng):
    tr = Trajectory(np.cumsum(rng.uniform(0.1, 1, 5)), rng.normal(size=(5, 7)) * 1e3)
    write_trajectory(tmp_path / "t.csv", tr)
    back = read_trajectory(tmp_path / "t.csv")
    np.testing.assert_array_equal(back.times, tr.times)
    np.testing.assert_array_equal(back.states, tr.states)
    assert read_csv(tmp_path / "t.csv")[0] == ["t"] + [f"x{i}" for i in range(7)]


def test_trajectory_bad_header(tmp_path):
    (tmp_path / "bad.csv").write_text("time,a\n0,1\n")
    with pytest.raises(ValueError):
        read_trajectory(tmp_path / "bad.csv")
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(ValueError):
        read_csv(tmp_path / "empty.csv")


def test_eigencurve_round_trip(tmp_path):
    c = eigen_curve(laurent_of(G3), 36, F=0.9, samples=101)
    write_eigencurve(tmp_path / "c.csv", tmp_path / "p.csv", c)
    s, v = read_eigencurve(tmp_path / "c.csv")
    j, p = read_eigencurve(tmp_path / "p.csv")
    np.testing.assert_array_equal(s, c.s)
    np.testing.assert_array_equal(v, c.values)
    np.testing.assert_array_equal(p, c.points)


def test_stationary_round_trip(tmp_path, rng):
    F, x = rng.normal(size=12), rng.normal(size=12)
    write_stationary(tmp_path / "s.csv", F, x)
    F2, x2 = read_stationary(tmp_path / "s.csv")
    np.testing.assert_array_equal(F2, F)
    np.testing.assert_array_equal(x2, x)


def test_hovmoeller_round_trip(tmp_path, rng):
    tr = Trajectory(np.arange(6) * 0.1, rng.normal(size=(6, 8)))
    g = hovmoeller_grid(tr, (0, 0.5), upsample=3)
    write_hovmoeller(tmp_path / "h.csv", g)
    t, sites, vals = read_hovmoeller(tmp_path / "h.csv")
    np.testing.assert_array_equal(t, g.times)
    np.testing.assert_array_equal(sites, g.sites)
    np.testing.assert_array_equal(vals, g.values)


def test_json_cleaning(tmp_path):
    write_json(tmp_path / "a.json", {"x": np.float64(1.5), "n": np.int32(2), "v": np.arange(3), "bad": np.inf,
                                     "ok": np.bool_(True)})
    assert read_json(tmp_path / "a.json") == {"x": 1.5, "n": 2, "v": [0, 1, 2], "bad": None, "ok": True}


def test_csv_stdout(capsys):
    write_csv(None, ("a", "b"), [(1, 0.5)])
    assert capsys.readouterr().out == "a,b\n1,0.5\n"


def test_spec_json_round_trip(rng):
    for spec in (
        SystemSpec.standard(36, 8.0),
        SystemSpec(10, G5 + 0.5 * tilde(G3), rng.uniform(1, 2, 10), 1.5, rng.normal(size=10)),
        SystemSpec.inviscid_system(4, G3 - tilde(G3), allow_aliasing=True),
    ):
        data = json.loads(json.dumps(spec_to_json(spec)))
        back = spec_from_json(data)
        assert back.n == spec.n and back.advection == spec.advection
        for f in ("alpha", "beta", "gamma"):
            np.testing.assert_array_equal(getattr(back, f), getattr(spec, f))
        assert back.inviscid == spec.inviscid and back.allow_aliasing == spec.allow_aliasing
    assert spec_to_json(SystemSpec.standard(36, 8.0))["advection"] == "G3"
    with pytest.raises(ValueError):
        spec_from_json({"advection": "G3"})


def test_site_params_csv(tmp_path):
    n = 100
    rows = ["alpha,beta,gamma"] + [("1,1,2" if i < 50 else "0.5,1,1") for i in range(n)]
    (tmp_path / "p.csv").write_text("\n".join(rows) + "\n")
    a, b, g = load_site_params(tmp_path / "p.csv", n)
    assert a[0] == 1 and a[-1] == 0.5 and g[49] == 2 and g[50] == 1
    (tmp_path / "short.csv").write_text("\n".join(rows[:-1]) + "\n")
    with pytest.raises(ValueError, match="99 rows"):
        load_site_params(tmp_path / "short.csv", n)
    (tmp_path / "neg.csv").write_text("alpha,beta,gamma\n" + "1,0,1\n" * 4)
    with pytest.raises(ValueError, match="beta"):
        load_site_params(tmp_path / "neg.csv", 4)
    (tmp_path / "hdr.csv").write_text("a,b,c\n" + "1,1,1\n" * 4)
    with pytest.raises(ValueError, match="header"):
        load_site_params(tmp_path / "hdr.csv", 4)


def test_site_params_json(tmp_path):
    (tmp_path / "p.json").write_text(json.dumps({"alpha": 2.0, "gamma": [1, 2, 3, 4]}))
    a, b, g = load_site_params(tmp_path / "p.json", 4)
    np.testing.assert_array_equal(a, 2.0)
    np.testing.assert_array_equal(b, 1.0)
    np.testing.assert_array_equal(g, [1, 2, 3, 4])
    with pytest.raises(ValueError, match="expected 5"):
        load_site_params(tmp_path / "p.json", 5)
