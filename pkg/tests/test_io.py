import json
import os

import numpy as np
import pytest

from conftest import bilinear_ring
from ugen.algebra.poly import PolySystem
from ugen.bench.experiment import mle_data
from ugen.bench.systems import gen_katsura, gen_mle_symmetric
from ugen.io import (FormatError, dump_json, load_json, load_solutions, load_system, point_from_dict,
                     point_to_dict, ring_from_dict, ring_to_dict, save_solutions, save_system, witness_to_dict,
                     write_atomic)
from ugen.tracking import MultiProjPoint


@pytest.mark.parametrize("system", [gen_katsura(4), gen_mle_symmetric(3, 2, mle_data(3))])
def test_system_round_trip(tmp_path, system):
    path = tmp_path / "s.json"
    save_system(path, system, "demo")
    back = load_system(path)
    assert back.ring == system.ring
    x = np.random.default_rng(0).normal(size=system.ring.nvars) + 0.5j
    np.testing.assert_allclose([p.evaluate(x) for p in back], [p.evaluate(x) for p in system], rtol=1e-15)
    assert json.loads(path.read_text())["name"] == "demo"


def test_solutions_round_trip_is_exact(tmp_path):
    R = bilinear_ring()
    rng = np.random.default_rng(1)
    pts = [MultiProjPoint(rng.normal(size=4) + 1j * rng.normal(size=4), R.groups, "Success") for _ in range(3)]
    path = tmp_path / "sol.json"
    save_solutions(path, pts, R, method="ugen", seed=3)
    back = load_solutions(path, R)
    for a, b in zip(pts, back):
        assert np.array_equal(a.coords, b.coords) and b.status == "Success"
    data = load_json(path)
    assert data["method"] == "ugen" and data["groups"] == [["x0", "x1"], ["y0", "y1"]]
    assert len(data["points"][0]["coordinates"]) == 2


def test_ring_dict_round_trip():
    R = bilinear_ring()
    assert ring_from_dict(ring_to_dict(R)) == R


@pytest.mark.parametrize("data", [
    {},
    {"groups": [["a", "b"]], "variables": ["a", "c"]},
    {"groups": [["a", "b"]], "variables": ["b", "a"]},
])
def test_bad_rings(data):
    with pytest.raises(FormatError):
        ring_from_dict(data)


def test_bad_system_files(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(FormatError):
        load_system(p)
    p.write_text(json.dumps({"groups": [["x", "y"]]}))
    with pytest.raises(FormatError):
        load_system(p)
    p.write_text(json.dumps({"groups": [["x", "y"]], "equations": ["x^2 + q"]}))
    with pytest.raises(ValueError):
        load_system(p)


def test_bad_points():
    R = bilinear_ring()
    with pytest.raises(FormatError):
        point_from_dict({"coordinates": [[[1, 0], [0, 0]]]}, R)
    with pytest.raises(FormatError):
        point_from_dict({"coordinates": [[[1, 0]], [[1, 0], [2, 0]]]}, R)
    p = MultiProjPoint(np.array([1, 2j, 3, 4]), R.groups)
    assert np.array_equal(point_from_dict(point_to_dict(p), R).coords, p.coords)


def test_write_atomic_leaves_no_partial_file(tmp_path):
    target = tmp_path / "out.json"
    target.write_text("old")
    with pytest.raises(TypeError):
        dump_json(target, {"bad": object()})
    assert target.read_text() == "old"
    assert os.listdir(tmp_path) == ["out.json"]
    write_atomic(target, "new")
    assert target.read_text() == "new"


def test_witness_dict_is_json(parabola_random_witness):
    d = witness_to_dict(parabola_random_witness)
    text = json.dumps(d)
    assert json.loads(text)["dim"] == 1 and len(d["points"]) == 2
