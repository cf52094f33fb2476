import math
import os

import numpy as np
import pytest

from r13lab import coeffs as C
from r13lab.coeffs import CoefficientError, CollisionMatrixSet, GasModel


def test_maxwell_derivation_matches_builtin_table():
    mc, basis, A, L = C.derive(CollisionMatrixSet.maxwell(20))
    tab, _ = C.load_builtin(5.0)
    assert np.max(np.abs(mc.k - tab.k)) < 1e-12
    assert abs(mc.l1 - tab.l1) < 1e-12
    assert abs(mc.l2 - tab.l2) < 1e-12


def test_builtin_table_values():
    mc17, bc17 = C.load_builtin(17.0)
    assert mc17.k[7] == pytest.approx(9.4576e-1, abs=1e-12)
    mcinf, _ = C.load_builtin(math.inf)
    assert mcinf.l2 == pytest.approx(9.5812e-1, rel=1e-10)
    mc5, bc5 = C.load_builtin(5.0)
    assert bc5.m2 is None and bc5.m5 is None
    assert bc17.m2 is not None and len(bc17.m2) == 8


def test_load_builtin_rejects_unknown_eta():
    with pytest.raises(CoefficientError):
        C.load_builtin(6.0)


def test_kn_convert_known_factors_and_round_trip():
    # omega = 1 (eta = 5): factor reduces to sqrt(pi/2)
    assert GasModel(5.0).omega == pytest.approx(1.0)
    assert C.kn_convert(1.0, 5.0) == pytest.approx(math.sqrt(math.pi / 2.0))
    # omega = 1/2 (hard spheres): 15/24 * sqrt(pi/2)
    assert GasModel(math.inf).omega == pytest.approx(0.5)
    assert C.kn_convert(1.0, math.inf) == pytest.approx(
        math.sqrt(math.pi / 2.0) * 15.0 / 24.0)
    v = 0.37
    back = C.kn_convert(C.kn_convert(v, 10.0), 10.0, direction="to_knbar")
    assert back == pytest.approx(v, rel=1e-14)


def test_collision_file_round_trip(tmp_path):
    cms = CollisionMatrixSet.maxwell(8)
    path = tmp_path / "m.txt"
    cms.to_file(path)
    cms2 = CollisionMatrixSet.from_file(path)
    assert cms2.N == 8
    for a, b in zip(cms.a, cms2.a):
        assert np.array_equal(a, b)


def test_collision_set_validation():
    good = CollisionMatrixSet.maxwell(8)
    bad = [m.copy() for m in good.a]
    bad[0][0, 3] = 1.0  # breaks mass conservation
    with pytest.raises(CoefficientError):
        CollisionMatrixSet(N=8, a=tuple(bad))
    asym = [m.copy() for m in good.a]
    asym[2][1, 2] += 1.0
    with pytest.raises(CoefficientError):
        CollisionMatrixSet(N=8, a=tuple(asym))


def test_find_collision_file_uses_data_dir(tmp_path, monkeypatch):
    CollisionMatrixSet.maxwell(8).to_file(tmp_path / "m.txt")
    monkeypatch.setenv("R13_DATA_DIR", str(tmp_path))
    assert C.find_collision_file("m.txt") == str(tmp_path / "m.txt")
    with pytest.raises(CoefficientError):
        C.find_collision_file("absent.txt")
