import math

import numpy as np
import pytest

from r13lab import coeffs as C
from r13lab import model as mdl


@pytest.fixture(scope="module")
def maxwell_pipeline():
    mc, basis, A, L = C.derive(C.CollisionMatrixSet.maxwell(20))
    return mc, basis, A, L


def test_channel_names_and_shapes(maxwell_pipeline):
    mc = maxwell_pipeline[0]
    sys = mdl.assemble_channel_system(mc, 0.1)
    assert sys.names == mdl.CHANNEL_NAMES
    n = len(sys.names)
    for M in (sys.A1, sys.D, sys.Lrel, sys.W):
        assert M.shape == (n, n)


def test_weighted_convection_is_symmetric(maxwell_pipeline):
    mc = maxwell_pipeline[0]
    sys = mdl.assemble_channel_system(mc, 0.1)
    WA = sys.W @ sys.A1
    assert np.max(np.abs(WA - WA.T)) < 1e-10


def test_weighted_relaxation_is_nsd_with_conserved_kernel(maxwell_pipeline):
    mc = maxwell_pipeline[0]
    sys = mdl.assemble_channel_system(mc, 0.1)
    S = sys.W @ sys.Lrel
    S = 0.5 * (S + S.T)
    w = np.linalg.eigvalsh(S)
    assert w[-1] < 1e-12
    # mass, energy and two momentum components relax to nothing
    assert int(np.sum(np.abs(w) < 1e-10)) == 4


def test_diffusion_rows_maxwell_vs_general(maxwell_pipeline):
    mc = maxwell_pipeline[0]
    names = mdl.CHANNEL_NAMES
    sys5 = mdl.assemble_channel_system(mc, 0.1)
    rows5 = {names[i] for i in range(len(names))
             if np.max(np.abs(sys5.D[i])) > 1e-12}
    assert rows5 == {"qbar1", "qbar2", "sigbar11", "sigbar12", "sigbar22"}
    mc10, _ = C.load_builtin(10.0)
    sys10 = mdl.assemble_channel_system(mc10, 0.1)
    rows10 = {names[i] for i in range(len(names))
              if np.max(np.abs(sys10.D[i])) > 1e-12}
    assert rows5 < rows10  # variable collision rates couple more fields


def test_second_order_closure_residual(maxwell_pipeline):
    _, basis, A, L = maxwell_pipeline
    sys37 = mdl.assemble_37_system(basis, A, L, 0.1)
    assert mdl.super_burnett_residual(sys37) < 1e-10


def test_eliminated_gram_positive_definite(maxwell_pipeline):
    _, basis, A, L = maxwell_pipeline
    from r13lab import boundary as bnd
    op = bnd.halfspace_gram(basis, 1.0)
    Ze = bnd.apply_wall_elimination(op.Z)
    assert np.max(np.abs(Ze[0])) == 0.0 and np.max(np.abs(Ze[:, 0])) == 0.0
    w = np.linalg.eigvalsh(0.5 * (Ze[1:, 1:] + Ze[1:, 1:].T))
    assert w[0] > 0.0


def test_recover_stress_heat_zero_state(maxwell_pipeline):
    mc = maxwell_pipeline[0]
    x = np.linspace(-0.5, 0.5, 21)
    u = np.zeros((21, 9))
    rec = mdl.recover_stress_heat(x, u, mc, 0.1)
    for key in ("q1", "q2", "sig12", "sig22"):
        assert np.max(np.abs(rec[key])) == 0.0


def test_entropy_is_positive_quadratic(maxwell_pipeline):
    mc = maxwell_pipeline[0]
    sys = mdl.assemble_channel_system(mc, 0.1)
    x = np.linspace(-0.5, 0.5, 51)
    rng = np.random.default_rng(3)
    u = rng.standard_normal((51, 9))
    val = mdl.entropy(u, x, sys.W)
    assert val > 0.0
    assert mdl.entropy(0.0 * u, x, sys.W) == 0.0
    assert mdl.entropy(2.0 * u, x, sys.W) == pytest.approx(4.0 * val)


def test_moment_field_lookup():
    x = np.linspace(-0.5, 0.5, 5)
    u = np.outer(np.ones(5), np.arange(9.0))
    f = mdl.MomentField1D(x=x, u=u, names=mdl.CHANNEL_NAMES, t=1.5)
    assert np.all(f.field("theta") == 1.0)
    assert np.all(f.field("sigbar22") == 8.0)
