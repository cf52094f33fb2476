"""Randomized structural properties of the derivation pipeline.

Random collision models are built from the Maxwell-molecule matrices by
adding small symmetric perturbations that preserve the conservation
kernel, then renormalizing so the shear rate stays at -1.  Every such
model must satisfy the same structural guarantees as the tabulated ones.
"""

import numpy as np
from hypothesis import given, settings, strategies as hyp

from r13lab import boundary as bnd
from r13lab import coeffs as C
from r13lab import model as mdl

_N = 8


def _random_cms(seed):
    rng = np.random.default_rng(seed)
    mats = [m.copy() for m in C.CollisionMatrixSet.maxwell(_N).a]
    for l, m in enumerate(mats):
        P = 0.05 * rng.standard_normal(m.shape)
        P = 0.5 * (P + P.T)
        # keep the conservation rows/columns exactly zero
        if l == 0:
            P[:2, :] = 0.0
            P[:, :2] = 0.0
        elif l == 1:
            P[0, :] = 0.0
            P[:, 0] = 0.0
        m += P
    scale = -1.0 / mats[2][0, 0]
    return C.CollisionMatrixSet(N=_N, a=tuple(scale * m for m in mats),
                                label=f"random-{seed}")


@settings(max_examples=15, deadline=None)
@given(hyp.integers(min_value=0, max_value=10 ** 9))
def test_random_models_keep_channel_structure(seed):
    cms = _random_cms(seed)
    mc, basis, A, L = C.derive(cms)
    sys = mdl.assemble_channel_system(mc, 0.2)
    WA = sys.W @ sys.A1
    assert np.max(np.abs(WA - WA.T)) < 1e-10
    S = 0.5 * (sys.W @ sys.Lrel + (sys.W @ sys.Lrel).T)
    w = np.linalg.eigvalsh(S)
    assert w[-1] < 1e-10
    assert int(np.sum(np.abs(w) < 1e-9)) == 4


@settings(max_examples=15, deadline=None)
@given(hyp.integers(min_value=0, max_value=10 ** 9))
def test_random_models_close_at_second_order(seed):
    cms = _random_cms(seed)
    mc, basis, A, L = C.derive(cms)
    sys37 = mdl.assemble_37_system(basis, A, L, 0.2)
    assert mdl.super_burnett_residual(sys37) < 1e-10


@settings(max_examples=8, deadline=None)
@given(hyp.integers(min_value=0, max_value=10 ** 9))
def test_random_models_have_admissible_transport_bounds(seed):
    mc = C.derive(_random_cms(seed))[0]
    k = mc.k
    slack = 1e-12
    assert (3.0 * k[2]) ** 2 / 4.0 <= 1.5 * k[1] * 0.5 * k[10] + slack
    assert k[4] ** 2 <= k[3] * (24.0 / 25.0) * k[7] + slack


@settings(max_examples=6, deadline=None)
@given(hyp.integers(min_value=0, max_value=10 ** 9))
def test_random_models_give_positive_wall_gram(seed):
    cms = _random_cms(seed)
    mc, basis, A, L = C.derive(cms)
    op = bnd.halfspace_gram(basis, 1.0)
    # the stored Gram is column-scaled by the basis norms; conjugate back
    # to the orthonormal odd basis, where it must be symmetric positive
    # definite, and stay positive after the normal-velocity elimination
    s = np.sqrt(op.norms)
    Zhat = op.Z * (s[None, :] / s[:, None])
    assert np.max(np.abs(Zhat - Zhat.T)) < 1e-12
    assert np.linalg.eigvalsh(0.5 * (Zhat + Zhat.T))[0] > 0.0
    Ze = bnd.apply_wall_elimination(0.5 * (Zhat + Zhat.T))
    w = np.linalg.eigvalsh(0.5 * (Ze[1:, 1:] + Ze[1:, 1:].T))
    assert w[0] > 0.0


@settings(max_examples=15, deadline=None)
@given(hyp.integers(min_value=0, max_value=10 ** 9))
def test_left_vector_spectrum_pairs(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    r = int(rng.integers(1, n))
    Aoe = np.zeros((n, n))
    Aoe[:r, :r] = rng.standard_normal((r, r))
    B = rng.standard_normal((n, n))
    Loo = -(B @ B.T) - 0.2 * np.eye(n)
    B2 = rng.standard_normal((n, n))
    Lee = -(B2 @ B2.T) - 0.2 * np.eye(n)
    lam, Vo, Ve, U1, V1 = bnd.layer_left_vectors(Aoe, Loo, Lee)
    rank = np.linalg.matrix_rank(Aoe)
    assert lam.size == rank  # plus/minus pairing: half the modes decay
    assert np.all(lam > 0.0)


@settings(max_examples=15, deadline=None)
@given(hyp.integers(min_value=0, max_value=10 ** 9))
def test_layer_removal_annihilates_random_targets(seed):
    rng = np.random.default_rng(seed)
    n = 5
    B = rng.standard_normal((n, n))
    Q = -(B @ B.T) - 0.5 * np.eye(n)
    lvec = rng.standard_normal(n)
    block = {(i, j) for i in range(n) for j in range(n)
             if i <= 2 or j <= 2}
    import warnings as _w
    with _w.catch_warnings():
        _w.simplefilter("ignore", RuntimeWarning)
        Qm = bnd.remove_layers(Q, [lvec], block)
    assert np.max(np.abs(lvec @ Qm)) < 1e-10 * max(1.0, np.max(np.abs(Qm)))
    assert np.max(np.abs(Qm - Qm.T)) == 0.0
    assert np.array_equal(Qm[3:, 3:], Q[3:, 3:])
