import math

import numpy as np
import pytest

from r13lab import boundary as bnd
from r13lab import coeffs as C
from r13lab.coeffs import CoefficientError


def test_wall_elimination_schur_example():
    Z = np.array([[2.0, 1.0], [1.0, 3.0]])
    out = bnd.apply_wall_elimination(Z)
    assert np.allclose(out, [[0.0, 0.0], [0.0, 2.5]])


def test_wall_elimination_no_coupling():
    Z = np.array([[2.0, 0.0], [0.0, 3.0]])
    out = bnd.apply_wall_elimination(Z)
    assert np.allclose(out, [[0.0, 0.0], [0.0, 3.0]])


def test_wall_elimination_rejects_bad_pivot():
    with pytest.raises(CoefficientError):
        bnd.apply_wall_elimination(np.array([[-1.0, 0.0], [0.0, 1.0]]))


def test_layer_rates_diagonal_block():
    assert bnd.lambdas_from_b(np.diag([-1.0, -4.0])) == pytest.approx((1.0, 2.0))


def test_layer_rates_table_values():
    oracles = {7.0: (0.92648, 12.696), 10.0: (0.92989, 7.6747),
               17.0: (0.92904, 5.6909), math.inf: (0.92248, 4.2387)}
    for eta, (l1, l2) in oracles.items():
        mc, _ = C.load_builtin(eta)
        sp = bnd.reduce_to_ode(mc, 0.2)
        assert not sp.degenerate
        assert sp.lambda1 == pytest.approx(l1, rel=1e-3)
        assert sp.lambda2 == pytest.approx(l2, rel=1e-3)


def test_layer_rates_maxwell_degenerate():
    mc, _ = C.load_builtin(5.0)
    sp = bnd.reduce_to_ode(mc, 0.2)
    assert sp.degenerate
    assert sp.lambda1 == pytest.approx(math.sqrt(5.0 / 6.0), rel=1e-12)


def test_left_vectors_identity_blocks():
    lam, Vo, Ve, U1, V1 = bnd.layer_left_vectors(
        np.eye(3), -np.eye(3), -np.eye(3))
    assert lam.shape == (3,)
    assert np.allclose(lam, 1.0)


def test_left_vectors_rank_deficient_input():
    rng = np.random.default_rng(11)
    Aoe = np.zeros((4, 4))
    Aoe[:3, :3] = rng.standard_normal((3, 3))
    B = rng.standard_normal((4, 4))
    Loo = -(B @ B.T) - 0.1 * np.eye(4)
    B2 = rng.standard_normal((4, 4))
    Lee = -(B2 @ B2.T) - 0.1 * np.eye(4)
    lam, Vo, Ve, U1, V1 = bnd.layer_left_vectors(Aoe, Loo, Lee)
    assert lam.size == 3  # one positive rate per nonzero singular value
    assert np.all(lam > 0.0)
    assert np.all(np.diff(lam) <= 1e-12)  # sorted descending


def test_remove_layers_micro_example():
    Q = np.array([[1.0, 0.5], [0.5, 2.0]])
    block = {(0, 0), (0, 1), (1, 0)}
    with pytest.warns(RuntimeWarning):
        Qm = bnd.remove_layers(Q, [np.array([1.0, 0.0])], block)
    assert np.allclose(Qm, [[0.0, 0.0], [0.0, 2.0]], atol=1e-12)


def test_remove_layers_trivial_cases():
    Q = np.array([[-2.0, 0.0], [0.0, -3.0]])
    # annihilation already holds for l in the cokernel of the block
    Qm = bnd.remove_layers(Q, [np.array([0.0, 0.0])], {(0, 0)})
    assert np.array_equal(Qm, Q)
    # empty modified block: identity operation
    Qm = bnd.remove_layers(Q, [np.array([1.0, 1.0])], set())
    assert np.array_equal(Qm, Q)


def test_remove_layers_annihilates_and_preserves_outside():
    rng = np.random.default_rng(5)
    B = rng.standard_normal((4, 4))
    Q = -(B @ B.T) - 0.5 * np.eye(4)
    l = rng.standard_normal(4)
    block = {(i, j) for i in range(4) for j in range(4) if i <= 1 or j <= 1}
    Qm = bnd.remove_layers(Q, [l], block)
    assert np.max(np.abs(l @ Qm)) < 1e-12 * np.max(np.abs(Qm))
    assert np.max(np.abs(Qm - Qm.T)) == 0.0
    assert np.array_equal(Qm[2:, 2:], Q[2:, 2:])


def test_layer_fit_round_trip():
    mc, _ = C.load_builtin(10.0)
    sp = bnd.reduce_to_ode(mc, 0.2)
    x = np.linspace(-0.5, 0.5, 101)
    y = 2.0 * np.cosh(sp.lambda1 * x / 0.2) + 0.5 * x
    amps = bnd.fit_layer_amplitudes(x, y, sp, 0.2)
    assert np.allclose(amps, [0.0, 2.0, 0.0, 0.0, 0.5, 0.0], atol=1e-8)


def test_layer_fit_zero_profile_and_overflow_fallback():
    mc, _ = C.load_builtin(10.0)
    sp = bnd.reduce_to_ode(mc, 0.2)
    x = np.linspace(-0.5, 0.5, 51)
    assert np.allclose(bnd.fit_layer_amplitudes(x, 0.0 * x, sp, 0.2), 0.0)
    # kn small enough that cosh(lambda x / kn) overflows in float64 for
    # both rates: the wall-anchored exponential fallback must engage
    kn = 1e-3
    spk = bnd.reduce_to_ode(mc, kn)
    y = 3.0 * np.exp(spk.lambda1 * (x - 0.5) / kn) - 0.25 * x + 0.1
    amps = bnd.fit_layer_amplitudes(x, y, spk, kn)
    assert np.all(np.isfinite(amps))
    assert amps[4] == pytest.approx(-0.25, abs=1e-8)
    assert amps[5] == pytest.approx(0.1, abs=1e-8)


def test_layer_fit_needs_enough_samples():
    mc, _ = C.load_builtin(10.0)
    sp = bnd.reduce_to_ode(mc, 0.2)
    x = np.linspace(-0.5, 0.5, 8)
    with pytest.raises(CoefficientError):
        bnd.fit_layer_amplitudes(x, 0.0 * x, sp, 0.2)


def test_bc_rows_homogeneous_wall_state():
    # matching wall temperature, zero stress and gradients satisfy the
    # heat-flux row with zero flux
    bc5 = C.load_builtin(5.0)[1]
    asm = bnd.assemble_bc_rows_1d(bc5, "right", (0.3, 0.0), kn=0.2)
    row, const = asm.row_const("m1")
    u = np.zeros(18)
    u[1] = 0.3  # theta equals the wall value
    assert abs(row @ u + const) < 1e-14


def test_bc_rows_maxwell_omits_absent_groups():
    bc5 = C.load_builtin(5.0)[1]
    asm5 = bnd.assemble_bc_rows_1d(bc5, "left", (0.0, 0.0), kn=0.2)
    bc10 = C.load_builtin(10.0)[1]
    asm10 = bnd.assemble_bc_rows_1d(bc10, "left", (0.0, 0.0), kn=0.2)
    assert "m2" not in asm5.rows
    assert "m2" in asm10.rows
    assert len(asm10.rows) > len(asm5.rows)
