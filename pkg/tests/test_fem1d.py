import math
from dataclasses import replace

import numpy as np
import pytest
import scipy.sparse as sp

from r13lab import coeffs as C
from r13lab import fem1d as fem
from r13lab import model as mdl
from r13lab import steady1d as st
from r13lab.fem1d import ConfigError, FemConfig


def _ops(eta=5.0, kn=0.1, h=1.0 / 50.0, scenario="fourier"):
    mc, bc = C.load_builtin(eta)
    system = mdl.assemble_channel_system(mc, kn)
    cfg = FemConfig(h=h, dt=1.0 / 400.0, t_end=1.0, eta=eta, kn=kn,
                    scenario=scenario)
    return fem.assemble_fem(system, bc, cfg), cfg


def test_config_validation():
    with pytest.raises(ConfigError):
        FemConfig(kn=0.1, knbar=0.2, walls=((0, 0), (0, 0)))
    with pytest.raises(ConfigError):
        FemConfig(walls=((0, 0), (0, 0)))  # neither kn nor knbar
    with pytest.raises(ConfigError):
        FemConfig(kn=0.1, scenario="poiseuille")
    with pytest.raises(ConfigError):
        FemConfig(kn=0.1)  # no walls, no scenario
    with pytest.raises(ConfigError):
        FemConfig(kn=0.1, scenario="fourier", bc_mode="raw")
    with pytest.raises(ConfigError):
        FemConfig(kn=0.1, scenario="fourier", dt=-1.0)
    cfg = FemConfig(knbar=0.15, scenario="couette")
    assert cfg.walls == fem.SCENARIOS["couette"]
    assert cfg.kn_resolved == pytest.approx(C.kn_convert(0.15, 5.0))


def test_time_series_validation():
    t = np.array([0.0, 1.0, 1.0])
    z = np.zeros(3)
    with pytest.raises(ValueError):
        fem.TimeSeries(t=t, entropy=z, residual=z,
                       wall_fluxes=np.zeros((3, 2)))
    with pytest.raises(ValueError):
        fem.TimeSeries(t=np.arange(3.0), entropy=z[:2], residual=z,
                       wall_fluxes=np.zeros((3, 2)))


def test_mass_matrix_row_sums():
    ops, cfg = _ops()
    nn = ops.x.size
    nf = len(ops.names)
    Mx, _, _ = fem._p1_matrices(nn, cfg.h)
    mc, _ = C.load_builtin(5.0)
    W = mdl.assemble_channel_system(mc, 0.1).W
    expect = np.kron(np.asarray(Mx.sum(axis=1)).ravel(), W.sum(axis=1))
    got = np.asarray(ops.M.sum(axis=1)).ravel()
    iv2 = ops.names.index("v2")
    keep = np.ones(nn * nf, dtype=bool)
    keep[iv2] = keep[(nn - 1) * nf + iv2] = False  # essential rows replaced
    assert np.max(np.abs(got[keep] - expect[keep])) < 1e-14


def test_degenerate_assembly_zero_coefficients():
    mc, bc = C.load_builtin(5.0)
    system = mdl.assemble_channel_system(mc, 0.1)
    n = len(system.names)
    zero_sys = mdl.LinearMomentSystem(
        names=system.names, A1=np.zeros((n, n)), D=np.zeros((n, n)),
        Lrel=np.zeros((n, n)), W=system.W, kn=0.1)
    cfg = FemConfig(h=1.0 / 20.0, dt=0.01, t_end=1.0, eta=5.0, kn=0.1,
                    scenario="fourier")
    ops = fem.assemble_fem(zero_sys, bc, cfg)
    assert ops.K.nnz == 0 or np.max(np.abs(ops.K.toarray())) == 0.0
    Md = ops.M.toarray()
    iv2 = system.names.index("v2")
    keep = np.ones(Md.shape[0], dtype=bool)
    keep[iv2] = keep[(ops.x.size - 1) * n + iv2] = False  # essential rows
    Ms = Md[np.ix_(keep, keep)]
    assert np.max(np.abs(Ms - Ms.T)) < 1e-14
    assert np.linalg.eigvalsh(0.5 * (Ms + Ms.T))[0] > 0.0


def test_non_convective_blocks_symmetric():
    ops, _ = _ops(eta=10.0)
    for block in (ops.diff, ops.relax):
        d = (block - block.T).toarray()
        assert np.max(np.abs(d)) < 1e-12


def test_crank_nicolson_scalar_relaxation():
    # du/dt = -u, dt = 1/2: exact trapezoidal factor (1 - dt/2)/(1 + dt/2)
    one = sp.csc_matrix(np.eye(1))
    ops = fem.FemOperators(x=np.zeros(1), names=("u",), M=one, K=one,
                           g=np.zeros(1), kn=1.0, walls=None)
    u1 = fem.step_crank_nicolson(np.array([1.0]), ops, 0.5)
    assert u1[0] == pytest.approx(0.6, abs=1e-14)


def test_crank_nicolson_identity_with_zero_operator():
    one = sp.csc_matrix(np.eye(2))
    zero = sp.csc_matrix((2, 2))
    ops = fem.FemOperators(x=np.zeros(2), names=("a", "b"), M=one, K=zero,
                           g=np.zeros(2), kn=1.0, walls=None)
    u0 = np.array([0.3, -1.2])
    assert np.array_equal(fem.step_crank_nicolson(u0, ops, 0.1), u0)


def test_discrete_energy_and_residual_definitions():
    ops, _ = _ops()
    rng = np.random.default_rng(0)
    u = rng.standard_normal(ops.g.size)
    e = fem.discrete_energy(u, ops)
    assert e == pytest.approx(0.5 * u @ (ops.M @ u))
    r = ops.K @ u - ops.g
    assert fem.steady_residual(u, ops) == pytest.approx(
        math.sqrt(r @ (ops.M @ r)))


def test_initial_snapshot_is_exact():
    cfg = FemConfig(h=1.0 / 50.0, dt=1.0 / 200.0, t_end=0.1, eta=5.0,
                    kn=0.1, scenario="fourier", outputs=(0.0,))
    snaps, series = fem.run_scenario(cfg)
    s0 = snaps[0]
    assert s0.t == 0.0
    assert np.all(s0.field("theta") == 0.1)  # wall average
    for name in s0.names:
        if name != "theta":
            assert np.max(np.abs(s0.field(name))) == 0.0
    assert series.t[0] == 0.0


def test_couette_leaves_temperature_block_untouched():
    cfg = FemConfig(h=1.0 / 50.0, dt=1.0 / 200.0, t_end=1.0, eta=5.0,
                    kn=0.1, scenario="couette")
    snaps, _ = fem.run_scenario(cfg)
    final = snaps[-1]
    assert np.max(np.abs(final.field("v1"))) > 1e-3  # shear did develop
    for name in ("rho", "theta", "qbar2", "sigbar11", "sigbar22"):
        assert np.max(np.abs(final.field(name))) < 1e-12


def test_residual_decreases_after_transient():
    cfg = FemConfig(h=1.0 / 100.0, dt=1.0 / 400.0, t_end=4.0, eta=5.0,
                    kn=0.1, scenario="fourier")
    _, series = fem.run_scenario(cfg)
    r = series.residual
    assert r[0] > 0.0
    tail = r[r.size // 2:]
    assert np.all(np.diff(tail) <= 1e-15)
    assert tail[-1] < 1e-4


def test_homogeneous_walls_entropy_never_increases():
    mc, bc = C.load_builtin(10.0)
    system = mdl.assemble_channel_system(mc, 0.1)
    cfg = FemConfig(h=1.0 / 50.0, dt=1.0 / 200.0, t_end=1.0, eta=10.0,
                    kn=0.1, walls=((0.0, 0.0), (0.0, 0.0)))
    ops = fem.assemble_fem(system, bc, cfg)
    rng = np.random.default_rng(42)
    u = rng.standard_normal(ops.g.size)
    iv2 = ops.names.index("v2")
    u[iv2] = u[(ops.x.size - 1) * len(ops.names) + iv2] = 0.0
    e = fem.discrete_energy(u, ops)
    for _ in range(200):
        u = fem.step_crank_nicolson(u, ops, cfg.dt)
        e2 = fem.discrete_energy(u, ops)
        assert e2 <= e * (1.0 + 1e-12)
        e = e2
    assert e >= 0.0


def test_steady_limit_matches_analytic_solution():
    eta, kn = 10.0, 0.2
    mc, bc = C.load_builtin(eta)
    system = mdl.assemble_channel_system(mc, kn)
    cfg = FemConfig(h=1.0 / 200.0, dt=1.0 / 400.0, t_end=1.0, eta=eta,
                    kn=kn, scenario="fourier")
    ops = fem.assemble_fem(system, bc, cfg)
    u = fem.steady_limit(ops)
    sol = st.solve_fourier_steady(mc, bc, kn, (0.0, 0.2),
                                  nsample=ops.x.size)
    nf = len(ops.names)
    for name in ("theta", "qbar2", "sigbar22", "rho"):
        i = ops.names.index(name)
        err = u[i::nf] - sol.profiles[name]
        l2 = math.sqrt(np.trapezoid(err ** 2, ops.x))
        assert l2 < 1e-4
    assert fem.steady_residual(u, ops) < 1e-9 * np.max(np.abs(ops.K.toarray()))


def test_run_scenario_rejects_onsager_with_tabulated_model():
    cfg = FemConfig(h=1.0 / 20.0, dt=0.01, t_end=0.05, eta=10.0, kn=0.2,
                    scenario="fourier", bc_mode="onsager")
    with pytest.raises(ConfigError):
        fem.run_scenario(cfg)


def test_snapshot_times_round_to_steps():
    cfg = FemConfig(h=1.0 / 50.0, dt=1.0 / 200.0, t_end=0.5, eta=5.0,
                    kn=0.1, scenario="fourier", outputs=(0.2501,))
    snaps, _ = fem.run_scenario(cfg)
    assert any(abs(s.t - 0.25) < 1e-12 for s in snaps)
