import io
import math

import numpy as np
import pytest

from r13lab import boundary as bnd
from r13lab import coeffs as C
from r13lab import steady1d as st


def _solve(eta, kn=0.2, walls=(0.0, 0.2)):
    mc, bc = C.load_builtin(eta)
    return st.solve_fourier_steady(mc, bc, kn, walls)


def test_residuals_within_bounds():
    for eta in (5.0, 10.0, math.inf):
        sol = _solve(eta)
        assert sol.ode_residual < 1e-8
        assert sol.bc_residual < 1e-10


def test_homogeneous_walls_give_zero_solution():
    sol = _solve(10.0, walls=(0.0, 0.0))
    for prof in sol.profiles.values():
        assert np.max(np.abs(prof)) == 0.0


def test_maxwell_heat_flux_is_constant():
    sol = _solve(5.0)
    qb = sol.profiles["qbar2"]
    assert np.max(qb) - np.min(qb) == 0.0
    assert qb[0] == pytest.approx(sol.constants["C_qbar"])


def test_constant_relation_between_source_terms():
    for eta in (5.0, 10.0):
        sol = _solve(eta)
        c = sol.constants
        expect = -2.0 * C.load_builtin(eta)[0].l1 / (3.0 * sol.kn) * c["C_qbar"]
        assert c["C_qbar1"] == pytest.approx(expect, rel=1e-12)


def test_velocity_identically_zero_and_rho_gauge():
    sol = _solve(10.0)
    assert np.max(np.abs(sol.profiles["v2"])) == 0.0
    mean = np.trapezoid(sol.profiles["rho"], sol.x)
    scale = max(np.max(np.abs(sol.profiles["rho"])), 1e-30)
    assert abs(mean) < 1e-6 * scale  # analytic gauge, trapezoid check


def test_wall_swap_reflection_symmetry():
    # swapping the wall temperatures mirrors the profiles in x, with the
    # odd fields (heat flux) negated
    a = _solve(10.0, walls=(0.0, 0.2))
    b = _solve(10.0, walls=(0.2, 0.0))
    for even in ("rho", "theta", "sigbar22"):
        assert np.max(np.abs(b.profiles[even] - a.profiles[even][::-1])) < 1e-12
    for odd in ("qbar2", "q2"):
        assert np.max(np.abs(b.profiles[odd] + a.profiles[odd][::-1])) < 1e-12


def test_temperature_jump_at_walls():
    sol = _solve(10.0, kn=0.2, walls=(0.0, 0.2))
    th = sol.profiles["theta"]
    assert abs(th[0] - 0.0) > 1e-3
    assert abs(th[-1] - 0.2) > 1e-3


def test_second_layer_amplitudes_removed():
    sol = _solve(10.0, kn=0.2)
    sp = bnd.reduce_to_ode(C.load_builtin(10.0)[0], 0.2)
    amps = bnd.fit_layer_amplitudes(sol.x, sol.profiles["theta"], sp, 0.2)
    smooth = max(abs(amps[0]), abs(amps[1]), abs(amps[4]), abs(amps[5]))
    assert max(abs(amps[2]), abs(amps[3])) <= 1e-6 * smooth


def test_profile_csv_format():
    sol = _solve(10.0, kn=0.2)
    fh = io.StringIO()
    st.write_profile_csv(sol, fh)
    lines = fh.getvalue().splitlines()
    assert lines[0] == "x,rho,theta,v2,qbar2,sigbar22,q2"
    assert len(lines) == 1 + sol.x.size
    vals = [float(tok) for tok in lines[1].split(",")]
    assert vals[0] == -0.5
    # 17 significant digits survive a round trip
    assert format(vals[2], ".17g") == lines[1].split(",")[2]
    # determinism
    fh2 = io.StringIO()
    st.write_profile_csv(_solve(10.0, kn=0.2), fh2)
    assert fh2.getvalue() == fh.getvalue()


def test_ill_posed_boundary_detection():
    mc, bc = C.load_builtin(10.0)
    from dataclasses import replace
    broken = replace(bc, m1=np.zeros_like(bc.m1), m2=np.zeros_like(bc.m2))
    with pytest.raises(C.CoefficientError):
        st.solve_fourier_steady(mc, broken, 0.2, (0.0, 0.2))
