"""Self-validation suite: the nine build acceptance checks.

Each criterion function returns (passed, detail).  The command line
`validate` subcommand and the acceptance tests both run these, so a
release can be checked from either entry point.
"""

import math
import time

import numpy as np

from . import coeffs as C
from . import model as mdl
from . import boundary as bnd
from . import steady1d as st
from . import fem1d as fem

SUPPORTED_ETA = (5.0, 7.0, 10.0, 17.0, math.inf)

# decay rates of the steady layer modes per power index
_LAYER_TABLE = {
    5.0: (0.91287, None),
    7.0: (0.92648, 12.696),
    10.0: (0.92989, 7.6747),
    17.0: (0.92904, 5.6909),
    math.inf: (0.92248, 4.2387),
}

_SQ2PI = math.sqrt(2.0 * math.pi)

_cache = {}


def _maxwell_pipeline():
    if "maxwell" not in _cache:
        cms = C.CollisionMatrixSet.maxwell(20)
        t0 = time.time()
        mc, basis, A, L = C.derive(cms)
        t_derive = time.time() - t0
        bc, op = bnd.derive_bc(basis, A, L, chi=1.0)
        _cache["maxwell"] = (mc, basis, A, L, bc, op, t_derive)
    return _cache["maxwell"]


def criterion_1():
    """Layer decay rates of the built-in models."""
    t0 = time.time()
    worst = 0.0
    for eta, (l1, l2) in _LAYER_TABLE.items():
        mc, _ = C.load_builtin(eta)
        sp = bnd.reduce_to_ode(mc)
        worst = max(worst, abs(sp.lambda1 - l1) / l1)
        if l2 is not None:
            worst = max(worst, abs(sp.lambda2 - l2) / l2)
        elif not sp.degenerate:
            return False, "eta=5 model should have a single layer"
    dt = time.time() - t0
    ok = worst <= 1e-3 and dt < 1.0
    return ok, f"max relative deviation {worst:.2e}, {dt:.3f}s"


def criterion_2():
    """Transport coefficients of the monatomic reference model."""
    mc, *_, t_derive = _maxwell_pipeline()
    target = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0])
    worst = float(np.max(np.abs(mc.k - target)))
    worst = max(worst, abs(mc.l1 - 1.0), abs(mc.l2 - 1.0))
    ok = worst <= 1e-10 and t_derive < 5.0
    return ok, f"max deviation {worst:.2e}, derivation {t_derive:.2f}s"


def criterion_3():
    """Closed-form wall coefficients of the reference model."""
    _, _, _, _, bc, _, _ = _maxwell_pipeline()
    anchors = [
        (bc.m1[0], 2.0 / _SQ2PI), (bc.m1[1], 0.5 / _SQ2PI),
        (bc.m1[2], 1.6 / _SQ2PI), (bc.m1[3], 1.92 / _SQ2PI),
        (bc.m3[0], 1.0 / _SQ2PI), (bc.m4[7], 4.8),
        (bc.m6[6], 2.0), (bc.m71, 0.5 / _SQ2PI),
        (bc.m81, 0.5 / _SQ2PI),
    ]
    worst = max(abs(a - b) for a, b in anchors)
    return worst <= 1e-8, f"max deviation {worst:.2e}"


def criterion_4():
    """No second-layer content in steady solutions with the tabled wall
    coefficients."""
    worst = 0.0
    for eta in (10.0, math.inf):
        mc, bc = C.load_builtin(eta, chi=1.0)
        sol = st.solve_fourier_steady(mc, bc, 0.2, (0.0, 0.2))
        for name in ("theta", "sigbar22"):
            amp = bnd.fit_layer_amplitudes(sol.x, sol.profiles[name],
                                           sol.spectrum, 0.2)
            smooth = max(abs(amp[0]), abs(amp[1]), abs(amp[4]), abs(amp[5]))
            worst = max(worst, max(abs(amp[2]), abs(amp[3])) / smooth)
    return worst <= 1e-6, f"max relative second-layer amplitude {worst:.2e}"


def criterion_5():
    """Long-time plate-heating runs against the analytic steady state."""
    details = []
    ok = True
    for eta in (5.0, 10.0):
        t0 = time.time()
        cfg = fem.FemConfig(eta=eta, kn=0.2, scenario="fourier",
                            t_end=8.0, stop_tol=None)
        snaps, _ = fem.run_scenario(cfg)
        dt = time.time() - t0
        fin = snaps[-1]
        mc, bc = C.load_builtin(eta)
        sol = st.solve_fourier_steady(mc, bc, 0.2, (0.0, 0.2),
                                      nsample=fin.x.size)
        err = max(
            math.sqrt(np.trapezoid((fin.field(nm) - sol.profiles[nm]) ** 2,
                                   fin.x))
            for nm in ("rho", "theta", "qbar2", "sigbar22"))
        ok &= err <= 1e-4 and dt < 120.0
        details.append(f"eta={eta}: L2 {err:.2e} in {dt:.0f}s")
    return ok, "; ".join(details)


def criterion_6():
    """Discrete entropy decay with resting walls."""
    details = []
    ok = True
    rng = np.random.default_rng(7)
    for eta in SUPPORTED_ETA:
        mc, bc = C.load_builtin(eta)
        cfg = fem.FemConfig(h=1.0 / 100.0, dt=1.0 / 400.0, t_end=1.0,
                            eta=eta, kn=0.2, walls=((0.0, 0.0), (0.0, 0.0)))
        system = mdl.assemble_channel_system(mc, 0.2)
        ops = fem.assemble_fem(system, bc, cfg)
        u = 0.01 * rng.standard_normal(ops.x.size * 9)
        iv2 = system.names.index("v2")
        u[iv2] = u[(ops.x.size - 1) * 9 + iv2] = 0.0
        e_prev = fem.discrete_energy(u, ops)
        e0 = e_prev
        bad = 0.0
        for _ in range(400):
            u = fem.step_crank_nicolson(u, ops, cfg.dt)
            e = fem.discrete_energy(u, ops)
            bad = max(bad, (e - e_prev) / e0)
            e_prev = e
        ok &= bad <= 1e-12
        details.append(f"eta={eta}: {bad:.1e}")
    return ok, "max per-step relative increase " + "; ".join(details)


def criterion_7():
    """Structural symmetry, dissipativity and wall-operator positivity."""
    msgs = []
    ok = True
    for eta in SUPPORTED_ETA:
        mc, _ = C.load_builtin(eta)
        system = mdl.assemble_channel_system(mc, 0.2)
        WA = system.W @ system.A1
        sym = float(np.max(np.abs(WA - WA.T)))
        WL = system.W @ system.Lrel
        WLs = 0.5 * (WL + WL.T)
        ev = np.linalg.eigvalsh(WLs)
        nsd = float(ev[-1])
        nker = int(np.sum(np.abs(ev) < 1e-10))
        k = mc.k
        ineq = ((3.0 * k[2]) ** 2 / 4.0
                <= 1.5 * k[1] * 0.5 * k[10] + 1e-12) and \
            (k[4] ** 2 <= k[3] * 24.0 / 25.0 * k[7] + 1e-12)
        good = sym <= 1e-10 and nsd <= 1e-12 and nker == 4 and ineq
        ok &= good
        if not good:
            msgs.append(f"eta={eta}: sym {sym:.1e} nsd {nsd:.1e} "
                        f"kernel {nker} ineq {ineq}")
    _, _, _, _, _, op, _ = _maxwell_pipeline()
    zel = bnd.apply_wall_elimination(op.Z)
    evz = np.linalg.eigvalsh(0.5 * (zel[1:, 1:] + zel[1:, 1:].T))
    zpd = float(evz[0]) > 0.0
    ok &= zpd
    detail = "all structural checks hold" if ok else \
        "; ".join(msgs) + ("" if zpd else "; eliminated wall Gram not PD")
    return ok, detail


def criterion_8():
    """Order-consistency identity of the second-order flux couplings."""
    _, basis, A, L, _, _, _ = _maxwell_pipeline()
    sys37 = mdl.assemble_37_system(basis, A, L, kn=1.0)
    res = mdl.super_burnett_residual(sys37)
    return res <= 1e-10, f"residual {res:.2e}"


def criterion_9():
    """Spatial convergence of the steady finite-element limit."""
    eta = 10.0
    mc, bc = C.load_builtin(eta)
    sysm = mdl.assemble_channel_system(mc, 0.2)
    errs = []
    for h in (1.0 / 250.0, 1.0 / 500.0, 1.0 / 1000.0):
        cfg = fem.FemConfig(h=h, dt=1.0 / 4000.0, t_end=1.0, eta=eta,
                            kn=0.2, scenario="fourier")
        ops = fem.assemble_fem(sysm, bc, cfg)
        u = fem.steady_limit(ops).reshape(ops.x.size, 9)
        sol = st.solve_fourier_steady(mc, bc, 0.2, (0.0, 0.2),
                                      nsample=ops.x.size)
        err = sum(
            np.trapezoid((u[:, mdl.CHANNEL_NAMES.index(nm)]
                          - sol.profiles[nm]) ** 2, ops.x)
            for nm in ("rho", "theta", "v2", "qbar2", "sigbar22"))
        errs.append(math.sqrt(err))
    orders = [math.log(errs[i - 1] / errs[i]) / math.log(2.0)
              for i in (1, 2)]
    ok = min(orders) >= 1.9
    return ok, f"observed orders {orders[0]:.3f}, {orders[1]:.3f}"


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
    9: criterion_9,
}


def run(ids=None):
    """Run the selected criteria; returns list of (id, passed, detail)."""
    ids = sorted(CRITERIA) if ids is None else sorted(ids)
    out = []
    for i in ids:
        try:
            passed, detail = CRITERIA[i]()
        except Exception as exc:  # a crash is a failure, not an abort
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        out.append((i, passed, detail))
    return out
