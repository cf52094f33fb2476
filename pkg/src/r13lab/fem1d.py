"""Time-dependent channel solver: P1 finite elements with Crank-Nicolson.

The nine-field channel system is discretized on the fixed domain
(-1/2, 1/2) with continuous piecewise-linear elements and the entropy
weight folded into every bilinear form, so the semi-discrete energy obeys
the same balance as the continuous system.  Second-derivative terms are
integrated by parts and the resulting wall fluxes are replaced through the
wall rows (Robin coupling); the normal velocity is pinned to zero at both
ends.  Scenario drivers for plate shear and plate heating are included.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coeffs import CoefficientError, kn_convert, load_builtin
from . import model as mdl
from . import boundary as bnd


class ConfigError(Exception):
    """Invalid run configuration."""


# wall presets: ((theta_left, v1_left), (theta_right, v1_right))
SCENARIOS = {
    "couette": ((0.0, -0.2), (0.0, 0.2)),
    "fourier": ((0.0, 0.0), (0.2, 0.0)),
}


@dataclass
class FemConfig:
    h: float = 1.0 / 1000.0
    dt: float = 1.0 / 4000.0
    t_end: float = 4.0
    eta: float = 5.0
    kn: float = None
    knbar: float = None
    chi: float = 1.0
    walls: tuple = None
    scenario: str = None
    bc_mode: str = "modified"
    outputs: tuple = ()
    stop_tol: float = None

    def __post_init__(self):
        if self.h <= 0.0 or self.dt <= 0.0 or self.t_end <= 0.0:
            raise ConfigError("h, dt and t_end must be positive")
        if (self.kn is None) == (self.knbar is None):
            raise ConfigError("exactly one of kn and knbar must be set")
        if self.bc_mode not in ("onsager", "modified"):
            raise ConfigError("bc_mode must be 'onsager' or 'modified'")
        if self.scenario is not None:
            if self.scenario not in SCENARIOS:
                raise ConfigError(f"unknown scenario '{self.scenario}'")
            if self.walls is None:
                self.walls = SCENARIOS[self.scenario]
        if self.walls is None:
            raise ConfigError("walls must be given when no scenario is set")

    @property
    def kn_resolved(self):
        if self.kn is not None:
            return self.kn
        return kn_convert(self.knbar, self.eta)


@dataclass
class TimeSeries:
    t: np.ndarray
    entropy: np.ndarray
    residual: np.ndarray
    wall_fluxes: np.ndarray   # (nt, 2), boundary power at each wall

    def __post_init__(self):
        n = len(self.t)
        if not (len(self.entropy) == len(self.residual)
                == len(self.wall_fluxes) == n):
            raise ValueError("time series lengths differ")
        if n > 1 and np.any(np.diff(self.t) <= 0.0):
            raise ValueError("time values must increase strictly")


@dataclass
class FemOperators:
    x: np.ndarray
    names: tuple
    M: sp.csc_matrix
    K: sp.csc_matrix
    g: np.ndarray
    kn: float
    walls: tuple
    # bulk pieces kept for structural checks
    conv: sp.csc_matrix = field(repr=False, default=None)
    diff: sp.csc_matrix = field(repr=False, default=None)
    relax: sp.csc_matrix = field(repr=False, default=None)
    flux_maps: dict = field(repr=False, default=None)
    _lu: object = field(repr=False, default=None)

    def lu(self, dt):
        if self._lu is None or self._lu[0] != dt:
            A = (self.M + 0.5 * dt * self.K).tocsc()
            self._lu = (dt, spla.splu(A))
        return self._lu[1]


def _p1_matrices(nn, h):
    """Mass, stiffness and first-derivative Gram matrices of P1 elements
    on a uniform mesh with nn nodes."""
    e = np.ones(nn)
    Mx = sp.diags([h / 6.0 * e[1:], 2.0 * h / 3.0 * e, h / 6.0 * e[1:]],
                  (-1, 0, 1), format="lil")
    Mx[0, 0] = h / 3.0
    Mx[-1, -1] = h / 3.0
    Kx = sp.diags([-e[1:] / h, 2.0 * e / h, -e[1:] / h],
                  (-1, 0, 1), format="lil")
    Kx[0, 0] = 1.0 / h
    Kx[-1, -1] = 1.0 / h
    Cx = sp.diags([-0.5 * e[1:], 0.0 * e, 0.5 * e[1:]],
                  (-1, 0, 1), format="lil")
    Cx[0, 0] = -0.5
    Cx[-1, -1] = 0.5
    return Mx.tocsr(), Kx.tocsr(), Cx.tocsr()


def _robin_maps(system, bc, config, kn):
    """Per-wall replacement of the diffusive wall fluxes by wall rows.

    Returns {side: (flux_rows, Ff, Fw)} such that the outgoing flux vector
    Kn (W D u')|wall restricted to flux_rows equals Ff @ u(wall) + Fw @
    (thetaW, v1W) whenever the wall rows hold."""
    names = system.names
    WD = system.W @ system.D
    iv2 = names.index("v2")
    scale = np.max(np.abs(WD))
    flux_rows = [i for i in range(len(names))
                 if i != iv2 and np.max(np.abs(WD[i])) > 1e-12 * scale]
    maps = {}
    if not flux_rows:
        nf = len(names)
        for side in ("left", "right"):
            maps[side] = ([], np.zeros((0, nf)), np.zeros(0))
        return maps
    for side in ("left", "right"):
        wall = config.walls[0] if side == "left" else config.walls[1]
        asm = bnd.assemble_bc_rows_1d(bc, side, (wall[0], wall[1]), kn=kn)
        rows = np.array([asm.rows[nm] for nm in asm.rows])
        if rows.shape[0] < len(flux_rows):
            raise CoefficientError(
                "boundary row count mismatch: "
                f"{rows.shape[0]} rows for {len(flux_rows)} wall fluxes")
        Rf, Rg, Rw = rows[:, 0:9], rows[:, 9:18], rows[:, 18:20]
        Fg = WD[flux_rows]
        X, *_ = np.linalg.lstsq(Rg.T, Fg.T, rcond=None)
        rel = np.max(np.abs(Rg.T @ X - Fg.T)) / max(np.max(np.abs(Fg)), 1e-30)
        if rel > 1e-4:
            raise CoefficientError(
                "wall rows cannot represent the diffusive wall fluxes "
                f"(relative defect {rel:.3e})")
        X = X.T
        maps[side] = (flux_rows, -X @ Rf, -(X @ Rw) @ np.asarray(wall))
    return maps


def assemble_fem(system, bc, config):
    """Discrete mass and evolution operators of the weighted weak form.

    The result satisfies M du/dt + K u = g.  Second-order terms are
    integrated by parts with the wall fluxes expressed through the wall
    rows; v2 = 0 is enforced strongly at both ends."""
    kn = config.kn_resolved
    h = config.h
    nn = int(round(1.0 / h)) + 1
    x = np.linspace(-0.5, 0.5, nn)
    nf = len(system.names)
    Mx, Kx, Cx = _p1_matrices(nn, h)
    W = system.W
    M = sp.kron(Mx, W, format="lil")
    conv = sp.kron(Cx, W @ system.A1, format="csc")
    diff = sp.kron(Kx, kn * (W @ system.D), format="csc")
    relax = sp.kron(Mx, (W @ system.Lrel) / kn, format="csc")
    K = (conv + diff - relax).tolil()
    g = np.zeros(nn * nf)

    maps = _robin_maps(system, bc, config, kn)
    for side, (flux_rows, Ff, fw) in maps.items():
        node = 0 if side == "left" else nn - 1
        sgn = -1.0 if side == "left" else 1.0
        base = node * nf
        for a, i in enumerate(flux_rows):
            for j in range(nf):
                K[base + i, base + j] += -sgn * Ff[a, j]
            g[base + i] += sgn * fw[a]

    iv2 = system.names.index("v2")
    for node in (0, nn - 1):
        r = node * nf + iv2
        K.rows[r], K.data[r] = [], []
        M.rows[r], M.data[r] = [r], [1.0]
        g[r] = 0.0

    return FemOperators(x=x, names=system.names, M=M.tocsc(), K=K.tocsc(),
                        g=g, kn=kn, walls=config.walls,
                        conv=conv, diff=diff, relax=relax, flux_maps=maps)


def step_crank_nicolson(state, operators, dt):
    """One trapezoidal step of M du/dt + K u = g."""
    rhs = operators.M @ state - 0.5 * dt * (operators.K @ state) \
        + dt * operators.g
    return operators.lu(dt).solve(rhs)


def discrete_energy(state, operators):
    """Quadratic entropy functional of the discrete state."""
    return 0.5 * float(state @ (operators.M @ state))


def steady_residual(state, operators):
    """Norm of K u - g in the metric of the mass matrix."""
    r = operators.K @ state - operators.g
    return math.sqrt(max(float(r @ (operators.M @ r)), 0.0))


def _wall_power(state, operators):
    """Energy flux through each wall: trace of the state against the
    replaced boundary flux."""
    nf = len(operators.names)
    nn = operators.x.size
    out = []
    for side, (flux_rows, Ff, fw) in operators.flux_maps.items():
        node = 0 if side == "left" else nn - 1
        uw = state[node * nf:(node + 1) * nf]
        flux = Ff @ uw + fw
        out.append(float(uw[flux_rows] @ flux))
    return out  # ordered as flux_maps: left, right


def steady_limit(operators, tol=1e-9):
    """Steady solution of K u = g with the wall velocity pinned.

    The evolution operator is singular: a uniform density shift always
    survives, and trading the wall momentum equations for the pinning rows
    releases a checkerboard density mode.  When these two vectors span the
    kernel the system is bordered with the corresponding mass functionals
    (both vanish for the scenario initial data, matching the gauge of a
    physical time integration).  Models whose kernel is larger (the
    eta = 5 closure couples more fields into it) fall back to implicit
    pseudo-time marching, which converges to the same limit a long
    Crank-Nicolson run approaches."""
    nf = len(operators.names)
    nn = operators.x.size
    K = operators.K.tolil()
    g = operators.g.copy()
    iv2 = operators.names.index("v2")
    for node in (0, nn - 1):
        r = node * nf + iv2
        K.rows[r], K.data[r] = [r], [1.0]
        g[r] = 0.0
    K = K.tocsc()
    pins = [node * nf + iv2 for node in (0, nn - 1)]
    scale = spla.norm(K)

    # kernel modes are uniform or checkerboard node patterns with
    # field mixing; find them from the 2*nf pattern candidates
    P = np.zeros((nn * nf, 2 * nf))
    for ip, wgt in enumerate((np.ones(nn), (-1.0) ** np.arange(nn))):
        for f in range(nf):
            P[f::nf, ip * nf + f] = wgt
    KP = K @ P
    _, s, vt = np.linalg.svd(KP, full_matrices=False)
    right = P @ vt[s < 1e-9 * s[0]].T
    # matching left null vectors: same patterns, corrected on the
    # pinning rows (which are unit rows)
    Z = (K.T @ P)
    Zoff = Z.copy()
    Zoff[pins, :] = 0.0
    _, s2, vt2 = np.linalg.svd(Zoff, full_matrices=False)
    cl = vt2[s2 < 1e-9 * s2[0]].T
    left = P @ cl
    left[pins, :] -= Z[pins, :] @ cl
    nk = right.shape[1]
    ok = (nk >= 1 and left.shape[1] == nk
          and np.max(np.abs(K @ right)) < 1e-9 * scale
          and np.max(np.abs(K.T @ left)) < 1e-9 * scale)
    if ok:
        C = (operators.M.T @ left).T
        if np.linalg.matrix_rank(C @ right) == nk:
            A = sp.bmat([[K, left], [C, None]], format="csc")
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", spla.MatrixRankWarning)
                sol = spla.spsolve(A, np.concatenate([g, np.zeros(nk)]))
            u = sol[:nn * nf]
            if np.all(np.isfinite(u)) and steady_residual(u, operators) < tol:
                return u
    raise CoefficientError("steady solve failed: unresolved kernel of the "
                           "evolution operator")


def run_scenario(config, coeffs=None, bc=None):
    """Integrate a channel scenario to its final time.

    Starts from the uniform state whose temperature is the wall average,
    records the entropy, steady residual and wall fluxes each step, and
    returns snapshots at the requested output times plus the final state."""
    eta = config.eta
    if coeffs is None or bc is None:
        if config.bc_mode == "onsager" and eta != 5.0:
            raise ConfigError(
                "unmodified wall coefficients are only available for the "
                "eta=5 model; pass derived coefficients explicitly")
        mc, bcc = load_builtin(eta, chi=config.chi)
        coeffs = coeffs or mc
        bc = bc or bcc
    kn = config.kn_resolved
    system = mdl.assemble_channel_system(coeffs, kn)
    ops = assemble_fem(system, bc, config)
    nn = ops.x.size
    nf = len(system.names)

    u = np.zeros(nn * nf)
    th0 = 0.5 * (config.walls[0][0] + config.walls[1][0])
    u[system.names.index("theta")::nf] = th0

    def snapshot(t):
        return mdl.MomentField1D(x=ops.x.copy(),
                                 u=u.reshape(nn, nf).copy(),
                                 names=system.names, t=t)

    nsteps = int(round(config.t_end / config.dt))
    want = sorted(set(min(int(round(tt / config.dt)), nsteps)
                      for tt in config.outputs))
    snapshots = [snapshot(0.0)] if 0 in want else []
    want = [w for w in want if w > 0]

    ts_t, ts_s, ts_r, ts_w = [0.0], [discrete_energy(u, ops)], \
        [steady_residual(u, ops)], [_wall_power(u, ops)]
    for n in range(1, nsteps + 1):
        u = step_crank_nicolson(u, ops, config.dt)
        if n % 100 == 0 and not np.all(np.isfinite(u)):
            raise CoefficientError(f"solution lost finiteness at step {n}")
        t = n * config.dt
        ts_t.append(t)
        ts_s.append(discrete_energy(u, ops))
        res = steady_residual(u, ops)
        ts_r.append(res)
        ts_w.append(_wall_power(u, ops))
        if want and n == want[0]:
            snapshots.append(snapshot(t))
            want.pop(0)
        if config.stop_tol is not None and res < config.stop_tol:
            break
    if not np.all(np.isfinite(u)):
        raise CoefficientError(f"solution lost finiteness at step {n}")
    snapshots.append(snapshot(ts_t[-1]))
    series = TimeSeries(t=np.array(ts_t), entropy=np.array(ts_s),
                        residual=np.array(ts_r),
                        wall_fluxes=np.array(ts_w))
    return snapshots, series
