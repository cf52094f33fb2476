"""Analytic steady solver for the planar heat-transfer channel.

The temperature, normal stress deviator and transformed heat flux of the
steady channel admit a closed-form solution built from exponential layer
modes around each wall plus a linear smooth part.  This module constructs
that solution for given transport and boundary coefficients, applies the
wall rows at both ends, and samples the profiles (including the recovered
physical heat flux) on a uniform grid.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .coeffs import CoefficientError
from . import model as mdl
from . import boundary as bnd


# ---------------------------------------------------------------------------
# solution representation
#
# Every contribution to (theta, sigbar, qbar) is either an exponential
# layer mode anchored at one wall or a polynomial of degree <= 1.  A
# contribution knows its value and derivatives of any order, which keeps
# the boundary assembly and the residual check free of numerical
# differentiation.


@dataclass
class _LayerMode:
    mu: float          # decay exponent (positive: grows to the right)
    x0: float          # anchor wall, exp(mu (x - x0) / kn)
    vth: float         # theta component of the eigenvector
    vsg: float         # sigbar component
    vq: float          # qbar component (constant multiple of the mode)

    def envelope(self, x, kn, order=0):
        return (self.mu / kn) ** order * np.exp(self.mu * (x - self.x0) / kn)

    def mean(self, kn):
        # integral of the envelope over (-1/2, 1/2)
        a = abs(self.mu) / kn
        return (1.0 - math.exp(-a)) / a


@dataclass
class _PolyPart:
    th: tuple          # (slope, const) of theta
    sg: tuple
    qb: tuple

    def eval(self, coefs, x, order=0):
        s, c = coefs
        if order == 0:
            return s * x + c
        if order == 1:
            return s * np.ones_like(x)
        return np.zeros_like(x)


@dataclass
class SteadySolution:
    kn: float
    eta: float
    theta_w: tuple
    lam: tuple
    kappa: dict
    constants: dict
    x: np.ndarray
    profiles: dict
    ode_residual: float
    bc_residual: float
    spectrum: object = field(repr=False, default=None)


def _modes(mc, spectrum, kn):
    """Layer modes of the steady system: four for two distinct decay rates,
    two when the heat flux decouples from the gradients."""
    k0, k8 = mc.k0, mc.k8
    modes = []
    if spectrum.degenerate:
        lam1 = spectrum.lambda1
        for mu in (-lam1, lam1):
            vsg = 1.0
            vth = -0.4 * k8 / k0 * vsg
            modes.append(_LayerMode(mu=mu, x0=math.copysign(0.5, mu),
                                    vth=vth, vsg=vsg, vq=0.0))
        return modes
    E, F = spectrum.E, spectrum.F
    M = -np.linalg.inv(E) @ F
    w, V = np.linalg.eig(M)
    if np.max(np.abs(w.imag)) > 1e-10 * np.max(np.abs(w.real)):
        raise CoefficientError("steady system has complex decay rates")
    w, V = w.real, V.real
    for lam in spectrum.lam:
        for mu in (-lam, lam):
            j = int(np.argmin(np.abs(w - mu)))
            if abs(w[j] - mu) > 1e-8 * max(1.0, abs(mu)):
                raise CoefficientError("layer mode mismatch in the steady "
                                       "eigendecomposition")
            v = V[:, j]
            # y = (xi, xi', theta, sigbar); internal consistency of the
            # gradient slots fixes nothing here, only the last two matter
            sc = v[np.argmax(np.abs(v[2:4])) + 2]
            vth, vsg = v[2] / sc, v[3] / sc
            vq = 1.5 / k0 * mu * (mc.k1 * vth - mc.k2 * vsg)
            modes.append(_LayerMode(mu=mu, x0=math.copysign(0.5, mu),
                                    vth=vth, vsg=vsg, vq=vq))
    return modes


def _poly_parts(mc, kn):
    """Polynomial contributions of the two free constants: the heat-flux
    constant (which also sets the temperature slope) and the integration
    constant of the temperature."""
    k0, k1 = mc.k0, mc.k1
    d3 = 2.5 * k0 + mc.l1 * k1 / k0
    c1 = -2.0 * mc.l1 / (3.0 * kn)          # source slope per unit C_qbar
    s_th = c1 / d3
    part_cq = _PolyPart(th=(s_th, 0.0), sg=(0.0, 0.0),
                        qb=(0.0, 1.5 / k0 * kn * k1 * s_th + 1.0))
    part_c2 = _PolyPart(th=(0.0, 1.0 / d3), sg=(0.0, 0.0), qb=(0.0, 0.0))
    return part_cq, part_c2, c1


def _fields_of(contrib, amps, mc, kn, x, order=0):
    """theta, sigbar, qbar derivative profiles of the combined solution."""
    modes, part_cq, part_c2 = contrib
    x = np.atleast_1d(np.asarray(x, dtype=float))
    th = np.zeros_like(x)
    sg = np.zeros_like(x)
    qb = np.zeros_like(x)
    for m, a in zip(modes, amps[:len(modes)]):
        env = m.envelope(x, kn, order)
        th += a * m.vth * env
        sg += a * m.vsg * env
        qb += a * m.vq * env
    a_cq, a_c2 = amps[len(modes)], amps[len(modes) + 1]
    for part, a in ((part_cq, a_cq), (part_c2, a_c2)):
        th += a * part.eval(part.th, x, order)
        sg += a * part.eval(part.sg, x, order)
        qb += a * part.eval(part.qb, x, order)
    return th, sg, qb


def _rho_of(contrib, amps, mc, kn, x, order=0):
    """Density from integrating the normal momentum balance, zero-mean
    gauge.  rho' = -theta' - k5 sigbar' + (2/3) k4 Kn qbar''."""
    modes, part_cq, part_c2 = contrib
    k4, k5 = mc.k4, mc.k5
    x = np.atleast_1d(np.asarray(x, dtype=float))
    rho = np.zeros_like(x)
    gauge = 0.0
    for m, a in zip(modes, amps[:len(modes)]):
        c_rho = -m.vth - k5 * m.vsg + (2.0 / 3.0) * k4 * m.mu * m.vq
        rho += a * c_rho * m.envelope(x, kn, order)
        if order == 0:
            gauge -= a * c_rho * m.mean(kn)
    a_cq = amps[len(modes)]
    # the polynomial parts contribute a pure slope (zero mean)
    rho += a_cq * part_cq.eval((-part_cq.th[0], 0.0), x, order)
    if order == 0:
        rho += gauge
    return rho


def _wall_symbols(contrib, mc, kn, side):
    """Boundary-row symbol values at one wall, one column per unknown.

    Returns an (18, nunk) matrix over the channel fields and their
    Kn-scaled derivatives (density is excluded from every row and left
    zero)."""
    modes, _, _ = contrib
    nunk = len(modes) + 2
    xw = -0.5 if side == "left" else 0.5
    sym = {nm: i for i, nm in enumerate(bnd.BC1D_SYMS[:18])}
    phi = np.zeros((18, nunk))
    for k in range(nunk):
        amps = np.zeros(nunk)
        amps[k] = 1.0
        th0, sg0, qb0 = _fields_of(contrib, amps, mc, kn, xw, order=0)
        th1, sg1, qb1 = _fields_of(contrib, amps, mc, kn, xw, order=1)
        phi[sym["theta"], k] = th0[0]
        phi[sym["sigbar22"], k] = sg0[0]
        phi[sym["sigbar11"], k] = -0.5 * sg0[0]
        phi[sym["qbar2"], k] = qb0[0]
        phi[sym["dtheta"], k] = kn * th1[0]
        phi[sym["dsigbar22"], k] = kn * sg1[0]
        phi[sym["dsigbar11"], k] = -0.5 * kn * sg1[0]
        phi[sym["dqbar2"], k] = kn * qb1[0]
    return phi


def solve_fourier_steady(coeffs, bc, kn, theta_w, nsample=401):
    """Closed-form steady solution of the heat-transfer channel.

    coeffs/bc are the transport and wall coefficient sets, kn > 0, and
    theta_w the pair of wall temperatures (left, right).  The layer
    amplitudes and the two free constants are fixed by the temperature-
    block wall rows at both ends; the density follows with a zero-mean
    gauge.  Profiles are sampled on ``nsample`` uniform points."""
    if kn <= 0.0:
        raise CoefficientError("the Knudsen number must be positive")
    mc = coeffs
    spectrum = bnd.reduce_to_ode(mc, kn)
    modes = _modes(mc, spectrum, kn)
    part_cq, part_c2, c1_per_cq = _poly_parts(mc, kn)
    contrib = (modes, part_cq, part_c2)
    nunk = len(modes) + 2

    row_names = ["m1", "m6"] if bc.m2 is None else ["m1", "m2", "m6"]
    A = np.zeros((2 * len(row_names), nunk))
    rhs = np.zeros(2 * len(row_names))
    assemblies = {}
    for iw, side in enumerate(("left", "right")):
        wall = (theta_w[0] if side == "left" else theta_w[1], 0.0)
        asm = bnd.assemble_bc_rows_1d(bc, side, wall, kn=kn)
        assemblies[side] = asm
        phi = _wall_symbols(contrib, mc, kn, side)
        for ir, name in enumerate(row_names):
            row, const = asm.row_const(name)
            if abs(row[0]) > 1e-13:
                raise CoefficientError("wall row depends on the density")
            A[iw * len(row_names) + ir] = row @ phi
            rhs[iw * len(row_names) + ir] = -const
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e10:
        raise CoefficientError(
            f"ill-posed boundary system (condition number {cond:.3e})")
    amps = np.linalg.solve(A, rhs)

    # report the layer content in the sinh/cosh parameterization
    kap_th = np.zeros(6)
    kap_sg = np.zeros(6)
    lam_list = [spectrum.lambda1] if spectrum.degenerate else list(spectrum.lam)
    for j, lam in enumerate(lam_list):
        am = amps[2 * j]      # mode with mu = -lam (left wall)
        ap = amps[2 * j + 1]  # mode with mu = +lam (right wall)
        mm, mp = modes[2 * j], modes[2 * j + 1]
        damp = math.exp(-0.5 * lam / kn)
        kap_th[2 * j] = damp * (ap * mp.vth - am * mm.vth)
        kap_th[2 * j + 1] = damp * (ap * mp.vth + am * mm.vth)
        kap_sg[2 * j] = damp * (ap * mp.vsg - am * mm.vsg)
        kap_sg[2 * j + 1] = damp * (ap * mp.vsg + am * mm.vsg)
    a_cq, a_c2 = amps[-2], amps[-1]
    kap_th[4] = a_cq * part_cq.th[0]
    kap_th[5] = a_cq * part_cq.th[1] + a_c2 * part_c2.th[1]
    constants = {"C_qbar": a_cq,
                 "C_qbar1": c1_per_cq * a_cq,
                 "C_qbar2": a_c2}

    ode_res = _ode_residual(contrib, amps, mc, kn, nfine=10 * (nsample - 1) + 1)
    bc_res = _bc_residual(contrib, amps, mc, kn, assemblies)

    x = np.linspace(-0.5, 0.5, nsample)
    th, sg, qb = _fields_of(contrib, amps, mc, kn, x)
    rho = _rho_of(contrib, amps, mc, kn, x)
    u = np.zeros((x.size, 9))
    u[:, 0], u[:, 1], u[:, 5], u[:, 8] = rho, th, qb, sg
    u[:, 6] = -0.5 * sg
    rec = mdl.recover_stress_heat(x, u, mc, kn)
    profiles = {"rho": rho, "theta": th, "v2": np.zeros_like(x),
                "qbar2": qb, "sigbar22": sg, "q2": rec["q2"]}
    lam = ((spectrum.lambda1, math.nan) if spectrum.degenerate
           else spectrum.lam)
    return SteadySolution(kn=kn, eta=mc.eta, theta_w=tuple(theta_w), lam=lam,
                          kappa={"theta": kap_th, "sigbar": kap_sg},
                          constants=constants, x=x, profiles=profiles,
                          ode_residual=ode_res, bc_residual=bc_res,
                          spectrum=spectrum)


def _channel_state(contrib, amps, mc, kn, x, order):
    u = np.zeros((np.atleast_1d(x).size, 9))
    th, sg, qb = _fields_of(contrib, amps, mc, kn, x, order)
    u[:, 0] = _rho_of(contrib, amps, mc, kn, x, order)
    u[:, 1], u[:, 5], u[:, 8] = th, qb, sg
    u[:, 6] = -0.5 * sg
    return u


def _ode_residual(contrib, amps, mc, kn, nfine):
    """Relative residual of the steady channel equations on a fine grid,
    evaluated with analytic derivatives against the independently
    assembled system matrices."""
    sysm = mdl.assemble_channel_system(mc, kn)
    x = np.linspace(-0.5, 0.5, nfine)
    u0 = _channel_state(contrib, amps, mc, kn, x, 0)
    u1 = _channel_state(contrib, amps, mc, kn, x, 1)
    u2 = _channel_state(contrib, amps, mc, kn, x, 2)
    t_conv = u1 @ sysm.A1.T
    t_diff = kn * (u2 @ sysm.D.T)
    t_rel = (u0 @ sysm.Lrel.T) / kn
    res = t_conv - t_diff - t_rel
    scale = max(np.max(np.abs(t_conv)), np.max(np.abs(t_diff)),
                np.max(np.abs(t_rel)), 1e-30)
    return float(np.max(np.abs(res)) / scale)


def _bc_residual(contrib, amps, mc, kn, assemblies):
    """Largest violation over every wall row (the shear rows and the
    tangential-stress row hold identically for this flow)."""
    worst = 0.0
    for side, asm in assemblies.items():
        phi = _wall_symbols(contrib, mc, kn, side)
        vals = phi @ amps
        for name in asm.rows:
            row, const = asm.row_const(name)
            worst = max(worst, abs(float(row @ vals) + const))
    return worst


def write_profile_csv(sol, fh):
    """Profile table in the shared channel schema, lossless precision."""
    cols = ("x", "rho", "theta", "v2", "qbar2", "sigbar22", "q2")
    fh.write(",".join(cols) + "\n")
    data = [sol.x] + [sol.profiles[c] for c in cols[1:]]
    for i in range(sol.x.size):
        fh.write(",".join(format(d[i], ".17g") for d in data) + "\n")
