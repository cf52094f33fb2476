"""Assembly of the closed moment systems in planar geometry.

All fields vary along a single coordinate (the wall-normal direction,
axis index 1).  Spatial structure is tracked with short derivative jets:
a field component is a vector of coefficients (g, g', g'', ...) of an
arbitrary profile g(x).  Evaluating the governing equations on unit seeds
then yields the coefficient matrices exactly, including every trace and
symmetrization factor, without hand-expanded component algebra.

Systems are stored in the form

    u_t + A1 u_x = Kn D u_xx + (1/Kn) Lrel u

with an entropy weight matrix W such that the quadratic entropy is
(1/2) integral u^T W u dx.
"""

import math
from dataclasses import dataclass

import numpy as np

JET = 4          # value + three derivatives
_AX = 1          # wall-normal coordinate axis


def _shift(t):
    out = np.zeros_like(t)
    out[..., 1:] = t[..., :-1]
    return out


def grad(t):
    g = np.zeros((3,) + t.shape)
    g[_AX] = _shift(t)
    return g


def div(t):
    # contract the derivative with the first tensor index
    return _shift(t[_AX])


def sym2(t):
    return 0.5 * (t + np.swapaxes(t, 0, 1))


def stf2(t):
    s = sym2(t)
    tr = s[0, 0] + s[1, 1] + s[2, 2]
    out = s.copy()
    for i in range(3):
        out[i, i] -= tr / 3.0
    return out


def stf3(t):
    import itertools
    s = np.zeros_like(t)
    for p in itertools.permutations((0, 1, 2)):
        s += np.transpose(t, p + tuple(range(3, t.ndim)))
    s /= 6.0
    tr = np.zeros((3,) + t.shape[3:])
    for k in range(3):
        tr[k] = s[0, 0, k] + s[1, 1, k] + s[2, 2, k]
    out = s.copy()
    for i in range(3):
        for j in range(3):
            for k in range(3):
                corr = 0.0
                if i == j:
                    corr = corr + tr[k]
                if j == k:
                    corr = corr + tr[i]
                if i == k:
                    corr = corr + tr[j]
                out[i, j, k] = out[i, j, k] - corr / 5.0
    return out


# independent components of symmetric trace-free tensors (3-3 direction
# entries eliminated by the trace)
SYM2_COMPS = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2)]
SYM3_COMPS = [(0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 1, 1), (0, 1, 2),
              (1, 1, 1), (1, 1, 2)]


def build_sym2(c):
    """Full symmetric trace-free rank-2 tensor from jets of the five
    independent components."""
    t = np.zeros((3, 3) + c[0].shape)
    for (i, j), v in zip(SYM2_COMPS, c):
        t[i, j] = v
        t[j, i] = v
    t[2, 2] = -t[0, 0] - t[1, 1]
    return t


def build_sym3(c):
    """Full symmetric trace-free rank-3 tensor from jets of the seven
    independent components."""
    import itertools
    t = np.zeros((3, 3, 3) + c[0].shape)
    vals = dict(zip(SYM3_COMPS, c))
    vals[(0, 2, 2)] = -vals[(0, 0, 0)] - vals[(0, 1, 1)]
    vals[(1, 2, 2)] = -vals[(0, 0, 1)] - vals[(1, 1, 1)]
    vals[(2, 2, 2)] = -vals[(0, 0, 2)] - vals[(1, 1, 2)]
    for idx, v in vals.items():
        for p in set(itertools.permutations(idx)):
            t[p] = v
    return t


def _norm_form(comps, builder):
    """Quadratic form Q with ||T||^2 = c^T Q c on the independent components."""
    n = len(comps)
    Q = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            ci = [np.array([1.0]) if k == i else np.array([0.0]) for k in range(n)]
            cj = [np.array([1.0]) if k == j else np.array([0.0]) for k in range(n)]
            Q[i, j] = np.sum(builder(ci) * builder(cj))
    return Q

Q_SYM2 = _norm_form(SYM2_COMPS, build_sym2)
Q_SYM3 = _norm_form(SYM3_COMPS, build_sym3)


@dataclass
class LinearMomentSystem:
    """u_t + A1 u_x = Kn D u_xx + (1/Kn) Lrel u with entropy weight W."""

    names: tuple
    A1: np.ndarray
    D: np.ndarray
    Lrel: np.ndarray
    W: np.ndarray
    kn: float


@dataclass
class MomentField1D:
    """Nodal values of a reduced moment vector on a 1D mesh."""

    x: np.ndarray
    u: np.ndarray            # shape (npts, nfields)
    names: tuple
    t: float = 0.0

    def field(self, name):
        return self.u[:, self.names.index(name)]


def _extract(rows_spatial, rows_relax, nuk, kn):
    """Split evaluated equation rows into A1, D, Lrel."""
    A1 = np.zeros((nuk, nuk))
    D = np.zeros((nuk, nuk))
    L = np.zeros((nuk, nuk))
    for r, (sp, rx) in enumerate(zip(rows_spatial, rows_relax)):
        if np.max(np.abs(sp[..., 3:])) > 1e-13:
            raise ValueError("unexpected third-order derivative in assembly")
        A1[r] = sp[:, 1]
        D[r] = -sp[:, 2] / kn
        L[r] = rx[:, 0]
        if np.max(np.abs(sp[:, 0])) > 1e-13 or np.max(np.abs(rx[:, 1:])) > 1e-13:
            raise ValueError("misplaced coefficient in assembly")
    return A1, D, L


def _seed(nuk, j):
    e = np.zeros((nuk, JET))
    e[j, 0] = 1.0
    return e


CHANNEL_NAMES = ("rho", "theta", "v1", "v2", "qbar1", "qbar2",
                 "sigbar11", "sigbar12", "sigbar22")


def _channel_fields(u):
    rho, theta = u[0], u[1]
    zero = np.zeros(JET)
    v = np.stack((u[2], u[3], zero))
    qb = np.stack((u[4], u[5], zero))
    sig = build_sym2([u[6], u[7], zero, u[8], zero])
    return rho, theta, v, qb, sig


def _closed_equations(mc, kn, rho, theta, v, qb, sig):
    """Spatial and relaxation parts of the closed moment equations, one row
    per (tensor) field."""
    k = mc.k
    gv = stf2(grad(v))
    gq = stf2(grad(qb))
    dsig = div(sig)
    lap = lambda f: _shift(_shift(f))

    s_rho = div(v)
    s_theta = ((2.0 / 3.0) * div(v) + (2.0 / 3.0) * k[0] * div(qb)
               - k[1] * kn * lap(theta) + k[2] * kn * div(dsig))
    s_v = (grad(rho) + grad(theta) + k[5] * dsig
           - k[3] * kn * div(gv) - k[4] * kn * div(gq))
    s_q = ((5.0 / 2.0) * k[0] * grad(theta) - (5.0 / 2.0) * k[4] * kn * div(gv)
           - 2.0 * k[6] * kn * grad(div(qb)) - (12.0 / 5.0) * k[7] * kn * div(gq)
           + k[8] * dsig)
    s_sig = (3.0 * k[2] * kn * stf2(grad(grad(theta))) + 2.0 * k[5] * gv
             + (4.0 / 5.0) * k[8] * gq - 2.0 * k[9] * kn * div(stf3(grad(sig)))
             - k[10] * kn * stf2(grad(dsig)))
    r_q = -(2.0 / 3.0) * mc.l1 * qb
    r_sig = -mc.l2 * sig
    return s_rho, s_theta, s_v, s_q, s_sig, r_q, r_sig


def assemble_channel_system(mc, kn):
    """Nine-moment planar channel system (rho, theta, v1, v2, qbar1, qbar2,
    sigbar11, sigbar12, sigbar22)."""
    nuk = 9
    rows_sp, rows_rx = [[] for _ in range(nuk)], [[] for _ in range(nuk)]
    for j in range(nuk):
        u = _seed(nuk, j)
        rho, theta, v, qb, sig = _channel_fields(u)
        s_rho, s_theta, s_v, s_q, s_sig, r_q, r_sig = _closed_equations(
            mc, kn, rho, theta, v, qb, sig)
        zero = np.zeros(JET)
        per_row = [
            (s_rho, zero), (s_theta, zero),
            (s_v[0], zero), (s_v[1], zero),
            (s_q[0], r_q[0]), (s_q[1], r_q[1]),
            (s_sig[0, 0], r_sig[0, 0]), (s_sig[0, 1], r_sig[0, 1]),
            (s_sig[1, 1], r_sig[1, 1]),
        ]
        for r, (sp, rx) in enumerate(per_row):
            rows_sp[r].append(sp)
            rows_rx[r].append(rx)
    A1, D, L = _extract([np.stack(r) for r in rows_sp],
                        [np.stack(r) for r in rows_rx], nuk, kn)
    W = np.diag([1.0, 1.5, 1.0, 1.0, 0.4, 0.4, 0.0, 0.0, 0.0])
    W[6:, 6:] = 0.5 * np.array([[Q_SYM2[0, 0], Q_SYM2[0, 1], Q_SYM2[0, 3]],
                                [Q_SYM2[1, 0], Q_SYM2[1, 1], Q_SYM2[1, 3]],
                                [Q_SYM2[3, 0], Q_SYM2[3, 1], Q_SYM2[3, 3]]])
    return LinearMomentSystem(names=CHANNEL_NAMES, A1=A1, D=D, Lrel=L, W=W, kn=kn)


PLANAR_T_NAMES = ("rho", "theta", "v2", "qbar2", "sigbar22")


def assemble_planar_temperature_system(mc, kn):
    """Five-moment planar heat-conduction system; the tangential stress
    components follow the isotropy of the problem (sig11 = sig33 = -sig22/2)."""
    nuk = 5
    rows_sp, rows_rx = [[] for _ in range(nuk)], [[] for _ in range(nuk)]
    for j in range(nuk):
        u = _seed(nuk, j)
        zero = np.zeros(JET)
        rho, theta = u[0], u[1]
        v = np.stack((zero, u[2], zero))
        qb = np.stack((zero, u[3], zero))
        sig = build_sym2([-0.5 * u[4], zero, zero, u[4], zero])
        s_rho, s_theta, s_v, s_q, s_sig, r_q, r_sig = _closed_equations(
            mc, kn, rho, theta, v, qb, sig)
        per_row = [(s_rho, zero), (s_theta, zero), (s_v[1], zero),
                   (s_q[1], r_q[1]), (s_sig[1, 1], r_sig[1, 1])]
        for r, (sp, rx) in enumerate(per_row):
            rows_sp[r].append(sp)
            rows_rx[r].append(rx)
    A1, D, L = _extract([np.stack(r) for r in rows_sp],
                        [np.stack(r) for r in rows_rx], nuk, kn)
    # ||sig||^2 = (3/2) sig22^2 under the isotropic constraint
    W = np.diag([1.0, 1.5, 1.0, 0.4, 0.75])
    return LinearMomentSystem(names=PLANAR_T_NAMES, A1=A1, D=D, Lrel=L, W=W, kn=kn)


def entropy(u, x, W):
    """Quadratic entropy (1/2) integral u^T W u dx by the trapezoidal rule.

    u has shape (npts, ncomp)."""
    dens = 0.5 * np.einsum("xi,ij,xj->x", u, W, u)
    return float(np.trapezoid(dens, x))


def _deriv(f, x):
    """First derivative on a (possibly nonuniform) grid: central differences
    inside, one-sided second-order at the ends."""
    f = np.asarray(f, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (x[2:] - x[:-2])
    h0 = x[1] - x[0]
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h0)
    h1 = x[-1] - x[-2]
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h1)
    return out


def recover_stress_heat(x, u, mc, kn):
    """Physical heat flux and stress from the modeled fields on a grid.

    u has shape (npts, 9) in channel ordering.  Returns dict with q1, q2,
    sig12, sig22."""
    k = mc.k
    theta = u[:, 1]
    v1, v2 = u[:, 2], u[:, 3]
    qb1, qb2 = u[:, 4], u[:, 5]
    s11, s12, s22 = u[:, 6], u[:, 7], u[:, 8]
    dth = _deriv(theta, x)
    q2 = k[0] * qb2 - 1.5 * k[1] * kn * dth + 1.5 * k[2] * kn * _deriv(s22, x)
    q1 = k[0] * qb1 + 1.5 * k[2] * kn * _deriv(s12, x)
    sig12 = k[5] * s12 - 0.5 * k[4] * kn * _deriv(qb1, x) - 0.5 * k[3] * kn * _deriv(v1, x)
    sig22 = (k[5] * s22 - (2.0 / 3.0) * k[4] * kn * _deriv(qb2, x)
             - (2.0 / 3.0) * k[3] * kn * _deriv(v2, x))
    return {"q1": q1, "q2": q2, "sig12": sig12, "sig22": sig22}


# ---------------------------------------------------------------------------
# full moment system with the algebraic second-order fields retained

U37_NAMES = (
    ("rho", "theta", "v1", "v2", "v3", "qbar1", "qbar2", "qbar3",
     "sigbar11", "sigbar12", "sigbar13", "sigbar22", "sigbar23")
    + ("u2",)
    + tuple(f"u2v{i+1}" for i in range(3))
    + tuple(f"u3v{i+1}" for i in range(3))
    + tuple(f"u1t{i+1}{j+1}" for (i, j) in SYM2_COMPS)
    + tuple(f"u2t{i+1}{j+1}" for (i, j) in SYM2_COMPS)
    + tuple(f"u0t{i+1}{j+1}{k+1}" for (i, j, k) in SYM3_COMPS)
)

BLOCK0 = slice(0, 5)      # rho, theta, v
BLOCK1 = slice(5, 13)     # qbar, sigbar
BLOCK2 = slice(13, 37)    # second-order fields


@dataclass
class MomentSystem37:
    """First-order-in-space form F u_x = (1/Kn) L u + time derivatives on
    the thirteen primary components."""

    names: tuple
    F: np.ndarray
    L: np.ndarray
    time_mask: np.ndarray
    kn: float


def assemble_37_system(basis, A, L, kn, axis=1):
    """Galerkin moment system before eliminating the algebraic second-order
    fields (37 planar components).  `axis` selects the coordinate the fields
    vary along (wall-normal by default; the boundary module also needs the
    tangential flux matrices)."""
    global _AX
    prev_ax = _AX
    _AX = axis
    try:
        return _assemble_37_inner(basis, A, L, kn)
    finally:
        _AX = prev_ax


def _assemble_37_inner(basis, A, L, kn):
    L1, L2 = L["L1"], L["L2"]
    p11, p200 = basis.p1[1], basis.p20[0]
    c121, c131 = basis.c12[1], basis.c13[1]
    c210, c220 = basis.c21[0], basis.c22[0]
    s56 = math.sqrt(5.0 / 6.0)
    s215 = math.sqrt(2.0 / 15.0)
    s115 = math.sqrt(1.0 / 15.0)
    s15 = math.sqrt(15.0)
    s103 = math.sqrt(10.0 / 3.0)
    s152 = math.sqrt(7.5)

    nuk = 37
    rows_sp = [[] for _ in range(nuk)]
    rows_rx = [[] for _ in range(nuk)]
    for j in range(nuk):
        u = _seed(nuk, j)
        zero = np.zeros(JET)
        rho, theta = u[0], u[1]
        v = np.stack((u[2], u[3], u[4]))
        qb = np.stack((u[5], u[6], u[7]))
        sig = build_sym2(list(u[8:13]))
        u2 = u[13]
        u2v = np.stack((u[14], u[15], u[16]))
        u3v = np.stack((u[17], u[18], u[19]))
        u1t = build_sym2(list(u[20:25]))
        u2t = build_sym2(list(u[25:30]))
        u0t = build_sym3(list(u[30:37]))

        gv, gq = stf2(grad(v)), stf2(grad(qb))
        dsig = div(sig)

        s_rho = div(v)
        s_theta = ((2.0 / 3.0) * div(v) + (2.0 / 3.0) * p11 * div(qb)
                   - s103 * (c121 * div(u2v) + c131 * div(u3v)))
        s_v = (grad(rho) + grad(theta) + p200 * dsig
               + s15 * (c210 * div(u1t) + c220 * div(u2t)))
        s_q = ((5.0 / 2.0) * p11 * grad(theta)
               - (math.sqrt(2.0) / 6.0) * A["A45"] * dsig
               - s56 * (A["A49"] * div(u1t) + A["A410"] * div(u2t)
                        + A["A46"] * grad(u2)))
        r_q = ((1.0 / 3.0) * L1[0, 0] * qb
               - s56 * (L1[0, 1] * u2v + L1[0, 2] * u3v))
        s_sig = (2.0 * p200 * gv - (2.0 * math.sqrt(2.0) / 15.0) * A["A45"] * gq
                 + (2.0 / s15) * (A["A57"] * stf2(grad(u2v))
                                  + A["A58"] * stf2(grad(u3v))
                                  + A["A511"] * div(np.transpose(u0t, (2, 0, 1, 3)))))
        r_sig = ((2.0 / 15.0) * L2[0, 0] * sig
                 + (2.0 / s15) * (L2[0, 1] * u1t + L2[0, 2] * u2t))
        s_u2 = -s215 * A["A46"] * div(qb)
        r_u2 = L["L0_22"] * u2
        s_u2v = -s152 * c121 * grad(theta) + s115 * A["A57"] * dsig
        r_u2v = -s215 * L1[1, 0] * qb + L1[1, 1] * u2v + L1[1, 2] * u3v
        s_u3v = -s152 * c131 * grad(theta) + s115 * A["A58"] * dsig
        r_u3v = -s215 * L1[2, 0] * qb + L1[2, 1] * u2v + L1[2, 2] * u3v
        s_u1t = s15 * c210 * gv - s215 * A["A49"] * gq
        r_u1t = s115 * L2[1, 0] * sig + L2[1, 1] * u1t + L2[1, 2] * u2t
        s_u2t = s15 * c220 * gv - s215 * A["A410"] * gq
        r_u2t = s115 * L2[2, 0] * sig + L2[2, 1] * u1t + L2[2, 2] * u2t
        s_u0t = s115 * A["A511"] * stf3(grad(sig))
        r_u0t = L["L3_00"] * u0t

        per_row = (
            [(s_rho, zero), (s_theta, zero)]
            + [(s_v[i], zero) for i in range(3)]
            + [(s_q[i], r_q[i]) for i in range(3)]
            + [(s_sig[c], r_sig[c]) for c in SYM2_COMPS]
            + [(s_u2, r_u2)]
            + [(s_u2v[i], r_u2v[i]) for i in range(3)]
            + [(s_u3v[i], r_u3v[i]) for i in range(3)]
            + [(s_u1t[c], r_u1t[c]) for c in SYM2_COMPS]
            + [(s_u2t[c], r_u2t[c]) for c in SYM2_COMPS]
            + [(s_u0t[c], r_u0t[c]) for c in SYM3_COMPS]
        )
        for r, (sp, rx) in enumerate(per_row):
            rows_sp[r].append(sp)
            rows_rx[r].append(rx)

    F = np.zeros((nuk, nuk))
    Lm = np.zeros((nuk, nuk))
    for r in range(nuk):
        sp = np.stack(rows_sp[r])
        rx = np.stack(rows_rx[r])
        if np.max(np.abs(sp[:, 2:])) > 1e-13 or np.max(np.abs(sp[:, 0])) > 1e-13:
            raise ValueError("moment assembly produced unexpected derivative order")
        F[r] = sp[:, 1]
        Lm[r] = rx[:, 0]
    mask = np.zeros(nuk, dtype=bool)
    mask[:13] = True
    return MomentSystem37(names=U37_NAMES, F=F, L=Lm, time_mask=mask, kn=kn)


def super_burnett_residual(sys37):
    """Deviation from the order-consistency relation between the flux
    coupling of the algebraic fields and the relaxation chain through the
    first-order fields.  Vanishes for any admissible collision model."""
    F, L = sys37.F, sys37.L
    F20 = F[BLOCK2, BLOCK0]
    F10 = F[BLOCK1, BLOCK0]
    L21 = L[BLOCK2, BLOCK1]
    L11 = L[BLOCK1, BLOCK1]
    return float(np.max(np.abs(F20 - L21 @ np.linalg.solve(L11, F10))))


def eliminate_second_order(sys37):
    """Schur-eliminate the algebraic fields; returns (A1, D, Lrel) for the
    thirteen primary components in the u_t + A1 u_x = Kn D u_xx +
    (1/Kn) Lrel u convention."""
    F, L, kn = sys37.F, sys37.L, sys37.kn
    p, s = slice(0, 13), slice(13, 37)
    Fpp, Fps, Fsp = F[p, p], F[p, s], F[s, p]
    Lpp, Lps, Lsp, Lss = L[p, p], L[p, s], L[s, p], L[s, s]
    Fss = F[s, s]
    if np.max(np.abs(Fss)) > 1e-12:
        raise ValueError("algebraic fields must not couple through fluxes")
    Lss_inv = np.linalg.inv(Lss)
    # u_s = Lss^-1 (Kn Fsp u_p' - Lsp u_p)
    A1 = Fpp - Fps @ Lss_inv @ Lsp - Lps @ Lss_inv @ Fsp
    D = -Fps @ Lss_inv @ Fsp
    Lrel = Lpp - Lps @ Lss_inv @ Lsp
    return A1, D, Lrel
