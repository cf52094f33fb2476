"""Transport and boundary coefficients for linear R13 moment systems.

The moment basis is Laguerre-times-harmonic: for tensor degree l and radial
index n the basis function is L_n^(l+1/2)(|xi|^2/2) xi_<i1...il>, normalized
against the standard Gaussian weight.  A collision model enters only through
the matrices a_l[n,n'] of the linearized collision operator in this basis
(one matrix per tensor degree l = 0..3), normalized so that the shear-stress
relaxation rate is one.

From a set of collision matrices this module derives the Chapman-Enskog
expansion coefficients, the rotated second-order basis, the coupling
constants A_ij, the relaxation blocks L_l^(jk), and finally the thirteen
transport coefficients k0..k10, l1, l2 of the regularized moment equations.
Builtin tables for inverse-power-law models (eta = 5, 7, 10, 17, inf) are
included for use without raw collision data.
"""

import math
import os
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# dual-space factors (2l+1)!!/l! for tensor degrees 0..3
S_L = (1.0, 3.0, 7.5, 17.5)

# submatrix inversions that hit the conservation kernel
_FORBIDDEN_SUBMATRIX = {(0, 0), (0, 1), (1, 0)}

_BUILTIN_ETAS = (5.0, 7.0, 10.0, 17.0, math.inf)


class CoefficientError(ValueError):
    pass


class StructuralMismatchError(CoefficientError):
    pass


class Source(Enum):
    BUILTIN_TABLE = "builtin-table"
    DERIVED = "derived"


@dataclass(frozen=True)
class GasModel:
    """Inverse-power-law gas: potential exponent eta (math.inf = hard spheres)."""

    eta: float

    def __post_init__(self):
        if not (self.eta > 3.0):
            raise CoefficientError("potential exponent eta must exceed 3")

    @property
    def omega(self):
        # viscosity exponent mu ~ theta^omega
        if math.isinf(self.eta):
            return 0.5
        return 0.5 + 2.0 / (self.eta - 1.0)


def kn_convert(value, eta, direction="to_kn"):
    """Convert between the modeling Knudsen number Kn and the conventional
    mean-free-path Knudsen number Knbar for an inverse-power-law gas."""
    omega = GasModel(eta).omega
    factor = math.sqrt(math.pi / 2.0) * 15.0 / ((5.0 - 2.0 * omega) * (7.0 - 2.0 * omega))
    if direction == "to_kn":
        return factor * value
    if direction == "to_knbar":
        return value / factor
    raise CoefficientError("direction must be 'to_kn' or 'to_knbar'")


@dataclass
class CollisionMatrixSet:
    """Collision-operator matrices a_l for tensor degrees l = 0..3.

    Each a_l is a symmetric (N+1) x (N+1) matrix over radial indices.
    Mass/momentum/energy conservation forces row and column 0 and 1 of a_0
    and row and column 0 of a_1 to vanish.  Normalization: a_2[0,0] = -1.
    """

    N: int
    a: tuple  # (a0, a1, a2, a3)
    label: str = ""

    def __post_init__(self):
        if self.N < 4:
            raise CoefficientError("collision matrices need radial order N >= 4")
        if len(self.a) != 4:
            raise CoefficientError("expected four matrices (l = 0..3)")
        a = []
        for l, m in enumerate(self.a):
            m = np.asarray(m, dtype=float)
            if m.shape != (self.N + 1, self.N + 1):
                raise CoefficientError(
                    f"matrix for l={l} has shape {m.shape}, expected {(self.N+1,)*2}")
            if np.max(np.abs(m - m.T)) > 1e-12:
                raise CoefficientError(f"matrix for l={l} is not symmetric within 1e-12")
            a.append(m)
        # conservation kernel
        if np.max(np.abs(a[0][:2, :])) > 0 or np.max(np.abs(a[0][:, :2])) > 0:
            raise CoefficientError("a_0 must vanish on rows/columns 0 and 1 (mass, energy)")
        if np.max(np.abs(a[1][0, :])) > 0 or np.max(np.abs(a[1][:, 0])) > 0:
            raise CoefficientError("a_1 must vanish on row/column 0 (momentum)")
        object.__setattr__(self, "a", tuple(a)) if hasattr(self, "__frozen__") else None
        self.a = tuple(a)

    @staticmethod
    def maxwell(N=20):
        """Diagonal collision matrices of the Maxwell-molecule model.

        The rates that enter the 13-moment closure are the classical ones
        (relative to the shear rate): 2/3 for heat flux and the scalar
        fourth moment, 7/6 for the trace-free fourth moment, 3/2 for the
        third-rank moment.  Higher diagonal entries decay linearly; they do
        not influence any derived closure coefficient for this model.
        """
        diags = [np.zeros(N + 1) for _ in range(4)]
        for n in range(2, N + 1):
            diags[0][n] = -2.0 / 3.0 - 0.5 * (n - 2)
        for n in range(1, N + 1):
            diags[1][n] = -2.0 / 3.0 - 0.5 * (n - 1)
        diags[2][0] = -1.0
        for n in range(1, N + 1):
            diags[2][n] = -7.0 / 6.0 - 0.5 * (n - 1)
        for n in range(N + 1):
            diags[3][n] = -1.5 - 0.5 * n
        return CollisionMatrixSet(N=N, a=tuple(np.diag(d) for d in diags),
                                  label="maxwell")

    def to_file(self, path):
        with open(path, "w") as f:
            for l in range(4):
                f.write(f"{l} {self.N}\n")
                for row in self.a[l]:
                    f.write(" ".join(f"{x:.17e}" for x in row) + "\n")
                if l < 3:
                    f.write("\n")

    @staticmethod
    def from_file(path):
        with open(path) as f:
            blocks = [b for b in f.read().split("\n\n") if b.strip()]
        if len(blocks) != 4:
            raise CoefficientError(f"expected 4 matrix blocks in {path}, found {len(blocks)}")
        mats, N = [], None
        for expect_l, block in enumerate(blocks):
            lines = [ln for ln in block.splitlines() if ln.strip()]
            header = lines[0].split()
            l, n = int(header[0]), int(header[1])
            if l != expect_l:
                raise CoefficientError(f"blocks out of order: got l={l}, expected {expect_l}")
            if N is None:
                N = n
            elif n != N:
                raise CoefficientError("all blocks must share the same radial order N")
            vals = np.array([float(x) for ln in lines[1:] for x in ln.split()])
            if vals.size != (N + 1) ** 2:
                raise CoefficientError(f"block l={l} has {vals.size} entries, "
                                       f"expected {(N+1)**2}")
            mats.append(vals.reshape(N + 1, N + 1))
        return CollisionMatrixSet(N=N, a=tuple(mats),
                                  label=os.path.basename(path))


def find_collision_file(name):
    """Resolve a collision-matrix file: literal path first, then R13_DATA_DIR."""
    if os.path.exists(name):
        return name
    data_dir = os.environ.get("R13_DATA_DIR")
    if data_dir:
        cand = os.path.join(data_dir, name)
        if os.path.exists(cand):
            return cand
    raise CoefficientError(f"collision-matrix file not found: {name}")


def submatrix_inverse(cms, l, n0):
    """Inverse of a_l restricted to radial indices n >= n0, zero-padded back
    to full size.  The combinations hitting the conservation kernel are
    rejected."""
    if (l, n0) in _FORBIDDEN_SUBMATRIX:
        raise CoefficientError(
            f"submatrix inverse undefined for (l, n0) = ({l}, {n0}): "
            "the block lies in the conservation kernel")
    a = cms.a[l]
    sub = a[n0:, n0:]
    out = np.zeros_like(a)
    out[n0:, n0:] = np.linalg.inv(sub)
    return out


def compute_beta_gamma(cms):
    """First- and second-order expansion coefficients of the gradient
    asymptotics, as weighted rows of the inverse submatrices."""
    N = cms.N
    b11 = submatrix_inverse(cms, 1, 1)
    b20 = submatrix_inverse(cms, 2, 0)
    b02 = submatrix_inverse(cms, 0, 2)
    b12 = submatrix_inverse(cms, 1, 2)
    b21 = submatrix_inverse(cms, 2, 1)
    b30 = submatrix_inverse(cms, 3, 0)

    beta1 = b11[1, :].copy()          # heat-flux chain, n >= 1
    beta2 = b20[0, :].copy()          # stress chain, n >= 0

    ns = np.arange(N + 1)
    # difference stencils acting on the beta chains
    shift_down = lambda v: np.concatenate(([0.0], v[:-1]))   # v[n-1]
    shift_up = lambda v: np.concatenate((v[1:], [0.0]))      # v[n+1]

    w_g0 = np.sqrt(2 * ns + 3) * beta1 - np.sqrt(2 * ns) * shift_down(beta1)
    gamma0 = b02 @ w_g0 / beta1[1]

    gamma_t1 = b12 @ beta1 / beta1[1]

    w_s1 = np.sqrt(2 * ns + 5) * beta2 - np.sqrt(2 * ns) * shift_down(beta2)
    gamma_s1 = b12 @ w_s1 / beta2[0]

    gamma_t2 = b21 @ beta2 / beta2[0]

    w_s2 = np.sqrt(2 * ns + 5) * beta1 - np.sqrt(2 * (ns + 1)) * shift_up(beta1)
    gamma_s2 = 0.4 * (b21 @ w_s2) / beta1[1]

    w_g3 = np.sqrt(2 * ns + 7) * beta2 - np.sqrt(2 * (ns + 1)) * shift_up(beta2)
    gamma3 = (3.0 / 7.0) * (b30 @ w_g3) / beta2[0]

    return {
        "beta1": beta1, "beta2": beta2,
        "gamma0": gamma0, "gamma_t1": gamma_t1, "gamma_s1": gamma_s1,
        "gamma_t2": gamma_t2, "gamma_s2": gamma_s2, "gamma3": gamma3,
    }


def compute_d(bg, tol=1e-12):
    """Normalized second-order direction coefficients.

    The mixed vector families use 2x2 cross-ratio formulas; for collision
    models whose time- and space-response chains are parallel (diagonal
    matrices, e.g. Maxwell molecules) the denominators vanish identically and
    the Kronecker-delta limit is substituted.
    """
    N = bg["beta1"].size - 1
    g0, gt1, gs1 = bg["gamma0"], bg["gamma_t1"], bg["gamma_s1"]
    gt2, gs2, g3 = bg["gamma_t2"], bg["gamma_s2"], bg["gamma3"]

    d02 = np.zeros(N + 1)
    d02[2:] = g0[2:] / g0[2]
    d30 = g3 / g3[0]

    d12 = np.zeros(N + 1)
    d13 = np.zeros(N + 1)
    den1 = gs1[3] * gt1[2] - gs1[2] * gt1[3]
    scale1 = max(np.max(np.abs(gs1)) * np.max(np.abs(gt1)), 1.0)
    if abs(den1) <= tol * scale1:
        d12[2], d13[3] = 1.0, 1.0
    else:
        d12[2:] = (gt1[2:] * gs1[3] - gs1[2:] * gt1[3]) / den1
        d13[2:] = (gs1[2:] * gt1[2] - gt1[2:] * gs1[2]) / den1

    d21 = np.zeros(N + 1)
    d22 = np.zeros(N + 1)
    den2 = gs2[2] * gt2[1] - gs2[1] * gt2[2]
    scale2 = max(np.max(np.abs(gs2)) * np.max(np.abs(gt2)), 1.0)
    if abs(den2) <= tol * scale2:
        d21[1], d22[2] = 1.0, 1.0
    else:
        d21[1:] = (gt2[1:] * gs2[2] - gs2[1:] * gt2[2]) / den2
        d22[1:] = (gs2[1:] * gt2[1] - gt2[1:] * gs2[1]) / den2

    return {"d02": d02, "d12": d12, "d13": d13,
            "d21": d21, "d22": d22, "d30": d30}


@dataclass
class BasisCoefficients:
    """Rotated moment basis adapted to a collision model.

    First-order: c11/c20 carry the conventional normalizations
    (sum c11^2 = 15/2 with c11[1] < 0; sum c20^2 = 15 with c20[0] > 0);
    p1/p20 are the corresponding unit vectors oriented positively.
    Second-order vectors (c02, c12, c13, c21, c22, c30) are unit vectors in
    the full radial index space; the entries below the nominal starting index
    hold the induced components that make the functions gradient-orthogonal.
    """

    N: int
    c11: np.ndarray
    c20: np.ndarray
    p1: np.ndarray
    p20: np.ndarray
    c02: np.ndarray
    c12: np.ndarray
    c13: np.ndarray
    c21: np.ndarray
    c22: np.ndarray
    c30: np.ndarray
    beta_gamma: dict = field(default_factory=dict)
    d: dict = field(default_factory=dict)


def _nullspace_pair(G, tol):
    """Two-dimensional null space of G, or raise."""
    _, s, vt = np.linalg.svd(G)
    rank = int(np.sum(s > tol * max(s[0], 1.0))) if s.size else 0
    dim = vt.shape[1] - rank
    if dim != 2:
        raise CoefficientError(
            f"second-order basis solution space is {dim}-dimensional, expected 2 "
            "(degenerate collision matrices?)")
    return vt[rank:, :]


def _oriented_pair(null_basis, start, lift, zero_at, pos_first, pos_second, tol=1e-12):
    """Pick the oriented orthonormal pair from a 2D solution space.

    null_basis rows live on indices start..N; `lift` maps such a vector to
    the full radial vector including the induced low-index component.  The
    first member has component `zero_at` equal to zero and component
    `pos_first` positive; the second is the orthogonal complement with
    component `pos_second` positive.
    """
    wa, wb = (lift(null_basis[0]), lift(null_basis[1]))
    # combination with vanishing zero_at component
    alpha, beta = wb[zero_at], -wa[zero_at]
    if abs(alpha) < tol and abs(beta) < tol:
        # zero_at already vanishes on the whole space; keep wa
        first = wa
    else:
        first = alpha * wa + beta * wb
    nf = np.linalg.norm(first)
    if nf < tol:
        raise CoefficientError("degenerate pivot while orienting second-order basis")
    first = first / nf
    if abs(first[pos_first]) < tol:
        raise CoefficientError(
            f"pivot component {pos_first} vanishes; cannot orient second-order basis")
    if first[pos_first] < 0:
        first = -first
    second = wb - (wb @ first) * first
    ns = np.linalg.norm(second)
    if ns < tol:
        second = wa - (wa @ first) * first
        ns = np.linalg.norm(second)
    second = second / ns
    if abs(second[pos_second]) < tol:
        raise CoefficientError(
            f"pivot component {pos_second} vanishes; cannot orient second-order basis")
    if second[pos_second] < 0:
        second = -second
    return first, second


def compute_c(bg, d, tol=1e-12):
    """Second-order basis vectors from the direction coefficients."""
    N = bg["beta1"].size - 1
    beta1, beta2 = bg["beta1"], bg["beta2"]

    # first-order unit vectors and their conventional scalings
    u1 = beta1 / np.linalg.norm(beta1)
    if u1[1] > 0:
        u1 = -u1
    c11 = math.sqrt(7.5) * u1         # c11[1] < 0
    p1 = -u1                          # p1[1] > 0
    u2 = beta2 / np.linalg.norm(beta2)
    if u2[0] < 0:
        u2 = -u2
    c20 = math.sqrt(15.0) * u2
    p20 = u2

    # scalar families: fixed directions, normalized
    c02 = d["d02"] / np.linalg.norm(d["d02"])
    if c02[2] < 0:
        c02 = -c02
    c30 = d["d30"] / np.linalg.norm(d["d30"])
    if c30[0] < 0:
        c30 = -c30

    # vector family (degree 1): unknowns on n = 2..N, constraints for n >= 4
    r1 = beta1 / beta1[1]
    rows = []
    for n in range(4, N + 1):
        row = np.zeros(N - 1)
        row[n - 2] += 1.0
        row[0] -= d["d12"][n]
        row[1] -= d["d13"][n]
        kappa = r1[n] - r1[2] * d["d12"][n] - r1[3] * d["d13"][n]
        row += kappa * r1[2:]
        rows.append(row)
    G = np.array(rows)
    nb = _nullspace_pair(G, tol)

    def lift1(w):
        full = np.zeros(N + 1)
        full[2:] = w
        full[1] = -np.sum(w * r1[2:])
        return full

    c12, c13 = _oriented_pair(nb, 2, lift1, zero_at=3, pos_first=2, pos_second=3)

    # tensor family (degree 2): unknowns on n = 1..N, constraints for n >= 3
    r2 = beta2 / beta2[0]
    rows = []
    for n in range(3, N + 1):
        row = np.zeros(N)
        row[n - 1] += 1.0
        row[0] -= d["d21"][n]
        row[1] -= d["d22"][n]
        kappa = r2[n] - r2[1] * d["d21"][n] - r2[2] * d["d22"][n]
        row += kappa * r2[1:]
        rows.append(row)
    G = np.array(rows)
    nb = _nullspace_pair(G, tol)

    def lift2(w):
        full = np.zeros(N + 1)
        full[1:] = w
        full[0] = -np.sum(w * r2[1:])
        return full

    c21, c22 = _oriented_pair(nb, 1, lift2, zero_at=2, pos_first=1, pos_second=2)

    return BasisCoefficients(N=N, c11=c11, c20=c20, p1=p1, p20=p20,
                             c02=c02, c12=c12, c13=c13, c21=c21, c22=c22,
                             c30=c30, beta_gamma=bg, d=d)


def compute_A(basis):
    """Coupling constants between the closure fields, as weighted difference
    contractions of basis-vector pairs."""
    N = basis.N

    def pad(v):
        return np.concatenate((v, [0.0, 0.0]))

    p1, p20 = pad(basis.p1), pad(basis.p20)
    c02, c12, c13 = pad(basis.c02), pad(basis.c12), pad(basis.c13)
    c21, c22, c30 = pad(basis.c21), pad(basis.c22), pad(basis.c30)

    def s_down(u, v, pref, off):
        # pref * sum_n u[n] (sqrt(2n+off) v[n] - sqrt(2n) v[n-1])
        tot = 0.0
        for n in range(N + 1):
            lower = math.sqrt(2 * n) * v[n - 1] if n >= 1 else 0.0
            tot += u[n] * (math.sqrt(2 * n + off) * v[n] - lower)
        return pref * tot

    def s_up(u, v, pref, off):
        # pref * sum_n u[n] (sqrt(2n+off) v[n] - sqrt(2(n+1)) v[n+1])
        tot = 0.0
        for n in range(N + 1):
            tot += u[n] * (math.sqrt(2 * n + off) * v[n]
                           - math.sqrt(2 * (n + 1)) * v[n + 1])
        return pref * tot

    return {
        "A45": s_down(p1, p20, 3.0, 5),
        "A46": s_up(p1, c02, 1.0, 3),
        "A49": s_down(p1, c21, 3.0, 5),
        "A410": s_down(p1, c22, 3.0, 5),
        "A57": s_up(p20, c12, 3.0, 5),
        "A58": s_up(p20, c13, 3.0, 5),
        "A511": s_down(p20, c30, 7.5, 7),
        "A67": s_down(c02, c12, 1.0, 3),
        "A68": s_down(c02, c13, 1.0, 3),
        "A79": s_down(c12, c21, 3.0, 5),
        "A710": s_down(c12, c22, 3.0, 5),
        "A89": s_down(c13, c21, 3.0, 5),
        "A810": s_down(c13, c22, 3.0, 5),
        "A911": s_down(c21, c30, 7.5, 7),
        "A1011": s_down(c22, c30, 7.5, 7),
    }


def compute_L_blocks(cms, basis):
    """Relaxation blocks of the collision operator in the rotated basis,
    including the dual-space factors."""
    V1 = np.column_stack((basis.p1, basis.c12, basis.c13))
    V2 = np.column_stack((basis.p20, basis.c21, basis.c22))
    L1 = S_L[1] * (V1.T @ cms.a[1] @ V1)
    L2 = S_L[2] * (V2.T @ cms.a[2] @ V2)
    L0_22 = S_L[0] * float(basis.c02 @ cms.a[0] @ basis.c02)
    L3_00 = S_L[3] * float(basis.c30 @ cms.a[3] @ basis.c30)
    return {"L1": L1, "L2": L2, "L0_22": L0_22, "L3_00": L3_00}


@dataclass
class ModelCoefficients:
    """Transport coefficients of the regularized 13-moment system."""

    k: np.ndarray          # k0..k10
    l1: float
    l2: float
    eta: float | None = None
    source: Source = Source.DERIVED

    def __getattr__(self, name):
        if name.startswith("k") and name[1:].isdigit():
            i = int(name[1:])
            if 0 <= i <= 10:
                return float(self.k[i])
        raise AttributeError(name)


def _check_definite(M, name, sign=-1.0, tol=1e-10):
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    if np.any(sign * w < -tol):
        raise StructuralMismatchError(
            f"relaxation block {name} is not negative definite; "
            "second-order elimination would leave unstable off-stencil terms")


def compute_model_coefficients(basis, A, L, eta=None):
    """Eliminate the algebraic second-order fields from the moment equations
    and collect the coefficients of the closed system.

    The elimination reduces to Schur complements of the relaxation blocks
    against the gradient couplings; any structure that would put terms
    outside the closed-equation stencil (indefinite blocks, violated
    cross-coupling inequalities) raises StructuralMismatchError.
    """
    L1, L2 = L["L1"], L["L2"]
    _check_definite(L1, "L1")
    _check_definite(L2, "L2")
    if L["L0_22"] >= -1e-14 or L["L3_00"] >= -1e-14:
        raise StructuralMismatchError("scalar relaxation rates must be negative")

    M1 = L1[1:, 1:]
    M2 = L2[1:, 1:]
    g1 = L1[0, 1:]
    g2 = L2[0, 1:]
    cc = np.array([basis.c12[1], basis.c13[1]])   # induced heat-flux components
    dd = np.array([basis.c21[0], basis.c22[0]])   # induced stress components
    a4 = np.array([A["A49"], A["A410"]])
    a5 = np.array([A["A57"], A["A58"]])

    M1cc = np.linalg.solve(M1, cc)
    M1a5 = np.linalg.solve(M1, a5)
    M1g1 = np.linalg.solve(M1, g1)
    M2dd = np.linalg.solve(M2, dd)
    M2a4 = np.linalg.solve(M2, a4)
    M2g2 = np.linalg.solve(M2, g2)

    k = np.zeros(11)
    k[0] = basis.p1[1] - cc @ M1g1
    k[1] = -5.0 * cc @ M1cc
    k[2] = -(math.sqrt(2.0) / 3.0) * cc @ M1a5
    k[3] = -15.0 * dd @ M2dd
    k[4] = math.sqrt(2.0) * a4 @ M2dd
    k[5] = basis.p20[0] - dd @ M2g2
    k[6] = -A["A46"] ** 2 / (6.0 * L["L0_22"])
    k[7] = -(5.0 / 36.0) * a4 @ M2a4
    k[8] = (math.sqrt(2.0) / 6.0) * (-A["A45"] + a5 @ M1g1 + a4 @ M2g2)
    k[9] = -A["A511"] ** 2 / (15.0 * L["L3_00"])
    k[10] = -(2.0 / 15.0) * a5 @ M1a5
    l1 = -0.5 * (L1[0, 0] - g1 @ M1g1)
    l2 = -(2.0 / 15.0) * (L2[0, 0] - g2 @ M2g2)

    # diffusive coefficients must close an entropy-dissipating stencil
    for i in (1, 3, 6, 7, 9, 10):
        if k[i] < -1e-8:
            raise StructuralMismatchError(f"diffusion coefficient k{i} is negative")
    if l1 <= 0 or l2 <= 0:
        raise StructuralMismatchError("relaxation rates l1, l2 must be positive")
    if (3 * k[2]) ** 2 / 4 > 1.5 * k[1] * 0.5 * k[10] + 1e-8 * max(1.0, k[1]):
        raise StructuralMismatchError("cross coupling k2 breaks the dissipation bound")
    if k[4] ** 2 > k[3] * (24.0 / 25.0) * k[7] + 1e-8 * max(1.0, k[3]):
        raise StructuralMismatchError("cross coupling k4 breaks the dissipation bound")

    return ModelCoefficients(k=k, l1=l1, l2=l2, eta=eta, source=Source.DERIVED)


def derive(cms, eta=None):
    """Full derivation pipeline: collision matrices -> transport coefficients.

    Returns (ModelCoefficients, BasisCoefficients, A, L).  Deterministic for
    fixed input.
    """
    bg = compute_beta_gamma(cms)
    d = compute_d(bg)
    basis = compute_c(bg, d)
    A = compute_A(basis)
    L = compute_L_blocks(cms, basis)
    mc = compute_model_coefficients(basis, A, L, eta=eta)
    return mc, basis, A, L


# ---------------------------------------------------------------------------
# builtin tables for inverse-power-law models

_SQ2PI = math.sqrt(2.0 * math.pi)

_K_TABLE = {
    5.0: [1.0, 0.0, 0.0, 0.0, 0.0,
          1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0],
    7.0: [9.9785e-1, 3.0773e-3, 1.2550e-5, 2.6072e-3, 4.8885e-2,
          9.9794e-1, 8.9911e-1, 9.7119e-1, 8.6773e-1, 9.6577e-1,
          2.8590e-7, 9.9420e-1, 9.9545e-1],
    10.0: [9.9396e-1, 8.7436e-3, 4.5818e-5, 7.4080e-3, 8.1805e-2,
           9.9420e-1, 8.4173e-1, 9.5624e-1, 7.7962e-1, 9.4997e-1,
           1.1896e-6, 9.8385e-1, 9.8727e-1],
    17.0: [9.8883e-1, 1.6341e-2, 1.0021e-4, 1.3840e-2, 1.1124e-1,
           9.8926e-1, 7.9687e-1, 9.4576e-1, 7.0221e-1, 9.4062e-1,
           2.8475e-6, 9.7049e-1, 9.7666e-1],
    math.inf: [9.7971e-1, 3.0261e-2, 2.0798e-4, 2.5607e-2, 1.5056e-1,
               9.8041e-1, 7.4535e-1, 9.3584e-1, 6.0171e-1, 9.3491e-1,
               6.3621e-6, 9.4741e-1, 9.5812e-1],
}

_M_TABLE = {
    # per eta: m1 (5), m2 (8 or None), m3 (5), m4 (8), m5 (8 or None),
    #          m6 (9), m71 (= m81)
    5.0: {
        "m1": [2 / _SQ2PI, 1 / (2 * _SQ2PI), 8 / (5 * _SQ2PI),
               48 / (25 * _SQ2PI), 0.0],
        "m2": None,
        "m3": [1 / _SQ2PI, 1 / (5 * _SQ2PI), 0.0, 2 / _SQ2PI, 0.0],
        "m4": [1 / _SQ2PI, 11 / (5 * _SQ2PI), 0.0, 2 / _SQ2PI, 0.0,
               0.0, 0.0, 24 / 5],
        "m5": None,
        "m6": [2 / (5 * _SQ2PI), 7 / (5 * _SQ2PI), 8 / (25 * _SQ2PI),
               48 / (125 * _SQ2PI), 0.0, 0.0, 2.0, 0.0, 0.0],
        "m71": 1 / (2 * _SQ2PI),
    },
    7.0: {
        "m1": [8.2699e-1, 1.7756e-1, 5.9524e-1, 7.7155e-1, 4.0454e-2],
        "m2": [4.9821e-3, 1.9210e-2, 3.5585e-3, 4.6126e-3, 2.4185e-4,
               2.9445e-2, 1.1082e-1, 4.5197e-4],
        "m3": [4.0358e-1, 7.2977e-2, 5.8325e-8, 7.8808e-1, 7.6807e-6],
        "m4": [3.4342e-1, 8.5528e-1, 5.6647e-8, 7.6541e-1, 7.4598e-6,
               1.2222e-1, 2.4505e-1, 4.7008],
        "m5": [3.4282e-2, 8.5377e-2, 5.6547e-9, 7.6406e-2, 7.4466e-7,
               2.7746e-2, 5.5632e-2, 4.7964e-1],
        "m6": [1.5598e-1, 6.0144e-1, 1.1141e-1, 1.4441e-1, 7.5718e-3,
               2.1284e-7, 2.0460, 9.0196e-8, 3.5825e-7],
        "m71": 2.0678e-1,
    },
    10.0: {
        "m1": [8.4706e-1, 1.6277e-1, 5.7153e-1, 7.7914e-1, 6.9432e-2],
        "m2": [7.5057e-3, 3.1012e-2, 4.9556e-3, 6.7557e-3, 6.0203e-4,
               5.0347e-2, 1.9074e-1, 9.9954e-4],
        "m3": [4.0655e-1, 6.8340e-2, 2.4645e-7, 7.8723e-1, 2.8477e-5],
        "m4": [3.0441e-1, 8.4194e-1, 2.3349e-7, 7.4584e-1, 2.6980e-5,
               2.0315e-1, 4.0914e-1, 4.6366],
        "m5": [5.2206e-2, 1.4439e-1, 4.0044e-8, 1.2791e-1, 4.6270e-6,
               6.0867e-2, 1.2259e-1, 8.1033e-1],
        "m6": [1.5101e-1, 6.2395e-1, 9.9703e-2, 1.3592e-1, 1.2112e-2,
               1.6606e-6, 2.0707, 3.0801e-7, 2.8135e-6],
        "m71": 2.0996e-1,
    },
    17.0: {
        "m1": [8.6507e-1, 1.4961e-1, 5.5359e-1, 7.8843e-1, 9.6598e-2],
        "m2": [9.2216e-3, 4.0714e-2, 5.6679e-3, 8.0723e-3, 9.8900e-4,
               7.0089e-2, 2.6780e-1, 1.6422e-3],
        "m3": [4.0908e-1, 6.4237e-2, 5.9816e-7, 7.9036e-1, 6.3150e-5],
        "m4": [2.6826e-1, 8.3207e-1, 5.5187e-7, 7.2919e-1, 5.8263e-5,
               2.7309e-1, 5.5322e-1, 4.5779],
        "m5": [6.4303e-2, 1.9945e-1, 1.3228e-7, 1.7479e-1, 1.3966e-5,
               1.0110e-1, 2.0482e-1, 1.1154],
        "m6": [1.4747e-1, 6.5107e-1, 9.0636e-2, 1.2909e-1, 1.5815e-2,
               5.1333e-6, 2.1281, 6.3694e-7, 8.7714e-6],
        "m71": 2.1152e-1,
    },
    math.inf: {
        "m1": [8.8890e-1, 1.3234e-1, 5.3390e-1, 8.0443e-1, 1.3481e-1],
        "m2": [1.0730e-2, 5.2344e-2, 5.9826e-3, 9.0140e-3, 1.5106e-3,
               9.8823e-2, 3.8322e-1, 2.6338e-3],
        "m3": [4.1227e-1, 5.8927e-2, 1.3613e-6, 8.0020e-1, 1.3351e-4],
        "m4": [2.1746e-1, 8.2380e-1, 1.2025e-6, 7.0683e-1, 1.1793e-4,
               3.6056e-1, 7.3790e-1, 4.4916],
        "m5": [7.3794e-2, 2.7955e-1, 4.0806e-7, 2.3986e-1, 4.0020e-5,
               1.7187e-1, 3.5174e-1, 1.5445],
        "m6": [1.4418e-1, 7.0335e-1, 8.0389e-2, 1.2112e-1, 2.0298e-2,
               1.5172e-5, 2.2756, 1.2781e-6, 2.6311e-5],
        "m71": 2.1169e-1,
    },
}


@dataclass
class BCCoefficients:
    """Wall boundary-condition coefficients.

    Groups m1..m6 are the coefficient rows of the Onsager boundary
    conditions; m71 (= m81) closes the remaining stress components.  Groups
    m2 and m5 are None for models whose boundary system is rank-deficient
    (Maxwell molecules).  chi is the accommodation coefficient.
    """

    m1: np.ndarray
    m2: np.ndarray | None
    m3: np.ndarray
    m4: np.ndarray
    m5: np.ndarray | None
    m6: np.ndarray
    m71: float
    chi: float = 1.0
    eta: float | None = None
    source: Source = Source.BUILTIN_TABLE

    @property
    def m81(self):
        return self.m71

    @property
    def chi_tilde(self):
        return 2.0 * self.chi / (2.0 - self.chi)


def _match_eta(eta):
    for key in _BUILTIN_ETAS:
        if (math.isinf(eta) and math.isinf(key)) or eta == key:
            return key
    raise CoefficientError(
        f"no builtin table for eta = {eta}; available: 5, 7, 10, 17, inf")


def load_builtin(eta, chi=1.0):
    """Builtin transport and boundary coefficients for an inverse-power-law
    model.  Returns (ModelCoefficients, BCCoefficients)."""
    key = _match_eta(eta)
    row = _K_TABLE[key]
    mc = ModelCoefficients(k=np.array(row[:11]), l1=row[11], l2=row[12],
                           eta=key, source=Source.BUILTIN_TABLE)
    t = _M_TABLE[key]
    bc = BCCoefficients(
        m1=np.array(t["m1"]),
        m2=None if t["m2"] is None else np.array(t["m2"]),
        m3=np.array(t["m3"]),
        m4=np.array(t["m4"]),
        m5=None if t["m5"] is None else np.array(t["m5"]),
        m6=np.array(t["m6"]),
        m71=t["m71"],
        chi=chi, eta=key, source=Source.BUILTIN_TABLE)
    return mc, bc
