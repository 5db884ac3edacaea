"""The Lorentz group SO0(n,1) and its Iwasawa / Cartan structure theory.

Elements are (n+1) x (n+1) real matrices preserving the quadratic form
x_1^2 + ... + x_n^2 - x_{n+1}^2 and the time orientation (lower right
entry >= 1).  K = SO(n) sits in the upper left block, A = {a_t} is the
hyperbolic one-parameter group in the (1, n+1) plane, and N = {n_y},
y in R^(n-1), is the usual horospherical group.  Conventions:

    a_t  : cosh t at (1,1) and (n+1,n+1), sinh t at (1,n+1), (n+1,1)
    n_y  : unipotent, parametrized so that n_y n_z = n_{y+z}

Iwasawa G = KAN reads off the last row of g: with c_1 = g[n,0] and
d = g[n,n], H(g) = log(c_1 + d) (the argument is always positive on
G), and y = e^{-H} * (middle entries of the last row).  Cartan
G = K A+ K uses t+ = arccosh(d); the left factor k1 is the rotation
taking e_1 to b/|b| (b the upper right column), built from a
deterministic Householder reflection with a sign fix, so decompositions
are reproducible across runs.

Most functions accept stacked arrays (..., n+1, n+1) and are the
vectorized work horses of the transform modules; the thin GroupElement
and KElement wrappers carry validation for the scalar public API.
"""

import numpy as np

__all__ = [
    "GroupElement",
    "KElement",
    "IwasawaFactors",
    "CartanFactors",
    "make_rotation",
    "make_at",
    "make_ny",
    "iwasawa",
    "cartan",
    "polar_k",
    "e_defect",
    "haar_sample_K",
    "radial_weight",
]

# Below t+ = TIE_EPS the Cartan k1 direction b/|b| is numerically
# meaningless and the decomposition falls back to (polar_k(g), 0, id).
TIE_EPS = 1.0e-12

# Orthogonality slack accepted from K blocks produced by chained matrix
# products before we declare an internal consistency error.
_CONSISTENCY_TOL = 1.0e-8


def _metric(n):
    j = np.ones(n + 1)
    j[n] = -1.0
    return np.diag(j)


# ---------------------------------------------------------------------------
# wrappers


class KElement:
    """A rotation u in SO(n), validated on construction.

    mode="strict" requires u^T u = I within 1e-12 and det u > 0;
    mode="repair" re-orthonormalizes through the polar projection
    (nearest rotation in Frobenius norm) provided the defect is small.
    """

    __slots__ = ("mat",)

    def __init__(self, mat, mode="strict"):
        u = np.asarray(mat, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError(f"KElement needs a square matrix, got shape {u.shape}")
        defect = np.max(np.abs(u.T @ u - np.eye(u.shape[0])))
        if mode == "repair":
            if defect > 1.0e-6:
                raise ValueError(f"rotation defect {defect:.3e} too large to repair")
            if defect > 1.0e-14:
                w, _, vt = np.linalg.svd(u)
                u = w @ vt
        elif defect > 1.0e-12:
            raise ValueError(f"matrix is not orthogonal: defect {defect:.3e}")
        if np.linalg.det(u) < 0.0:
            raise ValueError("matrix has determinant -1, not in SO(n)")
        self.mat = u

    @property
    def n(self):
        return self.mat.shape[0]

    def inv(self):
        return KElement(self.mat.T, mode="repair")

    def __matmul__(self, other):
        if isinstance(other, KElement):
            return KElement(self.mat @ other.mat, mode="repair")
        return NotImplemented

    def __repr__(self):
        return f"KElement(n={self.n})"


class GroupElement:
    """An element of SO0(n,1), validated on construction.

    Invariants: g^T J g = J within 1e-12 relative to the squared entry
    scale, lower-right entry >= 1, and determinant +1 (checked through
    slogdet so large boosts do not overflow).
    """

    __slots__ = ("mat",)

    def __init__(self, mat, check=True):
        g = np.asarray(mat, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1] or g.shape[0] < 3:
            raise ValueError(f"GroupElement needs (n+1)x(n+1), n >= 2; got {g.shape}")
        if check:
            n = g.shape[0] - 1
            jj = _metric(n)
            scale = max(1.0, float(np.max(np.abs(g))) ** 2)
            defect = np.max(np.abs(g.T @ jj @ g - jj)) / scale
            if defect > 1.0e-12:
                raise ValueError(f"matrix does not preserve the form: defect {defect:.3e}")
            if g[n, n] < 1.0 - 1.0e-12:
                raise ValueError(f"time orientation reversed: d = {g[n, n]!r}")
            sign, logdet = np.linalg.slogdet(g)
            if sign <= 0.0 or abs(logdet) > 1.0e-9 * (1.0 + abs(np.log(scale))):
                raise ValueError("determinant is not +1")
        self.mat = g

    @property
    def n(self):
        return self.mat.shape[0] - 1

    def inv(self):
        # g^-1 = J g^T J, which is exact up to rounding of the transpose.
        n = self.n
        jj = _metric(n)
        return GroupElement(jj @ self.mat.T @ jj, check=False)

    def __matmul__(self, other):
        if isinstance(other, GroupElement):
            return GroupElement(self.mat @ other.mat, check=False)
        return NotImplemented

    def __repr__(self):
        return f"GroupElement(n={self.n})"


class IwasawaFactors:
    """Result of the Iwasawa decomposition g = kappa a_H n_y."""

    __slots__ = ("kappa", "h", "y")

    def __init__(self, kappa, h, y):
        self.kappa = kappa
        self.h = h
        self.y = y


class CartanFactors:
    """Result of the Cartan decomposition g = k1 a_t k2, t >= 0."""

    __slots__ = ("k1", "t", "k2")

    def __init__(self, k1, t, k2):
        self.k1 = k1
        self.t = t
        self.k2 = k2


# ---------------------------------------------------------------------------
# constructors (array kernels + wrappers)


def _embed_rotation(u):
    """(..., n, n) rotations -> (..., n+1, n+1) group elements."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    out = np.zeros(u.shape[:-2] + (n + 1, n + 1))
    out[..., :n, :n] = u
    out[..., n, n] = 1.0
    return out


def _at_mat(t, n):
    """(...,) parameters -> (..., n+1, n+1) boosts a_t."""
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape + (n + 1, n + 1))
    idx = np.arange(1, n)
    out[..., idx, idx] = 1.0
    ch, sh = np.cosh(t), np.sinh(t)
    out[..., 0, 0] = ch
    out[..., n, n] = ch
    out[..., 0, n] = sh
    out[..., n, 0] = sh
    return out


def _ny_mat(y, n):
    """(..., n-1) parameters -> (..., n+1, n+1) horospherical n_y."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != n - 1:
        raise ValueError(f"y must have length n-1 = {n - 1}, got {y.shape[-1]}")
    q = 0.5 * np.sum(y * y, axis=-1)
    out = np.zeros(y.shape[:-1] + (n + 1, n + 1))
    idx = np.arange(1, n)
    out[..., idx, idx] = 1.0
    out[..., 0, 0] = 1.0 - q
    out[..., 0, 1:n] = y
    out[..., 0, n] = q
    out[..., 1:n, 0] = -y
    out[..., 1:n, n] = y
    out[..., n, 0] = -q
    out[..., n, 1:n] = y
    out[..., n, n] = 1.0 + q
    return out


def make_rotation(u):
    """Embed u in SO(n) as a GroupElement fixing the time axis."""
    if isinstance(u, KElement):
        u = u.mat
    else:
        u = KElement(u, mode="strict").mat
    return GroupElement(_embed_rotation(u), check=False)


def make_at(t, n):
    """The boost a_t in SO0(n,1)."""
    return GroupElement(_at_mat(float(t), n), check=False)


def make_ny(y):
    """The horospherical element n_y; the dimension is len(y) + 1."""
    y = np.asarray(y, dtype=float).reshape(-1)
    return GroupElement(_ny_mat(y, y.size + 1), check=False)


# ---------------------------------------------------------------------------
# decompositions


def _iwasawa_h(mats):
    """H(g) for stacked matrices; asserts positivity of c_1 + d."""
    s = mats[..., -1, 0] + mats[..., -1, -1]
    if np.any(s <= 0.0):
        raise ValueError("Iwasawa argument c_1 + d is not positive")
    return np.log(s)


def _iwasawa_hy(mats):
    s = mats[..., -1, 0] + mats[..., -1, -1]
    if np.any(s <= 0.0):
        raise ValueError("Iwasawa argument c_1 + d is not positive")
    h = np.log(s)
    y = mats[..., -1, 1:-1] / s[..., None]
    return h, y

def _iwasawa_full(mats):
    """(H, y, kappa block) for stacked matrices."""
    n = mats.shape[-1] - 1
    h, y = _iwasawa_hy(mats)
    kap = mats @ _ny_mat(-y, n) @ _at_mat(-h, n)
    block = kap[..., :n, :n]
    defect = np.max(np.abs(
        np.swapaxes(block, -1, -2) @ block - np.eye(n)))
    if defect > _CONSISTENCY_TOL:
        raise ArithmeticError(
            f"Iwasawa K factor lost orthogonality: defect {defect:.3e}")
    return h, y, block


def iwasawa(g):
    """Decompose g = kappa a_H n_y; returns IwasawaFactors."""
    h, y, block = _iwasawa_full(g.mat)
    return IwasawaFactors(KElement(block, mode="repair"), float(h), y)


def _polar_block(mats):
    """K-part of the polar (geodesic-symmetry) decomposition, as the
    n x n rotation block A - b c^T / (1 + d)."""
    n = mats.shape[-1] - 1
    a = mats[..., :n, :n]
    b = mats[..., :n, n]
    c = mats[..., n, :n]
    d = mats[..., n, n]
    return a - b[..., :, None] * c[..., None, :] / (1.0 + d)[..., None, None]


def polar_k(g):
    """Rotation part pi0(g) of g = pi0 exp(X), the hyperbolic polar
    factorization; equals k1 k2 of the Cartan decomposition."""
    block = _polar_block(g.mat if isinstance(g, GroupElement) else np.asarray(g))
    defect = np.max(np.abs(block.T @ block - np.eye(block.shape[-1])))
    if defect > _CONSISTENCY_TOL:
        raise ArithmeticError(f"polar block defect {defect:.3e}")
    return KElement(block, mode="repair")


def _cartan_radius(mats):
    d = np.clip(mats[..., -1, -1], 1.0, None)
    return np.arccosh(d)


def _householder_to_e1(b):
    """Stacked rotations S with S e_1 = b/|b|, built from the reflection
    through (b/|b| - e_1) with the last column negated to restore
    det = +1.  Deterministic; b ~ +e_1 returns the identity."""
    b = np.asarray(b, dtype=float)
    n = b.shape[-1]
    nrm = np.linalg.norm(b, axis=-1, keepdims=True)
    if np.any(nrm == 0.0):
        raise ValueError("zero direction vector in Householder step")
    u = b / nrm
    v = u.copy()
    v[..., 0] -= 1.0
    vv = np.sum(v * v, axis=-1)
    out = np.broadcast_to(np.eye(n), b.shape[:-1] + (n, n)).copy()
    ok = vv > 1.0e-28  # b away from +e_1
    if np.any(ok):
        vok = v[ok]
        r = np.eye(n) - 2.0 * vok[..., :, None] * vok[..., None, :] / vv[ok][..., None, None]
        r[..., :, -1] = -r[..., :, -1]
        out[ok] = r
    return out


def _cartan_batch(mats):
    """(t, k1 block, k2 block) for stacked group matrices.

    k2 is recovered through the polar identity k1 k2 = pi0(g) rather
    than the product a_{-t} k1^{-1} g: the latter cancels entries of
    size e^{2t} and costs ~e^{2t} ulps, the former only ~e^{t}.
    """
    n = mats.shape[-1] - 1
    t = _cartan_radius(mats)
    tie = t < TIE_EPS
    pol = _polar_block(mats)
    defect = np.max(np.abs(np.swapaxes(pol, -1, -2) @ pol - np.eye(n)))
    if defect > _CONSISTENCY_TOL:
        raise ArithmeticError(
            f"Cartan K factors lost orthogonality: defect {defect:.3e}")
    k1 = np.empty(mats.shape[:-2] + (n, n))
    if np.any(~tie):
        k1[~tie] = _householder_to_e1(mats[~tie][..., :n, n])
    if np.any(tie):
        k1[tie] = pol[tie]
    k2 = np.swapaxes(k1, -1, -2) @ pol
    return t, k1, k2


def cartan(g):
    """Decompose g = k1 a_t k2 with t >= 0; returns CartanFactors.

    The k1 column convention (k1 e_1 = b/|b|) fixes the M-ambiguity of
    the decomposition deterministically; below TIE_EPS the radius is
    treated as zero.
    """
    t, k1, k2 = _cartan_batch(g.mat[None, ...])
    return CartanFactors(
        KElement(k1[0], mode="repair"), float(t[0]), KElement(k2[0], mode="repair")
    )


def e_defect(g, x):
    """Horocyclic defect E(g, x) = A+(g x) - A+(x) - H(g k1(x)).

    Nonnegative, zero at g = e, and bounded by exp(2(A+(g) - A+(x)))
    whenever A+(x) >= A+(g); a quantitative form of the triangle
    inequality for the Cartan radius along horocycles.
    """
    gx = g.mat @ x.mat
    tp_gx = float(_cartan_radius(gx))
    tp_x = float(_cartan_radius(x.mat))
    _, k1x, _ = _cartan_batch(x.mat[None, ...])
    h = float(_iwasawa_h(g.mat @ _embed_rotation(k1x[0])))
    return tp_gx - tp_x - h


def haar_sample_K(n, size=None, rng=None):
    """Haar-distributed rotations in SO(n).

    Gaussian QR with the R-diagonal sign fix (Mezzadri's recipe); a
    final column flip lands det = -1 samples back in SO(n).  Returns
    an (n, n) array, or (size, n, n) when size is given.
    """
    if rng is None:
        rng = np.random.default_rng()
    m = 1 if size is None else int(size)
    z = rng.standard_normal((m, n, n))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0.0] = 1.0
    q = q * d[:, None, :]
    det = np.linalg.det(q)
    q[det < 0.0, :, -1] = -q[det < 0.0, :, -1]
    return q[0] if size is None else q


def radial_weight(t, n):
    """Density (2 sinh t)^(n-1) of the Cartan-radial measure on G/K."""
    return (2.0 * np.sinh(np.asarray(t, dtype=float))) ** (n - 1)
