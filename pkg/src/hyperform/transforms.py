"""Poisson, Radon and Fourier transforms for bundle-valued data.

Boundary data live in L^2(K, sigma), realized on the sigma-isotypic
subspace of Lambda^p coordinates.  The workhorse closed form is the
atom

    p^{g,v}(k) = sqrt(d_{tau,sigma}) e^{(i lam - rho) H(g^{-1}k)}
                 P_sigma tau(kappa(g^{-1}k))^{-1} v,

whose Poisson image is a translated spherical function, so the Poisson
transform of atomic data needs no integration at all.  General
sections go through Monte Carlo over Haar-random rotations with
deterministic seed-splitting.

Compactly supported bundle sections on G are integrated over horocycles
by tensor Gauss-Legendre quadrature in the N-coordinates (dn is taken
as gamma_N dy with gamma_N the constant that normalizes the opposite
horocyclic measure; the Fourier dual-path test pins this calibration).
The Euclidean Fourier transform of the horocycle integral gives the
Helgason-Fourier coefficient, and the spectral projection is its
Poisson synthesis weighted by the Plancherel density.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from math import comb, gamma, pi, sqrt

import numpy as np

from . import extrep as xr
from . import liegroup as lg
from .extrep import FormVector
from .liegroup import GroupElement, KElement
from .spherical import (SpectralPoint, _sigma_projector, plancherel_density,
                        spherical_at, weyl_reflect)

__all__ = [
    "BoundaryAtom",
    "BoundarySection",
    "CompactSection",
    "atom_eval",
    "poisson_atom",
    "poisson_mc",
    "u_intertwine",
    "gram_matrix",
    "radon",
    "radon_sigma",
    "fourier_helgason",
    "fourier_direct_mc",
    "spectral_projection",
    "bump_section",
    "gamma_n_measure",
]


def _n_threads():
    try:
        return max(int(os.environ.get("HYPERFORM_THREADS", "1")), 1)
    except ValueError:
        return 1


def gamma_n_measure(n):
    """Normalization of dn = gamma_N dy on the horocycle group: the
    constant making the opposite-horocycle integral of e^{-2 rho H}
    equal to one."""
    return gamma(n - 1) / (pi ** ((n - 1) / 2) * gamma((n - 1) / 2))


def _embed_k_batch(kmats):
    kmats = np.asarray(kmats, dtype=float)
    if kmats.ndim == 2:
        kmats = kmats[None]
    b, n = kmats.shape[0], kmats.shape[-1]
    out = np.zeros((b, n + 1, n + 1))
    out[:, :n, :n] = kmats
    out[:, n, n] = 1.0
    return out


def _dim_ratio(pt):
    if pt.spec.chirality != "none":
        return 1.0
    if pt.sigma.kind == "q":
        return comb(pt.n, pt.p) / comb(pt.n - 1, pt.sigma.q)
    return 2.0 * comb(pt.n, pt.p) / comb(pt.n - 1, pt.p)


# ---------------------------------------------------------------------------
# boundary data


class BoundaryAtom:
    """Distinguished boundary datum (g, v); v a fiber vector of tau."""

    __slots__ = ("g", "v")

    def __init__(self, g, v):
        if not isinstance(g, GroupElement):
            g = GroupElement(np.asarray(g, dtype=float))
        if not isinstance(v, FormVector):
            raise TypeError("atom vector must be a FormVector")
        self.g = g
        self.v = v


class BoundarySection:
    """A section of the sigma-bundle over K: an atom combination at a
    fixed spectral point, or a black-box sampler with a sample budget."""

    def __init__(self, pt, atoms=None, sampler=None, budget=0):
        if (atoms is None) == (sampler is None):
            raise ValueError("exactly one of atoms/sampler must be given")
        self.pt = pt
        self.atoms = list(atoms) if atoms is not None else None
        self.sampler = sampler
        self.budget = int(budget)
        self._drawn = 0

    @classmethod
    def from_atoms(cls, pt, weighted_atoms):
        return cls(pt, atoms=[(a, complex(w)) for a, w in weighted_atoms])

    @classmethod
    def from_sampler(cls, pt, fn, budget):
        return cls(pt, sampler=fn, budget=budget)

    @property
    def is_atomic(self):
        return self.atoms is not None

    def eval_batch(self, kmats):
        """Values on a stack of rotations, shape (B, C(n,p))."""
        kmats = np.asarray(kmats, dtype=float)
        if kmats.ndim == 2:
            kmats = kmats[None]
        if self.is_atomic:
            out = np.zeros((kmats.shape[0], self.pt.spec.dim_full), dtype=complex)
            for atom, w in self.atoms:
                out += w * _atom_eval_batch(self.pt, atom, kmats)
            return out
        self._drawn += kmats.shape[0]
        if self.budget and self._drawn > self.budget:
            raise RuntimeError("sampler budget exhausted")
        return np.asarray(self.sampler(kmats), dtype=complex)


def _atom_eval_batch(pt, atom, kmats):
    mats = atom.g.inv().mat[None, :, :] @ _embed_k_batch(kmats)
    h, _, kap = lg._iwasawa_full(mats)
    tk = xr.tau_matrix_batch(kap, pt.p)
    # tau(kappa)^{-1} v = tau(kappa)^T v
    vec = np.einsum("bji,j->bi", tk, atom.v.coeffs)
    proj = _sigma_projector(pt.spec, pt.sigma)
    vec = vec @ proj.T
    lam, rho = complex(pt.lam), pt.rho
    return sqrt(_dim_ratio(pt)) * np.exp((1j * lam - rho) * h)[:, None] * vec


def atom_eval(pt, atom, k):
    """The atom section evaluated at one rotation."""
    km = k.mat if isinstance(k, KElement) else np.asarray(k, dtype=float)
    out = _atom_eval_batch(pt, atom, km[None])[0]
    return FormVector(pt.n, pt.p, out)


# ---------------------------------------------------------------------------
# Poisson transform


def poisson_atom(pt, atom, x):
    """Closed-form Poisson image of an atom: Phi(g^{-1} x) v."""
    gx = GroupElement(atom.g.inv().mat @ x.mat, check=False)
    out = spherical_at(pt, gx) @ atom.v.coeffs
    return FormVector(pt.n, pt.p, out, spec=pt.spec)


def _haar_chunks(n, samples, rng, chunk=4096):
    if rng is None:
        rng = np.random.default_rng(0)
    k = (samples + chunk - 1) // chunk
    try:
        subs = rng.spawn(k)
    except AttributeError:
        subs = [np.random.default_rng(s)
                for s in rng.bit_generator._seed_seq.spawn(k)]
    sizes = [chunk] * (samples // chunk)
    if samples % chunk:
        sizes.append(samples % chunk)
    return list(zip(subs, sizes))


def poisson_mc(pt, section, x, samples, rng=None):
    """Monte Carlo Poisson transform of a boundary section at x.

    Returns (FormVector, stderr) with the standard error aggregated
    over real and imaginary parts of all components.
    """
    if samples <= 0:
        raise ValueError("need a positive sample count")
    if section.sampler is not None and section.budget < samples:
        raise ValueError("sampler budget below requested samples")
    lam, rho = complex(pt.lam), pt.rho
    xinv = x.inv().mat
    root_d = sqrt(_dim_ratio(pt))

    def one_chunk(args):
        sub_rng, b = args
        ks = lg.haar_sample_K(pt.n, size=b, rng=sub_rng)
        fvals = section.eval_batch(ks)
        mats = xinv[None, :, :] @ _embed_k_batch(ks)
        h, _, kap = lg._iwasawa_full(mats)
        tk = xr.tau_matrix_batch(kap, pt.p)
        integ = root_d * np.exp(-(1j * lam + rho) * h)[:, None] \
            * np.einsum("bij,bj->bi", tk, fvals)
        return integ.sum(axis=0), (np.abs(integ) ** 2).sum(axis=0), b

    chunks = _haar_chunks(pt.n, samples, rng)
    # black-box samplers are not assumed thread-safe
    workers = _n_threads() if section.is_atomic else 1
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(one_chunk, chunks))
    else:
        parts = [one_chunk(c) for c in chunks]
    tot = sum(p[0] for p in parts)
    tot2 = sum(p[1] for p in parts)
    mean = tot / samples
    var = np.maximum(tot2 / samples - np.abs(mean) ** 2, 0.0)
    stderr = float(np.sqrt(var.sum() / samples))
    return FormVector(pt.n, pt.p, mean), stderr


# ---------------------------------------------------------------------------
# intertwiner and Gram forms


def u_intertwine(pt, section):
    """Relabel an atom section to the Weyl-reflected spectral point
    (s sigma, -lambda); the atoms themselves are unchanged."""
    if not section.is_atomic:
        raise ValueError("intertwiner is only realized on atom sections")
    ssig, slam = weyl_reflect(pt.sigma, pt.lam)
    new_pt = SpectralPoint(pt.spec, ssig, slam)
    return BoundarySection.from_atoms(new_pt, section.atoms)


def gram_matrix(pt, atoms):
    """Gram matrix of atoms in L^2(K, sigma) via the closed form
    <p^{g1,v1}, p^{g2,v2}> = <Phi(g1^{-1} g2) v1, v2>."""
    m = len(atoms)
    out = np.zeros((m, m), dtype=complex)
    for i, ai in enumerate(atoms):
        for j, aj in enumerate(atoms):
            gij = GroupElement(ai.g.inv().mat @ aj.g.mat, check=False)
            out[i, j] = np.vdot(aj.v.coeffs, spherical_at(pt, gij) @ ai.v.coeffs)
    return out


# ---------------------------------------------------------------------------
# compactly supported sections and the Radon transform


class CompactSection:
    """Right-covariant compactly supported section of the form bundle:
    f(gk) = tau(k)^{-1} f(g), vanishing for A^+(g) > r_supp."""

    def __init__(self, spec, fn_batch, r_supp, l2_norm=None):
        self.spec = spec
        self.fn_batch = fn_batch
        self.r_supp = float(r_supp)
        self._l2 = l2_norm

    def eval_batch(self, mats):
        return self.fn_batch(np.asarray(mats, dtype=float))

    def eval(self, g):
        m = g.mat if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
        return FormVector(self.spec.n, self.spec.p, self.eval_batch(m[None])[0])

    def l2_norm(self):
        if self._l2 is None:
            raise ValueError("section does not carry a closed-form L2 norm")
        return self._l2


def bump_section(spec, r_supp, v0=None):
    """Smooth radial bump section f(g) = chi(A^+(g)) tau(pi0(g))^{-1} v0
    with the standard mollifier profile chi."""
    n, p = spec.n, spec.p
    if v0 is None:
        v = np.zeros(comb(n, p), dtype=complex)
        v[0] = 1.0
        if spec.chirality != "none":
            v = xr.chirality_matrix(n, spec.chirality) @ v
        v0 = v / np.linalg.norm(v)
    else:
        v0 = np.asarray(v0, dtype=complex)

    def chi(t):
        t = np.asarray(t, dtype=float)
        u = np.clip(t / r_supp, 0.0, 1.0)
        out = np.zeros_like(u)
        inside = u < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out

    def fn(mats):
        d = mats[..., -1, -1]
        t = np.arccosh(np.maximum(d, 1.0))
        c = chi(t)
        out = np.zeros(mats.shape[:-2] + (comb(n, p),), dtype=complex)
        live = c > 0.0
        if np.any(live):
            blocks = lg._polar_block(mats[live])
            tk = xr.tau_matrix_batch(blocks, p)
            out[live] = c[live, None] * np.einsum("bji,j->bi", tk, v0)
        return out

    # ||f||^2 = ||v0||^2 int chi(t)^2 (2 sinh t)^(n-1) dt, radial profile
    ts, ws = np.polynomial.legendre.leggauss(200)
    ts = 0.5 * r_supp * (ts + 1.0)
    ws = 0.5 * r_supp * ws
    l2 = sqrt(float(np.sum(ws * chi(ts) ** 2 * (2.0 * np.sinh(ts)) ** (spec.n - 1)))
              * float(np.vdot(v0, v0).real))
    return CompactSection(spec, fn, r_supp, l2_norm=l2)


def _tensor_grid(y_half, m, nodes):
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    xs = y_half * xs
    ws = y_half * ws
    grids = np.meshgrid(*([xs] * m), indexing="ij")
    ys = np.stack([g.reshape(-1) for g in grids], axis=-1)
    wgrid = np.ones(ys.shape[0])
    wmesh = np.meshgrid(*([ws] * m), indexing="ij")
    for w in wmesh:
        wgrid = wgrid * w.reshape(-1)
    return ys, wgrid


def radon(f, t, k, grid=32):
    """Horocycle integral e^{rho t} int_N f(k a_t n) dn by tensor
    Gauss-Legendre over the y-coordinates of N; n <= 4 only."""
    n = f.spec.n
    if n > 4:
        raise ValueError("horocycle quadrature supported for n <= 4")
    m = n - 1
    rho = (n - 1) / 2.0
    t = float(t)
    if abs(t) >= f.r_supp:
        return FormVector(n, f.spec.p, np.zeros(f.spec.dim_full))
    y_half = sqrt(2.0 * np.exp(-t) * (np.cosh(f.r_supp) - np.cosh(t)))
    ys, ws = _tensor_grid(y_half, m, grid)
    km = k.mat if isinstance(k, KElement) else np.asarray(k, dtype=float)
    base = _embed_k_batch(km[None])[0] @ lg._at_mat(t, n)
    mats = base[None, :, :] @ lg._ny_mat(ys, n)
    vals = f.eval_batch(mats)
    total = (ws[:, None] * vals).sum(axis=0)
    total *= np.exp(rho * t) * gamma_n_measure(n)
    return FormVector(n, f.spec.p, total)


def radon_sigma(pt, f, t, k, grid=32):
    """Partial Radon transform sqrt(d_{tau,sigma}) P_sigma Radon f."""
    r = radon(f, t, k, grid=grid)
    proj = _sigma_projector(pt.spec, pt.sigma)
    return FormVector(f.spec.n, f.spec.p, sqrt(_dim_ratio(pt)) * (proj @ r.coeffs))


def fourier_helgason(f, pt, k, t_nodes=48, grid=32):
    """Helgason-Fourier coefficient: the 1D Euclidean Fourier integral
    of the partial Radon transform over t in [-R, R]."""
    n = f.spec.n
    if n > 4:
        raise ValueError("horocycle quadrature supported for n <= 4")
    lam = complex(pt.lam)
    km = k.mat if isinstance(k, KElement) else np.asarray(k, dtype=float)
    ts, ws = np.polynomial.legendre.leggauss(t_nodes)
    ts = f.r_supp * ts
    ws = f.r_supp * ws
    total = np.zeros(f.spec.dim_full, dtype=complex)
    for tj, wj in zip(ts, ws):
        rv = radon_sigma(pt, f, tj, km, grid=grid)
        total += wj * np.exp(-1j * lam * tj) * rv.coeffs
    return FormVector(n, f.spec.p, total)


def fourier_direct_mc(f, pt, k, samples, rng=None):
    """The same coefficient from the group-integral definition

        sqrt(d_{tau,sigma}) int_G e^{(i lam - rho) H(g^{-1}k)}
            P_sigma tau(kappa(g^{-1}k))^{-1} f(g) dg

    by Monte Carlo in radial-times-rotations coordinates; the oracle
    for the Radon path.  Returns (FormVector, stderr).
    """
    if rng is None:
        rng = np.random.default_rng(0)
    n, p = f.spec.n, f.spec.p
    lam, rho = complex(pt.lam), pt.rho
    km = k.mat if isinstance(k, KElement) else np.asarray(k, dtype=float)
    kemb = _embed_k_batch(km[None])[0]
    # radial density (2 sinh t)^(n-1) on [0, R] via inverse-cdf table
    tgrid = np.linspace(0.0, f.r_supp, 4001)
    dens = (2.0 * np.sinh(tgrid)) ** (n - 1)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(tgrid))])
    mass = cdf[-1]
    cdf /= mass
    proj = _sigma_projector(pt.spec, pt.sigma)
    tot = np.zeros(f.spec.dim_full, dtype=complex)
    tot2 = np.zeros(f.spec.dim_full)
    done = 0
    while done < samples:
        b = min(8192, samples - done)
        u = rng.random(b)
        ts = np.interp(u, cdf, tgrid)
        k1 = lg.haar_sample_K(n, size=b, rng=rng)
        k2 = lg.haar_sample_K(n, size=b, rng=rng)
        gs = _embed_k_batch(k1) @ lg._at_mat(ts, n) @ _embed_k_batch(k2)
        fvals = f.eval_batch(gs)
        args = np.einsum("bij,jk->bik", _inv_mats(gs), kemb)
        h, _, kap = lg._iwasawa_full(args)
        tk = xr.tau_matrix_batch(kap, p)
        integ = np.exp((1j * lam - rho) * h)[:, None] \
            * np.einsum("ij,bkj,bk->bi", proj, tk, fvals)
        tot += integ.sum(axis=0)
        tot2 += (np.abs(integ) ** 2).sum(axis=0)
        done += b
    scale = mass * sqrt(_dim_ratio(pt))
    mean = tot / samples * scale
    var = np.maximum(tot2 / samples - np.abs(tot / samples) ** 2, 0.0) * scale ** 2
    stderr = float(np.sqrt(var.sum() / samples))
    return FormVector(n, p, mean), stderr


def _inv_mats(gs):
    n = gs.shape[-1] - 1
    jj = np.ones(n + 1)
    jj[-1] = -1.0
    return jj[None, :, None] * np.swapaxes(gs, -1, -2) * jj[None, None, :]


def spectral_projection(f, pt, g, k_samples=2000, t_nodes=40, grid=24,
                        rng=None, fused=False):
    """Spectral projection Q f(g) = nu_sigma(lambda) P(F f)(g).

    The composed path routes the Helgason-Fourier coefficients through
    poisson_mc as a sampler section; the fused path evaluates the same
    K-integral in one sweep.  Both integrate tau(kappa) against the
    coefficients (the Poisson kernel orientation).
    """
    nu = plancherel_density(pt)
    if fused:
        if rng is None:
            rng = np.random.default_rng(0)
        lam, rho = complex(pt.lam), pt.rho
        ks = lg.haar_sample_K(pt.n, size=k_samples, rng=rng)
        fvals = np.stack([fourier_helgason(f, pt, km, t_nodes=t_nodes, grid=grid).coeffs
                          for km in ks])
        mats = g.inv().mat[None, :, :] @ _embed_k_batch(ks)
        h, _, kap = lg._iwasawa_full(mats)
        tk = xr.tau_matrix_batch(kap, pt.p)
        integ = sqrt(_dim_ratio(pt)) * np.exp(-(1j * lam + rho) * h)[:, None] \
            * np.einsum("bij,bj->bi", tk, fvals)
        mean = integ.mean(axis=0)
        var = np.maximum((np.abs(integ) ** 2).mean(axis=0) - np.abs(mean) ** 2, 0.0)
        stderr = float(np.sqrt(var.sum() / k_samples))
        return FormVector(pt.n, pt.p, nu * mean), nu * stderr

    def sampler(kmats):
        return np.stack([fourier_helgason(f, pt, km, t_nodes=t_nodes, grid=grid).coeffs
                         for km in kmats])

    section = BoundarySection.from_sampler(pt, sampler, budget=k_samples)
    vec, err = poisson_mc(pt, section, g, k_samples, rng=rng)
    return FormVector(pt.n, pt.p, nu * vec.coeffs), nu * err
