"""Cone algebra for products of nonnegative orthants, second-order cones and
real symmetric PSD cones.

Vectors are laid out as ``[orthant | soc_1 | ... | psd_1 (svec) | ...]``.
PSD blocks use the lower-triangular ``svec`` packing with off-diagonal
entries scaled by sqrt(2), so the Euclidean inner product of two packed
vectors equals the trace inner product of the matrices.

Cones of the same kind and size are processed together as batched arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=None)
def svec_layout(n: int):
    rows, cols = np.tril_indices(n)
    scale = np.where(rows == cols, 1.0, SQRT2)
    diag_pos = np.flatnonzero(rows == cols)
    return rows, cols, scale, diag_pos


def svec(X: np.ndarray) -> np.ndarray:
    """Pack symmetric matrices (..., n, n) into (..., n(n+1)/2)."""
    n = X.shape[-1]
    rows, cols, scale, _ = svec_layout(n)
    return X[..., rows, cols] * scale


def smat(v: np.ndarray, n: int) -> np.ndarray:
    rows, cols, scale, _ = svec_layout(n)
    X = np.zeros(v.shape[:-1] + (n, n))
    vals = v / scale
    X[..., rows, cols] = vals
    X[..., cols, rows] = vals
    return X


@dataclass(frozen=True)
class ConeDims:
    l: int = 0
    q: tuple[int, ...] = ()
    s: tuple[int, ...] = ()
    soc_groups: dict = field(init=False, repr=False, compare=False)
    psd_groups: dict = field(init=False, repr=False, compare=False)
    psd_offsets: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(int(d) for d in self.q))
        object.__setattr__(self, "s", tuple(int(n) for n in self.s))
        off = self.l
        soc: dict[int, list[int]] = {}
        for d in self.q:
            soc.setdefault(d, []).append(off)
            off += d
        psd: dict[int, list[int]] = {}
        offsets = []
        for n in self.s:
            psd.setdefault(n, []).append(off)
            offsets.append(off)
            off += n * (n + 1) // 2
        object.__setattr__(
            self, "soc_groups",
            {d: np.asarray(o)[:, None] + np.arange(d) for d, o in soc.items()},
        )
        object.__setattr__(
            self, "psd_groups",
            {n: np.asarray(o)[:, None] + np.arange(n * (n + 1) // 2) for n, o in psd.items()},
        )
        object.__setattr__(self, "psd_offsets", tuple(offsets))

    @property
    def size(self) -> int:
        return self.l + sum(self.q) + sum(n * (n + 1) // 2 for n in self.s)

    @property
    def degree(self) -> int:
        return self.l + len(self.q) + sum(self.s)

    def identity(self) -> np.ndarray:
        e = np.zeros(self.size)
        e[: self.l] = 1.0
        for idx in self.soc_groups.values():
            e[idx[:, 0]] = 1.0
        for n, idx in self.psd_groups.items():
            e[idx[:, svec_layout(n)[3]]] = 1.0
        return e

    def min_eig(self, u: np.ndarray) -> float:
        """Smallest 'eigenvalue' of ``u`` over all cones (negative outside)."""
        vals = [np.inf]
        if self.l:
            vals.append(u[: self.l].min())
        for idx in self.soc_groups.values():
            x = u[idx]
            vals.append((x[:, 0] - np.linalg.norm(x[:, 1:], axis=1)).min())
        for n, idx in self.psd_groups.items():
            vals.append(np.linalg.eigvalsh(smat(u[idx], n))[:, 0].min())
        return float(min(vals))

    def jprod(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Jordan product u o v."""
        out = np.empty(self.size)
        out[: self.l] = u[: self.l] * v[: self.l]
        for idx in self.soc_groups.values():
            a, b = u[idx], v[idx]
            r = np.empty_like(a)
            r[:, 0] = np.einsum("ij,ij->i", a, b)
            r[:, 1:] = a[:, :1] * b[:, 1:] + b[:, :1] * a[:, 1:]
            out[idx] = r
        for n, idx in self.psd_groups.items():
            A, B = smat(u[idx], n), smat(v[idx], n)
            AB = A @ B
            out[idx] = svec(0.5 * (AB + AB.swapaxes(-1, -2)))
        return out


@dataclass
class Scaling:
    """Nesterov-Todd scaling W with W z = W^{-T} s = lam.

    LP: W = diag(d). SOC: W = beta (2 v v^T - J). PSD: W(Z) = R^T Z R.
    """

    dims: ConeDims
    d: np.ndarray
    beta: dict
    v: dict
    R: dict
    Rinv: dict
    lam: np.ndarray
    lam_psd: dict

    def apply(self, x: np.ndarray, inverse: bool = False, trans: bool = False) -> np.ndarray:
        """Apply W (or its inverse/transpose) along the last axis of ``x``."""
        dims = self.dims
        out = np.empty_like(x)
        ell = dims.l
        out[..., :ell] = x[..., :ell] / self.d if inverse else x[..., :ell] * self.d
        for dq, idx in dims.soc_groups.items():
            xs = x[..., idx]
            beta, v = self.beta[dq], self.v[dq]
            jx = xs.copy()
            jx[..., 1:] *= -1.0
            if inverse:
                # W^{-1} = (2 J v v^T J - J) / beta
                jv = v.copy()
                jv[:, 1:] *= -1.0
                r = 2.0 * np.einsum("ij,...ij->...i", jv, xs)[..., None] * jv - jx
                out[..., idx] = r / beta[:, None]
            else:
                r = 2.0 * np.einsum("ij,...ij->...i", v, xs)[..., None] * v - jx
                out[..., idx] = r * beta[:, None]
        for n, idx in dims.psd_groups.items():
            X = smat(x[..., idx], n)
            M = self.Rinv[n] if inverse else self.R[n]
            # W: R^T X R, W^T: R X R^T, W^{-1}: R^{-T} X R^{-1}, W^{-T}: R^{-1} X R^{-T}
            if trans:
                Y = M @ X @ M.swapaxes(-1, -2)
            else:
                Y = M.swapaxes(-1, -2) @ X @ M
            out[..., idx] = svec(Y)
        return out

    def lam_prod(self, u: np.ndarray) -> np.ndarray:
        """lam o u."""
        return self._lam_op(u, divide=False)

    def lam_div(self, u: np.ndarray) -> np.ndarray:
        """Solve lam o x = u for x."""
        return self._lam_op(u, divide=True)

    def _lam_op(self, u: np.ndarray, divide: bool) -> np.ndarray:
        dims, lam = self.dims, self.lam
        out = np.empty_like(u)
        ell = dims.l
        out[:ell] = u[:ell] / lam[:ell] if divide else u[:ell] * lam[:ell]
        for idx in dims.soc_groups.values():
            a, b = lam[idx], u[idx]
            r = np.empty_like(b)
            if divide:
                jl = a[:, 0] ** 2 - np.einsum("ij,ij->i", a[:, 1:], a[:, 1:])
                r[:, 0] = (a[:, 0] * b[:, 0] - np.einsum("ij,ij->i", a[:, 1:], b[:, 1:])) / jl
                r[:, 1:] = (b[:, 1:] - r[:, :1] * a[:, 1:]) / a[:, :1]
            else:
                r[:, 0] = np.einsum("ij,ij->i", a, b)
                r[:, 1:] = a[:, :1] * b[:, 1:] + b[:, :1] * a[:, 1:]
            out[idx] = r
        for n, idx in dims.psd_groups.items():
            rows, cols, _, _ = svec_layout(n)
            lp = self.lam_psd[n]
            pair = 0.5 * (lp[:, rows] + lp[:, cols])
            out[idx] = u[idx] / pair if divide else u[idx] * pair
        return out

    def max_step(self, du: np.ndarray) -> float:
        """Largest alpha with lam + alpha*du in the cone (inf if unbounded)."""
        dims, lam = self.dims, self.lam
        steps = [np.inf]
        ell = dims.l
        if ell:
            neg = du[:ell] < 0
            if neg.any():
                steps.append((-lam[:ell][neg] / du[:ell][neg]).min())
        for idx in dims.soc_groups.values():
            a, b = lam[idx], du[idx]
            c = a[:, 0] ** 2 - np.einsum("ij,ij->i", a[:, 1:], a[:, 1:])
            bb = a[:, 0] * b[:, 0] - np.einsum("ij,ij->i", a[:, 1:], b[:, 1:])
            aa = b[:, 0] ** 2 - np.einsum("ij,ij->i", b[:, 1:], b[:, 1:])
            disc = bb ** 2 - aa * c
            ok = (aa < 0) | ((bb < 0) & (disc >= 0))
            if ok.any():
                root = np.sqrt(np.maximum(disc[ok], 0.0))
                steps.append((c[ok] / (-bb[ok] + root)).min())
        for n, idx in dims.psd_groups.items():
            isq = 1.0 / np.sqrt(self.lam_psd[n])
            D = smat(du[idx], n) * isq[:, :, None] * isq[:, None, :]
            m = np.linalg.eigvalsh(D)[:, 0]
            neg = m < 0
            if neg.any():
                steps.append((-1.0 / m[neg]).min())
        return float(min(steps))


def _jnorm(x: np.ndarray) -> np.ndarray:
    # (x0 - |x1|)(x0 + |x1|) avoids cancellation near the boundary
    r = np.linalg.norm(x[:, 1:], axis=1)
    return np.sqrt(np.maximum((x[:, 0] - r) * (x[:, 0] + r), 0.0))


def compute_scaling(dims: ConeDims, s: np.ndarray, z: np.ndarray) -> Scaling:
    ell = dims.l
    d = np.sqrt(s[:ell] / z[:ell])
    lam = np.empty(dims.size)
    lam[:ell] = np.sqrt(s[:ell] * z[:ell])
    betas, vs = {}, {}
    for dq, idx in dims.soc_groups.items():
        ss, zz = s[idx], z[idx]
        sj = _jnorm(ss)
        zj = _jnorm(zz)
        if not (np.all(sj > 0) and np.all(zj > 0)):
            raise np.linalg.LinAlgError("iterate left the second-order cone")
        sb, zb = ss / sj[:, None], zz / zj[:, None]
        gam = np.sqrt(0.5 * (1.0 + np.einsum("ij,ij->i", sb, zb)))
        wb = sb.copy()
        wb[:, 0] += zb[:, 0]
        wb[:, 1:] -= zb[:, 1:]
        wb /= 2.0 * gam[:, None]
        v = wb.copy()
        v[:, 0] += 1.0
        v /= np.sqrt(2.0 * (wb[:, 0] + 1.0))[:, None]
        beta = np.sqrt(sj / zj)
        betas[dq], vs[dq] = beta, v
        # lam = W z
        jz = zz.copy()
        jz[:, 1:] *= -1.0
        lam[idx] = beta[:, None] * (2.0 * np.einsum("ij,ij->i", v, zz)[:, None] * v - jz)
    Rs, Rinvs, lam_psd = {}, {}, {}
    for n, idx in dims.psd_groups.items():
        S, Z = smat(s[idx], n), smat(z[idx], n)
        Ls = np.linalg.cholesky(S)
        Lz = np.linalg.cholesky(Z)
        U, sv, Vt = np.linalg.svd(Lz.swapaxes(-1, -2) @ Ls)
        V = Vt.swapaxes(-1, -2)
        isq = 1.0 / np.sqrt(sv)
        R = (Ls @ V) * isq[:, None, :]
        # R^{-1} = diag(sqrt(sv)) V^T Ls^{-1} = diag(1/sqrt(sv)) U^T Lz^T
        Rinv = (U.swapaxes(-1, -2) @ Lz.swapaxes(-1, -2)) * isq[:, :, None]
        Rs[n], Rinvs[n], lam_psd[n] = R, Rinv, sv
        lv = np.zeros(idx.shape)
        lv[:, svec_layout(n)[3]] = sv
        lam[idx] = lv
    return Scaling(dims, d, betas, vs, Rs, Rinvs, lam, lam_psd)
