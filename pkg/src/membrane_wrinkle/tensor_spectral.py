"""Exact algebra for symmetric 2x2 tensors in an orthonormal surface frame.

Second-order tensors are plain ``ndarray`` objects whose two trailing axes
have shape ``(2, 2)``; fourth-order tensors have trailing shape
``(2, 2, 2, 2)``.  Every function broadcasts over arbitrary leading axes so the
same code serves a single material point and a whole mesh of quadrature
points.

Note on naming: the curvilinear *metric* coefficients are called
``metric`` / ``G_ab`` throughout the package, while the fourth-order
eigenbasis operator built here is :func:`build_G`.  The two are unrelated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import GeometryError

__all__ = [
    "sym2",
    "Spectral2",
    "spectral_decompose",
    "macaulay",
    "split_tensor",
    "outer",
    "build_J",
    "build_G",
    "build_Q",
    "sym_identity",
    "ddot",
    "contract",
    "LocalFrame",
]

_EYE2 = np.eye(2)


def sym2(a11, a22, a12=0.0):
    """Assemble a symmetric 2x2 tensor (array) from its three components."""
    a11, a22, a12 = np.broadcast_arrays(
        np.asarray(a11, float), np.asarray(a22, float), np.asarray(a12, float)
    )
    out = np.empty(a11.shape + (2, 2))
    out[..., 0, 0] = a11
    out[..., 1, 1] = a22
    out[..., 0, 1] = a12
    out[..., 1, 0] = a12
    return out


class Spectral2(NamedTuple):
    """Eigen-pairs of a symmetric 2x2 tensor with ``e1 >= e2``."""

    e1: np.ndarray
    e2: np.ndarray
    n1: np.ndarray
    n2: np.ndarray

    @property
    def M1(self):
        return outer(self.n1, self.n1)

    @property
    def M2(self):
        return outer(self.n2, self.n2)

    def reconstruct(self):
        return self.e1[..., None, None] * self.M1 + self.e2[..., None, None] * self.M2


def _canonical_sign(n):
    # first nonzero component positive, ties resolved by the second component
    n = np.array(n, dtype=float, copy=True)
    tiny = np.abs(n[..., 0]) < 1e-15
    n[..., 0] = np.where(tiny, 0.0, n[..., 0])
    flip = (n[..., 0] < 0) | (tiny & (n[..., 1] < 0))
    n[flip] *= -1.0
    return n


def spectral_decompose(A) -> Spectral2:
    """Closed-form eigen-decomposition of symmetric 2x2 tensors.

    Eigenvalues are ordered ``e1 >= e2``.  The eigenvector of ``e1`` is
    ``(cos t, sin t)`` with ``tan 2t = 2 a12 / (a11 - a22)``; both vectors are
    returned with their first nonzero component positive.  Isotropic input
    yields the Cartesian axes.
    """
    A = np.asarray(A, dtype=float)
    a = A[..., 0, 0]
    b = A[..., 1, 1]
    c = 0.5 * (A[..., 0, 1] + A[..., 1, 0])
    mean = 0.5 * (a + b)
    half = 0.5 * (a - b)
    radius = np.hypot(half, c)
    e1 = mean + radius
    e2 = mean - radius
    theta = 0.5 * np.arctan2(c, half)
    cs, sn = np.cos(theta), np.sin(theta)
    n1 = _canonical_sign(np.stack([cs, sn], axis=-1))
    n2 = _canonical_sign(np.stack([-sn, cs], axis=-1))
    return Spectral2(e1, e2, n1, n2)


def macaulay(x):
    """Return ``(<x>+, <x>-)`` with ``<x>+- = (x +- |x|) / 2``."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    return 0.5 * (x + ax), 0.5 * (x - ax)


def outer(a, b):
    return a[..., :, None] * b[..., None, :]


def split_tensor(sp: Spectral2):
    """Positive and negative semidefinite parts built from the eigen-pairs."""
    p1, m1 = macaulay(sp.e1)
    p2, m2 = macaulay(sp.e2)
    M1, M2 = sp.M1, sp.M2
    plus = p1[..., None, None] * M1 + p2[..., None, None] * M2
    minus = m1[..., None, None] * M1 + m2[..., None, None] * M2
    return plus, minus


def build_J():
    """Fourth-order tensor with ``J : A = tr(A) I``."""
    return np.einsum("ij,kl->ijkl", _EYE2, _EYE2)


def sym_identity():
    """Symmetric fourth-order identity ``(d_ik d_jl + d_il d_jk) / 2``."""
    return 0.5 * (
        np.einsum("ik,jl->ijkl", _EYE2, _EYE2) + np.einsum("il,jk->ijkl", _EYE2, _EYE2)
    )


def build_G(Ma, Mb):
    """Eigenbasis operator ``G_gdez = Ma_ge Mb_dz + Ma_gz Mb_de``."""
    Ma = np.asarray(Ma, dtype=float)
    Mb = np.asarray(Mb, dtype=float)
    return np.einsum("...ge,...dz->...gdez", Ma, Mb) + np.einsum(
        "...gz,...de->...gdez", Ma, Mb
    )


def build_Q(n):
    """Rank-one projector ``Q = M (x) M`` with ``M = n (x) n``."""
    n = np.asarray(n, dtype=float)
    M = outer(n, n)
    return np.einsum("...gd,...ez->...gdez", M, M)


def ddot(A, B):
    """Double contraction ``A : B`` of two second-order tensors."""
    return np.einsum("...ij,...ij->...", A, B)


def contract(C, A):
    """``C : A`` for a fourth-order ``C`` and second-order ``A``."""
    return np.einsum("...ijkl,...kl->...ij", C, A)


@dataclass(frozen=True)
class LocalFrame:
    """Orthonormal tangent frame attached to the covariant basis ``G_a``.

    ``t1 = G1/|G1|`` and ``t2`` follows from Gram-Schmidt on ``G2``.  The
    coefficient matrix ``T[i, a] = t_i . G^a`` converts covariant strain
    components to the frame (``E_loc = T E_cov T^T``) and frame stress back to
    contravariant components (``S^ab = T^T S_loc T``).
    """

    G: np.ndarray  # (..., 2, 3) covariant tangents
    t: np.ndarray  # (..., 2, 3)
    T: np.ndarray  # (..., 2, 2)
    metric: np.ndarray  # (..., 2, 2)

    @classmethod
    def from_tangents(cls, G, rel_tol=1e-13):
        G = np.asarray(G, dtype=float)
        metric = np.einsum("...ak,...bk->...ab", G, G)
        det = metric[..., 0, 0] * metric[..., 1, 1] - metric[..., 0, 1] ** 2
        scale = metric[..., 0, 0] * metric[..., 1, 1]
        if np.any(~(det > rel_tol * scale)) or np.any(~(scale > 0)):
            raise GeometryError("singular surface metric (zero-area mapping)")
        t1 = G[..., 0, :] / np.linalg.norm(G[..., 0, :], axis=-1, keepdims=True)
        w = G[..., 1, :] - np.einsum("...k,...k->...", G[..., 1, :], t1)[..., None] * t1
        t2 = w / np.linalg.norm(w, axis=-1, keepdims=True)
        t = np.stack([t1, t2], axis=-2)
        # contravariant basis G^a = metric^{-1}_{ab} G_b
        Gcon = np.einsum("...ab,...bk->...ak", np.linalg.inv(metric), G)
        T = np.einsum("...ik,...ak->...ia", t, Gcon)
        return cls(G=G, t=t, T=T, metric=metric)

    @property
    def contravariant(self):
        return np.einsum("...ab,...bk->...ak", np.linalg.inv(self.metric), self.G)

    @property
    def area_jacobian(self):
        m = self.metric
        return np.sqrt(m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] ** 2)

    def strain_to_local(self, E_cov):
        return np.einsum("...ia,...ab,...jb->...ij", self.T, E_cov, self.T)

    def strain_from_local(self, E_loc):
        Ti = np.linalg.inv(self.T)
        return np.einsum("...ai,...ij,...bj->...ab", Ti, E_loc, Ti)

    def stress_from_local(self, S_loc):
        return np.einsum("...ia,...ij,...jb->...ab", self.T, S_loc, self.T)

    def stress_to_local(self, S_con):
        Ti = np.linalg.inv(self.T)
        return np.einsum("...ai,...ab,...bj->...ij", Ti, S_con, Ti)

    def tangent_from_local(self, C_loc):
        T = self.T
        return np.einsum("...ia,...jb,...kc,...ld,...ijkl->...abcd", T, T, T, T, C_loc)

    def tangent_to_local(self, C_con):
        Ti = np.linalg.inv(self.T)
        return np.einsum(
            "...ai,...bj,...ck,...dl,...abcd->...ijkl", Ti, Ti, Ti, Ti, C_con
        )
