"""Surface geometry, B-spline bases, quadrature and Green-Lagrange strain.

A :class:`Patch` is a single tensor-product B-spline surface (all weights
one).  Degree one with open knots is the bilinear Lagrange element, so the
same code covers ``p = 1, 2, 3``.

Degrees of freedom follow ``r = 3 * a + i`` (zero based) for control point
``a`` and Cartesian direction ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError, DomainError, GeometryError
from .tensor_spectral import LocalFrame

__all__ = [
    "open_uniform_knots",
    "greville",
    "find_span",
    "basis_funs_ders",
    "gauss_legendre",
    "Patch",
    "rectangle_patch",
    "QuadPointGeom",
    "QuadratureData",
    "SurfaceState",
    "basis_eval",
    "reference_geometry",
    "green_lagrange",
    "strain_variations",
    "surface_quantities",
]


def open_uniform_knots(n_elem, p):
    """Open knot vector on ``[0, 1]`` with ``n_elem`` equal spans."""
    if n_elem < 1 or p < 1:
        raise ConfigError(f"need n_elem >= 1 and p >= 1, got {n_elem}, {p}")
    inner = np.linspace(0.0, 1.0, n_elem + 1)
    return np.concatenate([np.zeros(p), inner, np.ones(p)])


def greville(knots, p):
    n = len(knots) - p - 1
    return np.array([knots[i + 1 : i + p + 1].mean() for i in range(n)])


def find_span(knots, p, u):
    n = len(knots) - p - 1
    if u >= knots[n]:
        return n - 1
    return int(np.searchsorted(knots, u, side="right") - 1)


def basis_funs_ders(knots, p, span, u):
    """Values and first derivatives of the ``p + 1`` nonzero B-splines.

    Algorithm A2.3 of Piegl and Tiller, truncated at the first derivative.
    """
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
    ndu = np.zeros((p + 1, p + 1))
    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = u - knots[span + 1 - j]
        right[j] = knots[span + j] - u
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved
    N = ndu[:, p].copy()
    dN = np.zeros(p + 1)
    for r in range(p + 1):
        d = 0.0
        if r >= 1:
            d += ndu[r - 1, p - 1] / ndu[p, r - 1]
        if r <= p - 1:
            d -= ndu[r, p - 1] / ndu[p, r]
        dN[r] = p * d
    return N, dN


def gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True)
class QuadPointGeom:
    """Reference geometry at a single parametric point."""

    theta: np.ndarray
    weight: float
    cps: np.ndarray  # control point indices with nonzero basis
    N: np.ndarray  # (nloc,)
    dN: np.ndarray  # (nloc, 2) parametric derivatives
    G: np.ndarray  # (2, 3) covariant tangents
    Gcon: np.ndarray  # (2, 3) contravariant tangents
    metric: np.ndarray  # (2, 2)
    jacobian: float
    frame: LocalFrame

    @property
    def dofs(self):
        return (3 * self.cps[:, None] + np.arange(3)).ravel()


@dataclass(frozen=True)
class SurfaceState:
    g: np.ndarray  # current covariant tangents (2, 3)
    jacobian: float  # current area per parametric area
    detF: float
    f: np.ndarray  # images F t_i of the local frame vectors (2, 3)
    c: np.ndarray  # current orthonormal tangent frame (2, 3)
    F_loc: np.ndarray  # F components, current frame rows x reference frame columns


@dataclass
class QuadratureData:
    """Precomputed per-element, per-quadrature-point reference quantities."""

    conn: np.ndarray  # (ne, nloc)
    theta: np.ndarray  # (ne, nq, 2)
    N: np.ndarray  # (ne, nq, nloc)
    dN: np.ndarray  # (ne, nq, nloc, 2)
    X: np.ndarray  # (ne, nq, 3)
    G: np.ndarray  # (ne, nq, 2, 3)
    T: np.ndarray  # (ne, nq, 2, 2)
    t: np.ndarray  # (ne, nq, 2, 3)
    A: np.ndarray  # (ne, nq, nloc, 2) shape derivatives along the local frame
    jacobian: np.ndarray  # (ne, nq)
    dA: np.ndarray  # (ne, nq) reference area weight

    @property
    def n_elem(self):
        return self.conn.shape[0]

    @property
    def n_qp(self):
        return self.N.shape[1]

    @cached_property
    def edofs(self):
        return (3 * self.conn[:, :, None] + np.arange(3)).reshape(self.n_elem, -1)


@dataclass
class Patch:
    """Single B-spline membrane patch.

    Parameters
    ----------
    knots_u, knots_v : open knot vectors on ``[0, 1]``
    degree : polynomial degree in both directions
    control_points : ``(n_u * n_v, 3)`` array, index ``a = i + n_u * j``
    thickness : membrane thickness
    n_gauss : Gauss points per direction, defaults to ``degree + 1``
    """

    knots_u: np.ndarray
    knots_v: np.ndarray
    degree: int
    control_points: np.ndarray
    thickness: float
    n_gauss: int | None = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        self.knots_u = np.asarray(self.knots_u, dtype=float)
        self.knots_v = np.asarray(self.knots_v, dtype=float)
        self.control_points = np.asarray(self.control_points, dtype=float)
        p = self.degree
        if p < 1:
            raise ConfigError(f"degree must be >= 1, got {p}")
        for kv in (self.knots_u, self.knots_v):
            if np.any(np.diff(kv) < 0):
                raise ConfigError("knot vector must be non-decreasing")
            if not (np.all(kv[: p + 1] == kv[0]) and np.all(kv[-p - 1 :] == kv[-1])):
                raise ConfigError("knot vector must be open (end multiplicity p + 1)")
        if self.control_points.shape != (self.n_u * self.n_v, 3):
            raise ConfigError(
                f"expected {(self.n_u * self.n_v, 3)} control points, "
                f"got {self.control_points.shape}"
            )
        if not self.thickness > 0:
            raise ConfigError("thickness must be positive")
        if self.n_gauss is None:
            self.n_gauss = p + 1

    @property
    def n_u(self):
        return len(self.knots_u) - self.degree - 1

    @property
    def n_v(self):
        return len(self.knots_v) - self.degree - 1

    @property
    def n_cp(self):
        return self.n_u * self.n_v

    @property
    def n_dof(self):
        return 3 * self.n_cp

    @cached_property
    def spans_u(self):
        return _spans(self.knots_u, self.degree)

    @cached_property
    def spans_v(self):
        return _spans(self.knots_v, self.degree)

    @property
    def n_elem_u(self):
        return len(self.spans_u)

    @property
    def n_elem_v(self):
        return len(self.spans_v)

    @property
    def n_elem(self):
        return self.n_elem_u * self.n_elem_v

    def element_ij(self, elem):
        if not 0 <= elem < self.n_elem:
            raise DomainError(f"element {elem} out of range")
        return elem % self.n_elem_u, elem // self.n_elem_u

    def element_bounds(self, elem):
        """Parametric box ``((u0, u1), (v0, v1))`` of an element."""
        iu, iv = self.element_ij(elem)
        su, sv = self.spans_u[iu], self.spans_v[iv]
        return (
            (self.knots_u[su], self.knots_u[su + 1]),
            (self.knots_v[sv], self.knots_v[sv + 1]),
        )

    def element_cps(self, elem):
        iu, iv = self.element_ij(elem)
        su, sv = self.spans_u[iu], self.spans_v[iv]
        p = self.degree
        iu_idx = np.arange(su - p, su + 1)
        iv_idx = np.arange(sv - p, sv + 1)
        return (iu_idx[None, :] + self.n_u * iv_idx[:, None]).ravel()

    def cp_grid_index(self, a):
        return a % self.n_u, a // self.n_u

    def edge_cps(self, edge):
        """Control points on a boundary edge: ``left, right, bottom, top``."""
        i = np.arange(self.n_u)
        j = np.arange(self.n_v)
        if edge == "left":
            return self.n_u * j
        if edge == "right":
            return self.n_u - 1 + self.n_u * j
        if edge == "bottom":
            return i
        if edge == "top":
            return i + self.n_u * (self.n_v - 1)
        raise ConfigError(f"unknown edge {edge!r}")

    def corner_cps(self):
        """Corner control points ordered (u0v0, u1v0, u1v1, u0v1)."""
        nu, nv = self.n_u, self.n_v
        return np.array([0, nu - 1, nu * nv - 1, nu * (nv - 1)])

    def locate(self, theta):
        """Element containing parametric point ``theta`` (closed at the end)."""
        u, v = float(theta[0]), float(theta[1])
        ku, kv = self.knots_u, self.knots_v
        if not (ku[0] - 1e-12 <= u <= ku[-1] + 1e-12 and kv[0] - 1e-12 <= v <= kv[-1] + 1e-12):
            raise DomainError(f"parametric point {theta} outside the patch")
        su = find_span(ku, self.degree, min(max(u, ku[0]), ku[-1]))
        sv = find_span(kv, self.degree, min(max(v, kv[0]), kv[-1]))
        iu = int(np.searchsorted(self.spans_u, su))
        iv = int(np.searchsorted(self.spans_v, sv))
        return iu + self.n_elem_u * iv

    def quadrature(self) -> QuadratureData:
        if "qd" not in self._cache:
            self._cache["qd"] = _build_quadrature(self)
        return self._cache["qd"]

    def evaluate(self, theta, u=None):
        """Position (and displaced position) at a parametric point."""
        elem = self.locate(theta)
        cps, N, _ = basis_eval(self, elem, theta)
        X = N @ self.control_points[cps]
        if u is None:
            return X
        U = np.asarray(u).reshape(-1, 3)
        return X, N @ U[cps]


def _spans(knots, p):
    n = len(knots) - p - 1
    return np.array([s for s in range(p, n) if knots[s + 1] > knots[s]])


def rectangle_patch(nx, ny, p, width, height, thickness, origin=(0.0, 0.0)):
    """Flat ``width x height`` patch with maximal-smoothness open knots.

    Control points sit at the Greville abscissae, so the parametrisation is
    affine and the control net spacing is uniform in the interior.
    """
    if int(nx) < 1 or int(ny) < 1:
        raise ConfigError("mesh divisions must be >= 1")
    if p not in (1, 2, 3):
        raise ConfigError(f"degree must be 1, 2 or 3, got {p}")
    ku = open_uniform_knots(nx, p)
    kv = open_uniform_knots(ny, p)
    gx = origin[0] + width * greville(ku, p)
    gy = origin[1] + height * greville(kv, p)
    X, Y = np.meshgrid(gx, gy)
    cps = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    return Patch(ku, kv, p, cps, thickness)


def _bspline_1d(knots, p, spans, pts):
    """Per span: nonzero basis values/derivatives at local Gauss points."""
    out_N, out_dN = [], []
    for s in spans:
        a, b = knots[s], knots[s + 1]
        uu = a + 0.5 * (pts + 1.0) * (b - a)
        vals, ders = zip(*(basis_funs_ders(knots, p, s, x) for x in uu))
        out_N.append(np.array(vals))
        out_dN.append(np.array(ders))
    return np.array(out_N), np.array(out_dN)  # (n_span, n_pts, p+1)


def _build_quadrature(patch: Patch) -> QuadratureData:
    p = patch.degree
    pts, wts = gauss_legendre(patch.n_gauss)
    Nu, dNu = _bspline_1d(patch.knots_u, p, patch.spans_u, pts)
    Nv, dNv = _bspline_1d(patch.knots_v, p, patch.spans_v, pts)
    neu, nev = patch.n_elem_u, patch.n_elem_v
    ng = len(pts)
    # element e = iu + neu*iv ; qp q = gu + ng*gv ; local cp l = lu + (p+1)*lv
    Nval = np.einsum("uak,vbl->vubalk", Nu, Nv)
    d1 = np.einsum("uak,vbl->vubalk", dNu, Nv)
    d2 = np.einsum("uak,vbl->vubalk", Nu, dNv)
    ne, nq, nloc = neu * nev, ng * ng, (p + 1) ** 2
    Nval = Nval.reshape(ne, nq, nloc)
    # chain rule to the global knot coordinates
    hu = np.diff(patch.knots_u)[patch.spans_u]
    hv = np.diff(patch.knots_v)[patch.spans_v]
    dN = np.stack([d1, d2], axis=-1).reshape(ne, nq, nloc, 2)
    Ju = np.repeat(hu[None, :], nev, axis=0).ravel()
    Jv = np.repeat(hv[:, None], neu, axis=1).ravel()
    conn = np.array([patch.element_cps(e) for e in range(ne)])
    Xe = patch.control_points[conn]  # (ne, nloc, 3)
    X = np.einsum("eql,elk->eqk", Nval, Xe)
    G = np.einsum("eqla,elk->eqak", dN, Xe)
    frame = LocalFrame.from_tangents(G)
    A = np.einsum("eqia,eqla->eqli", frame.T, dN)
    jac = frame.area_jacobian
    w2 = np.outer(wts, wts).ravel()  # q = gu + ng*gv -> w[gv]*w[gu]
    dA = w2[None, :] * (0.25 * Ju * Jv)[:, None] * jac
    uu = np.array([patch.knots_u[s] + 0.5 * (pts + 1) * h for s, h in zip(patch.spans_u, hu)])
    vv = np.array([patch.knots_v[s] + 0.5 * (pts + 1) * h for s, h in zip(patch.spans_v, hv)])
    theta = np.empty((nev, neu, ng, ng, 2))
    theta[..., 0] = uu[None, :, None, :]
    theta[..., 1] = vv[:, None, :, None]
    return QuadratureData(
        conn=conn,
        theta=theta.reshape(ne, nq, 2),
        N=Nval,
        dN=dN,
        X=X,
        G=G,
        T=frame.T,
        t=frame.t,
        A=A,
        jacobian=jac,
        dA=dA,
    )


def basis_eval(patch: Patch, elem, theta):
    """Nonzero basis functions of ``elem`` at ``theta``.

    Returns ``(cps, N, dN)`` with ``dN[:, a]`` the derivative along the
    parametric direction ``a``.
    """
    (u0, u1), (v0, v1) = patch.element_bounds(elem)
    u, v = float(theta[0]), float(theta[1])
    tol = 1e-12
    if not (u0 - tol <= u <= u1 + tol and v0 - tol <= v <= v1 + tol):
        raise DomainError(f"point {theta} outside element {elem}")
    iu, iv = patch.element_ij(elem)
    p = patch.degree
    Nu, dNu = basis_funs_ders(patch.knots_u, p, patch.spans_u[iu], min(max(u, u0), u1))
    Nv, dNv = basis_funs_ders(patch.knots_v, p, patch.spans_v[iv], min(max(v, v0), v1))
    N = np.outer(Nv, Nu).ravel()
    dN = np.stack([np.outer(Nv, dNu).ravel(), np.outer(dNv, Nu).ravel()], axis=-1)
    return patch.element_cps(elem), N, dN


def reference_geometry(patch: Patch, elem, theta, weight=0.0) -> QuadPointGeom:
    cps, N, dN = basis_eval(patch, elem, theta)
    G = dN.T @ patch.control_points[cps]
    frame = LocalFrame.from_tangents(G)
    return QuadPointGeom(
        theta=np.asarray(theta, dtype=float),
        weight=weight,
        cps=cps,
        N=N,
        dN=dN,
        G=G,
        Gcon=frame.contravariant,
        metric=frame.metric,
        jacobian=float(frame.area_jacobian),
        frame=frame,
    )


def _current_tangents(qp: QuadPointGeom, u):
    U = np.asarray(u, dtype=float).reshape(-1, 3)
    Ue = U if U.shape[0] == len(qp.cps) else U[qp.cps]
    return qp.G + qp.dN.T @ Ue


def green_lagrange(qp: QuadPointGeom, u):
    """Covariant components ``E_ab = (g_ab - G_ab) / 2``.

    ``u`` is either the global displacement vector or the element-local one.
    """
    g = _current_tangents(qp, u)
    return 0.5 * (g @ g.T - qp.metric)


def strain_variations(qp: QuadPointGeom, u):
    """First and second derivatives of ``E_ab`` w.r.t. the local DOFs.

    Returns ``dE`` of shape ``(2, 2, nd)`` and ``d2E`` of shape
    ``(2, 2, nd, nd)`` with ``nd = 3 * len(qp.cps)`` ordered as
    ``qp.dofs``.
    """
    g = _current_tangents(qp, u)
    nloc = len(qp.cps)
    dN = qp.dN
    # dE_ab/du_(l,i) = (N_l,b g_a,i + N_l,a g_b,i) / 2
    dE = 0.5 * (
        np.einsum("lb,ai->abli", dN, g) + np.einsum("la,bi->abli", dN, g)
    ).reshape(2, 2, 3 * nloc)
    eye3 = np.eye(3)
    d2E = 0.5 * (
        np.einsum("la,mb,ik->ablimk", dN, dN, eye3)
        + np.einsum("lb,ma,ik->ablimk", dN, dN, eye3)
    ).reshape(2, 2, 3 * nloc, 3 * nloc)
    return dE, d2E


def surface_quantities(qp: QuadPointGeom, u) -> SurfaceState:
    """Current tangents, area ratio and in-plane deformation gradient."""
    g = _current_tangents(qp, u)
    n = np.cross(g[0], g[1])
    jac = float(np.linalg.norm(n))
    if not jac > 1e-14 * max(qp.jacobian, 1e-300):
        raise GeometryError("current configuration is degenerate (zero area)")
    f = qp.frame.T @ g  # f_i = T_ia g_a = F t_i
    c1 = f[0] / np.linalg.norm(f[0])
    w = f[1] - (f[1] @ c1) * c1
    c2 = w / np.linalg.norm(w)
    c = np.stack([c1, c2])
    F_loc = c @ f.T
    return SurfaceState(
        g=g, jacobian=jac, detF=jac / qp.jacobian, f=f, c=c, F_loc=F_loc
    )
