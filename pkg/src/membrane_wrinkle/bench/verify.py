"""Self-contained property checks run by ``membrane-wrinkle verify``."""

from __future__ import annotations

import numpy as np

from ..assembly import LoadCase, Model, assemble_internal, point_load_vector
from ..kinematics import rectangle_patch
from ..material import ElasticParams, energy_split, evaluate, standard_svk, stress_split, tangent_split
from ..solver import SolverConfig, newton_step_solve
from ..tensor_spectral import spectral_decompose, sym2
from .analytic import analytic_band_height, analytic_sigma_x
from .checks import Check

__all__ = [
    "random_strains",
    "material_fd_errors",
    "split_completeness_errors",
    "uniaxial_bar_check",
    "directional_tangent_error",
    "smooth_random_displacement",
    "run_verify",
]


def random_strains(n, rng, bound=0.1, gap=1e-6):
    """Random symmetric strains, rejecting near-coincident eigenvalues and
    near-zero traces (where the split is not differentiable)."""
    out = []
    while len(out) < n:
        a, b, c = rng.uniform(-bound, bound, 3)
        E = sym2(a, b, c)
        sp = spectral_decompose(E)
        if sp.e1 - sp.e2 < gap or abs(a + b) < gap:
            continue
        if min(abs(sp.e1), abs(sp.e2)) < gap:
            continue
        out.append(E)
    return np.array(out)


def material_fd_errors(Es, p: ElasticParams, h=1e-7):
    """Worst relative mismatch of ``dpsi/dE`` vs ``S`` and ``dS/dE`` vs ``C``.

    Central differences perturb ``E_11``, ``E_22`` and the symmetric pair
    ``(E_12, E_21)``; the shear derivative is halved accordingly.
    """
    pairs = (((0, 0),), ((1, 1),), ((0, 1), (1, 0)))
    err_s = err_c = 0.0
    for E in Es:
        Sp, Sm = stress_split(E, p)
        Cp, Cm = tangent_split(E, p)
        for (S_ref, C_ref, which) in ((Sp, Cp, 0), (Sm, Cm, 1)):
            gS = np.zeros((2, 2))
            gC = np.zeros((2, 2, 2, 2))
            for idx in pairs:
                d = np.zeros((2, 2))
                for ij in idx:
                    d[ij] = h
                psi_hi = energy_split(E + d, p)[which]
                psi_lo = energy_split(E - d, p)[which]
                S_hi = stress_split(E + d, p)[which]
                S_lo = stress_split(E - d, p)[which]
                scale = 1.0 / (2.0 * h * len(idx))
                for ij in idx:
                    gS[ij] = (psi_hi - psi_lo) * scale
                    gC[..., ij[0], ij[1]] = (S_hi - S_lo) * scale
            # tangent inputs are symmetric: compare symmetrised minor pair
            C_sym = 0.5 * (C_ref + C_ref.transpose(0, 1, 3, 2))
            nS = max(np.abs(S_ref).max(), 1e-30)
            nC = max(np.abs(C_sym).max(), 1e-30)
            if np.abs(S_ref).max() > 0:
                err_s = max(err_s, np.abs(gS - S_ref).max() / nS)
            if np.abs(C_sym).max() > 0:
                err_c = max(err_c, np.abs(gC - C_sym).max() / nC)
    return err_s, err_c


def split_completeness_errors(Es, p: ElasticParams):
    """Relative deviation of the recombined split from plain SVK."""
    psi_ref, S_ref, C_ref = standard_svk(Es, p)
    pp, pm = energy_split(Es, p)
    Sp, Sm = stress_split(Es, p)
    Cp, Cm = tangent_split(Es, p)
    rel = lambda a, b: np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)  # noqa: E731
    e_psi, e_S, e_C = rel(pp + pm, psi_ref), rel(Sp + Sm, S_ref), rel(Cp + Cm, C_ref)
    one = evaluate(Es, p.with_eta(1.0))
    e_eta = max(rel(one.psi, psi_ref), rel(one.S, S_ref), rel(one.C, C_ref))
    return e_psi, e_S, e_C, e_eta


def _bisect(f, lo, hi, tol=1e-15, max_iter=200):
    flo = f(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


def uniaxial_bar_check(force=50.0, E_mod=1000.0, length=2.0, height=0.5, thickness=0.1):
    """One bilinear element stretched by a dead end load, nu = 0.

    Returns ``(u_fe, u_oracle)``; the oracle solves
    ``t E (lam^2 - 1) / 2 * lam * height = force`` for the stretch by
    bisection, independent of the finite element path.
    """
    patch = rectangle_patch(1, 1, 1, length, height, thickness)
    model = Model(patch, ElasticParams(E_mod, 0.0, 0.0))
    X = patch.control_points
    for a in range(patch.n_cp):
        model.fix([3 * a + 1, 3 * a + 2])
        if X[a, 0] == 0.0:
            model.fix(3 * a)
    F = np.zeros(patch.n_dof)
    for a in patch.edge_cps("right"):
        F += point_load_vector(patch, a, [0.5 * force, 0.0, 0.0])
    model.loads = [LoadCase("end", F)]
    tr = newton_step_solve(model, SolverConfig(n_steps=1, tol_rel=1e-14, max_iter=50))
    right = patch.edge_cps("right")
    u_fe = float(tr.u[3 * right[0]])

    def residual(lam):
        return thickness * E_mod * 0.5 * (lam**2 - 1.0) * lam * height - force

    lam = _bisect(residual, 1.0, 10.0)
    return u_fe, (lam - 1.0) * length


def smooth_random_displacement(patch, rng, amplitude, in_plane_only=False):
    """Low-order random displacement field evaluated at the control points."""
    X = patch.control_points
    span = np.ptp(X[:, :2], axis=0)
    xi = (X[:, :2] - X[:, :2].min(axis=0)) / span
    U = np.zeros_like(X)
    for k in range(3):
        coef = rng.normal(size=(3, 3))
        for i in range(3):
            for j in range(3):
                U[:, k] += coef[i, j] * np.sin((i + 1) * np.pi * xi[:, 0] / 2 + j) * np.cos(
                    (j + 1) * np.pi * xi[:, 1] / 2 + i
                )
    if in_plane_only:
        U[:, 2] = 0.0
    U *= amplitude * span.max() / np.abs(U).max()
    return U.ravel()


def directional_tangent_error(model, u, rng, n_dirs=3, h=None):
    """Worst ``|K v - (F(u + h v) - F(u - h v)) / 2h| / |FD|`` over random
    directions ``v`` (central differences)."""
    F0, K = assemble_internal(model, u)
    worst = 0.0
    for _ in range(n_dirs):
        v = rng.normal(size=model.n_dof)
        v /= np.linalg.norm(v)
        step = h if h is not None else 1e-6 * max(np.abs(u).max(), 1e-3)
        Fp, _ = assemble_internal(model, u + step * v, tangent=False)
        Fm, _ = assemble_internal(model, u - step * v, tangent=False)
        fd = (Fp - Fm) / (2.0 * step)
        worst = max(worst, np.linalg.norm(K @ v - fd) / max(np.linalg.norm(fd), 1e-300))
    return worst


def run_verify(seed=0, n_material=300):
    """Run the property suite; returns the list of :class:`Check` results."""
    rng = np.random.default_rng(seed)
    out = []
    p = ElasticParams(1.0, 0.3)
    Es = random_strains(n_material, rng)
    es, ec = material_fd_errors(Es, p)
    out.append(Check("energy gradient = stress", es <= 1e-5, f"max rel {es:.2e} (tol 1e-5)"))
    out.append(Check("stress gradient = tangent", ec <= 1e-4, f"max rel {ec:.2e} (tol 1e-4)"))
    e_psi, e_S, e_C, e_eta = split_completeness_errors(Es, p)
    worst = max(e_psi, e_S, e_C)
    out.append(Check("split completeness", worst <= 1e-10, f"max rel {worst:.2e} (tol 1e-10)"))
    out.append(Check("eta = 1 is plain SVK", e_eta <= 1e-12, f"max rel {e_eta:.2e} (tol 1e-12)"))

    u_fe, u_ref = uniaxial_bar_check()
    d = abs(u_fe - u_ref)
    out.append(Check("one-element bisection oracle", d <= 1e-10, f"|du| = {d:.2e} (tol 1e-10)"))

    patch = rectangle_patch(4, 3, 2, 1.0, 0.8, 0.01)
    model = Model(patch, ElasticParams(100.0, 0.25, 1e-3))
    u = smooth_random_displacement(patch, rng, 0.05)
    e = directional_tangent_error(model, u, rng)
    out.append(Check("tangent = finite-difference residual", e <= 1e-4, f"max rel {e:.2e} (tol 1e-4)"))

    gap = 0.0
    for r in (1.0 / 6.0,):
        gap = max(gap, abs(analytic_band_height(r) - analytic_band_height(np.nextafter(r, 0.0))))
    h = analytic_band_height(0.3)
    gap = max(gap, abs(analytic_sigma_x(np.nextafter(h, 1.0), h)))
    out.append(Check("analytic profile continuity", gap <= 1e-14, f"max jump {gap:.1e}"))
    return out
