"""Wrinkling membrane material: tension/compression split of the
St. Venant-Kirchhoff plane-stress energy.

The Green-Lagrange strain is decomposed spectrally into ``E+`` and ``E-``;
the energy, the PK2 stress and the consistent tangent split accordingly and
are recombined as ``X = X+ + eta * X-``.  With ``eta = 0`` the membrane has no
compressive stiffness; a small positive ``eta`` leaves a residual one.

All inputs are local orthonormal-frame components, per unit reference volume.
Functions broadcast over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import ConfigError
from .tensor_spectral import (
    Spectral2,
    build_G,
    build_J,
    build_Q,
    macaulay,
    spectral_decompose,
    split_tensor,
    sym_identity,
)

__all__ = [
    "ElasticParams",
    "WrinkleState",
    "MaterialPointResult",
    "heaviside_plus",
    "heaviside_minus",
    "energy_split",
    "stress_split",
    "tangent_split",
    "evaluate",
    "classify",
    "wrinkle_intensity",
    "standard_svk",
    "svk_tangent",
    "COINCIDENCE_TOL",
]

COINCIDENCE_TOL = 1e-9

_J = build_J()
_ISYM = sym_identity()
_EYE2 = np.eye(2)


@dataclass(frozen=True)
class ElasticParams:
    """Isotropic linear-elastic constants plus the degradation factor."""

    E_mod: float
    nu: float
    eta: float = 0.0

    def __post_init__(self):
        if not self.E_mod > 0:
            raise ConfigError(f"Young's modulus must be positive, got {self.E_mod}")
        if not -1.0 < self.nu < 0.5:
            raise ConfigError(f"Poisson's ratio must lie in (-1, 0.5), got {self.nu}")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError(f"eta must lie in [0, 1], got {self.eta}")

    @property
    def mu(self):
        return self.E_mod / (2.0 * (1.0 + self.nu))

    @property
    def lam(self):
        return self.E_mod * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))

    @property
    def lambda_ps(self):
        """Plane-stress reduced modulus ``lam - lam**2 / (lam + 2 mu)``."""
        lam, mu = self.lam, self.mu
        return 2.0 * lam * mu / (lam + 2.0 * mu)

    def with_eta(self, eta):
        return ElasticParams(self.E_mod, self.nu, eta)


class WrinkleState(IntEnum):
    TAUT = 0
    WRINKLED = 1
    SLACK = 2


def heaviside_plus(x):
    # zero belongs to the tensile branch so that H+ + H- == 1 everywhere
    return (np.asarray(x) >= 0.0).astype(float)


def heaviside_minus(x):
    return (np.asarray(x) < 0.0).astype(float)


def _trace(E):
    return E[..., 0, 0] + E[..., 1, 1]


def _energy(lambda_ps, mu, tr, Ed):
    return 0.5 * lambda_ps * tr**2 + mu * np.einsum("...ij,...ij->...", Ed, Ed)


def _stress(lambda_ps, mu, tr, Ed):
    return lambda_ps * tr[..., None, None] * _EYE2 + 2.0 * mu * Ed


def _projection(sp: Spectral2, H, bracket, tol=COINCIDENCE_TOL):
    """Derivative of ``E+`` (or ``E-``) with respect to ``E``."""
    e1, e2 = sp.e1, sp.e2
    Q1 = build_Q(sp.n1)
    Q2 = build_Q(sp.n2)
    M1, M2 = sp.M1, sp.M2
    Gsum = build_G(M1, M2) + build_G(M2, M1)
    gap = e1 - e2
    scale = np.maximum(1.0, np.maximum(np.abs(e1), np.abs(e2)))
    coincident = gap <= tol * scale
    b1, b2 = bracket(e1), bracket(e2)
    safe_gap = np.where(coincident, 1.0, gap)
    coef = (b1 - b2) / (2.0 * safe_gap)
    distinct = (
        H(e1)[..., None, None, None, None] * Q1
        + H(e2)[..., None, None, None, None] * Q2
        + coef[..., None, None, None, None] * Gsum
    )
    # limit of the distinct-root formula: H(e) * I_sym, basis independent
    limit = H(0.5 * (e1 + e2))[..., None, None, None, None] * _ISYM
    return np.where(coincident[..., None, None, None, None], limit, distinct)


def _pos(x):
    return macaulay(x)[0]


def _neg(x):
    return macaulay(x)[1]


def energy_split(E_loc, p: ElasticParams, sp: Spectral2 | None = None):
    """Tensile and compressive strain energy densities ``(psi+, psi-)``."""
    E_loc = np.asarray(E_loc, dtype=float)
    sp = spectral_decompose(E_loc) if sp is None else sp
    Ep, Em = split_tensor(sp)
    trp, trm = macaulay(_trace(E_loc))
    return _energy(p.lambda_ps, p.mu, trp, Ep), _energy(p.lambda_ps, p.mu, trm, Em)


def stress_split(E_loc, p: ElasticParams, sp: Spectral2 | None = None):
    """``(S+, S-)`` obtained as the strain gradients of ``psi+`` and ``psi-``."""
    E_loc = np.asarray(E_loc, dtype=float)
    sp = spectral_decompose(E_loc) if sp is None else sp
    Ep, Em = split_tensor(sp)
    trp, trm = macaulay(_trace(E_loc))
    return _stress(p.lambda_ps, p.mu, trp, Ep), _stress(p.lambda_ps, p.mu, trm, Em)


def tangent_split(
    E_loc, p: ElasticParams, sp: Spectral2 | None = None, coincidence_tol=COINCIDENCE_TOL
):
    """Consistent tangents ``(C+, C-)`` of the split stresses.

    When ``|e1 - e2| <= coincidence_tol * max(1, |e1|, |e2|)`` the
    eigenbasis-rate term is replaced by its limit, which makes the projection
    ``H(e) I_sym`` independent of the (arbitrary) eigenvectors.
    """
    E_loc = np.asarray(E_loc, dtype=float)
    sp = spectral_decompose(E_loc) if sp is None else sp
    tr = _trace(E_loc)
    Cp = p.lambda_ps * heaviside_plus(tr)[..., None, None, None, None] * _J + (
        2.0 * p.mu * _projection(sp, heaviside_plus, _pos, coincidence_tol)
    )
    Cm = p.lambda_ps * heaviside_minus(tr)[..., None, None, None, None] * _J + (
        2.0 * p.mu * _projection(sp, heaviside_minus, _neg, coincidence_tol)
    )
    return Cp, Cm


def classify(sp: Spectral2):
    """Membrane state from the ordered principal strains.

    ``e2 > 0`` taut, ``e1 > 0 >= e2`` wrinkled, ``e1 <= 0`` slack.  Scalar
    input returns a :class:`WrinkleState`, array input an integer array of
    state codes.
    """
    e1 = np.asarray(sp.e1)
    e2 = np.asarray(sp.e2)
    state = np.where(
        e2 > 0.0,
        WrinkleState.TAUT,
        np.where(e1 > 0.0, WrinkleState.WRINKLED, WrinkleState.SLACK),
    ).astype(np.int8)
    if state.ndim == 0:
        return WrinkleState(int(state))
    return state


def wrinkle_intensity(sp: Spectral2):
    """``|<e2>-| * |n1|`` in the wrinkled state, zero otherwise.

    The eigenvectors are unit vectors, so this is ``|e2|`` where wrinkled.
    """
    state = np.asarray(classify(sp))
    norm_n1 = np.linalg.norm(sp.n1, axis=-1)
    value = np.abs(_neg(sp.e2)) * norm_n1
    out = np.where(state == WrinkleState.WRINKLED, value, 0.0)
    return out if out.ndim else float(out)


def svk_tangent(p: ElasticParams):
    """Isotropic plane-stress tangent ``lambda_ps J + 2 mu I_sym``."""
    return p.lambda_ps * _J + 2.0 * p.mu * _ISYM


def standard_svk(E_loc, p: ElasticParams):
    """Undecomposed St. Venant-Kirchhoff plane-stress ``(psi, S, C)``."""
    E_loc = np.asarray(E_loc, dtype=float)
    tr = _trace(E_loc)
    psi = _energy(p.lambda_ps, p.mu, tr, E_loc)
    S = _stress(p.lambda_ps, p.mu, tr, E_loc)
    C = np.broadcast_to(svk_tangent(p), E_loc.shape[:-2] + (2, 2, 2, 2)).copy()
    return psi, S, C


@dataclass
class MaterialPointResult:
    """Material response at one or many points (arrays share leading axes)."""

    psi_plus: np.ndarray
    psi_minus: np.ndarray
    S: np.ndarray
    C: np.ndarray | None
    state: np.ndarray
    wrinkle_dir: np.ndarray
    intensity: np.ndarray
    spectral: Spectral2
    eta: float = 0.0

    @property
    def psi(self):
        return self.psi_plus + self.eta * self.psi_minus


def evaluate(
    E_loc, p: ElasticParams, tangent=True, coincidence_tol=COINCIDENCE_TOL
) -> MaterialPointResult:
    """Degraded response ``psi+ + eta psi-``, ``S+ + eta S-``, ``C+ + eta C-``.

    State, wrinkling direction and intensity come from the same spectral
    decomposition used for the split.
    """
    E_loc = np.asarray(E_loc, dtype=float)
    sp = spectral_decompose(E_loc)
    psi_p, psi_m = energy_split(E_loc, p, sp)
    Sp, Sm = stress_split(E_loc, p, sp)
    S = Sp + p.eta * Sm
    C = None
    if tangent:
        Cp, Cm = tangent_split(E_loc, p, sp, coincidence_tol)
        C = Cp + p.eta * Cm
    return MaterialPointResult(
        psi_plus=psi_p,
        psi_minus=psi_m,
        S=S,
        C=C,
        state=classify(sp),
        wrinkle_dir=sp.n1,
        intensity=wrinkle_intensity(sp),
        spectral=sp,
        eta=p.eta,
    )
