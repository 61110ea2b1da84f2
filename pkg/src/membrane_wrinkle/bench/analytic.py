"""Tension-field reference solution for a pre-tensioned strip in bending.

A strip of height ``H`` carries an axial force ``P`` and an in-plane moment
``M``.  Once ``M / PH`` exceeds 1/6 a wrinkled band of height ``h`` forms
along the compressed edge, carries no normal stress, and the remaining
taut part takes a linear stress profile.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError

__all__ = ["analytic_band_height", "analytic_sigma_x", "reference_table"]

ONSET = 1.0 / 6.0
LIMIT = 0.5


def analytic_band_height(m_over_ph):
    """Band height ``h / H`` as a function of ``M / PH``.

    Zero below the onset value 1/6, then ``3 M/PH - 1/2``.  The closed form
    degenerates at ``M / PH = 1/2`` (the band would cover the whole strip),
    which is outside its range of validity and raises :class:`DomainError`.
    """
    r = np.asarray(m_over_ph, dtype=float)
    if np.any(r < 0.0) or np.any(~np.isfinite(r)):
        raise DomainError(f"M/PH must be finite and non-negative, got {m_over_ph}")
    if np.any(r >= LIMIT):
        raise DomainError(f"M/PH = {m_over_ph} is outside the theory (must be < 1/2)")
    h = np.where(r < ONSET, 0.0, 3.0 * r - 0.5)
    return float(h) if h.ndim == 0 else h


def analytic_sigma_x(y_over_h, h_over_h):
    """Normal stress ``sigma_x / sigma_0`` across the strip height."""
    y = np.asarray(y_over_h, dtype=float)
    h = float(h_over_h)
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise DomainError("y/H must lie in [0, 1]")
    if not 0.0 <= h < 1.0:
        raise DomainError(f"h/H must lie in [0, 1), got {h}")
    taut = y > h
    s = np.where(taut, 2.0 * (y - h) / (1.0 - h) ** 2, 0.0)
    return float(s) if s.ndim == 0 else s


def reference_table(ratio, n=11):
    """Rows ``(y/H, sigma_x/sigma_0)`` for ``2M/PH = ratio``."""
    h = analytic_band_height(0.5 * ratio)
    y = np.linspace(0.0, 1.0, n)
    return h, np.column_stack([y, analytic_sigma_x(y, h)])
