"""Quantitative checks of benchmark runs against reference behaviour."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .analytic import analytic_band_height, analytic_sigma_x
from .benchmarks import RunReport
from .reference_data import AIRBAG_ETA_1E4, AIRBAG_MESH_STUDY, BLANKET

__all__ = [
    "Check",
    "profile_error",
    "band_intensity_ratio",
    "quarter_turn_asymmetry",
    "check_report",
    "PROFILE_TOL",
]

PROFILE_TOL = 0.05


@dataclass(frozen=True)
class Check:
    label: str
    passed: bool
    detail: str

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.label}: {self.detail}"


def profile_error(report: RunReport):
    """Max ``|sigma_x/sigma_0 - analytic|`` over the sampled profile.

    Raises :class:`DomainError` when the bending ratio lies outside the
    range of the closed-form solution.
    """
    h = analytic_band_height(0.5 * report.spec.loads["ratio"])
    y = np.clip(report.extra["y_over_H"], 0.0, 1.0)
    ref = analytic_sigma_x(y, h)
    return float(np.max(np.abs(report.extra["sigma_x_over_sigma0"] - ref))), h


def band_intensity_ratio(report: RunReport, width_fraction=0.2):
    """Mean wrinkle intensity inside the band around the diagonal carrying
    the larger corner forces, divided by the mean outside it."""
    rec = report.fields
    L = report.spec.geometry["length"]
    X = rec.X[:, :2]
    # larger pair acts along the (1, 1) diagonal
    d = np.abs(X[:, 0] - X[:, 1]) / np.sqrt(2.0)
    inside = d <= 0.5 * width_fraction * L
    mean_in = float(np.mean(rec.intensity[inside]))
    mean_out = float(np.mean(rec.intensity[~inside]))
    return mean_in / mean_out if mean_out > 0 else np.inf, mean_in, mean_out


def _grid(rec, values):
    X = np.round(rec.X[:, :2], 12)
    xs = np.unique(X[:, 0])
    ys = np.unique(X[:, 1])
    if len(xs) * len(ys) != len(rec):
        raise DomainError("quadrature points do not form a tensor grid")
    g = np.full((len(ys), len(xs)), np.nan)
    g[np.searchsorted(ys, X[:, 1]), np.searchsorted(xs, X[:, 0])] = values
    return g


def quarter_turn_asymmetry(report: RunReport):
    """Max difference between the intensity field and its 90 degree rotation."""
    g = _grid(report.fields, report.fields.intensity)
    if g.shape[0] != g.shape[1]:
        raise DomainError("quarter-turn symmetry needs a square grid")
    return float(np.max(np.abs(g - np.rot90(g))))


def _rel(value, ref):
    return abs(value - ref) / abs(ref)


def _probe_checks(report, ref, tols):
    out = []
    for name, tol in tols.items():
        v = report.probe(name).value
        err = _rel(v, ref[name])
        out.append(Check(name, err <= tol, f"{v:.5g} vs {ref[name]:.5g} (rel {err:.2%}, tol {tol:.0%})"))
    return out


def check_report(report: RunReport):
    """Checks applicable to this run; an empty list when no reference applies."""
    spec = report.spec
    checks = [Check("converged", bool(report.trace.converged), f"{len(report.trace.steps)} steps")]
    b = spec.benchmark
    if b == "pure-bending":
        try:
            err, h = profile_error(report)
        except DomainError as exc:
            checks.append(Check("sigma_x profile", False, str(exc)))
        else:
            checks.append(Check("sigma_x profile", err <= PROFILE_TOL, f"max error {err:.4f} (tol {PROFILE_TOL})"))
            hb = report.extra["band_height"]
            dh = report.extra["element_height"]
            checks.append(Check("band height", abs(hb - h) <= dh, f"{hb:.3f} vs {h:.3f} (tol {dh:.3f})"))
    elif b == "airbag" and spec.degree == 2:
        n = spec.mesh[0]
        if spec.params.eta == 0.0 and n in AIRBAG_MESH_STUDY and spec.mesh[1] == n:
            checks += _probe_checks(report, AIRBAG_MESH_STUDY[n], {"uz_M": 0.02})
        elif spec.params.eta == 1e-4 and spec.mesh == (16, 16):
            checks += _probe_checks(
                report, AIRBAG_ETA_1E4[2], {"uz_M": 0.02, "uy_B": 0.05, "sigma1_M": 0.10}
            )
    elif b == "blanket" and spec.degree == 2 and spec.mesh == (25, 25):
        nu = spec.params.nu
        if nu == 0.0:
            checks += _probe_checks(report, BLANKET[0.0], {"uz_M": 0.01, "ux_A": 0.03})
        elif nu == 0.3:
            checks += _probe_checks(report, BLANKET[0.3], {"uz_M": 0.02})
    elif b == "corner-load":
        T1, T2 = spec.loads["T1"], spec.loads["T2"]
        if T1 == T2:
            asym = quarter_turn_asymmetry(report)
            checks.append(Check("quarter-turn symmetry", asym <= 1e-6, f"max deviation {asym:.2e}"))
        elif T1 > T2:
            ratio, _, _ = band_intensity_ratio(report)
            checks.append(Check("diagonal band intensity", ratio >= 2.0, f"inside/outside {ratio:.2f}"))
    return checks
