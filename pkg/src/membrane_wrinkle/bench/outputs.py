"""Plain-text result files: probes, quadrature fields, VTK mesh and trace.

Numbers are written with a fixed format so that identical runs give
byte-identical files.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from ..errors import MembraneError
from .benchmarks import RunReport
from .post import displacement_at

__all__ = ["write_outputs", "write_probes", "write_fields", "write_trace", "write_vtk", "FIELD_COLUMNS"]

_FMT = "{:.12e}"

FIELD_COLUMNS = (
    "element,qp,X,Y,Z,x,y,z,E11,E22,E12,e1,e2,n1x,n1y,state,intensity,"
    "S11,S22,S12,sigma_xx,sigma_yy,sigma_zz,sigma_xy,sigma_yz,sigma_xz,sigma1,sigma2,weight"
)


class OutputError(MembraneError, OSError):
    pass


def _num(v):
    v = float(v)
    if v == 0.0:
        v = 0.0  # drop the sign of negative zero
    return _FMT.format(v)


def _open(path):
    try:
        return open(path, "w", newline="\n", encoding="ascii")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc


def write_probes(report: RunReport, path):
    with _open(path) as fh:
        fh.write("name,x,y,z,value,unit\n")
        for p in report.probes:
            x, y, z = p.position
            fh.write(f"{p.name},{_num(x)},{_num(y)},{_num(z)},{_num(p.value)},{p.unit}\n")


def write_fields(report: RunReport, path):
    r = report.fields
    with _open(path) as fh:
        fh.write(FIELD_COLUMNS + "\n")
        for k in range(len(r)):
            s = r.sigma[k]
            vals = [
                *r.X[k], *r.x[k],
                r.E[k, 0, 0], r.E[k, 1, 1], r.E[k, 0, 1],
                r.e1[k], r.e2[k], *r.n1[k],
            ]
            tail = [
                r.intensity[k], r.S[k, 0, 0], r.S[k, 1, 1], r.S[k, 0, 1],
                s[0, 0], s[1, 1], s[2, 2], s[0, 1], s[1, 2], s[0, 2],
                r.sigma1[k], r.sigma2[k], r.weight[k],
            ]
            row = [str(int(r.element[k])), str(int(r.qp[k]))]
            row += [_num(v) for v in vals] + [str(int(r.state[k]))] + [_num(v) for v in tail]
            fh.write(",".join(row) + "\n")


def write_trace(report: RunReport, path):
    with _open(path) as fh:
        fh.write("step,iteration,residual\n")
        for step, it, res in report.trace.rows():
            fh.write(f"{step},{it},{_num(res)}\n")


def _cell_values(report):
    """Element averages (quadrature weighted) and majority state codes."""
    r = report.fields
    ne = report.model.patch.n_elem
    w = np.bincount(r.element, weights=r.weight, minlength=ne)
    w = np.where(w > 0, w, 1.0)
    avg = lambda v: np.bincount(r.element, weights=r.weight * v, minlength=ne) / w  # noqa: E731
    counts = np.zeros((ne, 3), dtype=int)
    np.add.at(counts, (r.element, r.state.astype(int)), 1)
    return avg(r.sigma1), avg(r.sigma2), counts.argmax(axis=1), avg(r.intensity)


def write_vtk(report: RunReport, path):
    """Legacy VTK unstructured grid over the knot-line grid of the patch."""
    patch = report.model.patch
    ku = np.unique(patch.knots_u)
    kv = np.unique(patch.knots_v)
    th = np.array([(a, b) for b in kv for a in ku])
    X = np.array([patch.evaluate(t) for t in th]) if len(th) else np.zeros((0, 3))
    U = displacement_at(patch, report.u, th)
    nu_, nv_ = len(ku), len(kv)
    cells = []
    for j in range(nv_ - 1):
        for i in range(nu_ - 1):
            a = i + nu_ * j
            cells.append((a, a + 1, a + 1 + nu_, a + nu_))
    nc = len(cells)
    with _open(path) as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{report.spec.benchmark} {report.spec.mesh[0]}x{report.spec.mesh[1]} p={report.spec.degree}\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {len(X)} double\n")
        for p in X:
            fh.write(" ".join(_num(v) for v in p) + "\n")
        fh.write(f"CELLS {nc} {5 * nc}\n")
        for c in cells:
            fh.write("4 " + " ".join(map(str, c)) + "\n")
        fh.write(f"CELL_TYPES {nc}\n")
        fh.write("9\n" * nc)
        fh.write(f"POINT_DATA {len(X)}\nVECTORS displacement double\n")
        for d in U:
            fh.write(" ".join(_num(v) for v in d) + "\n")
        if len(report.fields):
            s1, s2, state, inten = _cell_values(report)
        else:
            s1 = s2 = inten = np.zeros(nc)
            state = np.zeros(nc, dtype=int)
        fh.write(f"CELL_DATA {nc}\n")
        for name, vals in (("sigma1", s1), ("sigma2", s2)):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write("".join(_num(v) + "\n" for v in vals))
        fh.write("SCALARS state int 1\nLOOKUP_TABLE default\n")
        fh.write("".join(f"{int(v)}\n" for v in state))
        fh.write("SCALARS intensity double 1\nLOOKUP_TABLE default\n")
        fh.write("".join(_num(v) + "\n" for v in inten))


def write_outputs(report: RunReport, directory):
    """Write ``probes.csv``, ``fields.csv``, ``solution.vtk`` and ``trace.csv``."""
    d = Path(directory)
    try:
        os.makedirs(d, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {d}: {exc}") from exc
    paths = {
        "probes": d / "probes.csv",
        "fields": d / "fields.csv",
        "vtk": d / "solution.vtk",
        "trace": d / "trace.csv",
    }
    write_probes(report, paths["probes"])
    write_fields(report, paths["fields"])
    write_vtk(report, paths["vtk"])
    write_trace(report, paths["trace"])
    return paths
