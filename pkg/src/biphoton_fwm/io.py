"""CSV emission and reading.

Schemas (one header row, floats written with 17 significant digits, rows
ordered by ``(t, cell)`` or ``(l, lprime)``):

* diagonal series: ``t, cell, re_psi_omega, im_psi_omega, re_psi_e, im_psi_e``
* intensity series: ``t, cell, I_omega1, I_omega2, I_e1, I_e2``
* 2D grid: ``l, lprime, re_psi_omega, im_psi_omega, re_psi_e, im_psi_e``
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .lattice import Lattice, TwoPhotonState
from .observables import intensities

DIAGONAL_HEADER = ["t", "cell", "re_psi_omega", "im_psi_omega", "re_psi_e", "im_psi_e"]
INTENSITY_HEADER = ["t", "cell", "I_omega1", "I_omega2", "I_e1", "I_e2"]
GRID_HEADER = ["l", "lprime", "re_psi_omega", "im_psi_omega", "re_psi_e", "im_psi_e"]


def fmt(x) -> str:
    return "%.17g" % float(x)


def _open(path):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _sorted(states):
    return sorted(states, key=lambda s: s.t)


def write_diagonal_series(states, path):
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DIAGONAL_HEADER)
        for s in _sorted(states):
            do, de = np.diagonal(s.psi_omega), np.diagonal(s.psi_e)
            for l in range(s.lattice.M):
                w.writerow([fmt(s.t), l, fmt(do[l].real), fmt(do[l].imag), fmt(de[l].real), fmt(de[l].imag)])


def write_intensity_series(states, path):
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INTENSITY_HEADER)
        for s in _sorted(states):
            rows = intensities(s).as_rows()
            for l, r in enumerate(rows):
                w.writerow([fmt(s.t), l, *map(fmt, r)])


def write_grid(state: TwoPhotonState, path):
    po, pe = state.psi_omega, state.psi_e
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GRID_HEADER)
        M = state.lattice.M
        for l in range(M):
            for lp in range(M):
                a, b = po[l, lp], pe[l, lp]
                w.writerow([l, lp, fmt(a.real), fmt(a.imag), fmt(b.real), fmt(b.imag)])


def read_grid(path, lattice: Lattice, t: float = 0.0) -> TwoPhotonState:
    M = lattice.M
    po = np.zeros((M, M), complex)
    pe = np.zeros((M, M), complex)
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != GRID_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        for row in r:
            l, lp = int(row[0]), int(row[1])
            po[l, lp] = complex(float(row[2]), float(row[3]))
            pe[l, lp] = complex(float(row[4]), float(row[5]))
    return TwoPhotonState(lattice, po, pe, t)


def read_table(path):
    """Header and float rows of any emitted CSV."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(x) for x in row] for row in r]
    return header, np.array(rows).reshape(-1, len(header))


def write_rows(path, header, rows):
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([x if isinstance(x, (int, str)) else fmt(x) for x in row])


GNUPLOT_TEMPLATE = """\
# gnuplot script generated alongside {stem} data files
set datafile separator ","
set key autotitle columnhead
set terminal pngcairo size 900,600
set output "{stem}_diagonal.png"
set xlabel "cell"
set ylabel "t"
set pm3d map
splot "{stem}_diagonal.csv" using 2:1:(sqrt($3**2+$4**2)) with pm3d title "|psi_omega(l,l,t)|"
set output "{stem}_generated.png"
splot "{stem}_diagonal.csv" using 2:1:(sqrt($5**2+$6**2)) with pm3d title "|psi_e(l,l,t)|"
"""

GRID_GNUPLOT_TEMPLATE = """\
set output "{stem}_grid.png"
set xlabel "l"
set ylabel "l'"
splot "{stem}_grid.csv" using 1:2:3 with pm3d title "Re psi_omega(l,l')"
"""


def write_plot_script(path, stem: str, with_grid: bool = False):
    text = GNUPLOT_TEMPLATE.format(stem=stem)
    if with_grid:
        text += GRID_GNUPLOT_TEMPLATE.format(stem=stem)
    with _open(path) as fh:
        fh.write(text)
