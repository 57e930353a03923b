"""Masked uniform Cartesian grid over the scaffold disk.

Cells are squares of side dx; a cell belongs to the domain when its
center lies inside the disk. The disk grid is built symmetric about the
center with an odd cell count per axis, so one cell center coincides
exactly with the domain midpoint (where the probe sits).

The grid precomputes, for every face between two interior cells, sparse
difference operators:

  Gn  face-normal gradient, (c_Q - c_P)/dx
  Gt  face-tangential gradient, a centered four-point average that falls
      back to a one-sided two-point form (or zero) where the stencil
      would leave the mask
  Inc incidence map from face values to cell divergences with entries
      +-1/dx^2; columns sum to zero, so any flux assembled through these
      operators is discretely conservative no matter how the face values
      were formed.

Cross-derivative (anisotropic) terms and the taxis drift both build on
these tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass
class FaceTable:
    """Faces of one orientation between pairs of interior cells."""

    p: np.ndarray        # linear index of the lower cell
    q: np.ndarray        # linear index of the upper cell (p + step)
    Gn: sp.csr_matrix    # (n_faces, n_cells) normal difference
    Gt: sp.csr_matrix    # (n_faces, n_cells) tangential difference
    Inc: sp.csr_matrix   # (n_cells, n_faces) divergence incidence

    @property
    def count(self) -> int:
        return self.p.size


class ScaffoldGrid:
    """Uniform grid restricted to a mask of interior cells.

    value arrays are kept as flat vectors over interior cells in C order
    of (i, j) = (x index, y index); ``to_grid``/``from_grid`` convert to
    dense (nx, ny) arrays with NaN outside.
    """

    def __init__(self, mask: np.ndarray, dx: float, x0: float = 0.0, y0: float = 0.0):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 2 or not mask.any():
            raise ValueError("mask must be a non-empty 2D boolean array")
        if not dx > 0.0:
            raise ValueError("dx must be > 0")
        self.mask = mask
        self.dx = float(dx)
        self.x0 = float(x0)   # center coordinate of cell (0, j)
        self.y0 = float(y0)   # center coordinate of cell (i, 0)
        self.nx, self.ny = mask.shape

        self.index = -np.ones(mask.shape, dtype=np.int64)
        self.index[mask] = np.arange(mask.sum())
        self.n_cells = int(mask.sum())
        ii, jj = np.nonzero(mask)
        self.cell_i = ii
        self.cell_j = jj
        self.cell_x = self.x0 + ii * self.dx
        self.cell_y = self.y0 + jj * self.dx

        self._check_connectivity()
        self.faces_x = self._build_faces(axis=0)
        self.faces_y = self._build_faces(axis=1)

    # -- construction -----------------------------------------------------

    @classmethod
    def disk(cls, center=(2500.0, 2500.0), radius: float = 2500.0,
             dx: float = 50.0) -> "ScaffoldGrid":
        """Grid over a disk, symmetric about the center (odd cell count)."""
        if not radius > 0.0:
            raise ValueError("radius must be > 0")
        cx, cy = float(center[0]), float(center[1])
        m = math.ceil(radius / dx - 0.5 - 1e-12)
        n = 2 * m + 1
        k = np.arange(n) - m
        x = cx + k * dx
        y = cy + k * dx
        X, Y = np.meshgrid(x, y, indexing="ij")
        mask = (X - cx) ** 2 + (Y - cy) ** 2 <= radius ** 2
        return cls(mask, dx, x0=float(x[0]), y0=float(y[0]))

    def _check_connectivity(self):
        m = self.mask
        has_nb = np.zeros_like(m)
        has_nb[:-1, :] |= m[1:, :]
        has_nb[1:, :] |= m[:-1, :]
        has_nb[:, :-1] |= m[:, 1:]
        has_nb[:, 1:] |= m[:, :-1]
        if np.any(m & ~has_nb):
            raise ValueError("mask contains isolated cells (no interior neighbor)")

    def _build_faces(self, axis: int) -> FaceTable:
        """Enumerate faces along one axis and assemble the difference operators.

        The tangential gradient at a face between P and Q averages the
        one-cell-offset differences on both sides; near the mask boundary
        it degrades to the available side or to zero. Every row of Gt has
        weights summing to zero, so constant fields produce no flux.
        """
        m = self.mask
        idx = self.index
        dx = self.dx
        if axis == 0:
            pair = m[:-1, :] & m[1:, :]
            pi, pj = np.nonzero(pair)
            qi, qj = pi + 1, pj
            t_off = (0, 1)   # tangential direction is y
        else:
            pair = m[:, :-1] & m[:, 1:]
            pi, pj = np.nonzero(pair)
            qi, qj = pi, pj + 1
            t_off = (1, 0)   # tangential direction is x

        p_lin = idx[pi, pj]
        q_lin = idx[qi, qj]
        nf = p_lin.size

        rows_n = np.repeat(np.arange(nf), 2)
        cols_n = np.empty(2 * nf, dtype=np.int64)
        cols_n[0::2] = p_lin
        cols_n[1::2] = q_lin
        vals_n = np.tile(np.array([-1.0, 1.0]) / dx, nf)
        Gn = sp.csr_matrix((vals_n, (rows_n, cols_n)), shape=(nf, self.n_cells))

        rows_t, cols_t, vals_t = [], [], []
        di, dj = t_off
        for f in range(nf):
            ip, jp = pi[f], pj[f]
            iq, jq = qi[f], qj[f]
            up_ok = (self._inside(ip + di, jp + dj) and self._inside(iq + di, jq + dj))
            dn_ok = (self._inside(ip - di, jp - dj) and self._inside(iq - di, jq - dj))
            if up_ok and dn_ok:
                stencil = [(idx[ip + di, jp + dj], 0.25), (idx[iq + di, jq + dj], 0.25),
                           (idx[ip - di, jp - dj], -0.25), (idx[iq - di, jq - dj], -0.25)]
            elif up_ok:
                stencil = [(idx[ip + di, jp + dj], 0.5), (idx[iq + di, jq + dj], 0.5),
                           (idx[ip, jp], -0.5), (idx[iq, jq], -0.5)]
            elif dn_ok:
                stencil = [(idx[ip, jp], 0.5), (idx[iq, jq], 0.5),
                           (idx[ip - di, jp - dj], -0.5), (idx[iq - di, jq - dj], -0.5)]
            else:
                stencil = []
            for col, w in stencil:
                rows_t.append(f)
                cols_t.append(col)
                vals_t.append(w / dx)
        Gt = sp.csr_matrix((np.array(vals_t), (np.array(rows_t, dtype=np.int64),
                                               np.array(cols_t, dtype=np.int64))),
                           shape=(nf, self.n_cells))

        rows_i = np.empty(2 * nf, dtype=np.int64)
        rows_i[0::2] = p_lin
        rows_i[1::2] = q_lin
        cols_i = np.repeat(np.arange(nf), 2)
        vals_i = np.tile(np.array([1.0, -1.0]) / dx**2, nf)
        Inc = sp.csr_matrix((vals_i, (rows_i, cols_i)), shape=(self.n_cells, nf))

        return FaceTable(p=p_lin, q=q_lin, Gn=Gn, Gt=Gt, Inc=Inc)

    def _inside(self, i: int, j: int) -> bool:
        return 0 <= i < self.nx and 0 <= j < self.ny and self.mask[i, j]

    # -- operators ---------------------------------------------------------

    def diffusion_operator(self, D) -> sp.csr_matrix:
        """Conservative divergence of the tensor-diffusive flux, as a matrix.

        D is a constant symmetric 2x2 tensor (a scalar means D*identity).
        L @ c gives the per-cell divergence of D grad c with zero normal
        flux across mask boundaries; column sums of L vanish, so total
        mass is invariant under c' = L c and under (I - dt L)^-1.
        """
        D = np.asarray(D, dtype=float)
        if D.ndim == 0:
            D = float(D) * np.eye(2)
        if D.shape != (2, 2) or abs(D[0, 1] - D[1, 0]) > 1e-12 * max(1.0, np.abs(D).max()):
            raise ValueError("D must be a symmetric 2x2 tensor or a scalar")
        dx = self.dx
        fx, fy = self.faces_x, self.faces_y
        Wx = dx * (D[0, 0] * fx.Gn + D[0, 1] * fx.Gt)
        Wy = dx * (D[1, 1] * fy.Gn + D[0, 1] * fy.Gt)
        L = fx.Inc @ Wx + fy.Inc @ Wy
        return L.tocsr()

    # -- conversions ---------------------------------------------------

    def to_grid(self, vec: np.ndarray, fill=np.nan) -> np.ndarray:
        out = np.full((self.nx, self.ny), fill, dtype=float)
        out[self.mask] = vec
        return out

    def from_grid(self, arr: np.ndarray) -> np.ndarray:
        return np.asarray(arr, dtype=float)[self.mask]

    def cell_at(self, x: float, y: float) -> int:
        """Linear index of the interior cell whose square contains (x, y)."""
        i = int(np.clip(math.floor((x - self.x0 + 0.5 * self.dx) / self.dx), 0, self.nx - 1))
        j = int(np.clip(math.floor((y - self.y0 + 0.5 * self.dx) / self.dx), 0, self.ny - 1))
        if not self.mask[i, j]:
            raise ValueError(f"point ({x}, {y}) is outside the domain mask")
        return int(self.index[i, j])

    def total(self, vec: np.ndarray) -> float:
        """Integral of a cell field over the domain (sum times cell area)."""
        return float(np.sum(vec) * self.dx**2)
