"""P1 Galerkin matrices on the tensor-product mesh of (-L, L) x (0, pi).

Dirichlet nodes are eliminated everywhere: 1D matrices live on the interior
x-nodes ``n = -N_minus+1 .. N_plus-1`` and interior y-nodes ``l = 1 .. M-1``.
Two-dimensional arrays of nodal values are shaped ``(n_x, n_y)`` and flatten
x-major (lexicographic in ``(n, l)``), matching ``scipy.sparse.kron``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.fft
import scipy.sparse as sp
from numpy.polynomial.legendre import leggauss

from .errors import DomainError
from .spectral import MeshConfig, PhysicalConfig, discrete_lambda_hat

GAUSS_POINTS = 5


@dataclass(frozen=True)
class Grid1D:
    """Nodes of a 1D grid, uniform on each side of the interface.

    Each side is laid out with ``linspace`` and cell widths are the node
    differences.  On critical meshes the per-mode matrices are singular up to
    rounding, so the computed solution depends on these last-bit details;
    this construction is the conventional one for a mesh generator.
    """

    nodes: np.ndarray
    interface_index: int

    @classmethod
    def x_grid(cls, mesh: MeshConfig) -> "Grid1D":
        L = mesh.half_width_L
        left = np.linspace(-L, 0.0, mesh.n_minus + 1)
        right = np.linspace(0.0, L, mesh.n_plus + 1)
        return cls(np.concatenate([left[:-1], right]), mesh.n_minus)

    @classmethod
    def y_grid(cls, mesh: MeshConfig) -> "Grid1D":
        return cls(np.linspace(0.0, math.pi, mesh.big_m + 1), 0)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[1:] + self.nodes[:-1])

    @property
    def n_interior(self) -> int:
        return len(self.nodes) - 2


@dataclass(frozen=True)
class BandedOperator:
    """Symmetric tridiagonal matrix in LAPACK band storage.

    ``bands[0, 1:]`` is the super-diagonal, ``bands[1]`` the diagonal and
    ``bands[2, :-1]`` the sub-diagonal.
    """

    bands: np.ndarray
    bandwidth: int = 1

    @classmethod
    def from_diagonals(cls, diag: np.ndarray, offdiag: np.ndarray) -> "BandedOperator":
        n = len(diag)
        bands = np.zeros((3, n))
        bands[1] = diag
        bands[0, 1:] = offdiag
        bands[2, :-1] = offdiag
        return cls(bands)

    @property
    def dimension(self) -> int:
        return self.bands.shape[1]

    @property
    def diag(self) -> np.ndarray:
        return self.bands[1]

    @property
    def offdiag(self) -> np.ndarray:
        return self.bands[0, 1:]

    def __add__(self, other: "BandedOperator") -> "BandedOperator":
        return BandedOperator(self.bands + other.bands)

    def __mul__(self, scalar: float) -> "BandedOperator":
        return BandedOperator(self.bands * scalar)

    __rmul__ = __mul__

    def tosparse(self) -> sp.csr_matrix:
        return sp.diags([self.offdiag, self.diag, self.offdiag], [-1, 0, 1], format="csr")

    def toarray(self) -> np.ndarray:
        return self.tosparse().toarray()

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Apply along the first axis of ``x``."""
        y = self.diag.reshape((-1,) + (1,) * (x.ndim - 1)) * x
        off = self.offdiag.reshape((-1,) + (1,) * (x.ndim - 1))
        y[:-1] += off * x[1:]
        y[1:] += off * x[:-1]
        return y


def _cell_weights(grid: Grid1D, weight) -> np.ndarray:
    n_cells = len(grid.nodes) - 1
    if callable(weight):
        w = np.asarray(weight(grid.midpoints), dtype=float)
        return np.broadcast_to(w, (n_cells,)).copy()
    if np.ndim(weight) == 0:
        return np.full(n_cells, float(weight))
    left, right = weight
    return np.where(np.arange(n_cells) < grid.interface_index, float(left), float(right))


def _assemble_1d(grid: Grid1D, weight, kind: str) -> BandedOperator:
    h = grid.widths
    if len(h) < 2 or np.any(h <= 0):
        raise DomainError("grid needs at least two cells of positive width")
    w = _cell_weights(grid, weight)
    if kind == "stiffness":
        cell_diag, cell_off = w / h, -w / h
    else:
        cell_diag, cell_off = w * h / 3.0, w * h / 6.0
    # interior node i (1..n-1) touches cells i-1 and i
    diag = cell_diag[:-1] + cell_diag[1:]
    offdiag = cell_off[1:-1]
    return BandedOperator.from_diagonals(diag, offdiag)


def stiffness_1d(grid: Grid1D, weight=1.0) -> BandedOperator:
    """P1 stiffness matrix with piecewise-constant ``weight`` on interior nodes.

    ``weight`` may be a scalar, a ``(left, right)`` pair split at the
    interface, or a callable evaluated at cell midpoints.
    """
    return _assemble_1d(grid, weight, "stiffness")


def mass_1d(grid: Grid1D, weight=1.0) -> BandedOperator:
    return _assemble_1d(grid, weight, "mass")


def _sigma_pair(phys: PhysicalConfig) -> tuple[float, float]:
    return phys.sigma_minus, phys.sigma_plus


def mode_matrix(phys: PhysicalConfig, mesh: MeshConfig, m: int, use_hat: bool = True) -> BandedOperator:
    """``K^sigma + lam^2 M^sigma`` on interior x-nodes for y-mode ``m``."""
    if m < 1 or (use_hat and m > mesh.big_m - 1):
        raise DomainError(f"mode m={m} out of range 1..{mesh.big_m - 1}")
    lam = discrete_lambda_hat(m, mesh.h_y) if use_hat else float(m)
    grid = Grid1D.x_grid(mesh)
    w = _sigma_pair(phys)
    return stiffness_1d(grid, w) + (lam * lam) * mass_1d(grid, w)


@dataclass(frozen=True)
class TensorOperator:
    """Kronecker sum ``Kx (x) My + Mx (x) Ky`` acting on ``(n_x, n_y)`` arrays."""

    kx: BandedOperator
    mx: BandedOperator
    ky: BandedOperator
    my: BandedOperator

    @property
    def shape(self) -> tuple[int, int]:
        return self.kx.dimension, self.ky.dimension

    def matvec(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float).reshape(self.shape)
        kxu = self.kx.matvec(u)
        mxu = self.mx.matvec(u)
        return self.my.matvec(kxu.T).T + self.ky.matvec(mxu.T).T

    def tosparse(self) -> sp.csr_matrix:
        return (sp.kron(self.kx.tosparse(), self.my.tosparse())
                + sp.kron(self.mx.tosparse(), self.ky.tosparse())).tocsr()


@dataclass(frozen=True)
class Assembly:
    operator_A: TensorOperator
    gram_G: TensorOperator
    x_grid: Grid1D
    y_grid: Grid1D


def assemble_2d(phys: PhysicalConfig, mesh: MeshConfig) -> Assembly:
    mesh.for_physics(phys)
    gx, gy = Grid1D.x_grid(mesh), Grid1D.y_grid(mesh)
    if gy.n_interior < 1:
        raise DomainError("need M >= 2")
    w = _sigma_pair(phys)
    ky, my = stiffness_1d(gy), mass_1d(gy)
    a = TensorOperator(stiffness_1d(gx, w), mass_1d(gx, w), ky, my)
    g = TensorOperator(stiffness_1d(gx), mass_1d(gx), ky, my)
    return Assembly(a, g, gx, gy)


# ---------------------------------------------------------------------------
# quadrature and loads


def cell_quadrature(grid: Grid1D, order: int = GAUSS_POINTS):
    """Gauss points/weights per cell, shape ``(n_cells, order)``.

    Also returns the two P1 shape functions and their derivatives at the points
    (left/right node of each cell).
    """
    xi, wi = leggauss(order)
    h = grid.widths[:, None]
    x = grid.nodes[:-1, None] + 0.5 * (xi[None, :] + 1.0) * h
    w = 0.5 * wi[None, :] * h
    right = np.broadcast_to(0.5 * (xi + 1.0), x.shape)
    left = 1.0 - right
    dright = 1.0 / h * np.ones_like(x)
    return x, w, left, right, -dright, dright


def basis_at_points(grid: Grid1D, order: int = GAUSS_POINTS, derivative: bool = False) -> sp.csr_matrix:
    """Sparse matrix mapping interior nodal values to values at all Gauss points.

    Row ``c * order + q`` is quadrature point ``q`` of cell ``c``.
    """
    x, _, left, right, dleft, dright = cell_quadrature(grid, order)
    n_cells = x.shape[0]
    lv, rv = (dleft, dright) if derivative else (left, right)
    rows = np.arange(n_cells * order).reshape(n_cells, order)
    # node index of the left end of cell c is c; interior column = node - 1
    left_col = np.repeat(np.arange(n_cells)[:, None] - 1, order, axis=1)
    right_col = left_col + 1
    n_int = grid.n_interior
    data, rr, cc = [], [], []
    for vals, cols in ((lv, left_col), (rv, right_col)):
        mask = (cols >= 0) & (cols < n_int)
        data.append(vals[mask])
        rr.append(rows[mask])
        cc.append(cols[mask])
    return sp.csr_matrix((np.concatenate(data), (np.concatenate(rr), np.concatenate(cc))),
                         shape=(n_cells * order, n_int))


def load_vector(phys: PhysicalConfig, mesh: MeshConfig, f: Callable, order: int = GAUSS_POINTS,
                chunk: int = 4096) -> np.ndarray:
    """``<f, phi_n (x) psi_l>`` over interior nodes, shape ``(n_x, n_y)``.

    ``f(x, y)`` must broadcast over arrays.  Cells are integrated with an
    ``order``-point Gauss rule in each direction.
    """
    mesh.for_physics(phys)
    gx, gy = Grid1D.x_grid(mesh), Grid1D.y_grid(mesh)
    xq, wx, *_ = cell_quadrature(gx, order)
    yq, wy, *_ = cell_quadrature(gy, order)
    xq, wx, yq, wy = xq.ravel(), wx.ravel(), yq.ravel(), wy.ravel()
    bx = basis_at_points(gx, order)
    by = basis_at_points(gy, order)
    byw = by.T.multiply(wy[None, :]).tocsr()
    out = np.zeros((gx.n_interior, gy.n_interior))
    for start in range(0, len(xq), chunk):
        sl = slice(start, start + chunk)
        vals = f(xq[sl, None], yq[None, :]) * wx[sl, None]
        out += bx[sl].T @ (byw @ vals.T).T
    return out


# ---------------------------------------------------------------------------
# discrete sine basis in y


@dataclass(frozen=True)
class SineBasis:
    """M_y-orthonormal eigenvectors of the P1 y-matrices (discrete sines).

    Column ``m - 1`` of :attr:`vectors` holds the nodal coefficients of the
    m-th basis function.  Applying the unscaled sine matrix is a type-I DST.
    """

    big_m: int
    h_y: float
    scale: np.ndarray   # c_m
    tau2: np.ndarray    # generalised eigenvalues tau_m^2

    @classmethod
    def for_mesh(cls, mesh: MeshConfig) -> "SineBasis":
        if mesh.big_m < 2:
            raise DomainError("sine basis needs M >= 2")
        big_m, hy = mesh.big_m, mesh.h_y
        modes = np.arange(1, big_m)
        theta = np.pi * modes / big_m
        # s^T My s for s_l = sin(m pi l / M), from the assembled mass matrix
        my = mass_1d(Grid1D.y_grid(mesh))
        s = np.sin(np.outer(np.arange(1, big_m), theta))
        norms2 = np.einsum("lm,lm->m", s, my.matvec(s))
        tau2 = np.array([discrete_lambda_hat(int(m), hy) ** 2 for m in modes])
        return cls(big_m, hy, 1.0 / np.sqrt(norms2), tau2)

    @property
    def vectors(self) -> np.ndarray:
        n = self.big_m - 1
        return self._sine(np.eye(n), axis=0) * self.scale[None, :]

    def _sine(self, values: np.ndarray, axis: int) -> np.ndarray:
        # sum_l sin(pi m l / M) v_l  ==  dst-I(v) / 2
        return 0.5 * scipy.fft.dst(values, type=1, axis=axis)

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        """Mode coefficients (last axis) -> nodal values (last axis)."""
        return self._sine(np.asarray(coeffs) * self.scale, axis=-1)

    def project_dual(self, dual: np.ndarray) -> np.ndarray:
        """Dual (load-type) nodal vector -> per-mode right-hand sides (S^T F)."""
        return self._sine(np.asarray(dual), axis=-1) * self.scale

    def analyze(self, nodal: np.ndarray, my: BandedOperator) -> np.ndarray:
        """Nodal values -> mode coefficients, ``S^T My v``."""
        v = np.asarray(nodal, dtype=float)
        mv = my.matvec(np.moveaxis(v, -1, 0))
        return self.project_dual(np.moveaxis(mv, 0, -1))


def dst_transform(mesh: MeshConfig, nodal_values: np.ndarray) -> np.ndarray:
    """Expand y-nodal data (last axis) in the discrete sine eigenbasis."""
    basis = SineBasis.for_mesh(mesh)
    return basis.analyze(nodal_values, mass_1d(Grid1D.y_grid(mesh)))


def inverse_dst_transform(mesh: MeshConfig, coefficients: np.ndarray) -> np.ndarray:
    return SineBasis.for_mesh(mesh).synthesize(coefficients)


def write_coordinate(path, matrix: sp.spmatrix) -> None:
    """Write ``row col value`` triples (0-based, 17 significant digits)."""
    coo = sp.coo_matrix(matrix)
    with open(path, "w") as fh:
        for i, j, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{i} {j} {v:.16e}\n")


def read_coordinate(path, shape=None) -> sp.csr_matrix:
    data = np.loadtxt(path, ndmin=2)
    rows, cols, vals = data[:, 0].astype(int), data[:, 1].astype(int), data[:, 2]
    if shape is None:
        shape = (rows.max() + 1, cols.max() + 1)
    return sp.csr_matrix((vals, (rows, cols)), shape=shape)
