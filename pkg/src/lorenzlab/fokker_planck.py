"""Grid discretisation of the axis-system generator.

The generator of the (theta, z) diffusion,

    L0 = (1 - z sin^2 theta) d_theta - gamma (z - zstar) d_z
         + (alpha^2 / 2) d_zz,

is discretised on a cell-centered grid (periodic in theta over one
half-turn, reflecting in z) with first-order upwind advection and centered
diffusion.  That yields a Markov jump-chain generator: off-diagonal rates
are nonnegative and rows sum to zero, which keeps the stationary solve
well-posed even though the theta direction carries no diffusion.

From the discrete operator this module computes the stationary measure, the
stability exponent as a quadrature against it, and the centered solution of
the Poisson (corrector) equation L0 g = lambda - F used to build Lyapunov
functionals.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sla

from .core import DerivedConsts
from .errors import (
    DegenerateDiffusionError,
    InvalidParameterError,
    SingularSolveError,
)
from .estimators import EstimateWithCI, LambdaMethod

__all__ = [
    "Grid2D",
    "SparseOperator",
    "DiscreteMeasure",
    "GridFunction",
    "default_grid",
    "build_operator",
    "stationary_measure",
    "lambda_from_measure",
    "lambda_pde",
    "solve_poisson",
    "growth_integrand",
    "write_grid_csv",
]


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell-centered grid on [-pi/2, pi/2) x [z_lo, z_hi].

    theta is periodic (the dynamics identifies theta with theta + pi), z has
    walls at z_lo and z_hi.
    """

    n_theta: int
    n_z: int
    z_lo: float
    z_hi: float

    def __post_init__(self) -> None:
        if self.n_theta < 16 or self.n_z < 16:
            raise InvalidParameterError(
                f"need n_theta, n_z >= 16, got {self.n_theta}, {self.n_z}")
        if not self.z_lo < self.z_hi:
            raise InvalidParameterError(
                f"need z_lo < z_hi, got [{self.z_lo}, {self.z_hi}]")

    @property
    def h_theta(self) -> float:
        return math.pi / self.n_theta

    @property
    def h_z(self) -> float:
        return (self.z_hi - self.z_lo) / self.n_z

    @property
    def cell_area(self) -> float:
        return self.h_theta * self.h_z

    @property
    def n_cells(self) -> int:
        return self.n_theta * self.n_z

    def theta_centers(self) -> np.ndarray:
        return -0.5 * math.pi + (np.arange(self.n_theta) + 0.5) * self.h_theta

    def z_centers(self) -> np.ndarray:
        return self.z_lo + (np.arange(self.n_z) + 0.5) * self.h_z

    def meshes(self) -> tuple:
        """(theta, z) arrays of shape (n_theta, n_z)."""
        return np.meshgrid(self.theta_centers(), self.z_centers(),
                           indexing="ij")


def default_grid(c: DerivedConsts, alpha: float, n_theta: int = 256,
                 n_z: int = 512, width_sds: float = 8.0) -> Grid2D:
    """Grid covering zstar +- width_sds stationary standard deviations.

    At the default eight standard deviations the Gaussian mass outside the
    box is below 1e-14.
    """
    if not alpha > 0.0:
        raise DegenerateDiffusionError(
            f"grid sizing needs alpha > 0, got {alpha}")
    w = width_sds * alpha / math.sqrt(2.0 * c.gamma)
    return Grid2D(n_theta=n_theta, n_z=n_z, z_lo=c.zstar - w, z_hi=c.zstar + w)


@dataclass
class SparseOperator:
    """Discrete generator together with the grid it lives on."""

    matrix: sparse.csr_matrix
    grid: Grid2D
    c: DerivedConsts
    alpha: float

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Apply to a grid function given as an (n_theta, n_z) array."""
        flat = self.matrix @ values.reshape(-1)
        return flat.reshape(self.grid.n_theta, self.grid.n_z)


@dataclass
class DiscreteMeasure:
    """Nonnegative density values per cell, integrating to one."""

    density: np.ndarray
    grid: Grid2D

    def cell_masses(self) -> np.ndarray:
        return self.density * self.grid.cell_area

    def mean(self, values: np.ndarray) -> float:
        """Integral of a grid function against the measure."""
        return float(np.sum(values * self.density) * self.grid.cell_area)

    def z_marginal(self) -> np.ndarray:
        """Density of the z coordinate on the z grid."""
        return self.density.sum(axis=0) * self.grid.h_theta


@dataclass
class GridFunction:
    """Cell-centered nodal values of a scalar function."""

    values: np.ndarray
    grid: Grid2D


def growth_integrand(grid: Grid2D) -> np.ndarray:
    """F(theta, z) = -1 + z sin(2 theta)/2 at the cell centers."""
    th, zz = grid.meshes()
    return -1.0 + 0.5 * zz * np.sin(2.0 * th)


def build_operator(grid: Grid2D, c: DerivedConsts,
                   alpha: float) -> SparseOperator:
    """Upwind/centered discretisation of the axis-system generator.

    Off-diagonal entries are jump rates (nonnegative); each row sums to
    zero.  Reflecting z walls are realised by dropping outward rates.
    """
    if not alpha > 0.0:
        raise DegenerateDiffusionError(
            "the discretisation needs diffusion in z; alpha must be "
            f"positive, got {alpha}")
    if not (grid.z_lo < c.zstar < grid.z_hi):
        raise InvalidParameterError(
            f"grid z range [{grid.z_lo}, {grid.z_hi}] must contain "
            f"zstar = {c.zstar}")
    nt, nz = grid.n_theta, grid.n_z
    th, zz = grid.meshes()
    idx = np.arange(nt * nz).reshape(nt, nz)

    u = 1.0 - zz * np.sin(th) ** 2
    v = -c.gamma * (zz - c.zstar)
    diff = 0.5 * alpha * alpha / grid.h_z**2

    rows, cols, vals = [], [], []

    def add(r, co, rate):
        rows.append(r.reshape(-1))
        cols.append(co.reshape(-1))
        vals.append(rate.reshape(-1))

    # theta advection, periodic in both directions
    rate_e = np.maximum(u, 0.0) / grid.h_theta
    rate_w = np.maximum(-u, 0.0) / grid.h_theta
    add(idx, np.roll(idx, -1, axis=0), rate_e)
    add(idx, np.roll(idx, 1, axis=0), rate_w)

    # z advection and diffusion, outward rates dropped at the walls
    rate_n = np.maximum(v, 0.0) / grid.h_z + diff
    rate_s = np.maximum(-v, 0.0) / grid.h_z + diff
    add(idx[:, :-1], idx[:, 1:], rate_n[:, :-1])
    add(idx[:, 1:], idx[:, :-1], rate_s[:, 1:])

    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    mat = sparse.coo_matrix((vals, (rows, cols)), shape=(nt * nz, nt * nz))
    mat = mat.tocsr()
    mat.setdiag(-np.asarray(mat.sum(axis=1)).reshape(-1))
    return SparseOperator(matrix=mat.tocsr(), grid=grid, c=c, alpha=alpha)


def stationary_measure(op: SparseOperator,
                       grid: Optional[Grid2D] = None) -> DiscreteMeasure:
    """Stationary law of the discrete chain.

    Solves transpose(L) mu = 0 with one equation replaced by the
    normalisation sum(mu) * cell_area = 1.  The replaced row is the cell
    nearest (stable angle, zstar), where the mass concentrates.
    """
    grid = grid or op.grid
    nt, nz = grid.n_theta, grid.n_z
    c = op.c
    theta_anchor = math.asin(1.0 / math.sqrt(c.zstar)) if c.zstar > 1.0 else 0.0
    i0 = int(np.argmin(np.abs(grid.theta_centers() - theta_anchor)))
    j0 = int(np.argmin(np.abs(grid.z_centers() - c.zstar)))
    r0 = i0 * nz + j0

    lhs = op.matrix.T.tolil()
    lhs[r0, :] = grid.cell_area
    rhs = np.zeros(nt * nz)
    rhs[r0] = 1.0
    try:
        w = sla.splu(lhs.tocsc()).solve(rhs)
    except RuntimeError as exc:
        raise SingularSolveError(
            f"stationary solve failed on {nt}x{nz} grid: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise SingularSolveError(
            f"stationary solve returned non-finite weights on {nt}x{nz} grid")
    wmax = float(w.max())
    if wmax <= 0.0:
        raise SingularSolveError("stationary solve returned no positive mass")
    if float(w.min()) < -1.0e-8 * wmax:
        raise SingularSolveError(
            "stationary solve produced substantially negative weights "
            f"(min/max = {w.min() / wmax:.3e}); the discretisation looks "
            "disconnected")
    w = np.maximum(w, 0.0)
    w /= w.sum() * grid.cell_area
    return DiscreteMeasure(density=w.reshape(nt, nz), grid=grid)


def lambda_from_measure(mu: DiscreteMeasure,
                        grid: Optional[Grid2D] = None) -> float:
    """Stability exponent as the measure's average of the growth integrand."""
    grid = grid or mu.grid
    return mu.mean(growth_integrand(grid))


def lambda_pde(alpha: float, c: DerivedConsts, n_theta: int = 256,
               n_z: int = 512) -> EstimateWithCI:
    """Convenience wrapper: build, solve, quadrature; deterministic."""
    t0 = time.perf_counter()
    grid = default_grid(c, alpha, n_theta=n_theta, n_z=n_z)
    op = build_operator(grid, c, alpha)
    mu = stationary_measure(op)
    value = lambda_from_measure(mu)
    return EstimateWithCI(value=value, half_width=0.0, method=LambdaMethod.PDE,
                          n_samples=grid.n_cells,
                          wall_time_s=time.perf_counter() - t0)


def solve_poisson(op: SparseOperator, mu: DiscreteMeasure,
                  grid: Optional[Grid2D] = None,
                  lam: Optional[float] = None) -> GridFunction:
    """Centered corrector g with L0 g = lam - F and mu(g) = 0.

    lam must be the measure's own average of F (that is what makes the
    right-hand side solvable); it is recomputed when not supplied.  The
    one-dimensional null space is handled by projecting the right-hand side
    onto the mu-orthogonal complement and solving the bordered system
    [[L, m], [1^T, 0]] with m the cell-mass vector; g is recentered so that
    mu(g) = 0 exactly.
    """
    grid = grid or op.grid
    if lam is None:
        lam = lambda_from_measure(mu, grid)
    f = lam - growth_integrand(grid)
    f_flat = f.reshape(-1)
    masses = mu.cell_masses().reshape(-1)
    f_flat = f_flat - float(masses @ f_flat) / float(masses.sum())

    n = grid.n_cells
    m_col = sparse.csc_matrix(
        (masses, (np.arange(n), np.zeros(n, dtype=int))), shape=(n, 1))
    ones_row = sparse.csc_matrix(
        (np.ones(n), (np.zeros(n, dtype=int), np.arange(n))), shape=(1, n))
    bordered = sparse.bmat(
        [[op.matrix, m_col], [ones_row, None]], format="csc")
    rhs = np.concatenate([f_flat, [0.0]])
    try:
        sol = sla.splu(bordered).solve(rhs)
    except RuntimeError as exc:
        raise SingularSolveError(f"bordered Poisson solve failed: {exc}") from exc
    g = sol[:n]
    residual = float(np.linalg.norm(op.matrix @ g - f_flat))
    bound = 1.0e-8 * float(np.linalg.norm(f_flat))
    if not np.all(np.isfinite(g)) or residual > bound:
        raise SingularSolveError(
            f"Poisson residual {residual:.3e} exceeds {bound:.3e} "
            f"(multiplier = {sol[n]:.3e}) on {grid.n_theta}x{grid.n_z} grid")
    values = g.reshape(grid.n_theta, grid.n_z)
    gf = GridFunction(values=values, grid=grid)
    shift = mu.mean(values)
    gf.values = values - shift
    return gf


def write_grid_csv(values: np.ndarray, grid: Grid2D, path: str,
                   label: str = "value") -> None:
    """Write theta,z,value rows in row-major grid order plus a JSON sidecar."""
    th, zz = grid.meshes()
    data = np.column_stack(
        [th.reshape(-1), zz.reshape(-1), np.asarray(values).reshape(-1)])
    np.savetxt(path, data, fmt="%.17g", delimiter=",",
               header=f"theta,z,{label}", comments="")
    meta = {
        "n_theta": grid.n_theta,
        "n_z": grid.n_z,
        "z_lo": grid.z_lo,
        "z_hi": grid.z_hi,
        "h_theta": grid.h_theta,
        "h_z": grid.h_z,
        "order": "row-major (theta outer, z inner)",
        "label": label,
    }
    with open(path + ".json", "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")
