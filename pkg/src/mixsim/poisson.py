"""Electrostatic potential and pressure projection solvers.

The potential solves ``-lap(phi) = Q`` with the Robin law
``grad(phi).nu = -lambda (phi - phi_G)`` on the boundary. The closure
reconstructs the boundary value from a ghost cell corrected by the local
charge, ``phi_b = (phi_0 + phi_ghost)/2 + h^2 Q_0 / 8``, which is exact for
quadratic potentials and gives the outward gradient

    g_b = -lambda_eff (phi_0 - phi_G + h^2 Q_0 / 8),  lambda_eff = lambda / (1 + lambda h / 2).

The assembled matrix is symmetric positive definite whenever the boundary
integral of ``lambda`` is positive.
"""
import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigurationError, IterationError
from .grid import div, grad

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearSolveSettings:
    """Linear solver choice: ``"direct"`` (sparse LU) or ``"cg"``."""

    method: str = "direct"
    tolerance: float = 1e-12
    max_iter: int = 10000

    def __post_init__(self):
        if self.method not in ("direct", "cg"):
            raise ConfigurationError(f"linear solver method must be 'direct' or 'cg', got {self.method!r}")
        if not self.tolerance > 0:
            raise ConfigurationError("linear solver tolerance must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigurationError("max_iter must be a positive integer")


def _laplacian(grid):
    """Neumann ``-lap`` scaled by the cell volume (symmetric, singular)."""
    nx, ny = grid.shape
    ax = grid.hy / grid.hx
    ay = grid.hx / grid.hy

    def line(n, a):
        main = np.full(n, 2.0 * a)
        main[0] = main[-1] = a
        if n == 1:
            main[0] = 0.0
        return sp.diags([main, np.full(n - 1, -a), np.full(n - 1, -a)], [0, -1, 1])

    Ax = sp.kron(line(nx, ax), sp.identity(ny))
    Ay = sp.kron(sp.identity(nx), line(ny, ay))
    return (Ax + Ay).tocsr()


def _segment_index(grid, seg):
    idx = np.arange(grid.nx * grid.ny).reshape(grid.shape)
    return grid.trace(idx, seg)


def _cg(A, b, settings, what):
    diag = A.diagonal()
    M = sp.diags(1.0 / np.where(diag > 0, diag, 1.0))
    trace = []
    x, info = spla.cg(A, b, rtol=settings.tolerance, atol=0.0, maxiter=settings.max_iter, M=M,
                      callback=lambda xk: trace.append(None))
    if info != 0:
        res = float(np.linalg.norm(A @ x - b) / max(np.linalg.norm(b), 1e-300))
        raise IterationError(f"{what}: CG did not converge in {settings.max_iter} iterations (relative residual {res:.3e})")
    return x


class PotentialSolver:
    """Reusable Robin-Poisson solver for a fixed grid and boundary data."""

    def __init__(self, grid, bc, settings=None):
        self.grid = grid
        self.bc = bc
        self.settings = settings or LinearSolveSettings()
        if bc.integral("lambda_G") <= 0.0:
            raise ConfigurationError(
                "the potential problem is singular: lambda_G vanishes on the whole boundary"
            )
        A = _laplacian(grid).tolil()
        self._lam_eff = {}
        for seg in grid.segments:
            lam = bc.face(seg, "lambda_G")
            h = grid.normal_spacing(seg)
            le = lam / (1.0 + 0.5 * lam * h)
            self._lam_eff[seg] = le
            idx = _segment_index(grid, seg)
            area = grid.face_area(seg)
            for k, cell in enumerate(idx):
                A[cell, cell] += area * le[k]
        self.A = A.tocsr()
        self._lu = spla.splu(self.A.tocsc()) if self.settings.method == "direct" else None

    def rhs(self, Q):
        g = self.grid
        b = (g.vol * np.asarray(Q, dtype=float)).ravel().copy()
        for seg in g.segments:
            h = g.normal_spacing(seg)
            le = self._lam_eff[seg]
            q0 = g.trace(Q, seg)
            idx = _segment_index(g, seg)
            b[idx] += g.face_area(seg) * le * (self.bc.face(seg, "phi_G") - 0.125 * h * h * q0)
        return b

    def solve(self, Q):
        """Potential for the charge density ``Q`` (cell field)."""
        Q = np.asarray(Q, dtype=float)
        b = self.rhs(Q)
        if self._lu is not None:
            x = self._lu.solve(b)
        else:
            x = _cg(self.A, b, self.settings, "potential")
        return x.reshape(self.grid.shape)

    def relative_residual(self, phi, Q):
        b = self.rhs(Q)
        return float(np.linalg.norm(self.A @ np.ravel(phi) - b) / max(np.linalg.norm(b), 1e-300))

    def boundary_gradient(self, phi, Q):
        """Outward normal gradient of ``phi`` on every boundary face, by segment."""
        out = {}
        for seg in self.grid.segments:
            h = self.grid.normal_spacing(seg)
            out[seg] = -self._lam_eff[seg] * (
                self.grid.trace(phi, seg) - self.bc.face(seg, "phi_G") + 0.125 * h * h * self.grid.trace(Q, seg)
            )
        return out

    def boundary_value(self, phi, Q):
        """Reconstructed boundary trace of ``phi`` (exact for quadratics)."""
        g = self.boundary_gradient(phi, Q)
        return {
            seg: self.bc.face(seg, "phi_G") - g[seg] / np.where(self.bc.face(seg, "lambda_G") > 0, self.bc.face(seg, "lambda_G"), np.inf)
            for seg in self.grid.segments
        }


def solve_potential(Q, grid, bc, settings=None):
    """One-shot potential solve; see :class:`PotentialSolver`."""
    return PotentialSolver(grid, bc, settings).solve(Q)


class ProjectionSolver:
    """Discrete Helmholtz projection onto divergence-free face fields with zero normal trace."""

    def __init__(self, grid, settings=None):
        if grid.dim != 2:
            raise ConfigurationError("pressure projection needs a 2D grid")
        self.grid = grid
        self.settings = settings or LinearSolveSettings()
        A = _laplacian(grid)
        if self.settings.method == "direct":
            Ap = A.tolil()
            Ap[0, :] = 0.0
            Ap[0, 0] = 1.0
            self._lu = spla.splu(Ap.tocsc())
        else:
            self._lu = None
        self.A = A

    def project(self, u_star, v_star):
        """Return ``(u, v, p)`` with ``(u, v) = (u*, v*) - grad p`` and ``p`` mean-zero."""
        g = self.grid
        if np.any(u_star[0, :] != 0) or np.any(u_star[-1, :] != 0) or np.any(v_star[:, 0] != 0) or np.any(v_star[:, -1] != 0):
            raise ConfigurationError("projection requires zero normal velocity on the walls")
        b = -(g.vol * div(g, u_star, v_star)).ravel()
        if self._lu is not None:
            b[0] = 0.0
            p = self._lu.solve(b)
        else:
            b -= b.mean()
            p = _cg(self.A, b, self.settings, "projection")
        p = p.reshape(g.shape)
        p -= p.mean()
        gx, gy = grad(g, p)
        return u_star - gx, v_star - gy, p


def solve_pressure_projection(u_star, v_star, grid, settings=None):
    """One-shot projection; see :class:`ProjectionSolver`."""
    return ProjectionSolver(grid, settings).project(u_star, v_star)


@dataclass
class MMSLevel:
    n: int
    h: float
    error_l2: float
    order: float


def mms_study(sizes=(16, 32, 64), method="direct", lambda_g=1.0):
    """Manufactured-solution refinement for the Robin potential problem.

    On the unit square ``phi = cos(pi x) cos(pi y)`` has zero normal
    derivative, so it solves ``-lap(phi) = 2 pi^2 phi`` with ``phi_G`` equal
    to its own trace. Returns one :class:`MMSLevel` per size with the
    discrete L2 error and the observed order against the previous level.
    """
    from .constitutive import BoundaryCoeffs
    from .grid import BoundarySpec, Grid

    rows = []
    for n in sizes:
        grid = Grid.rect(n, n, 1.0, 1.0)
        X, Y = grid.mesh()
        exact = np.cos(np.pi * X) * np.cos(np.pi * Y)
        segs = {}
        for seg in grid.segments:
            xs, ys = grid.segment_coords(seg)
            segs[seg] = BoundaryCoeffs(phi_G=np.cos(np.pi * xs) * np.cos(np.pi * ys), lambda_G=lambda_g)
        bc = BoundarySpec(grid, segs, 2)
        phi = PotentialSolver(grid, bc, LinearSolveSettings(method)).solve(2.0 * np.pi**2 * exact)
        err = float(np.sqrt(grid.vol * np.sum((phi - exact) ** 2)))
        order = np.nan if not rows else float(np.log(rows[-1].error_l2 / err) / np.log(rows[-1].h / grid.hx))
        rows.append(MMSLevel(n, grid.hx, err, order))
    return rows
