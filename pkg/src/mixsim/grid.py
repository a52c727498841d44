"""Staggered finite-volume grid, discrete operators and field storage.

Cell fields have shape ``(nx, ny)`` and are indexed ``[i, j]`` with ``i``
along x. Normal velocities live on faces: ``u`` on x-faces ``(nx+1, ny)``
and ``v`` on y-faces ``(nx, ny+1)``. A one-dimensional grid is the special
case ``ny = 1`` with a unit cross-section and only the ``left``/``right``
boundary segments.

The face inner product weights every interior face by ``hx * hy``; with it
``grad`` and ``-div`` are adjoint up to the boundary-flux term::

    <div F, s> + <F, grad s> = sum_b area_b * s_b * F_out_b
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError, StateError

SEGMENTS_1D = ("left", "right")
SEGMENTS_2D = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid.

    Parameters
    ----------
    nx, ny : int
        Cell counts. ``ny`` must be 1 when ``dim == 1``.
    lx, ly : float
        Domain lengths. ``ly`` is the (unit) cross-section in 1D.
    dim : int
        Spatial dimension, 1 or 2.
    """

    nx: int
    ny: int = 1
    lx: float = 1.0
    ly: float = 1.0
    dim: int = 2

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigurationError(f"dim must be 1 or 2, got {self.dim}")
        if int(self.nx) != self.nx or self.nx < 2:
            raise ConfigurationError(f"nx must be an integer >= 2, got {self.nx}")
        if self.dim == 1 and (self.ny != 1 or self.ly != 1.0):
            raise ConfigurationError("a 1D grid has ny = 1 and ly = 1")
        if self.dim == 2 and (int(self.ny) != self.ny or self.ny < 2):
            raise ConfigurationError(f"ny must be an integer >= 2, got {self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise ConfigurationError("domain lengths must be positive")

    @classmethod
    def line(cls, nx, lx=1.0):
        return cls(nx=nx, ny=1, lx=lx, ly=1.0, dim=1)

    @classmethod
    def rect(cls, nx, ny, lx=1.0, ly=1.0):
        return cls(nx=nx, ny=ny, lx=lx, ly=ly, dim=2)

    @property
    def hx(self):
        return self.lx / self.nx

    @property
    def hy(self):
        return self.ly / self.ny

    @property
    def vol(self):
        """Cell volume, also the weight of every interior face."""
        return self.hx * self.hy

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def segments(self):
        return SEGMENTS_1D if self.dim == 1 else SEGMENTS_2D

    @property
    def x_centers(self):
        return (np.arange(self.nx) + 0.5) * self.hx

    @property
    def y_centers(self):
        return (np.arange(self.ny) + 0.5) * self.hy

    def mesh(self):
        """Cell-centre coordinates ``(X, Y)`` with shape ``(nx, ny)``."""
        return np.meshgrid(self.x_centers, self.y_centers, indexing="ij")

    def segment_size(self, seg):
        self._check_segment(seg)
        return self.ny if seg in ("left", "right") else self.nx

    def face_area(self, seg):
        self._check_segment(seg)
        return self.hy if seg in ("left", "right") else self.hx

    def normal_spacing(self, seg):
        self._check_segment(seg)
        return self.hx if seg in ("left", "right") else self.hy

    def segment_coords(self, seg):
        """Face-midpoint coordinates ``(x, y)`` along a boundary segment."""
        self._check_segment(seg)
        if seg == "left":
            return np.zeros(self.ny), self.y_centers
        if seg == "right":
            return np.full(self.ny, self.lx), self.y_centers
        if seg == "bottom":
            return self.x_centers, np.zeros(self.nx)
        return self.x_centers, np.full(self.nx, self.ly)

    def _check_segment(self, seg):
        if seg not in self.segments:
            raise ConfigurationError(f"unknown boundary segment {seg!r} for a {self.dim}D grid")

    # boundary helpers -------------------------------------------------

    def trace(self, s, seg):
        """Values of a cell field (any leading axes) in the cells adjacent to ``seg``."""
        self._check_segment(seg)
        if seg == "left":
            return s[..., 0, :]
        if seg == "right":
            return s[..., -1, :]
        if seg == "bottom":
            return s[..., :, 0]
        return s[..., :, -1]

    def set_outward_flux(self, fx, fy, seg, q_out):
        """Write an outward normal flux into the boundary faces of ``seg`` (in place)."""
        self._check_segment(seg)
        if seg == "left":
            fx[..., 0, :] = -q_out
        elif seg == "right":
            fx[..., -1, :] = q_out
        elif seg == "bottom":
            fy[..., :, 0] = -q_out
        else:
            fy[..., :, -1] = q_out

    def boundary_integral(self, values_by_segment):
        """``sum_seg sum_faces area * value`` for a dict of per-face arrays."""
        total = 0.0
        for seg, val in values_by_segment.items():
            total += self.face_area(seg) * float(np.sum(val))
        return total

    def integral(self, s):
        """Cell-field integral; leading axes are kept."""
        return np.sum(s, axis=(-2, -1)) * self.vol


# operators ---------------------------------------------------------------


def project_ell(w, axis=0):
    """Orthogonal projection onto the complement of ``(1, ..., 1)`` along ``axis``."""
    w = np.asarray(w, dtype=float)
    return w - np.mean(w, axis=axis, keepdims=True)


def orthonormal_complement(vectors, L):
    """Orthonormal basis (columns) of the complement of ``span(vectors)`` in R^L."""
    a = np.atleast_2d(np.asarray(vectors, dtype=float)).T
    if a.shape[0] != L:
        raise ConfigurationError("vector length does not match the number of species")
    u, sv, _ = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(sv > 1e-12 * max(1.0, sv.max(initial=0.0))))
    return u[:, rank:]


def project_complement(w, basis, axis=0):
    """Project ``w`` onto ``span(basis)`` (basis columns orthonormal) along ``axis``."""
    w = np.moveaxis(np.asarray(w, dtype=float), axis, -1)
    out = (w @ basis) @ basis.T
    return np.moveaxis(out, -1, axis)


def grad(grid, s):
    """Face gradient of a cell field (leading axes allowed); boundary faces are zero."""
    s = np.asarray(s, dtype=float)
    lead = s.shape[:-2]
    gx = np.zeros(lead + (grid.nx + 1, grid.ny))
    gy = np.zeros(lead + (grid.nx, grid.ny + 1))
    gx[..., 1:-1, :] = (s[..., 1:, :] - s[..., :-1, :]) / grid.hx
    gy[..., :, 1:-1] = (s[..., :, 1:] - s[..., :, :-1]) / grid.hy
    return gx, gy


def div(grid, fx, fy):
    """Cell divergence of face fluxes (leading axes allowed)."""
    return (fx[..., 1:, :] - fx[..., :-1, :]) / grid.hx + (fy[..., :, 1:] - fy[..., :, :-1]) / grid.hy


def center_to_face(grid, s):
    """Arithmetic face averages; boundary faces take the adjacent cell value."""
    s = np.asarray(s, dtype=float)
    lead = s.shape[:-2]
    fx = np.empty(lead + (grid.nx + 1, grid.ny))
    fy = np.empty(lead + (grid.nx, grid.ny + 1))
    fx[..., 1:-1, :] = 0.5 * (s[..., 1:, :] + s[..., :-1, :])
    fx[..., 0, :] = s[..., 0, :]
    fx[..., -1, :] = s[..., -1, :]
    fy[..., :, 1:-1] = 0.5 * (s[..., :, 1:] + s[..., :, :-1])
    fy[..., :, 0] = s[..., :, 0]
    fy[..., :, -1] = s[..., :, -1]
    return fx, fy


def face_to_center(fx, fy):
    """Average face values to cell centres, returning ``(sx, sy)``."""
    return 0.5 * (fx[..., 1:, :] + fx[..., :-1, :]), 0.5 * (fy[..., :, 1:] + fy[..., :, :-1])


def face_inner(grid, ax, ay, bx, by):
    """Discrete L2 inner product of face fields (interior faces weighted by ``vol``)."""
    return grid.vol * (
        float(np.sum(ax[..., 1:-1, :] * bx[..., 1:-1, :])) + float(np.sum(ay[..., :, 1:-1] * by[..., :, 1:-1]))
    )


def integral_omega(grid, s):
    return grid.integral(s)


def integral_boundary(grid, values_by_segment):
    return grid.boundary_integral(values_by_segment)


# state -------------------------------------------------------------------


@dataclass
class FieldState:
    """Primary unknowns on the grid.

    Attributes
    ----------
    c : ndarray, shape (L, nx, ny)
        Species concentrations, positive and summing to one in every cell.
    e : ndarray, shape (nx, ny)
        Internal energy density, positive.
    u, v : ndarray
        Normal velocities on x-faces and y-faces; boundary faces are zero.
    p : ndarray, shape (nx, ny)
        Kinematic pressure (mean zero).
    phi : ndarray, shape (nx, ny)
        Electrostatic potential.
    t : float
    """

    c: np.ndarray
    e: np.ndarray
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    phi: np.ndarray
    t: float = 0.0
    meta: dict = field(default_factory=dict)

    @classmethod
    def at_rest(cls, grid, c, e, phi=None):
        c = np.array(c, dtype=float)
        e = np.array(e, dtype=float)
        return cls(
            c=c,
            e=e,
            u=np.zeros((grid.nx + 1, grid.ny)),
            v=np.zeros((grid.nx, grid.ny + 1)),
            p=np.zeros(grid.shape),
            phi=np.zeros(grid.shape) if phi is None else np.array(phi, dtype=float),
        )

    @property
    def L(self):
        return self.c.shape[0]

    def copy(self):
        return replace(
            self,
            c=self.c.copy(),
            e=self.e.copy(),
            u=self.u.copy(),
            v=self.v.copy(),
            p=self.p.copy(),
            phi=self.phi.copy(),
            meta=dict(self.meta),
        )

    def validate(self, grid, L=None, simplex_tol=1e-10):
        """Raise ``StateError`` unless the state is admissible on ``grid``."""
        nx, ny = grid.shape
        if self.c.ndim != 3 or self.c.shape[1:] != (nx, ny):
            raise StateError(f"c has shape {self.c.shape}, expected (L, {nx}, {ny})")
        if L is not None and self.c.shape[0] != L:
            raise StateError(f"state has {self.c.shape[0]} species, model has {L}")
        expected = {"e": (nx, ny), "u": (nx + 1, ny), "v": (nx, ny + 1), "p": (nx, ny), "phi": (nx, ny)}
        for name, shp in expected.items():
            if getattr(self, name).shape != shp:
                raise StateError(f"{name} has shape {getattr(self, name).shape}, expected {shp}")
        for name in ("c", "e", "u", "v", "p", "phi"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise StateError(f"{name} contains non-finite values")
        if np.any(self.c <= 0.0):
            raise StateError(f"concentrations must be positive (min {self.c.min():.3e})")
        drift = float(np.max(np.abs(self.c.sum(axis=0) - 1.0)))
        if drift > simplex_tol:
            raise StateError(f"concentrations leave the simplex (max |sum c - 1| = {drift:.3e})")
        if np.any(self.e <= 0.0):
            raise StateError(f"internal energy must be positive (min {self.e.min():.3e})")
        if np.any(self.u[0, :] != 0) or np.any(self.u[-1, :] != 0) or np.any(self.v[:, 0] != 0) or np.any(self.v[:, -1] != 0):
            raise StateError("normal velocity must vanish on the boundary")


# snapshot IO --------------------------------------------------------------


def write_field_csv(path, name, t, grid, values):
    """Write one cell field in the snapshot format.

    The header line is ``# field=<name> t=<t> nx=<nx> ny=<ny> hx=<hx> hy=<hy>``
    followed by one line per x-index holding ``ny`` comma-separated values in
    row-major order with 17 significant digits.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise StateError(f"field {name} has shape {values.shape}, expected {grid.shape}")
    with open(path, "w") as fh:
        fh.write(f"# field={name} t={t:.17g} nx={grid.nx} ny={grid.ny} hx={grid.hx:.17g} hy={grid.hy:.17g}\n")
        for row in values:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def read_field_csv(path):
    """Read a snapshot written by :func:`write_field_csv`; returns ``(meta, values)``."""
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("# "):
            raise ConfigurationError(f"{path}: missing snapshot header")
        meta = dict(item.split("=", 1) for item in header[2:].split())
        nx, ny = int(meta["nx"]), int(meta["ny"])
        data = [float(x) for line in fh for x in line.strip().split(",") if line.strip()]
    if len(data) != nx * ny:
        raise ConfigurationError(f"{path}: expected {nx * ny} values, found {len(data)}")
    return meta, np.array(data).reshape(nx, ny)


# boundary data ------------------------------------------------------------


class BoundarySpec:
    """Per-segment boundary coefficients, expanded to per-face profiles.

    Parameters
    ----------
    grid : Grid
    segments : dict
        Maps every segment label of ``grid`` to a record with the attributes
        ``theta_G, zeta_G, phi_G, d, kappa_bar, lambda_G, gamma`` (scalars or
        per-face arrays; ``zeta_G`` is ``(L,)`` or ``(L, n)``).
    L : int
        Number of species, used to expand ``zeta_G``.
    """

    SCALAR_FIELDS = ("theta_G", "phi_G", "d", "kappa_bar", "lambda_G", "gamma")

    def __init__(self, grid, segments, L):
        missing = set(grid.segments) - set(segments)
        extra = set(segments) - set(grid.segments)
        if missing or extra:
            raise ConfigurationError(
                f"boundary segments must be exactly {grid.segments}; missing {sorted(missing)}, unknown {sorted(extra)}"
            )
        self.grid = grid
        self.L = L
        self.segments = dict(segments)
        self._faces = {}
        for seg, co in self.segments.items():
            n = grid.segment_size(seg)
            prof = {}
            for name in self.SCALAR_FIELDS:
                a = np.asarray(getattr(co, name), dtype=float)
                if a.ndim > 1 or (a.ndim == 1 and a.size != n):
                    raise ConfigurationError(f"bc.{seg}.{name}: profile must be a scalar or have {n} entries")
                prof[name] = np.broadcast_to(a, (n,)).copy()
            if co.zeta_G is None:
                z = np.zeros((L, n))
            else:
                z = np.asarray(co.zeta_G, dtype=float)
                if z.ndim == 1:
                    z = z[:, None]
                if z.shape[0] != L or z.shape[1] not in (1, n):
                    raise ConfigurationError(f"bc.{seg}.zeta_G must have {L} entries (optionally per face)")
                z = np.broadcast_to(z, (L, n)).copy()
            prof["zeta_G"] = z
            if np.any(~np.isfinite(z)):
                raise ConfigurationError(f"bc.{seg}.zeta_G must be finite")
            if np.any(prof["theta_G"] <= 0):
                raise ConfigurationError(f"bc.{seg}.theta_G must be positive")
            self._faces[seg] = prof

    def face(self, seg, name):
        """Per-face profile of one coefficient on ``seg``."""
        return self._faces[seg][name]

    def integral(self, name):
        return sum(self.grid.face_area(s) * float(self._faces[s][name].sum()) for s in self.grid.segments)

    def max(self, name):
        return max(float(self._faces[s][name].max()) for s in self.grid.segments)
