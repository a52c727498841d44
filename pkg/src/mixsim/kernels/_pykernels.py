"""Pure-numpy implementations of the stencil kernels.

Every function here has a compiled twin in ``_ckernels.pyx`` with the same
signature and results equal up to floating-point reassociation.

Array conventions on the staggered grid: cell fields are ``(nx, ny)``,
x-face fields ``(nx+1, ny)``, y-face fields ``(nx, ny+1)`` and node fields
``(nx+1, ny+1)``. Stacked scalar fields carry a leading axis.
"""
import numpy as np


def upwind_fluxes(s, u, v):
    """Donor-cell advective fluxes of stacked cell fields.

    Parameters
    ----------
    s : ndarray, shape (m, nx, ny)
    u : ndarray, shape (nx+1, ny)
    v : ndarray, shape (nx, ny+1)

    Returns
    -------
    fx, fy : ndarray
        Shapes ``(m, nx+1, ny)`` and ``(m, nx, ny+1)``. Boundary faces are zero.
    """
    m, nx, ny = s.shape
    fx = np.zeros((m, nx + 1, ny))
    fy = np.zeros((m, nx, ny + 1))
    ui = u[1:-1, :]
    fx[:, 1:-1, :] = np.where(ui >= 0.0, s[:, :-1, :], s[:, 1:, :]) * ui
    vi = v[:, 1:-1]
    fy[:, :, 1:-1] = np.where(vi >= 0.0, s[:, :, :-1], s[:, :, 1:]) * vi
    return fx, fy


def divergence(fx, fy, hx, hy):
    """Cell divergence of stacked face fluxes, shape ``(m, nx, ny)``."""
    return (fx[:, 1:, :] - fx[:, :-1, :]) / hx + (fy[:, :, 1:] - fy[:, :, :-1]) / hy


def _xi(y):
    t = np.clip(y - 1.0, 0.0, 1.0)
    return 1.0 - t * t * (3.0 - 2.0 * t)


def convection(u, v, hx, hy, k):
    """Energy-neutral divergence-form convection ``div(xi_k(|v|^2) v (x) v)``.

    Momentum fluxes live at cell centres (normal-normal) and grid nodes
    (cross terms). Each flux is multiplied by the truncation factor evaluated
    from the interpolated ``|v|^2`` at the same location; with ``k = inf`` and
    a discretely divergence-free field the term does no work.

    Returns
    -------
    cu, cv : ndarray
        Convective terms on x-faces and y-faces (zero on boundary faces).
    """
    nx, ny = u.shape[0] - 1, u.shape[1]
    uc = 0.5 * (u[1:, :] + u[:-1, :])
    vc = 0.5 * (v[:, 1:] + v[:, :-1])
    un = np.zeros((nx + 1, ny + 1))
    vn = np.zeros((nx + 1, ny + 1))
    un[:, 1:-1] = 0.5 * (u[:, 1:] + u[:, :-1])
    vn[1:-1, :] = 0.5 * (v[1:, :] + v[:-1, :])
    if np.isinf(k):
        xc = 1.0
        xn = 1.0
    else:
        xc = _xi((uc * uc + vc * vc) / k)
        xn = _xi((un * un + vn * vn) / k)
    fxx = xc * uc * uc
    fyy = xc * vc * vc
    fxy = xn * un * vn
    cu = np.zeros_like(u)
    cv = np.zeros_like(v)
    cu[1:-1, :] = (fxx[1:, :] - fxx[:-1, :]) / hx + (fxy[1:-1, 1:] - fxy[1:-1, :-1]) / hy
    cv[:, 1:-1] = (fxy[1:, 1:-1] - fxy[:-1, 1:-1]) / hx + (fyy[:, 1:] - fyy[:, :-1]) / hy
    return cu, cv


def strain_rates(u, v, hx, hy):
    """Symmetric velocity gradient on the staggered grid.

    Returns
    -------
    dxx, dyy : ndarray, shape (nx, ny)
        Normal strain rates at cell centres.
    dxy : ndarray, shape (nx+1, ny+1)
        Shear strain rate at interior nodes; boundary nodes are zero.
    """
    nx, ny = u.shape[0] - 1, u.shape[1]
    dxx = (u[1:, :] - u[:-1, :]) / hx
    dyy = (v[:, 1:] - v[:, :-1]) / hy
    dxy = np.zeros((nx + 1, ny + 1))
    dxy[1:-1, 1:-1] = 0.5 * (
        (u[1:-1, 1:] - u[1:-1, :-1]) / hy + (v[1:, 1:-1] - v[:-1, 1:-1]) / hx
    )
    return dxx, dyy, dxy


def stress_divergence(sxx, syy, sxy, hx, hy):
    """Divergence of a staggered symmetric stress onto the velocity faces.

    ``sxy`` must already hold the wall-node tractions. Boundary faces of the
    result are zero.
    """
    nx, ny = sxx.shape
    fu = np.zeros((nx + 1, ny))
    fv = np.zeros((nx, ny + 1))
    fu[1:-1, :] = (sxx[1:, :] - sxx[:-1, :]) / hx + (sxy[1:-1, 1:] - sxy[1:-1, :-1]) / hy
    fv[:, 1:-1] = (sxy[1:, 1:-1] - sxy[:-1, 1:-1]) / hx + (syy[:, 1:] - syy[:, :-1]) / hy
    return fu, fv
