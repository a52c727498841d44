"""Material laws, model entropies and a sampling validator for their hypotheses.

Array convention: species live on axis 0, so ``c`` has shape ``(L, ...)``
and ``theta`` has the trailing shape ``(...)``. Strain-rate tensors carry
the two tensor axes last, ``D`` of shape ``(..., d, d)``.

The model entropy is separable, ``s = s_e(e) + s_c(c)``, with

* ``s_c(c) = sum_i (c_i - c_i ln c_i)`` so that ``zeta = ln c``;
* ``s_e(e) = sqrt(e)`` for ``e <= 1`` and ``1 - ln 2 + ln(1 + e)`` beyond,
  the unique C2 gluing of the two branches at ``e = 1``. Temperature is
  ``theta = 1 / s_e'(e)``, i.e. ``2 sqrt(e)`` and ``e + 1``.
"""
import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .grid import orthonormal_complement, project_ell

logger = logging.getLogger(__name__)

_LN2 = math.log(2.0)


# entropies and temperature -------------------------------------------------


def _positive(name, x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0.0)):
        raise DomainError(f"{name} must be positive")
    return x


def zeta(c):
    """Chemical potentials ``zeta_i = -d s_c / d c_i = ln c_i``."""
    return np.log(_positive("concentrations", c))


def zeta_regularized(c, epsilon):
    """Chemical potentials of ``s_c + epsilon * sum ln c_i``: ``ln c_i - epsilon / c_i``."""
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    c = _positive("concentrations", c)
    if epsilon == 0:
        return np.log(c)
    return np.log(c) - epsilon / c


def entropy_c(c, epsilon=0.0):
    """Concentration entropy density, summed over species (axis 0)."""
    c = _positive("concentrations", c)
    s = np.sum(c - c * np.log(c), axis=0)
    if epsilon:
        s = s + epsilon * np.sum(np.log(c), axis=0)
    return s


def entropy_c_increment(c, dc, epsilon=0.0):
    """``s_c(c + dc) - s_c(c)`` evaluated without cancellation."""
    c = np.asarray(c, dtype=float)
    dc = np.asarray(dc, dtype=float)
    c1 = c + dc
    # (c+dc) ln(c+dc) - c ln c = dc ln(c+dc) + c ln(1 + dc/c)
    rel = np.log1p(dc / c)
    d = np.sum(dc - dc * np.log(c1) - c * rel, axis=0)
    if epsilon:
        d = d + epsilon * np.sum(rel, axis=0)
    return d


def entropy_e(e):
    """Internal-energy entropy density ``s_e(e)`` (zero at ``e = 0``)."""
    e = np.asarray(e, dtype=float)
    if np.any(e < 0):
        raise DomainError("internal energy must be nonnegative")
    low = np.sqrt(np.minimum(e, 1.0))
    high = 1.0 - _LN2 + np.log1p(np.maximum(e, 1.0))
    return np.where(e <= 1.0, low, high)


def entropy_e_increment(e, de):
    """``s_e(e + de) - s_e(e)`` without cancellation (both arguments positive)."""
    e = np.asarray(e, dtype=float)
    e1 = e + np.asarray(de, dtype=float)
    if np.any(e < 0) or np.any(e1 < 0):
        raise DomainError("internal energy must be nonnegative")
    both_low = (e <= 1.0) & (e1 <= 1.0)
    both_high = (e > 1.0) & (e1 > 1.0)
    d_low = (e1 - e) / (np.sqrt(e1) + np.sqrt(e) + (e1 == e))
    d_high = np.log1p((e1 - e) / (1.0 + np.maximum(e, 1.0)))
    d_mixed = entropy_e(e1) - entropy_e(e)
    return np.where(both_low, d_low, np.where(both_high, d_high, d_mixed))


def entropy_e_derivatives(e):
    """First and second derivatives of ``s_e`` for ``e > 0``."""
    e = _positive("internal energy", e)
    d1 = np.where(e <= 1.0, 0.5 / np.sqrt(e), 1.0 / (1.0 + e))
    d2 = np.where(e <= 1.0, -0.25 * e ** -1.5, -1.0 / (1.0 + e) ** 2)
    return d1, d2


def theta_of_e(e):
    """Temperature ``1 / s_e'(e)``: ``2 sqrt(e)`` for ``e <= 1`` and ``e + 1`` beyond."""
    e = np.asarray(e, dtype=float)
    if np.any(~(e >= 0)):
        raise DomainError("internal energy must be nonnegative")
    return np.where(e <= 1.0, 2.0 * np.sqrt(np.minimum(e, 1.0)), e + 1.0)


def e_of_theta(theta):
    """Inverse of :func:`theta_of_e`."""
    theta = np.asarray(theta, dtype=float)
    if np.any(~(theta >= 0)):
        raise DomainError("temperature must be nonnegative")
    return np.where(theta <= 2.0, 0.25 * theta * theta, theta - 1.0)


def dtheta_de(e):
    e = _positive("internal energy", e)
    return np.where(e <= 1.0, 1.0 / np.sqrt(np.minimum(e, 1.0)), 1.0)


# material model -------------------------------------------------------------


def _exact_projector_scale(scale, L):
    """Off-diagonal value ``-scale/L`` truncated so that row sums are exactly zero.

    The mantissa is cut to 45 bits, so every partial sum of up to 255 copies
    is representable and no summation order can leave a rounding residue.
    """
    off = np.asarray(scale, dtype=float) / L
    mant, expo = np.frexp(off)
    return np.ldexp(np.trunc(mant * 2.0**45) / 2.0**45, expo)


def scaled_projector(scale, L):
    """``scale * P_ell`` as an ``(L, L, ...)`` array with exactly zero row and column sums."""
    off = _exact_projector_scale(scale, L)
    mat = np.empty((L, L) + off.shape)
    mat[...] = -off
    for i in range(L):
        mat[i, i] = (L - 1) * off
    return mat


@dataclass(frozen=True)
class MaterialModel:
    """Parameters and closed-form laws of a mixture model.

    Parameters
    ----------
    L : int
        Number of species.
    z : tuple of float
        Specific charges.
    r_exponent : float
        Power-law exponent of the stress.
    g_visc : tuple of float or callable, optional
        Either per-species viscosities mixed linearly, ``g = sum_i g_i c_i``,
        or a callable ``g(c, theta)``. Defaults to all ones.
    beta, eps0 : float
        Low-temperature conductivity exponent and mobility margin.
    mobility0 : float
        Scale of the mobility ``M(theta)``.
    m_amp : float
        Amplitude of the thermo-diffusion vector.
    kappa0 : float
        Heat conductivity scale.
    rho0 : float
        Reaction rate scale.
    """

    L: int = 3
    z: tuple = (1.0, -1.0, 0.0)
    r_exponent: float = 2.0
    g_visc: object = None
    beta: float = 1.5
    eps0: float = 0.25
    mobility0: float = 1.0
    m_amp: float = 0.0
    kappa0: float = 1.0
    rho0: float = 0.0
    _reaction_basis: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ConfigurationError(f"L must be an integer >= 2, got {self.L}")
        object.__setattr__(self, "z", tuple(float(x) for x in self.z))
        if len(self.z) != self.L:
            raise ConfigurationError(f"z has {len(self.z)} entries, expected L = {self.L}")
        if self.g_visc is None:
            object.__setattr__(self, "g_visc", (1.0,) * self.L)
        if not callable(self.g_visc):
            gv = tuple(float(x) for x in self.g_visc)
            if len(gv) != self.L:
                raise ConfigurationError(f"g_visc has {len(gv)} entries, expected L = {self.L}")
            if any(not (x >= 0) for x in gv):
                raise ConfigurationError("species viscosities must be nonnegative")
            object.__setattr__(self, "g_visc", gv)
        for name in ("r_exponent", "beta", "eps0", "mobility0", "m_amp", "kappa0", "rho0"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if not self.kappa0 > 0:
            raise ConfigurationError(f"kappa0 must be positive, got {self.kappa0}")
        if not self.mobility0 > 0:
            raise ConfigurationError(f"mobility0 must be positive, got {self.mobility0}")
        if self.rho0 < 0 or self.m_amp < 0:
            raise ConfigurationError("rho0 and m_amp must be nonnegative")
        ell = np.ones(self.L)
        object.__setattr__(self, "_reaction_basis", orthonormal_complement([ell, self.z_array], self.L))

    @property
    def z_array(self):
        return np.array(self.z)

    @property
    def charged(self):
        return any(x != 0.0 for x in self.z)

    # viscosity and stress

    def g(self, c, theta):
        """Viscosity factor ``g(c, theta)``."""
        if callable(self.g_visc):
            return np.asarray(self.g_visc(c, theta), dtype=float) * np.ones(np.shape(theta))
        return np.tensordot(np.array(self.g_visc), np.asarray(c, dtype=float), axes=(0, 0))

    def viscosity(self, c, theta, dnorm):
        """Effective viscosity ``g (1 + |D|^(r-1))`` so that ``S = viscosity * D``."""
        return self.g(c, theta) * (1.0 + np.asarray(dnorm, dtype=float) ** (self.r_exponent - 1.0))

    def stress(self, c, theta, D):
        """Power-law stress ``g (1 + |D|^(r-1)) D`` with the Frobenius norm ``|D|``."""
        D = np.asarray(D, dtype=float)
        dnorm = np.sqrt(np.sum(D * D, axis=(-2, -1)))
        return self.viscosity(c, theta, dnorm)[..., None, None] * D

    # mobility and cross effects

    def mobility_scalar(self, theta):
        """Scalar mobility ``M(theta)``, continuous at ``theta = 1``."""
        theta = _positive("temperature", theta)
        low = np.minimum(1.0, np.minimum(theta, 1.0) ** (self.beta - self.eps0))
        high = (0.5 * (1.0 + np.maximum(theta, 1.0))) ** (5.0 / 3.0 - self.eps0)
        return self.mobility0 * np.where(theta < 1.0, low, high)

    def mobility_matrix(self, c, theta):
        """Mobility matrix ``M(theta) P_ell``, shape ``(L, L, ...)``."""
        return scaled_projector(self.mobility_scalar(theta), self.L)

    def mobility_apply(self, c, theta, x):
        """``mobility_matrix(c, theta) @ x`` along axis 0 without forming the matrix."""
        return self.mobility_scalar(theta) * project_ell(x, axis=0)

    def _thermo_amplitude_sq(self, theta):
        theta = _positive("temperature", theta)
        M = self.mobility_scalar(theta)
        amp = M * np.minimum(theta ** (self.beta + self.eps0), theta)
        cap = self.mobility0 * theta ** (2.0 - 2.0 * self.beta + self.eps0)
        return np.where(theta < 1.0, np.minimum(amp, cap), amp)

    def thermo_vector(self, c, theta):
        """Thermo-diffusion vector ``m``, shape ``(L, ...)``, summing to zero."""
        theta = np.asarray(theta, dtype=float)
        if self.m_amp == 0.0:
            _positive("temperature", theta)
            return np.zeros((self.L,) + theta.shape)
        s = self.m_amp * np.sqrt(self._thermo_amplitude_sq(theta))
        out = np.zeros((self.L,) + theta.shape)
        out[0] = s
        out[1] = -s
        return out

    def heat_conductivity(self, c, theta):
        """``kappa0 (1 + theta^-beta)``."""
        theta = _positive("temperature", theta)
        return self.kappa0 * (1.0 + theta ** (-self.beta))

    # reactions

    @property
    def reaction_basis(self):
        """Orthonormal basis (columns) of the complement of ``span{ell, z}``."""
        return self._reaction_basis

    def reaction(self, c, theta, zeta_vec):
        """Saturated dissipative reaction ``-rho0 P_A zeta / (1 + |P_A zeta|)``."""
        zeta_vec = np.asarray(zeta_vec, dtype=float)
        B = self._reaction_basis
        if self.rho0 == 0.0 or B.shape[1] == 0:
            return np.zeros_like(zeta_vec)
        coef = np.tensordot(B, zeta_vec, axes=(0, 0))  # (k, ...)
        norm = np.sqrt(np.sum(coef * coef, axis=0))
        coef = coef * (-self.rho0 / (1.0 + norm))
        return np.tensordot(B, coef, axes=(1, 0))


def boundary_matrix(d, L):
    """Boundary transfer matrix ``d P_ell`` with exact zero row sums."""
    return scaled_projector(d, L)


@dataclass(frozen=True)
class BoundaryCoeffs:
    """Exterior data and transfer coefficients on one boundary segment.

    Every field is a scalar or a per-face profile along the segment
    (``zeta_G`` may be ``(L,)`` or ``(L, n)``).
    """

    theta_G: object = 1.0
    zeta_G: object = None
    phi_G: object = 0.0
    d: object = 0.0
    kappa_bar: object = 0.0
    lambda_G: object = 0.0
    gamma: object = 0.0

    def __post_init__(self):
        for name in ("d", "kappa_bar", "lambda_G", "gamma"):
            val = np.asarray(getattr(self, name), dtype=float)
            if np.any(~np.isfinite(val)) or np.any(val < 0):
                raise ConfigurationError(f"boundary coefficient {name} must be finite and nonnegative")
        th = np.asarray(self.theta_G, dtype=float)
        if np.any(~(th > 0)) or np.any(~np.isfinite(th)):
            raise ConfigurationError("exterior temperature theta_G must be positive")


# hypothesis validator ------------------------------------------------------

LOWER_FLOOR = 1e-8
UPPER_CEILING = 1e8


@dataclass(frozen=True)
class SamplerConfig:
    """Ranges and sizes for :func:`check_hypotheses`."""

    n_samples: int = 10000
    theta_min: float = 1e-3
    theta_max: float = 1e3
    d_min: float = 1e-3
    d_max: float = 1e3
    zeta_scale: float = 10.0
    seed: int = 0

    def validate(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 10:
            raise ConfigurationError("n_samples must be an integer >= 10")
        if not (0 < self.theta_min < self.theta_max < math.inf):
            raise ConfigurationError("need 0 < theta_min < theta_max < inf")
        if not (0 < self.d_min < self.d_max < math.inf):
            raise ConfigurationError("need 0 < d_min < d_max < inf")
        if not self.zeta_scale > 0:
            raise ConfigurationError("zeta_scale must be positive")


@dataclass
class Check:
    """One row of the validation report; ``margin >= 0`` means satisfied."""

    id: str
    description: str
    status: str
    margin: float
    witness: str = ""
    observed: float = math.nan

    @property
    def passed(self):
        return self.status != "fail"


@dataclass
class HypothesisReport:
    checks: list

    @property
    def passed(self):
        return all(ch.passed for ch in self.checks)

    def failures(self):
        return [ch for ch in self.checks if not ch.passed]

    def to_text(self):
        width = max(len(ch.id) for ch in self.checks)
        lines = []
        for ch in self.checks:
            lines.append(
                f"{ch.id:<{width}}  {ch.status.upper():<4}  margin={ch.margin:.17g}  "
                f"observed={ch.observed:.17g}  {ch.description}"
                + (f"  witness: {ch.witness}" if ch.witness else "")
            )
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "pass", "margin", "observed", "witness", "description"])
        for ch in self.checks:
            w.writerow([ch.id, ch.status, f"{ch.margin:.17g}", f"{ch.observed:.17g}", ch.witness, ch.description])
        return buf.getvalue()


def _fmt(x):
    return np.array2string(np.atleast_1d(np.asarray(x, dtype=float)), precision=17, separator=" ")


class _Collector:
    def __init__(self):
        self.checks = []

    def exact(self, cid, desc, err, tol, witness_fn):
        """Identity check: ``err`` (array, >= 0) must stay below ``tol`` (scalar or array)."""
        slack = tol - err
        k = int(np.argmin(slack))
        margin = float(np.ravel(slack)[k])
        self.checks.append(
            Check(cid, desc, "pass" if margin >= 0 else "fail", margin, witness_fn(k), float(np.max(err)))
        )

    def lower_const(self, cid, desc, ratio, witness_fn):
        """Existential lower constant: observed ``min(ratio)`` must be positive."""
        k = int(np.argmin(ratio))
        obs = float(np.ravel(ratio)[k])
        ok = math.isfinite(obs) and obs > LOWER_FLOOR
        self.checks.append(Check(cid, desc, "pass" if ok else "fail", obs - LOWER_FLOOR, witness_fn(k), obs))

    def upper_const(self, cid, desc, ratio, witness_fn):
        """Existential upper constant: observed ``max(ratio)`` must be finite."""
        r = np.where(np.isnan(ratio), np.inf, ratio)
        k = int(np.argmax(r))
        obs = float(np.ravel(r)[k])
        ok = math.isfinite(obs) and obs < UPPER_CEILING
        self.checks.append(Check(cid, desc, "pass" if ok else "fail", UPPER_CEILING - obs, witness_fn(k), obs))

    def param(self, cid, desc, margin, observed):
        self.checks.append(Check(cid, desc, "pass" if margin >= 0 else "fail", float(margin), "", float(observed)))

    def skip(self, cid, desc, why):
        self.checks.append(Check(cid, desc, "skip", math.nan, why))


def _sample_simplex(rng, n, L):
    a = rng.dirichlet(np.ones(L), size=n // 2)
    b = rng.dirichlet(np.full(L, 0.2), size=n - n // 2)
    c = np.maximum(np.vstack([a, b]), 1e-12)
    return (c / c.sum(axis=1, keepdims=True)).T


def _simplex_vertices(L, eta=1e-12):
    c = np.full((L, L), eta)
    np.fill_diagonal(c, 1.0 - (L - 1) * eta)
    return c


def _sample_strain(rng, n, d_min, d_max, dim=3):
    A = rng.standard_normal((n, dim, dim))
    D = 0.5 * (A + np.swapaxes(A, -1, -2))
    D -= np.trace(D, axis1=-2, axis2=-1)[:, None, None] * np.eye(dim) / dim
    norm = np.sqrt(np.sum(D * D, axis=(-2, -1)))
    target = np.exp(rng.uniform(math.log(d_min), math.log(d_max), n))
    return D * (target / norm)[:, None, None]


def check_hypotheses(model, bc=None, sampler=None, grid=None, state=None):
    """Certify a model and boundary data against the structural hypotheses by sampling.

    Parameters
    ----------
    model : MaterialModel
    bc : mapping of segment name to BoundaryCoeffs, or BoundarySpec, optional
        Boundary data for the boundary hypotheses; skipped when absent.
    sampler : SamplerConfig, optional
    grid : Grid, optional
        Needed to integrate boundary profiles and to check an initial state.
    state : FieldState, optional
        Initial data to check for admissibility.

    Returns
    -------
    HypothesisReport
    """
    sampler = sampler or SamplerConfig()
    sampler.validate()
    rng = np.random.default_rng(sampler.seed)
    n, L = int(sampler.n_samples), model.L
    out = _Collector()

    c = _sample_simplex(rng, n, L)
    lt = rng.uniform(math.log(sampler.theta_min), math.log(sampler.theta_max), n)
    lt[:2] = math.log(sampler.theta_min), math.log(sampler.theta_max)
    theta = np.exp(lt)
    zvec = model.z_array

    def at(*arrs):
        def w(k):
            parts = []
            for name, a in arrs:
                a = np.asarray(a)
                parts.append(f"{name}={_fmt(a[..., k] if a.ndim > 1 and name in ('c', 'zeta', 'w', 'x') else a[k])}")
            return "; ".join(parts)

        return w

    # H1 reactions
    zeta_s = rng.standard_normal((L, n)) * sampler.zeta_scale
    r = model.reaction(c, theta, zeta_s)
    rnorm = np.sqrt(np.sum(r * r, axis=0))
    wit = at(("zeta", zeta_s), ("theta", theta))
    out.exact("H1.bounded", "|r| <= rho0", rnorm, model.rho0 * (1 + 1e-12) + 1e-300, wit)
    out.exact("H1.dissipative", "zeta . r <= 0", np.maximum(np.sum(zeta_s * r, axis=0), 0.0), 1e-12 * (1 + rnorm * np.abs(zeta_s).sum(axis=0)), wit)
    out.exact("H1.mass", "ell . r = 0", np.abs(r.sum(axis=0)), 1e-15 * (1 + rnorm), wit)
    out.exact("H1.charge", "z . r = 0", np.abs(np.tensordot(zvec, r, axes=(0, 0))), 1e-15 * (1 + rnorm) * (1 + np.abs(zvec).max()), wit)

    # H2 stress
    out.param("H2.exponent", "r > 1", model.r_exponent - 1.0, model.r_exponent)
    cs = np.hstack([c, _simplex_vertices(L)])
    ts = np.concatenate([theta, np.full(L, math.sqrt(sampler.theta_min * sampler.theta_max))])
    m_s = cs.shape[1]
    D1 = _sample_strain(rng, m_s, sampler.d_min, sampler.d_max)
    D2 = _sample_strain(rng, m_s, sampler.d_min, sampler.d_max)
    S1 = model.stress(cs, ts, D1)
    S2 = model.stress(cs, ts, D2)
    n1 = np.sqrt(np.sum(D1 * D1, axis=(-2, -1)))
    wit_s = at(("c", cs), ("theta", ts), ("|D|", n1))
    S0 = model.stress(cs, ts, np.zeros_like(D1))
    out.exact("H2.zero", "S(c, theta, 0) = 0", np.abs(S0).max(axis=(-2, -1)), 0.0, wit_s)
    out.exact("H2.symmetric", "S symmetric", np.abs(S1 - np.swapaxes(S1, -1, -2)).max(axis=(-2, -1)), 1e-14 * (1 + np.abs(S1).max(axis=(-2, -1))), wit_s)
    Dc = _sample_strain(rng, m_s, 1.0, max(sampler.d_max, 1.0 + 1e-9))
    nc = np.sqrt(np.sum(Dc * Dc, axis=(-2, -1)))
    ratio = np.sum(model.stress(cs, ts, Dc) * Dc, axis=(-2, -1)) / nc**model.r_exponent
    out.lower_const("H2.coercive", "S:D >= C1 |D|^r - C2 (observed C1 over |D| >= 1)", ratio,
                    at(("c", cs), ("theta", ts), ("|D|", nc)))
    growth = np.sqrt(np.sum(S1 * S1, axis=(-2, -1))) / (1.0 + n1 ** (model.r_exponent - 1.0))
    out.upper_const("H2.growth", "|S| <= C2 (1 + |D|^(r-1)) (observed C2)", growth, wit_s)
    mono = np.sum((S1 - S2) * (D1 - D2), axis=(-2, -1))
    scale = np.sqrt(np.sum(S1**2 + S2**2, axis=(-2, -1))) * np.sqrt(np.sum(D1**2 + D2**2, axis=(-2, -1)))
    out.exact("H2.monotone", "(S(D1) - S(D2)):(D1 - D2) >= 0", np.maximum(-mono, 0.0), 1e-12 * (1 + scale), wit_s)

    # H3 mobility and thermo-diffusion
    out.param("H3.eps0", "eps0 > 0", model.eps0, model.eps0)
    Mm = model.mobility_matrix(c, theta)
    wit_t = at(("c", c), ("theta", theta))
    mmax = np.abs(Mm).max(axis=(0, 1))
    out.exact("H3.symmetric", "mobility matrix symmetric", np.abs(Mm - np.swapaxes(Mm, 0, 1)).max(axis=(0, 1)), 1e-15 * (1 + mmax), wit_t)
    out.exact("H3.rowsum", "column and row sums of the mobility matrix vanish",
              np.maximum(np.abs(Mm.sum(axis=0)).max(axis=0), np.abs(Mm.sum(axis=1)).max(axis=0)), 1e-15 * (1 + mmax), wit_t)
    w = rng.standard_normal((L, n))
    Ms = model.mobility_scalar(theta)
    form = np.einsum("in,ijn,jn->n", w, Mm, w)
    pw = project_ell(w, axis=0)
    pw2 = np.sum(pw * pw, axis=0)
    ratio_form = form / (Ms * pw2)
    wit_w = at(("w", w), ("theta", theta))
    out.lower_const("H3.form_lower", "w.Mw >= C1 M(theta) |P w|^2", ratio_form, wit_w)
    out.upper_const("H3.form_upper", "w.Mw <= C2 M(theta) |P w|^2", ratio_form, wit_w)
    ell_img = np.abs(np.einsum("ijn,j->in", Mm, np.ones(L))).max(axis=0)
    out.exact("H3.kernel", "M ell = 0", ell_img, 1e-15 * (1 + mmax), wit_t)
    tgrid = np.geomspace(sampler.theta_min, sampler.theta_max, 2001)
    wit_g = at(("theta", tgrid))
    Mg = model.mobility_scalar(tgrid)
    out.lower_const("H3.M_lower", "M(theta) >= C1 min(1, theta^(beta-eps0))",
                    Mg / np.minimum(1.0, tgrid ** (model.beta - model.eps0)), wit_g)
    out.upper_const("H3.M_upper", "M(theta) <= C (1+theta)^(5/3-eps0)", Mg / (1.0 + tgrid) ** (5.0 / 3.0 - model.eps0), wit_g)
    mv = model.thermo_vector(c, theta)
    mv_norm = np.sqrt(np.sum(mv * mv, axis=0))
    out.exact("H3.m_sum", "sum_i m_i = 0", np.abs(mv.sum(axis=0)), 1e-15 * (1 + mv_norm), wit_t)
    cg = np.full((L, tgrid.size), 1.0 / L)
    mg = model.thermo_vector(cg, tgrid)
    m2 = np.sum(mg * mg, axis=0)
    env = np.where(
        tgrid < 1.0,
        np.minimum(Mg * tgrid ** (-model.beta + model.eps0), tgrid ** (-2.0 * (model.beta - 1.0) + model.eps0)),
        Mg * tgrid,
    )
    out.upper_const("H3.m_envelope", "|m|^2 <= C2 * envelope(theta)", m2 / env, wit_g)

    # H4 conductivity
    out.param("H4.beta_range", "0 <= beta <= 2", min(model.beta, 2.0 - model.beta), model.beta)
    kr = model.heat_conductivity(cg, tgrid) / (1.0 + tgrid ** (-model.beta))
    out.lower_const("H4.lower", "kappa >= C1 (1 + theta^-beta)", kr, wit_g)
    out.upper_const("H4.upper", "kappa <= C2 (1 + theta^-beta)", kr, wit_g)

    # H5 entropy
    x = rng.standard_normal((L, n))
    xs = 1e-4 * c * x / np.abs(x).max(axis=0)
    q = -(entropy_c_increment(c, xs) + entropy_c_increment(c, -xs)) / np.sum(xs * xs, axis=0)
    out.lower_const("H5.sc_concave", "-x.Hess(s_c)x >= C |x|^2 (finite differences)", q, at(("c", c)))
    zc = zeta(c)
    K = np.abs(zc).max(axis=0)
    out.exact("H5.min_principle", "|zeta| <= K implies c_i >= exp(-K)",
              np.maximum(np.exp(-K) - c.min(axis=0), 0.0), 1e-15, at(("c", c)))
    eg = np.geomspace(1e-6, 1e6, 4001)
    se = entropy_e(eg)
    sec = (se[2:] - se[1:-1]) / (eg[2:] - eg[1:-1]) - (se[1:-1] - se[:-2]) / (eg[1:-1] - eg[:-2])
    out.exact("H5.se_concave", "s_e concave (second differences <= 0)", np.maximum(sec, 0.0), 1e-14, at(("e", eg[1:-1])))
    th_e = theta_of_e(eg)
    out.exact("H5.se_increasing", "theta(e) > 0 and increasing", np.maximum(-np.diff(th_e), 0.0), 0.0, at(("e", eg[1:])))
    d1, d2 = entropy_e_derivatives(eg)
    hi = eg > 1.0
    rse = -d2[hi] / d1[hi] ** 2
    out.lower_const("H5.se_ratio_lower", "-s_e''/s_e'^2 >= C1 for e > 1", rse, at(("e", eg[hi])))
    out.upper_const("H5.se_ratio_upper", "-s_e''/s_e'^2 <= C2 for e > 1", rse, at(("e", eg[hi])))
    e0 = np.geomspace(1e-2, 1e-14, 13)
    s0 = entropy_e(e0)
    p1, p2 = entropy_e_derivatives(e0)
    rat0 = -p2 / p1**2
    trend = min(float(np.min(-np.diff(s0))), float(np.min(np.diff(p1))), float(np.min(np.diff(rat0))))
    grows = min(float(p1[-1]), float(rat0[-1]), 1.0 / float(s0[-1])) - 1e3
    out.param("H5.se_limits", "1/s_e, s_e', -s_e''/s_e'^2 blow up as e -> 0", min(trend, grows), float(rat0[-1]))
    ratio_te = th_e[hi] / eg[hi]
    out.lower_const("H5.theta_lower", "theta(e)/e >= C1 for e > 1", ratio_te, at(("e", eg[hi])))
    out.upper_const("H5.theta_upper", "theta(e)/e <= C2 for e > 1", ratio_te, at(("e", eg[hi])))
    eg0 = np.concatenate([[0.0], eg])
    out.upper_const("H5.e_minus_2s", "e - 2 s_e(e) + C2 >= 0 (observed C2)", 2.0 * entropy_e(eg0) - eg0, at(("e", eg0)))

    # growth bounds on the chemical potential
    out.upper_const("Z.upper", "zeta_i <= C on the simplex", zc.max(axis=0), at(("c", c)))
    out.upper_const("Z.inverse", "|zeta_i| <= C / c_i", (np.abs(zc) * c).max(axis=0), at(("c", c)))
    pz = project_ell(zc, axis=0)
    out.upper_const("Z.projected", "|zeta| <= C (1 + |P zeta|)",
                    np.sqrt(np.sum(zc * zc, axis=0)) / (1.0 + np.sqrt(np.sum(pz * pz, axis=0))), at(("c", c)))

    # H6 initial data
    if state is None or grid is None:
        out.skip("H6.initial", "initial data admissible", "no initial state supplied")
    else:
        from .grid import div as _div

        cmin = float(state.c.min())
        drift = float(np.abs(state.c.sum(axis=0) - 1.0).max())
        emin = float(state.e.min())
        dv = float(np.abs(_div(grid, state.u, state.v)).max()) if grid.dim == 2 else 0.0
        out.param("H6.c_positive", "initial c_i > 0", cmin, cmin)
        out.param("H6.simplex", "initial sum c_i = 1", 1e-12 - drift, drift)
        out.param("H6.e_positive", "initial e > 0", emin, emin)
        out.param("H6.div_free", "initial div v = 0", 1e-10 - dv, dv)

    # H7-H10 boundary data
    if bc is None:
        for cid in ("H7.gamma", "H8.d", "H9.kappa", "H10.lambda"):
            out.skip(cid, "boundary data", "no boundary data supplied")
        return HypothesisReport(out.checks)
    segs = bc.segments if hasattr(bc, "segments") else dict(bc)

    def gather(name):
        vals, integ = [], 0.0
        for seg, co in segs.items():
            a = np.atleast_1d(np.asarray(getattr(co, name), dtype=float))
            vals.append(a)
            if grid is not None:
                a_full = np.broadcast_to(a, (grid.segment_size(seg),))
                integ += grid.face_area(seg) * float(a_full.sum())
            else:
                integ += float(a.mean())
        return np.concatenate(vals), integ

    gam, _ = gather("gamma")
    out.param("H7.gamma", "0 <= gamma <= C2", float(gam.min()), float(gam.max()))
    dv_, dint = gather("d")
    out.param("H8.d_nonneg", "d >= 0", float(dv_.min()), float(dv_.min()))
    out.param("H8.d_positive", "boundary integral of d > 0", dint - 1e-300, dint)
    Db = boundary_matrix(dv_, L)
    rs = np.abs(Db.sum(axis=0)).max()
    out.param("H8.rowsum", "boundary matrix row sums vanish", 1e-15 * (1 + float(np.abs(Db).max())) - float(rs), float(rs))
    thg, _ = gather("theta_G")
    out.param("H8.theta_G", "theta_G > 0", float(thg.min()), float(thg.min()))
    kb, kint = gather("kappa_bar")
    out.param("H9.kappa_nonneg", "kappa_bar >= 0", float(kb.min()), float(kb.min()))
    out.param("H9.kappa_positive", "boundary integral of kappa_bar > 0", kint - 1e-300, kint)
    lam, lint = gather("lambda_G")
    out.param("H10.lambda_nonneg", "lambda >= 0", float(lam.min()), float(lam.min()))
    out.param("H10.lambda_positive", "boundary integral of lambda > 0", lint - 1e-300, lint)
    return HypothesisReport(out.checks)
