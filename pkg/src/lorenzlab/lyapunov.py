"""Lyapunov candidates built from a computed corrector, with drift checks.

The radial functional is

    V0(r, theta, z) = e^(-kappa r) (1 - kappa g(theta, z) + delta e^(eps z^2))

built around the corrector g of the axis dynamics, and the full-system
candidate adds V1 = exp(cbar |U|^2), a quadratic exponential in the original
coordinates that dominates far from the invariant axis.  select_constants
picks (eps, kappa, delta, cbar) from the measured growth rate and the
corrector; the verify_* routines then sample the drift inequalities

    L1 V0 <= -d (1 + z^2) V0            (axis system),
    L V   <= K - c V,   V = V0 + V1     (full system),

on compact lattices and fit the best constants.  These routines are
samplers, not provers: every report records the lattice it covered, and a
pass means the inequality held at each sampled point.

A numerical note on the first inequality.  g is known only as the solution
of the discretised corrector equation, so the continuum generator applied to
its interpolant carries an O(h) consistency error that is orders of
magnitude larger than the |kappa|-sized signal in L1 V0.  The headline
margin therefore substitutes the corrector equation L0 g = lam - F for the
g-transport term (the solver enforces that equation to far better than 1e-8
relative), which is also the algebraic step the drift bound rests on.  The
direct interpolant evaluation is still computed and reported as diagnostics
(``d_fit_direct``, ``corrector_residual_*``) so the discretisation error
stays visible instead of silently deciding the verdict.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .core import DerivedConsts, Params, derive_constants
from .errors import (
    ChartMismatchError,
    DegenerateLambdaError,
    DomainError,
    InvalidParameterError,
)
from .fokker_planck import Grid2D, GridFunction
from .transforms import Chart, GeneratorOp, Partials, State, apply_generator, reduce_angle

__all__ = [
    "LyapConstants",
    "DriftReport",
    "CorrectorInterpolant",
    "make_g_interpolator",
    "select_constants",
    "eval_V0",
    "v1_and_drift",
    "default_drift_lattice",
    "default_full_lattice",
    "verify_drift_V0",
    "verify_drift_full",
]


@dataclass
class LyapConstants:
    """Constants of the Lyapunov candidates.

    eps_alpha, kappa and delta parametrise V0; c_bar parametrises V1.
    c_alpha is the measured sup of (|g| + |dg/dz|) e^(-eps z^2 / 2) on the
    corrector grid, lam and alpha record the inputs the constants were
    selected for, and d / K start out None and are filled in by the drift
    verifiers.  select_constants guarantees delta = |kappa|^(3/2) and
    sign(kappa) = sign(lam); instances built by hand (degenerate cases in
    tests, for example) may break that tie deliberately.
    """

    eps_alpha: float
    Gamma: float
    kappa: float
    delta: float
    c_alpha: float
    c_bar: float
    lam: float
    alpha: float
    d: Optional[float] = None
    K: Optional[float] = None

    def __post_init__(self) -> None:
        for name in ("eps_alpha", "Gamma", "kappa", "delta", "c_alpha", "c_bar"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise InvalidParameterError(f"{name} must be finite, got {v!r}")
        if self.eps_alpha < 0:
            raise InvalidParameterError("eps_alpha must be nonnegative")
        if self.Gamma <= 0:
            raise InvalidParameterError("Gamma must be positive")
        if self.delta < 0:
            raise InvalidParameterError("delta must be nonnegative")


@dataclass
class DriftReport:
    """Outcome of sampling a drift inequality on a lattice.

    worst_margin is the largest value of the normalised drift ratio over the
    lattice (L1 V0 / ((1+z^2) V0), or LV/V on the outer shell for the full
    system); the inequality holds at every sampled point exactly when it is
    negative, so ``passed`` mirrors its sign.  ``fitted`` carries the
    constants extracted from the sweep (d, or c and K), ``diagnostics`` the
    secondary measurements described in the verifier docstrings, and
    ``lattice`` the bounds and resolution actually covered.
    """

    lattice: dict
    worst_margin: float
    worst_point: tuple
    passed: bool
    fitted: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "lattice": _jsonable(self.lattice),
            "worst_margin": _jsonable(self.worst_margin),
            "worst_point": _jsonable(self.worst_point),
            "passed": bool(self.passed),
            "fitted": _jsonable(self.fitted),
            "diagnostics": _jsonable(self.diagnostics),
        }
        return json.dumps(payload, sort_keys=True, indent=2)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    return obj


class CorrectorInterpolant:
    """Bicubic interpolant of the corrector, periodic across theta = +-pi/2.

    The spline is fitted on the nodal values with four wrapped columns padded
    onto each theta side, so evaluation near the seam stays smooth.  value,
    dz and dzz come straight from the spline; dtheta uses a centered
    difference of the spline with step h_theta/2, keeping the theta
    derivative consistent with the interpolated values the verifiers
    actually use.  theta is reduced modulo pi, so any angle is accepted;
    z outside the nodal range raises DomainError.
    """

    _PAD = 4

    def __init__(self, g: GridFunction):
        grid = g.grid
        if grid.n_theta <= 2 * self._PAD:
            raise InvalidParameterError(
                f"need more than {2 * self._PAD} theta cells to wrap the spline"
            )
        th = grid.theta_centers()
        pad = self._PAD
        th_ext = np.concatenate([th[-pad:] - math.pi, th, th[:pad] + math.pi])
        vals_ext = np.concatenate(
            [g.values[-pad:], g.values, g.values[:pad]], axis=0
        )
        self.grid = grid
        self._z_lo = float(grid.z_centers()[0])
        self._z_hi = float(grid.z_centers()[-1])
        self._spline = RectBivariateSpline(th_ext, grid.z_centers(), vals_ext, kx=3, ky=3)

    @property
    def z_range(self) -> Tuple[float, float]:
        return self._z_lo, self._z_hi

    def _prep(self, theta, z):
        th = reduce_angle(np.asarray(theta, dtype=float))
        zz = np.asarray(z, dtype=float)
        if np.any(zz < self._z_lo) or np.any(zz > self._z_hi):
            raise DomainError(
                f"z outside the corrector grid [{self._z_lo:g}, {self._z_hi:g}]"
            )
        return th, zz

    def value(self, theta, z):
        th, zz = self._prep(theta, z)
        return self._spline(th, zz, grid=False)

    def dz(self, theta, z):
        th, zz = self._prep(theta, z)
        return self._spline(th, zz, dy=1, grid=False)

    def dzz(self, theta, z):
        th, zz = self._prep(theta, z)
        return self._spline(th, zz, dy=2, grid=False)

    def dtheta(self, theta, z):
        th, zz = self._prep(theta, z)
        h = 0.5 * self.grid.h_theta
        return (self._spline(th + h, zz, grid=False)
                - self._spline(th - h, zz, grid=False)) / (2.0 * h)


def make_g_interpolator(g: GridFunction) -> CorrectorInterpolant:
    """Wrap a nodal corrector in the interpolant the verifiers consume."""
    return CorrectorInterpolant(g)


def select_constants(lam: float, alpha: float, c: DerivedConsts,
                     g: GridFunction, grid: Optional[Grid2D] = None) -> LyapConstants:
    """Pick the V0 / V1 constants for a computed growth rate and corrector.

    eps_alpha = min(gamma/(2 Gamma), beta nu^2 sigma^3 chi^4 / (16 alpha^2))
    with Gamma = alpha^2 + 2 gamma zstar^2; c_alpha is measured on the grid;
    kappa takes the sign of lam and half the smallest of the four ceilings

        lam^2/(64 Gamma^2),  eps (gamma^Gamma)/16,
        (eps (gamma^Gamma)/(16 c_alpha))^2,  1/c_alpha^4

    (the halving keeps the verified margins robust to interpolation error);
    delta = |kappa|^(3/2) and c_bar = beta/(2 alpha_hat^2).  d and K are
    left None for the drift verifiers to fit.
    """
    lam = float(lam)
    alpha = float(alpha)
    if lam == 0.0 or not math.isfinite(lam):
        raise DegenerateLambdaError(
            "growth rate of exactly zero gives kappa no sign to copy"
        )
    if alpha <= 0.0:
        raise InvalidParameterError("alpha must be positive")
    if grid is None:
        grid = g.grid
    elif (grid.n_theta, grid.n_z) != (g.grid.n_theta, g.grid.n_z) or \
            (grid.z_lo, grid.z_hi) != (g.grid.z_lo, g.grid.z_hi):
        raise InvalidParameterError("grid does not match the corrector's grid")

    gamma = c.gamma
    big_gamma = alpha * alpha + 2.0 * gamma * c.zstar * c.zstar
    eps = min(
        gamma / (2.0 * big_gamma),
        c.beta * c.nu ** 2 * c.sigma ** 3 * c.chi ** 4 / (16.0 * alpha * alpha),
    )

    z = grid.z_centers()[np.newaxis, :]
    gz = np.gradient(g.values, grid.z_centers(), axis=1)
    c_alpha = float(np.max((np.abs(g.values) + np.abs(gz))
                           * np.exp(-0.5 * eps * z * z)))

    small = min(gamma, big_gamma)
    ceilings = (
        lam * lam / (64.0 * big_gamma * big_gamma),
        eps * small / 16.0,
        (eps * small / (16.0 * c_alpha)) ** 2,
        1.0 / c_alpha ** 4,
    )
    kappa = 0.5 * min(ceilings) * math.copysign(1.0, lam)
    delta = abs(kappa) ** 1.5

    alpha_hat = c.alpha_hat_of(alpha)
    c_bar = c.beta / (2.0 * alpha_hat * alpha_hat)

    return LyapConstants(
        eps_alpha=eps,
        Gamma=big_gamma,
        kappa=kappa,
        delta=delta,
        c_alpha=c_alpha,
        c_bar=c_bar,
        lam=lam,
        alpha=alpha,
    )


def eval_V0(state, g_interp: CorrectorInterpolant, k: LyapConstants):
    """Value and partial derivatives of V0 at a polar point.

    ``state`` is a POLAR State or a plain (r, theta, z) triple; entries may
    be scalars or broadcastable arrays.  Returns (value, Partials) with the
    slot layout the polar-chart generator expects (f_x = d/dr,
    f_y = d/dtheta).  Points with z outside the corrector grid raise
    DomainError.
    """
    if isinstance(state, State):
        if state.chart is not Chart.POLAR:
            raise ChartMismatchError("eval_V0 expects polar coordinates")
        r, theta, z = state.coords
    else:
        r, theta, z = state
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)

    g = g_interp.value(theta, z)
    gth = g_interp.dtheta(theta, z)
    gz = g_interp.dz(theta, z)
    gzz = g_interp.dzz(theta, z)

    kap, dlt, eps = k.kappa, k.delta, k.eps_alpha
    bump = np.exp(eps * z * z)
    weight = 1.0 - kap * g + dlt * bump
    amp = np.exp(-kap * r)

    value = amp * weight
    f_r = -kap * value
    f_th = amp * (-kap * gth)
    f_z = amp * (-kap * gz + 2.0 * dlt * eps * z * bump)
    f_zz = amp * (-kap * gzz + dlt * (2.0 * eps + 4.0 * eps * eps * z * z) * bump)

    if value.ndim == 0:
        return float(value), Partials(float(value), float(f_r), float(f_th),
                                      float(f_z), float(f_zz))
    return value, Partials(value, f_r, f_th, f_z, f_zz)


def v1_and_drift(X, Y, Z, p: Params, c_bar: float):
    """V1 = exp(c_bar |U|^2) and its drift under the original dynamics.

    |U|^2 = X^2 + Y^2 + (Z - sigma - rho)^2.  The drift is the exact
    closed form

        2 c_bar V1 (ahat^2/2 - sigma X^2 - Y^2
                    - (beta - c_bar ahat^2) w^2 - beta (sigma + rho) w)

    with w = Z - sigma - rho, an identity that holds for every c_bar.
    Elementwise on arrays.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    w = Z - p.sigma - p.rho
    u2 = X * X + Y * Y + w * w
    v1 = np.exp(c_bar * u2)
    a2 = p.alpha_hat * p.alpha_hat
    quad = (0.5 * a2 - p.sigma * X * X - Y * Y
            - (p.beta - c_bar * a2) * w * w
            - p.beta * (p.sigma + p.rho) * w)
    drift = 2.0 * c_bar * v1 * quad
    if v1.ndim == 0:
        return float(v1), float(drift)
    return v1, drift


def _shrunk_z(grid: Grid2D, n_z: int) -> np.ndarray:
    z0 = float(grid.z_centers()[0])
    z1 = float(grid.z_centers()[-1])
    margin = 0.05 * (z1 - z0)
    return np.linspace(z0 + margin, z1 - margin, n_z)


def default_drift_lattice(grid: Grid2D, n_theta: int = 129, n_z: int = 257):
    """Default test lattice for verify_drift_V0.

    r in {-1, 0, 1} (the drift ratio is r-free, three values detect bugs),
    theta uniform over a period, and z spanning the corrector grid shrunk by
    10% to stay clear of boundary-condition pollution.
    """
    r_vals = np.array([-1.0, 0.0, 1.0])
    th_vals = np.linspace(-math.pi / 2, math.pi / 2, n_theta, endpoint=False)
    return r_vals, th_vals, _shrunk_z(grid, n_z)


def default_full_lattice(grid: Grid2D, c: DerivedConsts, alpha: float,
                         n_xy: int = 32, n_z: int = 65):
    """Default (x, y, z) lattice for verify_drift_full.

    The x and y half-widths cover the region where the quadratic drift of V1
    can fail to be dissipative (scaled from the noise strength), with a
    floor so small alpha still exercises a nondegenerate box; even point
    counts keep the singular axis point x = y = 0 off the lattice.  z spans
    the corrector grid shrunk by 10%.
    """
    alpha_hat = c.alpha_hat_of(alpha)
    x_neut = (c.nu / c.chi) * alpha_hat / math.sqrt(2.0 * c.sigma)
    y_neut = c.nu * c.sigma * alpha_hat * (1.0 / math.sqrt(2.0)
                                           + 1.0 / math.sqrt(2.0 * c.sigma))
    x_half = max(4.0, 2.5 * x_neut)
    y_half = max(20.0, 1.5 * y_neut)
    n_xy = int(n_xy)
    if n_xy % 2:
        n_xy += 1
    x_vals = np.linspace(-x_half, x_half, n_xy)
    y_vals = np.linspace(-y_half, y_half, n_xy)
    return x_vals, y_vals, _shrunk_z(grid, n_z)


def _axis_drift_pieces(k: LyapConstants, c: DerivedConsts, alpha: float,
                       th: np.ndarray, z: np.ndarray, g_interp):
    """Shared fields of the axis drift at (theta, z): growth integrand F,
    the polynomial multiplying delta e^(eps z^2), the V0 weight, and the
    corrector values/derivative needed elsewhere."""
    eps, kap, dlt = k.eps_alpha, k.kappa, k.delta
    gamma, zstar = c.gamma, c.zstar
    g = g_interp.value(th, z)
    gz = g_interp.dz(th, z)
    bump = np.exp(eps * z * z)
    weight = 1.0 - kap * g + dlt * bump
    f_growth = -1.0 + 0.5 * z * np.sin(2.0 * th)
    poly = (alpha * alpha * eps + 2.0 * gamma * eps * zstar * z
            + 2.0 * eps * (alpha * alpha * eps - gamma) * z * z)
    # L1 V0 = e^(-kappa r) (-kappa F weight - kappa L0 g + delta bump poly);
    # with L0 g replaced by lam - F this collapses to the numerator below.
    numer = (kap * kap * f_growth * g - kap * k.lam
             + dlt * bump * (poly - kap * f_growth))
    return g, gz, bump, weight, f_growth, numer


def verify_drift_V0(k: LyapConstants, g_interp: CorrectorInterpolant,
                    grid3=None, c: Optional[DerivedConsts] = None,
                    alpha: Optional[float] = None) -> DriftReport:
    """Sample L1 V0 <= -d (1+z^2) V0 on a lattice and fit the best d.

    The headline margin evaluates the g-transport part of L1 V0 through the
    corrector equation L0 g = lam - F (exact for the solved g up to the
    linear-solver residual); on a pass the fitted d = -worst_margin is
    written back to k.d.  Diagnostics report the direct spline route and why
    it differs: ``d_fit_direct`` (the d the continuum generator on the
    interpolant would give), ``corrector_residual_max/p99/median``
    (|L0 g_spline - (lam - F)| statistics), ``r_spread_max`` (relative
    spread of the direct ratio across r, bug detector for the e^(-kappa r)
    factorisation), ``proof_shape_margin`` (margin against the sharper
    -(1/6)(kappa lam ^ gamma/4)(1 + delta eps z^2) shape), and
    ``dz_bound_const`` = sup |dV0/dz| / ((1+|z|) V0) together with its value
    on a twice-refined lattice and a grid-sensitivity flag.
    """
    if c is None or alpha is None:
        raise InvalidParameterError("verify_drift_V0 needs the derived "
                                    "constants and alpha it was built for")
    if grid3 is None:
        grid3 = default_drift_lattice(g_interp.grid)
    r_vals, th_vals, z_vals = (np.asarray(v, dtype=float) for v in grid3)
    th, z = np.meshgrid(th_vals, z_vals, indexing="ij")

    g, gz, bump, weight, f_growth, numer = _axis_drift_pieces(
        k, c, alpha, th, z, g_interp)
    denom = (1.0 + z * z) * weight
    ratio = numer / denom

    worst = float(np.max(ratio))
    flat = int(np.argmax(ratio))
    i_th, i_z = np.unravel_index(flat, ratio.shape)
    worst_point = (0.0, float(th[i_th, i_z]), float(z[i_th, i_z]))
    d_fit = -worst
    weight_ok = bool(np.min(weight) > 0.0)
    passed = weight_ok and worst < 0.0 and math.isfinite(worst)

    # Direct route: continuum generator on the interpolant, swept over r.
    ratios_dir = []
    for r in r_vals:
        value, parts = eval_V0((np.full_like(th, r), th, z), g_interp, k)
        point = State(Chart.POLAR, (np.full_like(th, r), th, z))
        l1 = apply_generator(GeneratorOp.L1, point, parts, c, alpha)
        ratios_dir.append(l1 / ((1.0 + z * z) * value))
    ratios_dir = np.array(ratios_dir)
    d_direct = -float(np.max(ratios_dir))
    spread = np.max(ratios_dir, axis=0) - np.min(ratios_dir, axis=0)
    scale = max(float(np.max(np.abs(ratios_dir))), 1e-300)
    r_spread = float(np.max(spread)) / scale

    gth = g_interp.dtheta(th, z)
    gzz = g_interp.dzz(th, z)
    l0_g = apply_generator(GeneratorOp.L0, (th, z),
                           Partials(g, gth, 0.0, gz, gzz), c, alpha)
    resid = np.abs(l0_g - (k.lam - f_growth))

    proof_rate = (min(k.kappa * k.lam, c.gamma / 4.0)) / 6.0
    proof_margin = float(np.max(
        numer / weight + proof_rate * (1.0 + k.delta * k.eps_alpha * z * z)))

    def dz_bound(th_a, z_a):
        _, _, bmp, wgt, _, _ = _axis_drift_pieces(k, c, alpha, th_a, z_a, g_interp)
        gz_a = g_interp.dz(th_a, z_a)
        f_z = -k.kappa * gz_a + 2.0 * k.delta * k.eps_alpha * z_a * bmp
        return float(np.max(np.abs(f_z) / ((1.0 + np.abs(z_a)) * wgt)))

    dz_const = dz_bound(th, z)
    th_f, z_f = np.meshgrid(
        np.linspace(th_vals[0], th_vals[-1], 2 * th_vals.size),
        np.linspace(z_vals[0], z_vals[-1], 2 * z_vals.size),
        indexing="ij")
    dz_const_fine = dz_bound(th_f, z_f)
    dz_sensitive = abs(dz_const_fine - dz_const) > 0.1 * max(dz_const, 1e-300)

    if passed:
        k.d = d_fit

    lattice = {
        "r": [float(v) for v in r_vals],
        "theta": [float(th_vals[0]), float(th_vals[-1]), int(th_vals.size)],
        "z": [float(z_vals[0]), float(z_vals[-1]), int(z_vals.size)],
        "note": "compact sample of a global inequality",
    }
    diagnostics = {
        "d_fit_direct": d_direct,
        "corrector_residual_max": float(np.max(resid)),
        "corrector_residual_p99": float(np.percentile(resid, 99.0)),
        "corrector_residual_median": float(np.median(resid)),
        "r_spread_max": r_spread,
        "proof_shape_margin": proof_margin,
        "proof_shape_rate": proof_rate,
        "dz_bound_const": dz_const,
        "dz_bound_const_refined": dz_const_fine,
        "dz_bound_grid_sensitive": bool(dz_sensitive),
        "weight_min": float(np.min(weight)),
    }
    return DriftReport(
        lattice=lattice,
        worst_margin=worst,
        worst_point=worst_point,
        passed=passed,
        fitted={"d": d_fit},
        diagnostics=diagnostics,
    )


def verify_drift_full(k: LyapConstants, g_interp: CorrectorInterpolant,
                      lattice=None, p: Optional[Params] = None,
                      c: Optional[DerivedConsts] = None,
                      alpha: Optional[float] = None) -> DriftReport:
    """Sample LV <= K - cV for V = V0 + V1 on an (x, y, z) lattice.

    LV combines the axis drift of V0 (corrector equation substituted, as in
    verify_drift_V0), the feedback term -x(x + eta y) dV0/dz, and the exact
    closed form of the V1 drift carried through the time change.  c is
    fitted as the worst decay rate -LV/V over the outer shell
    s = x^2 + y^2 + (z - zstar)^2 >= max(s)/2 (inside the shell the V1 drift
    need not be dissipative, which is what K absorbs); K is then the largest
    value of LV + cV over the whole lattice, and both are written back to
    k.K / reported.  Passing means c > 0.

    When k.d is set, the report also samples the feedback-domination bound
    |x(x + eta y) dV0/dz| <= (d/2)(1+z^2) V on the disc
    x^2 + y^2 <= d/(2 c_dz max(3, eta^2)) around the axis
    (``feedback_margin``, nonpositive when it holds).
    """
    if p is None or c is None or alpha is None:
        raise InvalidParameterError("verify_drift_full needs the parameters, "
                                    "derived constants and alpha")
    ref = derive_constants(p)
    for name in ("chi", "gamma", "zstar"):
        if not math.isclose(getattr(ref, name), getattr(c, name),
                            rel_tol=1e-9, abs_tol=1e-12):
            raise InvalidParameterError(
                "derived constants do not match the parameters")
    if lattice is None:
        lattice = default_full_lattice(g_interp.grid, c, alpha)
    x_vals, y_vals, z_vals = (np.asarray(v, dtype=float) for v in lattice)

    xm, ym, zm = np.meshgrid(x_vals, y_vals, z_vals, indexing="ij")
    n2 = xm * xm + (xm + ym) * (xm + ym)
    if np.any(n2 == 0.0):
        raise DomainError("lattice touches the polar singularity x = y = 0")
    r = 0.5 * np.log(n2)
    th = reduce_angle(np.arctan2(xm, xm + ym))

    _, gz, bump, weight, _, numer = _axis_drift_pieces(
        k, c, alpha, th, zm, g_interp)
    amp = np.exp(-k.kappa * r)
    v0 = amp * weight
    l1_v0 = amp * numer
    dz_v0 = amp * (-k.kappa * gz + 2.0 * k.delta * k.eps_alpha * zm * bump)
    feedback = -xm * (xm + c.eta * ym) * dz_v0

    alpha_hat = c.alpha_hat_of(alpha)
    p_eff = Params(sigma=p.sigma, beta=p.beta, rho=p.rho, alpha_hat=alpha_hat)
    big_x = (c.chi / c.nu) * xm
    big_y = big_x + ym / (c.nu * c.sigma)
    big_z = (c.zstar - zm) / (c.chi * c.chi * c.sigma)
    v1, v1_drift = v1_and_drift(big_x, big_y, big_z, p_eff, k.c_bar)

    lv = l1_v0 + feedback + c.chi * v1_drift
    v = v0 + v1

    s = xm * xm + ym * ym + (zm - c.zstar) ** 2
    shell = s >= 0.5 * float(np.max(s))
    ratio_shell = lv[shell] / v[shell]
    worst = float(np.max(ratio_shell))
    c_fit = -worst
    idx_shell = np.argwhere(shell)
    i, j, l = idx_shell[int(np.argmax(ratio_shell))]
    worst_point = (float(xm[i, j, l]), float(ym[i, j, l]), float(zm[i, j, l]))

    offset = float(np.max(lv + c_fit * v))
    offset = max(offset, 0.0)
    passed = c_fit > 0.0 and math.isfinite(c_fit) and math.isfinite(offset)
    if passed:
        k.K = offset

    diagnostics = {
        "shell_fraction": float(np.mean(shell)),
        "lv_max_inside": float(np.max(lv[~shell])) if np.any(~shell) else None,
        "v1_center_drift": c.chi * 2.0 * k.c_bar * 0.5 * alpha_hat ** 2,
        "dz_v0_max": float(np.max(np.abs(dz_v0))),
    }

    if k.d is not None and k.d > 0.0:
        dz_scale = float(np.max(np.abs(dz_v0) / ((1.0 + np.abs(zm)) * v0)))
        disc2 = k.d / (2.0 * dz_scale * max(3.0, c.eta ** 2))
        radii = np.sqrt(disc2) * np.array([0.25, 0.5, 0.75, 1.0])
        phis = np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False)
        xs = np.concatenate([rr * np.cos(phis) for rr in radii])
        ys = np.concatenate([rr * np.sin(phis) for rr in radii])
        xs_m, zs_m = np.meshgrid(xs, z_vals, indexing="ij")
        ys_m = np.meshgrid(ys, z_vals, indexing="ij")[0]
        th_s = reduce_angle(np.arctan2(xs_m, xs_m + ys_m))
        _, gz_s, bump_s, weight_s, _, _ = _axis_drift_pieces(
            k, c, alpha, th_s, zs_m, g_interp)
        amp_s = np.exp(-k.kappa * 0.5 * np.log(
            xs_m * xs_m + (xs_m + ys_m) ** 2))
        dz_v0_s = amp_s * (-k.kappa * gz_s
                           + 2.0 * k.delta * k.eps_alpha * zs_m * bump_s)
        bx = (c.chi / c.nu) * xs_m
        by = bx + ys_m / (c.nu * c.sigma)
        bz = (c.zstar - zs_m) / (c.chi * c.chi * c.sigma)
        v1_s, _ = v1_and_drift(bx, by, bz, p_eff, k.c_bar)
        v_s = amp_s * weight_s + v1_s
        lhs = np.abs(xs_m * (xs_m + c.eta * ys_m) * dz_v0_s)
        rhs = 0.5 * k.d * (1.0 + zs_m * zs_m) * v_s
        diagnostics["feedback_margin"] = float(np.max(lhs - rhs))
        diagnostics["feedback_disc_radius"] = float(np.sqrt(disc2))
        diagnostics["dz_scale"] = dz_scale

    lattice_desc = {
        "x": [float(x_vals[0]), float(x_vals[-1]), int(x_vals.size)],
        "y": [float(y_vals[0]), float(y_vals[-1]), int(y_vals.size)],
        "z": [float(z_vals[0]), float(z_vals[-1]), int(z_vals.size)],
        "shell": "x^2 + y^2 + (z - zstar)^2 >= max/2",
        "note": "compact sample of a global inequality",
    }
    return DriftReport(
        lattice=lattice_desc,
        worst_margin=worst,
        worst_point=worst_point,
        passed=passed,
        fitted={"c": c_fit, "K": offset},
        diagnostics=diagnostics,
    )
