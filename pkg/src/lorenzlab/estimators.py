"""Four routes to the stability exponent.

The exponent is the ergodic average of F(theta, z) = -1 + z*sin(2*theta)/2
under the stationary law of the axis system.  Routes implemented here:

* :func:`estimate_lambda_mc` -- time average of F along simulated paths,
  confidence interval from batch means;
* :func:`estimate_lambda_growth` -- endpoint slope of the radial log
  coordinate of the linearised polar system;
* :func:`heuristic_lambda` -- Gaussian average of the frozen-z growth rate
  lambda_plus(z) = -1 + sqrt(z-1) for z > 1 (fast, slightly biased);
* :func:`asymptotic_lambda` -- closed-form small- and large-noise limits.

The discretised-generator route lives in :mod:`lorenzlab.fokker_planck` and
the excursion-ratio route in :mod:`lorenzlab.excursions`; both return the
same :class:`EstimateWithCI` shape.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import integrate

from .core import DerivedConsts, Params, derive_constants
from .errors import InvalidParameterError
from .sde import SimConfig, SystemKind, _drive_theta_z

__all__ = [
    "LambdaMethod",
    "Regime",
    "EstimateWithCI",
    "estimate_lambda_mc",
    "estimate_lambda_growth",
    "heuristic_lambda",
    "asymptotic_lambda",
    "default_burn_in",
    "N_TIME_BINS",
]

N_TIME_BINS = 4096


class LambdaMethod(Enum):
    MC = "mc"
    GROWTH = "growth"
    PDE = "pde"
    HEURISTIC = "heuristic"
    ASYMPTOTIC_SMALL = "asymptotic_small"
    ASYMPTOTIC_LARGE = "asymptotic_large"
    EXCURSION = "excursion"


class Regime(Enum):
    SMALL = "small"
    LARGE = "large"


@dataclass(frozen=True)
class EstimateWithCI:
    """A point estimate with a 95% confidence half-width.

    Deterministic methods report half_width 0.
    """

    value: float
    half_width: float
    method: LambdaMethod
    n_samples: int = 0
    seed: int = 0
    wall_time_s: float = 0.0

    def __post_init__(self) -> None:
        if self.half_width < 0.0:
            raise InvalidParameterError(
                f"half_width must be >= 0, got {self.half_width}")

    @property
    def lo(self) -> float:
        return self.value - self.half_width

    @property
    def hi(self) -> float:
        return self.value + self.half_width

    def excludes_zero(self) -> bool:
        return self.lo > 0.0 or self.hi < 0.0

    def to_json(self, alpha: float, c: DerivedConsts, **extra) -> str:
        doc = {
            "lambda": self.value,
            "ci": self.half_width,
            "method": self.method.value,
            "alpha": alpha,
            "alpha_hat": c.alpha_hat_of(alpha),
            "seed": self.seed,
            "n_samples": self.n_samples,
            "wall_time_s": self.wall_time_s,
        }
        doc.update(extra)
        return json.dumps(doc, sort_keys=True, indent=2)


def default_burn_in(c: DerivedConsts) -> float:
    """Several relaxation times of the z process, never less than 50."""
    return max(50.0, 20.0 / c.gamma)


def _batch_ci(bins: np.ndarray) -> tuple:
    """Mean and variance-of-mean from per-bin (sum F dt, sum dt) rows.

    Regroups the fine time bins into ~sqrt(n) batches and treats batch means
    as independent, the usual remedy for serial correlation in ergodic
    averages.
    """
    filled = bins[bins[:, 1] > 0.0]
    n = filled.shape[0]
    if n == 0:
        return 0.0, math.inf
    total_f, total_t = filled.sum(axis=0)
    mean = total_f / total_t
    m = max(int(math.sqrt(n)), 1)
    k = n // m
    if k < 2 or n < 4:
        return mean, math.inf
    trimmed = filled[: m * k]
    grouped = trimmed.reshape(m, k, 2).sum(axis=1)
    bm = grouped[:, 0] / grouped[:, 1]
    var_mean = bm.var(ddof=1) / m
    return mean, var_mean


def _theta_z_cfg(cfg: SimConfig, stream_id: int) -> SimConfig:
    changes = {"stream_id": stream_id}
    if cfg.system is not SystemKind.THETA_Z:
        changes["system"] = SystemKind.THETA_Z
    return replace(cfg, **changes)


def estimate_lambda_mc(alpha: float, cfg: SimConfig, replicas: int = 16,
                       c: DerivedConsts | None = None) -> EstimateWithCI:
    """Time-average estimate of the stability exponent.

    Runs ``replicas`` independent axis trajectories (stream ids
    cfg.stream_id .. cfg.stream_id+replicas-1), averages F over the
    post-burn-in stretch of each, and pools them weighted by accumulated
    time.  The half-width combines per-replica batch-means variances.
    ``c`` defaults to the constants of the stock parameter set
    (sigma=10, beta=8/3, rho=1/2).
    """
    if not alpha > 0.0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    if replicas < 1:
        raise InvalidParameterError(f"replicas must be >= 1, got {replicas}")
    if not cfg.t_final > cfg.t_burn:
        raise InvalidParameterError("lambda estimate needs t_final > t_burn")
    t0 = time.perf_counter()
    c = _default_consts(c)
    span = cfg.t_final - cfg.t_burn
    bin_dt = span / N_TIME_BINS if span > 0 else 0.0
    means = np.empty(replicas)
    var_means = np.empty(replicas)
    weights = np.empty(replicas)
    n_steps = 0
    for k in range(replicas):
        rcfg = _theta_z_cfg(cfg, cfg.stream_id + k)
        out = _drive_theta_z(c, alpha, _THETA0, c.zstar, 0.0, rcfg,
                             track_r=False, n_bins=N_TIME_BINS, bin_dt=bin_dt)
        means[k], var_means[k] = _batch_ci(out["bins"])
        weights[k] = out["acc"][1]
        n_steps += out["n_steps"]
    value = float(np.sum(means * weights) / np.sum(weights))
    if np.all(np.isfinite(var_means)):
        half = 1.96 * math.sqrt(float(np.sum(var_means)) / replicas**2)
    elif replicas >= 2:
        half = 1.96 * float(means.std(ddof=1)) / math.sqrt(replicas)
    else:
        half = math.inf
    return EstimateWithCI(value=value, half_width=half, method=LambdaMethod.MC,
                          n_samples=n_steps, seed=cfg.seed,
                          wall_time_s=time.perf_counter() - t0)


GROWTH_STREAM_OFFSET = 1 << 20


def estimate_lambda_growth(alpha: float, cfg: SimConfig, replicas: int = 16,
                           c: DerivedConsts | None = None) -> EstimateWithCI:
    """Radial growth-rate estimate from the linearised polar system.

    Uses (r(T) - r(t_burn)) / (T - t_burn) per replica and the spread across
    replicas for the half-width.  Stream ids are offset from the time-average
    estimator's so the two routes see independent noise.
    """
    if not alpha > 0.0:
        raise InvalidParameterError(f"alpha must be positive, got {alpha}")
    if replicas < 1:
        raise InvalidParameterError(f"replicas must be >= 1, got {replicas}")
    if not cfg.t_final > cfg.t_burn:
        raise InvalidParameterError("growth estimate needs t_final > t_burn")
    t0 = time.perf_counter()
    c = _default_consts(c)
    slopes = np.empty(replicas)
    n_steps = 0
    for k in range(replicas):
        rcfg = _theta_z_cfg(cfg, cfg.stream_id + GROWTH_STREAM_OFFSET + k)
        out = _drive_theta_z(c, alpha, _THETA0, c.zstar, 0.0, rcfg,
                             track_r=True)
        # acc integrates F dt only past the burn-in, which for the polar
        # system is exactly r(T) - r(t_burn) up to the partial step at the
        # burn-in boundary.
        slopes[k] = out["acc"][0] / out["acc"][1]
        n_steps += out["n_steps"]
    value = float(slopes.mean())
    if replicas >= 2:
        half = 1.96 * float(slopes.std(ddof=1)) / math.sqrt(replicas)
    else:
        half = math.inf
    return EstimateWithCI(value=value, half_width=half,
                          method=LambdaMethod.GROWTH,
                          n_samples=n_steps, seed=cfg.seed,
                          wall_time_s=time.perf_counter() - t0)


_THETA0 = 0.3


def _default_consts(c: DerivedConsts | None) -> DerivedConsts:
    if c is not None:
        return c
    return derive_constants(Params())


def lambda_plus(z):
    """Growth rate of the frozen-z angular dynamics at its stable point."""
    z = np.asarray(z, dtype=float)
    return -1.0 + np.sqrt(np.maximum(z - 1.0, 0.0))


def heuristic_lambda(alpha: float, c: DerivedConsts,
                     quad_tol: float = 1.0e-8) -> float:
    """Gaussian average of lambda_plus: freeze z at its stationary law.

    Substituting z = zstar + sd*u with sd = alpha/sqrt(2*gamma) turns the
    average into a standard-normal integral over u in [-10, 10]; the kink of
    lambda_plus at z = 1 is made a panel boundary so the quadrature converges
    fast.  Exact at alpha = 0 (returns lambda_plus(zstar)).
    """
    if alpha < 0.0:
        raise InvalidParameterError(f"alpha must be >= 0, got {alpha}")
    if alpha == 0.0:
        return float(lambda_plus(c.zstar))
    sd = alpha / math.sqrt(2.0 * c.gamma)

    def integrand(u):
        return float(lambda_plus(c.zstar + sd * u)) * _phi(u)

    u_kink = (1.0 - c.zstar) / sd
    lo, hi = -10.0, 10.0
    points = [u_kink] if lo < u_kink < hi else None
    total, _ = integrate.quad(integrand, lo, hi, points=points,
                              epsabs=quad_tol, epsrel=0.0, limit=200)
    # mass outside [-10, 10] contributes lambda_plus ~ -1 tails below 1e-15
    return float(total)


def _phi(u: float) -> float:
    return math.exp(-0.5 * u * u) / math.sqrt(2.0 * math.pi)


_LARGE_ALPHA_CONST_NUM = math.gamma(0.75) / (2.0 * math.sqrt(math.pi))


def asymptotic_lambda(alpha: float, c: DerivedConsts, regime: Regime) -> float:
    """Closed-form limiting values of the stability exponent.

    SMALL: the alpha -> 0 limit, lambda_plus(zstar).
    LARGE: the leading term sqrt(alpha) * Gamma(3/4) / (2 * gamma^(1/4) *
    sqrt(pi)); relative corrections vanish as alpha grows.
    """
    if regime is Regime.SMALL:
        return float(lambda_plus(c.zstar))
    if regime is Regime.LARGE:
        if alpha < 0.0:
            raise InvalidParameterError(f"alpha must be >= 0, got {alpha}")
        return math.sqrt(alpha) * _LARGE_ALPHA_CONST_NUM / c.gamma**0.25
    raise InvalidParameterError(f"unknown regime {regime!r}")
