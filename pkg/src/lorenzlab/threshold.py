"""Sign-change search for the stability exponent over the noise amplitude.

find_threshold brackets the zero of alpha -> lambda(alpha) with a bisection
that is aware of estimator noise: every comparison is gated on the
confidence interval, and a midpoint whose interval straddles zero is re-run
with doubled trajectory length (same streams, so the rerun subsumes the
shorter one) until the sign is resolved or the evaluation budget runs out.
Deterministic evaluators (the heuristic quadrature, the stationary-solve
route, or a user-supplied function) degenerate to plain bisection.

The search works in hat units (the noise amplitude of the untransformed
system), matching the headline numbers; results carry both unit systems.
Whether the exponent has a unique zero is not assumed: an optional coarse
scan reports every sign change it sees, and the bisection then refines the
leftmost one.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .core import DerivedConsts, Params, alpha_from_alpha_hat, derive_constants
from .errors import BracketError, InvalidParameterError
from .estimators import (
    EstimateWithCI,
    LambdaMethod,
    default_burn_in,
    estimate_lambda_growth,
    estimate_lambda_mc,
    heuristic_lambda,
)
from .fokker_planck import lambda_pde
from .sde import SimConfig, SystemKind

__all__ = ["ThresholdResult", "find_threshold"]

_MAX_DOUBLINGS = 6


@dataclass
class ThresholdResult:
    """Outcome of a threshold search.

    alpha_star_hat and the bracket are in hat units; alpha_star is the same
    point in transformed units.  evaluations lists every estimator call as
    (alpha_hat, estimate) in call order, doublings included.  sign_changes
    holds the (lo, hi) subintervals where the optional coarse scan saw the
    estimate change sign.  converged means the bracket shrank below tol with
    both endpoint signs resolved by their confidence intervals.
    """

    alpha_star: float
    alpha_star_hat: float
    bracket: Tuple[float, float]
    method: str
    evaluations: List[Tuple[float, EstimateWithCI]]
    converged: bool
    sign_changes: List[Tuple[float, float]] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "alpha_star": self.alpha_star,
            "alpha_star_hat": self.alpha_star_hat,
            "bracket_hat": list(self.bracket),
            "method": self.method,
            "converged": self.converged,
            "sign_changes_hat": [list(s) for s in self.sign_changes],
            "evaluations": [
                {
                    "alpha_hat": a,
                    "lambda": e.value,
                    "ci_half_width": e.half_width,
                    "n_samples": e.n_samples,
                    "wall_time_s": e.wall_time_s,
                }
                for a, e in self.evaluations
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=2)


class _Evaluator:
    """Wraps a lambda-estimation route as alpha_hat -> EstimateWithCI.

    Stochastic routes honour common random numbers (the same streams at
    every alpha) unless crn is off, in which case each call shifts to fresh
    streams.  can_refine marks routes whose precision improves when the
    trajectory length doubles.
    """

    def __init__(self, method, p: Params, c: DerivedConsts, t_final: float,
                 replicas: int, seed: int, crn: bool):
        self.c = c
        self.p = p
        self.replicas = replicas
        self.base_t = t_final
        self.seed = seed
        self.crn = crn
        self.calls = 0
        if callable(method):
            self.kind = "callable"
            self.fn = method
            self.name = getattr(method, "__name__", "callable")
            self.can_refine = False
            return
        if isinstance(method, str):
            method = LambdaMethod(method.lower())
        if method in (LambdaMethod.ASYMPTOTIC_SMALL, LambdaMethod.ASYMPTOTIC_LARGE,
                      LambdaMethod.EXCURSION):
            raise InvalidParameterError(
                f"threshold search does not support method {method.value!r}")
        self.kind = method.value
        self.name = method.value
        self.can_refine = method in (LambdaMethod.MC, LambdaMethod.GROWTH)

    def __call__(self, alpha_hat: float, t_scale: int = 1) -> EstimateWithCI:
        self.calls += 1
        alpha = alpha_from_alpha_hat(alpha_hat, self.c)
        t0 = time.perf_counter()
        if self.kind == "callable":
            out = self.fn(alpha_hat)
            if not isinstance(out, EstimateWithCI):
                out = EstimateWithCI(value=float(out), half_width=0.0,
                                     method=LambdaMethod.MC)
            return out
        if self.kind == LambdaMethod.HEURISTIC.value:
            value = heuristic_lambda(alpha, self.c)
            return EstimateWithCI(value=value, half_width=0.0,
                                  method=LambdaMethod.HEURISTIC,
                                  wall_time_s=time.perf_counter() - t0)
        if self.kind == LambdaMethod.PDE.value:
            est = lambda_pde(alpha, self.c)
            return replace(est, wall_time_s=time.perf_counter() - t0)
        seed = self.seed if self.crn else self.seed + 7919 * self.calls
        cfg = SimConfig(
            system=SystemKind.THETA_Z,
            t_final=self.base_t * t_scale,
            t_burn=default_burn_in(self.c),
            dt0=1e-2,
            thin=100000,
            seed=seed,
        )
        if self.kind == LambdaMethod.MC.value:
            return estimate_lambda_mc(alpha, cfg, self.replicas, self.c)
        return estimate_lambda_growth(alpha, cfg, self.replicas, self.c)


def _resolve_sign(ev: _Evaluator, alpha_hat: float, budget_left: int,
                  trace: list) -> Tuple[EstimateWithCI, int, bool]:
    """Evaluate at one point, doubling the run length until the confidence
    interval excludes zero, the per-point doubling cap is hit, or the budget
    is gone.  Returns (last estimate, evaluations used, sign_resolved)."""
    used = 0
    scale = 1
    est = None
    for _ in range(_MAX_DOUBLINGS + 1):
        if budget_left - used <= 0:
            break
        est = ev(alpha_hat, t_scale=scale)
        used += 1
        trace.append((alpha_hat, est))
        if est.excludes_zero() or not ev.can_refine:
            return est, used, est.excludes_zero()
        scale *= 2
    if est is None:
        raise BracketError("evaluation budget exhausted before the first "
                           "estimate at alpha_hat=%g" % alpha_hat)
    return est, used, est.excludes_zero()


def find_threshold(method, bracket0: Sequence[float], tol: float,
                   budget: int, p: Optional[Params] = None,
                   c: Optional[DerivedConsts] = None, *,
                   t_final: float = 2e4, replicas: int = 8, seed: int = 0,
                   crn: bool = True, scan_points: int = 0) -> ThresholdResult:
    """Bracket the zero of lambda(alpha_hat) inside bracket0.

    method is a LambdaMethod (or its string value), or any callable
    alpha_hat -> float / EstimateWithCI (a deterministic callable makes this
    plain bisection).  bracket0 and tol are in hat units.  budget caps the
    total number of estimator calls, doublings included.  When scan_points
    > 0, a uniform coarse scan of that many interior points runs first; all
    sign changes are reported and the leftmost becomes the working bracket.

    Raises BracketError when the endpoint signs do not straddle zero (or
    cannot be resolved within the budget).  Exhausting the budget mid-search
    returns the bracket reached so far with converged=False.  The search is
    deterministic for a given seed.
    """
    lo, hi = (float(v) for v in bracket0)
    if not (lo < hi):
        raise InvalidParameterError(f"bracket0 needs lo < hi, got [{lo}, {hi}]")
    if tol <= 0:
        raise InvalidParameterError("tol must be positive")
    if budget < 2:
        raise InvalidParameterError("budget must allow both endpoints")
    if p is None:
        p = Params()
    if c is None:
        c = derive_constants(p)

    ev = _Evaluator(method, p, c, t_final=t_final, replicas=replicas,
                    seed=seed, crn=crn)
    trace: List[Tuple[float, EstimateWithCI]] = []
    budget_left = budget
    sign_changes: List[Tuple[float, float]] = []

    if scan_points > 0:
        xs = [lo + (hi - lo) * (i + 1) / (scan_points + 1)
              for i in range(scan_points)]
        vals = []
        for x in xs:
            if budget_left <= 0:
                break
            est = ev(x, t_scale=1)
            budget_left -= 1
            trace.append((x, est))
            vals.append((x, est.value))
        for (x0, v0), (x1, v1) in zip(vals, vals[1:]):
            if v0 == 0.0 or (v0 < 0) != (v1 < 0):
                sign_changes.append((x0, x1))
        if sign_changes:
            lo = max(lo, sign_changes[0][0])
            hi = min(hi, sign_changes[0][1])

    est_lo, used, ok_lo = _resolve_sign(ev, lo, budget_left, trace)
    budget_left -= used
    est_hi, used, ok_hi = _resolve_sign(ev, hi, budget_left, trace)
    budget_left -= used
    if not (est_lo.value < 0.0 < est_hi.value):
        raise BracketError(
            "lambda does not change sign over the bracket: "
            f"lambda({lo:g}) = {est_lo.value:+.4g} +- {est_lo.half_width:.2g}, "
            f"lambda({hi:g}) = {est_hi.value:+.4g} +- {est_hi.half_width:.2g}")
    endpoints_resolved = ok_lo and ok_hi

    while hi - lo > tol and budget_left > 0:
        mid = 0.5 * (lo + hi)
        est_mid, used, ok_mid = _resolve_sign(ev, mid, budget_left, trace)
        budget_left -= used
        if est_mid.value == 0.0 and est_mid.half_width == 0.0:
            # a deterministic evaluator hit the root exactly
            lo = hi = mid
            ok_lo = ok_hi = True
            endpoints_resolved = True
            break
        if est_mid.value < 0.0:
            lo = mid
            ok_lo = ok_mid
        else:
            hi = mid
            ok_hi = ok_mid
        endpoints_resolved = ok_lo and ok_hi

    converged = (hi - lo) <= tol and endpoints_resolved
    mid = 0.5 * (lo + hi)
    return ThresholdResult(
        alpha_star=alpha_from_alpha_hat(mid, c),
        alpha_star_hat=mid,
        bracket=(lo, hi),
        method=ev.name,
        evaluations=trace,
        converged=converged,
        sign_changes=sign_changes,
    )
