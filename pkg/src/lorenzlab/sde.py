"""Trajectory drivers for the stochastic system in its several charts.

The heavy loops live in :mod:`lorenzlab._kernels`; this module owns noise
generation, chunking, buffering and the user-facing :func:`simulate` API.

Noise is drawn from a counter-based Philox generator keyed by
``(seed, stream_id)`` and consumed in fixed-size blocks, so a trajectory is a
pure function of the seed pair no matter how the work is chunked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .core import DerivedConsts
from .errors import (
    BlowUpError,
    ChartMismatchError,
    InvalidParameterError,
    StepRejectedError,
)
from .transforms import Chart, State, reduce_angle

BLOCK = 1 << 19


class SystemKind(Enum):
    """Which set of equations to integrate."""

    ORIGINAL_FULL = "original_full"
    TRANSFORMED_FULL = "transformed_full"
    THETA_Z = "theta_z"
    POLAR_LINEAR = "polar_linear"


_DIM = {
    SystemKind.ORIGINAL_FULL: 3,
    SystemKind.TRANSFORMED_FULL: 3,
    SystemKind.THETA_Z: 2,
    SystemKind.POLAR_LINEAR: 3,
}

_CHART = {
    SystemKind.ORIGINAL_FULL: Chart.ORIGINAL,
    SystemKind.TRANSFORMED_FULL: Chart.TRANSFORMED,
    SystemKind.POLAR_LINEAR: Chart.POLAR,
}

_COLUMNS = {
    SystemKind.ORIGINAL_FULL: ("X", "Y", "Z"),
    SystemKind.TRANSFORMED_FULL: ("x", "y", "z"),
    SystemKind.THETA_Z: ("theta", "z"),
    SystemKind.POLAR_LINEAR: ("r", "theta", "z"),
}


@dataclass(frozen=True)
class SimConfig:
    """Run-length, stepping and output settings for one trajectory.

    thin=k records every k-th accepted step once t >= t_burn; set thin large
    to keep only accumulators and the final state.  stream_id selects an
    independent noise stream for the same seed (replica index).  euler=True
    switches from the splitting scheme to plain Euler-Maruyama.
    """

    system: SystemKind
    t_final: float
    t_burn: float = 0.0
    dt0: float = 1.0e-2
    thin: int = 1
    adaptive: bool = True
    seed: int = 0
    stream_id: int = 0
    euler: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.system, SystemKind):
            raise InvalidParameterError(f"system must be a SystemKind, got {self.system!r}")
        if not (self.t_final >= self.t_burn >= 0.0):
            raise InvalidParameterError(
                "need t_final >= t_burn >= 0, got "
                f"t_final={self.t_final}, t_burn={self.t_burn}")
        if not (0.0 < self.dt0 <= 0.1):
            raise InvalidParameterError(
                f"dt0 must lie in (0, 0.1], got {self.dt0}")
        if self.thin < 1:
            raise InvalidParameterError(f"thin must be >= 1, got {self.thin}")


class NoiseStream:
    """Counter-based standard-normal supply.

    ``block(i)`` always returns the same numbers for the same
    (seed, stream_id, i), independent of call order; distinct stream_ids give
    independent streams.  ``counter`` tracks the next block for the stateful
    :meth:`next_block`.
    """

    def __init__(self, seed: int, stream_id: int = 0, counter: int = 0) -> None:
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.counter = int(counter)

    def block(self, index: int, n: int = BLOCK) -> np.ndarray:
        bits = np.random.Philox(
            counter=[0, 0, 0, int(index)], key=[self.seed, self.stream_id])
        return np.random.Generator(bits).standard_normal(n)

    def next_block(self, n: int = BLOCK) -> np.ndarray:
        out = self.block(self.counter, n)
        self.counter += 1
        return out


@dataclass
class SimResult:
    """Samples and end-state from one :func:`simulate` call.

    growth_sum/growth_time accumulate the radial growth integrand
    F(theta, z) = -1 + z*sin(2*theta)/2 over the post-burn-in stretch of
    axis-chart runs (THETA_Z, POLAR_LINEAR); their ratio is the plain ergodic
    estimate of the stability exponent.
    """

    config: SimConfig
    consts: DerivedConsts
    alpha: float
    times: np.ndarray
    samples: np.ndarray
    final_time: float
    final_state: tuple
    n_steps: int
    r_shift_total: float = 0.0
    growth_sum: float = 0.0
    growth_time: float = 0.0
    bins: Optional[np.ndarray] = None

    @property
    def kind(self) -> SystemKind:
        return self.config.system

    @property
    def columns(self) -> tuple:
        return _COLUMNS[self.config.system]

    def summary(self) -> dict:
        out = {
            "system": self.config.system.value,
            "n_steps": self.n_steps,
            "final_time": self.final_time,
            "final_state": [float(v) for v in self.final_state],
            "n_samples": int(self.samples.shape[0]),
        }
        if self.samples.shape[0]:
            out["min"] = self.samples.min(axis=0).tolist()
            out["max"] = self.samples.max(axis=0).tolist()
        return out


def step_ou_exact(z, dt: float, xi, c: DerivedConsts, alpha: float):
    """One exact step of dz = -gamma (z - zstar) dt + alpha dW.

    This is the transition kernel itself, so the step carries no
    discretisation error for any dt.
    """
    if not dt > 0.0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    e = math.exp(-c.gamma * dt)
    s = alpha * math.sqrt((1.0 - e * e) / (2.0 * c.gamma))
    return c.zstar + (np.asarray(z) - c.zstar) * e + s * np.asarray(xi)


def step_theta_z(state, dt: float, xi, c: DerivedConsts, alpha: float) -> tuple:
    """One splitting step of the axis system; consumes two normals.

    Exact OU half-step on z, explicit-midpoint step of
    theta' = 1 - z sin^2(theta) with z frozen at its mid value, second OU
    half-step.  Rejects outright when |z| dt > 1/2, the stability guard the
    fixed-step kernels apply.
    """
    theta, z = float(state[0]), float(state[1])
    if abs(z) * dt > 0.5:
        raise StepRejectedError(
            f"|z|*dt = {abs(z) * dt:.3g} > 0.5 at z = {z:.6g}; shrink dt")
    xi = np.asarray(xi, dtype=float).reshape(-1)
    h = 0.5 * dt
    e = math.exp(-c.gamma * h)
    s = alpha * math.sqrt((1.0 - e * e) / (2.0 * c.gamma))
    zm = c.zstar + (z - c.zstar) * e + s * xi[0]
    st = math.sin(theta)
    thm = theta + h * (1.0 - zm * st * st)
    stm = math.sin(thm)
    theta_new = theta + dt * (1.0 - zm * stm * stm)
    z_new = c.zstar + (zm - c.zstar) * e + s * xi[1]
    return float(reduce_angle(theta_new)), z_new


def _original_coeffs(c: DerivedConsts, alpha: float) -> tuple:
    """(ou_rate, ou_mean, noise, coef_a, coef_b) for the original chart."""
    return c.beta, 0.0, c.alpha_hat_of(alpha), c.sigma, c.rho


def step_full(state: State, dt: float, xi, c: DerivedConsts,
              alpha: float) -> State:
    """One splitting step of a full three-dimensional system.

    Accepts a state in the transformed or the original chart and returns the
    new state in the same chart.  Consumes two normals.  The linear-in-z part
    steps exactly, so the axis x = y = 0 stays exactly invariant.
    """
    if state.chart is Chart.TRANSFORMED:
        ou_rate, ou_mean, noise = c.gamma, c.zstar, alpha
        coef_a = coef_b = 0.0
        original = False
    elif state.chart is Chart.ORIGINAL:
        ou_rate, ou_mean, noise, coef_a, coef_b = _original_coeffs(c, alpha)
        original = True
    else:
        raise ChartMismatchError(
            f"step_full handles ORIGINAL or TRANSFORMED states, got {state.chart}")
    if not dt > 0.0:
        raise InvalidParameterError(f"dt must be positive, got {dt}")
    xi = np.asarray(xi, dtype=float).reshape(-1)
    x, y, z = (float(v) for v in state.coords)
    out = _kernels.full_chunk(
        x, y, z, 0.0, dt, dt, False, False,
        ou_rate, ou_mean, noise, c.eta, coef_a, coef_b, original,
        xi[:2], 0.0, 2, 0,
        np.empty(1), np.empty(1), np.empty(1), np.empty(1))
    xn, yn, zn = out[0], out[1], out[2]
    err = out[7]
    if err == _kernels.K_BLOWUP:
        raise BlowUpError("coordinate exceeded 1e12 within a single step")
    if err == _kernels.K_REJECT:
        raise StepRejectedError(f"|z|*dt > 0.5 at z = {z:.6g}; shrink dt")
    return State(chart=state.chart, coords=(xn, yn, zn))


def _drive_theta_z(c: DerivedConsts, alpha: float, theta0: float, z0: float,
                   r0: float, cfg: SimConfig, track_r: bool,
                   n_bins: int = 0, bin_dt: float = 0.0) -> dict:
    """Run the axis kernel to t_final, refilling noise blocks as needed."""
    stream = NoiseStream(cfg.seed, cfg.stream_id)
    theta, z, r, shift = float(theta0), float(z0), float(r0), 0.0
    t = 0.0
    step_idx = 0
    bins = np.zeros((max(n_bins, 1), 2))
    acc = np.zeros(2)
    out_t = np.empty(BLOCK)
    out_a = np.empty(BLOCK)
    out_b = np.empty(BLOCK)
    out_c = np.empty(BLOCK)
    ts, rows = [], []
    while t < cfg.t_final:
        xi = stream.next_block()
        theta, z, r, shift, t, used, n_out, step_idx, err = _kernels.theta_z_chunk(
            theta, z, r, shift, t, cfg.t_final, cfg.dt0, cfg.adaptive, cfg.euler,
            c.gamma, c.zstar, alpha, track_r,
            xi, cfg.t_burn, cfg.thin, step_idx,
            out_t, out_a, out_b, out_c,
            bin_dt, bins, acc)
        if n_out:
            ts.append(out_t[:n_out].copy())
            if track_r:
                rows.append(np.stack(
                    [out_a[:n_out], out_b[:n_out], out_c[:n_out]], axis=1))
            else:
                rows.append(np.stack([out_a[:n_out], out_b[:n_out]], axis=1))
        if err == _kernels.K_BLOWUP:
            raise BlowUpError(f"|z| exceeded 1e12 at t = {t:.6g}")
        if err == _kernels.K_REJECT:
            raise StepRejectedError(
                f"fixed dt0 = {cfg.dt0} fails |z|*dt <= 0.5 at z = {z:.6g}, "
                f"t = {t:.6g}")
    return {
        "theta": theta, "z": z, "r": r, "shift": shift, "t": t,
        "n_steps": step_idx, "acc": acc, "bins": bins[:n_bins],
        "times": ts, "rows": rows,
    }


def _drive_full(c: DerivedConsts, alpha: float, x0: Sequence[float],
                cfg: SimConfig) -> dict:
    stream = NoiseStream(cfg.seed, cfg.stream_id)
    x, y, z = (float(v) for v in x0)
    if cfg.system is SystemKind.ORIGINAL_FULL:
        ou_rate, ou_mean, noise, coef_a, coef_b = _original_coeffs(c, alpha)
        original = True
    else:
        ou_rate, ou_mean, noise = c.gamma, c.zstar, alpha
        coef_a = coef_b = 0.0
        original = False
    t = 0.0
    step_idx = 0
    out_t = np.empty(BLOCK)
    out_a = np.empty(BLOCK)
    out_b = np.empty(BLOCK)
    out_c = np.empty(BLOCK)
    ts, rows = [], []
    while t < cfg.t_final:
        xi = stream.next_block()
        x, y, z, t, used, n_out, step_idx, err = _kernels.full_chunk(
            x, y, z, t, cfg.t_final, cfg.dt0, cfg.adaptive, cfg.euler,
            ou_rate, ou_mean, noise, c.eta, coef_a, coef_b, original,
            xi, cfg.t_burn, cfg.thin, step_idx,
            out_t, out_a, out_b, out_c)
        if n_out:
            ts.append(out_t[:n_out].copy())
            rows.append(np.stack(
                [out_a[:n_out], out_b[:n_out], out_c[:n_out]], axis=1))
        if err == _kernels.K_BLOWUP:
            raise BlowUpError(
                f"coordinate exceeded 1e12 at t = {t:.6g} "
                f"(x = {x:.3g}, y = {y:.3g}, z = {z:.3g})")
        if err == _kernels.K_REJECT:
            raise StepRejectedError(
                f"fixed dt0 = {cfg.dt0} fails |z|*dt <= 0.5 at z = {z:.6g}, "
                f"t = {t:.6g}")
    return {"x": x, "y": y, "z": z, "t": t, "n_steps": step_idx,
            "times": ts, "rows": rows}


def _coerce_init(kind: SystemKind, init: Union[State, Sequence[float]]) -> tuple:
    dim = _DIM[kind]
    if isinstance(init, State):
        if kind is SystemKind.THETA_Z:
            if init.chart is not Chart.POLAR:
                raise ChartMismatchError(
                    "theta_z initial state must be a POLAR State or a "
                    f"(theta, z) pair, got chart {init.chart}")
            return tuple(float(v) for v in init.coords[1:])
        if init.chart is not _CHART[kind]:
            raise ChartMismatchError(
                f"{kind.value} expects a {_CHART[kind].name} state, "
                f"got {init.chart.name}")
        return tuple(float(v) for v in init.coords)
    coords = tuple(float(v) for v in init)
    if len(coords) != dim:
        raise InvalidParameterError(
            f"{kind.value} initial state needs {dim} coordinates, "
            f"got {len(coords)}")
    return coords


def _assemble(kind: SystemKind, x0, cfg: SimConfig, ts, rows) -> tuple:
    dim = _DIM[kind]
    parts_t = []
    parts_y = []
    if cfg.t_burn == 0.0 and cfg.t_final > 0.0:
        parts_t.append(np.array([0.0]))
        parts_y.append(np.array([x0], dtype=float))
    parts_t.extend(ts)
    parts_y.extend(rows)
    if parts_t:
        times = np.concatenate(parts_t)
        samples = np.concatenate(parts_y, axis=0)
    else:
        times = np.empty(0)
        samples = np.empty((0, dim))
    return times, samples


def simulate(config: SimConfig, init: Union[State, Sequence[float]],
             c: DerivedConsts, alpha: float) -> SimResult:
    """Integrate one trajectory and return thinned post-burn-in samples.

    ``init`` is a :class:`State` in the chart of ``config.system`` or a bare
    coordinate sequence in that chart: (X, Y, Z), (x, y, z), (theta, z) or
    (r, theta, z).  ``alpha`` is the noise strength in transformed units and
    overrides ``c.alpha``.  Bit-reproducible for fixed (seed, stream_id).
    """
    kind = config.system
    x0 = _coerce_init(kind, init)
    if alpha < 0.0 or not math.isfinite(alpha):
        raise InvalidParameterError(f"alpha must be >= 0 and finite, got {alpha}")
    if kind in (SystemKind.THETA_Z, SystemKind.POLAR_LINEAR):
        track_r = kind is SystemKind.POLAR_LINEAR
        if track_r:
            r0, theta0, z0 = x0
        else:
            theta0, z0 = x0
            r0 = 0.0
        out = _drive_theta_z(c, alpha, theta0, z0, r0, config, track_r)
        times, samples = _assemble(kind, x0, config, out["times"], out["rows"])
        if track_r:
            final = (out["shift"] + out["r"], out["theta"], out["z"])
        else:
            final = (out["theta"], out["z"])
        return SimResult(
            config=config, consts=c, alpha=alpha,
            times=times, samples=samples,
            final_time=out["t"], final_state=final, n_steps=out["n_steps"],
            r_shift_total=out["shift"],
            growth_sum=float(out["acc"][0]), growth_time=float(out["acc"][1]))
    out = _drive_full(c, alpha, x0, config)
    times, samples = _assemble(kind, x0, config, out["times"], out["rows"])
    return SimResult(
        config=config, consts=c, alpha=alpha,
        times=times, samples=samples,
        final_time=out["t"], final_state=(out["x"], out["y"], out["z"]),
        n_steps=out["n_steps"])


def write_csv(result: SimResult, path: str) -> None:
    """Write samples as t,c1,c2,c3 rows at full double precision.

    Two-coordinate systems pad the third column with zeros so every file has
    the same shape.
    """
    n = result.samples.shape[0]
    data = np.zeros((n, 4))
    if n:
        data[:, 0] = result.times
        data[:, 1:1 + result.samples.shape[1]] = result.samples
    np.savetxt(path, data, fmt="%.17g", delimiter=",",
               header="t,c1,c2,c3", comments="")
