"""Coordinate charts and the infinitesimal generators.

Three charts are used:

* ``ORIGINAL``  -- (X, Y, Z), the physical Lorenz variables;
* ``TRANSFORMED`` -- (x, y, z), the normal form in which the z equation is
  an Ornstein-Uhlenbeck process plus a quadratic feedback -x(x+eta*y);
* ``POLAR`` -- (r, theta, z) with x = e^r sin(theta),
  y = e^r (cos(theta) - sin(theta)).

The angle lives on the real projective line: theta and theta+pi describe the
same direction, and polar states store theta reduced to [-pi/2, pi/2).  The
chart maps are pointwise; the time rescaling that accompanies the variable
change is a property of trajectories, not of points, and is handled by the
integrators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .core import DerivedConsts
from .errors import ChartMismatchError, DomainError

__all__ = [
    "Chart",
    "State",
    "Partials",
    "GeneratorOp",
    "reduce_angle",
    "to_transformed",
    "from_transformed",
    "to_polar",
    "from_polar",
    "xy_to_polar",
    "polar_to_xy",
    "stable_angle",
    "unstable_angle",
    "apply_generator",
]


class Chart(Enum):
    ORIGINAL = "original"
    TRANSFORMED = "transformed"
    POLAR = "polar"


@dataclass(frozen=True)
class State:
    """A point together with the chart its coordinates refer to."""

    chart: Chart
    coords: tuple

    def __post_init__(self):
        n = len(self.coords)
        if n != 3:
            raise ChartMismatchError(f"states carry 3 coordinates, got {n}")
        if self.chart is Chart.POLAR:
            theta = np.asarray(self.coords[1])
            if not bool(np.all((-math.pi / 2 <= theta) & (theta < math.pi / 2))):
                raise ChartMismatchError(
                    "polar theta must be reduced to [-pi/2, pi/2)"
                )


@dataclass(frozen=True)
class Partials:
    """First and second partial derivatives of a scalar function at a point.

    Slot meaning depends on the chart the generator is applied in:

    * transformed (x, y, z): f_x and f_y are the x and y partials;
    * polar (r, theta, z):   f_x holds the r partial, f_y the theta partial;
    * axis chart (theta, z): f_x holds the theta partial, f_y is ignored.

    f_z and f_zz are always the first and second z partials.  Entries may be
    scalars or numpy arrays of a common shape.
    """

    f: Union[float, np.ndarray]
    f_x: Union[float, np.ndarray]
    f_y: Union[float, np.ndarray]
    f_z: Union[float, np.ndarray]
    f_zz: Union[float, np.ndarray]


class GeneratorOp(Enum):
    """Which generator to apply.

    L  : full transformed dynamics, including the -x(x+eta*y) feedback on z.
    L1 : same with the feedback removed (z is pure Ornstein-Uhlenbeck).
    L0 : the (theta, z) dynamics on the invariant axis.
    """

    L = "L"
    L1 = "L1"
    L0 = "L0"


def reduce_angle(theta):
    """Reduce an angle modulo pi into [-pi/2, pi/2). Works elementwise."""
    return theta - math.pi * np.floor(theta / math.pi + 0.5)


def _require(s: State, chart: Chart, op: str) -> None:
    if s.chart is not chart:
        raise ChartMismatchError(f"{op} expects a {chart.value} state, got {s.chart.value}")


def to_transformed(s: State, c: DerivedConsts) -> State:
    """Map an ORIGINAL state (X, Y, Z) to TRANSFORMED coordinates (x, y, z)."""
    _require(s, Chart.ORIGINAL, "to_transformed")
    X, Y, Z = s.coords
    sigma = c.sigma
    x = (c.nu / c.chi) * X
    y = c.nu * sigma * (Y - X)
    z = c.zstar - c.chi**2 * sigma * Z
    return State(Chart.TRANSFORMED, (x, y, z))


def from_transformed(s: State, c: DerivedConsts) -> State:
    """Map a TRANSFORMED state (x, y, z) back to ORIGINAL coordinates."""
    _require(s, Chart.TRANSFORMED, "from_transformed")
    x, y, z = s.coords
    sigma = c.sigma
    X = (c.chi / c.nu) * x
    Y = X + y / (c.nu * sigma)
    Z = (c.zstar - z) / (c.chi**2 * sigma)
    return State(Chart.ORIGINAL, (X, Y, Z))


def xy_to_polar(x, y):
    """Radial-log and direction coordinates of an (x, y) pair.

    Returns (r, theta) with e^(2r) = x^2 + (x+y)^2 and theta reduced to
    [-pi/2, pi/2); theta satisfies sin(theta) = +-x e^(-r), the sign fixed by
    the reduction.  Elementwise on arrays.  Raises DomainError at the origin.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n2 = x * x + (x + y) * (x + y)
    if np.any(n2 == 0.0):
        raise DomainError("polar coordinates are undefined at x = y = 0")
    r = 0.5 * np.log(n2)
    theta = reduce_angle(np.arctan2(x, x + y))
    if r.ndim == 0:
        return float(r), float(theta)
    return r, theta


def polar_to_xy(r, theta):
    """Inverse of xy_to_polar: x = e^r sin(theta), y = e^r (cos - sin)(theta)."""
    er = np.exp(np.asarray(r, dtype=float))
    st = np.sin(theta)
    x = er * st
    y = er * (np.cos(theta) - st)
    if np.ndim(x) == 0:
        return float(x), float(y)
    return x, y


def to_polar(s: State) -> State:
    """Map a TRANSFORMED state to the POLAR chart (r, theta, z)."""
    _require(s, Chart.TRANSFORMED, "to_polar")
    x, y, z = s.coords
    r, theta = xy_to_polar(x, y)
    return State(Chart.POLAR, (r, theta, z))


def from_polar(s: State) -> State:
    """Map a POLAR state (r, theta, z) to the TRANSFORMED chart."""
    _require(s, Chart.POLAR, "from_polar")
    r, theta, z = s.coords
    x, y = polar_to_xy(r, theta)
    return State(Chart.TRANSFORMED, (x, y, z))


def stable_angle(z):
    """Attracting direction of the frozen-z angle dynamics, for z > 1.

    sin(theta) = +1/sqrt(z), theta in (0, pi/2).  Elementwise; DomainError
    if any z <= 1 (the two directions merge at z = 1).
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 1.0):
        raise DomainError("fixed directions exist only for z > 1")
    out = np.arcsin(1.0 / np.sqrt(z))
    return float(out) if out.ndim == 0 else out


def unstable_angle(z):
    """Repelling direction of the frozen-z angle dynamics: sin(theta) = -1/sqrt(z)."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 1.0):
        raise DomainError("fixed directions exist only for z > 1")
    out = -np.arcsin(1.0 / np.sqrt(z))
    return float(out) if out.ndim == 0 else out


def _axis_point(point):
    """Accept (theta, z) as a 2-tuple/array or a POLAR state; return (theta, z)."""
    if isinstance(point, State):
        if point.chart is not Chart.POLAR:
            raise ChartMismatchError("the axis generator expects (theta, z) or a polar state")
        _, theta, z = point.coords
        return theta, z
    if len(point) == 2:
        return point[0], point[1]
    raise ChartMismatchError("the axis generator expects a (theta, z) pair")


def apply_generator(which: GeneratorOp, point, partials: Partials,
                    c: DerivedConsts, alpha: float):
    """Apply a generator to a function known through its partial derivatives.

    ``point`` is a State (TRANSFORMED or POLAR for L/L1) or a (theta, z)
    pair / POLAR state for L0.  Returns the exact linear combination of the
    supplied partials prescribed by the chosen generator; elementwise when
    the partials hold arrays.
    """
    half_a2 = 0.5 * alpha * alpha
    if which is GeneratorOp.L0:
        theta, z = _axis_point(point)
        drift_theta = 1.0 - z * np.sin(theta) ** 2
        return (drift_theta * partials.f_x
                - c.gamma * (z - c.zstar) * partials.f_z
                + half_a2 * partials.f_zz)

    if not isinstance(point, State):
        raise ChartMismatchError("L and L1 expect a State")
    if point.chart is Chart.TRANSFORMED:
        x, y, z = point.coords
        drift_z = -c.gamma * (z - c.zstar)
        if which is GeneratorOp.L:
            drift_z = drift_z - x * (x + c.eta * y)
        return (y * partials.f_x
                + (x * (z - 2.0) - 2.0 * y) * partials.f_y
                + drift_z * partials.f_z
                + half_a2 * partials.f_zz)
    if point.chart is Chart.POLAR:
        r, theta, z = point.coords
        drift_r = -1.0 + 0.5 * z * np.sin(2.0 * theta)
        drift_theta = 1.0 - z * np.sin(theta) ** 2
        drift_z = -c.gamma * (z - c.zstar)
        if which is GeneratorOp.L:
            x, y = polar_to_xy(r, theta)
            drift_z = drift_z - x * (x + c.eta * y)
        return (drift_r * partials.f_x
                + drift_theta * partials.f_y
                + drift_z * partials.f_z
                + half_a2 * partials.f_zz)
    raise ChartMismatchError("L and L1 are defined in the transformed or polar chart")
