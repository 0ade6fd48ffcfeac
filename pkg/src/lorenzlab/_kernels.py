"""Compiled stepping loops.

Each kernel advances one trajectory through a block of pre-generated standard
normals and returns how much of the block it consumed, so the Python driver
can refill from a counter-based stream.  Keeping noise generation outside the
kernels makes runs bit-reproducible regardless of chunking or threading.

Conventions shared by the trajectory kernels:

* splitting scheme: a half-step of the exact Ornstein-Uhlenbeck update on the
  linear part of the z equation, an explicit-midpoint step of the remaining
  deterministic drift with z frozen at its mid value, then the second exact
  half-step (two normals per step);
* plain Euler-Maruyama behind ``euler=True`` (one normal per step);
* adaptive time step dt = dt0/(1+|z|), refreshed every step from the current z;
* ``thin > 0`` records every thin-th post-step state once t >= t_burn (the
  driver emits the initial state itself);
* ``bins`` accumulates (sum of F dt, sum of dt) per time bin of width bin_dt
  past the burn-in, where F(theta, z) = -1 + z*sin(2*theta)/2 is the radial
  growth integrand; totals go to ``acc``.

Return codes: 0 ok, 1 coordinate overflow, 2 step rejected (fixed dt too
large for the current |z|).
"""

import math

import numpy as np
from numba import njit

K_OK = 0
K_BLOWUP = 1
K_REJECT = 2

_PI = math.pi
_OVERFLOW = 1.0e12


@njit(cache=True, nogil=True)
def theta_z_chunk(theta, z, r, shift, t, t_end, dt0, adaptive, euler,
                  gam, zstar, alpha, track_r,
                  xi, t_burn, thin, step_idx,
                  out_t, out_a, out_b, out_c,
                  bin_dt, bins, acc):
    """Advance the (theta, z) axis system; optionally carry the radial log r.

    With track_r the kernel also integrates dr = F dt (the PolarLinear
    system); |r| is renormalised to 0 past 700 with the offset folded into
    ``shift`` so exp(r) stays representable for chart conversions.
    """
    n = xi.shape[0]
    need = 1 if euler else 2
    cap = out_t.shape[0]
    i = 0
    n_out = 0
    err = K_OK
    while t < t_end and i + need <= n:
        dt = dt0 / (1.0 + abs(z)) if adaptive else dt0
        if t + dt > t_end:
            dt = t_end - t
        if not adaptive and abs(z) * dt > 0.5:
            err = K_REJECT
            break
        if euler:
            st = math.sin(theta)
            f_obs = -1.0 + 0.5 * z * math.sin(2.0 * theta)
            theta_new = theta + dt * (1.0 - z * st * st)
            z_new = z + dt * (-gam * (z - zstar)) + alpha * math.sqrt(dt) * xi[i]
            i += 1
        else:
            h = 0.5 * dt
            e = math.exp(-gam * h)
            s = alpha * math.sqrt((1.0 - e * e) / (2.0 * gam))
            zm = zstar + (z - zstar) * e + s * xi[i]
            st = math.sin(theta)
            thm = theta + h * (1.0 - zm * st * st)
            stm = math.sin(thm)
            f_obs = -1.0 + 0.5 * zm * math.sin(2.0 * thm)
            theta_new = theta + dt * (1.0 - zm * stm * stm)
            z_new = zstar + (zm - zstar) * e + s * xi[i + 1]
            i += 2
        if theta_new >= 0.5 * _PI or theta_new < -0.5 * _PI:
            theta_new -= _PI * math.floor(theta_new / _PI + 0.5)
        if t >= t_burn:
            acc[0] += f_obs * dt
            acc[1] += dt
            if bin_dt > 0.0:
                bi = int((t - t_burn) / bin_dt)
                if bi >= bins.shape[0]:
                    bi = bins.shape[0] - 1
                bins[bi, 0] += f_obs * dt
                bins[bi, 1] += dt
        theta = theta_new
        z = z_new
        if track_r:
            r += f_obs * dt
            if abs(r) > 700.0:
                shift += r
                r = 0.0
        t += dt
        step_idx += 1
        if thin > 0 and step_idx % thin == 0 and t >= t_burn and n_out < cap:
            out_t[n_out] = t
            if track_r:
                out_a[n_out] = shift + r
                out_b[n_out] = theta
                out_c[n_out] = z
            else:
                out_a[n_out] = theta
                out_b[n_out] = z
                out_c[n_out] = 0.0
            n_out += 1
        if abs(z) > _OVERFLOW:
            err = K_BLOWUP
            break
    return theta, z, r, shift, t, i, n_out, step_idx, err


@njit(cache=True, nogil=True)
def full_chunk(x, y, z, t, t_end, dt0, adaptive, euler,
               ou_rate, ou_mean, noise, eta, coef_a, coef_b, original,
               xi, t_burn, thin, step_idx,
               out_t, out_a, out_b, out_c):
    """Advance a full three-dimensional system (transformed or original chart).

    The linear-in-z part (rate ou_rate toward ou_mean, amplitude ``noise``)
    is stepped exactly; the remaining deterministic drift takes an explicit
    midpoint step.  Chart selection:

    * original=False: drift (y, x*(z-2) - 2y, -x*(x+eta*y)); coef_* unused.
    * original=True:  drift (coef_a*(Y-X), X*(coef_b-Z) - Y, X*Y) with
      coef_a = sigma, coef_b = rho.
    """
    n = xi.shape[0]
    need = 1 if euler else 2
    cap = out_t.shape[0]
    i = 0
    n_out = 0
    err = K_OK
    while t < t_end and i + need <= n:
        dt = dt0 / (1.0 + abs(z)) if adaptive else dt0
        if t + dt > t_end:
            dt = t_end - t
        if not adaptive and abs(z) * dt > 0.5:
            err = K_REJECT
            break
        if euler:
            if original:
                dx = coef_a * (y - x)
                dy = x * (coef_b - z) - y
                dz = -ou_rate * (z - ou_mean) + x * y
            else:
                dx = y
                dy = x * (z - 2.0) - 2.0 * y
                dz = -ou_rate * (z - ou_mean) - x * (x + eta * y)
            x = x + dt * dx
            y = y + dt * dy
            z = z + dt * dz + noise * math.sqrt(dt) * xi[i]
            i += 1
        else:
            h = 0.5 * dt
            e = math.exp(-ou_rate * h)
            s = noise * math.sqrt((1.0 - e * e) / (2.0 * ou_rate))
            zm = ou_mean + (z - ou_mean) * e + s * xi[i]
            if original:
                k1x = coef_a * (y - x)
                k1y = x * (coef_b - zm) - y
                k1z = x * y
            else:
                k1x = y
                k1y = x * (zm - 2.0) - 2.0 * y
                k1z = -x * (x + eta * y)
            xm = x + h * k1x
            ym = y + h * k1y
            zm2 = zm + h * k1z
            if original:
                k2x = coef_a * (ym - xm)
                k2y = xm * (coef_b - zm2) - ym
                k2z = xm * ym
            else:
                k2x = ym
                k2y = xm * (zm2 - 2.0) - 2.0 * ym
                k2z = -xm * (xm + eta * ym)
            x = x + dt * k2x
            y = y + dt * k2y
            zd = zm + dt * k2z
            z = ou_mean + (zd - ou_mean) * e + s * xi[i + 1]
            i += 2
        t += dt
        step_idx += 1
        if abs(x) > _OVERFLOW or abs(y) > _OVERFLOW or abs(z) > _OVERFLOW:
            err = K_BLOWUP
            break
        if thin > 0 and step_idx % thin == 0 and t >= t_burn and n_out < cap:
            out_t[n_out] = t
            out_a[n_out] = x
            out_b[n_out] = y
            out_c[n_out] = z
            n_out += 1
    return x, y, z, t, i, n_out, step_idx, err
