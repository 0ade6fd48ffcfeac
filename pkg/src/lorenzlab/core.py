"""Model parameters and the constants derived from them.

The system under study is the Lorenz system with white noise of strength
``alpha_hat`` acting on the third coordinate.  A linear change of variables
(plus a time rescaling) brings it to a normal form in which the third
coordinate decouples into an Ornstein-Uhlenbeck process; everything in this
package works with the constants of that normal form, collected in
:class:`DerivedConsts`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameterError

__all__ = [
    "Params",
    "DerivedConsts",
    "validate_params",
    "derive_constants",
    "alpha_from_alpha_hat",
    "alpha_hat_from_alpha",
]


@dataclass(frozen=True)
class Params:
    """Physical parameters of the forced Lorenz system.

    sigma, beta : classical Lorenz parameters, both positive.
    rho : Rayleigh number; any real value (the interesting regime here
        is rho < 1, where the origin attracts the deterministic flow).
    alpha_hat : noise strength on the Z equation, >= 0.
    """

    sigma: float = 10.0
    beta: float = 8.0 / 3.0
    rho: float = 0.5
    alpha_hat: float = 0.0


@dataclass(frozen=True)
class DerivedConsts:
    """Constants of the transformed system.

    chi : time-rescaling factor, 2/(1+sigma).
    eta : coefficient of the xy cross term in the z feedback, (1+sigma)/(2*sigma).
    gamma : relaxation rate of the z process, chi*beta.
    nu : amplitude factor of the variable change, sqrt(chi^5 * sigma).
    zstar : mean of the stationary z process, 2 + chi^2*sigma*(rho-1).
    alpha : noise strength in transformed variables, nu*sqrt(sigma)*alpha_hat.
    """

    chi: float
    eta: float
    gamma: float
    nu: float
    zstar: float
    alpha: float

    @property
    def sigma(self) -> float:
        """Recover sigma from chi (chi = 2/(1+sigma))."""
        return 2.0 / self.chi - 1.0

    @property
    def beta(self) -> float:
        """Recover beta from gamma (gamma = chi*beta)."""
        return self.gamma / self.chi

    @property
    def rho(self) -> float:
        """Recover rho from zstar (zstar = 2 + chi^2*sigma*(rho-1))."""
        return 1.0 + (self.zstar - 2.0) / (self.chi**2 * self.sigma)

    def alpha_hat_of(self, alpha: float) -> float:
        """Transformed-units noise strength back to original units."""
        return alpha / (self.nu * math.sqrt(self.sigma))


def validate_params(p: Params) -> list[str]:
    """Check a parameter set, returning a list of problems (empty = ok)."""
    problems = []
    if not (p.sigma > 0.0) or not math.isfinite(p.sigma):
        problems.append(f"sigma must be positive and finite, got {p.sigma!r}")
    if not (p.beta > 0.0) or not math.isfinite(p.beta):
        problems.append(f"beta must be positive and finite, got {p.beta!r}")
    if not math.isfinite(p.rho):
        problems.append(f"rho must be finite, got {p.rho!r}")
    if p.alpha_hat < 0.0 or not math.isfinite(p.alpha_hat):
        problems.append(f"alpha_hat must be >= 0 and finite, got {p.alpha_hat!r}")
    return problems


def derive_constants(p: Params) -> DerivedConsts:
    """Compute the normal-form constants for a parameter set.

    Raises InvalidParameterError if the parameters are inadmissible.
    """
    problems = validate_params(p)
    if problems:
        raise InvalidParameterError("; ".join(problems))
    chi = 2.0 / (1.0 + p.sigma)
    eta = (1.0 + p.sigma) / (2.0 * p.sigma)
    gamma = chi * p.beta
    nu = math.sqrt(chi**5 * p.sigma)
    zstar = 2.0 + chi**2 * p.sigma * (p.rho - 1.0)
    alpha = nu * math.sqrt(p.sigma) * p.alpha_hat
    return DerivedConsts(chi=chi, eta=eta, gamma=gamma, nu=nu, zstar=zstar, alpha=alpha)


def alpha_from_alpha_hat(alpha_hat: float, p: Params) -> float:
    """Convert a noise strength from original to transformed units."""
    if alpha_hat < 0.0:
        raise InvalidParameterError(f"alpha_hat must be >= 0, got {alpha_hat!r}")
    chi = 2.0 / (1.0 + p.sigma)
    return math.sqrt(chi**5 * p.sigma) * math.sqrt(p.sigma) * alpha_hat


def alpha_hat_from_alpha(alpha: float, p: Params) -> float:
    """Convert a noise strength from transformed to original units."""
    if alpha < 0.0:
        raise InvalidParameterError(f"alpha must be >= 0, got {alpha!r}")
    chi = 2.0 / (1.0 + p.sigma)
    return alpha / (math.sqrt(chi**5 * p.sigma) * math.sqrt(p.sigma))
