"""Rate function, saddlepoint tail formulas, and exceedance conditionals.

The rate function ``I(x) = x m^{-1}(x) - log Phi(m^{-1}(x))`` is the Legendre
transform of the log-MGF and governs the exponential decay of tail events.
Two saddlepoint formulas built on it are exposed in log scale:

* ``tail_probability``: log P(S_n >= n a) ~ -n I(a) - log(sqrt(2 pi n) t s).
* ``sum_density``: the sample-mean density at tau,
  log ~ 0.5 log n - n I(tau) - 0.5 log(2 pi) - log s(t_tau).

Conditioning on the exceedance event {S_n >= n a_n} mixes point conditionals
over a thin window [a_n, a_n + eta_n] of levels: the weight of level tau is
proportional to ``exp(-n I(tau)) / s(t_tau)``, which decays like
``exp(-n t (tau - a_n))``, so Gauss-Legendre nodes are packed against a_n by
the substitution ``tau = a_n + eta u^2``.  The mixture is renormalized to
unit mass; the raw prefactor of the asymptotic formula is kept as a
diagnostic (it is not itself a probability normalization at finite n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import quad
from .errors import DomainError, NumericError
from .gibbs import FastGrowthParams, fast_growth_params, log_fast_growth
from .model import DensityModel
from .tilt import TiltParams, log_tilted_density, solve_tilt, solve_tilt_cached

__all__ = [
    "RatePoint",
    "rate_function",
    "tail_probability",
    "sum_density",
    "eta_window",
    "ExceedanceMixture",
    "exceedance_approx",
    "window_tail_masses",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class RatePoint:
    """Rate function value and its companions at one level x."""

    x: float
    t: float
    I: float
    s: float


def rate_function(model: DensityModel, x: float) -> RatePoint:
    """Legendre-transform rate I(x) = x t - log Phi(t) with m(t) = x."""
    tp = solve_tilt_cached(model, float(x))
    return RatePoint(x=float(x), t=tp.t, I=float(x) * tp.t - tp.log_phi, s=tp.s)


def tail_probability(model: DensityModel, n: int, a_n: float) -> float:
    """log P(S_n >= n a_n) by the saddlepoint tail formula."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n!r}")
    rp = rate_function(model, a_n)
    if not (rp.t * rp.s > 0):
        raise DomainError(
            f"tail formula needs a level above the mean (t s = {rp.t * rp.s!r})"
        )
    return -n * rp.I - 0.5 * math.log(2.0 * math.pi * n) - math.log(rp.t * rp.s)


def sum_density(model: DensityModel, n: int, tau: float) -> float:
    """log density of the sample mean S_n / n at tau (saddlepoint form)."""
    if n < 2:
        raise DomainError(f"need n >= 2, got {n!r}")
    rp = rate_function(model, tau)
    return 0.5 * math.log(n) - n * rp.I - 0.5 * _LOG_2PI - math.log(rp.s)


def eta_window(model: DensityModel, n: int, a_n: float) -> float:
    """Window width eta_n = log(n) / (sqrt(n) t) for the exceedance mixture.

    Vanishes as n grows while n * t * eta = sqrt(n) log(n) still diverges,
    which is exactly what the mixture construction requires.
    """
    t = solve_tilt_cached(model, float(a_n)).t
    if not (t > 0):
        raise DomainError("window needs a level above the mean (t > 0)")
    return math.log(n) / (math.sqrt(n) * t)


class ExceedanceMixture:
    """Renormalized mixture approximating X_1 given S_n >= n a_n.

    ``variant="tilted"`` mixes plain tilted densities over the window levels
    (the literal reading of the defining formula, whose two growth clauses
    then coincide); ``variant="gaussian_modulated"`` mixes fast-growth
    modulated densities instead, the reading suggested by the fast-growth
    point theorem.  ``raw_prefactor`` stores the mass the un-renormalized
    asymptotic formula would assign.
    """

    def __init__(
        self,
        model: DensityModel,
        n: int,
        a_n: float,
        variant: str = "tilted",
        n_nodes: int = 32,
        eta: float | None = None,
    ):
        if variant not in ("tilted", "gaussian_modulated"):
            raise DomainError(f"unknown variant {variant!r}")
        self.model = model
        self.n = int(n)
        self.a_n = float(a_n)
        self.variant = variant
        self.tp = solve_tilt_cached(model, float(a_n))
        self.eta = eta_window(model, n, a_n) if eta is None else float(eta)
        if not (self.eta > 0):
            raise DomainError("window width must be positive")

        u01, w01 = np.polynomial.legendre.leggauss(n_nodes)
        u = 0.5 * (u01 + 1.0)
        w = 0.5 * w01
        self.taus = self.a_n + self.eta * u**2
        jac = 2.0 * self.eta * u

        I_a = self.a_n * self.tp.t - self.tp.log_phi
        self._tps: list[TiltParams] = []
        self._fps: list[FastGrowthParams | None] = []
        log_w = np.empty(n_nodes)
        log_w_plain = np.empty(n_nodes)
        for j, tau in enumerate(self.taus):
            try:
                tp_j = solve_tilt_cached(model, float(tau))
            except (DomainError, NumericError) as exc:
                raise NumericError(f"tilt solve failed at window node tau={tau!r}") from exc
            self._tps.append(tp_j)
            I_j = tau * tp_j.t - tp_j.log_phi
            log_w_plain[j] = -self.n * (I_j - I_a) - math.log(tp_j.s)
            log_w[j] = log_w_plain[j] + math.log(jac[j] * w[j])
            if variant == "gaussian_modulated":
                self._fps.append(fast_growth_params(model, self.n, float(tau), tp=tp_j))
            else:
                self._fps.append(None)

        self._log_w_plain = log_w_plain
        top = np.max(log_w)
        self.log_norm = float(top + math.log(np.sum(np.exp(log_w - top))))
        self.log_weights = log_w - self.log_norm
        # mass assigned by the literal asymptotic prefactor t s exp(n I(a))
        self.raw_prefactor = math.exp(
            math.log(self.tp.t * self.tp.s) + self.log_norm
        )

    def log_density(self, y) -> np.ndarray:
        arr = np.atleast_1d(np.asarray(y, dtype=float))
        acc = np.full(arr.shape, -np.inf)
        for j, tp_j in enumerate(self._tps):
            if self.variant == "tilted":
                lk = log_tilted_density(self.model, tp_j, arr)
            else:
                lk = log_fast_growth(self._fps[j], self.model, arr)
            acc = np.logaddexp(acc, self.log_weights[j] + lk)
        return acc

    def density(self, y):
        arr = np.asarray(y, dtype=float)
        out = np.exp(self.log_density(arr))
        out = out.reshape(arr.shape) if arr.ndim else out[0]
        return float(out) if np.isscalar(y) or arr.ndim == 0 else out

    def weight_values(self) -> np.ndarray:
        """Un-jacobianed weight integrand exp(-n I(tau))/s(t_tau), scaled."""
        return np.exp(self._log_w_plain - np.max(self._log_w_plain))


@lru_cache(maxsize=256)
def _mixture_cached(model: DensityModel, n: int, a_n: float, variant: str, eta: float | None) -> ExceedanceMixture:
    return ExceedanceMixture(model, n, a_n, variant=variant, eta=eta)


def exceedance_approx(
    model: DensityModel,
    n: int,
    a_n: float,
    y,
    variant: str = "tilted",
    eta: float | None = None,
):
    """Mixture approximation of the law of X_1 given S_n >= n a_n.

    Returns the renormalized mixture density at y.  The raw asymptotic
    prefactor is available as ``ExceedanceMixture(...).raw_prefactor``.
    """
    mix = _mixture_cached(model, int(n), float(a_n), variant, eta)
    return mix.density(y)


def window_tail_masses(model: DensityModel, n: int, a_n: float, eta: float | None = None) -> tuple[float, float]:
    """log masses of the mean density inside and beyond the mixing window.

    Returns (log P1, log P2) where P1 integrates exp(sum_density) over
    [a_n, a_n + eta] and P2 over [a_n + eta, infinity).  The mixture
    construction is sound when P2 is negligible against P1.
    """
    eta = eta_window(model, n, a_n) if eta is None else float(eta)
    u01, w01 = np.polynomial.legendre.leggauss(32)
    u = 0.5 * (u01 + 1.0)
    w = 0.5 * w01
    taus = a_n + eta * u**2
    jac = 2.0 * eta * u
    logs = np.array([sum_density(model, n, float(tau)) for tau in taus])
    logs += np.log(jac * w)
    top = np.max(logs)
    log_p1 = float(top + math.log(np.sum(np.exp(logs - top))))

    edge = a_n + eta
    t_edge = solve_tilt_cached(model, edge).t
    scale = max(1.0 / (n * t_edge), 1e-12)
    # the integrand decays like exp(-n t (tau - edge)); a coarse panel scheme
    # resolves the ratio P2/P1 to far more digits than it needs
    res = quad.log_integral(
        lambda tau: np.array([sum_density(model, n, float(v)) for v in np.atleast_1d(tau)]),
        center=edge,
        scale=scale,
        lo=edge,
        rel_tol=1e-8,
        order=8,
        growth=2.0,
        grow_after=2,
        tail_pad=1,
        max_panels=80,
    )
    return log_p1, res.log_value
