"""Exponential tilting engine.

The tilted density with parameter t is ``pi_t(x) = e^(t x) p(x) / Phi(t)``
where ``Phi(t)`` is the moment generating function of the model.  Everything
here is computed by saddle-centered quadrature in log space:

* ``log_mgf`` integrates ``e^(t x) p(x)`` after substituting
  ``x = xhat + sigma u`` with ``xhat`` the inverse slope at t and
  ``sigma = 1/sqrt(h'(xhat))``, so the integrand is an O(1)-width bump in u
  no matter how large t gets.
* ``tilt_moments`` extracts the tilted mean, variance and third centered
  moment from the same node set rather than by differencing ``log Phi``,
  which would amplify quadrature noise.
* ``solve_tilt`` inverts the mean function m(t) = a with a safeguarded
  Newton iteration started at ``t0 = h(a)`` (the asymptotically exact
  inverse) and a geometric bracket fallback.

All intermediate arithmetic stays in log space; densities are exponentiated
only at the API boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import quad
from .errors import DomainError, NumericError
from .model import DensityModel

__all__ = [
    "TiltParams",
    "log_mgf",
    "tilt_moments",
    "solve_tilt",
    "solve_tilt_cached",
    "tilted_density",
    "log_tilted_density",
    "normalized_tilted_density",
    "asymptotic_moments",
    "gaussian_moment",
    "skewness_ratio",
    "variance_function",
]


@dataclass(frozen=True)
class TiltParams:
    """A solved tilt: parameter, matched mean, and tilted moments.

    ``psi_val``, ``psi_d1`` and ``psi_d2`` are the asymptotic equivalents of
    the mean, variance and third moment (NaN when the inverse slope is not
    defined at this t).
    """

    t: float
    a: float
    s2: float
    mu3: float
    log_phi: float
    psi_val: float
    psi_d1: float
    psi_d2: float

    @property
    def s(self) -> float:
        return math.sqrt(self.s2)


def _mgf_quad(model: DensityModel, t: float, rel_tol: float = 1e-12) -> quad.LogQuad:
    def log_f(x):
        return t * np.asarray(x, dtype=float) + model._log_density_clipped(x)

    center = scale = None
    if t >= model.h_min:
        try:
            xhat = model.psi(t)
            hp = float(model.h_prime(xhat))
            if np.isfinite(xhat) and hp > 0:
                center, scale = xhat, 1.0 / math.sqrt(hp)
        except (DomainError, NumericError):
            center = None
    if center is None:
        center, scale = quad.find_peak(log_f, lo=model.support_lo, scale_hint=1.0)
    res = quad.log_integral(log_f, center=center, scale=scale, lo=model.support_lo, rel_tol=rel_tol)
    if not np.isfinite(res.log_value):
        raise NumericError(f"mgf integral did not evaluate at t={t!r}")
    return res


def log_mgf(model: DensityModel, t: float) -> float:
    """log E[e^(t X)] by saddle-centered quadrature."""
    return _mgf_quad(model, float(t)).log_value


def _psi_triplet(model: DensityModel, t: float) -> tuple[float, float, float]:
    if t >= model.h_min:
        try:
            return model.psi(t), model.psi_d1(t), model.psi_d2(t)
        except (DomainError, NumericError):
            pass
    return math.nan, math.nan, math.nan


def tilt_moments(model: DensityModel, t: float) -> TiltParams:
    """Mean, variance and third centered moment of the tilted density.

    Computed as weighted moments of the quadrature nodes in peak-scaled
    coordinates, which avoids the catastrophic cancellation of forming
    central moments around a large mean.
    """
    t = float(t)
    res = _mgf_quad(model, t)
    p = np.exp(res.log_terms - res.log_value)
    u = res.offsets
    u_mean = float(np.sum(p * u))
    du = u - u_mean
    var_u = float(np.sum(p * du * du))
    mu3_u = float(np.sum(p * du * du * du))
    mean = res.center + res.scale * u_mean
    s2 = res.scale**2 * var_u
    mu3 = res.scale**3 * mu3_u
    if not (s2 > 0):
        raise NumericError(f"tilted variance not positive at t={t!r}")
    psi_val, psi_d1, psi_d2 = _psi_triplet(model, t)
    return TiltParams(
        t=t,
        a=mean,
        s2=s2,
        mu3=mu3,
        log_phi=res.log_value,
        psi_val=psi_val,
        psi_d1=psi_d1,
        psi_d2=psi_d2,
    )


def solve_tilt(
    model: DensityModel,
    a: float,
    rtol: float = 1e-12,
    max_iter: int = 120,
) -> TiltParams:
    """Solve m(t) = a for the tilt parameter t.

    Newton steps use the exact derivative m'(t) = s^2(t) and are confined to
    a monotone bracket that is expanded geometrically from the initial guess
    ``t0 = h(a)`` when needed.  The iteration accepts a solution when
    ``|m(t) - a| <= rtol * a``, with a relaxed floor when quadrature noise
    prevents further progress.
    """
    a = float(a)
    if not np.isfinite(a) or a <= model.support_lo:
        raise DomainError(f"target mean {a!r} outside the image of m for {model.name!r}")

    try:
        t = float(model.h(a))
    except (ValueError, FloatingPointError):
        t = 0.0
    if not np.isfinite(t):
        raise DomainError(f"initial tilt guess h({a!r}) is not finite")

    tp = tilt_moments(model, t)
    tol = rtol * abs(a)

    # establish a bracket [t_lo, t_hi] with m(t_lo) <= a <= m(t_hi)
    t_lo = t_hi = t
    m_lo = m_hi = tp.a
    step = max(abs(t), 1.0)
    expansions = 0
    while m_hi < a:
        t_lo, m_lo = t_hi, m_hi
        t_hi += step
        step *= 2.0
        tp_hi = tilt_moments(model, t_hi)
        m_hi = tp_hi.a
        expansions += 1
        if expansions > 80:
            raise DomainError(f"could not bracket m(t) = {a!r} from above")
    step = max(abs(t), 1.0)
    while m_lo > a:
        t_hi, m_hi = t_lo, m_lo
        t_lo -= step
        step *= 2.0
        tp_lo = tilt_moments(model, t_lo)
        m_lo = tp_lo.a
        expansions += 1
        if expansions > 160:
            raise DomainError(f"could not bracket m(t) = {a!r} from below")

    if not (t_lo <= t <= t_hi):
        t = 0.5 * (t_lo + t_hi)
        tp = tilt_moments(model, t)

    best = tp
    best_err = abs(tp.a - a)
    stall = 0
    for _ in range(max_iter):
        err = tp.a - a
        if abs(err) <= tol:
            return tp
        if abs(err) < best_err:
            best, best_err, stall = tp, abs(err), 0
        else:
            stall += 1
            if stall >= 4:
                break
        if err > 0:
            t_hi = min(t_hi, tp.t)
        else:
            t_lo = max(t_lo, tp.t)
        t_new = tp.t - err / tp.s2
        if not (t_lo < t_new < t_hi) or not np.isfinite(t_new):
            t_new = 0.5 * (t_lo + t_hi)
        if t_new == tp.t:
            break
        tp = tilt_moments(model, t_new)

    if best_err <= max(tol, 1e-9 * abs(a)):
        return best
    raise NumericError(
        f"tilt solver stalled at |m - a| = {best_err:.3e} for a = {a!r} "
        f"(tolerance {tol:.3e})"
    )


@lru_cache(maxsize=4096)
def solve_tilt_cached(model: DensityModel, a: float) -> TiltParams:
    """Memoized solve_tilt; models hash by identity, levels by exact value."""
    return solve_tilt(model, a)


def log_tilted_density(model: DensityModel, tp: TiltParams, x) -> np.ndarray:
    """Vectorized log of pi_t; -inf below the support."""
    arr = np.asarray(x, dtype=float)
    return tp.t * arr + model._log_density_clipped(arr) - tp.log_phi


def tilted_density(model: DensityModel, tp: TiltParams, x):
    """pi_t(x) = e^(t x) p(x) / Phi(t); zero below the support."""
    arr = np.asarray(x, dtype=float)
    out = np.exp(log_tilted_density(model, tp, arr))
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def normalized_tilted_density(model: DensityModel, tp: TiltParams, u):
    """Density of the standardized tilted variable (X_t - m) / s."""
    arr = np.asarray(u, dtype=float)
    s = tp.s
    x = s * arr + tp.a
    out = s * np.exp(log_tilted_density(model, tp, x))
    return float(out) if np.isscalar(u) or arr.ndim == 0 else out


def gaussian_moment(i: int) -> float:
    """i-th moment of the standard normal: 0 for odd i, (i-1)!! for even i."""
    if i < 0:
        raise DomainError("moment order must be nonnegative")
    if i % 2 == 1:
        return 0.0
    out = 1.0
    for j in range(i - 1, 0, -2):
        out *= j
    return out


def asymptotic_moments(model: DensityModel, t: float, j: int) -> float:
    """Large-t equivalent of the j-th tilted cumulant/centered moment.

    j = 2 and j = 3 map to the first and second derivatives of the inverse
    slope; higher orders reduce to Gaussian moments scaled by powers of the
    tilted standard deviation, with an odd-order correction proportional to
    the third moment.
    """
    if j < 2:
        raise DomainError(f"moment order must be >= 2, got {j!r}")
    if j == 2:
        return model.psi_d1(t)
    if j == 3:
        return model.psi_d2(t)
    tp = tilt_moments(model, t)
    s = tp.s
    if j % 2 == 0:
        return gaussian_moment(j) * s**j
    coeff = (gaussian_moment(j + 3) - 3.0 * j * gaussian_moment(j - 1)) / 6.0
    return coeff * tp.mu3 * s ** (j - 3)


def skewness_ratio(model: DensityModel, t: float) -> float:
    """mu3(t) / s^3(t) of the tilted density; tends to zero for large t."""
    tp = tilt_moments(model, t)
    return tp.mu3 / tp.s2**1.5


def variance_function(model: DensityModel, x: float) -> float:
    """Tilted variance expressed as a function of the tilted mean."""
    return solve_tilt(model, x).s2
