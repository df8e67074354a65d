"""Log-domain quadrature for sharply peaked integrands.

Integrals of the form ``exp(log_f(x))`` over a half line are evaluated by
tiling the axis with Gauss-Legendre panels centered at the integrand's peak
and sized by its local width, accumulating everything as log-sum-exp.  The
exponent is never exponentiated globally, so integrands whose log values
reach hundreds of thousands remain exact to relative rounding.

Panels are added outward from the center until two consecutive panels each
contribute less than ``rel_tol`` of the running total; a few padding panels
follow so that low-order moments of the integrand are converged as well, not
only its mass.  Panel widths grow geometrically far from the peak, which
covers sub-Gaussian and exponential tails alike at modest cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import NumericError

__all__ = ["LogQuad", "log_integral", "find_peak"]

_LEGGAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    got = _LEGGAUSS_CACHE.get(order)
    if got is None:
        got = np.polynomial.legendre.leggauss(order)
        _LEGGAUSS_CACHE[order] = got
    return got


def _logsumexp(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return -np.inf
    top = np.max(values)
    if not np.isfinite(top):
        return float(top) if top == -np.inf else float(top)
    return float(top + np.log(np.sum(np.exp(values - top))))


@dataclass(frozen=True)
class LogQuad:
    """Result of a log-domain panel integration.

    ``logsumexp(log_terms)`` equals ``log_value``; ``nodes`` are the abscissas
    and ``offsets`` the same abscissas expressed in units of the panel scale
    relative to the center (kept for cancellation-free moment extraction).
    """

    log_value: float
    nodes: np.ndarray
    offsets: np.ndarray
    log_terms: np.ndarray
    center: float
    scale: float
    panels: int


def _panel_terms(log_f, a: float, b: float, center: float, scale: float, order: int):
    x01, w01 = _leggauss(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * x01
    vals = np.asarray(log_f(x), dtype=float)
    logw = np.log(w01 * half)
    return x, (x - center) / scale, vals + logw


def log_integral(
    log_f,
    center: float,
    scale: float,
    lo: float = -np.inf,
    hi: float = np.inf,
    rel_tol: float = 1e-12,
    order: int = 32,
    panel_width: float = 1.5,
    growth: float = 1.4,
    grow_after: int = 10,
    tail_pad: int = 4,
    max_panels: int = 400,
) -> LogQuad:
    """Integrate ``exp(log_f)`` over ``[lo, hi]`` around a peak at ``center``.

    ``scale`` sets the initial panel width (roughly the peak's standard
    deviation).  Raises :class:`NumericError` when the panel budget is
    exhausted before the tails stop contributing, which is the signature of a
    divergent or pathologically slow-decaying integrand.
    """
    if not np.isfinite(scale) or scale <= 0.0:
        raise NumericError(f"invalid quadrature scale {scale!r}")
    if hi <= lo:
        raise NumericError(f"empty integration range [{lo}, {hi}]")
    c = float(min(max(center, lo), hi)) if np.isfinite(center) else lo
    w0 = panel_width * scale

    all_x: list[np.ndarray] = []
    all_u: list[np.ndarray] = []
    all_terms: list[np.ndarray] = []
    panel_logs: list[float] = []
    running = -np.inf
    n_panels = 0

    for direction in (+1, -1):
        edge = c
        width = w0
        small_run = 0
        pads_left = tail_pad
        k = 0
        while True:
            if direction > 0:
                a, b = edge, min(edge + width, hi)
            else:
                a, b = max(edge - width, lo), edge
            if b - a <= 0.0:
                break
            x, u, terms = _panel_terms(log_f, a, b, c, scale, order)
            all_x.append(x)
            all_u.append(u)
            all_terms.append(terms)
            contrib = _logsumexp(terms)
            panel_logs.append(contrib)
            running = np.logaddexp(running, contrib)
            n_panels += 1
            edge = b if direction > 0 else a
            k += 1
            if k >= grow_after:
                width = min(width * growth, 60.0 * scale)
            at_boundary = (direction > 0 and edge >= hi) or (direction < 0 and edge <= lo)
            if contrib < running + np.log(rel_tol) or contrib == -np.inf:
                small_run += 1
            else:
                small_run = 0
            if small_run >= 2:
                if pads_left <= 0:
                    break
                pads_left -= 1
            if at_boundary:
                break
            if n_panels >= max_panels:
                raise NumericError(
                    "panel budget exhausted; integrand decays too slowly or diverges "
                    f"(center={c!r}, scale={scale!r})"
                )

    nodes = np.concatenate(all_x) if all_x else np.empty(0)
    offsets = np.concatenate(all_u) if all_u else np.empty(0)
    log_terms = np.concatenate(all_terms) if all_terms else np.empty(0)
    return LogQuad(
        log_value=_logsumexp(log_terms),
        nodes=nodes,
        offsets=offsets,
        log_terms=log_terms,
        center=c,
        scale=scale,
        panels=n_panels,
    )


def _scalar(log_f, x: float) -> float:
    return float(np.asarray(log_f(np.asarray([x], dtype=float)))[0])


def find_peak(
    log_f,
    lo: float,
    hi: float = np.inf,
    x0: float | None = None,
    scale_hint: float = 1.0,
    max_doublings: int = 500,
) -> tuple[float, float]:
    """Locate the maximum of ``log_f`` on ``[lo, hi]`` and its half width.

    Returns ``(xhat, sigma)`` where ``sigma`` is the distance at which the log
    integrand drops by one half from its peak (the standard deviation for a
    Gaussian peak).  Used when no analytic saddle point is available.
    """
    tiny = 1e-12 * max(1.0, abs(lo)) + 1e-300
    left = lo + tiny
    if x0 is None or not np.isfinite(x0) or not (left < x0 < hi):
        x0 = left + scale_hint if np.isinf(hi) else min(left + scale_hint, 0.5 * (left + hi))
    step = max(scale_hint, 1e-8)
    xa, xb = x0, x0
    fa = f0 = fb = _scalar(log_f, x0)

    # walk uphill, doubling the step, until the maximum is bracketed
    for _ in range(max_doublings):
        xr = min(xb + step, hi)
        fr = _scalar(log_f, xr) if xr > xb else -np.inf
        if fr > fb and xr > xb:
            xa, fa = xb, fb
            xb, fb = xr, fr
            step *= 2.0
            continue
        xl = max(xa - step, left)
        fl = _scalar(log_f, xl) if xl < xa else -np.inf
        if fl > fa and xl < xa:
            xb, fb = xa, fa
            xa, fa = xl, fl
            step *= 2.0
            continue
        # bracketed: widen the span by one step on each side when possible
        xa = max(xa - step, left)
        xb = min(xb + step, hi)
        break
    else:
        raise NumericError("could not bracket the integrand peak")

    res = minimize_scalar(
        lambda x: -_scalar(log_f, x),
        bounds=(xa, xb),
        method="bounded",
        options={"xatol": 1e-10 * max(1.0, abs(xb))},
    )
    xhat = float(res.x)
    fhat = -float(res.fun)
    if not np.isfinite(fhat):
        raise NumericError("integrand peak is not finite")

    def drop_at(d: float, sign: int) -> float:
        x = xhat + sign * d
        if x <= left or x >= hi:
            # width not measurable past the boundary on this side
            return -np.inf
        return fhat - _scalar(log_f, x)

    def half_width(sign: int) -> float:
        d = max(1e-8, 1e-6 * max(1.0, abs(xhat)))
        for _ in range(200):
            dr = drop_at(d, sign)
            if dr == -np.inf:
                return np.inf
            if dr >= 0.5:
                break
            d *= 2.0
        else:
            return np.inf
        lo_d, hi_d = d / 2.0, d
        for _ in range(60):
            mid = 0.5 * (lo_d + hi_d)
            if drop_at(mid, sign) >= 0.5:
                hi_d = mid
            else:
                lo_d = mid
        return hi_d

    widths = [w for w in (half_width(+1), half_width(-1)) if np.isfinite(w)]
    if not widths:
        if np.isfinite(hi):
            return xhat, max((hi - left) / 8.0, 1e-12)
        raise NumericError("integrand has no measurable width around its peak")
    return xhat, min(widths)
