"""Ground-truth machinery: grid convolutions, exact conditionals, Monte Carlo.

The exact conditional law of one coordinate given a sum constraint follows
from the Bayes factorization

    p(X_1 = y | S_n = n a) = p(y) f_(n-1)(n a - y) / f_n(n a)

with f_j the j-fold convolution density.  Evaluated literally on the raw
density this is numerically hopeless at extreme levels: f_n(n a) sits
exp(-n I(a)) below the convolution peak, far under float precision.  The
factorization, however, is invariant under exponential tilting, so this
module convolves the *tilted* density at level a instead; the conditioning
point then lies at the center of every grid and all factors are O(1).  The
resulting values are mathematically identical to the raw formula.

Monte Carlo conditioning uses the same trick: proposals are drawn i.i.d.
from the tilted density, whose sample mean already concentrates at the
target level, so the acceptance window keeps a constant fraction of draws
instead of an exponentially small one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError, NumericError, RangeError, ResourceError
from .model import DensityModel
from . import quad
from .tilt import TiltParams, log_tilted_density, solve_tilt, tilted_density

__all__ = [
    "GridDensity",
    "discretize",
    "self_convolve",
    "ConditionalOracle",
    "get_oracle",
    "exact_conditional",
    "exact_exceedance_conditional",
    "McSample",
    "mc_conditional_sample",
    "TVResult",
    "tv_distance",
    "tv_from_values",
    "tv_histogram",
    "ks_statistic",
]

_MAX_GRID_POINTS = 40_000_000


@dataclass
class GridDensity:
    """A density tabulated on a uniform grid, normalized to unit mass."""

    lo: float
    hi: float
    step: float
    values: np.ndarray
    mass: float
    clipped: float = 0.0

    def __post_init__(self) -> None:
        n = len(self.values)
        if n < 2:
            raise DomainError("grid needs at least two nodes")
        span = (self.hi - self.lo) / self.step
        if abs(span - (n - 1)) > 1e-6:
            raise DomainError("(hi - lo)/step must match the node count")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("grid values must be finite")

    def x(self) -> np.ndarray:
        return self.lo + self.step * np.arange(len(self.values))

    def trapz_mass(self) -> float:
        return float(np.trapezoid(self.values, dx=self.step))

    def normalized(self) -> "GridDensity":
        m = self.trapz_mass()
        if not (m > 0):
            raise NumericError("cannot normalize a grid with nonpositive mass")
        return GridDensity(self.lo, self.hi, self.step, self.values / m, 1.0, self.clipped)

    def interp(self, x) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.x(), self.values, left=0.0, right=0.0)

    def mean(self) -> float:
        xs = self.x()
        return float(np.trapezoid(xs * self.values, dx=self.step) / self.trapz_mass())

    def var(self) -> float:
        xs = self.x()
        m = self.mean()
        return float(np.trapezoid((xs - m) ** 2 * self.values, dx=self.step) / self.trapz_mass())

    def to_csv(self, path: str) -> None:
        xs = self.x()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,density\n")
            for xi, vi in zip(xs, self.values):
                fh.write(f"{xi:.17g},{vi:.17g}\n")

    @staticmethod
    def from_csv(path: str) -> "GridDensity":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        xs, vals = data[:, 0], data[:, 1]
        step = float(xs[1] - xs[0])
        return GridDensity(float(xs[0]), float(xs[-1]), step, vals, float(np.trapezoid(vals, dx=step)))


def _model_tail_mass(model: DensityModel, lo: float, hi: float) -> float:
    """Mass of the model outside [lo, hi], via log-space tail quadrature."""
    total = 0.0
    if lo > model.support_lo:
        res = quad.log_integral(
            model._log_density_clipped, center=lo, scale=_edge_scale(model, lo),
            lo=model.support_lo, hi=lo,
        )
        total += math.exp(res.log_value)
    res = quad.log_integral(
        model._log_density_clipped, center=hi, scale=_edge_scale(model, hi), lo=hi
    )
    total += math.exp(res.log_value)
    return total


def _edge_scale(model: DensityModel, x: float) -> float:
    try:
        hp = float(model.h_prime(max(x, model.h_zero + 1e-9)))
        if hp > 0 and np.isfinite(hp):
            return 1.0 / math.sqrt(hp)
    except (ValueError, FloatingPointError):
        pass
    return 1.0


def discretize(source, lo: float, hi: float, step: float, clipped_mass: float | None = None) -> GridDensity:
    """Tabulate a density on [lo, hi] and renormalize to unit mass.

    ``source`` is a DensityModel or a callable returning density values.
    The clipped tail mass is recorded; for models it is computed by tail
    quadrature, for callables it is estimated as the trapezoid mass deficit
    unless the caller supplies a sharper ``clipped_mass`` figure.  Raises
    RangeError when more than 1e-6 of mass falls outside the grid.
    """
    if not (hi > lo) or not (step > 0):
        raise DomainError("need hi > lo and step > 0")
    n = int(round((hi - lo) / step)) + 1
    if n > _MAX_GRID_POINTS:
        raise ResourceError(f"grid of {n} nodes exceeds the memory guard; coarsen the step")
    xs = lo + step * np.arange(n)
    if isinstance(source, DensityModel):
        vals = np.exp(source._log_density_clipped(xs))
        clipped = _model_tail_mass(source, lo, xs[-1]) if clipped_mass is None else clipped_mass
    else:
        vals = np.asarray(source(xs), dtype=float)
        if clipped_mass is None:
            clipped = max(0.0, 1.0 - float(np.trapezoid(vals, dx=step)))
        else:
            clipped = clipped_mass
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise DomainError("density values must be finite and nonnegative")
    if clipped > 1e-6:
        raise RangeError(f"clipped tail mass {clipped:.3e} exceeds 1e-6; widen the bounds")
    g = GridDensity(lo, float(xs[-1]), step, vals, float(np.trapezoid(vals, dx=step)), clipped)
    return g.normalized()


def _convolve_pair(a: GridDensity, b: GridDensity) -> GridDensity:
    if abs(a.step - b.step) > 1e-15 * max(a.step, b.step):
        raise DomainError("convolution requires identical grid steps")
    n_out = len(a.values) + len(b.values) - 1
    if n_out > _MAX_GRID_POINTS:
        raise ResourceError(f"convolution of {n_out} nodes exceeds the memory guard; coarsen the step")
    # half-weight endpoints make the discrete sum a trapezoid rule on the
    # overlap, which matters when a density jumps at its support edge
    av = a.values.copy()
    bv = b.values.copy()
    av[0] *= 0.5
    av[-1] *= 0.5
    bv[0] *= 0.5
    bv[-1] *= 0.5
    vals = fftconvolve(av, bv) * a.step
    np.maximum(vals, 0.0, out=vals)
    lo = a.lo + b.lo
    hi = lo + a.step * (n_out - 1)
    return GridDensity(lo, hi, a.step, vals, float(np.trapezoid(vals, dx=a.step))).normalized()


class ConvolutionTable:
    """Lazily computed convolution powers of a base grid, by binary splits."""

    def __init__(self, base: GridDensity):
        self._powers: dict[int, GridDensity] = {1: base}

    def power(self, j: int) -> GridDensity:
        if j < 1:
            raise DomainError(f"convolution power must be >= 1, got {j!r}")
        got = self._powers.get(j)
        if got is not None:
            return got
        half = 1 << (j.bit_length() - 1)
        if half == j:
            part = self.power(j // 2)
            out = _convolve_pair(part, part)
        else:
            out = _convolve_pair(self.power(half), self.power(j - half))
        self._powers[j] = out
        return out


def self_convolve(d: GridDensity, n: int) -> GridDensity:
    """Density of the sum of n i.i.d. copies of the gridded variable."""
    return ConvolutionTable(d).power(int(n))


# ---------------------------------------------------------------------------
# exact conditionals
# ---------------------------------------------------------------------------


def _log_interp(grid: GridDensity, v) -> np.ndarray:
    """Log of linearly interpolated grid values; -inf outside or at zeros."""
    vals = grid.interp(v)
    out = np.full(np.shape(vals), -np.inf)
    pos = vals > 0
    out[pos] = np.log(vals[pos])
    return out


def _cell_log_integrals(x: np.ndarray, logf: np.ndarray) -> np.ndarray:
    """Per-cell trapezoid integrals of exp(logf), in log scale."""
    step = x[1] - x[0]
    return np.log(0.5 * step) + np.logaddexp(logf[:-1], logf[1:])


class ConditionalOracle:
    """Exact conditional laws for one model at one (n, a_n) pair.

    Builds the tilted base grid once and reuses its convolution powers for
    point conditionals (any k <= 3), exceedance conditionals, tail
    probabilities, and sum densities.
    """

    def __init__(
        self,
        model: DensityModel,
        n: int,
        a_n: float,
        step: float = 1e-3,
        pad: float = 14.0,
    ):
        if n < 2:
            raise DomainError(f"need n >= 2, got {n!r}")
        self.model = model
        self.n = int(n)
        self.a_n = float(a_n)
        self.step = float(step)
        tp = solve_tilt(model, float(a_n))
        if tp.t < 0.0:
            # below-mean levels are not rare events; an upward-reweighted
            # tilted grid would amplify convolution noise, so use the raw
            # density (tilt zero) instead - the factorization is invariant
            from .tilt import tilt_moments

            tp = tilt_moments(model, 0.0)
        self.tp: TiltParams = tp
        s = self.tp.s
        center = self.tp.a
        lo = max(model.support_lo, center - pad * s)
        hi = center + pad * s
        base = discretize(
            lambda x: tilted_density(model, self.tp, x),
            lo,
            hi,
            step,
            clipped_mass=self._tilted_tail_mass(lo, hi),
        )
        self.table = ConvolutionTable(base)
        self._suffix_cache: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def _tilted_tail_mass(self, lo: float, hi: float) -> float:
        """True mass of the tilted density outside [lo, hi], in log space."""

        def log_pi(x):
            return log_tilted_density(self.model, self.tp, np.asarray(x, dtype=float))

        total = 0.0
        if lo > self.model.support_lo:
            res = quad.log_integral(log_pi, center=lo, scale=self.tp.s, lo=self.model.support_lo, hi=lo)
            total += math.exp(res.log_value)
        res = quad.log_integral(log_pi, center=hi, scale=self.tp.s, lo=hi)
        total += math.exp(res.log_value)
        return total

    # -- point conditional ---------------------------------------------------

    def log_conditional(self, ys) -> float:
        """Log density of (X_1..X_k) given the sum equals n * a_n."""
        ys = np.atleast_1d(np.asarray(ys, dtype=float))
        k = len(ys)
        if k >= self.n:
            raise DomainError("need k < n")
        target = self.n * self.a_n
        rest = target - float(np.sum(ys))
        f_rest = self.table.power(self.n - k)
        f_full = self.table.power(self.n)
        log_num = float(np.sum(log_tilted_density(self.model, self.tp, ys)))
        log_num += float(_log_interp(f_rest, np.asarray([rest]))[0])
        return log_num - float(_log_interp(f_full, np.asarray([target]))[0])

    def conditional_density(self, ys) -> float:
        return math.exp(self.log_conditional(ys))

    def conditional_curve(self, ys: np.ndarray) -> np.ndarray:
        """Vectorized k = 1 conditional density over an array of y values."""
        ys = np.asarray(ys, dtype=float)
        target = self.n * self.a_n
        f_rest = self.table.power(self.n - 1)
        f_full = self.table.power(self.n)
        logs = log_tilted_density(self.model, self.tp, ys)
        logs = logs + _log_interp(f_rest, target - ys)
        logs = logs - float(_log_interp(f_full, np.asarray([target]))[0])
        return np.exp(logs)

    def joint2_grid(self, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
        """k = 2 conditional density on the product grid y1 x y2."""
        if self.n <= 2:
            raise DomainError("joint conditional needs n > 2")
        target = self.n * self.a_n
        f_rest = self.table.power(self.n - 2)
        f_full = self.table.power(self.n)
        l1 = log_tilted_density(self.model, self.tp, y1)
        l2 = log_tilted_density(self.model, self.tp, y2)
        rest = target - (y1[:, None] + y2[None, :])
        logs = l1[:, None] + l2[None, :] + _log_interp(f_rest, rest)
        logs -= float(_log_interp(f_full, np.asarray([target]))[0])
        return np.exp(logs)

    # -- exceedance conditional and tails -------------------------------------

    def _suffix(self, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Suffix log integrals of e^(-t v) f_j(v) from each node upward."""
        got = self._suffix_cache.get(j)
        if got is not None:
            return got
        grid = self.table.power(j)
        v = grid.x()
        with np.errstate(divide="ignore"):
            logf = np.where(grid.values > 0, np.log(grid.values), -np.inf)
        logg = -self.tp.t * v + logf
        cells = _cell_log_integrals(v, logg)
        suffix = np.full(len(v), -np.inf)
        suffix[:-1] = np.logaddexp.accumulate(cells[::-1])[::-1]
        self._suffix_cache[j] = (v, logg, suffix)
        return self._suffix_cache[j]

    def _log_exp_tail(self, j: int, v0) -> np.ndarray:
        """log of int_{v0}^inf e^(-t v) f_j(v) dv, vectorized in v0."""
        v, logg, suffix = self._suffix(j)
        v0 = np.atleast_1d(np.asarray(v0, dtype=float))
        out = np.full(v0.shape, -np.inf)
        step = v[1] - v[0]
        below = v0 <= v[0]
        out[below] = suffix[0]
        inside = (v0 > v[0]) & (v0 < v[-1])
        if np.any(inside):
            vi = v0[inside]
            idx = np.minimum(((vi - v[0]) / step).astype(int), len(v) - 2)
            hi_node = v[idx + 1]
            # fractional cell [v0, node] plus the stored suffix from the node
            frac = hi_node - vi
            g_at = np.interp(vi, v, np.where(np.isfinite(logg), logg, -745.0))
            g_at = np.where(np.isfinite(logg[idx]) | np.isfinite(logg[idx + 1]), g_at, -np.inf)
            part = np.log(0.5 * np.maximum(frac, 1e-300)) + np.logaddexp(g_at, logg[idx + 1])
            out[inside] = np.logaddexp(part, suffix[idx + 1])
        return out

    def log_tail(self) -> float:
        """log P(S_n >= n a_n)."""
        return self.n * self.tp.log_phi + float(
            self._log_exp_tail(self.n, np.asarray([self.n * self.a_n]))[0]
        )

    def exceedance_curve(self, ys: np.ndarray) -> np.ndarray:
        """Density of X_1 given the sum exceeds n a_n, over an array of y."""
        ys = np.asarray(ys, dtype=float)
        target = self.n * self.a_n
        log_a = self._log_exp_tail(self.n - 1, target - ys)
        log_b = self._log_exp_tail(self.n, np.asarray([target]))[0]
        logp = self.model._log_density_clipped(ys)
        return np.exp(logp - self.tp.log_phi + log_a - log_b)

    def log_exceedance_conditional(self, y: float) -> float:
        logp = float(self.model._log_density_clipped(np.asarray([y]))[0])
        target = self.n * self.a_n
        log_a = float(self._log_exp_tail(self.n - 1, np.asarray([target - y]))[0])
        log_b = float(self._log_exp_tail(self.n, np.asarray([target]))[0])
        return logp - self.tp.log_phi + log_a - log_b

    def log_sum_density(self, x: float) -> float:
        """log of the n-fold convolution density of the raw model at x."""
        f_full = self.table.power(self.n)
        return (
            self.n * self.tp.log_phi
            - self.tp.t * x
            + float(_log_interp(f_full, np.asarray([x]))[0])
        )

    def log_mean_density(self, tau: float) -> float:
        """log density of the sample mean at tau (n times the sum density)."""
        return math.log(self.n) + self.log_sum_density(self.n * tau)

    def default_ygrid(self, width: float = 10.0, step: float | None = None) -> np.ndarray:
        s = self.tp.s
        lo = max(self.model.support_lo, self.a_n - width * s)
        hi = self.a_n + width * s
        st = self.step if step is None else step
        return np.arange(lo, hi + 0.5 * st, st)


@lru_cache(maxsize=64)
def get_oracle(model: DensityModel, n: int, a_n: float, step: float = 1e-3, pad: float = 14.0) -> ConditionalOracle:
    """Shared oracle cache; models hash by identity."""
    return ConditionalOracle(model, n, a_n, step=step, pad=pad)


def exact_conditional(model: DensityModel, n: int, a_n: float, ys, step: float = 1e-3) -> float:
    """Exact conditional density of (X_1..X_k) given S_n = n a_n, k <= 3."""
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if len(ys) > 3:
        raise DomainError("point conditionals support k <= 3 (grid cost)")
    return get_oracle(model, n, float(a_n), step).conditional_density(ys)


def exact_exceedance_conditional(model: DensityModel, n: int, a_n: float, y: float, step: float = 1e-3) -> float:
    """Exact conditional density of X_1 given S_n >= n a_n."""
    return math.exp(get_oracle(model, n, float(a_n), step).log_exceedance_conditional(float(y)))


# ---------------------------------------------------------------------------
# Monte Carlo conditioning
# ---------------------------------------------------------------------------


@dataclass
class McSample:
    """Accepted first-coordinate draws plus bookkeeping for one MC run."""

    x1: np.ndarray
    acceptance_rate: float
    n_proposals: int
    epsilon: float
    tp: TiltParams
    all_x1: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    accepted_mask: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0, dtype=bool))

    def dump_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("draw_index,x1,accepted\n")
            for i, (x, ok) in enumerate(zip(self.all_x1, self.accepted_mask)):
                fh.write(f"{i},{x:.17g},{int(ok)}\n")


def _inverse_cdf_table(model: DensityModel, tp: TiltParams | None, n_nodes: int = 20001):
    """Inverse-CDF sampler table for the tilted (or raw) density."""
    if tp is not None:
        s = tp.s
        lo = max(model.support_lo, tp.a - 14.0 * s)
        hi = tp.a + 14.0 * s
        xs = np.linspace(lo, hi, n_nodes)
        vals = np.exp(log_tilted_density(model, tp, xs))
    else:
        lo = model.support_lo
        hi = max(model.h_zero, lo) + 1.0
        peak = float(np.max(model._log_density_clipped(np.linspace(lo, hi, 64))))
        while float(model._log_density_clipped(np.asarray([hi]))[0]) > peak - 80.0:
            hi = lo + 2.0 * (hi - lo)
        xs = np.linspace(lo, hi, n_nodes)
        vals = np.exp(model._log_density_clipped(xs))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (vals[1:] + vals[:-1]) * np.diff(xs))])
    cdf /= cdf[-1]
    return xs, cdf


def mc_conditional_sample(
    model: DensityModel,
    n: int,
    a_n: float,
    epsilon: float,
    n_draws: int,
    seed: int,
    proposal: str = "tilted",
    batch: int = 65536,
) -> McSample:
    """Sample X_1 given |S_n / n - a_n| <= epsilon by accept/reject.

    Proposals are rows of n i.i.d. draws from the tilted density at level
    a_n (or from the raw density with ``proposal="raw"``, which is useful
    only to demonstrate how badly that performs).  Streams are derived from
    ``(seed, batch_index)`` so identical seeds give bit-identical output and
    batches are independent.
    """
    if not (epsilon > 0):
        raise DomainError("epsilon must be positive")
    if n_draws < 1:
        raise DomainError("need at least one proposal")
    tp = solve_tilt(model, float(a_n))
    xs, cdf = _inverse_cdf_table(model, tp if proposal == "tilted" else None)

    kept: list[np.ndarray] = []
    all_x1: list[np.ndarray] = []
    masks: list[np.ndarray] = []
    done = 0
    batch_index = 0
    n_acc = 0
    while done < n_draws:
        rows = min(batch, n_draws - done)
        rng = np.random.default_rng([seed, batch_index])
        u = rng.random((rows, n))
        draws = np.interp(u, cdf, xs)
        means = draws.mean(axis=1)
        mask = np.abs(means - a_n) <= epsilon
        kept.append(draws[mask, 0])
        all_x1.append(draws[:, 0])
        masks.append(mask)
        n_acc += int(mask.sum())
        done += rows
        batch_index += 1

    rate = n_acc / n_draws
    if rate < 1e-6 and proposal == "tilted":
        raise NumericError(
            f"acceptance rate {rate:.2e} below 1e-6; enlarge epsilon "
            f"(CLT scale is s/sqrt(n) = {tp.s / math.sqrt(n):.3g})"
        )
    return McSample(
        x1=np.concatenate(kept) if kept else np.empty(0),
        acceptance_rate=rate,
        n_proposals=n_draws,
        epsilon=float(epsilon),
        tp=tp,
        all_x1=np.concatenate(all_x1),
        accepted_mask=np.concatenate(masks),
    )


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TVResult:
    tv: float
    sup_gap: float


def _values_on(obj, xs: np.ndarray) -> np.ndarray:
    if isinstance(obj, GridDensity):
        return obj.interp(xs)
    return np.asarray(obj(xs), dtype=float)


def tv_distance(f, g, grid=None) -> TVResult:
    """Total variation distance (half the L1 gap) after renormalizing both.

    ``f`` and ``g`` are GridDensity objects or callables.  ``grid`` is a
    ``(lo, hi, step)`` triple or an array of nodes; it may be omitted when
    both inputs are GridDensity objects with identical layout.
    """
    if grid is None:
        if (
            isinstance(f, GridDensity)
            and isinstance(g, GridDensity)
            and f.lo == g.lo
            and f.step == g.step
            and len(f.values) == len(g.values)
        ):
            xs = f.x()
        else:
            raise DomainError("grid required unless both inputs share a grid layout")
    elif isinstance(grid, tuple):
        lo, hi, step = grid
        xs = np.arange(lo, hi + 0.5 * step, step)
    else:
        xs = np.asarray(grid, dtype=float)
    fv = _values_on(f, xs)
    gv = _values_on(g, xs)
    mf = np.trapezoid(fv, xs)
    mg = np.trapezoid(gv, xs)
    if not (mf > 0 and mg > 0):
        raise DomainError("both densities must carry positive mass on the grid")
    fv = fv / mf
    gv = gv / mg
    diff = fv - gv
    return TVResult(
        tv=float(0.5 * np.trapezoid(np.abs(diff), xs)),
        sup_gap=float(np.max(np.abs(diff))),
    )


def tv_from_values(fv: np.ndarray, gv: np.ndarray, cell: float) -> float:
    """TV distance of two nonnegative value arrays sharing a uniform cell."""
    fv = np.asarray(fv, dtype=float)
    gv = np.asarray(gv, dtype=float)
    fs = fv.sum() * cell
    gs = gv.sum() * cell
    if not (fs > 0 and gs > 0):
        raise DomainError("both value arrays must carry positive mass")
    return float(0.5 * np.sum(np.abs(fv / fs - gv / gs)) * cell)


def tv_histogram(samples: np.ndarray, density, lo: float, hi: float, bins: int) -> float:
    """TV distance between a sample histogram and a density, per bin mass."""
    samples = np.asarray(samples, dtype=float)
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(samples, bins=edges)
    inside = counts.sum()
    if inside == 0:
        raise DomainError("no samples fall inside [lo, hi]")
    p_hat = counts / inside
    fine = 8
    xs = np.linspace(lo, hi, bins * fine + 1)
    vals = _values_on(density, xs)
    cell_mass = np.add.reduceat(
        0.5 * (vals[1:] + vals[:-1]) * np.diff(xs), np.arange(0, bins * fine, fine)
    )
    cell_mass = cell_mass / cell_mass.sum()
    return float(0.5 * np.sum(np.abs(p_hat - cell_mass)))


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """Kolmogorov-Smirnov distance between a sample and a reference CDF."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise DomainError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))
