"""Deterministic and randomized growth bounds, violation reports, the
Kahane sup-norm experiment and growth-exponent regression."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from scipy import stats
from scipy.special import logsumexp

from .errors import DomainError
from .growth import RadiusGrid, growth_profile
from .measure import IntervalSet, MeasureConvention, h_log_measure, violation_set
from .sampler import SeedSpec, randomize, sample_sequence
from .series import DEFAULT_TOL, log_terms

DEFAULT_DELTA = 0.5


class BoundKind(str, enum.Enum):
    WIMAN = "wiman"
    ROSENBLOOM = "rosenbloom"
    SULEIMANOV = "suleimanov"
    SKASKIV_KURYLIAK = "skaskiv_kuryliak"
    UNIFIED_DET = "unified_det"
    LEVY_PLANE_MU = "levy_plane_mu"
    LEVY_PLANE_S = "levy_plane_S"
    LEVY_DISK_MU = "levy_disk_mu"
    LEVY_DISK_S = "levy_disk_S"
    UNIFIED_LEVY_S = "unified_levy_S"
    UNIFIED_LEVY_MU = "unified_levy_mu"

    @property
    def unified(self):
        return self.value.startswith("unified")

    @property
    def disk(self):
        return self in (BoundKind.SULEIMANOV, BoundKind.SKASKIV_KURYLIAK,
                        BoundKind.LEVY_DISK_MU, BoundKind.LEVY_DISK_S)

    @property
    def randomized(self):
        return "levy" in self.value


def _bound_parts(kind, r, log_mu, log_S, delta, h):
    """Log of the right-hand side with ``C = 1`` and the list of inner logs.

    The inner logs are every logarithm that the formula raises to a power
    or takes a further logarithm of; the cutoff excludes radii where any
    of them is ``<= 1``.
    """
    kind = BoundKind(kind)
    r = np.asarray(r, dtype=float)
    m = np.asarray(log_mu, dtype=float)
    s = np.asarray(log_S, dtype=float)
    d = delta
    with np.errstate(divide="ignore", invalid="ignore"):
        if kind.disk:
            ell = -np.log1p(-r)          # log 1/(1-r)
            q = m + ell                   # log mu/(1-r)
        if kind.unified:
            if h is None:
                raise DomainError(f"{kind.value} needs an h weight")
            H = np.log(h(r))              # log h
            P = H + m                     # log h mu
        if kind is BoundKind.WIMAN:
            return m + (0.5 + d) * np.log(m), [m]
        if kind is BoundKind.ROSENBLOOM:
            return m + 0.5 * np.log(m) + (1 + d) * np.log(np.log(m)), [m, np.log(m)]
        if kind is BoundKind.SULEIMANOV:
            return m + (1 + d) * ell + (0.5 + d) * np.log(q), [q]
        if kind is BoundKind.SKASKIV_KURYLIAK:
            val = m + ell + (0.5 + d) * np.log(ell) + 0.5 * np.log(q) + (1 + d) * np.log(np.log(q))
            return val, [ell, q, np.log(q)]
        if kind is BoundKind.UNIFIED_DET:
            val = P + (0.5 + d) * np.log(H) + 0.5 * np.log(P) + (1 + d) * np.log(np.log(P))
            return val, [H, P, np.log(P)]
        if kind is BoundKind.LEVY_PLANE_MU:
            return m + 0.25 * np.log(m) + (1 + d) * np.log(np.log(m)), [m, np.log(m)]
        if kind is BoundKind.LEVY_PLANE_S:
            return s + 0.5 * np.log(np.log(m)), [m, np.log(m)]
        if kind is BoundKind.LEVY_DISK_MU:
            val = (m + 0.5 * ell + (0.75 + d) * np.log(ell) + 0.25 * np.log(q)
                   + (1 + d) * np.log(np.log(q)))
            return val, [ell, q, np.log(q)]
        if kind is BoundKind.LEVY_DISK_S:
            inner = ell + np.log(q)       # log((1/(1-r)) log(mu/(1-r)))
            return s + 0.5 * np.log(inner), [ell, q, inner]
        if kind is BoundKind.UNIFIED_LEVY_S:
            inner = H + np.log(P)
            return s + 0.5 * np.log(inner), [H, P, inner]
        val = (0.5 * H + m + (0.75 + d) * np.log(H) + 0.25 * np.log(P)
               + (1 + d) * np.log(np.log(P)))
        return val, [H, P, np.log(P)]


def rhs_bound(kind, r, log_mu, log_S=None, delta=DEFAULT_DELTA, h=None):
    """Natural log of the bound's right-hand side with ``C = 1``.

    ``nan`` where the formula is undefined (a logarithm of a non-positive
    quantity).
    """
    if log_S is None:
        log_S = np.full(np.shape(log_mu), np.nan)
    val, _ = _bound_parts(kind, r, log_mu, log_S, delta, h)
    val = np.where(np.isfinite(val), val, np.nan)
    return float(val) if val.ndim == 0 else val


def above_cutoff(kind, r, log_mu, delta=DEFAULT_DELTA, h=None):
    """True where every inner logarithm of the bound exceeds 1."""
    _, inner = _bound_parts(kind, r, log_mu, np.zeros(np.shape(log_mu)), delta, h)
    ok = np.ones(np.shape(log_mu), dtype=bool)
    with np.errstate(invalid="ignore"):
        for x in inner:
            ok &= np.asarray(x > 1)
    return ok


def _default_convention(kind, grid_domain):
    if BoundKind(kind).unified:
        return MeasureConvention.UNIFIED
    if np.isinf(grid_domain):
        return MeasureConvention.PLANE_CLASSIC
    return MeasureConvention.DISK_CLASSIC


@dataclass(frozen=True)
class ViolationReport:
    """Where ``log M > log C + log bound`` fails, and how large ``C`` must be."""

    kind: str
    r: np.ndarray = field(repr=False)
    log_M: np.ndarray = field(repr=False)
    log_bound: np.ndarray = field(repr=False)
    valid: np.ndarray = field(repr=False)
    violated: np.ndarray = field(repr=False)
    min_C: np.ndarray = field(repr=False)
    log_C: float
    violations: IntervalSet
    measure: float
    convention: str

    @property
    def C(self):
        return float(np.exp(self.log_C))

    @property
    def r0(self):
        """First radius from which every later radius is above the cutoff."""
        bad = np.flatnonzero(~self.valid)
        i = 0 if bad.size == 0 else bad[-1] + 1
        return float(self.r[i]) if i < self.r.size else float("nan")

    @property
    def below_cutoff(self):
        return self.r[~self.valid]

    def sup_ratio(self, r_min=-np.inf, r_max=np.inf):
        """Largest ``M / bound`` over valid radii in ``[r_min, r_max]``."""
        keep = self.valid & (self.r >= r_min) & (self.r <= r_max)
        return float(np.max(self.min_C[keep])) if keep.any() else float("nan")


def check_inequality(profile, base_profile, kind, C=None, log_C=None, conv=None,
                     delta=DEFAULT_DELTA, h=None, domain_radius=None):
    """Compare ``log M`` of ``profile`` against the bound built from ``base_profile``.

    The bound always uses ``mu`` and ``S`` of the base (non-randomized)
    series.  Radii below the cutoff are excluded, never flagged.  Flagged
    radii are lifted to intervals and measured under ``conv``.
    """
    kind = BoundKind(kind)
    if not np.array_equal(profile.r, base_profile.r):
        raise DomainError("profiles must share the radius grid")
    if log_C is None:
        log_C = 0.0 if C is None else float(np.log(C))
    if domain_radius is None:
        domain_radius = 1.0 if kind.disk else (h.R if kind.unified else np.inf)
    if kind.disk and domain_radius != 1.0:
        raise DomainError(f"{kind.value} applies on the unit disk only")
    conv = MeasureConvention(conv) if conv is not None else _default_convention(kind, domain_radius)
    log_bound = rhs_bound(kind, base_profile.r, base_profile.log_mu, base_profile.log_S, delta, h)
    log_bound = np.atleast_1d(log_bound)
    valid = above_cutoff(kind, base_profile.r, base_profile.log_mu, delta, h) & np.isfinite(log_bound)
    with np.errstate(invalid="ignore"):
        violated = valid & (profile.log_M > log_C + log_bound)
        min_C = np.where(valid, np.exp(profile.log_M - log_bound), np.nan)
    E = violation_set(profile.r, violated)
    measure = h_log_measure(E, conv, h if conv is MeasureConvention.UNIFIED else None)
    return ViolationReport(kind.value, profile.r, profile.log_M, log_bound, valid, violated,
                           min_C, float(log_C), E, measure, conv.value)


def calibrate_constant(reports, window):
    """95th percentile of the per-radius minimal constants inside ``window``.

    ``reports`` may be a single report, a list of them (values are pooled
    in sorted order, so the result does not depend on report order), or a
    pair ``(radii, min_C)`` of arrays.
    """
    lo, hi = window
    if isinstance(reports, ViolationReport):
        reports = [reports]
    if isinstance(reports, tuple) and len(reports) == 2 and not isinstance(reports[0], ViolationReport):
        pairs = [(np.asarray(reports[0], dtype=float), np.asarray(reports[1], dtype=float))]
    else:
        pairs = [(rep.r, rep.min_C) for rep in reports]
    vals = []
    for r, c in pairs:
        keep = (r >= lo) & (r <= hi) & np.isfinite(c)
        vals.append(c[keep])
    pooled = np.sort(np.concatenate(vals)) if vals else np.array([])
    if pooled.size == 0:
        raise DomainError(f"no valid radii in the burn-in window [{lo}, {hi}]")
    return float(np.percentile(pooled, 95))


@dataclass(frozen=True)
class FitResult:
    slope: float
    stderr: float
    intercept: float
    n: int


def exponent_fit(x, y, mask=None, window=None):
    """Ordinary least squares slope of ``y`` against ``x``.

    ``window`` is an ``(x_min, x_max)`` pair restricting the regressor;
    ``mask`` removes records (for instance radii inside a violation set).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(x) & np.isfinite(y)
    if mask is not None:
        keep &= np.asarray(mask, dtype=bool)
    if window is not None:
        keep &= (x >= window[0]) & (x <= window[1])
    if keep.sum() < 10:
        raise DomainError(f"regression needs at least 10 records, got {int(keep.sum())}")
    xs, ys = x[keep], y[keep]
    if np.ptp(xs) <= 1e-12 * max(1.0, np.abs(xs).max()):
        raise DomainError("degenerate regressor range")
    res = stats.linregress(xs, ys)
    return FitResult(float(res.slope), float(res.stderr), float(res.intercept), int(keep.sum()))


REGRESSORS = ("loglog_mu", "log_r", "log_inv_1mr")
RESPONSES = ("M/mu", "M/S")


def regression_data(profile, base_profile, x="loglog_mu", y="M/mu"):
    """Regressor and response columns for :func:`exponent_fit`.

    ``M`` comes from ``profile`` (possibly randomized), ``mu`` and ``S`` from
    the base profile.
    """
    with np.errstate(invalid="ignore", divide="ignore"):
        if x == "loglog_mu":
            xs = np.log(base_profile.log_mu)
        elif x == "log_r":
            xs = np.log(base_profile.r)
        elif x == "log_inv_1mr":
            xs = -np.log1p(-base_profile.r)
        else:
            raise DomainError(f"unknown regressor {x!r}")
    if y == "M/mu":
        ys = profile.log_M - base_profile.log_mu
    elif y == "M/S":
        ys = profile.log_M - base_profile.log_S
    else:
        raise DomainError(f"unknown response {y!r}")
    return xs, ys


@dataclass
class LevySuite:
    """Per-trial reports of a randomized-bound experiment and their summary."""

    kind: str
    C: float
    reports: list
    base_profile: object = field(repr=False)
    profiles: list = field(repr=False)
    burn_in: tuple = ()

    @property
    def violation_measures(self):
        return np.array([rep.measure for rep in self.reports])

    def sup_ratios(self, r_min=-np.inf, r_max=np.inf):
        return np.array([rep.sup_ratio(r_min, r_max) for rep in self.reports])

    def slopes(self, x="loglog_mu", y="M/S", r_min=-np.inf, r_max=np.inf, exclude_violations=True):
        out = []
        for prof, rep in zip(self.profiles, self.reports):
            xs, ys = regression_data(prof, self.base_profile, x, y)
            mask = rep.valid & (prof.r >= r_min) & (prof.r <= r_max)
            if exclude_violations:
                mask &= ~rep.violations.contains(prof.r)
                if mask.sum() < 10:
                    mask = rep.valid & (prof.r >= r_min) & (prof.r <= r_max)
            out.append(exponent_fit(xs, ys, mask))
        return out

    def summary(self):
        q = np.percentile(self.violation_measures, [5, 25, 50, 75, 95])
        fits = self.slopes()
        slopes = np.array([f.slope for f in fits])
        return {
            "kind": self.kind,
            "C": self.C,
            "trials": len(self.reports),
            "violation_measure_quantiles": {
                "q05": q[0], "q25": q[1], "q50": q[2], "q75": q[3], "q95": q[4],
            },
            "sup_ratio_q95": float(np.percentile(self.sup_ratios(), 95)),
            "slope": float(slopes.mean()),
            "stderr": float(slopes.std(ddof=1) / np.sqrt(slopes.size)) if slopes.size > 1 else 0.0,
            "r0": float(np.nanmax([rep.r0 for rep in self.reports])),
        }


def _trial_profile(seq, sampler, grid, master_seed, trial, profile_opts):
    g = randomize(seq, sampler, SeedSpec(master_seed, trial))
    return growth_profile(g, grid, **profile_opts)


def levy_trial_suite(seq, sampler, kind, trials, grid, master_seed=0, burn_in=None,
                     delta=DEFAULT_DELTA, h=None, conv=None, C=None, workers=1,
                     **profile_opts):
    """Randomize ``seq`` ``trials`` times and check each draw against the base bound.

    Trial ``t`` uses the seed stream ``(master_seed, t)``.  Unless ``C`` is
    given it is calibrated on the ``burn_in`` radius window from the pooled
    minimal constants of all trials.  ``workers > 1`` profiles trials in a
    process pool; results are gathered in trial order.
    """
    kind = BoundKind(kind)
    if not kind.randomized:
        raise DomainError(f"{kind.value} is not a randomized bound")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    base = growth_profile(seq, grid, **profile_opts)
    args = [(seq, sampler, grid, master_seed, t, profile_opts) for t in range(trials)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            profiles = list(pool.map(_trial_profile, *zip(*args)))
    else:
        profiles = [_trial_profile(*a) for a in args]
    unit = [check_inequality(p, base, kind, log_C=0.0, conv=conv, delta=delta, h=h) for p in profiles]
    if C is None:
        if burn_in is None:
            raise DomainError("either C or a burn-in window is required")
        C = calibrate_constant(unit, burn_in)
    reports = [check_inequality(p, base, kind, C=C, conv=conv, delta=delta, h=h) for p in profiles]
    return LevySuite(kind.value, float(C), reports, base, profiles, tuple(burn_in or ()))


@dataclass(frozen=True)
class KahaneResult:
    N: int
    r: float
    trials: int
    C_grid: np.ndarray = field(repr=False)
    exceedance: np.ndarray = field(repr=False)
    statistics: np.ndarray = field(repr=False)
    minimal_C: float
    order_statistic: float

    @property
    def target(self):
        return 1.0 / self.N**2


def kahane_experiment(sampler, N, trials, r, seq, master_seed=0, C_grid=None,
                      batch=8192, oversample=8, local_points=16, enforce_trials=True):
    """Exceedance frequencies of ``||sum X_n q_n||_inf >= C sqrt(log N) (sum ||q_n||^2)^{1/2}``.

    The trigonometric polynomials are ``q_n(t) = a_n r^n e^{int}`` for
    ``n = 0..N``.  Each trial's sup norm is the maximum of an FFT sampling
    at ``oversample`` times the polynomial length, refined on a
    ``local_points`` sub-grid around the sampled maximum.  Batch ``b`` draws
    from the seed stream ``(master_seed, b)``.
    """
    if N < 2:
        raise DomainError("N must be >= 2 so that log N > 0")
    if enforce_trials and trials < 100 * N**2:
        raise DomainError(f"need at least 100 N^2 = {100 * N**2} trials")
    if seq.length < N + 1:
        raise DomainError(f"series needs at least N+1 = {N + 1} coefficients")
    terms = log_terms(seq, r)[: N + 1]
    top = np.max(terms)
    c = np.exp(terms - top) * np.exp(1j * seq.phase[: N + 1])
    S_N = np.sqrt(np.sum(np.abs(c) ** 2))
    # coefficients this small cannot change a sup norm at double precision
    live = np.flatnonzero(np.abs(c) > 1e-18 * np.abs(c).max())
    lo, hi = live[0], live[-1]
    c = c[lo: hi + 1]
    width = c.size
    samples = 1 << int(np.ceil(np.log2(max(oversample * width, 16))))
    real = bool(np.all(np.abs(c.imag) == 0)) and sampler.real_valued
    step = 2.0 * np.pi / samples
    offsets = np.linspace(-step, step, local_points)
    n_idx = np.arange(width)
    fine = np.exp(-1j * np.outer(n_idx, offsets))
    stats_out = np.empty(trials)
    done = 0
    b = 0
    while done < trials:
        size = min(batch, trials - done)
        x = sample_sequence(sampler, size * (N + 1), SeedSpec(master_seed, b)).reshape(size, N + 1)
        coef = x[:, lo: hi + 1] * c
        if real:
            vals = np.abs(scipy.fft.rfft(coef.real, n=samples, axis=1))
        else:
            vals = np.abs(scipy.fft.fft(coef, n=samples, axis=1))
        j = np.argmax(vals, axis=1)
        sampled = vals[np.arange(size), j]
        # local refinement: evaluate on a fine grid around each sampled peak,
        # e^{-in(theta_j + o)} = e^{-in theta_j} e^{-in o}
        centred = coef * np.exp(-1j * step * np.outer(j, n_idx))
        local = np.abs(centred @ fine).max(axis=1)
        stats_out[done: done + size] = np.maximum(sampled, local)
        done += size
        b += 1
    stats_out /= np.sqrt(np.log(N)) * S_N
    if C_grid is None:
        C_grid = np.round(np.arange(0.0, 10.0 + 1e-9, 0.005), 3)
    C_grid = np.asarray(C_grid, dtype=float)
    srt = np.sort(stats_out)
    exceed = 1.0 - np.searchsorted(srt, C_grid, side="left") / trials
    ok = np.flatnonzero(exceed <= 1.0 / N**2)
    minimal = float(C_grid[ok[0]]) if ok.size else float("nan")
    k = int(np.floor(trials / N**2))
    order = float(srt[trials - k - 1]) if k < trials else float(srt[0])
    return KahaneResult(N, float(r), trials, C_grid, exceed, stats_out, minimal, order)
