"""Weighted backward shifts on H(C) and H(D).

Orbits of ``g = sum X_n z^n / prod_{k<=n} w_k`` are never computed by
repeated shifting: coefficient ``k`` of ``B_w^n g`` is
``X_{n+k} / prod_{j<=k} w_j`` directly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DomainError, TruncationMargin
from .growth import growth_profile, trig_sup
from .inequality import BoundKind, calibrate_constant, check_inequality
from .sampler import randomize
from .series import CoefficientSequence, format_float, make_weight_series

SPACES = ("plane", "disk")


class WeightSequence:
    """Nonzero weights ``w_1, w_2, ...`` with cached prefix log-products.

    ``func`` maps an integer array ``n >= 1`` to the weights.  Prefix caches
    grow on demand; build them (``ensure``) before sharing across threads.
    """

    def __init__(self, func, space, name="custom", horizon=1024):
        if space not in SPACES:
            raise DomainError(f"space must be one of {SPACES}")
        self.func = func
        self.space = space
        self.name = name
        self._log = np.zeros(1)
        self._phase = np.zeros(1)
        self.ensure(horizon)

    def __repr__(self):
        return f"WeightSequence({self.name!r}, space={self.space!r})"

    @classmethod
    def derivative(cls):
        """``w_n = n``: the differentiation operator on H(C)."""
        return cls(lambda n: np.asarray(n, dtype=float), "plane", "D")

    @classmethod
    def taylor_shift(cls):
        """``w_n = 1`` on H(D)."""
        return cls(lambda n: np.ones(np.shape(n)), "disk", "T")

    @classmethod
    def constant(cls, c, space):
        return cls(lambda n: np.full(np.shape(n), c, dtype=complex if np.iscomplexobj(c) else float),
                   space, f"const({c})")

    @classmethod
    def power(cls, c, p, space="plane"):
        """``w_n = c n^p``."""
        return cls(lambda n: c * np.asarray(n, dtype=float) ** p, space, f"{c}*n^{p}")

    def weights(self, n):
        w = np.asarray(self.func(np.asarray(n)))
        if np.any(w == 0):
            raise DomainError("weights must be nonzero")
        return w

    def ensure(self, n):
        """Make the prefix caches cover indices ``0..n``."""
        have = self._log.size - 1
        if n <= have:
            return
        k = np.arange(have + 1, n + 1)
        w = self.weights(k)
        log_w = np.log(np.abs(w))
        arg_w = np.angle(w) if np.iscomplexobj(w) else np.where(w < 0, np.pi, 0.0)
        self._log = np.concatenate([self._log, self._log[-1] + np.cumsum(log_w)])
        self._phase = np.concatenate([self._phase, self._phase[-1] + np.cumsum(arg_w)])

    def log_prefix(self, n):
        """``log|prod_{k<=m} w_k|`` for ``m = 0..n``."""
        self.ensure(n)
        return self._log[: n + 1].copy()

    def phase_prefix(self, n):
        self.ensure(n)
        return self._phase[: n + 1].copy()


def apply_shift(seq, w):
    """``B_w``: coefficient ``n`` becomes ``w_{n+1} a_{n+1}``."""
    if seq.length == 1:
        return CoefficientSequence([-np.inf], [0.0], seq.domain_radius, True)
    n = np.arange(1, seq.length)
    wn = w.weights(n)
    arg_w = np.angle(wn) if np.iscomplexobj(wn) else np.where(wn < 0, np.pi, 0.0)
    return CoefficientSequence(
        seq.log_abs[1:] + np.log(np.abs(wn)),
        seq.phase[1:] + arg_w,
        seq.domain_radius,
        seq.polynomial,
    )


@dataclass(frozen=True)
class ChaosVerdict:
    verdict: str
    limsup_proxy: float
    trend_slope: float


def chaos_check(w, horizon=2000, diverge_slope=-0.05, flat_slope=-0.005, band=1e-3):
    """Decide whether ``sum z^n / prod_{k<=n} w_k`` belongs to the space.

    With ``beta_n = -(1/n) log|prod_{k<=n} w_k|`` over the last half of the
    horizon: on the plane the series is entire iff ``beta_n -> -inf``,
    detected as window maxima falling at least like ``diverge_slope * log n``;
    on the disk it needs radius of convergence ``>= 1``, i.e.
    ``limsup beta_n <= 0``.  Values inside the ambiguity thresholds give
    ``inconclusive``.
    """
    if horizon < 100:
        raise DomainError("horizon must be >= 100")
    logp = w.log_prefix(horizon)
    n = np.arange(horizon + 1)
    half = horizon // 2
    beta = -logp[half:] / n[half:]
    chunks = np.array_split(np.arange(beta.size), 4)
    maxima = np.array([beta[c].max() for c in chunks])
    centres = np.array([np.log(n[half:][c].mean()) for c in chunks])
    slope = float(np.polyfit(centres, maxima, 1)[0])
    proxy = float(beta.max())
    if w.space == "plane":
        if slope < diverge_slope and np.all(np.diff(maxima) < 0):
            verdict = "chaotic"
        elif slope > flat_slope:
            verdict = "not_chaotic"
        else:
            verdict = "inconclusive"
    else:
        if proxy <= 1e-12:
            verdict = "chaotic"
        elif proxy > band:
            verdict = "not_chaotic"
        else:
            verdict = "inconclusive"
    return ChaosVerdict(verdict, proxy, slope)


def random_fhc_function(w, s, N, seed, check=True):
    """``g = sum X_n z^n / prod_{k<=n} w_k`` with ``X_n`` drawn from ``s``."""
    if check:
        verdict = chaos_check(w, max(N, 100)).verdict
        if verdict == "not_chaotic":
            raise DomainError(f"B_w is not chaotic for {w!r}")
    if not s.full_support:
        warnings.warn(f"{s.kind} multipliers lack full support; g need not be hypercyclic",
                      stacklevel=2)
    return randomize(make_weight_series(w, N), s, seed)


def orbit_coefficient(g, w, n, k):
    """Coefficient ``k`` of ``B_w^n g``, equal to ``X_{n+k} / prod_{j<=k} w_j``."""
    if n < 0 or k < 0:
        raise DomainError("n and k must be >= 0")
    if n + k >= g.length:
        raise TruncationMargin(n, k + 1, g.length - n)
    logp = w.log_prefix(k)[k]
    phase = w.phase_prefix(k)[k]
    return complex(g.multipliers[n + k] * np.exp(-logp - 1j * phase))


def orbit_section(g, w, n, K):
    """Coefficients ``0..K-1`` of ``B_w^n g``."""
    if n + K > g.length:
        raise TruncationMargin(n, K, g.length - n)
    logp = w.log_prefix(K - 1)
    phase = w.phase_prefix(K - 1)
    return g.multipliers[n: n + K] * np.exp(-logp - 1j * phase)


@dataclass(frozen=True)
class TargetSpec:
    """Ball ``{h : max_{|z|<=rho} |h - p| < eps}`` around a polynomial ``p``."""

    coefficients: tuple
    rho: float
    eps: float
    name: str = ""

    def __post_init__(self):
        if not self.rho > 0:
            raise DomainError("rho must be positive")
        if self.eps < 0:
            raise DomainError("eps must be >= 0")
        object.__setattr__(self, "coefficients", tuple(complex(c) for c in self.coefficients))

    def padded(self, K):
        p = np.zeros(max(K, len(self.coefficients)), dtype=complex)
        p[: len(self.coefficients)] = self.coefficients
        return p


def _terms_needed(g, w, rho, eps, tail_scale=None):
    """Smallest ``K`` with ``x_bound * sum_{k>=K} rho^k / |prod_{j<=k} w_j| < eps/100``.

    ``x_bound`` is the largest stored ``|X_n|``, a conservative stand-in for
    the unseen multipliers.  The sum uses cached prefix products and a
    geometric continuation once the term ratio drops below 1.
    """
    x_bound = float(np.max(np.abs(g.multipliers))) if tail_scale is None else tail_scale
    if x_bound == 0:
        return 1
    target = max(eps / 100.0, 1e-15 * x_bound)
    horizon = 64
    while True:
        logp = w.log_prefix(horizon)
        k = np.arange(horizon + 1)
        logt = k * np.log(rho) - logp + np.log(x_bound)
        ratio = np.exp(logt[-1] - logt[-2])
        if ratio < 0.9:
            tail_after = np.exp(logt[-1]) * ratio / (1.0 - ratio)
            suffix = np.cumsum(np.exp(logt)[::-1])[::-1] + tail_after
            ok = np.flatnonzero(suffix < target)
            if ok.size:
                return max(int(ok[0]), 1)
        if horizon > 1 << 22:
            raise DomainError("orbit tail does not decay on this test circle")
        horizon *= 2


def _disk_poly(g, w, n, target, K):
    d = orbit_section(g, w, n, K) - target.padded(K)[:K]
    extra = target.padded(K)[K:]
    return np.concatenate([d, -extra]) if extra.size else d


def orbit_distance(g, w, n, target, min_samples=1024):
    """``max_{|z|<=rho} |B_w^n g - p|``, attained on the circle ``|z| = rho``."""
    K = _terms_needed(g, w, target.rho, target.eps)
    if n + K > g.length:
        raise TruncationMargin(n, K, g.length - n)
    d = _disk_poly(g, w, n, target, K)
    scaled = d * target.rho ** np.arange(d.size)
    sup, _ = trig_sup(scaled, min_samples=min_samples)
    return float(sup)


@dataclass(frozen=True)
class DensityReport:
    """Return times to each target ball and their window densities."""

    hits: np.ndarray = field(repr=False)          # shape (targets, N_max + 1)
    distances: np.ndarray = field(repr=False)
    ladder: tuple
    window_densities: np.ndarray = field(repr=False)   # shape (targets, len(ladder))
    lower_density: np.ndarray
    targets: tuple = field(repr=False)
    weights_id: str = ""

    @property
    def N_max(self):
        return self.hits.shape[1] - 1

    @property
    def all_targets(self):
        return float(np.min(self.lower_density))

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "target_id", "distance", "hit"])
        for t in range(self.hits.shape[0]):
            for n in range(self.hits.shape[1]):
                writer.writerow([n, t, format_float(self.distances[t, n]), int(self.hits[t, n])])
        return buf.getvalue()

    def to_json(self):
        return json.dumps({
            "weights_id": self.weights_id,
            "N_max": int(self.N_max),
            "windows": [[int(math.ceil(N / 2)), int(N)] for N in self.ladder],
            "lower_density_estimates": [float(x) for x in self.lower_density],
        }, sort_keys=True)


def density_ladder(N_max, levels=3):
    """Dyadic horizons ``N_max / 2^k``, ``k < levels``, for windows ``[ceil(N/2), N]``.

    Short windows cannot resolve densities of a percent or so, hence the
    ladder only reaches down to ``N_max / 2^(levels-1)``.
    """
    ladder = sorted({max(1, N_max >> k) for k in range(levels)})
    return tuple(ladder)


def hitting_density(g, w, targets, N_max, ladder=None, min_samples=1024, batch=2048):
    """Return-time indicators ``||B_w^n g - p||_rho < eps`` for ``n = 0..N_max``.

    Distances are sampled on the test circle in batches; any iterate whose
    sampled distance is below ``eps`` is re-evaluated with golden-section
    refinement before being counted, so hits are never due to sampling.
    The lower density is estimated by the smallest window density
    ``#hits in [ceil(N/2), N] / (N - ceil(N/2) + 1)`` over the ladder.
    """
    targets = tuple(targets)
    if ladder is None:
        ladder = density_ladder(N_max)
    hits = np.zeros((len(targets), N_max + 1), dtype=bool)
    dist = np.zeros((len(targets), N_max + 1))
    for t, target in enumerate(targets):
        K = _terms_needed(g, w, target.rho, target.eps)
        K = max(K, len(target.coefficients))
        if N_max + K > g.length:
            raise TruncationMargin(N_max, K, g.length - N_max)
        logp = w.log_prefix(K - 1)
        phase = w.phase_prefix(K - 1)
        scale = np.exp(-logp - 1j * phase) * target.rho ** np.arange(K)
        p = target.padded(K)[:K] * target.rho ** np.arange(K)
        samples = max(min_samples, 1 << int(np.ceil(np.log2(16 * K))))
        windows = sliding_window_view(g.multipliers[: N_max + K], K)
        for start in range(0, N_max + 1, batch):
            stop = min(start + batch, N_max + 1)
            coef = windows[start:stop] * scale - p
            vals = np.abs(scipy.fft.ifft(coef, n=samples, axis=1)) * samples
            d = vals.max(axis=1)
            for i in np.flatnonzero(d < target.eps):
                d[i] = trig_sup(coef[i], samples=samples)[0]
            dist[t, start:stop] = d
            hits[t, start:stop] = d < target.eps
    dens = np.empty((len(targets), len(ladder)))
    for j, N in enumerate(ladder):
        lo = int(math.ceil(N / 2))
        dens[:, j] = hits[:, lo: N + 1].mean(axis=1)
    return DensityReport(hits, dist, tuple(ladder), dens, dens.min(axis=1), targets, w.name)


def shift_asymptotics(w, profile):
    """Deviations from the closed-form growth of the two model shifts.

    For ``w = (n)``: ``log mu - (r - log(r)/2)`` and ``log S - (r - log(r)/4)``.
    For ``w = (1)``: ``log mu`` and ``log S + log(1 - r^2)/2``.
    """
    r = profile.r
    if w.name == "D":
        return {
            "mu_dev": profile.log_mu - (r - 0.5 * np.log(r)),
            "S_dev": profile.log_S - (r - 0.25 * np.log(r)),
        }
    if w.name == "T":
        return {"mu_dev": profile.log_mu.copy(), "S_dev": profile.log_S + 0.5 * np.log1p(-r * r)}
    return {}


def fhc_growth_check(g, w, grid, C=None, log_C=None, burn_in=None, **profile_opts):
    """Check ``||g||_r`` against the shift growth bound for ``f = sum z^n / prod w_k``.

    Uses ``levy_plane_S`` on the plane and ``levy_disk_S`` on the disk.
    Returns the violation report together with the model-shift asymptotic
    deviations (empty for other weights).
    """
    kind = BoundKind.LEVY_PLANE_S if w.space == "plane" else BoundKind.LEVY_DISK_S
    base = growth_profile(g.base, grid, compute_M=False, **profile_opts)
    prof = growth_profile(g, grid, **profile_opts)
    if C is None and log_C is None and burn_in is not None:
        unit = check_inequality(prof, base, kind, log_C=0.0)
        C = calibrate_constant(unit, burn_in)
    report = check_inequality(prof, base, kind, C=C, log_C=log_C)
    return report, shift_asymptotics(w, base)
