"""Maximum term, quadratic mean, coefficient sum and maximum modulus.

All four functionals come back as natural logarithms.  Functions accept a
:class:`~wvlab.series.CoefficientSequence` with optional complex
``multipliers``, or a :class:`~wvlab.sampler.RandomizedSeries` directly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
import scipy.fft
from scipy.special import logsumexp

from .errors import DomainError, InsufficientTruncation
from .sampler import RandomizedSeries
from .series import (
    DEFAULT_TOL,
    CoefficientSequence,
    format_float,
    log_terms,
    multiplier_parts,
    truncation_index,
)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
GOLDEN_ITERATIONS = 30


def resolve(seq, multipliers=None):
    """Fold optional multipliers into a single coefficient sequence."""
    if isinstance(seq, RandomizedSeries):
        if multipliers is not None:
            raise DomainError("a RandomizedSeries already carries its multipliers")
        return seq.as_sequence()
    if multipliers is None:
        return seq
    log_x, arg_x = multiplier_parts(multipliers, seq.length)
    return seq.with_multipliers(log_x, arg_x)


def max_term(seq, r, multipliers=None):
    """``(log mu(r), argmax n)`` where ``mu(r) = max_n |a_n X_n| r^n``."""
    s = resolve(seq, multipliers)
    terms = log_terms(s, r)
    n = int(np.argmax(terms))
    if terms[n] == -np.inf:
        raise DomainError("maximum term of the zero series is undefined")
    return float(terms[n]), n


def _checked_terms(s, r, tol):
    terms = log_terms(s, r)
    if np.max(terms) == -np.inf:
        raise DomainError("zero series")
    n_trunc = truncation_index(s, r, tol)
    return terms, n_trunc


def s_norm(seq, r, multipliers=None, tol=DEFAULT_TOL):
    """``log S(r)`` with ``S(r)^2 = sum |a_n X_n|^2 r^{2n}``."""
    s = resolve(seq, multipliers)
    terms, _ = _checked_terms(s, r, tol)
    return float(0.5 * logsumexp(2.0 * terms))


def g_norm(seq, r, multipliers=None, tol=DEFAULT_TOL):
    """``log G(r)`` with ``G(r) = sum |a_n X_n| r^n``."""
    s = resolve(seq, multipliers)
    terms, _ = _checked_terms(s, r, tol)
    return float(logsumexp(terms))


def _next_pow2(n):
    return 1 << max(0, int(np.ceil(np.log2(max(n, 1)))))


def _golden_max(func, a, b, iterations=GOLDEN_ITERATIONS):
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = func(c), func(d)
    best = max((fc, c), (fd, d))
    for _ in range(iterations):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = func(c)
            best = max(best, (fc, c))
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = func(d)
            best = max(best, (fd, d))
    return best


def trig_sup(c, min_samples=16, oversample=16, refine_rounds=3, samples=None):
    """Lower bound for ``max_t |sum_n c_n e^{int}|`` and the maximizing angle.

    Samples the polynomial at a power-of-two number of equispaced angles
    (at least ``oversample`` times the number of coefficients), then runs
    ``refine_rounds`` golden-section passes on the arc around the best
    sample.  Every returned value is an actual evaluation, so the result
    never exceeds the true maximum.
    """
    c = np.asarray(c, dtype=complex)
    if samples is None:
        samples = max(min_samples, _next_pow2(oversample * c.size))
    if samples < c.size:
        raise DomainError("fewer samples than coefficients")
    vals = np.abs(scipy.fft.ifft(c, n=samples)) * samples
    j = int(np.argmax(vals))
    best_val = float(vals[j])
    step = 2.0 * np.pi / samples
    best_theta = j * step
    if refine_rounds > 0 and c.size > 1:
        mags = np.abs(c)
        # coefficients this small cannot move the refined maximum
        keep = mags > mags.max() * 1e-18
        ck = c[keep]
        nk = np.flatnonzero(keep).astype(float)

        def value(theta):
            return float(np.abs(np.exp(1j * theta * nk) @ ck))

        half = step
        centre = best_theta
        for _ in range(refine_rounds):
            v, t = _golden_max(value, centre - half, centre + half)
            if v > best_val:
                best_val, best_theta = v, t
            centre = best_theta
            half *= 0.5
    return best_val, float(np.mod(best_theta, 2.0 * np.pi))


def max_modulus(
    seq,
    r,
    multipliers=None,
    min_samples=16,
    refine_rounds=3,
    oversample=16,
    tol=DEFAULT_TOL,
    return_details=False,
):
    """``log M(r)`` for the truncated series on ``|z| = r``.

    The truncation index ``N*`` comes from :func:`truncation_index`; the
    circle is sampled at the smallest power of two at least
    ``oversample * (N* + 1)`` and refined by golden section.  The result is a
    lower bound for the maximum of the truncated series.
    """
    s = resolve(seq, multipliers)
    terms, n_trunc = _checked_terms(s, r, tol)
    terms = terms[: n_trunc + 1]
    top = np.max(terms)
    c = np.exp(terms - top) * np.exp(1j * s.phase[: n_trunc + 1])
    sup, theta = trig_sup(c, min_samples, oversample, refine_rounds)
    out = float(top + np.log(sup))
    if return_details:
        return out, {"theta": theta, "n_trunc": n_trunc}
    return out


def parseval_check(seq, r, multipliers=None, samples=None, tol=DEFAULT_TOL):
    """``|rms_circle(f) / S(r) - 1|`` from equispaced samples of the truncated series."""
    s = resolve(seq, multipliers)
    terms, n_trunc = _checked_terms(s, r, tol)
    needed = 16 * (n_trunc + 1)
    if samples is None:
        samples = _next_pow2(needed)
    if samples < needed:
        raise DomainError(f"Parseval check needs at least {needed} samples")
    t = terms[: n_trunc + 1]
    top = np.max(t)
    c = np.exp(t - top) * np.exp(1j * s.phase[: n_trunc + 1])
    vals = scipy.fft.ifft(c, n=samples) * samples
    log_rms = top + 0.5 * np.log(np.mean(np.abs(vals) ** 2))
    log_S = 0.5 * logsumexp(2.0 * terms)
    return float(abs(np.expm1(log_rms - log_S)))


@dataclass(frozen=True)
class RadiusGrid:
    """Strictly increasing radii inside ``(0, domain_radius)``."""

    radii: np.ndarray
    kind: str = "explicit"
    domain_radius: float = np.inf

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float).ravel()
        if r.size < 1:
            raise DomainError("empty radius grid")
        if np.any(np.diff(r) <= 0):
            raise DomainError("radii must be strictly increasing")
        if r[0] <= 0 or r[-1] >= self.domain_radius:
            raise DomainError(f"radii must lie in (0, {self.domain_radius})")
        r.setflags(write=False)
        object.__setattr__(self, "radii", r)

    def __len__(self):
        return self.radii.size

    @classmethod
    def geometric_plane(cls, r0, ratio, n):
        return cls(r0 * ratio ** np.arange(n), "geometric_plane", np.inf)

    @classmethod
    def geometric_between(cls, r_min, r_max, per_octave=8):
        """Geometric grid from ``r_min`` to ``r_max`` (both included)."""
        steps = int(round(np.log2(r_max / r_min) * per_octave))
        return cls(np.geomspace(r_min, r_max, steps + 1), "geometric_plane", np.inf)

    @classmethod
    def approach_disk(cls, r0, sigma, n):
        if not 0 < sigma < 1:
            raise DomainError("sigma must lie in (0, 1)")
        return cls(1.0 - (1.0 - r0) * sigma ** np.arange(n), "approach_disk", 1.0)

    @classmethod
    def explicit(cls, radii, domain_radius=np.inf):
        return cls(radii, "explicit", domain_radius)

    def restrict(self, r_min=-np.inf, r_max=np.inf):
        keep = (self.radii >= r_min) & (self.radii <= r_max)
        return RadiusGrid(self.radii[keep], self.kind, self.domain_radius)


@dataclass(frozen=True)
class GrowthProfile:
    """Per-radius logs of the four growth functionals."""

    r: np.ndarray
    log_mu: np.ndarray
    log_S: np.ndarray
    log_G: np.ndarray
    log_M: np.ndarray
    n_trunc: np.ndarray

    def __len__(self):
        return self.r.size

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "log_mu", "log_S", "log_G", "log_M", "N_trunc"])
        for i in range(self.r.size):
            writer.writerow(
                [format_float(self.r[i]), format_float(self.log_mu[i]), format_float(self.log_S[i]),
                 format_float(self.log_G[i]), format_float(self.log_M[i]), int(self.n_trunc[i])]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        rows = list(csv.DictReader(io.StringIO(text)))
        cols = {k: np.array([float(row[k]) for row in rows]) for k in rows[0]}
        return cls(cols["r"], cols["log_mu"], cols["log_S"], cols["log_G"], cols["log_M"],
                   cols["N_trunc"].astype(int))


def growth_profile(seq, grid, multipliers=None, tol=DEFAULT_TOL, compute_M=True, **mm_opts):
    """All four functionals at every grid radius.

    Truncation is re-validated at each radius; the error names the first
    radius where the prefix runs out.
    """
    s = resolve(seq, multipliers)
    radii = grid.radii if isinstance(grid, RadiusGrid) else np.asarray(grid, dtype=float)
    k = radii.size
    out = {name: np.empty(k) for name in ("log_mu", "log_S", "log_G", "log_M")}
    n_trunc = np.empty(k, dtype=int)
    for i, r in enumerate(radii):
        try:
            terms, nt = _checked_terms(s, r, tol)
        except InsufficientTruncation as exc:
            raise InsufficientTruncation(r, s.length, exc.suggested_length) from None
        out["log_mu"][i] = np.max(terms)
        out["log_S"][i] = 0.5 * logsumexp(2.0 * terms)
        out["log_G"][i] = logsumexp(terms)
        out["log_M"][i] = max_modulus(s, r, tol=tol, **mm_opts) if compute_M else np.nan
        n_trunc[i] = nt
    return GrowthProfile(np.array(radii, dtype=float), out["log_mu"], out["log_S"],
                         out["log_G"], out["log_M"], n_trunc)
