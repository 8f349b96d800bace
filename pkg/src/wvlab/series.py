"""Truncated power series in log-magnitude / phase form.

Coefficients are stored as ``log|a_n|`` (``-inf`` for a zero coefficient)
and ``arg a_n`` wrapped to ``[-pi, pi)``.  Everything downstream works with
``log|a_n| + n log r`` so that radii where ``|f|`` overflows a double
(``e^r`` at ``r = 800``) stay representable.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InsufficientTruncation

TRUNCATION_WINDOW = 50
DEFAULT_TOL = 1e-12


def wrap_phase(phase):
    """Wrap angles to ``[-pi, pi)``."""
    out = np.mod(np.asarray(phase, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    # mod can round up to exactly 2*pi for inputs just below a multiple of it
    return np.where(out >= np.pi, out - 2.0 * np.pi, out)


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """Stored prefix ``a_0, ..., a_N`` of a power series.

    ``polynomial=True`` declares that every coefficient past the prefix is
    zero, so the prefix is the whole function.  Otherwise the prefix is a
    truncation of an infinite series and every radius has to be checked
    with :func:`truncation_index` before use.
    """

    log_abs: np.ndarray
    phase: np.ndarray
    domain_radius: float = np.inf
    polynomial: bool = False

    def __post_init__(self):
        log_abs = np.asarray(self.log_abs, dtype=float).ravel()
        phase = np.asarray(self.phase, dtype=float).ravel()
        if log_abs.size < 1:
            raise DomainError("a coefficient sequence needs at least one coefficient")
        if log_abs.shape != phase.shape:
            raise DomainError(
                f"log_abs and phase lengths differ ({log_abs.size} != {phase.size})"
            )
        if np.any(np.isnan(log_abs)) or np.any(log_abs == np.inf):
            raise DomainError("log_abs must be finite or -inf")
        if not np.all(np.isfinite(phase)):
            raise DomainError("phases must be finite")
        if not self.domain_radius > 0:
            raise DomainError("domain_radius must be positive")
        phase = np.where(np.isneginf(log_abs), 0.0, wrap_phase(phase))
        object.__setattr__(self, "log_abs", _readonly(log_abs))
        object.__setattr__(self, "phase", _readonly(phase))
        object.__setattr__(self, "domain_radius", float(self.domain_radius))

    @property
    def length(self):
        return self.log_abs.size

    @property
    def degree(self):
        return self.length - 1

    @property
    def is_zero(self):
        return bool(np.all(np.isneginf(self.log_abs)))

    @property
    def is_nonconstant(self):
        """True when some coefficient of index >= 1 is nonzero.

        A finite prefix cannot rule out a constant function whose nonzero
        coefficients all lie past the stored range.
        """
        return bool(np.any(np.isfinite(self.log_abs[1:])))

    @classmethod
    def from_coefficients(cls, coefficients, domain_radius=np.inf, polynomial=False):
        c = np.asarray(coefficients, dtype=complex).ravel()
        with np.errstate(divide="ignore"):
            log_abs = np.log(np.abs(c))
        return cls(log_abs, np.angle(c), domain_radius, polynomial)

    def coefficients(self):
        """Linear-domain coefficients; overflows for huge magnitudes."""
        return np.exp(self.log_abs) * np.exp(1j * self.phase)

    def truncate(self, n_terms):
        """First ``n_terms`` coefficients, still marked as a truncation."""
        if not 1 <= n_terms <= self.length:
            raise DomainError(f"cannot keep {n_terms} of {self.length} coefficients")
        return CoefficientSequence(
            self.log_abs[:n_terms], self.phase[:n_terms], self.domain_radius, self.polynomial
        )

    def as_polynomial(self):
        """The same prefix, declared to be the whole function."""
        return CoefficientSequence(self.log_abs, self.phase, self.domain_radius, True)

    def with_multipliers(self, log_abs_multipliers, phase_multipliers):
        """Coefficientwise product ``a_n X_n`` given ``log|X_n|`` and ``arg X_n``."""
        lm = np.asarray(log_abs_multipliers, dtype=float)[: self.length]
        pm = np.asarray(phase_multipliers, dtype=float)[: self.length]
        if lm.size < self.length:
            raise DomainError("fewer multipliers than coefficients")
        return CoefficientSequence(
            self.log_abs + lm, self.phase + pm, self.domain_radius, self.polynomial
        )

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "log_abs", "phase"])
        for n, (la, ph) in enumerate(zip(self.log_abs, self.phase)):
            writer.writerow([n, format_float(la), format_float(ph)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, domain_radius=np.inf, polynomial=False):
        rows = list(csv.DictReader(io.StringIO(text)))
        idx = [int(row["n"]) for row in rows]
        if idx != list(range(len(rows))):
            raise DomainError("coefficient CSV rows must be indexed 0..N in order")
        return cls(
            [float(row["log_abs"]) for row in rows],
            [float(row["phase"]) for row in rows],
            domain_radius,
            polynomial,
        )


def format_float(x):
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


def make_exp_series(N):
    """Coefficients ``1/n!`` of ``e^z`` for ``n = 0..N``."""
    if N < 0:
        raise DomainError("N must be >= 0")
    n = np.arange(N + 1)
    return CoefficientSequence(-gammaln(n + 1.0), np.zeros(N + 1), np.inf)


def make_geometric_series(N):
    """Coefficients of ``1/(1-z)`` on the unit disk."""
    if N < 0:
        raise DomainError("N must be >= 0")
    return CoefficientSequence(np.zeros(N + 1), np.zeros(N + 1), 1.0)


def make_weight_series(w, N):
    """Coefficients ``1 / prod_{k<=n} w_k`` for a weight sequence ``w``.

    The domain radius follows ``w.space``: infinite on the plane, 1 on the
    disk.
    """
    if N < 0:
        raise DomainError("N must be >= 0")
    log_prod = w.log_prefix(N)
    phase_prod = w.phase_prefix(N)
    radius = np.inf if w.space == "plane" else 1.0
    return CoefficientSequence(-log_prod, -phase_prod, radius)


def log_terms(seq, r, log_abs_multipliers=None):
    """``log|a_n X_n| + n log r`` for every stored index."""
    if not 0 < r < seq.domain_radius:
        raise DomainError(f"radius {r!r} outside (0, {seq.domain_radius})")
    terms = seq.log_abs + np.arange(seq.length) * np.log(r)
    if log_abs_multipliers is not None:
        terms = terms + np.asarray(log_abs_multipliers, dtype=float)[: seq.length]
    return terms


def multiplier_parts(multipliers, length):
    """Split optional complex multipliers into ``(log|X|, arg X)``."""
    if multipliers is None:
        return None, None
    x = np.asarray(multipliers, dtype=complex).ravel()
    if x.size < length:
        raise DomainError(f"need at least {length} multipliers, got {x.size}")
    x = x[:length]
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x)), np.angle(x)


def truncation_index(seq, r, tol=DEFAULT_TOL, multipliers=None, window=TRUNCATION_WINDOW):
    """Index past which the stored terms at radius ``r`` are negligible.

    Returns ``N* = 1 +`` the last index whose term reaches ``tol`` times the
    maximal term, so every stored term from ``N*`` on is negligible.  At
    least ``window`` such terms must be stored to confirm the decay (a
    randomized tail can dip below the threshold and come back); for a
    polynomial the missing tail counts as zero.  Terms are summed over
    ``0..N*``.
    """
    if not 0 < tol < 1:
        raise DomainError("tol must lie in (0, 1)")
    log_x, _ = multiplier_parts(multipliers, seq.length)
    terms = log_terms(seq, r, log_x)
    log_mu = np.max(terms)
    if log_mu == -np.inf:
        raise DomainError("zero series has no truncation index")
    above = np.flatnonzero(terms >= log_mu + np.log(tol))
    n_star = int(above[-1]) + 1
    if seq.polynomial:
        return min(n_star, seq.length - 1)
    if seq.length - n_star >= window:
        return n_star
    raise InsufficientTruncation(r, seq.length, _suggest_length(seq, r, tol, window))


def _suggest_length(seq, r, tol, window):
    # extrapolate the tail trend of log-terms to where they clear the threshold
    n = np.arange(seq.length)
    terms = seq.log_abs + n * np.log(r)
    finite = np.isfinite(terms)
    if finite.sum() < 4:
        return 2 * seq.length + window
    tail = n[finite][-max(4, finite.sum() // 4):]
    slope = np.polyfit(tail, terms[tail], 1)[0]
    if slope >= 0:
        return 2 * seq.length + window
    gap = terms[tail[-1]] - (np.max(terms[finite]) + np.log(tol))
    return int(tail[-1] + max(gap, 0.0) / -slope) + 2 * window


def evaluate(seq, r, theta, multipliers=None):
    """Value of the series at ``r e^{i theta}`` as ``(log|f|, arg f)``.

    The terms are rescaled by their maximal magnitude before summation, so
    the result is finite whenever ``log|f|`` is.  ``theta`` may be an array.
    """
    log_x, arg_x = multiplier_parts(multipliers, seq.length)
    terms = log_terms(seq, r, log_x)
    phase = seq.phase if arg_x is None else seq.phase + arg_x
    top = np.max(terms)
    if top == -np.inf:
        shape = np.shape(theta)
        return np.full(shape, -np.inf)[()], np.zeros(shape)[()]
    keep = np.isfinite(terms)
    weights = np.exp(terms[keep] - top) * np.exp(1j * phase[keep])
    n = np.arange(seq.length)[keep]
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
    total = np.exp(1j * np.outer(theta_arr, n)) @ weights
    with np.errstate(divide="ignore"):
        log_mag = top + np.log(np.abs(total))
    arg = np.angle(total)
    if np.ndim(theta) == 0:
        return float(log_mag[0]), float(arg[0])
    return log_mag, arg


def radius_of_convergence_estimate(
    seq, multipliers=None, log_abs_multipliers=None, windows=4, diverge_slope=-0.05
):
    """Empirical ``1 / limsup |a_n X_n|^{1/n}`` from the stored tail.

    Uses the largest ``log|a_n X_n| / n`` over the last half of the prefix.
    If the per-window maxima of that exponent keep falling at least as fast
    as ``-diverge_slope * log n``, the exponent is taken to diverge to
    ``-inf`` and the estimate is infinite.
    """
    if seq.length < 32:
        raise DomainError("radius estimate needs at least 32 coefficients")
    log_abs = seq.log_abs
    if log_abs_multipliers is None and multipliers is not None:
        log_abs_multipliers, _ = multiplier_parts(multipliers, seq.length)
    if log_abs_multipliers is not None:
        log_abs = log_abs + np.asarray(log_abs_multipliers, dtype=float)[: seq.length]
    n = np.arange(seq.length)
    half = seq.length // 2
    beta = log_abs[half:] / n[half:]
    if np.all(np.isneginf(beta)):
        return np.inf
    chunks = np.array_split(np.arange(beta.size), windows)
    maxima = np.array([np.max(beta[c]) for c in chunks])
    centres = np.array([np.log(n[half:][c].mean()) for c in chunks])
    if np.all(np.isfinite(maxima)):
        slope = np.polyfit(centres, maxima, 1)[0]
        if slope < diverge_slope and np.all(np.diff(maxima) < 0):
            return np.inf
    return float(np.exp(-np.max(beta)))
