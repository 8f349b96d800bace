"""Logarithmic and h-logarithmic measure of radius sets, exceptional sets
and witness radii."""

from __future__ import annotations

import csv
import enum
import io
import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .errors import DomainError
from .growth import RadiusGrid, resolve
from .series import DEFAULT_TOL, format_float, log_terms, truncation_index


class MeasureConvention(str, enum.Enum):
    PLANE_CLASSIC = "plane_classic"
    DISK_CLASSIC = "disk_classic"
    UNIFIED = "unified"


@dataclass(frozen=True)
class HWeight:
    """Increasing weight ``h`` on ``[rho, R)`` with ``int h(r)/r dr = inf``."""

    kind: str
    evaluator: object = field(repr=False, compare=False)
    rho: float = 0.0
    R: float = np.inf

    @classmethod
    def constant_one(cls, rho=1.0):
        return cls("constant_one", lambda r: np.ones_like(np.asarray(r, dtype=float)), rho, np.inf)

    @classmethod
    def disk_reciprocal(cls, rho=0.0):
        return cls("disk_reciprocal", lambda r: 1.0 / (1.0 - np.asarray(r, dtype=float)), rho, 1.0)

    @classmethod
    def custom(cls, func, rho, R):
        return cls("custom", func, float(rho), float(R))

    def __call__(self, r):
        return self.evaluator(r)

    def partial_integrals(self, uppers):
        """``int_rho^b h(r)/r dr`` for each ``b``; should grow without bound as ``b -> R``."""
        lo = max(self.rho, 1e-300)
        edges = np.concatenate([[lo], np.asarray(uppers, dtype=float)])
        pieces = [
            integrate.quad(lambda r: self(r) / r, a, b, epsabs=1e-10, epsrel=1e-10, limit=200)[0]
            for a, b in zip(edges[:-1], edges[1:])
        ]
        return np.cumsum(pieces)

    def looks_divergent(self, n=6):
        """Heuristic check that the partial integrals keep growing towards ``R``."""
        if np.isinf(self.R):
            uppers = max(self.rho, 1.0) * 10.0 ** np.arange(1, n + 1)
        else:
            uppers = self.R - (self.R - self.rho) * 10.0 ** -np.arange(1, n + 1)
        inc = np.diff(self.partial_integrals(uppers))
        return bool(np.all(inc > 0) and inc[-1] >= 0.5 * inc[0])


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint closed intervals ``[a_i, b_i]``, sorted, with touching runs merged."""

    intervals: tuple = ()

    def __post_init__(self):
        ivs = sorted((float(a), float(b)) for a, b in self.intervals)
        merged = []
        for a, b in ivs:
            if b < a:
                raise DomainError(f"interval [{a}, {b}] is reversed")
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        object.__setattr__(self, "intervals", tuple(merged))

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    @property
    def empty(self):
        return not self.intervals

    def contains(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (r >= a) & (r <= b)
        return out

    def union(self, other):
        return IntervalSet(self.intervals + tuple(other))

    def to_csv(self):
        lines = ["a,b"] + [f"{format_float(a)},{format_float(b)}" for a, b in self.intervals]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text):
        rows = csv.DictReader(io.StringIO(text))
        return cls(tuple((float(row["a"]), float(row["b"])) for row in rows))


def h_log_measure(E, conv, h=None):
    """Measure of ``E`` under one of the three conventions.

    ``plane_classic``: ``int_{E cap [1,inf)} dr/r``;
    ``disk_classic``: ``int_E dr/(1-r)``;
    ``unified``: ``int_{E cap [rho,R)} h(r)/r dr``.
    Classic conventions and the two built-in ``h`` are integrated in
    closed form, a custom ``h`` by adaptive quadrature.
    """
    conv = MeasureConvention(conv)
    if conv is MeasureConvention.UNIFIED and h is None:
        raise DomainError("the unified convention needs an h weight")
    total = 0.0
    for a, b in E:
        if a < 0:
            raise DomainError(f"interval [{a}, {b}] leaves [0, R)")
        if conv is MeasureConvention.PLANE_CLASSIC:
            lo = max(a, 1.0)
            if b > lo:
                total += np.log(b / lo)
        elif conv is MeasureConvention.DISK_CLASSIC:
            if b >= 1.0:
                raise DomainError(f"interval [{a}, {b}] leaves [0, 1)")
            total += np.log1p(-a) - np.log1p(-b)
        else:
            if b >= h.R:
                raise DomainError(f"interval [{a}, {b}] leaves [0, {h.R})")
            lo = max(a, h.rho)
            if b <= lo:
                continue
            if h.kind == "constant_one":
                total += np.log(b / lo)
            elif h.kind == "disk_reciprocal":
                # antiderivative of 1/(r(1-r)) is log(r/(1-r))
                total += np.log(b / lo) + np.log1p(-lo) - np.log1p(-b)
            else:
                val, _ = integrate.quad(lambda r: h(r) / r, lo, b, epsabs=1e-10, epsrel=1e-10, limit=200)
                total += val
    return float(total)


def violation_set(grid, flags):
    """Union of grid edges ``[r_i, r_{i+1}]`` with at least one flagged endpoint.

    A single flagged grid point with no neighbours becomes the degenerate
    interval ``[r_i, r_i]``.
    """
    radii = grid.radii if isinstance(grid, RadiusGrid) else np.asarray(grid, dtype=float)
    flags = np.asarray(flags, dtype=bool)
    if flags.shape != radii.shape:
        raise DomainError("flags must match the grid length")
    if radii.size == 1:
        return IntervalSet(((radii[0], radii[0]),) if flags[0] else ())
    edges = flags[:-1] | flags[1:]
    return IntervalSet(tuple((radii[i], radii[i + 1]) for i in np.flatnonzero(edges)))


@dataclass(frozen=True)
class ExceptionalSetReport:
    intervals: IntervalSet
    measure: float
    convention: str
    rho: float
    flags: np.ndarray = field(repr=False)

    def to_json(self):
        return json.dumps({
            "convention": self.convention,
            "measure": self.measure,
            "rho": self.rho,
            "intervals": [list(iv) for iv in self.intervals],
        })


def _convention_for(h):
    if h.kind == "constant_one":
        return MeasureConvention.PLANE_CLASSIC
    if h.kind == "disk_reciprocal":
        return MeasureConvention.DISK_CLASSIC
    return MeasureConvention.UNIFIED


def _tail_start(ok):
    """First index from which ``ok`` holds to the end (``len(ok)`` if never)."""
    bad = np.flatnonzero(~ok)
    return 0 if bad.size == 0 else int(bad[-1]) + 1


def _report(radii, flags, h, ok):
    start = _tail_start(ok)
    flags = flags & (np.arange(radii.size) >= start)
    E = violation_set(radii, flags)
    rho = float(radii[start]) if start < radii.size else float("nan")
    conv = _convention_for(h)
    hh = h if conv is MeasureConvention.UNIFIED else None
    if not np.isnan(rho):
        # edges reaching back below the cutoff only count from rho on
        E = IntervalSet(tuple((max(a, rho), b) for a, b in E if b > rho))
    return ExceptionalSetReport(E, h_log_measure(E, conv, hh), conv.value, rho, flags)


def derivative_exceptional_set(g_log, h, delta, grid):
    """Radii where ``d/dr log g > (h(r)/r) (log g)^{1+delta}``.

    The derivative is a second-order finite difference of ``log g`` on the
    grid.  Radii before the point from which ``log g > 0`` holds for good
    are below the cutoff and never flagged; that point is reported as
    ``rho``.
    """
    radii = grid.radii if isinstance(grid, RadiusGrid) else np.asarray(grid, dtype=float)
    lg = np.asarray(g_log, dtype=float)
    if lg.shape != radii.shape:
        raise DomainError("g_log must match the grid")
    deriv = np.gradient(lg, radii, edge_order=2) if radii.size > 2 else np.gradient(lg, radii)
    ok = lg > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        bound = h(radii) / radii * np.where(ok, lg, np.nan) ** (1.0 + delta)
    flags = ok & (deriv > bound)
    return _report(radii, flags, h, ok)


def series_derivative_check(seq, h, delta, grid, multipliers=None, tol=DEFAULT_TOL):
    """Radii where ``sum n |a_n| r^n > h(r) G(r) (log G(r))^{1+delta}``.

    Works on ``|a_n|`` (times ``|X_n|`` when multipliers are given).
    """
    s = resolve(seq, multipliers)
    radii = grid.radii if isinstance(grid, RadiusGrid) else np.asarray(grid, dtype=float)
    log_lhs = np.empty(radii.size)
    log_G = np.empty(radii.size)
    n = np.arange(s.length)
    with np.errstate(divide="ignore"):
        log_n = np.log(n)
    for i, r in enumerate(radii):
        truncation_index(s, r, tol)
        terms = log_terms(s, r)
        log_G[i] = logsumexp(terms)
        log_lhs[i] = logsumexp(terms[1:] + log_n[1:]) if s.length > 1 else -np.inf
    ok = log_G > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        log_rhs = np.log(h(radii)) + log_G + (1.0 + delta) * np.log(np.where(ok, log_G, np.nan))
    flags = ok & (log_lhs > log_rhs)
    return _report(radii, flags, h, ok)


@dataclass(frozen=True)
class WitnessReport:
    """Witness radii keyed by integer multi-index, plus clause verification."""

    radii: dict
    clause_i: bool
    clause_ii: bool
    clause_iii: bool
    starved: bool


def _index_sets(v):
    # integer l with l <= v <= l+1; a value sitting exactly on an integer lies in two cells
    base = np.floor(v)
    out = [int(base)]
    if v == base and base - 1 >= 1:
        out.append(int(base) - 1)
    return [k for k in out if k >= 1]


def witness_radii(phi, psi_list, E, grid):
    """Largest grid radius outside ``E`` in every realized level-set cell.

    For each multi-index ``(l, k_1, ..., k_m)`` with some grid radius
    outside ``E`` satisfying ``l <= phi <= l+1`` and ``k_j <= psi_j <= k_j+1``,
    returns the largest such radius.  All three clauses are then checked
    on the grid: returned radii avoid ``E``; each lies in its cell; every
    grid radius outside ``E`` is dominated by a returned radius whose
    function values exceed its own by at most 1.
    """
    radii = grid.radii if isinstance(grid, RadiusGrid) else np.asarray(grid, dtype=float)
    funcs = [np.asarray(phi, dtype=float)] + [np.asarray(p, dtype=float) for p in psi_list]
    for f in funcs:
        if f.shape != radii.shape:
            raise DomainError("sampled functions must match the grid")
        if np.any(f < 1):
            raise DomainError("sampled functions must be >= 1 on the grid")
    outside = ~E.contains(radii)
    best = {}
    for i in np.flatnonzero(outside):
        for idx in itertools.product(*(_index_sets(f[i]) for f in funcs)):
            if idx not in best or radii[i] > radii[best[idx]]:
                best[idx] = i
    values = np.stack(funcs, axis=1)
    chosen = sorted(best.items(), key=lambda kv: kv[0])
    clause_i = all(outside[i] for _, i in chosen)
    clause_ii = all(
        all(k <= values[i, j] <= k + 1 for j, k in enumerate(idx)) for idx, i in chosen
    )
    picks = np.array(sorted(set(i for _, i in chosen)), dtype=int)
    clause_iii = True
    for i in np.flatnonzero(outside):
        cand = picks[radii[picks] >= radii[i]]
        if not np.any(np.all(values[cand] <= values[i] + 1, axis=1)):
            clause_iii = False
            break
    return WitnessReport(
        {idx: float(radii[i]) for idx, i in chosen},
        bool(clause_i),
        bool(clause_ii),
        bool(clause_iii),
        bool(not outside[-1]),
    )
