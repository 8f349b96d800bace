"""Seeded subgaussian multiplier sequences and their tail certificates."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .series import CoefficientSequence

KINDS = (
    "rademacher",
    "steinhaus",
    "complex_gaussian",
    "uniform_disk",
    "shrinking_uniform",
    "bounded_custom",
)
UNIMODULAR = ("rademacher", "steinhaus")


@dataclass(frozen=True)
class SeedSpec:
    """``(master_seed, stream_index)`` fixes a draw sequence bit for bit."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and 0 <= v < 2**64):
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {v!r}")

    def generator(self):
        # Philox is counter based; each (master, stream) pair keys its own stream
        ss = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SubgaussianSampler:
    """Distribution descriptor with a tail certificate ``P(|X|>t) <= K e^{-t^2/tau^2}``.

    Build instances through the module-level constructors (``rademacher()``,
    ``complex_gaussian(sigma)``, ...), which attach the certificate.
    """

    kind: str
    params: tuple = ()
    certificate: tuple = (np.e, 1.0)
    full_support: bool = False
    centred: bool = True
    values: tuple = field(default=(), repr=False)
    weights: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown sampler kind {self.kind!r}")
        K, tau = self.certificate
        if not (K > 0 and tau > 0):
            raise DomainError("certificate constants must be positive")

    @property
    def unimodular(self):
        return self.kind in UNIMODULAR

    @property
    def real_valued(self):
        if self.kind == "bounded_custom":
            return bool(np.all(np.imag(self.values) == 0))
        return self.kind in ("rademacher", "shrinking_uniform")

    def tail_bound(self, t):
        K, tau = self.certificate
        return K * np.exp(-np.square(t) / tau**2)

    def to_config(self):
        out = {"kind": self.kind, "params": list(self.params)}
        if self.kind == "bounded_custom":
            out["params"] = [[complex(v).real, complex(v).imag] for v in self.values]
            out["weights"] = list(self.weights)
        return out


def rademacher():
    return SubgaussianSampler("rademacher", (), (np.e, 1.0), False, True)


def steinhaus():
    return SubgaussianSampler("steinhaus", (), (np.e, 1.0), False, True)


def complex_gaussian(sigma=1.0):
    """Real and imaginary parts i.i.d. ``N(0, sigma^2/2)``, so ``E|X|^2 = sigma^2``."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    return SubgaussianSampler("complex_gaussian", (float(sigma),), (2.0, 2.0 * sigma), True, True)


def uniform_disk(radius=1.0):
    if not radius > 0:
        raise DomainError("radius must be positive")
    return SubgaussianSampler("uniform_disk", (float(radius),), (np.e, float(radius)), False, True)


def shrinking_uniform():
    """Draw ``k`` uniform on ``[-1/(k+1), 1/(k+1)]``; independent, not identically distributed."""
    return SubgaussianSampler("shrinking_uniform", (), (np.e, 1.0), False, True)


def bounded_custom(values, weights=None):
    """Discrete law on finitely many complex points."""
    vals = tuple(complex(v) for v in np.atleast_1d(values))
    if not vals:
        raise DomainError("bounded_custom needs at least one value")
    if weights is None:
        weights = np.full(len(vals), 1.0 / len(vals))
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(vals),) or np.any(w < 0) or not np.isclose(w.sum(), 1.0):
        raise DomainError("weights must be a probability vector matching values")
    bound = max(abs(v) for v in vals)
    mean = np.dot(w, np.array(vals))
    return SubgaussianSampler(
        "bounded_custom",
        (),
        (np.e, bound if bound > 0 else 1.0),
        False,
        bool(abs(mean) < 1e-12),
        vals,
        tuple(float(x) for x in w),
    )


def from_config(spec):
    """Build a sampler from ``{"kind": ..., "params": [...]}``."""
    kind = spec.get("kind")
    params = list(spec.get("params", []))
    if kind == "rademacher":
        return rademacher()
    if kind == "steinhaus":
        return steinhaus()
    if kind == "complex_gaussian":
        return complex_gaussian(*params)
    if kind == "uniform_disk":
        return uniform_disk(*params)
    if kind == "shrinking_uniform":
        return shrinking_uniform()
    if kind == "bounded_custom":
        values = [complex(*p) if isinstance(p, (list, tuple)) else complex(p) for p in params]
        return bounded_custom(values, spec.get("weights"))
    raise DomainError(f"unknown sampler kind {kind!r}")


def sample_sequence(s, n, seed, start=0):
    """``n`` independent draws; ``start`` offsets the index of indexed samplers."""
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = seed.generator()
    if s.kind == "rademacher":
        return (2.0 * rng.integers(0, 2, size=n) - 1.0).astype(complex)
    if s.kind == "steinhaus":
        return np.exp(2j * np.pi * rng.random(n))
    if s.kind == "complex_gaussian":
        scale = s.params[0] / np.sqrt(2.0)
        z = rng.standard_normal((n, 2)) * scale
        return z[:, 0] + 1j * z[:, 1]
    if s.kind == "uniform_disk":
        radius = s.params[0] * np.sqrt(rng.random(n))
        return radius * np.exp(2j * np.pi * rng.random(n))
    if s.kind == "shrinking_uniform":
        k = np.arange(start, start + n)
        return ((2.0 * rng.random(n) - 1.0) / (k + 1.0)).astype(complex)
    idx = rng.choice(len(s.values), size=n, p=np.asarray(s.weights))
    return np.asarray(s.values, dtype=complex)[idx]


def log_modulus(s, x):
    """``log|x|``, exactly zero for unimodular samplers."""
    if s.unimodular:
        return np.zeros(np.shape(x))
    with np.errstate(divide="ignore"):
        return np.log(np.abs(x))


def phase_of(s, x):
    if s.kind == "rademacher":
        return np.where(np.real(x) < 0, -np.pi, 0.0)
    return np.angle(x)


@dataclass(frozen=True, eq=False)
class RandomizedSeries:
    """A base series together with one draw of its random multipliers."""

    base: CoefficientSequence
    multipliers: np.ndarray
    sampler: SubgaussianSampler
    seed: SeedSpec

    def __post_init__(self):
        x = np.array(self.multipliers, dtype=complex)
        if x.size != self.base.length:
            raise DomainError("multiplier count must equal the base length")
        x.setflags(write=False)
        object.__setattr__(self, "multipliers", x)

    @property
    def length(self):
        return self.base.length

    @property
    def log_abs_multipliers(self):
        return log_modulus(self.sampler, self.multipliers)

    def as_sequence(self):
        """The randomized series ``sum a_n X_n z^n`` as a plain sequence."""
        return self.base.with_multipliers(
            self.log_abs_multipliers, phase_of(self.sampler, self.multipliers)
        )

    def multipliers_csv(self):
        from .series import format_float

        lines = ["n,re,im"]
        for n, x in enumerate(self.multipliers):
            lines.append(f"{n},{format_float(x.real)},{format_float(x.imag)}")
        return "\n".join(lines) + "\n"


def randomize(seq, s, seed):
    """Attach ``seq.length`` fresh draws from ``s`` to ``seq``."""
    return RandomizedSeries(seq, sample_sequence(s, seq.length, seed), s, seed)


@dataclass(frozen=True)
class TailCheckRow:
    t: float
    empirical_prob: float
    bound: float
    flagged: bool


def tail_certificate_check(s, trials, t_grid, seed=SeedSpec(0)):
    """Empirical exceedance ``P(|X| > t)`` against the certified bound.

    A row is flagged when the empirical frequency exceeds the bound by more
    than three binomial standard errors.
    """
    if trials < 10_000:
        raise DomainError("tail check needs at least 10^4 trials")
    mod = np.abs(sample_sequence(s, trials, seed))
    rows = []
    for t in np.atleast_1d(np.asarray(t_grid, dtype=float)):
        emp = float(np.mean(mod > t))
        bound = float(s.tail_bound(t))
        p = min(bound, 1.0)
        se = np.sqrt(p * (1.0 - p) / trials)
        rows.append(TailCheckRow(float(t), emp, bound, emp > bound + 3.0 * se))
    return rows


def mgf_bound_estimate(s, lambda_grid, trials, seed=SeedSpec(0)):
    """Smallest ``sigma`` with ``E e^{lambda X} <= e^{sigma^2 lambda^2}`` on the grid.

    Complex samplers are tested on their real and imaginary parts
    separately and the larger constant is returned.  The empirical mean is
    lowered by three standard errors before inverting the bound.
    """
    if trials < 100_000:
        raise DomainError("mgf estimate needs at least 10^5 trials")
    lam = np.asarray(lambda_grid, dtype=float)
    if not np.allclose(np.sort(lam), np.sort(-lam)):
        raise DomainError("lambda grid must be symmetric about 0")
    lam = lam[lam != 0]
    x = sample_sequence(s, trials, seed)
    parts = [x.real] if s.real_valued else [x.real, x.imag]
    sigma2 = 0.0
    for part in parts:
        for l in lam:
            e = np.exp(l * part)
            mean = e.mean() - 3.0 * e.std() / np.sqrt(trials)
            if mean > 1.0:
                sigma2 = max(sigma2, np.log(mean) / l**2)
    return float(np.sqrt(sigma2))
