"""Config-driven experiments.

A config is a JSON object.  Every experiment returns a mapping from
artifact file name to text; nothing here touches the file system, so the
caller writes all files in one place after a run succeeds.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from . import dynamics, sampler as samplers
from .errors import ConfigError, DomainError
from .growth import RadiusGrid, growth_profile
from .inequality import (
    BoundKind,
    calibrate_constant,
    check_inequality,
    kahane_experiment,
    levy_trial_suite,
)
from .measure import ExceptionalSetReport
from .sampler import SeedSpec, randomize
from .series import (
    CoefficientSequence,
    format_float,
    make_exp_series,
    make_geometric_series,
    make_weight_series,
)

KINDS = ("growth", "wv-check", "levy", "kahane", "shift", "fhc-density", "fhc-growth")
PROFILE_OPTIONS = ("tol", "oversample", "refine_rounds", "min_samples")


def _csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


# --- validation helpers -------------------------------------------------------

def _get(cfg, key, path, default=..., kind=None):
    if key not in cfg:
        if default is ...:
            raise ConfigError(f"{path}{key}", "missing required field")
        return default
    value = cfg[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"{path}{key}", f"expected {getattr(kind, '__name__', kind)}")
    return value


def _int(cfg, key, path, default=..., minimum=None):
    if key not in cfg and default is not ...:
        return default
    value = _get(cfg, key, path)
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigError(f"{path}{key}", "expected an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}{key}", f"must be >= {minimum}, got {value}")
    return int(value)


def _float(cfg, key, path, default=..., positive=False):
    if key not in cfg and default is not ...:
        return default
    value = _get(cfg, key, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}{key}", "expected a number")
    if positive and not value > 0:
        raise ConfigError(f"{path}{key}", f"must be positive, got {value}")
    return float(value)


def _weights(spec, path):
    if not isinstance(spec, dict):
        raise ConfigError(path.rstrip("."), "expected an object")
    kind = _get(spec, "kind", path, kind=str)
    if kind == "derivative":
        return dynamics.WeightSequence.derivative()
    if kind == "taylor_shift":
        return dynamics.WeightSequence.taylor_shift()
    space = _get(spec, "space", path, "plane", str)
    if space not in dynamics.SPACES:
        raise ConfigError(f"{path}space", f"must be one of {dynamics.SPACES}")
    c = _float(spec, "c", path, 1.0)
    if c == 0:
        raise ConfigError(f"{path}c", "weights must be nonzero")
    if kind == "constant":
        return dynamics.WeightSequence.constant(c, space)
    if kind == "power":
        return dynamics.WeightSequence.power(c, _float(spec, "p", path), space)
    raise ConfigError(f"{path}kind", f"unknown weight kind {kind!r}")


def _series(cfg, base_dir):
    spec = _get(cfg, "series", "", kind=dict)
    path = "series."
    kind = _get(spec, "kind", path, kind=str)
    N = _int(spec, "N", path, 1000, minimum=0)
    if kind == "exp":
        seq = make_exp_series(N)
    elif kind == "geometric":
        seq = make_geometric_series(N)
    elif kind == "weight":
        seq = make_weight_series(_weights(_get(spec, "weights", path), "series.weights."), N)
    elif kind == "csv":
        file = Path(_get(spec, "path", path, kind=str))
        if not file.is_absolute():
            file = base_dir / file
        try:
            text = file.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"{path}path", str(exc)) from None
        radius = _float(spec, "domain_radius", path, float("inf"), positive=True)
        seq = CoefficientSequence.from_csv(text, radius, bool(spec.get("polynomial", False)))
    else:
        raise ConfigError(f"{path}kind", f"unknown series kind {kind!r}")
    if spec.get("polynomial") and kind != "csv":
        seq = seq.as_polynomial()
    return seq


def _sampler(cfg, required=True):
    if "sampler" not in cfg and not required:
        return None
    spec = _get(cfg, "sampler", "", kind=dict)
    if spec.get("kind") not in samplers.KINDS:
        raise ConfigError("sampler.kind", f"must be one of {samplers.KINDS}")
    try:
        return samplers.from_config(spec)
    except (DomainError, TypeError) as exc:
        raise ConfigError("sampler.params", str(exc)) from None


def _grid(cfg, domain_radius):
    spec = _get(cfg, "grid", "", kind=dict)
    path = "grid."
    kind = _get(spec, "kind", path, kind=str)
    try:
        if kind == "geometric_plane":
            grid = RadiusGrid.geometric_plane(_float(spec, "r0", path, positive=True),
                                              _float(spec, "ratio", path, positive=True),
                                              _int(spec, "n", path, minimum=1))
        elif kind == "geometric_between":
            grid = RadiusGrid.geometric_between(_float(spec, "r_min", path, positive=True),
                                                _float(spec, "r_max", path, positive=True),
                                                _int(spec, "per_octave", path, 8, minimum=1))
        elif kind == "approach_disk":
            grid = RadiusGrid.approach_disk(_float(spec, "r0", path, positive=True),
                                            _float(spec, "sigma", path, positive=True),
                                            _int(spec, "n", path, minimum=1))
        elif kind == "explicit":
            grid = RadiusGrid.explicit(_get(spec, "radii", path, kind=list), domain_radius)
        else:
            raise ConfigError(f"{path}kind", f"unknown grid kind {kind!r}")
    except DomainError as exc:
        raise ConfigError("grid", str(exc)) from None
    if grid.radii[-1] >= domain_radius:
        raise ConfigError("grid", f"radii must stay below the domain radius {domain_radius}")
    return RadiusGrid(grid.radii, grid.kind, domain_radius)


def _bound(cfg):
    spec = _get(cfg, "bound", "", kind=(dict, str))
    if isinstance(spec, str):
        spec = {"kind": spec, "delta": cfg.get("delta", 0.5)}
    name = _get(spec, "kind", "bound.", kind=str)
    try:
        kind = BoundKind(name)
    except ValueError:
        raise ConfigError("bound.kind", f"must be one of {[k.value for k in BoundKind]}") from None
    delta = _float(spec, "delta", "bound.", 0.5, positive=True)
    if kind.unified:
        raise ConfigError("bound.kind", "unified bounds need a custom h and are library-only")
    return kind, delta


def _profile_opts(cfg):
    spec = _get(cfg, "profile", "", {}, dict)
    out = {}
    for key in spec:
        if key not in PROFILE_OPTIONS:
            raise ConfigError(f"profile.{key}", f"unknown option; allowed {PROFILE_OPTIONS}")
    if "tol" in spec:
        out["tol"] = _float(spec, "tol", "profile.", positive=True)
    for key in ("oversample", "refine_rounds", "min_samples"):
        if key in spec:
            out[key] = _int(spec, key, "profile.", minimum=0)
    return out


def _calibration(cfg):
    C = _float(cfg, "C", "", None, positive=True)
    burn_in = _get(cfg, "burn_in", "", None, list)
    if burn_in is not None and (len(burn_in) != 2 or not burn_in[0] < burn_in[1]):
        raise ConfigError("burn_in", "expected [r_min, r_max] with r_min < r_max")
    if C is None and burn_in is None:
        raise ConfigError("C", "give either C or a burn_in window")
    return C, burn_in


def _seed(cfg):
    sampler_seed = cfg.get("sampler", {}).get("seed", 0) if isinstance(cfg.get("sampler"), dict) else 0
    if "master_seed" not in cfg:
        return _int({"seed": sampler_seed}, "seed", "sampler.", minimum=0)
    return _int(cfg, "master_seed", "", minimum=0)


def validate(cfg):
    if not isinstance(cfg, dict):
        raise ConfigError("config", "expected a JSON object")
    kind = _get(cfg, "kind", "", kind=str)
    if kind not in KINDS:
        raise ConfigError("kind", f"must be one of {KINDS}")
    if "trials" in cfg:
        _int(cfg, "trials", "", minimum=1)
    seed = _seed(cfg)
    if seed >= 2**64:
        raise ConfigError("master_seed", "must fit in 64 bits")
    return kind


# --- experiments --------------------------------------------------------------

def _report_rows(rep, trial=None):
    head = [] if trial is None else [trial]
    for i in range(rep.r.size):
        yield head + [float(rep.r[i]), float(rep.log_M[i]), float(rep.log_bound[i]),
                      float(rep.min_C[i]), int(rep.violated[i])]


def run_growth(cfg, base_dir):
    seq = _series(cfg, base_dir)
    grid = _grid(cfg, seq.domain_radius)
    s = _sampler(cfg, required=False)
    out = {}
    target = seq
    if s is not None:
        target = randomize(seq, s, SeedSpec(_seed(cfg), 0))
        out["multipliers.csv"] = target.multipliers_csv()
    prof = growth_profile(target, grid, **_profile_opts(cfg))
    out["profile.csv"] = prof.to_csv()
    return out


def run_wv_check(cfg, base_dir):
    seq = _series(cfg, base_dir)
    grid = _grid(cfg, seq.domain_radius)
    kind, delta = _bound(cfg)
    C, burn_in = _calibration(cfg)
    opts = _profile_opts(cfg)
    base = growth_profile(seq, grid, **opts)
    prof = base
    s = _sampler(cfg, required=kind.randomized)
    if s is not None:
        prof = growth_profile(randomize(seq, s, SeedSpec(_seed(cfg), 0)), grid, **opts)
    if C is None:
        C = calibrate_constant(check_inequality(prof, base, kind, log_C=0.0, delta=delta), burn_in)
    rep = check_inequality(prof, base, kind, C=C, delta=delta)
    summary = ExceptionalSetReport(rep.violations, rep.measure, rep.convention, rep.r0,
                                   rep.violated)
    info = json.loads(summary.to_json())
    info.update({"C": rep.C, "kind": kind.value, "delta": delta})
    return {
        "ratios.csv": _csv(["r", "log_M", "log_bound", "min_C", "violated"], _report_rows(rep)),
        "violations.csv": rep.violations.to_csv(),
        "report.json": _json(info),
        "profile.csv": prof.to_csv(),
    }


def run_levy(cfg, base_dir):
    seq = _series(cfg, base_dir)
    grid = _grid(cfg, seq.domain_radius)
    kind, delta = _bound(cfg)
    if not kind.randomized:
        raise ConfigError("bound.kind", "levy experiments need a levy_* bound")
    C, burn_in = _calibration(cfg)
    trials = _int(cfg, "trials", "", 100, minimum=1)
    workers = _int(cfg, "workers", "", 1, minimum=1)
    suite = levy_trial_suite(seq, _sampler(cfg), kind, trials, grid, _seed(cfg), burn_in,
                             delta=delta, C=C, workers=workers, **_profile_opts(cfg))
    return _suite_artifacts(suite)


def _suite_artifacts(suite):
    rows = (row for t, rep in enumerate(suite.reports) for row in _report_rows(rep, t))
    try:
        summary = suite.summary()
    except DomainError as exc:
        # too few valid radii for a regression; report the rest
        measures = suite.violation_measures
        q = np.percentile(measures, [5, 25, 50, 75, 95])
        summary = {"C": suite.C, "trials": len(suite.reports), "slope": None, "stderr": None,
                   "violation_measure_quantiles": dict(zip(("q05", "q25", "q50", "q75", "q95"), q)),
                   "r0": float(np.nanmax([rep.r0 for rep in suite.reports])), "note": str(exc)}
    return {
        "trials.csv": _csv(["trial", "r", "log_M", "log_bound", "min_C", "violated"], rows),
        "summary.json": _json(summary),
        "base_profile.csv": suite.base_profile.to_csv(),
    }


def run_kahane(cfg, base_dir):
    seq = _series(cfg, base_dir)
    N = _int(cfg, "N", "", minimum=2)
    r = _float(cfg, "r", "", N / 2.0, positive=True)
    trials = _int(cfg, "trials", "", 100 * N * N, minimum=1)
    if trials < 100 * N * N:
        raise ConfigError("trials", f"need at least 100 N^2 = {100 * N * N} trials")
    batch = _int(cfg, "batch", "", 8192, minimum=1)
    res = kahane_experiment(_sampler(cfg), N, trials, r, seq, _seed(cfg), batch=batch)
    rows = zip(res.C_grid.tolist(), res.exceedance.tolist())
    return {
        "exceedance.csv": _csv(["C", "exceedance"], rows),
        "summary.json": _json({"N": N, "r": r, "trials": trials, "target": res.target,
                               "minimal_C": res.minimal_C, "order_statistic": res.order_statistic}),
    }


def run_shift(cfg, base_dir):
    w = _weights(_get(cfg, "weights", "", kind=dict), "weights.")
    N = _int(cfg, "N", "", 1000, minimum=2)
    horizon = _int(cfg, "horizon", "", 2000, minimum=100)
    verdict = dynamics.chaos_check(w, horizon)
    out = {"chaos.json": _json({"weights_id": w.name, "space": w.space,
                                "verdict": verdict.verdict, "limsup_proxy": verdict.limsup_proxy,
                                "trend_slope": verdict.trend_slope})}
    if "grid" in cfg:
        f = make_weight_series(w, N)
        prof = growth_profile(f, _grid(cfg, f.domain_radius), compute_M=False,
                              **_profile_opts(cfg))
        dev = dynamics.shift_asymptotics(w, prof)
        out["profile.csv"] = prof.to_csv()
        if dev:
            rows = zip(prof.r.tolist(), dev["mu_dev"].tolist(), dev["S_dev"].tolist())
            out["asymptotics.csv"] = _csv(["r", "mu_dev", "S_dev"], rows)
    return out


def _targets(cfg):
    specs = _get(cfg, "targets", "", kind=list)
    if not specs:
        raise ConfigError("targets", "need at least one target")
    out = []
    for i, spec in enumerate(specs):
        path = f"targets[{i}]."
        coef = _get(spec, "coefficients", path, kind=list)
        values = [complex(*c) if isinstance(c, list) else complex(c) for c in coef]
        try:
            out.append(dynamics.TargetSpec(tuple(values), _float(spec, "rho", path, positive=True),
                                           _float(spec, "eps", path), spec.get("name", str(i))))
        except DomainError as exc:
            raise ConfigError(path.rstrip("."), str(exc)) from None
    return out


def run_fhc_density(cfg, base_dir):
    w = _weights(_get(cfg, "weights", "", kind=dict), "weights.")
    s = _sampler(cfg)
    targets = _targets(cfg)
    N_max = _int(cfg, "N_max", "", minimum=1)
    margin = _int(cfg, "margin", "", 200, minimum=1)
    trials = _int(cfg, "trials", "", 1, minimum=1)
    threshold = _float(cfg, "threshold", "", 0.01)
    ladder = dynamics.density_ladder(N_max, _int(cfg, "levels", "", 3, minimum=1))
    out, reports = {}, []
    for t in range(trials):
        g = dynamics.random_fhc_function(w, s, N_max + margin, SeedSpec(_seed(cfg), t))
        rep = dynamics.hitting_density(g, w, targets, N_max, ladder)
        out[f"density_{t:04d}.csv"] = rep.to_csv()
        reports.append(json.loads(rep.to_json()))
    est = np.array([r["lower_density_estimates"] for r in reports])
    out["report.json"] = _json({
        "trials": reports,
        "threshold": threshold,
        "fraction_above_threshold": (est > threshold).mean(axis=0).tolist(),
        "targets": [t.name for t in targets],
    })
    return out


def run_fhc_growth(cfg, base_dir):
    w = _weights(_get(cfg, "weights", "", kind=dict), "weights.")
    N = _int(cfg, "N", "", 1000, minimum=2)
    f = make_weight_series(w, N)
    grid = _grid(cfg, f.domain_radius)
    C, burn_in = _calibration(cfg)
    trials = _int(cfg, "trials", "", 100, minimum=1)
    kind = BoundKind.LEVY_PLANE_S if w.space == "plane" else BoundKind.LEVY_DISK_S
    suite = levy_trial_suite(f, _sampler(cfg), kind, trials, grid, _seed(cfg), burn_in, C=C,
                             workers=_int(cfg, "workers", "", 1, minimum=1),
                             **_profile_opts(cfg))
    out = _suite_artifacts(suite)
    dev = dynamics.shift_asymptotics(w, suite.base_profile)
    if dev:
        r = suite.base_profile.r
        out["asymptotics.csv"] = _csv(["r", "mu_dev", "S_dev"],
                                      zip(r.tolist(), dev["mu_dev"].tolist(), dev["S_dev"].tolist()))
    return out


RUNNERS = {
    "growth": run_growth,
    "wv-check": run_wv_check,
    "levy": run_levy,
    "kahane": run_kahane,
    "shift": run_shift,
    "fhc-density": run_fhc_density,
    "fhc-growth": run_fhc_growth,
}


def run(cfg, base_dir=Path(".")):
    """Validate ``cfg`` and run it; returns ``{file name: text}``."""
    kind = validate(cfg)
    return RUNNERS[kind](cfg, Path(base_dir))
