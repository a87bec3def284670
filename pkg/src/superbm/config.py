"""Experiment configuration: a flat JSON document with strict validation.

Unknown keys are rejected so typos cannot silently fall back to defaults, and
every physical quantity is range-checked.  ``load_config`` returns the parsed
settings; ``build_plan`` turns them into a simulation config and check plan.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, fields

from .errors import ConfigError
from .harness import FULL_SPACE_CHECKS, ORTHANT_CHECKS, ExperimentPlan
from .params import ModelParams
from .particles import SimConfig
from .testfunctions import GaussianBump, IndicatorBox


@dataclass
class ExperimentSettings:
    dimension: int = 1
    beta: float = 1.0
    alpha: float = 0.5
    domain: str = "full"
    absorbed_coordinates: int = 1
    scaling: int = 2000
    replicates: int = 200
    t_max: float = 6.0
    dt: float = 1e-3
    seed: int = 1
    snapshot_times: tuple = (0.5, 1.0, 2.0, 4.0, 6.0)
    checks: tuple = None
    start: tuple = None
    particle_cap: int = 5_000_000
    threads: int = 1
    out_dir: str = "results"
    band_eps: float = None
    band_delta: float = None
    grid_nodes: int = 9
    scaling_box: tuple = None
    occupation_box: tuple = None
    orthant_box: tuple = None
    bump_center: tuple = None
    bump_width: float = 1.0
    moment_times: tuple = None
    variance_times: tuple = None
    drift_pairs: tuple = None
    recon_times: tuple = None


_FIELD_NAMES = {f.name for f in fields(ExperimentSettings)}

_POSITIVE = ("beta", "alpha", "t_max", "dt", "bump_width")
_POSITIVE_INT = ("dimension", "scaling", "replicates", "particle_cap", "threads")


def _fail(key, message):
    raise ConfigError(f"config key {key!r}: {message}", key=key)


def _as_number(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(key, f"expected a number, got {value!r}")
    return float(value)


def _as_int(key, value):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(key, f"expected an integer, got {value!r}")
    return int(value)


def _as_number_list(key, value, length=None):
    if not isinstance(value, (list, tuple)):
        _fail(key, f"expected a list of numbers, got {value!r}")
    out = tuple(_as_number(key, v) for v in value)
    if length is not None and len(out) != length:
        _fail(key, f"expected {length} entries, got {len(out)}")
    return out


def _as_box(key, value, d):
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
    ):
        _fail(key, "expected [low_corner, high_corner]")
    lo = _as_number_list(key, value[0], d)
    hi = _as_number_list(key, value[1], d)
    if any(h <= l for l, h in zip(lo, hi)):
        _fail(key, "box must have positive volume in every coordinate")
    return lo, hi


def parse_settings(raw: dict) -> ExperimentSettings:
    """Validate a parsed JSON object and fill in dependent defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = sorted(set(raw) - _FIELD_NAMES)
    if unknown:
        raise ConfigError(
            f"unknown config key {unknown[0]!r} (no silent typos; "
            f"known keys: {sorted(_FIELD_NAMES)})",
            key=unknown[0],
        )
    s = ExperimentSettings()
    for key, value in raw.items():
        setattr(s, key, value)

    for key in _POSITIVE_INT:
        setattr(s, key, _as_int(key, getattr(s, key)))
        if getattr(s, key) < 1:
            _fail(key, f"must be >= 1, got {getattr(s, key)}")
    for key in _POSITIVE:
        setattr(s, key, _as_number(key, getattr(s, key)))
        if not (getattr(s, key) > 0):
            _fail(key, f"must be > 0, got {getattr(s, key)}")
    s.seed = _as_int("seed", s.seed)
    if s.domain not in ("full", "orthant"):
        _fail("domain", f"must be 'full' or 'orthant', got {s.domain!r}")
    if s.domain == "orthant":
        s.absorbed_coordinates = _as_int(
            "absorbed_coordinates", s.absorbed_coordinates
        )
        if not (1 <= s.absorbed_coordinates <= s.dimension):
            _fail(
                "absorbed_coordinates",
                f"must lie in [1, dimension={s.dimension}]",
            )
    if s.replicates < 30:
        _fail("replicates", "need at least 30 replicates for statistical gates")
    if s.beta > 2.0 * s.alpha * s.scaling:
        _fail(
            "scaling",
            "need beta <= 2*alpha*scaling so the offspring probability is <= 1",
        )

    s.snapshot_times = _as_number_list("snapshot_times", s.snapshot_times)
    if any(b <= a for a, b in zip(s.snapshot_times, s.snapshot_times[1:])):
        _fail("snapshot_times", "must be strictly increasing")
    if s.snapshot_times[0] <= 0 or s.snapshot_times[-1] > s.t_max:
        _fail("snapshot_times", "must lie in (0, t_max]")

    d = s.dimension
    is_orthant = s.domain == "orthant"
    if s.checks is None:
        if is_orthant:
            s.checks = ORTHANT_CHECKS
        else:
            s.checks = ("moments", "martingale", "variance", "scaling", "occupation")
    else:
        if not isinstance(s.checks, (list, tuple)) or not all(
            isinstance(c, str) for c in s.checks
        ):
            _fail("checks", "expected a list of check names")
        known = set(FULL_SPACE_CHECKS) | set(ORTHANT_CHECKS)
        for c in s.checks:
            if c not in known:
                _fail("checks", f"unknown check {c!r} (known: {sorted(known)})")
        s.checks = tuple(s.checks)

    if s.start is None:
        start = [0.0] * d
        if is_orthant:
            for j in range(d - s.absorbed_coordinates, d):
                start[j] = 1.0
        s.start = tuple(start)
    else:
        s.start = _as_number_list("start", s.start, d)

    if s.band_eps is None:
        s.band_eps = s.beta / 4.0
    else:
        s.band_eps = _as_number("band_eps", s.band_eps)
    if not (0.0 < s.band_eps < s.beta):
        _fail("band_eps", f"must lie in (0, beta={s.beta})")
    if s.band_delta is None:
        s.band_delta = s.beta / 16.0
    else:
        s.band_delta = _as_number("band_delta", s.band_delta)
    if not (0.0 < s.band_delta < s.beta):
        _fail("band_delta", f"must lie in (0, beta={s.beta})")
    s.grid_nodes = _as_int("grid_nodes", s.grid_nodes)
    if s.grid_nodes < 3 or s.grid_nodes % 2 == 0:
        _fail("grid_nodes", "must be an odd integer >= 3")

    s.scaling_box = _as_box(
        "scaling_box", s.scaling_box or [[0.0] * d, [1.0] * d], d
    )
    s.occupation_box = _as_box(
        "occupation_box", s.occupation_box or [[0.0] * d, [1.0] * d], d
    )
    s.orthant_box = _as_box(
        "orthant_box", s.orthant_box or [[1.0] * d, [2.0] * d], d
    )
    s.bump_center = _as_number_list(
        "bump_center", s.bump_center if s.bump_center is not None else [0.0] * d, d
    )
    snaps_list = list(s.snapshot_times)
    spread = sorted(
        {snaps_list[0], snaps_list[len(snaps_list) // 2], snaps_list[-1]}
    )
    preferred = tuple(t for t in (1.0, 2.0, 4.0) if t in s.snapshot_times)
    if s.moment_times is None:
        s.moment_times = preferred or tuple(spread)
    else:
        s.moment_times = _as_number_list("moment_times", s.moment_times)
    if s.variance_times is None:
        s.variance_times = preferred or tuple(spread)
    else:
        s.variance_times = _as_number_list("variance_times", s.variance_times)
    if s.recon_times is None:
        s.recon_times = tuple(snaps_list[-3:])
    else:
        s.recon_times = _as_number_list("recon_times", s.recon_times)
    if s.drift_pairs is None:
        mid = snaps_list[len(snaps_list) // 2]
        if snaps_list[0] < mid < snaps_list[-1]:
            s.drift_pairs = (
                (snaps_list[0], mid),
                (mid, snaps_list[-1]),
            )
        else:
            s.drift_pairs = ((snaps_list[0], snaps_list[-1]),)
    if not isinstance(s.drift_pairs, (list, tuple)):
        _fail("drift_pairs", "expected a list of [s, t] pairs")
    s.drift_pairs = tuple(
        tuple(_as_number_list("drift_pairs", p, 2)) for p in s.drift_pairs
    )
    snaps = set(s.snapshot_times)
    for key in ("moment_times", "variance_times", "recon_times"):
        if not set(getattr(s, key)) <= snaps:
            _fail(key, "must be a subset of snapshot_times")
    for a, b in s.drift_pairs:
        if a not in snaps or b not in snaps or not a < b:
            _fail("drift_pairs", "pairs must be increasing snapshot times")
    return s


def load_config(path) -> ExperimentSettings:
    """Read and validate a JSON config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path} is not valid JSON: {exc.msg} at line {exc.lineno}"
        )
    return parse_settings(raw)


def build_plan(s: ExperimentSettings) -> ExperimentPlan:
    """Construct the simulation config and the check plan from settings."""
    params = ModelParams(
        d=s.dimension,
        beta=s.beta,
        alpha=s.alpha,
        absorbed=s.absorbed_coordinates if s.domain == "orthant" else 0,
    )
    config = SimConfig(
        params=params,
        n_per_mass=s.scaling,
        dt=s.dt,
        seed=s.seed,
        t_max=s.t_max,
        snapshot_times=s.snapshot_times,
        particle_cap=s.particle_cap,
    )
    return ExperimentPlan(
        config=config,
        replicates=s.replicates,
        checks=tuple(s.checks),
        start=s.start,
        scaling_box=IndicatorBox(*s.scaling_box),
        occupation_box=IndicatorBox(*s.occupation_box),
        orthant_box=IndicatorBox(*s.orthant_box),
        bump=GaussianBump(s.bump_center, s.bump_width),
        band_eps=s.band_eps,
        band_delta=s.band_delta,
        grid_nodes=s.grid_nodes,
        drift_pairs=s.drift_pairs,
        moment_times=s.moment_times,
        variance_times=s.variance_times,
        recon_times=s.recon_times,
    )
