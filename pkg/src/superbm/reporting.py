"""Deterministic result serialization: results.csv, summary.json, plot data.

results.csv is long format with fixed column order (check, replicate, time,
statistic, value); floats carry 17 significant digits so a reload is
bit-faithful.  The row count is computed up front from the plan and asserted
after writing.  summary.json holds targets, z-scores, slopes and verdicts;
plotdata/*.csv hold the time series behind each figure-like diagnostic.
"""
from __future__ import annotations

import json
import math
import os

import numpy as np

from . import analytic
from .harness import CHECK_STATISTICS, ExperimentPlan

_ARRAY_KEYS = ("band", "residual", "pairs_w0", "pairs_stat")


def fmt(value: float) -> str:
    return f"{value:.17g}"


def expected_row_count(plan: ExperimentPlan) -> int:
    T = len(plan.config.snapshot_times)
    R = plan.replicates
    return sum(R * T * len(CHECK_STATISTICS[c]) for c in plan.checks)


def _statistic_series(plan: ExperimentPlan, check: str, result: dict) -> dict:
    """Map statistic name -> (R, T) float array for one check."""
    data = result["data"]
    params = plan.config.params
    times = np.asarray(plan.config.snapshot_times)
    decay = np.exp(-params.beta * times)[None, :]
    norm_mass = data["mass"] * decay
    if check == "moments":
        return {"mass": data["mass"], "normalized_mass": norm_mass}
    if check == "martingale":
        return {
            "w_re_lam0": norm_mass,
            "w_im_lam0": np.zeros_like(norm_mass),
            "w_re_mid": data["w_mid"].real,
            "w_im_mid": data["w_mid"].imag,
            "w_re_shell": data["w_shell"].real,
            "w_im_shell": data["w_shell"].imag,
        }
    if check == "variance":
        return {
            "w_abs2_lam0": norm_mass**2,
            "w_abs2_mid": np.abs(data["w_mid"]) ** 2,
            "w_abs2_shell": np.abs(data["w_shell"]) ** 2,
        }
    if check == "uniform":
        gaps = np.abs(data["lattice"] - data["lattice"][:, -1:, :])
        return {"grid_sup_gap": gaps.max(axis=2)}
    if check == "reconstruction":
        report = result["checks"]["reconstruction"]
        return {
            "bump_mass": data["bump_mass"],
            "band_integral_re": report["band"].real,
            "band_integral_im": report["band"].imag,
            "residual_ratio": report["residual"],
        }
    if check == "scaling":
        scaled = data["box_scaling"] * decay * times[None, :] ** (0.5 * params.d)
        return {"scaled_box_mass": scaled, "normalized_mass": norm_mass}
    if check == "occupation":
        denom = np.asarray(
            [
                analytic.first_moment(
                    plan.occupation_box, t, list(plan.start), params
                )
                for t in times
            ]
        )
        return {
            "occupation_ratio": data["box_occupation"] / denom[None, :],
            "normalized_mass": norm_mass,
        }
    if check == "orthant":
        power = 0.5 * params.d + params.absorbed
        scaled = data["box_orthant"] * decay * times[None, :] ** power
        return {
            "scaled_box_mass": scaled,
            "moment_mode_normalized": data["moment_mode"],
            "normalized_mass": norm_mass,
        }
    raise KeyError(check)


def iter_result_rows(plan: ExperimentPlan, result: dict):
    """Yield (check, replicate, time, statistic, value) in deterministic order."""
    times = plan.config.snapshot_times
    for check in plan.checks:
        series = _statistic_series(plan, check, result)
        names = CHECK_STATISTICS[check]
        for r in range(plan.replicates):
            for j, t in enumerate(times):
                for name in names:
                    yield check, r, t, name, float(series[name][r, j])


def write_results_csv(path, plan: ExperimentPlan, result: dict) -> int:
    expected = expected_row_count(plan)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("check,replicate,time,statistic,value\n")
        for check, r, t, name, value in iter_result_rows(plan, result):
            fh.write(f"{check},{r},{fmt(t)},{name},{fmt(value)}\n")
            count += 1
    if count != expected:
        raise AssertionError(
            f"results.csv row count {count} != expected {expected}"
        )
    return count


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items() if k not in _ARRAY_KEYS}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_json_safe(v) for v in obj.tolist()]
    return obj


def write_summary(path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_json_safe(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_plotdata(out_dir, plan: ExperimentPlan, result: dict):
    """Per-diagnostic time series and pairing scatters for plotting."""
    pd_dir = os.path.join(out_dir, "plotdata")
    os.makedirs(pd_dir, exist_ok=True)
    data = result["data"]
    checks = result["checks"]
    times = np.asarray(plan.config.snapshot_times)
    params = plan.config.params
    decay = np.exp(-params.beta * times)[None, :]
    norm_mass = data["mass"] * decay

    def _write(name, header, rows):
        with open(os.path.join(pd_dir, name), "w", encoding="utf-8") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(fmt(v) for v in row) + "\n")

    _write(
        "normalized_mass.csv",
        "time,mean,se",
        (
            (t, norm_mass[:, j].mean(), norm_mass[:, j].std(ddof=1) / math.sqrt(plan.replicates))
            for j, t in enumerate(times)
        ),
    )
    if "variance" in checks:
        rows = []
        for row in checks["variance"]["rows"]:
            rows.append(
                (row["lam"][0], row["t"], row["empirical"], row["oracle"], row["se"], row["bias_allowance"])
            )
        _write("variance_modes.csv", "lam0,time,empirical,oracle,se,allowance", rows)
    if "uniform" in checks:
        rep = checks["uniform"]
        _write(
            "uniform_sup_gap.csv",
            "time,mean_sup",
            zip(rep["times"], rep["mean_sup"]),
        )
    if "reconstruction" in checks:
        rep = checks["reconstruction"]
        res = rep["residual"]
        _write(
            "reconstruction_residual.csv",
            "time,mean_residual,p10,p90",
            (
                (
                    t,
                    res[:, j].mean(),
                    np.quantile(res[:, j], 0.1),
                    np.quantile(res[:, j], 0.9),
                )
                for j, t in enumerate(times)
            ),
        )
    for name in ("scaling", "occupation", "orthant"):
        if name in checks and "pairs_w0" in checks[name]:
            rep = checks[name]
            _write(
                f"{name}_pairs.csv",
                "replicate,w0,statistic",
                (
                    (r, rep["pairs_w0"][r], rep["pairs_stat"][r])
                    for r in range(plan.replicates)
                ),
            )
    if "orthant" in checks:
        rep = checks["orthant"]
        _write(
            "orthant_expectation.csv",
            "time,mean,se,kernel_prediction",
            (
                (row["t"], row["mean"], row["se"], row["kernel_prediction"])
                for row in rep["expectation_rows"]
            ),
        )
    if "scaling" in checks:
        rep = checks["scaling"]
        _write(
            "scaling_expectation.csv",
            "time,mean,se,limit",
            (
                (row["t"], row["mean"], row["se"], row["limit"])
                for row in rep["expectation_rows"]
            ),
        )


def _headline(check: str, rep: dict) -> list:
    """(statistic, value, target, deviation) rows for the report table."""
    if check == "moments":
        return [
            (
                f"{r['statistic']}@t={r['t']:g}",
                r["value"],
                r["target"],
                r["value"] - r["target"],
                r["pass"],
            )
            for r in rep["rows"]
        ]
    if check == "martingale":
        return [
            (
                f"drift[{r['mode']}] {r['t_from']:g}->{r['t_to']:g}",
                r["abs_mean"],
                0.0,
                r["z"],
                r["pass"],
            )
            for r in rep["rows"]
        ]
    if check == "variance":
        return [
            (
                f"|W|^2[{r['mode']}]@t={r['t']:g}",
                r["empirical"],
                r["oracle"],
                r["empirical"] - r["oracle"],
                r["pass"],
            )
            for r in rep["rows"]
        ]
    if check == "uniform":
        return [
            (
                "sup-gap decay slope",
                rep["slope"],
                rep["bound"],
                rep["slope"] - rep["bound"],
                rep["verdict"],
            )
        ]
    if check == "reconstruction":
        return [
            (
                "fraction residual decreasing",
                rep["fraction_decreasing"],
                rep["threshold"],
                rep["fraction_decreasing"] - rep["threshold"],
                rep["verdict"],
            )
        ]
    if check in ("scaling", "occupation"):
        return [
            (
                "pairing slope",
                rep["slope"],
                rep["target"],
                rep["slope"] - rep["target"],
                rep["verdict"],
            )
        ]
    if check == "orthant":
        rows = [
            (
                "moment-mode drift |mean|",
                max(r["abs_mean"] for r in rep["drift_rows"]),
                0.0,
                max(r["z"] for r in rep["drift_rows"]),
                rep["drift_verdict"],
            ),
            (
                "pairing slope (tabulated target)",
                rep["slope"],
                rep["target"],
                rep["slope"] - rep["target"],
                abs(rep["slope"] - rep["target"]) <= rep["slope_rtol"] * rep["target"],
            ),
            (
                "pairing slope vs kernel finite-t",
                rep["slope"],
                rep["kernel_predicted_slope"],
                rep["slope"] - rep["kernel_predicted_slope"],
                None,
            ),
        ]
        return rows
    return []


def render_report(summary: dict) -> str:
    """Human-readable verdict table for one summary document."""
    lines = []
    header = f"{'check':<15} {'statistic':<38} {'value':>12} {'target':>12} {'dev':>10} verdict"
    lines.append(header)
    lines.append("-" * len(header))
    checks = summary.get("checks", {})
    for check in checks:
        rep = checks[check]
        for stat, value, target, dev, ok in _headline(check, rep):
            verdict = "" if ok is None else ("PASS" if ok else "FAIL")
            lines.append(
                f"{check:<15} {stat:<38} {value:>12.6g} {target:>12.6g} {dev:>10.3g} {verdict}"
            )
        lines.append(
            f"{check:<15} {'=> check verdict':<38} {'':>12} {'':>12} {'':>10} "
            + ("PASS" if rep.get("verdict") else "FAIL")
        )
    return "\n".join(lines)
