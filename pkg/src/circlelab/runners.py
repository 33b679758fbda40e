"""Experiment runners: one per CLI subcommand.

Each runner takes the validated effective config, the master seed, and a
thread cap, and returns (results dict, files dict). ``files`` maps a CSV
filename to (header, row iterable). All randomness flows through the master
seed and the documented per-path derivation, so results are identical at any
thread count.
"""

from __future__ import annotations

import math

import numpy as np

from .contraction import sample_map_sequence, verify_contraction_lemma
from .hyperbolic import (
    HyperbolicParams,
    discretize_path,
    estimate_step_scale,
    leafwise_lyapunov,
    simulate_hyperbolic_ensemble,
    simulate_hyperbolic_path,
    v_final_ensemble,
    xi_stationarity_test,
)
from .lyapunov import (
    DichotomyParams,
    classify_dichotomy,
    estimate_basin_probabilities,
    estimate_lyapunov_trajectory,
    formula_quadrature_bound,
    lyapunov_from_formula,
)
from .measures import stationary_measure
from .system import system_from_config
from .trajectory import derive_seed


class NumericalFailure(RuntimeError):
    """An experiment produced values it cannot stand behind (exit code 3)."""


def _require_finite(**scalars):
    for name, val in scalars.items():
        if val is not None and not math.isfinite(val):
            raise NumericalFailure(f"non-finite result for {name!r}: {val!r}")


def run_lyapunov(cfg: dict, seed: int, threads: int = 1):
    sys = system_from_config(cfg["system"])
    est, per_path = estimate_lyapunov_trajectory(
        sys, cfg["start"], cfg["horizon"], cfg["n_paths"], seed, threads, return_per_path=True
    )
    stat, conv = stationary_measure(sys, bins=cfg["bins"])
    formula = lyapunov_from_formula(sys, stat)
    qbound = formula_quadrature_bound(sys, stat)
    _require_finite(lyapunov=est.value, formula=formula)
    diff = abs(est.value - formula)
    results = {
        "value": est.value,
        "std_error": est.std_error,
        "n_paths": est.n_paths,
        "horizon": est.horizon,
        "method": est.method,
        "formula_value": formula,
        "quadrature_bound": qbound,
        "difference": diff,
        "within_tolerance": diff <= 3.0 * (est.std_error + qbound),
        "stationary_converged": conv.converged,
    }
    files = {
        "per_path.csv": (
            ["path", "lambda_hat"],
            [(i, float(v)) for i, v in enumerate(per_path)],
        ),
        "stationary_measure.csv": (
            ["bin_center", "mass"],
            list(zip(stat.bin_centers, stat.mass)),
        ),
    }
    plot_data = {"per_path": per_path, "stationary": stat, "results": results}
    return results, files, plot_data


def run_stationary(cfg: dict, seed: int, threads: int = 1):
    sys = system_from_config(cfg["system"])
    stat, conv = stationary_measure(sys, bins=cfg["bins"], tol=cfg["tol"], max_iter=cfg["max_iter"])
    results = {
        "iterations": conv.iterations,
        "gap": conv.gap,
        "converged": conv.converged,
        "bins": cfg["bins"],
    }
    files = {
        "stationary_measure.csv": (
            ["bin_center", "mass"],
            list(zip(stat.bin_centers, stat.mass)),
        )
    }
    return results, files, {"stationary": stat}


def run_dichotomy(cfg: dict, seed: int, threads: int = 1):
    sys = system_from_config(cfg["system"])
    params = DichotomyParams(
        bins=cfg["bins"],
        stationary_tol=cfg["stationary_tol"],
        max_iter=cfg["max_iter"],
        invariance_tol=cfg["invariance_tol"],
        start=cfg["start"],
        horizon=cfg["horizon"],
        n_paths=cfg["n_paths"],
        ue_steps=cfg["ue_steps"],
        ue_starts=cfg["ue_starts"],
        ue_spread_tol=cfg["ue_spread_tol"],
        stat_emp_tol=cfg["stat_emp_tol"],
        symmetry_tol=cfg["symmetry_tol"],
        master_seed=seed,
        threads=threads,
    )
    verdict = classify_dichotomy(sys, params)
    results = verdict.to_json()
    files = {}
    measure = verdict.invariant_measure or verdict.stationary
    if measure is not None:
        files["stationary_measure.csv"] = (
            ["bin_center", "mass"],
            list(zip(measure.bin_centers, measure.mass)),
        )
    if verdict.lyapunov_per_path is not None:
        files["per_path.csv"] = (
            ["path", "lambda_hat"],
            [(i, float(v)) for i, v in enumerate(verdict.lyapunov_per_path)],
        )
    return results, files, {"verdict": verdict, "measure": measure}


def run_contract(cfg: dict, seed: int, threads: int = 1):
    sys = system_from_config(cfg["system"])
    alpha = cfg["alpha_target"]
    lyap = None
    if alpha == "half_lambda":
        lyap = estimate_lyapunov_trajectory(
            sys, cfg["x0"], cfg["lyap_horizon"], cfg["lyap_n_paths"], derive_seed(seed, 2**32), threads
        )
        if lyap.value >= 0.0:
            raise NumericalFailure(
                f"alpha_target 'half_lambda' needs a negative exponent estimate, got {lyap.value!r}"
            )
        alpha = abs(lyap.value) / 2.0

    certs = []
    for i in range(cfg["n_trajectories"]):
        maps, _ = sample_map_sequence(sys, cfg["x0"], cfg["horizon"], derive_seed(seed, i))
        certs.append(verify_contraction_lemma(maps, cfg["x0"], alpha, cfg["half_width"]))
    n_valid = sum(c.valid for c in certs)
    reasons = {}
    for c in certs:
        if not c.valid:
            reasons[c.reason] = reasons.get(c.reason, 0) + 1
    results = {
        "alpha_target": alpha,
        "lyapunov_value": None if lyap is None else lyap.value,
        "lyapunov_std_error": None if lyap is None else lyap.std_error,
        "n_trajectories": len(certs),
        "n_valid": n_valid,
        "success_rate": n_valid / len(certs),
        "failure_reasons": reasons,
        "median_C": float(np.median([c.C for c in certs if c.valid])) if n_valid else None,
    }
    files = {
        "certificates.csv": (
            ["trajectory", "valid", "C", "lambda_hat", "beta", "violation_step"],
            [
                (
                    i,
                    int(c.valid),
                    float(c.C),
                    float(c.lambda_hat),
                    float(c.beta) if math.isfinite(c.beta) else math.nan,
                    -1 if c.violation_step is None else c.violation_step,
                )
                for i, c in enumerate(certs)
            ],
        )
    }
    return results, files, {"certs": certs, "alpha": alpha, "save_traces": cfg["save_traces"]}


def run_basin(cfg: dict, seed: int, threads: int = 1):
    sys = system_from_config(cfg["system"])
    est = estimate_basin_probabilities(
        sys,
        cfg["attractors"],
        cfg["start"],
        cfg["horizon"],
        cfg["n_paths"],
        cfg["capture_radius"],
        seed,
        threads,
    )
    results = {
        "attractors": list(est.attractors),
        "probabilities": [float(p) for p in est.probabilities],
        "ci_low": [float(x) for x in est.ci_low],
        "ci_high": [float(x) for x in est.ci_high],
        "unresolved": est.unresolved,
        "n_paths": est.n_paths,
        "total": float(est.probabilities.sum() + est.unresolved),
    }
    files = {
        "basin.csv": (
            ["attractor", "probability", "ci_low", "ci_high"],
            list(zip(est.attractors, est.probabilities, est.ci_low, est.ci_high)),
        )
    }
    return results, files, {"estimate": est}


def run_hyperbolic(cfg: dict, seed: int, threads: int = 1):
    rows = []
    sample = None
    for j, kappa in enumerate(cfg["kappas"]):
        params = HyperbolicParams(
            kappa=kappa, dt=cfg["dt"], T=cfg["T"], delta=cfg["delta"], A=cfg["A"]
        )
        stride = params.n_steps  # endpoints carry the exponent
        paths = simulate_hyperbolic_ensemble(
            params,
            tuple(cfg["start"]),
            cfg["n_paths"],
            derive_seed(seed, j * 10**9),
            record_stride=stride,
            threads=threads,
        )
        est = leafwise_lyapunov(paths)
        _require_finite(lyapunov=est.value)
        rows.append(
            {
                "kappa": kappa,
                "value": est.value,
                "std_error": est.std_error,
                "target": kappa - 1.0,
                "abs_error": abs(est.value - (kappa - 1.0)),
                "within_3se": abs(est.value - (kappa - 1.0)) <= 3.0 * est.std_error,
            }
        )
        if sample is None:
            n = params.n_steps
            stride_rec = max(1, n // cfg["sample_path_points"])
            while n % stride_rec:
                stride_rec -= 1
            sample = simulate_hyperbolic_path(
                params, tuple(cfg["start"]), derive_seed(seed, 1), record_stride=stride_rec
            )
    results = {"estimates": rows}
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        y = sample.y
        v = sample.v
        xi = sample.xi
    files = {
        "lyapunov_vs_kappa.csv": (
            ["kappa", "value", "std_error", "target"],
            [(r["kappa"], r["value"], r["std_error"], r["target"]) for r in rows],
        ),
        "sample_path.csv": (
            ["t", "x", "y", "u", "v", "xi"],
            list(zip(sample.t, sample.x, y, sample.u, v, xi)),
        ),
    }
    return results, files, {"rows": rows, "sample": sample}


def run_xi(cfg: dict, seed: int, threads: int = 1):
    params = HyperbolicParams(
        kappa=cfg["kappa"], dt=cfg["dt"], T=cfg["T"], delta=cfg["delta"], A=cfg["A"]
    )
    report = xi_stationarity_test(
        params,
        seed=seed,
        xi0=cfg["xi0"],
        bins=cfg["bins"],
        window=tuple(cfg["window"]),
        escape_threshold=cfg["escape_threshold"],
        escape_runs=cfg["escape_runs"],
        escape_horizon=cfg["escape_horizon"],
        escape_dt=cfg["escape_dt"],
        threads=threads,
    )
    if report.mode == "stationary":
        _require_finite(w1_to_density=report.w1_to_density)
        results = {
            "mode": "stationary",
            "w1_to_density": report.w1_to_density,
            "w1_halves": report.w1_halves,
            "out_of_window": report.out_of_window,
        }
        files = {
            "xi_histogram.csv": (
                ["bin_center", "empirical", "density"],
                list(zip(report.bin_centers, report.histogram, report.density)),
            )
        }
    else:
        finite = report.exit_times[np.isfinite(report.exit_times)]
        results = {
            "mode": "escape",
            "escape_fraction": report.escape_fraction,
            "escape_threshold": report.escape_threshold,
            "median_exit_time": float(np.median(finite)) if finite.size else None,
        }
        files = {
            "exit_times.csv": (
                ["run", "exit_time"],
                [(i, float(t)) for i, t in enumerate(report.exit_times)],
            )
        }
    return results, files, {"report": report}


def run_lln(cfg: dict, seed: int, threads: int = 1):
    params = HyperbolicParams(
        kappa=cfg["kappa"], dt=cfg["dt"], T=cfg["T"], delta=cfg["delta"], A=cfg["A"]
    )
    stride = round(cfg["delta"] / cfg["dt"])
    path = simulate_hyperbolic_path(params, tuple(cfg["start"]), seed, record_stride=stride)
    rec = discretize_path(path, cfg["delta"])
    ratios = rec.ratios
    final = float(ratios[-1])
    tail = ratios[rec.n // 2 :]
    band_dev = float(np.max(np.abs(tail - final)))
    c, mean_k1 = estimate_step_scale(params, cfg["oracle_samples"], derive_seed(seed, 7))
    _require_finite(final_ratio=final, c=c)
    results = {
        "n_samples": rec.n,
        "final_ratio": final,
        "band_max_dev": band_dev,
        "band_halfwidth": cfg["band_halfwidth"],
        "within_band": band_dev <= cfg["band_halfwidth"],
        "c_oracle": c,
        "mean_k1": mean_k1,
        "below_c": final < c,
    }
    files = {
        "lln_ratios.csv": (
            ["n", "K_n", "ratio"],
            [(i + 1, int(rec.K[i]), float(ratios[i])) for i in range(rec.n)],
        )
    }
    return results, files, {"record": rec, "c": c, "results": results}


RUNNERS = {
    "lyapunov": run_lyapunov,
    "stationary": run_stationary,
    "dichotomy": run_dichotomy,
    "contract": run_contract,
    "basin": run_basin,
    "hyperbolic": run_hyperbolic,
    "xi": run_xi,
    "lln": run_lln,
}
