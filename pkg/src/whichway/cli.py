"""Batch front-end: config-driven optimization, verification, sweeps, dilation.

Configs are JSON objects (documented in docs/config.md); reports are JSON on
stdout or --out, sweeps are CSV with a header row and 12-significant-digit
numbers. Exit codes: 0 success, 1 a verification-style check failed, 2 the
config could not be parsed into valid domain objects.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from .criteria import CRITERION_KINDS, Criterion, average_information, \
    bayes_rms_identity_check
from .dilation import neumark_dilate, verify_dilation
from .interference import closed_form_visibility, complementarity_check
from .measurement import Measurement, posteriors, random_rank_one
from .optimize import SearchConfig, closed_form, distinguishability, \
    equivalent_measurements, optimize_povm, optimize_pvm
from .quantum import DetectorEnsemble, ensemble_from_bloch, symmetric_pair, \
    trine_ensemble
from .reduction import pair_information, reduce_to_pvm

__all__ = ["ConfigError", "cmd_dilate", "cmd_optimize", "cmd_sweep", "cmd_verify",
           "load_config", "main"]

VERIFY_CHECKS = ("complementarity_sweep", "g_concavity", "reduction_monotonicity",
                 "dilation", "bayes_rms_identity")


class ConfigError(ValueError):
    """Raised for any config problem; the message names the offending field."""


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            config = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"config file {path!r}: {exc.strerror or exc}.") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r}: line {exc.lineno} column "
                          f"{exc.colno}: {exc.msg}.") from exc
    if not isinstance(config, dict):
        raise ConfigError("config root must be an object.")
    return config


def _build_ensemble(config: dict) -> DetectorEnsemble:
    section = config.get("ensemble")
    if not isinstance(section, dict):
        raise ConfigError("ensemble: section is required and must be an object.")
    populations = config.get("populations")
    try:
        if "preset" in section:
            preset = section["preset"]
            if preset == "symmetric_pair":
                if "theta" not in section:
                    raise ConfigError("ensemble.theta: required for preset "
                                      "symmetric_pair.")
                return symmetric_pair(float(section["theta"]), populations)
            if preset == "trine":
                if populations is None:
                    return trine_ensemble()
                return ensemble_from_bloch(trine_ensemble().bloch_vectors(),
                                           populations)
            raise ConfigError(f"ensemble.preset: unknown preset {preset!r} "
                              "(expected symmetric_pair or trine).")
        if "bloch" in section:
            return ensemble_from_bloch(section["bloch"], populations)
        if "states" in section:
            rows = section["states"]
            states = np.array([[complex(re, im) for re, im in row] for row in rows])
            return DetectorEnsemble(states=states, populations=populations)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError("ensemble: provide preset, bloch, or states.")


def _build_criterion(config: dict) -> Criterion:
    kind = config.get("criterion", "shannon")
    base = config.get("log_base", math.e)
    try:
        return Criterion(kind=kind, log_base=float(base))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _build_search(config: dict, seed_override: int | None) -> SearchConfig:
    section = config.get("search", {})
    if not isinstance(section, dict):
        raise ConfigError("search: must be an object.")
    known = {"n_min", "n_max", "restarts", "grid_resolution", "tolerance", "seed"}
    for key in section:
        if key not in known:
            raise ConfigError(f"search.{key}: unknown key.")
    kwargs = {
        "n_range": (int(section.get("n_min", 2)), int(section.get("n_max", 4))),
        "restarts": int(section.get("restarts", 32)),
        "grid_resolution": int(section.get("grid_resolution", 64)),
        "tolerance": float(section.get("tolerance", 1e-8)),
        "seed": int(section.get("seed", 0)),
    }
    if seed_override is not None:
        kwargs["seed"] = int(seed_override)
    try:
        return SearchConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"search: {exc}") from exc


def _complex_to_json(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def _matrix_to_json(matrix: np.ndarray) -> list:
    return [[_complex_to_json(entry) for entry in row] for row in np.asarray(matrix)]


def matrix_from_json(payload) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in payload])


def _measurement_to_json(measurement: Measurement) -> dict:
    document = {"matrices": [_matrix_to_json(m) for m in measurement.matrices]}
    if measurement.rank_one is not None:
        document["elements"] = [
            {"weight": float(el.weight), "direction": [float(c) for c in el.direction]}
            for el in measurement.rank_one
        ]
    return document


def cmd_optimize(config: dict, seed_override: int | None) -> tuple[dict, int]:
    ensemble = _build_ensemble(config)
    criterion = _build_criterion(config)
    search = _build_search(config, seed_override)
    mode = config.get("mode", "povm")
    if mode not in ("povm", "pvm"):
        raise ConfigError(f"mode: expected povm or pvm, got {mode!r}.")
    started = time.perf_counter()
    if mode == "pvm":
        result = optimize_pvm(ensemble, criterion, search)
    else:
        result = optimize_povm(ensemble, criterion, search)
    elapsed = time.perf_counter() - started
    report = {
        "command": "optimize",
        "mode": mode,
        "criterion": criterion.kind,
        "log_base": criterion.log_base,
        "n_beams": ensemble.n_beams,
        "seed": search.seed,
        "elapsed_seconds": elapsed,
        "n_outcomes": result.best.n_outcomes,
        "average_information": result.score.average,
        "is_pvm": bool(result.is_pvm),
        "best": _measurement_to_json(result.best),
        "search_trace": [[label, value] for label, value in result.trace],
    }
    if criterion.kind == "bayes":
        report["distinguishability"] = result.distinguishability
    return report, 0


def _check_complementarity_sweep(config: dict, search: SearchConfig) -> dict:
    thetas = np.linspace(0.0, math.pi / 2.0, int(config.get("points", 33)))
    rows = []
    worst = 0.0
    for theta in thetas:
        report = complementarity_check(symmetric_pair(float(theta)), search)
        rows.append({"theta": float(theta),
                     "visibility": report.visibility,
                     "distinguishability": report.distinguishability,
                     "defect_from_unity": report.defect_from_unity})
        worst = max(worst, report.defect_from_unity,
                    abs(report.distinguishability - math.sin(theta)),
                    abs(report.visibility - math.cos(theta)))
    return {"passed": bool(worst < 1e-6), "max_defect": worst, "rows": rows}


def _check_g_concavity(config: dict) -> dict:
    grid = np.linspace(-1.0, 1.0, int(config.get("points", 1000)))
    worst = -math.inf
    for theta in np.linspace(0.0, math.pi / 2.0, 8):
        values = np.array([pair_information(z, float(theta)) for z in grid])
        second = values[2:] - 2.0 * values[1:-1] + values[:-2]
        worst = max(worst, float(second.max()))
    return {"passed": bool(worst <= 1e-9), "max_second_difference": worst}


def _check_reduction_monotonicity(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    worst = math.inf
    terminal_ok = True
    target = closed_form("symmetric_pvm")
    for _ in range(10):
        theta = float(rng.uniform(0.05, math.pi / 2.0 - 0.05))
        trace = reduce_to_pvm(random_rank_one(rng, rng.integers(3, 7)), theta)
        values = trace.values
        if len(values) > 1:
            worst = min(worst, float(np.min(np.diff(values))))
        terminal_ok = terminal_ok and equivalent_measurements(trace.terminal, target,
                                                              atol=1e-6)
    return {"passed": bool(worst >= -1e-10 and terminal_ok),
            "min_information_increment": worst,
            "terminal_is_projective": terminal_ok}


def _check_dilation(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        measurement = random_rank_one(rng, rng.integers(2, 7))
        bloch = rng.normal(size=(int(rng.integers(2, 5)), 3))
        bloch /= np.linalg.norm(bloch, axis=1, keepdims=True)
        weights = rng.random(len(bloch)) + 0.1
        ensemble = ensemble_from_bloch(bloch, weights / weights.sum())
        worst = max(worst, verify_dilation(neumark_dilate(measurement),
                                           measurement, ensemble))
    return {"passed": bool(worst < 1e-10), "max_statistics_defect": worst}


def _check_bayes_rms_identity(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        bloch = rng.normal(size=(2, 3))
        bloch /= np.linalg.norm(bloch, axis=1, keepdims=True)
        zeta = float(rng.uniform(0.05, 0.95))
        ensemble = ensemble_from_bloch(bloch, [zeta, 1.0 - zeta])
        table = posteriors(ensemble, random_rank_one(rng, rng.integers(2, 7)))
        worst = max(worst, bayes_rms_identity_check(table))
    return {"passed": bool(worst < 1e-12), "max_identity_defect": worst}


def cmd_verify(config: dict, seed_override: int | None) -> tuple[dict, int]:
    search = _build_search(config, seed_override)
    requested = config.get("checks", list(VERIFY_CHECKS))
    if isinstance(requested, str):
        requested = [requested]
    for name in requested:
        if name not in VERIFY_CHECKS:
            raise ConfigError(f"checks: unknown check {name!r} "
                              f"(expected one of {', '.join(VERIFY_CHECKS)}).")
    results = {}
    for name in requested:
        if name == "complementarity_sweep":
            results[name] = _check_complementarity_sweep(config, search)
        elif name == "g_concavity":
            results[name] = _check_g_concavity(config)
        elif name == "reduction_monotonicity":
            results[name] = _check_reduction_monotonicity(search.seed)
        elif name == "dilation":
            results[name] = _check_dilation(search.seed)
        else:
            results[name] = _check_bayes_rms_identity(search.seed)
    passed = all(entry["passed"] for entry in results.values())
    report = {"command": "verify", "seed": search.seed, "checks": results,
              "passed": passed}
    return report, 0 if passed else 1


def _sweep_point(task: dict) -> dict:
    """One sweep row; module-level so a process pool can import it."""
    if task.get("bloch") is not None:
        ensemble = ensemble_from_bloch(task["bloch"], task["populations"])
    else:
        ensemble = symmetric_pair(task["theta"], task["populations"])
    criterion = Criterion(kind=task["criterion"], log_base=task["log_base"])
    search = SearchConfig(**task["search"])
    pvm_value = optimize_pvm(ensemble, criterion, search).score.average
    povm_value = optimize_povm(ensemble, criterion, search).score.average
    row = {"pvm_information": pvm_value, "povm_information": povm_value,
           "gap": povm_value - pvm_value}
    if ensemble.n_beams == 2:
        row["distinguishability"] = distinguishability(ensemble, search)
        row["visibility"] = closed_form_visibility(ensemble)
    else:
        row["distinguishability"] = math.nan
        row["visibility"] = math.nan
    return row


def _run_pool(tasks: list[dict], workers: int) -> list[dict]:
    if workers <= 1 or len(tasks) <= 1:
        return [_sweep_point(task) for task in tasks]
    try:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_point, tasks))
    except (OSError, RuntimeError):  # restricted environments: fall back to serial
        return [_sweep_point(task) for task in tasks]


def cmd_sweep(config: dict, seed_override: int | None) -> tuple[str, int]:
    section = config.get("sweep")
    if not isinstance(section, dict):
        raise ConfigError("sweep: section is required and must be an object.")
    parameter = section.get("parameter")
    if parameter not in ("theta", "population", "criterion"):
        raise ConfigError(f"sweep.parameter: expected theta, population, or "
                          f"criterion, got {parameter!r}.")
    criterion = _build_criterion(config)
    search = _build_search(config, seed_override)
    search_payload = {"n_range": search.n_range, "restarts": search.restarts,
                      "grid_resolution": search.grid_resolution,
                      "tolerance": search.tolerance, "seed": search.seed}
    base = {"criterion": criterion.kind, "log_base": criterion.log_base,
            "search": search_payload, "bloch": None, "populations": None,
            "theta": None}
    tasks, labels = [], []
    if parameter == "theta":
        points = int(section.get("points", 33))
        start = float(section.get("start", 0.0))
        stop = float(section.get("stop", math.pi / 2.0))
        populations = config.get("populations")
        for theta in np.linspace(start, stop, points):
            task = dict(base)
            task["theta"] = float(theta)
            task["populations"] = populations
            tasks.append(task)
            labels.append(f"{theta:.11e}")
    elif parameter == "population":
        points = int(section.get("points", 21))
        start = float(section.get("start", 0.05))
        stop = float(section.get("stop", 0.95))
        ensemble = _build_ensemble(config)
        if ensemble.n_beams != 2:
            raise ConfigError("sweep.parameter: population sweeps need a two-beam "
                              "ensemble.")
        bloch = [[float(c) for c in row] for row in ensemble.bloch_vectors()]
        for zeta in np.linspace(start, stop, points):
            if not 0.0 < zeta < 1.0:
                raise ConfigError(f"sweep.start/stop: population {zeta!r} outside "
                                  "(0, 1).")
            task = dict(base)
            task["bloch"] = bloch
            task["populations"] = [float(zeta), float(1.0 - zeta)]
            tasks.append(task)
            labels.append(f"{zeta:.11e}")
    else:
        ensemble = _build_ensemble(config)
        bloch = [[float(c) for c in row] for row in ensemble.bloch_vectors()]
        populations = [float(p) for p in ensemble.populations]
        for kind in CRITERION_KINDS:
            task = dict(base)
            task["criterion"] = kind
            task["bloch"] = bloch
            task["populations"] = populations
            tasks.append(task)
            labels.append(kind)
    workers = int(section.get("workers", min(len(tasks), os.cpu_count() or 1)))
    if workers < 1:
        raise ConfigError(f"sweep.workers: must be at least 1, got {workers}.")
    rows = _run_pool(tasks, workers)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["parameter", "value", "pvm_information", "povm_information",
                     "gap", "distinguishability", "visibility"])
    for label, row in zip(labels, rows):
        writer.writerow([parameter, label,
                         f"{row['pvm_information']:.11e}",
                         f"{row['povm_information']:.11e}",
                         f"{row['gap']:.11e}",
                         f"{row['distinguishability']:.11e}",
                         f"{row['visibility']:.11e}"])
    return buffer.getvalue(), 0


def cmd_dilate(config: dict, seed_override: int | None) -> tuple[dict, int]:
    ensemble = _build_ensemble(config)
    criterion = _build_criterion(config)
    search = _build_search(config, seed_override)
    started = time.perf_counter()
    result = optimize_povm(ensemble, criterion, search)
    dilation = neumark_dilate(result.best)
    defect = verify_dilation(dilation, result.best, ensemble)
    from .dilation import dilation_probabilities
    from .measurement import table_from_probabilities
    table = table_from_probabilities(dilation_probabilities(dilation, ensemble),
                                     ensemble.populations)
    lifted = average_information(criterion, table).average
    gap = abs(lifted - result.score.average)
    passed = defect < 1e-10 and gap < 1e-12
    report = {
        "command": "dilate",
        "criterion": criterion.kind,
        "seed": search.seed,
        "elapsed_seconds": time.perf_counter() - started,
        "ancilla_dim": dilation.ancilla_dim,
        "n_projectors": int(dilation.projectors.shape[0]),
        "outcome_mask": [bool(b) for b in dilation.outcome_mask],
        "statistics_defect": defect,
        "information_gap": gap,
        "average_information": result.score.average,
        "best": _measurement_to_json(result.best),
        "projectors": [_matrix_to_json(p) for p in dilation.projectors],
        "passed": passed,
    }
    return report, 0 if passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="whichway",
        description="Optimize, verify, sweep, and dilate which-way read-outs.")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in ("optimize", "verify", "sweep", "dilate"):
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", required=True, help="JSON run configuration")
        sub.add_argument("--seed", type=int, default=None,
                         help="override search.seed from the config")
        sub.add_argument("--out", default=None, help="write the report here "
                         "instead of stdout")
    args = parser.parse_args(argv)
    handlers = {"optimize": cmd_optimize, "verify": cmd_verify,
                "sweep": cmd_sweep, "dilate": cmd_dilate}
    try:
        config = load_config(args.config)
        document, code = handlers[args.command](config, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    text = document if isinstance(document, str) else json.dumps(document, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
