"""Maximize average which-way information over PVMs and rank-one POVMs.

The search works in Bloch coordinates: a candidate is a list of rank-one
elements (w, m) built from free parameters for all but the last elements,
with the remainder supplied by spectral completion, so every evaluated
candidate is an exact measurement and scores are never constraint-biased.
Refinement is derivative-free (coordinate golden sections) because the
Bayes objective is only piecewise smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import Bounds, minimize
from sklearn.base import BaseEstimator

from .criteria import Criterion, Score, average_information
from .measurement import (
    EIGENVALUE_FLOOR,
    Measurement,
    is_pvm,
    posteriors,
    rank_one_refine,
)
from .quantum import DetectorEnsemble, ensemble_from_bloch, trine_ensemble

__all__ = [
    "OptimizationResult",
    "POVMOptimizer",
    "PVMOptimizer",
    "SearchConfig",
    "closed_form",
    "distinguishability",
    "equivalent_measurements",
    "optimize_povm",
    "optimize_pvm",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_WEIGHT_FLOOR = EIGENVALUE_FLOOR / 2.0
_COMPLETION_ATOL = 1e-10

_SHANNON, _BAYES, _RMS = 0, 1, 2
_KIND_CODES = {"shannon": _SHANNON, "bayes": _BAYES, "rms_spread": _RMS}


@dataclass(frozen=True)
class SearchConfig:
    """Search-budget knobs; defaults finish every verification run in seconds."""

    n_range: tuple[int, int] = (2, 4)
    restarts: int = 32
    grid_resolution: int = 64
    tolerance: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        lo, hi = (int(self.n_range[0]), int(self.n_range[1]))
        if not (2 <= lo <= hi <= 4):
            raise ValueError(f"n_range must satisfy 2 <= lo <= hi <= 4, got {self.n_range!r}.")
        if int(self.restarts) < 1:
            raise ValueError("restarts must be positive.")
        if int(self.grid_resolution) < 2:
            raise ValueError("grid_resolution must be at least 2.")
        tol = float(self.tolerance)
        if not (0.0 < tol <= 1e-3):
            raise ValueError(f"tolerance must lie in (0, 1e-3], got {tol!r}.")
        object.__setattr__(self, "n_range", (lo, hi))
        object.__setattr__(self, "restarts", int(self.restarts))
        object.__setattr__(self, "grid_resolution", int(self.grid_resolution))
        object.__setattr__(self, "tolerance", tol)
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class OptimizationResult:
    """Best measurement found, its re-evaluated score, and search diagnostics."""

    best: Measurement
    score: Score
    is_pvm: bool
    distinguishability: float | None
    trace: tuple[tuple[str, float], ...]


# ---------------------------------------------------------------------------
# fast scalar objective


def _ensemble_floats(ensemble: DetectorEnsemble):
    if ensemble.dim != 2:
        raise ValueError("optimization supports qubit detector ensembles only.")
    bloch = [tuple(float(c) for c in row) for row in ensemble.bloch_vectors()]
    pops = [float(z) for z in ensemble.populations]
    return bloch, pops


def _score_elements(weights, dirs, bloch, pops, kind, inv_log):
    """Average information of rank-one elements, in plain floats.

    Same quantity as criteria.average_information(posteriors(...)), written
    as the prior-weighted sum of per-outcome scores without materializing
    the table.
    """
    n = len(bloch)
    total = 0.0
    for w, (mx, my, mz) in zip(weights, dirs):
        q = 0.0
        masses = []
        for (nx, ny, nz), zeta in zip(bloch, pops):
            p = w * (1.0 + mx * nx + my * ny + mz * nz)
            if p < 0.0:
                p = 0.0
            zp = zeta * p
            masses.append(zp)
            q += zp
        if q <= 1e-15:
            continue
        if kind == _BAYES:
            total += max(masses) - q
        elif kind == _SHANNON:
            log_q = math.log(q)
            acc = 0.0
            for zp in masses:
                if zp > 0.0:
                    acc += zp * (math.log(zp) - log_q)
            total += acc * inv_log
        else:
            uniform = 1.0 / n
            acc = 0.0
            for zp in masses:
                d = zp / q - uniform
                acc += d * d
            total += q * math.sqrt(acc * n / (n - 1))
    return total


def _direction(u: float, phi: float):
    t = math.sqrt(max(0.0, 1.0 - u * u))
    return (t * math.cos(phi), t * math.sin(phi), u)


def _angles(direction) -> tuple[float, float]:
    x, y, z = (float(direction[0]), float(direction[1]), float(direction[2]))
    return max(-1.0, min(1.0, z)), math.atan2(y, x)


def _free_elements(params, n_free):
    weights, dirs = [], []
    remaining = 1.0
    for j in range(n_free):
        frac, u, phi = params[3 * j], params[3 * j + 1], params[3 * j + 2]
        w = frac * remaining
        remaining -= w
        if w < _WEIGHT_FLOOR:
            continue
        weights.append(w)
        dirs.append(_direction(u, phi))
    return weights, dirs


def _complete_floats(weights, dirs):
    """Append the spectral pieces of the remainder; None when infeasible."""
    c = 1.0 - sum(weights)
    vx = vy = vz = 0.0
    for w, (mx, my, mz) in zip(weights, dirs):
        vx += w * mx
        vy += w * my
        vz += w * mz
    v = math.sqrt(vx * vx + vy * vy + vz * vz)
    if c < -_COMPLETION_ATOL or v > c + _COMPLETION_ATOL:
        return None
    out_w = list(weights)
    out_d = list(dirs)
    if c >= EIGENVALUE_FLOOR:
        if v <= _WEIGHT_FLOOR:
            out_w += [c / 2.0, c / 2.0]
            out_d += [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
        else:
            ux, uy, uz = vx / v, vy / v, vz / v
            hi, lo = (c + v) / 2.0, (c - v) / 2.0
            if 2.0 * hi >= EIGENVALUE_FLOOR:
                out_w.append(hi)
                out_d.append((-ux, -uy, -uz))
            if 2.0 * lo >= EIGENVALUE_FLOOR:
                out_w.append(lo)
                out_d.append((ux, uy, uz))
    return out_w, out_d


def _povm_objective(params, n_free, bloch, pops, kind, inv_log):
    weights, dirs = _free_elements(params, n_free)
    if not weights:
        return -math.inf
    completed = _complete_floats(weights, dirs)
    if completed is None:
        return -math.inf
    return _score_elements(completed[0], completed[1], bloch, pops, kind, inv_log)


# ---------------------------------------------------------------------------
# derivative-free refinement


def _golden_max(fun, lo, hi, xtol):
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    while (b - a) > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def _coordinate_refine(fun, params, bounds, windows, xtol, ftol, max_sweeps=8):
    """Golden-section sweeps over one coordinate at a time.

    Never degrades the starting point: a move is accepted only on strict
    improvement, so refining an exact optimum is a no-op.
    """
    point = list(params)
    best = fun(point)
    spans = list(windows)
    for sweep in range(max_sweeps):
        gained = 0.0
        for i, (lo_b, hi_b) in enumerate(bounds):
            lo = max(lo_b, point[i] - spans[i])
            hi = min(hi_b, point[i] + spans[i])
            if hi - lo <= xtol:
                continue

            def slice_fun(t, i=i):
                probe = point.copy()
                probe[i] = t
                return fun(probe)

            t_best, f_best = _golden_max(slice_fun, lo, hi, xtol)
            if f_best > best:
                gained += f_best - best
                best = f_best
                point[i] = t_best
        spans = [max(4.0 * xtol, s * 0.35) for s in spans]
        if sweep >= 1 and gained < ftol:
            break
    return point, best


def _powell_polish(fun, point, bounds, xtol):
    """Direction-set polish after the coordinate sweeps.

    Coordinate descent zigzags on coupled ridges; Powell's conjugate
    directions finish the job. Strict improvement only, so a start already
    at an exact optimum is returned untouched.
    """
    start_value = fun(point)
    # periodic coordinates arrive unbounded; Brent needs a finite bracket
    lower = [lo if math.isfinite(lo) else point[i] - math.pi
             for i, (lo, _) in enumerate(bounds)]
    upper = [hi if math.isfinite(hi) else point[i] + math.pi
             for i, (_, hi) in enumerate(bounds)]

    def loss(x):
        value = fun(list(x))
        return -value if math.isfinite(value) else 1e9

    result = minimize(loss, np.asarray(point, dtype=float),
                      method="Powell", bounds=Bounds(lower, upper),
                      options={"xtol": xtol * 1e-3, "ftol": 1e-14, "maxiter": 400})
    value = -float(result.fun)
    if math.isfinite(value) and value > start_value + 1e-14:
        return [float(v) for v in result.x], value
    return list(point), start_value


# ---------------------------------------------------------------------------
# public optimizers


def _distinct_directions(ranked, cap, separation=0.2):
    """Keep the best-ranked (u, phi) points whose directions are pairwise
    distinct; m and -m define the same PVM, so antipodes count as equal."""
    kept, points = [], []
    for _, u, phi in ranked:
        d = _direction(u, phi)
        fresh = True
        for other in kept:
            delta = math.sqrt(sum((a - b) ** 2 for a, b in zip(d, other)))
            total = math.sqrt(sum((a + b) ** 2 for a, b in zip(d, other)))
            if min(delta, total) < separation:
                fresh = False
                break
        if fresh:
            kept.append(d)
            points.append([u, phi])
            if len(points) >= cap:
                break
    return points


def _pvm_seed_directions(bloch, pops):
    """Deterministic starts a coarse grid can miss: the beam axes plus, for
    every beam pair, the population-weighted difference (the exact two-beam
    Bayes direction), the plain difference, and the sum."""
    seeds = []
    for i, b in enumerate(bloch):
        seeds.append(b)
        for j in range(i + 1, len(bloch)):
            c = bloch[j]
            seeds.append((pops[i] * b[0] - pops[j] * c[0],
                          pops[i] * b[1] - pops[j] * c[1],
                          pops[i] * b[2] - pops[j] * c[2]))
            seeds.append((b[0] - c[0], b[1] - c[1], b[2] - c[2]))
            seeds.append((b[0] + c[0], b[1] + c[1], b[2] + c[2]))
    points = []
    for seed in seeds:
        norm = math.sqrt(seed[0] ** 2 + seed[1] ** 2 + seed[2] ** 2)
        if norm < 1e-9:
            continue
        u = max(-1.0, min(1.0, seed[2] / norm))
        points.append([u, math.atan2(seed[1], seed[0]) % (2.0 * math.pi)])
    return points


def optimize_pvm(ensemble: DetectorEnsemble, criterion: Criterion,
                 config: SearchConfig | None = None) -> OptimizationResult:
    """Best two-outcome qubit PVM {(1 ± m.sigma)/2} over directions m.

    Coarse grid of grid_resolution² directions, then golden-section plus
    direction-set refinement of several distinct grid candidates and of the
    deterministic seed directions. Refining many basins matters: near the
    chart poles the azimuth degenerates, and a lone grid-best start there
    can strand the refiner on the wrong meridian.
    """
    cfg = config or SearchConfig()
    bloch, pops = _ensemble_floats(ensemble)
    kind = _KIND_CODES[criterion.kind]
    inv_log = 1.0 / math.log(criterion.log_base)

    def objective(point):
        m = _direction(point[0], point[1])
        neg = (-m[0], -m[1], -m[2])
        return _score_elements((0.5, 0.5), (m, neg), bloch, pops, kind, inv_log)

    res = cfg.grid_resolution
    ranked = []
    for u in np.linspace(-1.0, 1.0, res):
        for phi in np.linspace(0.0, 2.0 * math.pi, res, endpoint=False):
            ranked.append((objective([float(u), float(phi)]), float(u), float(phi)))
    ranked.sort(key=lambda item: item[0], reverse=True)
    grid_value = ranked[0][0]
    starts = _distinct_directions(ranked, cap=max(4, min(cfg.restarts, 12)))
    starts += _pvm_seed_directions(bloch, pops)
    xtol = max(1e-7, math.sqrt(cfg.tolerance) * 1e-2)
    spans = [2.0 / res, 2.0 * math.pi / res]
    pvm_bounds = [(-1.0, 1.0), (-math.inf, math.inf)]
    refined = []
    for start in starts:
        refined.append(_coordinate_refine(
            objective, start, pvm_bounds, spans, xtol, cfg.tolerance))
    refined.sort(key=lambda item: item[1], reverse=True)
    # coordinate sweeps rank the basins; the direction-set polish is pricier,
    # so only the leaders get it
    point, value = refined[0]
    for candidate, _ in refined[:3]:
        polished, polished_value = _powell_polish(objective, candidate,
                                                  pvm_bounds, xtol)
        if polished_value > value:
            point, value = polished, polished_value
    direction = np.array(_direction(point[0], point[1]))
    best = Measurement.from_rank_one([(0.5, direction), (0.5, -direction)])
    score = average_information(criterion, posteriors(ensemble, best))
    dist = None
    if criterion.kind == "bayes":
        dist = max(0.0, min(1.0, 1.0 + 2.0 * score.average))
    return OptimizationResult(
        best=best, score=score, is_pvm=True, distinguishability=dist,
        trace=(("pvm-grid", grid_value), ("pvm-refined", value)))


def _smart_inits(n_free, bloch, pvm_point):
    """Deterministic starting points: the best PVM embedded, plus elements
    anti-aligned and aligned with the detector directions."""
    inits = []
    pvm_params = []
    for j in range(n_free):
        if j == 0:
            pvm_params += [0.5, pvm_point[0], pvm_point[1]]
        else:
            pvm_params += [0.0, 1.0, 0.0]
    inits.append(("pvm-embed", pvm_params))
    for label, sign in (("anti-aligned", -1.0), ("aligned", 1.0)):
        params = []
        for j in range(n_free):
            u, phi = _angles([sign * c for c in bloch[j % len(bloch)]])
            params += [1.0 / (n_free + 1 - j), u, phi]
        inits.append((label, params))
    return inits


def optimize_povm(ensemble: DetectorEnsemble, criterion: Criterion,
                  config: SearchConfig | None = None) -> OptimizationResult:
    """Best rank-one POVM across outcome counts in config.n_range.

    For nominal N, the candidate has N−1 freely parametrized elements
    (stick-breaking weights, sphere angles) and is closed by spectral
    completion; infeasible completions are rejected inside the objective.
    Deterministic starts plus seeded random restarts, strict-improvement
    comparisons, so identical seeds reproduce identical results.
    """
    cfg = config or SearchConfig()
    bloch, pops = _ensemble_floats(ensemble)
    kind = _KIND_CODES[criterion.kind]
    inv_log = 1.0 / math.log(criterion.log_base)
    xtol = max(1e-7, math.sqrt(cfg.tolerance) * 1e-2)

    pvm_result = optimize_pvm(ensemble, criterion, cfg)
    pvm_point = _angles(pvm_result.best.rank_one[0].direction)

    lo_n, hi_n = cfg.n_range
    seeds = np.random.SeedSequence(cfg.seed).spawn((hi_n - lo_n + 1) * cfg.restarts)
    trace: list[tuple[str, float]] = []
    best_value = -math.inf
    best_candidate = None
    seed_index = 0
    for nominal in range(lo_n, hi_n + 1):
        n_free = nominal - 1

        def objective(params, n_free=n_free):
            return _povm_objective(params, n_free, bloch, pops, kind, inv_log)

        bounds = [(0.0, 1.0), (-1.0, 1.0), (-math.inf, math.inf)] * n_free
        windows = [0.25, 0.5, math.pi / 4.0] * n_free
        starts = _smart_inits(n_free, bloch, pvm_point)
        for r in range(cfg.restarts):
            rng = np.random.default_rng(seeds[seed_index])
            seed_index += 1
            params = []
            for _ in range(n_free):
                params += [float(rng.uniform(0.0, 1.0)),
                           float(rng.uniform(-1.0, 1.0)),
                           float(rng.uniform(0.0, 2.0 * math.pi))]
            starts.append((f"random-{r}", params))
        for label, params in starts:
            point, value = _coordinate_refine(
                objective, params, bounds, windows, xtol, cfg.tolerance)
            trace.append((f"n{nominal}/{label}", value))
            # ties within float noise keep the earliest candidate, so the
            # deterministic starts win over wandering restarts
            if value > best_value + 1e-12:
                best_value = value
                best_candidate = (point, n_free)

    point, n_free = best_candidate

    def winner_objective(params, n_free=n_free):
        return _povm_objective(params, n_free, bloch, pops, kind, inv_log)

    point, value = _powell_polish(
        winner_objective, point,
        [(0.0, 1.0), (-1.0, 1.0), (-math.inf, math.inf)] * n_free, xtol)
    if value > best_value:
        trace.append(("powell-polish", value))
    weights, dirs = _free_elements(point, n_free)
    weights, dirs = _complete_floats(weights, dirs)
    weights, dirs = _merge_proportional(weights, dirs)
    best = Measurement.from_rank_one(
        [(w, np.array(d)) for w, d in zip(weights, dirs)])
    score = average_information(criterion, posteriors(ensemble, best))
    dist = None
    if criterion.kind == "bayes":
        dist = max(0.0, min(1.0, 1.0 + 2.0 * score.average))
    return OptimizationResult(
        best=best, score=score, is_pvm=is_pvm(best),
        distinguishability=dist, trace=tuple(trace))


def _merge_proportional(weights, dirs, dir_atol: float = 1e-8):
    """Merge elements with coincident directions; sort by falling weight."""
    merged: list[tuple[float, np.ndarray]] = []
    for w, d in zip(weights, dirs):
        vec = np.asarray(d, dtype=float)
        for idx, (mw, md) in enumerate(merged):
            if np.max(np.abs(md - vec)) <= dir_atol:
                new_vec = mw * md + w * vec
                norm = np.linalg.norm(new_vec)
                merged[idx] = (mw + w, new_vec / norm if norm > 0 else md)
                break
        else:
            merged.append((w, vec))
    merged = [(w, d) for w, d in merged if w >= _WEIGHT_FLOOR]
    merged.sort(key=lambda el: (-el[0], tuple(np.round(el[1], 9))))
    return [w for w, _ in merged], [d for _, d in merged]


def closed_form(name: str) -> Measurement:
    """Reference optima: the symmetric-pair PVM and the two trine POVMs."""
    if name == "symmetric_pvm":
        x_hat = np.array([1.0, 0.0, 0.0])
        return Measurement.from_rank_one([(0.5, x_hat), (0.5, -x_hat)])
    trine = trine_ensemble().bloch_vectors()
    if name == "trine_shannon":
        return Measurement.from_rank_one([(1.0 / 3.0, -n) for n in trine])
    if name == "trine_bayes":
        return Measurement.from_rank_one([(1.0 / 3.0, n) for n in trine])
    raise ValueError(
        f"unknown closed form {name!r}; expected symmetric_pvm, trine_shannon, or trine_bayes.")


def distinguishability(ensemble: DetectorEnsemble,
                       config: SearchConfig | None = None) -> float:
    """One minus twice the optimal Bayes cost, clipped to [0, 1]."""
    result = optimize_povm(ensemble, Criterion("bayes"), config)
    return float(result.distinguishability)


def equivalent_measurements(a: Measurement, b: Measurement,
                            atol: float = 1e-3) -> bool:
    """Equality up to outcome permutation and merging of proportional elements."""
    elems_a = _canonical_elements(a, atol)
    elems_b = _canonical_elements(b, atol)
    if len(elems_a) != len(elems_b):
        return False
    unused = list(range(len(elems_b)))
    for w, d in elems_a:
        match = None
        for idx in unused:
            wb, db = elems_b[idx]
            if abs(w - wb) <= atol and float(np.max(np.abs(d - db))) <= atol:
                match = idx
                break
        if match is None:
            return False
        unused.remove(match)
    return True


def _canonical_elements(measurement: Measurement, atol: float):
    m = measurement
    if m.rank_one is None:
        m = rank_one_refine(m)
    weights = [el.weight for el in m.rank_one]
    dirs = [el.direction for el in m.rank_one]
    weights, dirs = _merge_proportional(weights, dirs, dir_atol=max(1e-8, atol / 100.0))
    return list(zip(weights, dirs))


# ---------------------------------------------------------------------------
# estimator front-end


class _MeasurementOptimizerBase(BaseEstimator):
    """Shared fit logic: rows of X are detector states, y is unused."""

    def _make_config(self) -> SearchConfig:
        raise NotImplementedError

    def _run(self, ensemble, criterion, config) -> OptimizationResult:
        raise NotImplementedError

    def fit(self, X, y=None, populations=None):
        """Find the best measurement for the detector states in X.

        X is (n, 3) real Bloch vectors or (n, 2) complex amplitudes;
        populations defaults to equal weights.
        """
        arr = np.asarray(X)
        if arr.ndim != 2 or arr.shape[0] < 2:
            raise ValueError(f"X must have shape (n >= 2, 2 or 3), got {arr.shape}.")
        if arr.shape[1] == 3 and not np.iscomplexobj(arr):
            ensemble = ensemble_from_bloch(arr.astype(float), populations)
        elif arr.shape[1] == 2:
            if populations is None:
                populations = np.full(arr.shape[0], 1.0 / arr.shape[0])
            ensemble = DetectorEnsemble(states=arr.astype(complex),
                                        populations=populations)
        else:
            raise ValueError(
                f"X rows must be Bloch vectors (3 columns) or qubit amplitudes "
                f"(2 columns), got shape {arr.shape}.")
        criterion = Criterion(self.criterion, self.log_base)
        config = self._make_config()
        result = self._run(ensemble, criterion, config)
        self.n_features_in_ = arr.shape[1]
        self.ensemble_ = ensemble
        self.measurement_ = result.best
        self.score_ = float(result.score.average)
        self.per_outcome_ = result.score.per_outcome
        self.is_pvm_ = result.is_pvm
        self.distinguishability_ = result.distinguishability
        self.trace_ = result.trace
        return self


class PVMOptimizer(_MeasurementOptimizerBase):
    """Two-outcome projective read-out optimizer with a scikit-learn API."""

    def __init__(self, criterion: str = "shannon", log_base: float = math.e,
                 grid_resolution: int = 64, tolerance: float = 1e-8,
                 seed: int = 0):
        self.criterion = criterion
        self.log_base = log_base
        self.grid_resolution = grid_resolution
        self.tolerance = tolerance
        self.seed = seed

    def _make_config(self) -> SearchConfig:
        return SearchConfig(grid_resolution=self.grid_resolution,
                            tolerance=self.tolerance, seed=self.seed)

    def _run(self, ensemble, criterion, config):
        return optimize_pvm(ensemble, criterion, config)


class POVMOptimizer(_MeasurementOptimizerBase):
    """Generalized read-out optimizer with a scikit-learn API."""

    def __init__(self, criterion: str = "shannon", log_base: float = math.e,
                 n_min: int = 2, n_max: int = 4, restarts: int = 32,
                 grid_resolution: int = 64, tolerance: float = 1e-8,
                 seed: int = 0):
        self.criterion = criterion
        self.log_base = log_base
        self.n_min = n_min
        self.n_max = n_max
        self.restarts = restarts
        self.grid_resolution = grid_resolution
        self.tolerance = tolerance
        self.seed = seed

    def _make_config(self) -> SearchConfig:
        return SearchConfig(n_range=(self.n_min, self.n_max),
                            restarts=self.restarts,
                            grid_resolution=self.grid_resolution,
                            tolerance=self.tolerance, seed=self.seed)

    def _run(self, ensemble, criterion, config):
        return optimize_povm(ensemble, criterion, config)
