"""Model selection for the two MDS methods, the climate-space baseline and hold-out runs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .brown_resnick import PairData, extremal_coefficient, pairwise_loglik
from .covariance import CovFunction, cov_value
from .data import FrechetMatrix, StationSet
from .errors import (
    DegenerateDependence,
    EmptyGrid,
    InsufficientStations,
    MissingDimension,
    NonConvergence,
    ValidationError,
)
from .gev_margins import fit_margins, to_frechet
from .ideal_covariance import EPSILON, IdealCovCache, ideal_cov_method1, ideal_distances
from .latent_warp import WarpModel, fit_warp, warp
from .madogram import extremal_matrix, theta_mse
from .mds import Embedding, pairwise_distances, sammon_mds

log = logging.getLogger(__name__)

CLASSICAL = "classical"


@dataclass(frozen=True)
class GridSpec:
    sigma_grid: tuple = tuple(np.round(np.arange(1.0, 4.0 + 1e-9, 0.1), 1))
    alpha_grid: tuple = tuple(np.linspace(0.02, 2.0, 100))
    d_set: tuple = (2, 3, 4, 5, 6)
    r1: float = 0.05
    r2: float = 0.00025

    def __post_init__(self):
        for name in ("sigma_grid", "alpha_grid", "d_set"):
            values = tuple(getattr(self, name))
            if not values:
                raise EmptyGrid(f"{name} is empty")
            if list(values) != sorted(values):
                raise ValidationError(f"{name} must be sorted")
            object.__setattr__(self, name, values)

    @classmethod
    def reduced(cls):
        """Small grid used by the desk-scale end-to-end checks."""
        return cls(sigma_grid=(1.5, 2.0, 2.5, 3.0), alpha_grid=tuple(np.linspace(0.1, 2.0, 20)), d_set=(2, 3, 4))


@dataclass(frozen=True)
class ClimateTransform:
    """Rotation by ``beta`` of the horizontal plane plus per-axis scalings."""

    beta: float
    c1: float
    c2: float
    c3: float

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0 and self.c3 > 0):
            raise ValidationError("anisotropy scalings must be positive")

    def matrix(self) -> np.ndarray:
        cb, sb = np.cos(self.beta), np.sin(self.beta)
        return np.array(
            [
                [self.c1 * cb, -self.c1 * sb, 0.0],
                [self.c2 * sb, self.c2 * cb, 0.0],
                [0.0, 0.0, self.c3],
            ]
        )

    def apply(self, coords) -> np.ndarray:
        return np.atleast_2d(np.asarray(coords, dtype=float)) @ self.matrix().T


@dataclass(frozen=True)
class GridRecord:
    method: object
    d: int
    sigma: float
    alpha: float
    theta_mse: float
    loglik: float
    stress: float


@dataclass
class FittedModel:
    sigma: float
    cov: CovFunction
    method: object
    d: int
    stations: StationSet | None
    station_ids: list
    embedding: Embedding | None = None
    warp: WarpModel | None = None
    climate: ClimateTransform | None = None
    loglik: float = float("nan")
    theta_mse: float = float("nan")
    records: list = field(default_factory=list)
    trace: list = field(default_factory=list)

    def latent_coords(self) -> np.ndarray:
        """Station positions in the space where the model is stationary."""
        if self.climate is not None:
            return self.climate.apply(self.stations.coords)
        return self.embedding.coords

    def locate(self, points) -> np.ndarray:
        """Map physical (easting, northing, elevation) points into model space."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.climate is not None:
            return self.climate.apply(points)
        if self.warp is None:
            raise ValidationError("MDS model has no fitted warp; pass stations when fitting")
        return warp(self.warp, points)

    def correlation(self, coords=None) -> np.ndarray:
        coords = self.latent_coords() if coords is None else coords
        return np.asarray(cov_value(self.cov, pairwise_distances(coords)))

    def theta(self, coords=None) -> np.ndarray:
        th = np.asarray(extremal_coefficient(self.sigma, self.correlation(coords)))
        np.fill_diagonal(th, 1.0)
        return th

    def rescore(self, data, theta_hat) -> tuple[float, float]:
        """Recompute (pairwise log-likelihood, theta MSE) from the components."""
        C = self.correlation()
        return pairwise_loglik(data, C, self.sigma), theta_mse(self.theta(), theta_hat)


def _score_embedding(method, coords, sigma, f, pairs: PairData | None, theta_hat):
    C = np.asarray(cov_value(f, pairwise_distances(coords)))
    th = np.asarray(extremal_coefficient(sigma, C))
    np.fill_diagonal(th, 1.0)
    mse = theta_mse(th, theta_hat) if theta_hat is not None else float("nan")
    ll = float("nan")
    if method == 2 or pairs is not None:
        try:
            ll = float(np.sum(pairs.terms(sigma, C[pairs.iu, pairs.ju])))
        except DegenerateDependence:
            ll = -np.inf
    return mse, ll


def fit_mds_model(
    method: int,
    data: FrechetMatrix,
    theta_hat,
    grid: GridSpec,
    d: int,
    stations: StationSet | None = None,
    epsilon: float = EPSILON,
    cache: IdealCovCache | None = None,
    alpha_map: dict | None = None,
    seed: int = 0,
) -> FittedModel:
    """Exhaustive (sigma, alpha) search for one latent dimension.

    Method 1 minimizes theta MSE of the realized embedding; method 2
    maximizes the pairwise log-likelihood. With ``alpha_map`` the exponent
    is looked up per ``(d, sigma)`` instead of searched.
    """
    if method not in (1, 2):
        raise ValidationError(f"method must be 1 or 2, got {method!r}")
    if theta_hat is None:
        theta_hat = extremal_matrix(data)
    theta_hat = np.asarray(theta_hat, dtype=float)
    if method == 2 and cache is None:
        cache = IdealCovCache(epsilon=epsilon)
    pairs = PairData(data) if method == 2 else None

    records, best = [], None
    for sigma in grid.sigma_grid:
        sigma = float(sigma)
        K = ideal_cov_method1(theta_hat, sigma, epsilon) if method == 1 else cache.get(data, sigma)
        alphas = grid.alpha_grid if alpha_map is None else (alpha_map[(d, round(sigma, 6))],)
        for alpha in alphas:
            f = CovFunction.powexp(float(alpha))
            D = ideal_distances(K, f)
            emb = sammon_mds(D, d)
            mse, ll = _score_embedding(method, emb.coords, sigma, f, pairs, theta_hat)
            rec = GridRecord(method, d, sigma, float(alpha), mse, ll, emb.stress)
            records.append(rec)
            score = mse if method == 1 else -ll
            if best is None or score < best[0]:
                best = (score, rec, emb)
    if best is None:
        raise EmptyGrid("no (sigma, alpha) combination was evaluated")

    _, rec, emb = best
    f = CovFunction.powexp(rec.alpha)
    model = FittedModel(rec.sigma, f, method, d, stations, list(data.station_ids), embedding=emb, records=records)
    model.loglik, model.theta_mse = model.rescore(data, theta_hat)
    if stations is not None:
        model.warp = fit_warp(stations, emb, seed=seed)
    return model


def alpha_map_from_records(records) -> dict:
    """Best exponent per ``(d, sigma)`` among grid records (lowest MSE or highest likelihood)."""
    best = {}
    for r in records:
        key = (r.d, round(r.sigma, 6))
        score = r.theta_mse if r.method == 1 else -r.loglik
        if key not in best or score < best[key][0]:
            best[key] = (score, r.alpha)
    return {k: v[1] for k, v in best.items()}


def select_dimension(per_d_models: dict, grid: GridSpec, method) -> int:
    """Smallest-first increment rule: keep growing ``d`` while the gain beats r1 / r2.

    Method 1 accepts ``d + 1`` when ``1 - mse[d+1] / mse[d] > r1``; method 2
    when ``(l[d+1] - l[d]) / |l[d]| > r2``.
    """
    if not per_d_models:
        raise MissingDimension("no fitted models supplied")
    ds = sorted(per_d_models)
    for a, b in zip(ds, ds[1:]):
        if b != a + 1:
            raise MissingDimension(f"dimension {a + 1} is missing")
    chosen = ds[0]
    for d in ds[1:]:
        prev, cur = per_d_models[chosen], per_d_models[d]
        if method == 1:
            gain = 1.0 - cur.theta_mse / prev.theta_mse if prev.theta_mse > 0 else 0.0
            ok = gain > grid.r1
        else:
            gain = (cur.loglik - prev.loglik) / abs(prev.loglik) if prev.loglik != 0 else 0.0
            ok = gain > grid.r2
        if not ok:
            break
        chosen = d
    return chosen


def fit_all_dimensions(method, data, theta_hat, grid: GridSpec, stations=None, cache=None, epsilon=EPSILON, seed=0):
    """Fit every ``d`` in the grid and return ``(chosen_d, {d: model})``."""
    if method == 2 and cache is None:
        cache = IdealCovCache(epsilon=epsilon)
    models = {}
    for d in grid.d_set:
        models[d] = fit_mds_model(method, data, theta_hat, grid, d, None, epsilon, cache, seed=seed)
        log.info("method %s d=%d sigma=%.2f alpha=%.3f mse=%.5f ll=%.2f", method, d, models[d].sigma,
                 models[d].cov.alpha, models[d].theta_mse, models[d].loglik)
    chosen = select_dimension(models, grid, method)
    if stations is not None:
        models[chosen].stations = stations
        models[chosen].warp = fit_warp(stations, models[chosen].embedding, seed=seed)
    return chosen, models


# --- classical climate-space model -------------------------------------------------

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
CLASSICAL_BOUNDS = {
    "sigma": (0.5, 6.0),
    "beta": (-np.pi / 2, np.pi / 2),
    "log_c1": (np.log(1e-6), np.log(1e2)),
    "log_c2": (np.log(1e-6), np.log(1e2)),
    "log_c3": (np.log(1e-6), np.log(1e2)),
    "alpha": (0.01, 2.0),
}


def _line_search(fun, x0, f0, lo, hi, n_coarse=9, tol=1e-4):
    """Maximize ``fun`` on [lo, hi]: coarse grid, golden refinement, keep ``x0`` unless beaten."""
    grid = np.linspace(lo, hi, n_coarse)
    vals = np.array([fun(x) for x in grid])
    i = int(np.argmax(vals))
    best_x, best_f = (x0, f0) if f0 >= vals[i] else (grid[i], vals[i])
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, n_coarse - 1)]
    if f0 >= vals[i] and lo <= x0 <= hi:
        step = (hi - lo) / (n_coarse - 1)
        a, b = max(lo, x0 - step), min(hi, x0 + step)
    x1, x2 = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > tol * (hi - lo):
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fun(x2)
    for x, fx in ((x1, f1), (x2, f2)):
        if fx > best_f:
            best_x, best_f = x, fx
    return best_x, best_f


def _classical_params(theta):
    sigma, beta, lc1, lc2, lc3, alpha = theta
    return float(sigma), ClimateTransform(float(beta), *map(float, np.exp([lc1, lc2, lc3]))), CovFunction.powexp(float(alpha))


def fit_classical(
    data: FrechetMatrix,
    stations: StationSet,
    theta_hat=None,
    init=None,
    max_cycles: int = 100,
    rel_tol: float = 1e-6,
) -> FittedModel:
    """Cyclic one-parameter-at-a-time maximization of the pairwise likelihood.

    Parameters (sigma, beta, c1, c2, c3, alpha); distances are Euclidean
    norms of the rotated and scaled (easting, northing, elevation).
    """
    order = [stations.ids.index(s) for s in data.station_ids]
    coords = stations.coords[order]
    pairs = PairData(data)
    diff = coords[pairs.iu] - coords[pairs.ju]

    def loglik(theta):
        sigma, ct, f = _classical_params(theta)
        h = np.linalg.norm(diff @ ct.matrix().T, axis=1)
        k = np.exp(-np.power(h, f.alpha))
        try:
            with np.errstate(all="ignore"):
                val = float(np.sum(pairs.terms(sigma, k)))
        except DegenerateDependence:
            return -np.inf
        return val if np.isfinite(val) else -np.inf

    if init is None:
        horiz = np.linalg.norm(diff[:, :2], axis=1)
        c = 1.0 / max(np.median(horiz), 1e-9)
        init = [2.0, 0.0, np.log(c), np.log(c), np.log(c / 1000.0), 1.0]
    theta = np.array(init, dtype=float)
    bounds = list(CLASSICAL_BOUNDS.values())
    current = loglik(theta)
    trace = [current]
    for _ in range(max_cycles):
        start = current
        for j, (lo, hi) in enumerate(bounds):
            def along(x, j=j):
                t = theta.copy()
                t[j] = x
                return loglik(t)

            theta[j], current = _line_search(along, theta[j], current, lo, hi)
        trace.append(current)
        if current - start <= rel_tol * abs(start):
            break
    else:
        raise NonConvergence(f"classical fit did not converge in {max_cycles} cycles")

    sigma, ct, f = _classical_params(theta)
    model = FittedModel(sigma, f, CLASSICAL, 3, stations.subset(order), list(data.station_ids), climate=ct, trace=trace)
    if theta_hat is None:
        theta_hat = extremal_matrix(data)
    model.loglik, model.theta_mse = model.rescore(data, theta_hat)
    return model


# --- hold-out experiments -----------------------------------------------------------


def farthest_point_sample(points, m: int, first: int = 0) -> list[int]:
    """Greedy max-min subset of ``m`` indices starting from ``first``."""
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    if not 0 < m <= n:
        raise InsufficientStations(f"cannot pick {m} of {n} points")
    chosen = [int(first)]
    dmin = np.linalg.norm(points - points[first], axis=1)
    while len(chosen) < m:
        dmin[chosen] = -1.0
        nxt = int(np.argmax(dmin))
        chosen.append(nxt)
        dmin = np.minimum(dmin, np.linalg.norm(points - points[nxt], axis=1))
    return chosen


@dataclass
class HoldoutResult:
    n2: int
    train: list
    test: list
    model: FittedModel
    loglik: float
    theta_mse: float
    train_pair_mse: float
    test_pair_mse: float
    cross_pair_mse: float
    latent: np.ndarray


def _pair_mse(theta, theta_hat, rows, cols, same):
    rows, cols = np.asarray(rows), np.asarray(cols)
    block = (theta - theta_hat)[np.ix_(rows, cols)] ** 2
    if same:
        iu = np.triu_indices(len(rows), 1)
        return float(block[iu].mean()) if iu[0].size else float("nan")
    return float(block.mean())


def draw_holdout_size(rng, n2_range) -> int:
    lo, hi = n2_range
    return int(rng.integers(lo, hi + 1))


def holdout_experiment(
    data,
    stations: StationSet,
    n2_range=(25, 50),
    seed: int = 0,
    method: int = 2,
    d: int = 4,
    grid: GridSpec | None = None,
    alpha_map: dict | None = None,
    epsilon: float = EPSILON,
) -> HoldoutResult:
    """Fit on training stations only, place the held-out ones through the warp, score everything.

    ``data`` may be raw maxima (margins are then fitted with training
    stations as the only neighbours) or already unit-Fréchet.
    """
    grid = grid or GridSpec()
    rng = np.random.default_rng(seed)
    n = data.n
    n2 = draw_holdout_size(rng, n2_range)
    if n - n2 < d + 2:
        raise InsufficientStations(f"{n - n2} training stations cannot support d = {d}")
    order = [stations.ids.index(s) for s in data.station_ids]
    st = stations.subset(order)
    first = int(rng.integers(n))
    test = sorted(farthest_point_sample(st.coords[:, :2], n2, first))
    train = [i for i in range(n) if i not in set(test)]

    if isinstance(data, FrechetMatrix):
        fre = data
    else:
        # neighbours are drawn from training stations only, so the training
        # margins never see a held-out column
        fre = to_frechet(data, fit_margins(data, st, candidates=train))
    fre_train = fre.subset(train)

    theta_hat_train = extremal_matrix(fre_train)
    model = fit_mds_model(method, fre_train, theta_hat_train, grid, d, st.subset(train), epsilon, alpha_map=alpha_map, seed=seed)

    latent = np.empty((n, d))
    latent[train] = model.embedding.coords
    latent[test] = warp(model.warp, st.coords[test])
    C = np.asarray(cov_value(model.cov, pairwise_distances(latent)))
    theta = np.asarray(extremal_coefficient(model.sigma, C))
    np.fill_diagonal(theta, 1.0)
    theta_hat = extremal_matrix(fre)
    return HoldoutResult(
        n2=n2,
        train=train,
        test=test,
        model=model,
        loglik=pairwise_loglik(fre, C, model.sigma),
        theta_mse=theta_mse(theta, theta_hat),
        train_pair_mse=_pair_mse(theta, theta_hat, train, train, True),
        test_pair_mse=_pair_mse(theta, theta_hat, test, test, True),
        cross_pair_mse=_pair_mse(theta, theta_hat, train, test, False),
        latent=latent,
    )
