"""Per-station GEV margins and the unit-Fréchet transform."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import gamma as gamma_fn

from .data import FrechetMatrix, MaximaMatrix, StationSet
from .errors import DegenerateSample, NonConvergence, ValidationError

log = logging.getLogger(__name__)

XI_BOUNDS = (0.0, 0.15)
GUMBEL_EPS = 1e-9
CDF_CLAMP = 1e-12
J_CANDIDATES = (0, 3, 5, 10)
N_RESTARTS = 5
EULER_GAMMA = 0.5772156649015329


@dataclass(frozen=True)
class GevParams:
    mu: float
    sigma_gev: float
    xi: float

    def __post_init__(self):
        if not self.sigma_gev > 0:
            raise ValidationError(f"GEV scale must be positive, got {self.sigma_gev}")


def _reduced(u, params):
    """Return the exponent t(u) with F(u) = exp(-t(u))."""
    u = np.asarray(u, dtype=float)
    y = (u - params.mu) / params.sigma_gev
    if abs(params.xi) < GUMBEL_EPS:
        return np.exp(-y)
    s = 1.0 + params.xi * y
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t = np.where(s > 0, np.power(np.maximum(s, 0.0), -1.0 / params.xi), 0.0)
    if params.xi > 0:
        # below the lower endpoint
        t = np.where(s > 0, t, np.inf)
    return t


def gev_cdf(u, params: GevParams):
    """GEV distribution function, Gumbel limit when ``|xi| < 1e-9``."""
    out = np.exp(-_reduced(u, params))
    return out if np.ndim(out) else float(out)


def gev_log_cdf(u, params: GevParams):
    out = -_reduced(u, params)
    return out if np.ndim(out) else float(out)


def gev_quantile(q, params: GevParams):
    """Inverse of :func:`gev_cdf` on (0, 1)."""
    q = np.asarray(q, dtype=float)
    t = -np.log(q)
    if abs(params.xi) < GUMBEL_EPS:
        out = params.mu - params.sigma_gev * np.log(t)
    else:
        out = params.mu + params.sigma_gev * np.expm1(-params.xi * np.log(t)) / params.xi
    return out if np.ndim(out) else float(out)


def gev_sample(size, params: GevParams, rng=None):
    rng = np.random.default_rng(rng)
    return gev_quantile(rng.uniform(size=size), params)


def gev_loglik(series, params: GevParams) -> float:
    """Independent GEV log-likelihood of ``series``; ``-inf`` off-support."""
    return _loglik(np.asarray(series, dtype=float), params.mu, params.sigma_gev, params.xi)


def _loglik(x, mu, sigma, xi):
    if not sigma > 0:
        return -np.inf
    y = (x - mu) / sigma
    n = x.size
    if abs(xi) < GUMBEL_EPS:
        return float(-n * np.log(sigma) - y.sum() - np.exp(-y).sum())
    s = 1.0 + xi * y
    if np.any(s <= 0):
        return -np.inf
    logs = np.log(s)
    return float(-n * np.log(sigma) - (1.0 + 1.0 / xi) * logs.sum() - np.exp(-logs / xi).sum())


def pwm_init(series, xi_bounds=XI_BOUNDS) -> GevParams:
    """Probability-weighted-moment estimate (Hosking et al.), shape clipped to bounds."""
    x = np.sort(np.asarray(series, dtype=float))
    n = x.size
    j = np.arange(n)
    b0 = x.mean()
    b1 = np.sum(j * x) / (n * (n - 1))
    b2 = np.sum(j * (j - 1) * x) / (n * (n - 1) * (n - 2))
    c = (2 * b1 - b0) / (3 * b2 - b0) - np.log(2) / np.log(3)
    k = 7.8590 * c + 2.9554 * c**2
    xi = float(np.clip(-k, *xi_bounds))
    l2 = 2 * b1 - b0
    if abs(xi) < 1e-6:
        sigma = l2 / np.log(2)
        mu = b0 - EULER_GAMMA * sigma
    else:
        kk = -xi
        g = gamma_fn(1 + kk)
        sigma = l2 * kk / (g * (1 - 2.0 ** (-kk)))
        mu = b0 + sigma * (g - 1) / kk
    if not np.isfinite(sigma) or sigma <= 0:
        sigma = max(np.std(x), 1e-6)
        mu = b0 - EULER_GAMMA * sigma
    return GevParams(float(mu), float(sigma), xi)


def _check_series(series, min_size=2):
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < min_size:
        raise ValidationError(f"need a 1-D series with at least {min_size} values")
    if not np.all(np.isfinite(x)):
        raise ValidationError("series contains non-finite values")
    if np.ptp(x) == 0:
        raise DegenerateSample("all values in the series are equal")
    return x


def _feasible_start(x, p0: GevParams, xi_bounds):
    """Shift the location down until every observation is inside the support."""
    mu, sigma, xi = p0.mu, p0.sigma_gev, p0.xi
    for _ in range(60):
        if np.isfinite(_loglik(x, mu, sigma, xi)):
            return mu, sigma, xi
        sigma *= 1.5
    xi = max(xi_bounds[0], 0.0)
    return x.mean() - EULER_GAMMA * x.std(), max(x.std(), 1e-6), xi


def fit_gev_ml(series, xi_bounds=XI_BOUNDS, seed=0) -> GevParams:
    """Box-constrained GEV maximum likelihood.

    Nelder-Mead over (mu, log sigma, xi), restarted from five perturbed
    probability-weighted-moment initializers; the best optimum wins.
    """
    x = _check_series(series, min_size=3)
    lo, hi = xi_bounds
    rng = np.random.default_rng(seed)
    init = pwm_init(x, xi_bounds)

    def nll(theta):
        mu, logsig, xi = theta
        xi = min(max(xi, lo), hi)
        val = _loglik(x, mu, np.exp(logsig), xi)
        return -val if np.isfinite(val) else np.inf

    scale = init.sigma_gev
    best = None
    for r in range(N_RESTARTS):
        if r == 0:
            p0 = init
        else:
            p0 = GevParams(
                init.mu + 0.2 * scale * rng.standard_normal(),
                init.sigma_gev * np.exp(0.2 * rng.standard_normal()),
                float(np.clip(init.xi + 0.05 * rng.standard_normal(), lo, hi)),
            )
        mu0, s0, xi0 = _feasible_start(x, p0, xi_bounds)
        res = optimize.minimize(
            nll,
            np.array([mu0, np.log(s0), xi0]),
            method="Nelder-Mead",
            bounds=[(None, None), (None, None), (lo, hi)],
            options={"xatol": 1e-8, "fatol": 1e-8, "maxiter": 10000, "maxfev": 20000},
        )
        if res.success and np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise NonConvergence("GEV maximum likelihood did not converge from any start")
    mu, logsig, xi = best.x
    return GevParams(float(mu), float(np.exp(logsig)), float(min(max(xi, lo), hi)))


def _fit_location_scale(x, xi, start):
    """Maximize the GEV likelihood over (mu, log sigma) at fixed shape."""

    def nll(theta):
        val = _loglik(x, theta[0], np.exp(theta[1]), xi)
        return -val if np.isfinite(val) else np.inf

    mu0, logs0 = start
    while not np.isfinite(nll([mu0, logs0])):
        logs0 += np.log(1.5)
    res = optimize.minimize(
        nll,
        np.array([mu0, logs0]),
        method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": 1e-10, "maxiter": 4000},
    )
    return res.x, -res.fun


def fit_gev_pooled(target: int, neighbors, data: MaximaMatrix, xi_bounds=XI_BOUNDS, seed=0) -> GevParams:
    """Shared-shape pooled fit over a station and its neighbours.

    The independence likelihood of the target and its ``J`` neighbours is
    maximized with one common ``xi`` and free per-station location and
    scale; the target's parameters are returned. ``J = 0`` is exactly
    :func:`fit_gev_ml`.
    """
    neighbors = [int(j) for j in neighbors]
    if target in neighbors or len(set(neighbors)) != len(neighbors):
        raise ValidationError("neighbour indices must be distinct and exclude the target")
    values = np.asarray(data.values, dtype=float)
    if not neighbors:
        return fit_gev_ml(values[:, target], xi_bounds=xi_bounds, seed=seed)

    cols = [target] + neighbors
    series = [_check_series(values[:, c], min_size=3) for c in cols]
    inits = [pwm_init(x, xi_bounds) for x in series]
    warm = [np.array([p.mu, np.log(p.sigma_gev)]) for p in inits]
    lo, hi = xi_bounds

    def profile(xi):
        total = 0.0
        for m, x in enumerate(series):
            theta, ll = _fit_location_scale(x, xi, warm[m])
            warm[m] = theta
            total += ll
        return -total

    res = optimize.minimize_scalar(profile, bounds=(lo, hi), method="bounded", options={"xatol": 1e-7})
    candidates = [(res.fun, float(res.x)), (profile(lo), lo), (profile(hi), hi)]
    _, xi = min(candidates)
    theta, ll = _fit_location_scale(series[0], xi, np.array([inits[0].mu, np.log(inits[0].sigma_gev)]))
    if not np.isfinite(ll):
        raise NonConvergence(f"pooled GEV fit failed for station index {target}")
    return GevParams(float(theta[0]), float(np.exp(theta[1])), float(xi))


def nearest_neighbors(stations: StationSet, target: int, J: int, candidates=None) -> list[int]:
    """The ``J`` nearest stations to ``target`` in the horizontal plane."""
    pool = np.arange(len(stations)) if candidates is None else np.asarray(candidates, dtype=int)
    pool = pool[pool != target]
    xy = stations.coords[:, :2]
    dist = np.linalg.norm(xy[pool] - xy[target], axis=1)
    order = np.argsort(dist, kind="stable")
    return [int(i) for i in pool[order[:J]]]


def qq_discrepancy(series, params: GevParams) -> float:
    """Mean absolute gap between sorted data and fitted quantiles at k/(p+1)."""
    x = np.sort(np.asarray(series, dtype=float))
    q = np.arange(1, x.size + 1) / (x.size + 1)
    return float(np.mean(np.abs(x - gev_quantile(q, params))))


@dataclass(frozen=True)
class MarginFit:
    station_id: str
    params: GevParams
    J: int
    qq: float


def fit_margins(
    data: MaximaMatrix,
    stations: StationSet,
    j_candidates=J_CANDIDATES,
    xi_bounds=XI_BOUNDS,
    candidates=None,
    seed=0,
) -> list[MarginFit]:
    """Fit every station, choosing the neighbourhood size by qq discrepancy.

    ``candidates`` optionally restricts which stations may serve as
    neighbours (the hold-out experiment uses training stations only).
    """
    out = []
    pos = {sid: i for i, sid in enumerate(stations.ids)}
    cols = [pos[s] for s in data.station_ids]
    sub = stations.subset(cols)
    for i, sid in enumerate(data.station_ids):
        best = None
        for J in j_candidates:
            pool = candidates if candidates is None else [c for c in candidates if c != i]
            available = len(sub) - 1 if pool is None else len(pool)
            if J > available:
                continue
            nb = nearest_neighbors(sub, i, J, pool)
            try:
                params = fit_gev_pooled(i, nb, data, xi_bounds=xi_bounds, seed=seed)
            except NonConvergence:
                log.warning("station %s: pooled fit with J=%d did not converge", sid, J)
                continue
            score = qq_discrepancy(data.values[:, i], params)
            if best is None or score < best.qq:
                best = MarginFit(sid, params, J, score)
        if best is None:
            raise NonConvergence(f"no margin fit converged for station {sid}")
        out.append(best)
    return out


def to_frechet(data: MaximaMatrix, params) -> FrechetMatrix:
    """Map each column through u -> -1/log F(u) with F clamped to [1e-12, 1 - 1e-12]."""
    params = [p.params if isinstance(p, MarginFit) else p for p in params]
    if len(params) != data.n:
        raise ValidationError(f"{len(params)} parameter sets for {data.n} stations")
    out = np.empty_like(data.values)
    upper = -np.log1p(-CDF_CLAMP)
    lower = -np.log(CDF_CLAMP)
    for i, par in enumerate(params):
        t = _reduced(data.values[:, i], par)
        out[:, i] = 1.0 / np.clip(t, upper, lower)
    return FrechetMatrix(out, data.station_ids, data.years)
