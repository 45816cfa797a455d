import mpmath
import numpy as np

from brmds.data import StationSet


def random_stations(n, seed=0, extent=100.0):
    r = np.random.default_rng(seed)
    coords = np.column_stack([r.uniform(0, extent, n), r.uniform(0, extent, n), r.uniform(200, 1500, n)])
    return StationSet([f"S{i:03d}" for i in range(n)], coords)


def mp_cdf(zi, zj, nu):
    """Joint CDF exp(-V) written out independently of the package, for mpmath numbers."""
    L = mpmath.log(zj) - mpmath.log(zi)
    return mpmath.exp(-(mpmath.ncdf(nu + L / (2 * nu)) / zi + mpmath.ncdf(nu - L / (2 * nu)) / zj))


def mixed_difference(zi, zj, nu, rel=1e-9):
    """Mixed finite difference of the CDF, raising the working precision until it settles.

    Far in the tails the density is many orders below the CDF, so a fixed
    precision loses every digit in the cancellation.
    """
    prev, dps = None, 30
    while dps <= 960:
        with mpmath.workdps(dps):
            f = lambda a, b: mp_cdf(a, b, mpmath.mpf(nu))
            val = mpmath.diff(f, (mpmath.mpf(zi), mpmath.mpf(zj)), (1, 1))
        if prev is not None and val != 0 and abs(val - prev) <= rel * abs(val):
            return float(val)
        prev, dps = val, dps * 2
    raise ArithmeticError(f"finite difference did not settle at ({zi}, {zj}, {nu})")


ACCEPTANCE = {}


def record(number: int, ok: bool, detail: str):
    """Store one acceptance outcome; printed in the terminal summary."""
    ACCEPTANCE[number] = (bool(ok), detail)
    assert ok, f"criterion {number}: {detail}"
