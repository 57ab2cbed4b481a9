"""Seeded generators for the simulation settings.

* S1a/S1b: 250 five-dimensional equicorrelated (0.5) normals; S1b adds
  (0, 1, -1, 3, -3) to the second half. S1a'/S1b' are the 300-dimensional
  versions, with the shift repeated over every block of five coordinates.
* S2: three groups of 200 four-dimensional non-normal vectors (power
  method, skewness 1.75, excess kurtosis 3.75, correlation 0.6).
* S3: two groups of 250 bivariate vectors with i.i.d. exponential(1)
  coordinates, the second group translated.
"""
from __future__ import annotations

import numpy as np
from scipy import optimize

from .cluster import Partition
from .dataset import DataMatrix

S1_SHIFT = (0.0, 1.0, -1.0, 3.0, -3.0)
SETTINGS = ("S1a", "S1b", "S1a'", "S1b'", "S2", "S3")

S2_DEFAULT_SEPARATION = 5.5


class InfeasibleMomentsError(ValueError):
    """No power-method polynomial attains the requested moments."""


def equicorrelation(d: int, rho: float) -> np.ndarray:
    if d > 1 and not -1.0 / (d - 1) < rho < 1:
        raise np.linalg.LinAlgError(
            f"equicorrelation {rho} is not positive definite in dimension {d}"
        )
    c = np.full((d, d), float(rho))
    np.fill_diagonal(c, 1.0)
    return c


def correlated_normals(n: int, corr: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    chol = np.linalg.cholesky(corr)
    return rng.standard_normal((n, corr.shape[0])) @ chol.T


def gen_mvn(n: int, d: int, off_diag_corr: float = 0.0, mean=None, seed=0) -> DataMatrix:
    rng = np.random.default_rng(seed)
    x = correlated_normals(n, equicorrelation(d, off_diag_corr), rng)
    if mean is not None:
        x = x + np.asarray(mean, dtype=float)
    return DataMatrix(x)


def _truth(sizes) -> Partition:
    return Partition(np.repeat(np.arange(len(sizes)), sizes), len(sizes))


def gen_s1(case: str, seed=0, n: int = 250, corr: float = 0.5):
    """Return (data, truth) for case 'a', 'b', "a'" or "b'"."""
    case = case.removeprefix("S1")
    if case not in ("a", "b", "a'", "b'"):
        raise ValueError(f"unknown S1 case {case!r}")
    d = 300 if case.endswith("'") else 5
    x = gen_mvn(n, d, corr, seed=seed).values.copy()
    if case.startswith("a"):
        return DataMatrix(x), _truth([n])
    half = n - n // 2
    x[half:] += np.tile(S1_SHIFT, d // len(S1_SHIFT))
    return DataMatrix(x), _truth([half, n - half])


def fleishman_moments(b: float, c: float, d: float) -> tuple[float, float, float]:
    """(variance, skewness, excess kurtosis) of -c + bZ + cZ^2 + dZ^3, Z standard normal."""
    var = b * b + 6 * b * d + 2 * c * c + 15 * d * d
    skew = 2 * c * (b * b + 24 * b * d + 105 * d * d + 2)
    kurt = 24 * (b * d + c * c * (1 + b * b + 28 * b * d)
                 + d * d * (12 + 48 * b * d + 141 * c * c + 225 * d * d))
    return var, skew, kurt


def fleishman_coefficients(skew: float, excess_kurtosis: float, tol: float = 1e-10):
    """Coefficients (a, b, c, d), a = -c, of the standardized power-method cubic."""
    if excess_kurtosis < skew * skew - 2:
        raise InfeasibleMomentsError(
            f"excess kurtosis {excess_kurtosis} is below the bound skew^2 - 2 = {skew * skew - 2:.4f}"
        )
    if skew == 0 and excess_kurtosis == 0:
        return 0.0, 1.0, 0.0, 0.0

    def residual(x):
        var, s, k = fleishman_moments(*x)
        return [var - 1, s - skew, k - excess_kurtosis]

    best = None
    for start in ((1.0, 0.0, 0.0), (0.9, 0.4, 0.0), (0.8, 0.1, 0.1), (1.2, 0.1, -0.1)):
        sol = optimize.root(residual, start, method="hybr", options={"xtol": 1e-14})
        err = np.max(np.abs(residual(sol.x)))
        if err < tol and sol.x[0] > 0:
            b, c, d = (float(v) for v in sol.x)
            return -c, b, c, d
        if best is None or err < best:
            best = err
    raise InfeasibleMomentsError(
        f"no power-method solution for skew={skew}, excess kurtosis={excess_kurtosis} "
        f"(best residual {best:.2e})"
    )


def intermediate_correlation(target: float, coeffs) -> float:
    """Normal correlation that maps to ``target`` after the cubic transform."""
    _, b, c, d = coeffs

    def f(r):
        return r * (b * b + 6 * b * d + 9 * d * d) + 2 * c * c * r**2 + 6 * d * d * r**3 - target

    lo, hi = f(-1.0), f(1.0)
    if lo > 0 or hi < 0:
        raise ValueError(f"correlation {target} is unattainable with these marginals")
    r = optimize.brentq(f, -1.0, 1.0, xtol=1e-14)
    if not -1 < r < 1:
        raise ValueError(f"intermediate correlation {r} is outside (-1, 1)")
    return r


def gen_vale_maurelli(n: int, d: int, off_diag_corr: float, skew: float,
                      kurtosis: float, seed=0) -> DataMatrix:
    """Correlated non-normal vectors; ``kurtosis`` is excess kurtosis."""
    coeffs = fleishman_coefficients(skew, kurtosis)
    a, b, c, dd = coeffs
    r = intermediate_correlation(off_diag_corr, coeffs)
    z = correlated_normals(n, equicorrelation(d, r), np.random.default_rng(seed))
    return DataMatrix(a + b * z + c * z**2 + dd * z**3)


def s2_centers(separation: float = S2_DEFAULT_SEPARATION, d: int = 4) -> np.ndarray:
    """Three collinear centers spaced ``separation`` apart along (1, ..., 1) / sqrt(d).

    That is also the direction of the marginals' common right tail, so
    neighbouring groups overlap heavily.
    """
    direction = np.ones(d) / np.sqrt(d)
    return np.outer(np.arange(3), separation * direction)


def gen_s2(seed=0, separation: float = S2_DEFAULT_SEPARATION, n_per: int = 200,
           corr: float = 0.6, skew: float = 1.75, kurtosis: float = 3.75):
    centers = s2_centers(separation)
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**63, size=len(centers))
    x = np.vstack([
        gen_vale_maurelli(n_per, centers.shape[1], corr, skew, kurtosis, seed=int(s)).values + ctr
        for s, ctr in zip(seeds, centers)
    ])
    return DataMatrix(x), _truth([n_per] * len(centers))


def gen_s3(n_per: int, shift, seed=0, rate: float = 1.0):
    if n_per < 1:
        raise ValueError("n_per must be >= 1")
    rng = np.random.default_rng(seed)
    shift = np.asarray(shift, dtype=float)
    x = rng.exponential(1.0 / rate, size=(2 * n_per, len(shift)))
    x[n_per:] += shift
    return DataMatrix(x), _truth([n_per, n_per])


def generate(setting: str, seed=0, **options):
    """Dispatch on a setting name; returns (data, truth)."""
    if setting.startswith("S1"):
        return gen_s1(setting[2:], seed=seed, **options)
    if setting == "S2":
        return gen_s2(seed=seed, **options)
    if setting == "S3":
        options.setdefault("n_per", 250)
        return gen_s3(seed=seed, **options)
    raise ValueError(f"unknown setting {setting!r}; choose from {SETTINGS}")
