"""Information analysis and stationarity testing.

Autocovariances use the biased divisor-n estimator throughout, which keeps
every partial autocorrelation inside [-1, 1] and makes the Durbin-Levinson
recursion well behaved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import (
    DegenerateSeries,
    LagTooLarge,
    SeriesTooShort,
    SingularRegression,
)
from .series import TimeSeries

ADF_CRITICAL_VALUES = {"1%": -3.43, "5%": -2.86, "10%": -2.57}


@dataclass(frozen=True)
class AcfResult:
    lags: list[int]  # 0..h
    rho: list[float]
    n: int

    @property
    def ci_halfwidth(self) -> float:
        return 1.96 / math.sqrt(self.n)


@dataclass(frozen=True)
class PacfResult:
    lags: list[int]  # 1..h
    phi_kk: list[float]
    n: int


@dataclass(frozen=True)
class TestResult:
    test: str  # term curie
    statistic: float
    reject_at_5pct: bool
    p_value: float | None = None
    critical_values: dict | None = None
    df_or_lags: int = 0


@dataclass(frozen=True)
class Decomposition:
    trend: TimeSeries  # NaN where the centered window does not fit
    seasonal: TimeSeries
    remainder: TimeSeries
    period: int
    seasonal_strength: float


def default_lag(n: int) -> int:
    return max(1, int(math.floor(10 * math.log10(n))))


def _autocorrelations(x: np.ndarray, h: int) -> np.ndarray:
    n = len(x)
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0:
        raise DegenerateSeries("zero-variance series")
    return np.array([float(xc[: n - k] @ xc[k:]) / denom for k in range(h + 1)])


def acf(ts: TimeSeries, max_lag: int | None = None) -> AcfResult:
    ts.require_complete()
    n = len(ts)
    h = default_lag(n) if max_lag is None else max_lag
    if h >= n:
        raise LagTooLarge(f"max lag {h} >= series length {n}")
    rho = _autocorrelations(ts.values, h)
    return AcfResult(list(range(h + 1)), [float(r) for r in rho], n)


def durbin_levinson(rho: np.ndarray):
    """Solve the Yule-Walker equations recursively.

    Returns (phi, pacf, sigma2_ratio): the AR coefficients at the final
    order, the partial autocorrelations phi_kk for k = 1..h, and the
    prediction-error variance as a fraction of the lag-0 autocovariance.
    """
    h = len(rho) - 1
    pacf_vals = np.zeros(h)
    phi = np.zeros(0)
    sigma2 = 1.0
    for k in range(1, h + 1):
        num = rho[k] - (phi @ rho[1:k][::-1] if k > 1 else 0.0)
        if sigma2 <= 0:
            raise DegenerateSeries("Durbin-Levinson variance collapsed")
        a = num / sigma2
        pacf_vals[k - 1] = a
        phi = np.concatenate([phi - a * phi[::-1], [a]])
        sigma2 *= 1.0 - a * a
    return phi, pacf_vals, sigma2


def pacf(ts: TimeSeries, max_lag: int | None = None) -> PacfResult:
    ts.require_complete()
    n = len(ts)
    h = default_lag(n) if max_lag is None else max_lag
    if h < 1:
        raise ValueError("pacf needs max_lag >= 1")
    if h >= n:
        raise LagTooLarge(f"max lag {h} >= series length {n}")
    rho = _autocorrelations(ts.values, h)
    _, phi_kk, _ = durbin_levinson(rho)
    return PacfResult(list(range(1, h + 1)), [float(v) for v in phi_kk], n)


def lag_study(ts: TimeSeries, max_lag: int | None = None) -> list[dict]:
    """Per-lag autocorrelation with a 95% white-noise significance flag."""
    if max_lag == 0:
        return []
    res = acf(ts, max_lag)
    ci = res.ci_halfwidth
    return [
        {"lag": k, "rho": res.rho[k], "significant": bool(abs(res.rho[k]) > ci)}
        for k in res.lags[1:]
    ]


def decompose(ts: TimeSeries, period: int) -> Decomposition:
    """Classical additive decomposition with a centered moving-average trend."""
    ts.require_complete()
    n = len(ts)
    if period < 1:
        raise ValueError("period must be >= 1")
    if period > 1 and n < 2 * period:
        raise SeriesTooShort(f"need at least {2 * period} points for period {period}")
    x = ts.values

    trend = np.full(n, np.nan)
    if period == 1:
        trend[:] = x
        seasonal = np.zeros(n)
    else:
        if period % 2 == 0:
            # 2 x period convention: half weight on the two outermost points
            w = np.full(period + 1, 1.0 / period)
            w[0] = w[-1] = 0.5 / period
            half = period // 2
        else:
            w = np.full(period, 1.0 / period)
            half = (period - 1) // 2
        core = np.convolve(x, w, mode="valid")
        trend[half: half + len(core)] = core

        detrended = x - trend
        means = np.array([
            np.nanmean(detrended[phase::period]) for phase in range(period)
        ])
        means -= means.mean()  # seasonal effects sum to zero over one period
        seasonal = np.resize(means, n)

    remainder = x - trend - seasonal
    ok = ~np.isnan(trend)
    var_rem = float(np.var(remainder[ok]))
    var_sr = float(np.var((seasonal + remainder)[ok]))
    strength = max(0.0, 1.0 - var_rem / var_sr) if var_sr > 0 else 0.0
    return Decomposition(
        ts.replace(trend), ts.replace(seasonal), ts.replace(remainder),
        period, strength,
    )


def _ols(X: np.ndarray, y: np.ndarray):
    """Least squares with coefficient standard errors."""
    n, k = X.shape
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < k:
        raise SingularRegression("regressor matrix is rank deficient")
    resid = y - X @ beta
    dof = n - k
    if dof <= 0:
        raise SingularRegression("no residual degrees of freedom")
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return beta, np.sqrt(np.diag(cov))


def adf_test(ts: TimeSeries, lag_order: int | None = None) -> TestResult:
    """Augmented Dickey-Fuller unit-root test with constant, no trend.

    Reports the asymptotic constant-case critical values rather than a
    p-value; reject_at_5pct compares the statistic with the 5% value.
    """
    ts.require_complete()
    x = ts.values
    n = len(x)
    p = int(math.floor((n - 1) ** (1.0 / 3.0))) if lag_order is None else lag_order
    if n < p + 10:
        raise SeriesTooShort(f"need at least {p + 10} points for lag order {p}")
    dx = np.diff(x)
    rows = len(dx) - p
    X = np.empty((rows, 2 + p))
    X[:, 0] = 1.0
    X[:, 1] = x[p:-1]
    for j in range(1, p + 1):
        X[:, 1 + j] = dx[p - j: p - j + rows]
    y = dx[p:]
    beta, se = _ols(X, y)
    stat = float(beta[1] / se[1])
    return TestResult(
        test="tswf:DickeyFuller",
        statistic=stat,
        reject_at_5pct=stat < ADF_CRITICAL_VALUES["5%"],
        critical_values=dict(ADF_CRITICAL_VALUES),
        df_or_lags=p,
    )


def jarque_bera(ts: TimeSeries) -> TestResult:
    """Normality test from sample skewness and excess kurtosis (divisor n)."""
    ts.require_complete()
    x = ts.values
    n = len(x)
    if n < 4:
        raise SeriesTooShort("Jarque-Bera needs at least 4 points")
    c = x - x.mean()
    m2 = float(np.mean(c**2))
    if m2 == 0:
        raise DegenerateSeries("zero-variance series")
    skew = float(np.mean(c**3)) / m2**1.5
    kurt = float(np.mean(c**4)) / m2**2 - 3.0
    jb = n / 6.0 * (skew**2 + kurt**2 / 4.0)
    p = math.exp(-jb / 2.0)  # chi-square survival with 2 df is exact
    return TestResult(
        test="tswf:JarqueBera", statistic=jb, p_value=p,
        reject_at_5pct=p < 0.05, df_or_lags=2,
    )


def chi2_cdf(x: float, df: int) -> float:
    """Regularized lower incomplete gamma P(df/2, x/2)."""
    if x <= 0:
        return 0.0
    return float(special.gammainc(df / 2.0, x / 2.0))


def ljung_box(ts: TimeSeries, h: int | None = None) -> TestResult:
    """Portmanteau test that autocorrelations up to lag h are jointly zero."""
    ts.require_complete()
    n = len(ts)
    if h is None:
        h = max(1, min(10, n // 5))
    if h < 1:
        raise ValueError("ljung_box needs h >= 1")
    rho = _autocorrelations(ts.values, h)
    q = n * (n + 2.0) * sum(rho[k] ** 2 / (n - k) for k in range(1, h + 1))
    p = 1.0 - chi2_cdf(q, h)
    return TestResult(
        test="tswf:JungBox", statistic=float(q), p_value=p,
        reject_at_5pct=p < 0.05, df_or_lags=h,
    )


def runs_test(ts: TimeSeries) -> TestResult:
    """Wald-Wolfowitz runs test above/below the median (ties dropped)."""
    ts.require_complete()
    x = ts.values
    if len(x) < 10:
        raise SeriesTooShort("runs test needs at least 10 points")
    med = float(np.median(x))
    signs = np.sign(x - med)
    signs = signs[signs != 0]
    n1 = int((signs > 0).sum())
    n2 = int((signs < 0).sum())
    if n1 == 0 or n2 == 0:
        raise DegenerateSeries("all values on one side of the median")
    runs = 1 + int((signs[1:] != signs[:-1]).sum())
    n = n1 + n2
    mu = 2.0 * n1 * n2 / n + 1.0
    var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n**2 * (n - 1.0))
    z = (runs - mu) / math.sqrt(var)
    p = 2.0 * (1.0 - _normal_cdf(abs(z)))
    return TestResult(
        test="tswf:RunsTest", statistic=z, p_value=p,
        reject_at_5pct=p < 0.05, df_or_lags=runs,
    )


def _normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))
