"""Predictive models: AR, ARIMA, exponential smoothing and linear SVR.

All fitting is deterministic: no random initialization anywhere, so the same
series and parameters always produce the same coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .analysis import _autocorrelations, durbin_levinson
from .errors import (
    DegenerateSeries,
    NonPositiveValue,
    SeriesTooShort,
    SingularSystem,
    UnconvergedModel,
)
from .series import (
    TimeSeries,
    difference_with_state,
    inverse_transform,
    transform,
    undifference,
)


@dataclass(frozen=True)
class ModelFit:
    model: str  # term curie
    params_resolved: dict
    coefficients: dict
    fitted: np.ndarray
    residuals: np.ndarray
    training_loss: float
    converged: bool
    state: dict = field(default_factory=dict)  # model internals for forecasting
    warnings: tuple = ()


@dataclass(frozen=True)
class Forecast:
    model: str
    origin: int  # index of the last training point
    horizon: int
    point: list[float]


# ---------------------------------------------------------------- AR


def fit_ar(ts: TimeSeries, order: int | None = None) -> ModelFit:
    """Yule-Walker AR fit; order selected by AIC when not given."""
    ts.require_complete()
    x = ts.values
    n = len(x)
    if order is not None and n <= order + 1:
        raise SeriesTooShort(f"need more than {order + 1} points for AR({order})")

    if order is None:
        p_max = min(10, n // 10)
        if n <= p_max + 1:
            raise SeriesTooShort("series too short for automatic order selection")
        rho = _autocorrelations(x, p_max) if p_max > 0 else np.array([1.0])
        c0 = float(np.var(x))
        best_aic, order = n * math.log(c0) if c0 > 0 else -math.inf, 0
        sigma2 = 1.0
        pacf_all = np.zeros(0) if p_max == 0 else durbin_levinson(rho)[1]
        for p in range(1, p_max + 1):
            sigma2 *= 1.0 - pacf_all[p - 1] ** 2
            if sigma2 <= 0:
                break
            aic = n * math.log(c0 * sigma2) + 2 * p
            if aic < best_aic:
                best_aic, order = aic, p

    mu = float(x.mean())
    if order == 0:
        phi = np.zeros(0)
    else:
        rho = _autocorrelations(x, order)
        phi, _, _ = durbin_levinson(rho)
        if not np.all(np.isfinite(phi)):
            raise SingularSystem("Yule-Walker solve failed")
    intercept = mu * (1.0 - phi.sum())

    fitted = x.copy()
    for t in range(order, n):
        fitted[t] = intercept + sum(phi[i] * x[t - 1 - i] for i in range(order))
    residuals = x - fitted
    coeffs = {f"phi.{i + 1}": float(phi[i]) for i in range(order)}
    coeffs["intercept"] = float(intercept)
    return ModelFit(
        model="tswf:AR",
        params_resolved={"order": order},
        coefficients=coeffs,
        fitted=fitted,
        residuals=residuals,
        training_loss=float(residuals @ residuals),
        converged=True,
        state={"phi": phi, "mu": mu, "tail": x[n - order:] if order else np.zeros(0)},
    )


# ---------------------------------------------------------------- ARIMA


def _expand_poly(coefs: np.ndarray, seasonal: np.ndarray, period: int) -> np.ndarray:
    """Multiply (1 - sum a_i B^i)(1 - sum A_j B^(j*s)), return lag coefficients.

    The returned array c satisfies poly(B) = 1 - sum c_k B^k.
    """
    a = np.concatenate([[1.0], -np.asarray(coefs, dtype=float)])
    b = np.ones(1)
    if len(seasonal):
        b = np.zeros(len(seasonal) * period + 1)
        b[0] = 1.0
        for j, cj in enumerate(seasonal, start=1):
            b[j * period] = -cj
    full = np.convolve(a, b)
    return -full[1:]


def _roots_ok(lag_coefs: np.ndarray) -> bool:
    """True when 1 - sum c_k z^k has all roots outside the closed unit disk."""
    coefs = np.trim_zeros(lag_coefs, "b")
    if len(coefs) == 0:
        return True
    poly = np.concatenate([[1.0], -coefs])  # coefficients in increasing power
    roots = np.roots(poly[::-1])
    return bool(np.all(np.abs(roots) > 1.0))


def _css_errors(w: np.ndarray, ar: np.ndarray, ma: np.ndarray, c: float) -> np.ndarray:
    """One-step errors of the ARMA recursion with zero pre-sample values."""
    n = len(w)
    p, q = len(ar), len(ma)
    e = np.zeros(n)
    for t in range(n):
        acc = w[t] - c
        for i in range(min(p, t)):
            acc -= ar[i] * w[t - 1 - i]
        for j in range(min(q, t)):
            acc -= ma[j] * e[t - 1 - j]
        e[t] = acc
    return e


def _hannan_rissanen_start(w: np.ndarray, p: int, q: int, period: int,
                           ps: int, qs: int) -> np.ndarray:
    """Initial factor coefficients from a long-AR residual regression."""
    n = len(w)
    wc = w - w.mean()
    long_p = min(max(10, 2 * (p + q + (ps + qs) * period)), n // 2)
    e = wc.copy()
    if long_p >= 1:
        X = np.column_stack([np.roll(wc, k)[long_p:] for k in range(1, long_p + 1)])
        y = wc[long_p:]
        beta, *_ = np.linalg.lstsq(X, y, rcond=None)
        e = np.zeros(n)
        e[long_p:] = y - X @ beta
    lags = ([("ar", i + 1) for i in range(p)]
            + [("sar", (i + 1) * period) for i in range(ps)]
            + [("ma", j + 1) for j in range(q)]
            + [("sma", (j + 1) * period) for j in range(qs)])
    m = max((lag for _, lag in lags), default=0)
    if m == 0 or n - m < len(lags) + 2:
        return np.zeros(len(lags))
    cols = []
    for kind, lag in lags:
        src = wc if kind in ("ar", "sar") else e
        cols.append(src[m - lag: n - lag])
    X = np.column_stack(cols)
    y = wc[m:]
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    return np.clip(beta, -0.8, 0.8)


def fit_arima(ts: TimeSeries, order=(1, 0, 0), seasonal=(0, 0, 0),
              period: int | None = None, lam: float | None = None) -> ModelFit:
    """Conditional-sum-of-squares ARIMA with multiplicative seasonal factors.

    Pipeline: optional power transform, then differencing, then a Nelder-Mead
    minimization of the one-step squared errors. Simplex points whose AR or MA
    polynomial has a root inside the closed unit disk are rejected outright.
    """
    ts.require_complete()
    p, d, q = (int(v) for v in order)
    ps, ds, qs = (int(v) for v in seasonal)
    if min(p, d, q, ps, ds, qs) < 0:
        raise ValueError("ARIMA orders must be nonnegative")
    warnings = []
    s = period if period is not None else (ts.frequency or 1)
    if s == 1 and (ps or ds or qs):
        warnings.append(
            "seasonal orders given but no seasonal period known; "
            "using period 1, so seasonal terms merge into the regular lags")

    work = ts
    if lam is not None:
        if lam <= 0 and (ts.values <= 0).any():
            raise NonPositiveValue("power transform needs positive data")
        work = transform(ts, lam)
    w, heads = difference_with_state(work, d, ds, s)
    n_eff = len(w)
    if n_eff < 10 + p + q + ps + qs:
        raise SeriesTooShort("too few observations after differencing")

    use_const = (d + ds == 0)
    n_params = p + ps + q + qs

    def unpack(theta):
        i = 0
        ar_f = theta[i:i + p]; i += p
        sar_f = theta[i:i + ps]; i += ps
        ma_f = theta[i:i + q]; i += q
        sma_f = theta[i:i + qs]; i += qs
        c = theta[i] if use_const else 0.0
        ar = _expand_poly(ar_f, sar_f, s)
        # the MA factors enter with plus signs: (1 + sum b_j B^j)(1 + ...)
        ma = -_expand_poly(-np.asarray(ma_f), -np.asarray(sma_f), s)
        return ar, ma, c

    def objective(theta):
        ar, ma, c = unpack(theta)
        if not (_roots_ok(ar) and _roots_ok(-ma)):
            return math.inf
        e = _css_errors(w, ar, ma, c)
        return float(e @ e)

    start_coefs = _hannan_rissanen_start(w, p, q, s, ps, qs)
    start = np.concatenate([start_coefs, [w.mean()]]) if use_const else start_coefs
    if objective(start) == math.inf:
        start = np.concatenate(
            [np.full(n_params, 0.05), [w.mean()]]) if use_const else np.full(n_params, 0.05)

    converged = True
    if len(start) == 0:
        theta_hat = start
    else:
        res = optimize.minimize(
            objective, start, method="Nelder-Mead",
            options={"maxiter": 2000, "xatol": 1e-8, "fatol": 1e-8})
        theta_hat = res.x
        converged = bool(res.success) and math.isfinite(res.fun)
        if not converged:
            warnings.append("CSS optimization did not converge")

    ar, ma, c = unpack(theta_hat)
    e = _css_errors(w, ar, ma, c)
    fitted_w = w - e

    i = 0
    coeffs = {}
    for k in range(p):
        coeffs[f"phi.{k + 1}"] = float(theta_hat[i]); i += 1
    for k in range(ps):
        coeffs[f"sphi.{k + 1}"] = float(theta_hat[i]); i += 1
    for k in range(q):
        coeffs[f"theta.{k + 1}"] = float(theta_hat[i]); i += 1
    for k in range(qs):
        coeffs[f"stheta.{k + 1}"] = float(theta_hat[i]); i += 1
    if use_const:
        coeffs["intercept"] = float(c)

    return ModelFit(
        model="tswf:ARIMA",
        params_resolved={"order": [p, d, q], "seasonal": [ps, ds, qs],
                         "lambda": lam, "period": s},
        coefficients=coeffs,
        fitted=fitted_w,
        residuals=e,
        training_loss=float(e @ e),
        converged=converged,
        state={"w": w, "e": e, "ar": ar, "ma": ma, "c": c, "heads": heads,
               "d": d, "ds": ds, "period": s, "lam": lam,
               "orig": work.values.copy()},
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------- ETS


def _ses_sse(x: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    level = np.full(len(alphas), x[0])
    sse = np.zeros(len(alphas))
    for t in range(1, len(x)):
        err = x[t] - level
        sse += err * err
        level += alphas * err
    return sse


def _holt_sse(x: np.ndarray, alphas: np.ndarray, betas: np.ndarray):
    level = np.full(len(alphas), x[0])
    trend = np.full(len(alphas), x[1] - x[0])
    sse = np.zeros(len(alphas))
    for t in range(1, len(x)):
        pred = level + trend
        err = x[t] - pred
        sse += err * err
        new_level = pred + alphas * err
        trend += alphas * betas * err
        level = new_level
    return sse


def fit_ets(ts: TimeSeries, variant: str = "simple") -> ModelFit:
    """Exponential smoothing with grid-searched smoothing weights."""
    ts.require_complete()
    x = ts.values
    n = len(x)
    if n < 10:
        raise SeriesTooShort("exponential smoothing needs at least 10 points")
    grid = np.arange(0.01, 1.0, 0.01)

    if variant == "simple":
        sse = _ses_sse(x, grid)
        alpha = float(grid[int(np.argmin(sse))])
        level = x[0]
        fitted = np.empty(n)
        fitted[0] = x[0]
        for t in range(1, n):
            fitted[t] = level
            level += alpha * (x[t] - level)
        coeffs = {"alpha": alpha}
        state = {"variant": "simple", "level": float(level)}
        params = {"variant": "simple"}
    elif variant == "holt":
        A, B = np.meshgrid(grid, grid, indexing="ij")
        sse = _holt_sse(x, A.ravel(), B.ravel())
        k = int(np.argmin(sse))
        alpha, beta = float(A.ravel()[k]), float(B.ravel()[k])
        level, trend = x[0], x[1] - x[0]
        fitted = np.empty(n)
        fitted[0] = x[0]
        for t in range(1, n):
            pred = level + trend
            fitted[t] = pred
            err = x[t] - pred
            level = pred + alpha * err
            trend += alpha * beta * err
        coeffs = {"alpha": alpha, "beta": beta}
        state = {"variant": "holt", "level": float(level), "trend": float(trend)}
        params = {"variant": "holt"}
    else:
        raise ValueError(f"unknown smoothing variant {variant!r}")

    residuals = x - fitted
    return ModelFit(
        model="tswf:ETS", params_resolved=params, coefficients=coeffs,
        fitted=fitted, residuals=residuals,
        training_loss=float(residuals @ residuals), converged=True, state=state,
    )


# ---------------------------------------------------------------- SVR


def fit_svr(ts: TimeSeries, embedding: int = 5, epsilon: float = 0.1,
            c: float = 1.0, epochs: int = 200) -> ModelFit:
    """Linear epsilon-insensitive SVR on the lag-embedded series.

    Deterministic primal subgradient descent with learning rate 1/(c*t) and
    fixed pass order; inputs and target are z-scored before training.
    """
    ts.require_complete()
    x = ts.values
    n = len(x)
    p = embedding
    if n <= p + 10:
        raise SeriesTooShort(f"need more than {p + 10} points for embedding {p}")

    X = np.column_stack([x[p - 1 - i: n - 1 - i] for i in range(p)])  # x[t-1]..x[t-p]
    y = x[p:]
    x_mean, x_std = X.mean(axis=0), X.std(axis=0, ddof=1)
    x_std[x_std == 0] = 1.0
    y_mean, y_std = y.mean(), y.std(ddof=1)
    if y_std == 0:
        y_std = 1.0
    Xs = (X - x_mean) / x_std
    ys = (y - y_mean) / y_std

    m = len(ys)
    w = np.zeros(p)
    b = 0.0
    # t counts full passes: one eta per pass keeps the effective step on the
    # summed primal at the 1/t rate its strong convexity calls for
    for t in range(1, epochs + 1):
        eta = 1.0 / (c * t)
        for i in range(m):
            err = ys[i] - (w @ Xs[i] + b)
            g_w = w / m
            g_b = 0.0
            if abs(err) > epsilon:
                g_w = g_w - c * math.copysign(1.0, err) * Xs[i]
                g_b = -c * math.copysign(1.0, err)
            w -= eta * g_w
            b -= eta * g_b

    pred_s = Xs @ w + b
    slack = np.maximum(0.0, np.abs(ys - pred_s) - epsilon)
    loss = c * float(slack.sum())

    fitted = x.copy()
    fitted[p:] = pred_s * y_std + y_mean
    residuals = x - fitted
    coeffs = {f"w.{i + 1}": float(w[i]) for i in range(p)}
    coeffs["intercept"] = float(b)
    return ModelFit(
        model="tswf:SVM",
        params_resolved={"embedding": p, "epsilon": epsilon, "C": c, "epochs": epochs},
        coefficients=coeffs,
        fitted=fitted,
        residuals=residuals,
        training_loss=loss,
        converged=True,
        state={"w": w, "b": b, "x_mean": x_mean, "x_std": x_std,
               "y_mean": y_mean, "y_std": y_std, "tail": x[n - p:], "p": p},
    )


# ---------------------------------------------------------------- forecasting


def forecast(fit: ModelFit, horizon: int, allow_unconverged: bool = False) -> Forecast:
    """h-step point forecast on the original data scale."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if not fit.converged and not allow_unconverged:
        raise UnconvergedModel(f"{fit.model} fit did not converge")
    st = fit.state

    if fit.model == "tswf:AR":
        phi, mu, tail = st["phi"], st["mu"], st["tail"]
        p = len(phi)
        hist = list(tail - mu)
        out = []
        for _ in range(horizon):
            val = sum(phi[i] * hist[-1 - i] for i in range(p)) if p else 0.0
            hist.append(val)
            out.append(val + mu)
        origin = len(fit.fitted) - 1
    elif fit.model == "tswf:ARIMA":
        w, e, ar, ma, c = st["w"], st["e"], st["ar"], st["ma"], st["c"]
        p, q = len(ar), len(ma)
        w_hist = list(w)
        e_hist = list(e)
        new_w = []
        for _ in range(horizon):
            acc = c
            for i in range(p):
                acc += ar[i] * (w_hist[-1 - i] if i < len(w_hist) else 0.0)
            for j in range(q):
                acc += ma[j] * (e_hist[-1 - j] if j < len(e_hist) else 0.0)
            w_hist.append(acc)
            e_hist.append(0.0)  # future shocks at their mean
            new_w.append(acc)
        # integrate forward through (1-B)^d (1-B^s)^D without re-summing the
        # training series, so a pure random walk repeats the last value exactly
        diff_poly = np.ones(1)
        for _ in range(st["d"]):
            diff_poly = np.convolve(diff_poly, [1.0, -1.0])
        for _ in range(st["ds"]):
            seas = np.zeros(st["period"] + 1)
            seas[0], seas[-1] = 1.0, -1.0
            diff_poly = np.convolve(diff_poly, seas)
        hist = list(st["orig"])
        for wf in new_w:
            val = wf - sum(diff_poly[k] * hist[-k]
                           for k in range(1, len(diff_poly)))
            hist.append(val)
        point = np.array(hist[-horizon:])
        if st["lam"] is not None:
            point = inverse_transform(point, st["lam"])
        out = list(point)
        origin = len(st["orig"]) - 1
    elif fit.model == "tswf:ETS":
        if st["variant"] == "simple":
            out = [st["level"]] * horizon
        else:
            out = [st["level"] + (k + 1) * st["trend"] for k in range(horizon)]
        origin = len(fit.fitted) - 1
    elif fit.model == "tswf:SVM":
        w, b, p = st["w"], st["b"], st["p"]
        hist = list(st["tail"])
        out = []
        for _ in range(horizon):
            lags = np.array([hist[-1 - i] for i in range(p)])
            zs = (lags - st["x_mean"]) / st["x_std"]
            val = float((zs @ w + b) * st["y_std"] + st["y_mean"])
            hist.append(val)
            out.append(val)
        origin = len(fit.fitted) - 1
    else:
        raise ValueError(f"cannot forecast model {fit.model}")

    return Forecast(model=fit.model, origin=origin, horizon=horizon,
                    point=[float(v) for v in out])
