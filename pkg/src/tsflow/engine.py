"""Workflow execution: runs a validated document stage by stage.

Stage order is fixed: input, preprocessing, plots, information analyses,
stationary analyses, models (fit + forecast), outputs. A failing step is
recorded and execution continues; only an unreadable input aborts the run.
"""

from __future__ import annotations

import json
import math
import time
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import analysis, metrics, models, series, vocabulary
from .document import OpSpec, WorkflowDoc, resolved_params
from .errors import (
    InputError,
    NoSuchMetric,
    TsflowError,
    TypeMismatch,
    UnsupportedOperation,
    UnsupportedSource,
)
from .series import TimeSeries

_MODEL_SUBSTITUTES = {
    "tswf:NeuralNetwork": "tswf:SVM",
    "tswf:RandomForest": "tswf:SVM",
    "tswf:LASSO": "tswf:AR",
    "tswf:MARS": "tswf:AR",
    "tswf:SARIMA": "tswf:ARIMA",
    "tswf:ARIMAX": "tswf:ARIMA",
}


@dataclass(frozen=True)
class StepResult:
    op: str  # term curie
    params_resolved: dict
    outcome: dict  # {"kind": ..., ...}; kind "error" marks a failed step
    elapsed: float

    @property
    def ok(self) -> bool:
        return self.outcome.get("kind") != "error"

    def to_dict(self):
        return {"op": self.op, "params_resolved": self.params_resolved,
                "outcome": self.outcome, "elapsed": self.elapsed}


@dataclass(frozen=True)
class PlotArtifact:
    plot: str
    svg_path: str  # relative to the run directory
    data_path: str


@dataclass(frozen=True)
class RunBundle:
    workflow_id: str
    run_id: str
    started: str
    finished: str
    steps: tuple
    warnings: tuple
    status: str  # succeeded | partial | failed
    run_dir: Path | None = field(default=None, compare=False)

    def to_dict(self):
        return {
            "workflow_id": self.workflow_id,
            "run_id": self.run_id,
            "started": self.started,
            "finished": self.finished,
            "status": self.status,
            "warnings": list(self.warnings),
            "steps": [s.to_dict() for s in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True,
                          ensure_ascii=False, allow_nan=True)


def expected_step_count(doc: WorkflowDoc) -> int:
    """The all-successful step count: the answer to how many tasks a run has."""
    return (len(doc.preprocessing) + len(doc.plots) + len(doc.info_analyses)
            + len(doc.stationary_analyses) + 2 * len(doc.models) + len(doc.outputs))


def resolve_locator(src: str, data_root: Path) -> Path:
    """Map a document locator onto a file under the data root."""
    data_root = Path(data_root)
    rel = src.lstrip("/")
    for candidate in (data_root / rel, data_root / Path(src).name):
        if candidate.is_file():
            return candidate
    raise InputError(f"cannot resolve input locator {src!r} under {data_root}")


def _nan_to_none(values) -> list:
    return [None if (isinstance(v, float) and math.isnan(v)) else float(v)
            for v in values]


# ---------------------------------------------------------------- plots


def _svg_document(title: str, body: str, width=640, height=360) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<text x="{width / 2}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>\n'
        f"{body}\n</svg>\n"
    )


def _scaled(vals, lo_px, hi_px):
    finite = [v for v in vals if v is not None and math.isfinite(v)]
    vmin, vmax = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if vmax == vmin:
        vmax = vmin + 1.0
    span = hi_px - lo_px
    return [None if v is None or not math.isfinite(v)
            else lo_px + (v - vmin) / (vmax - vmin) * span for v in vals]


def _polyline(values, x0=50, x1=610, y0=320, y1=40, color="steelblue") -> str:
    ys = _scaled(values, 0.0, 1.0)
    pts = []
    n = max(len(values) - 1, 1)
    for i, v in enumerate(ys):
        if v is None:
            continue
        x = x0 + i / n * (x1 - x0)
        y = y0 - v * (y0 - y1)
        pts.append(f"{x:.2f},{y:.2f}")
    axes = (f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>'
            f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>')
    return (axes + f'<polyline points="{" ".join(pts)}" fill="none" '
            f'stroke="{color}" stroke-width="1.5"/>')


def _stems(values, x0=50, x1=610, y0=320, y1=40) -> str:
    finite = [v for v in values if math.isfinite(v)]
    top = max(max(finite, default=1.0), 0.0)
    bot = min(min(finite, default=0.0), 0.0)
    if top == bot:
        top = bot + 1.0
    zero_y = y0 - (0.0 - bot) / (top - bot) * (y0 - y1)
    parts = [f'<line x1="{x0}" y1="{zero_y:.2f}" x2="{x1}" y2="{zero_y:.2f}" '
             'stroke="black"/>']
    n = max(len(values), 1)
    for i, v in enumerate(values):
        x = x0 + (i + 0.5) / n * (x1 - x0)
        y = y0 - (v - bot) / (top - bot) * (y0 - y1)
        parts.append(f'<line x1="{x:.2f}" y1="{zero_y:.2f}" x2="{x:.2f}" '
                     f'y2="{y:.2f}" stroke="steelblue" stroke-width="2"/>')
    return "".join(parts)


def render_plot(kind: str, source, out_dir: Path) -> PlotArtifact:
    """Write an SVG chart plus a JSON sidecar with the plotted numbers."""
    out_dir = Path(out_dir)
    plots_dir = out_dir / "plots"
    plots_dir.mkdir(parents=True, exist_ok=True)
    local = kind.split(":", 1)[-1]

    if local == "PlotRegular":
        if not isinstance(source, TimeSeries):
            raise TypeMismatch(f"{kind} needs a time series source")
        data = {"values": _nan_to_none(source.values)}
        body = _polyline(data["values"])
    elif local == "PlotACF":
        if not isinstance(source, analysis.AcfResult):
            raise TypeMismatch(f"{kind} needs an autocorrelation source")
        data = {"lags": source.lags, "rho": source.rho,
                "ci_halfwidth": source.ci_halfwidth}
        body = _stems(source.rho)
    elif local == "PlotPACF":
        if not isinstance(source, analysis.PacfResult):
            raise TypeMismatch(f"{kind} needs a partial-autocorrelation source")
        data = {"lags": source.lags, "phi_kk": source.phi_kk}
        body = _stems(source.phi_kk)
    elif local == "PlotSTL":
        if not isinstance(source, analysis.Decomposition):
            raise TypeMismatch(f"{kind} needs a decomposition source")
        data = {
            "trend": _nan_to_none(source.trend.values),
            "seasonal": _nan_to_none(source.seasonal.values),
            "remainder": _nan_to_none(source.remainder.values),
            "period": source.period,
            "seasonal_strength": source.seasonal_strength,
        }
        body = "".join([
            _polyline(data["trend"], y0=130, y1=40, color="steelblue"),
            _polyline(data["seasonal"], y0=225, y1=140, color="darkorange"),
            _polyline(data["remainder"], y0=320, y1=235, color="seagreen"),
        ])
    else:
        raise TypeMismatch(f"{kind} is not a plot term")

    svg_rel = f"plots/{local}.svg"
    json_rel = f"plots/{local}.json"
    (out_dir / svg_rel).write_text(_svg_document(kind, body), encoding="utf-8")
    (out_dir / json_rel).write_text(
        json.dumps(data, indent=2, sort_keys=True, allow_nan=False),
        encoding="utf-8")
    return PlotArtifact(plot=kind, svg_path=svg_rel, data_path=json_rel)


# ---------------------------------------------------------------- steps


def _period_for(ts: TimeSeries, requested) -> int:
    if requested is not None:
        return int(requested)
    if ts.frequency:
        return ts.frequency
    return max(2, min(12, len(ts) // 2))


def _fit_outcome(fit: models.ModelFit) -> dict:
    return {
        "kind": "model_fit",
        "model": fit.model,
        "coefficients": {k: fit.coefficients[k] for k in sorted(fit.coefficients)},
        "training_loss": fit.training_loss,
        "converged": fit.converged,
        "fitted": _nan_to_none(fit.fitted),
        "residuals": _nan_to_none(fit.residuals),
    }


def _fit_model(term: str, params: dict, ts: TimeSeries) -> models.ModelFit:
    local = term.split(":", 1)[-1]
    if local == "AR":
        return models.fit_ar(ts, order=params.get("order"))
    if local == "ARIMA":
        return models.fit_arima(
            ts, order=params.get("order") or [1, 0, 0],
            seasonal=params.get("seasonal") or [0, 0, 0],
            lam=params.get("lambda"))
    if local == "ETS":
        return models.fit_ets(ts, variant=params.get("variant") or "simple")
    if local == "SVM":
        return models.fit_svr(
            ts, embedding=params.get("embedding") or 5,
            epsilon=params.get("epsilon") if params.get("epsilon") is not None else 0.1,
            c=params.get("C") if params.get("C") is not None else 1.0,
            epochs=params.get("epochs") or 200)
    raise UnsupportedOperation(
        f"{term} is not executable"
        + (f"; consider {_MODEL_SUBSTITUTES[term]}" if term in _MODEL_SUBSTITUTES else ""))


def _run_analysis_op(op_term: str, params: dict, ts: TimeSeries):
    """Dispatch a preprocessing / analysis term; returns (outcome, new_series)."""
    local = op_term.split(":", 1)[-1]
    if local == "Impute":
        out = series.impute(ts, params.get("method") or "linear-interpolation")
        return {"kind": "series", "values": _nan_to_none(out.values)}, out
    if local == "OutlierDetection":
        idx = series.detect_outliers(ts, params.get("threshold") or 3.0)
        return {"kind": "outliers", "indices": idx}, ts
    if local == "Scale":
        out = series.scale(ts, params.get("method") or "zscore")
        return {"kind": "series", "values": _nan_to_none(out.values)}, out
    if local == "MovingAverage":
        out = series.smooth_ma(ts, params.get("window") or 3)
        return {"kind": "series", "values": _nan_to_none(out.values)}, out
    if local == "BoxCox":
        lam = params.get("lambda")
        out = series.transform(ts, 0.0 if lam is None else lam)
        return {"kind": "series", "values": _nan_to_none(out.values)}, out
    if local == "Differencing":
        out = series.difference(ts, d=params.get("d", 1), seasonal_d=params.get("D", 0),
                                period=ts.frequency or 1)
        return {"kind": "series", "values": _nan_to_none(out.values)}, out
    if local == "Periodogram":
        rows = series.periodogram(ts)
        return {"kind": "periodogram", "rows": rows}, ts
    if local in ("ACF", "PlotACF"):
        res = analysis.acf(ts, params.get("lag"))
        return {"kind": "acf", "lags": res.lags, "rho": res.rho,
                "ci_halfwidth": res.ci_halfwidth}, res
    if local in ("PACF", "PlotPACF"):
        res = analysis.pacf(ts, params.get("lag"))
        return {"kind": "pacf", "lags": res.lags, "phi_kk": res.phi_kk}, res
    if local == "LagStudy":
        rows = analysis.lag_study(ts, params.get("lag"))
        return {"kind": "lag_study", "rows": rows}, ts
    if local in ("TrendSTL", "PlotSTL"):
        res = analysis.decompose(ts, _period_for(ts, params.get("period")))
        return {
            "kind": "decomposition",
            "trend": _nan_to_none(res.trend.values),
            "seasonal": _nan_to_none(res.seasonal.values),
            "remainder": _nan_to_none(res.remainder.values),
            "period": res.period,
            "seasonal_strength": res.seasonal_strength,
        }, res
    if local == "PlotRegular":
        return {"kind": "series", "values": _nan_to_none(ts.values)}, ts
    if local == "DickeyFuller":
        res = analysis.adf_test(ts, params.get("lag"))
    elif local == "JarqueBera":
        res = analysis.jarque_bera(ts)
    elif local == "JungBox":
        res = analysis.ljung_box(ts, params.get("lag"))
    elif local == "RunsTest":
        res = analysis.runs_test(ts)
    elif local == "StatisticalTest":
        return {"kind": "noop", "message": "abstract test term"}, ts
    else:
        raise UnsupportedOperation(f"{op_term} is not executable")
    return {
        "kind": "test", "test": res.test, "statistic": res.statistic,
        "p_value": res.p_value, "critical_values": res.critical_values,
        "reject_at_5pct": res.reject_at_5pct, "df_or_lags": res.df_or_lags,
    }, res


# ---------------------------------------------------------------- execute


def execute(doc: WorkflowDoc, data_root, out_dir, forecast_horizon: int = 10) -> RunBundle:
    """Run every stage of a validated workflow document.

    Writes bundle.json and plot artifacts under out_dir/run_<id>/ and returns
    the bundle. Per-step failures are recorded; the run keeps going.
    """
    registry = vocabulary.load_vocabulary()
    run_id = uuid.uuid4().hex[:12]
    started = datetime.now(timezone.utc).isoformat()
    run_dir = Path(out_dir) / f"run_{run_id}"
    run_dir.mkdir(parents=True, exist_ok=True)

    warnings: list[str] = []
    steps: list[StepResult] = []

    if doc.input is None:
        raise InputError("document has no input block")
    if doc.input.source_kind != "tswf:CSVFile":
        raise UnsupportedSource(
            f"source kind {doc.input.source_kind} is not executable")
    path = resolve_locator(doc.input.src, Path(data_root))
    ts, ingest_warnings = series.ingest_csv(str(path), doc.input)
    warnings.extend(ingest_warnings)

    def run_step(op: OpSpec, fn):
        params = {k: v for k, v in resolved_params(op, registry).items()}
        t0 = time.perf_counter()
        try:
            outcome, extra = fn(params)
        except TsflowError as exc:
            outcome, extra = {"kind": "error", "code": exc.code,
                              "message": exc.message}, None
        steps.append(StepResult(op.term, params,
                                outcome, time.perf_counter() - t0))
        return extra

    current = ts  # last successful preprocessing output feeds every later stage

    for op in doc.preprocessing:
        result = run_step(op, lambda params, op=op: _run_analysis_op(
            op.term, params, current))
        if isinstance(result, TimeSeries):
            current = result

    for op in doc.plots:
        def plot_step(params, op=op):
            outcome, source = _run_analysis_op(op.term, params, current)
            target = current if op.term == "tswf:PlotRegular" else source
            artifact = render_plot(op.term, target, run_dir)
            return {"kind": "plot", "plot": artifact.plot,
                    "svg_path": artifact.svg_path,
                    "data_path": artifact.data_path}, artifact
        run_step(op, plot_step)

    for op in doc.info_analyses:
        run_step(op, lambda params, op=op: _run_analysis_op(op.term, params, current))
    for op in doc.stationary_analyses:
        run_step(op, lambda params, op=op: _run_analysis_op(op.term, params, current))

    n = len(current)
    holdout = 0
    if doc.outputs and doc.models:
        holdout = min(max(forecast_horizon, math.ceil(0.2 * n)), n - 2)
    train = current.replace(current.values[: n - holdout], keep_time=False) \
        if holdout else current
    horizon = max(forecast_horizon, holdout) if holdout else forecast_horizon

    fitted_models: list[tuple[str, models.ModelFit, models.Forecast]] = []
    for op in doc.models:
        def fit_step(params, op=op):
            fit = _fit_model(op.term, params, train)
            warnings.extend(fit.warnings)
            return _fit_outcome(fit), fit
        fit = run_step(op, fit_step)
        if fit is None:
            # keep the fit/forecast pairing: a failed fit also fails its forecast
            steps.append(StepResult(op.term, steps[-1].params_resolved,
                                    {"kind": "error", "code": "UpstreamFailed",
                                     "message": "no fit to forecast from"}, 0.0))
            continue

        def forecast_step(params, fit=fit):
            fc = models.forecast(fit, horizon, allow_unconverged=True)
            return {"kind": "forecast", "model": fc.model, "origin": fc.origin,
                    "horizon": fc.horizon, "point": fc.point}, fc
        fc = run_step(op, forecast_step)
        if fc is not None:
            fitted_models.append((op.term, fit, fc))

    for out in doc.outputs:
        def output_step(params, out=out):
            if out.kind != "tswf:ForecastAccuracy":
                raise UnsupportedOperation(f"output kind {out.kind} is not executable")
            if holdout == 0:
                raise UnsupportedOperation("no holdout window to evaluate against")
            actual = current.values[n - holdout:]
            rows = []
            for model_term, _fit, fc in fitted_models:
                values = metrics.forecast_accuracy(
                    actual, fc.point[:holdout], out.measures,
                    training=train.values)
                rows.extend({"model": model_term, "measure": mv.measure,
                             "value": mv.value, "n": mv.n} for mv in values)
            return {"kind": "measures", "output_id": out.id, "rows": rows}, rows
        run_step(OpSpec(out.kind), output_step)

    n_err = sum(1 for s in steps if not s.ok)
    if n_err == 0:
        status = "succeeded"
    elif n_err == len(steps) and steps:
        status = "failed"
    else:
        status = "partial"

    bundle = RunBundle(
        workflow_id=doc.id,
        run_id=run_id,
        started=started,
        finished=datetime.now(timezone.utc).isoformat(),
        steps=tuple(steps),
        warnings=tuple(warnings),
        status=status,
        run_dir=run_dir,
    )
    (run_dir / "bundle.json").write_text(bundle.to_json(), encoding="utf-8")
    return bundle


def best_model(bundle: RunBundle, metric: str) -> dict:
    """The model with the minimal value of a measure; first wins on ties."""
    best = None
    for step in bundle.steps:
        if step.outcome.get("kind") != "measures":
            continue
        for row in step.outcome["rows"]:
            if row["measure"] == metric:
                if best is None or row["value"] < best["value"]:
                    best = {"model": row["model"], "value": row["value"]}
    if best is None:
        raise NoSuchMetric(f"no {metric} values in this run")
    return best
