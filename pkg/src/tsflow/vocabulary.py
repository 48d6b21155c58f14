"""Registry of the tswf workflow vocabulary.

Every class and property a workflow document may name is compiled into this
module: its IRI, category, place in the class hierarchy, parameter schema and
whether the execution engine supports it. The registry is immutable after
construction, so it can be shared freely across threads and runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .errors import UnknownTerm

NAMESPACE = "http://dicits.ugr.es/linkeddata/tswf-schema/"
PREFIX = "tswf"

DEFAULT_CONTEXT = {PREFIX: NAMESPACE}

CATEGORIES = (
    "Metadata",
    "Input",
    "Plot",
    "InformationAnalysis",
    "StationaryAnalysis",
    "Preprocessing",
    "PredictiveModel",
    "EvaluationMeasure",
    "Output",
    "Property",
)


@dataclass(frozen=True)
class ParamSpec:
    """Schema of one parameter accepted by an executable term.

    kind is one of integer, real, integer-list, real-list, string, boolean.
    A default of None means the engine derives a data-dependent value at run
    time (e.g. a lag cutoff from the series length).
    """

    name: str
    kind: str
    default: object = None
    bounds: tuple | None = None  # closed interval on scalars / list entries
    length: int | None = None  # exact length for list kinds
    choices: tuple | None = None  # allowed values for string kinds

    def to_dict(self):
        d = {"name": self.name, "kind": self.kind, "default": self.default}
        if self.bounds is not None:
            d["bounds"] = list(self.bounds)
        if self.length is not None:
            d["length"] = self.length
        if self.choices is not None:
            d["choices"] = list(self.choices)
        return d


@dataclass(frozen=True)
class Term:
    curie: str
    category: str
    parent: str | None = None  # curie of the parent term
    params: tuple = ()
    executable: bool = False

    @property
    def iri(self) -> str:
        return NAMESPACE + self.local_name

    @property
    def local_name(self) -> str:
        return self.curie.split(":", 1)[1]

    def to_dict(self):
        return {
            "iri": self.iri,
            "curie": self.curie,
            "category": self.category,
            "parent": self.parent,
            "params": [p.to_dict() for p in self.params],
            "executable": self.executable,
        }


def _p(name, kind, default=None, bounds=None, length=None, choices=None):
    return ParamSpec(name, kind, default, bounds, length, choices)


_LAG_PARAM = (_p("lag", "integer", None, bounds=(1, None)),)
_PERIOD_PARAM = (_p("period", "integer", None, bounds=(2, None)),)

# (curie local name, category, parent local name, params, executable)
_TERM_TABLE = [
    # metadata root
    ("TSAnalysis", "Metadata", None, (), False),
    # input sources
    ("Data", "Input", None, (), False),
    ("CSVFile", "Input", "Data", (), True),
    ("Database", "Input", "Data", (), False),
    ("TSDatabase", "Input", "Data", (), False),
    ("StreamingService", "Input", "Data", (), False),
    # plots
    ("TSPlot", "Plot", None, (), False),
    ("PlotSTL", "Plot", "TSPlot", _PERIOD_PARAM, True),
    ("PlotACF", "Plot", "TSPlot", _LAG_PARAM, True),
    ("PlotPACF", "Plot", "TSPlot", _LAG_PARAM, True),
    ("PlotRegular", "Plot", "TSPlot", (), True),
    # information analysis
    ("InformationAnalysis", "InformationAnalysis", None, (), False),
    ("LagStudy", "InformationAnalysis", "InformationAnalysis", _LAG_PARAM, True),
    ("TrendSTL", "InformationAnalysis", "InformationAnalysis", _PERIOD_PARAM, True),
    ("ACF", "InformationAnalysis", "InformationAnalysis", _LAG_PARAM, True),
    ("PACF", "InformationAnalysis", "InformationAnalysis", _LAG_PARAM, True),
    # stationary analysis ("Statitionary" keeps the schema's own spelling)
    ("StatitionaryAnalysis", "StationaryAnalysis", None, (), False),
    ("StatisticalTest", "StationaryAnalysis", "StatitionaryAnalysis", (), True),
    ("DickeyFuller", "StationaryAnalysis", "StatisticalTest",
     (_p("lag", "integer", None, bounds=(0, None)),), True),
    ("JarqueBera", "StationaryAnalysis", "StatisticalTest", (), True),
    ("JungBox", "StationaryAnalysis", "StatisticalTest", _LAG_PARAM, True),
    ("RunsTest", "StationaryAnalysis", "StatisticalTest", (), True),
    # preprocessing containers and one concrete leaf per sub-part
    ("Preprocessing", "Preprocessing", None, (), False),
    ("Imputation", "Preprocessing", "Preprocessing", (), False),
    ("Outliers", "Preprocessing", "Preprocessing", (), False),
    ("SpectralAnalysis", "Preprocessing", "Preprocessing", (), False),
    ("Scaling", "Preprocessing", "Preprocessing", (), False),
    ("NoiseReduction", "Preprocessing", "Preprocessing", (), False),
    ("Smoothing", "Preprocessing", "Preprocessing", (), False),
    ("Impute", "Preprocessing", "Imputation",
     (_p("method", "string", "linear-interpolation",
         choices=("mean", "linear-interpolation")),), True),
    ("OutlierDetection", "Preprocessing", "Outliers",
     (_p("threshold", "real", 3.0, bounds=(0.0, None)),), True),
    ("Periodogram", "Preprocessing", "SpectralAnalysis", (), True),
    ("Scale", "Preprocessing", "Scaling",
     (_p("method", "string", "zscore", choices=("zscore", "minmax")),), True),
    ("BoxCox", "Preprocessing", "NoiseReduction",
     (_p("lambda", "real", 0.0),), True),
    ("MovingAverage", "Preprocessing", "Smoothing",
     (_p("window", "integer", 3, bounds=(1, None)),), True),
    ("Differencing", "Preprocessing", "Preprocessing",
     (_p("d", "integer", 1, bounds=(0, None)),
      _p("D", "integer", 0, bounds=(0, None))), True),
    # predictive models
    ("PredictiveModel", "PredictiveModel", None, (), False),
    ("ARIMA", "PredictiveModel", "PredictiveModel",
     (_p("order", "integer-list", [1, 0, 0], bounds=(0, None), length=3),
      _p("seasonal", "integer-list", [0, 0, 0], bounds=(0, None), length=3),
      _p("lambda", "real", None)), True),
    ("AR", "PredictiveModel", "PredictiveModel",
     (_p("order", "integer", None, bounds=(0, None)),), True),
    ("ETS", "PredictiveModel", "PredictiveModel",
     (_p("variant", "string", "simple", choices=("simple", "holt")),), True),
    ("SVM", "PredictiveModel", "PredictiveModel",
     (_p("embedding", "integer", 5, bounds=(1, None)),
      _p("epsilon", "real", 0.1, bounds=(0.0, None)),
      _p("C", "real", 1.0, bounds=(0.0, None)),
      _p("epochs", "integer", 200, bounds=(1, None))), True),
    ("NeuralNetwork", "PredictiveModel", "PredictiveModel", (), False),
    ("RandomForest", "PredictiveModel", "PredictiveModel", (), False),
    ("LASSO", "PredictiveModel", "PredictiveModel", (), False),
    ("MARS", "PredictiveModel", "PredictiveModel", (), False),
    ("SARIMA", "PredictiveModel", "ARIMA", (), False),
    ("ARIMAX", "PredictiveModel", "ARIMA", (), False),
    # outputs
    ("EvaluationMeasures", "Output", None, (), False),
    ("ForecastAccuracy", "Output", "EvaluationMeasures", (), True),
    # forecast-accuracy measures
    ("RMSE", "EvaluationMeasure", None, (), True),
    ("MSE", "EvaluationMeasure", None, (), True),
    ("MAE", "EvaluationMeasure", None, (), True),
    ("MdAE", "EvaluationMeasure", None, (), True),
    ("MAPE", "EvaluationMeasure", None, (), True),
    ("sMAPE", "EvaluationMeasure", None, (), True),
    ("MASE", "EvaluationMeasure", None, (), True),
    ("ME", "EvaluationMeasure", None, (), True),
    ("MPE", "EvaluationMeasure", None, (), True),
    # similarity measures
    ("DTW", "EvaluationMeasure", None,
     (_p("band", "integer", None, bounds=(0, None)),), True),
    ("Euclidean", "EvaluationMeasure", None, (), True),
    # classification measures
    ("F1Score", "EvaluationMeasure", None, (), True),
    ("ConfusionMatrix", "EvaluationMeasure", None, (), True),
    ("ROC", "EvaluationMeasure", None, (), False),
    # similarity / clustering measures registered for coverage only
    ("EditDistance", "EvaluationMeasure", None, (), False),
    ("Jaccard", "EvaluationMeasure", None, (), False),
    ("APN", "EvaluationMeasure", None, (), False),
    ("ADM", "EvaluationMeasure", None, (), False),
    ("SilhouetteW", "EvaluationMeasure", None, (), False),
]

_PROPERTIES = [
    "hasInput", "hasOutput", "hasPlot", "hasInformationAnalysis",
    "hasStationaryAnalysis", "hasPreprocessing", "hasMLAnalysis",
    "hasTSAnalysis", "hasTSRegression", "hasMeasures", "performs",
    "parameters", "source", "src", "fields", "name", "description",
    "author", "dateCreated", "version", "codeRepository",
]


class TermRegistry:
    """Immutable lookup table of vocabulary terms by curie and IRI."""

    def __init__(self, terms):
        self._by_curie = {t.curie: t for t in terms}
        self._by_iri = {t.iri: t for t in terms}

    def __iter__(self):
        return iter(self._by_curie.values())

    def __len__(self):
        return len(self._by_curie)

    def __contains__(self, curie_or_iri):
        return curie_or_iri in self._by_curie or curie_or_iri in self._by_iri

    def resolve(self, curie_or_iri: str) -> Term:
        """Look a term up by compact or absolute name."""
        t = self._by_curie.get(curie_or_iri) or self._by_iri.get(curie_or_iri)
        if t is None:
            raise UnknownTerm(f"not a vocabulary term: {curie_or_iri!r}")
        return t

    def parent_of(self, term: Term) -> Term | None:
        return self._by_curie[term.parent] if term.parent else None

    def to_dump(self):
        return [t.to_dict() for t in self]


def _build_terms():
    terms = [
        Term(f"{PREFIX}:{name}", category, f"{PREFIX}:{parent}" if parent else None,
             tuple(params), executable)
        for name, category, parent, params, executable in _TERM_TABLE
    ]
    terms += [Term(f"{PREFIX}:{p}", "Property") for p in _PROPERTIES]
    return terms


_REGISTRY = TermRegistry(_build_terms())


def load_vocabulary() -> TermRegistry:
    """Return the compiled-in term registry (shared immutable instance)."""
    return _REGISTRY


def resolve(curie_or_iri: str) -> Term:
    return _REGISTRY.resolve(curie_or_iri)


def param_schema_of(term: Term) -> list[ParamSpec]:
    return list(term.params)


def shipped_dump() -> list[dict]:
    """The machine-readable registry dump bundled as package data."""
    text = resources.files("tsflow.data").joinpath("vocabulary.json").read_text()
    return json.loads(text)
