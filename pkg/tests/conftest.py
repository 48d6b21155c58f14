"""Shared fixtures: the example workflow, a document corpus, and helpers."""

import copy
import json
from pathlib import Path

import pytest

from tsflow.document import parse_document

DATA_DIR = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture(scope="session")
def data_root():
    return DATA_DIR


@pytest.fixture(scope="session")
def lakehuron_text():
    return (DATA_DIR / "lakehuron.jsonld").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def lakehuron_doc(lakehuron_text):
    return parse_document(lakehuron_text)


# ------------------------------------------------------------- corpus

BASE_DOC = {
    "@context": {"tswf": "http://dicits.ugr.es/linkeddata/tswf-schema/"},
    "@id": "http://example.org/workflows#base",
    "@type": "tswf:TSAnalysis",
    "tswf:name": "corpus document",
    "tswf:hasInput": {
        "@type": "tswf:Data",
        "tswf:source": {
            "@type": "tswf:CSVFile",
            "tswf:src": "lakehuron.csv",
            "tswf:fields": {"@set": [
                {"@value": "Year", "@type": "tswf:datetime"},
                {"@value": "Level", "@type": "tswf:integer"},
            ]},
        },
    },
}

_MODEL_KEY = {
    "tswf:SVM": "tswf:hasMLAnalysis",
    "tswf:NeuralNetwork": "tswf:hasMLAnalysis",
    "tswf:RandomForest": "tswf:hasMLAnalysis",
    "tswf:AR": "tswf:hasTSRegression",
    "tswf:LASSO": "tswf:hasTSRegression",
    "tswf:MARS": "tswf:hasTSRegression",
}


def make_doc(doc_id, plots=(), info=(), stationary=(), preprocessing=(),
             models=(), measures=("tswf:RMSE",), service_meta=None,
             extra=None):
    """Build a valid workflow document as JSON text.

    Stage entries are (term, params-dict) pairs; models get a forecast
    accuracy output automatically so the models/output pairing invariant
    holds.
    """
    root = copy.deepcopy(BASE_DOC)
    root["@id"] = doc_id

    def op_node(entry):
        term, params = entry if isinstance(entry, tuple) else (entry, {})
        node = {"@type": term}
        if params:
            node["tswf:parameters"] = {"@set": [
                {"tswf:name": k, "@value": v} for k, v in sorted(params.items())
            ]}
        return node

    stages = (
        ("tswf:hasPreprocessing", "tswf:Preprocessing", preprocessing),
        ("tswf:hasPlot", "tswf:TSPlot", plots),
        ("tswf:hasInformationAnalysis", "tswf:InformationAnalysis", info),
        ("tswf:hasStationaryAnalysis", "tswf:StatitionaryAnalysis", stationary),
    )
    for key, container, ops in stages:
        if ops:
            root[key] = {"@type": container, "@set": [op_node(o) for o in ops]}
    if models:
        # bucket order matches canonical serialization so round trips compare
        performs = {"@type": "tswf:PredictiveModel"}
        buckets = {"tswf:hasMLAnalysis": [], "tswf:hasTSAnalysis": [],
                   "tswf:hasTSRegression": []}
        for entry in models:
            term = entry[0] if isinstance(entry, tuple) else entry
            buckets[_MODEL_KEY.get(term, "tswf:hasTSAnalysis")].append(op_node(entry))
        for key in ("tswf:hasMLAnalysis", "tswf:hasTSAnalysis",
                    "tswf:hasTSRegression"):
            if len(buckets[key]) == 1:
                performs[key] = buckets[key][0]
            elif buckets[key]:
                performs[key] = {"@set": buckets[key]}
        root["tswf:performs"] = performs
        root["tswf:hasOutput"] = {
            "@type": "tswf:EvaluationMeasures",
            "@set": [{
                "id": "acc-1",
                "@type": "tswf:ForecastAccuracy",
                "tswf:hasMeasures": [{"@type": m} for m in measures],
            }],
        }
    if service_meta is not None:
        root["@context"]["dmcc"] = "http://dicits.ugr.es/linkeddata/dmcc-schema/"
        root["dmcc:serviceMeta"] = service_meta
    if extra:
        root.update(extra)
    return json.dumps(root, indent=2)


def build_corpus(lakehuron_text):
    """At least 20 valid documents: the shipped example plus variants."""
    docs = [lakehuron_text]
    uri = "http://example.org/workflows#v{}".format
    docs.append(make_doc(uri(1)))
    docs.append(make_doc(uri(2), plots=["tswf:PlotRegular"]))
    docs.append(make_doc(uri(3), plots=["tswf:PlotACF", "tswf:PlotSTL"]))
    docs.append(make_doc(uri(4), plots=[("tswf:PlotPACF", {"lag": 12})]))
    docs.append(make_doc(uri(5), info=["tswf:ACF", "tswf:PACF"]))
    docs.append(make_doc(uri(6), info=[("tswf:LagStudy", {"lag": 5}),
                                       "tswf:TrendSTL"]))
    docs.append(make_doc(uri(7), stationary=["tswf:DickeyFuller"]))
    docs.append(make_doc(uri(8), stationary=["tswf:JarqueBera", "tswf:JungBox",
                                             "tswf:RunsTest"]))
    docs.append(make_doc(uri(9), preprocessing=[
        ("tswf:Impute", {"method": "mean"})]))
    docs.append(make_doc(uri(10), preprocessing=[
        ("tswf:Scale", {"method": "minmax"}),
        ("tswf:MovingAverage", {"window": 3})]))
    docs.append(make_doc(uri(11), models=["tswf:AR"]))
    docs.append(make_doc(uri(12), models=[("tswf:AR", {"order": 2})]))
    docs.append(make_doc(uri(13), models=[
        ("tswf:ARIMA", {"order": [1, 1, 0]})]))
    docs.append(make_doc(uri(14), models=[
        ("tswf:ARIMA", {"order": [0, 0, 1], "seasonal": [0, 0, 1],
                        "lambda": 0})]))
    docs.append(make_doc(uri(15), models=[("tswf:ETS", {"variant": "holt"})]))
    docs.append(make_doc(uri(16), models=[
        ("tswf:SVM", {"embedding": 3, "epsilon": 0.05})]))
    docs.append(make_doc(uri(17), models=["tswf:SVM", "tswf:ARIMA", "tswf:AR"],
                         measures=("tswf:RMSE", "tswf:MSE", "tswf:MAE")))
    docs.append(make_doc(uri(18), models=["tswf:ETS"],
                         measures=("tswf:MASE", "tswf:sMAPE")))
    docs.append(make_doc(uri(19), plots=["tswf:PlotRegular"],
                         info=["tswf:ACF"], stationary=["tswf:JungBox"],
                         models=["tswf:AR", "tswf:ETS"]))
    docs.append(make_doc(uri(20), service_meta={
        "dmcc:costPerRun": {"dmcc:amount": 0.5, "dmcc:currency": "EUR"},
        "dmcc:authRequired": True}))
    docs.append(make_doc(uri(21), extra={
        "tswf:description": "with metadata",
        "tswf:author": "corpus",
        "tswf:version": "2.1",
        "tswf:dateCreated": "2021-03-04 05:06:07",
        "tswf:codeRepository": {"@type": "tswf:url",
                                "@value": "https://example.org/repo"}}))
    return docs


@pytest.fixture(scope="session")
def corpus_texts(lakehuron_text):
    return build_corpus(lakehuron_text)


# ------------------------------------------------------------- helpers


def diag_path_resolves(source_text, path):
    """True when a diagnostic path walks into the source JSON document.

    Segments resolve as object keys, list indices (also through @set
    wrappers and single nodes standing for one-element lists), or
    parameter names inside a tswf:parameters set.
    """
    node = json.loads(source_text)
    if path == "/":
        return True
    for seg in path.strip("/").split("/"):
        if isinstance(node, dict) and "@set" in node and seg not in node:
            node = node["@set"]
        if isinstance(node, dict):
            if seg in node:
                node = node[seg]
                continue
            if seg == "0":
                continue  # single node standing in for a one-element list
            return False
        if isinstance(node, list):
            if seg.isdigit() and int(seg) < len(node):
                node = node[int(seg)]
                continue
            named = [e for e in node
                     if isinstance(e, dict) and e.get("tswf:name") == seg]
            if named:
                node = named[0]
                continue
            return False
        return False
    return True


def stripped_bundle(bundle_dict):
    """Drop the per-run identifiers so two runs can be compared verbatim."""
    out = copy.deepcopy(bundle_dict)
    for key in ("run_id", "started", "finished"):
        out.pop(key, None)
    for step in out.get("steps", []):
        step.pop("elapsed", None)
    return out
