"""Document parsing, validation, and canonical serialization."""

import json

import pytest

from conftest import diag_path_resolves, make_doc
from tsflow.document import (
    DocumentSyntaxError,
    parse_document,
    resolved_params,
    serialize,
    validate,
)
from tsflow.errors import StructureError

MINIMAL = json.dumps({
    "@context": {"tswf": "http://dicits.ugr.es/linkeddata/tswf-schema/"},
    "@id": "http://example.org/workflows#minimal",
    "@type": "tswf:TSAnalysis",
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
})


# ------------------------------------------------------------- parsing


def test_parse_example_document(lakehuron_doc):
    doc = lakehuron_doc
    assert doc.id == "http://dicits.ugr.es/tswf-marketplace/#TS_eb09t74"
    assert [op.term for op in doc.plots] == [
        "tswf:PlotSTL", "tswf:PlotACF", "tswf:PlotPACF", "tswf:PlotRegular"]
    assert [op.term for op in doc.info_analyses] == [
        "tswf:LagStudy", "tswf:TrendSTL", "tswf:ACF", "tswf:PACF"]
    assert [op.term for op in doc.stationary_analyses] == [
        "tswf:StatisticalTest", "tswf:DickeyFuller", "tswf:JarqueBera",
        "tswf:JungBox"]
    assert [op.term for op in doc.models] == ["tswf:SVM", "tswf:ARIMA",
                                              "tswf:AR"]
    assert len(doc.outputs) == 1
    assert doc.outputs[0].kind == "tswf:ForecastAccuracy"
    assert list(doc.outputs[0].measures) == ["tswf:RMSE", "tswf:MSE"]
    assert doc.input.source_kind == "tswf:CSVFile"
    assert doc.input.src == "///dicits/examples/lakehuron.csv"
    assert [f["name"] for f in doc.input.fields] == ["Year", "Level"]


def test_parse_example_arima_params(lakehuron_doc):
    arima = next(op for op in lakehuron_doc.models if op.term == "tswf:ARIMA")
    assert arima.params == {"order": [0, 0, 1], "seasonal": [0, 0, 1],
                            "lambda": 0}


def test_parse_example_plot_pacf_lag(lakehuron_doc):
    pacf = next(op for op in lakehuron_doc.plots if op.term == "tswf:PlotPACF")
    assert pacf.params == {"lag": 10}


def test_parse_minimal_document():
    doc = parse_document(MINIMAL)
    assert doc.id.endswith("#minimal")
    assert doc.plots == ()
    assert doc.models == ()
    assert doc.outputs == ()
    assert validate(doc).valid


def test_parse_expands_absolute_type_iris():
    text = MINIMAL.replace(
        "tswf:TSAnalysis",
        "http://dicits.ugr.es/linkeddata/tswf-schema/TSAnalysis")
    doc = parse_document(text)
    assert doc.input.source_kind == "tswf:CSVFile"


def test_parse_rejects_malformed_json():
    with pytest.raises(DocumentSyntaxError) as exc:
        parse_document("{not json")
    assert exc.value.position is not None


def test_parse_rejects_missing_id():
    bad = json.loads(MINIMAL)
    del bad["@id"]
    with pytest.raises(StructureError):
        parse_document(json.dumps(bad))


def test_parse_rejects_wrong_root_type():
    bad = json.loads(MINIMAL)
    bad["@type"] = "tswf:Data"
    with pytest.raises(StructureError):
        parse_document(json.dumps(bad))


def test_unknown_keys_become_warnings():
    node = json.loads(MINIMAL)
    node["tswf:somethingElse"] = 1
    doc = parse_document(json.dumps(node))
    assert any("tswf:somethingElse" in w for w in doc.parse_warnings)
    report = validate(doc)
    assert report.valid  # warnings only
    assert any(d.code == "UnknownKey" for d in report.diagnostics)


def test_service_meta_parsing():
    text = make_doc("http://example.org/workflows#meta", service_meta={
        "dmcc:costPerRun": {"dmcc:amount": 2.5, "dmcc:currency": "USD"},
        "dmcc:authRequired": False})
    doc = parse_document(text)
    assert doc.service_meta.cost_amount == 2.5
    assert doc.service_meta.cost_currency == "USD"
    assert doc.service_meta.auth_required is False


# ---------------------------------------------------------- validation


def test_validate_example_has_no_errors(lakehuron_doc):
    report = validate(lakehuron_doc)
    assert report.valid
    assert report.errors() == []


INVALID_FIXTURES = [
    # (mutator over the parsed example JSON, expected diagnostic code)
    ("unknown-model-term", "UnknownTerm"),
    ("arima-order-length-2", "ParamShape"),
    ("arima-order-strings", "ParamType"),
    ("negative-arima-order", "ParamBounds"),
    ("unknown-param-name", "UnknownParam"),
    ("ets-bad-variant", "ParamChoice"),
    ("plot-term-in-models", "WrongCategory"),
    ("relative-id", "BadId"),
    ("duplicate-field-names", "DuplicateField"),
    ("no-numeric-field", "NoNumericField"),
    ("two-datetime-fields", "TooManyTimeFields"),
    ("output-without-models", "ModelOutputMismatch"),
    ("models-without-output", "ModelOutputMismatch"),
    ("output-measure-wrong-category", "WrongCategory"),
    ("negative-cost", "NegativeCost"),
]


def _make_invalid(name, lakehuron_text):
    root = json.loads(lakehuron_text)
    performs = root["tswf:performs"]
    if name == "unknown-model-term":
        performs["tswf:hasTSRegression"]["@type"] = "tswf:Bogus"
    elif name == "arima-order-length-2":
        performs["tswf:hasTSAnalysis"]["tswf:parameters"]["@set"][0]["@value"] = [0, 0]
    elif name == "arima-order-strings":
        performs["tswf:hasTSAnalysis"]["tswf:parameters"]["@set"][0]["@value"] = \
            ["a", "b", "c"]
    elif name == "negative-arima-order":
        performs["tswf:hasTSAnalysis"]["tswf:parameters"]["@set"][0]["@value"] = \
            [-1, 0, 1]
    elif name == "unknown-param-name":
        performs["tswf:hasTSAnalysis"]["tswf:parameters"]["@set"].append(
            {"tswf:name": "mystery", "@value": 3})
    elif name == "ets-bad-variant":
        performs["tswf:hasTSAnalysis"] = {
            "@type": "tswf:ETS",
            "tswf:parameters": {"@set": [
                {"tswf:name": "variant", "@value": "cubic"}]}}
    elif name == "plot-term-in-models":
        performs["tswf:hasTSRegression"]["@type"] = "tswf:PlotACF"
    elif name == "relative-id":
        root["@id"] = "just-a-fragment"
    elif name == "duplicate-field-names":
        fields = root["tswf:hasInput"]["tswf:source"]["tswf:fields"]["@set"]
        fields[0]["@value"] = "Level"
        fields[0]["@type"] = "tswf:integer"
    elif name == "no-numeric-field":
        fields = root["tswf:hasInput"]["tswf:source"]["tswf:fields"]["@set"]
        fields[1]["@type"] = "tswf:string"
    elif name == "two-datetime-fields":
        fields = root["tswf:hasInput"]["tswf:source"]["tswf:fields"]["@set"]
        fields[1]["@type"] = "tswf:datetime"
        root["tswf:hasInput"]["tswf:source"]["tswf:fields"]["@set"].append(
            {"@value": "Extra", "@type": "tswf:real"})
    elif name == "output-without-models":
        del root["tswf:performs"]
    elif name == "models-without-output":
        del root["tswf:hasOutput"]
    elif name == "output-measure-wrong-category":
        root["tswf:hasOutput"]["@set"][0]["tswf:hasMeasures"][0]["@type"] = \
            "tswf:ARIMA"
    elif name == "negative-cost":
        root["@context"]["dmcc"] = "http://dicits.ugr.es/linkeddata/dmcc-schema/"
        root["dmcc:serviceMeta"] = {
            "dmcc:costPerRun": {"dmcc:amount": -1, "dmcc:currency": "EUR"}}
    else:
        raise AssertionError(f"unknown fixture {name}")
    return json.dumps(root)


@pytest.mark.parametrize("name,code", INVALID_FIXTURES)
def test_invalid_fixture_yields_diagnostic(name, code, lakehuron_text):
    text = _make_invalid(name, lakehuron_text)
    report = validate(parse_document(text))
    assert not report.valid
    matching = [d for d in report.errors() if d.code == code]
    assert matching, f"expected a {code} error, got {report.errors()}"
    for diag in report.diagnostics:
        assert diag.path.startswith("/")
        assert diag_path_resolves(text, diag.path), diag.path


def test_resolved_params_injects_defaults(lakehuron_doc):
    arima = next(op for op in lakehuron_doc.models if op.term == "tswf:ARIMA")
    assert resolved_params(arima) == {"order": [0, 0, 1],
                                      "seasonal": [0, 0, 1], "lambda": 0}
    ar = next(op for op in lakehuron_doc.models if op.term == "tswf:AR")
    assert resolved_params(ar) == {"order": None}  # auto order at run time


def test_default_injection_idempotent(lakehuron_doc):
    first = validate(lakehuron_doc)
    second = validate(lakehuron_doc)
    assert first.to_dict() == second.to_dict()
    for op in lakehuron_doc.models:
        assert resolved_params(op) == resolved_params(op)


# ------------------------------------------------------- serialization


def test_round_trip_example(lakehuron_doc):
    text = serialize(lakehuron_doc)
    assert parse_document(text) == lakehuron_doc


def test_round_trip_corpus(corpus_texts):
    assert len(corpus_texts) >= 20
    for text in corpus_texts:
        doc = parse_document(text)
        assert validate(doc).valid, text[:200]
        again = serialize(doc)
        assert parse_document(again) == doc
        # canonical form is a fixed point
        assert serialize(parse_document(again)) == again


def test_serialize_omits_empty_stages():
    doc = parse_document(MINIMAL)
    out = json.loads(serialize(doc))
    assert "tswf:hasPlot" not in out
    assert "tswf:performs" not in out
    assert "tswf:hasOutput" not in out


def test_serialize_keeps_explicit_lambda_zero(lakehuron_doc):
    out = json.loads(serialize(lakehuron_doc))
    params = out["tswf:performs"]["tswf:hasTSAnalysis"]["tswf:parameters"]["@set"]
    assert {"tswf:name": "lambda", "@value": 0} in params


def test_serialize_omits_default_params():
    text = make_doc("http://example.org/workflows#defaults",
                    models=[("tswf:ARIMA", {"order": [2, 0, 0]})])
    out = json.loads(serialize(parse_document(text)))
    params = out["tswf:performs"]["tswf:hasTSAnalysis"]["tswf:parameters"]["@set"]
    assert [p["tswf:name"] for p in params] == ["order"]


def test_serialized_keys_are_sorted(lakehuron_doc):
    out = json.loads(serialize(lakehuron_doc))
    assert list(out) == sorted(out)


def test_serialize_normalizes_date_separator(lakehuron_doc):
    assert "2020-09-01T10:30:00" in serialize(lakehuron_doc)
