"""Workflow documents: the JSON-LD subset reader, validator and writer.

Only the JSON-LD constructs the workflow grammar actually uses are handled:
an @context prefix map, @id, @type, @value and @set. Nested analysis blocks
are accepted either inside the input block or as top-level siblings; the
serializer always writes them as top-level siblings with sorted keys, which
is the canonical form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime

from . import vocabulary
from .errors import StructureError, TsflowError
from .series import parse_instant
from .vocabulary import DEFAULT_CONTEXT, NAMESPACE, TermRegistry

DMCC_PREFIX = "dmcc"
DMCC_NAMESPACE = "http://dicits.ugr.es/linkeddata/dmcc-schema/"

_FIELD_DTYPES = ("datetime", "integer", "real", "string")


class DocumentSyntaxError(TsflowError):
    code = "SyntaxError"

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


@dataclass(frozen=True)
class OpSpec:
    term: str  # curie
    params: dict = field(default_factory=dict)  # explicitly set params only
    # where the op sits in the source document, for diagnostics
    source_path: str = field(default="", compare=False, repr=False)


@dataclass(frozen=True)
class InputSpec:
    source_kind: str
    src: str
    fields: tuple  # of {"name": ..., "dtype": ...}


@dataclass(frozen=True)
class OutputSpec:
    id: str
    kind: str
    measures: tuple  # measure curies


@dataclass(frozen=True)
class ServiceMeta:
    auth_required: bool | None = None
    cost_amount: float | None = None
    cost_currency: str | None = None


@dataclass(frozen=True)
class WorkflowDoc:
    id: str
    name: str = ""
    description: str = ""
    author: str = ""
    version: str = ""
    date_created: datetime | None = None
    code_repository: str | None = None
    input: InputSpec | None = None
    plots: tuple = ()
    info_analyses: tuple = ()
    stationary_analyses: tuple = ()
    preprocessing: tuple = ()
    models: tuple = ()
    outputs: tuple = ()
    service_meta: ServiceMeta | None = None
    parse_warnings: tuple = field(default=(), compare=False)

    @property
    def flow(self):
        """Fixed execution stage order; list order preserved within a stage."""
        return (
            ("preprocessing", self.preprocessing),
            ("plots", self.plots),
            ("info_analyses", self.info_analyses),
            ("stationary_analyses", self.stationary_analyses),
            ("models", self.models),
            ("outputs", self.outputs),
        )


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # error | warning
    path: str
    code: str
    message: str

    def to_dict(self):
        return {"severity": self.severity, "path": self.path,
                "code": self.code, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple

    @property
    def valid(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)

    def errors(self):
        return [d for d in self.diagnostics if d.severity == "error"]

    def to_dict(self):
        return {"valid": self.valid,
                "diagnostics": [d.to_dict() for d in self.diagnostics]}


# ---------------------------------------------------------------- parsing


class _Parser:
    def __init__(self, context: dict):
        self.context = dict(DEFAULT_CONTEXT)
        self.context.update(context or {})
        self.warnings: list[str] = []

    def compact(self, name: str) -> str:
        """Normalize a key or type name to curie form using the context."""
        for prefix, ns in self.context.items():
            if name.startswith(ns):
                return f"{prefix}:{name[len(ns):]}"
        return name

    def warn(self, path, msg):
        self.warnings.append(f"{path}: {msg}")

    def scalar(self, node, path):
        """Unwrap @value/@type nodes to a plain scalar."""
        if isinstance(node, dict):
            if "@value" not in node:
                raise StructureError(path, "expected a scalar or @value node")
            return node["@value"]
        return node

    def as_list(self, node):
        if isinstance(node, dict) and "@set" in node:
            node = node["@set"]
        return node if isinstance(node, list) else [node]

    def op_spec(self, node, path) -> OpSpec:
        if not isinstance(node, dict) or "@type" not in node:
            raise StructureError(path, "operation node needs an @type")
        term = self.compact(node["@type"])
        params = {}
        raw = node.get("tswf:parameters")
        if raw is not None:
            for i, pnode in enumerate(self.as_list(raw)):
                ppath = f"{path}/tswf:parameters/{i}"
                if not isinstance(pnode, dict) or "tswf:name" not in pnode:
                    raise StructureError(ppath, "parameter needs tswf:name")
                params[pnode["tswf:name"]] = self.scalar(
                    {"@value": pnode.get("@value")}, ppath)
        for key in node:
            if key not in ("@type", "tswf:parameters"):
                self.warn(f"{path}/{key}", "unknown key ignored")
        return OpSpec(term=term, params=params, source_path=path)

    def op_list(self, node, path) -> tuple:
        if isinstance(node, dict) and "@set" in node:
            items = node["@set"]
        elif isinstance(node, list):
            items = node
        else:
            items = [node]
        return tuple(
            self.op_spec(item, f"{path}/{i}") for i, item in enumerate(items)
        )

    def input_spec(self, node, path) -> InputSpec:
        if not isinstance(node, dict):
            raise StructureError(path, "input must be an object")
        source = node.get("tswf:source")
        if not isinstance(source, dict):
            raise StructureError(f"{path}/tswf:source", "missing input source")
        kind = self.compact(source.get("@type", ""))
        src = self.scalar(source.get("tswf:src", ""), f"{path}/tswf:source/tswf:src")
        fields = []
        for i, fnode in enumerate(self.as_list(source.get("tswf:fields", []))):
            fpath = f"{path}/tswf:source/tswf:fields/{i}"
            if not isinstance(fnode, dict) or "@value" not in fnode:
                raise StructureError(fpath, "field needs @value (its name)")
            dtype = self.compact(fnode.get("@type", "tswf:string")).split(":", 1)[-1]
            fields.append({"name": fnode["@value"], "dtype": dtype})
        return InputSpec(source_kind=kind, src=str(src), fields=tuple(fields))

    def output_specs(self, node, path) -> tuple:
        out = []
        for i, onode in enumerate(self.as_list(node)):
            opath = f"{path}/{i}"
            if not isinstance(onode, dict) or "@type" not in onode:
                raise StructureError(opath, "output needs an @type")
            measures = tuple(
                self.compact(m.get("@type", "")) if isinstance(m, dict) else self.compact(m)
                for m in self.as_list(onode.get("tswf:hasMeasures", []))
            )
            out.append(OutputSpec(
                id=str(onode.get("id") or onode.get("@id") or f"output-{i}"),
                kind=self.compact(onode["@type"]),
                measures=measures,
            ))
        return tuple(out)

    def service_meta(self, node, path) -> ServiceMeta:
        if not isinstance(node, dict):
            raise StructureError(path, "service metadata must be an object")
        cost = node.get("dmcc:costPerRun")
        amount = currency = None
        if isinstance(cost, dict):
            amount = self.scalar(cost.get("dmcc:amount"), f"{path}/dmcc:costPerRun")
            currency = cost.get("dmcc:currency")
        auth = node.get("dmcc:authRequired")
        return ServiceMeta(
            auth_required=None if auth is None else bool(auth),
            cost_amount=None if amount is None else float(amount),
            cost_currency=currency,
        )


def parse_document(text: str) -> WorkflowDoc:
    """Parse a workflow document from JSON-LD text into the typed AST."""
    try:
        root = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(str(exc), position=exc.pos) from exc
    if not isinstance(root, dict):
        raise StructureError("/", "document root must be a JSON object")

    p = _Parser(root.get("@context", {}))
    doc_id = root.get("@id")
    if not doc_id or not isinstance(doc_id, str):
        raise StructureError("/", "missing @id")
    dtype = p.compact(root.get("@type", ""))
    if dtype != "tswf:TSAnalysis":
        raise StructureError("/@type", f"expected tswf:TSAnalysis, got {dtype!r}")

    fields = {"id": doc_id}
    op_keys = {
        "tswf:hasPlot": ("plots", "tswf:TSPlot"),
        "tswf:hasInformationAnalysis": ("info_analyses", "tswf:InformationAnalysis"),
        "tswf:hasStationaryAnalysis": ("stationary_analyses", "tswf:StatitionaryAnalysis"),
        "tswf:hasPreprocessing": ("preprocessing", "tswf:Preprocessing"),
    }

    def read_op_block(key, node, path):
        attr, _container = op_keys[key]
        # the container node may carry its own @type next to the @set
        if isinstance(node, dict) and "@type" in node and "@set" in node:
            items = node["@set"]
        else:
            items = node
        fields[attr] = p.op_list(items, path)

    handled = {"@context", "@id", "@type"}
    scalar_map = {
        "tswf:name": "name", "tswf:description": "description",
        "tswf:author": "author", "tswf:version": "version",
    }
    for key, attr in scalar_map.items():
        if key in root:
            fields[attr] = str(p.scalar(root[key], f"/{key}"))
            handled.add(key)
    if "tswf:dateCreated" in root:
        raw = str(p.scalar(root["tswf:dateCreated"], "/tswf:dateCreated"))
        try:
            fields["date_created"] = parse_instant(raw)
        except ValueError as exc:
            raise StructureError("/tswf:dateCreated", str(exc)) from exc
        handled.add("tswf:dateCreated")
    if "tswf:codeRepository" in root:
        fields["code_repository"] = str(
            p.scalar(root["tswf:codeRepository"], "/tswf:codeRepository"))
        handled.add("tswf:codeRepository")

    if "tswf:hasInput" in root:
        node = root["tswf:hasInput"]
        fields["input"] = p.input_spec(node, "/tswf:hasInput")
        handled.add("tswf:hasInput")
        if isinstance(node, dict):
            for key in node:
                if key in op_keys:
                    read_op_block(key, node[key], f"/tswf:hasInput/{key}")
                elif key not in ("@type", "tswf:source"):
                    p.warn(f"/tswf:hasInput/{key}", "unknown key ignored")

    for key in op_keys:
        if key in root:
            read_op_block(key, root[key], f"/{key}")
            handled.add(key)

    if "tswf:performs" in root:
        node = root["tswf:performs"]
        if not isinstance(node, dict):
            raise StructureError("/tswf:performs", "performs must be an object")
        models = []
        for key, value in node.items():
            if key in ("tswf:hasMLAnalysis", "tswf:hasTSAnalysis", "tswf:hasTSRegression"):
                models.extend(p.op_list(value, f"/tswf:performs/{key}"))
            elif key != "@type":
                p.warn(f"/tswf:performs/{key}", "unknown key ignored")
        fields["models"] = tuple(models)
        handled.add("tswf:performs")

    if "tswf:hasOutput" in root:
        node = root["tswf:hasOutput"]
        items = node.get("@set", node) if isinstance(node, dict) else node
        fields["outputs"] = p.output_specs(items, "/tswf:hasOutput")
        handled.add("tswf:hasOutput")

    if "dmcc:serviceMeta" in root:
        fields["service_meta"] = p.service_meta(
            root["dmcc:serviceMeta"], "/dmcc:serviceMeta")
        handled.add("dmcc:serviceMeta")

    for key in root:
        if key not in handled and not key.startswith("@"):
            p.warn(f"/{key}", "unknown key ignored")

    return WorkflowDoc(**fields, parse_warnings=tuple(p.warnings))


# ---------------------------------------------------------------- validation


def _check_param_value(spec, value, path, diags):
    def err(code, msg):
        diags.append(Diagnostic("error", path, code, msg))

    def scalar_ok(v, kind):
        if kind == "integer":
            return isinstance(v, int) and not isinstance(v, bool)
        if kind == "real":
            return isinstance(v, (int, float)) and not isinstance(v, bool)
        if kind == "string":
            return isinstance(v, str)
        if kind == "boolean":
            return isinstance(v, bool)
        return False

    def bounds_ok(v):
        if spec.bounds is None:
            return True
        lo, hi = spec.bounds
        return (lo is None or v >= lo) and (hi is None or v <= hi)

    if spec.kind.endswith("-list"):
        base = spec.kind.removesuffix("-list")
        if not isinstance(value, list):
            err("ParamType", f"{spec.name} must be a {spec.kind}")
            return
        if spec.length is not None and len(value) != spec.length:
            err("ParamShape", f"{spec.name} must have length {spec.length}")
            return
        for v in value:
            if not scalar_ok(v, base):
                err("ParamType", f"{spec.name} entries must be {base}")
                return
            if not bounds_ok(v):
                err("ParamBounds", f"{spec.name} entries must lie in {spec.bounds}")
                return
    else:
        if not scalar_ok(value, spec.kind):
            err("ParamType", f"{spec.name} must be {spec.kind}")
            return
        if not bounds_ok(value):
            err("ParamBounds", f"{spec.name} must lie in {spec.bounds}")
        if spec.choices is not None and value not in spec.choices:
            err("ParamChoice", f"{spec.name} must be one of {spec.choices}")


def _check_op(op: OpSpec, registry: TermRegistry, path: str, diags, category=None):
    try:
        term = registry.resolve(op.term)
    except TsflowError:
        diags.append(Diagnostic("error", path, "UnknownTerm",
                                f"{op.term} is not a vocabulary term"))
        return None
    if category and term.category != category:
        diags.append(Diagnostic("error", path, "WrongCategory",
                                f"{op.term} is {term.category}, expected {category}"))
    schema = {s.name: s for s in term.params}
    for name, value in op.params.items():
        ppath = f"{path}/tswf:parameters/{name}"
        if name not in schema:
            diags.append(Diagnostic("error", ppath, "UnknownParam",
                                    f"{op.term} takes no parameter {name!r}"))
            continue
        _check_param_value(schema[name], value, ppath, diags)
    if not term.executable:
        diags.append(Diagnostic(
            "warning", path, "NotExecutable",
            f"{op.term} is registered but not executable; the step will "
            "fail at run time"))
    return term


def validate(doc: WorkflowDoc, registry: TermRegistry | None = None) -> ValidationReport:
    """Check a parsed document against the vocabulary and its invariants."""
    registry = registry or vocabulary.load_vocabulary()
    diags: list[Diagnostic] = []

    if not doc.id or "://" not in doc.id.split("#")[0]:
        diags.append(Diagnostic("error", "/@id", "BadId",
                                "@id must be a non-empty absolute IRI"))
    for msg in doc.parse_warnings:
        path, _, rest = msg.partition(": ")
        diags.append(Diagnostic("warning", path, "UnknownKey", rest or msg))

    if doc.input is not None:
        path = "/tswf:hasInput/tswf:source"
        _check_op(OpSpec(doc.input.source_kind), registry, path, diags,
                  category="Input")
        names = [f["name"] for f in doc.input.fields]
        if len(set(names)) != len(names):
            diags.append(Diagnostic("error", f"{path}/tswf:fields",
                                    "DuplicateField", "field names must be unique"))
        n_time = sum(1 for f in doc.input.fields if f["dtype"] == "datetime")
        n_num = sum(1 for f in doc.input.fields if f["dtype"] in ("integer", "real"))
        if n_time > 1:
            diags.append(Diagnostic("error", f"{path}/tswf:fields", "TooManyTimeFields",
                                    "at most one datetime field is allowed"))
        if n_num < 1:
            diags.append(Diagnostic("error", f"{path}/tswf:fields", "NoNumericField",
                                    "at least one numeric field is required"))
        for f in doc.input.fields:
            if f["dtype"] not in _FIELD_DTYPES:
                diags.append(Diagnostic("error", f"{path}/tswf:fields", "BadFieldType",
                                        f"unknown field dtype {f['dtype']!r}"))

    stage_checks = [
        ("/tswf:hasPreprocessing", doc.preprocessing, "Preprocessing"),
        ("/tswf:hasPlot", doc.plots, "Plot"),
        ("/tswf:hasInformationAnalysis", doc.info_analyses, "InformationAnalysis"),
        ("/tswf:hasStationaryAnalysis", doc.stationary_analyses, "StationaryAnalysis"),
        ("/tswf:performs", doc.models, "PredictiveModel"),
    ]
    for base, ops, category in stage_checks:
        for i, op in enumerate(ops):
            _check_op(op, registry, op.source_path or f"{base}/{i}", diags,
                      category=category)

    has_fc_output = False
    for i, out in enumerate(doc.outputs):
        path = f"/tswf:hasOutput/{i}"
        kind = _check_op(OpSpec(out.kind), registry, path, diags)
        if kind is not None and out.kind == "tswf:ForecastAccuracy":
            has_fc_output = True
        if not out.measures:
            diags.append(Diagnostic("error", f"{path}/tswf:hasMeasures",
                                    "EmptyMeasures", "output needs >= 1 measure"))
        for j, m in enumerate(out.measures):
            mpath = f"{path}/tswf:hasMeasures/{j}"
            term = _check_op(OpSpec(m), registry, mpath, diags)
            if term is not None and term.category != "EvaluationMeasure":
                diags.append(Diagnostic("error", mpath, "WrongCategory",
                                        f"{m} is not an evaluation measure"))

    if has_fc_output and not doc.models:
        diags.append(Diagnostic("error", "/tswf:hasOutput", "ModelOutputMismatch",
                                "forecast-accuracy output requires >= 1 model"))
    if doc.models and not has_fc_output:
        diags.append(Diagnostic("error", "/tswf:performs", "ModelOutputMismatch",
                                "models require a forecast-accuracy output"))

    if doc.service_meta is not None and doc.service_meta.cost_amount is not None:
        if doc.service_meta.cost_amount < 0:
            diags.append(Diagnostic("error", "/dmcc:serviceMeta", "NegativeCost",
                                    "cost per run must be >= 0"))

    return ValidationReport(tuple(diags))


def resolved_params(op: OpSpec, registry: TermRegistry | None = None) -> dict:
    """Explicit params plus schema defaults (data-dependent ones stay None)."""
    registry = registry or vocabulary.load_vocabulary()
    term = registry.resolve(op.term)
    out = {}
    for spec in term.params:
        if spec.name in op.params:
            out[spec.name] = op.params[spec.name]
        else:
            out[spec.name] = spec.default
    return out


# ---------------------------------------------------------------- writing


def _op_node(op: OpSpec) -> dict:
    node = {"@type": op.term}
    if op.params:
        node["tswf:parameters"] = {"@set": [
            {"tswf:name": name, "@value": op.params[name]}
            for name in sorted(op.params)
        ]}
    return node


def serialize(doc: WorkflowDoc) -> str:
    """Write canonical compact JSON-LD; parse_document inverts this exactly."""
    root: dict = {"@context": dict(DEFAULT_CONTEXT)}
    if doc.service_meta is not None:
        root["@context"][DMCC_PREFIX] = DMCC_NAMESPACE
    root["@id"] = doc.id
    root["@type"] = "tswf:TSAnalysis"
    for key, value in (("tswf:name", doc.name), ("tswf:description", doc.description),
                       ("tswf:author", doc.author), ("tswf:version", doc.version)):
        if value:
            root[key] = value
    if doc.date_created is not None:
        root["tswf:dateCreated"] = doc.date_created.isoformat(sep="T")
    if doc.code_repository is not None:
        root["tswf:codeRepository"] = {"@type": "tswf:url",
                                       "@value": doc.code_repository}
    if doc.input is not None:
        root["tswf:hasInput"] = {
            "@type": "tswf:Data",
            "tswf:source": {
                "@type": doc.input.source_kind,
                "tswf:src": doc.input.src,
                "tswf:fields": {"@set": [
                    {"@value": f["name"], "@type": f"tswf:{f['dtype']}"}
                    for f in doc.input.fields
                ]},
            },
        }
    stage_map = (
        ("tswf:hasPreprocessing", "tswf:Preprocessing", doc.preprocessing),
        ("tswf:hasPlot", "tswf:TSPlot", doc.plots),
        ("tswf:hasInformationAnalysis", "tswf:InformationAnalysis", doc.info_analyses),
        ("tswf:hasStationaryAnalysis", "tswf:StatitionaryAnalysis",
         doc.stationary_analyses),
    )
    for key, container, ops in stage_map:
        if ops:
            root[key] = {"@type": container,
                         "@set": [_op_node(op) for op in ops]}
    if doc.models:
        performs: dict = {"@type": "tswf:PredictiveModel"}
        buckets = {"tswf:hasMLAnalysis": [], "tswf:hasTSAnalysis": [],
                   "tswf:hasTSRegression": []}
        for op in doc.models:
            local = op.term.split(":", 1)[-1]
            if local in ("SVM", "NeuralNetwork", "RandomForest"):
                buckets["tswf:hasMLAnalysis"].append(op)
            elif local in ("AR", "LASSO", "MARS"):
                buckets["tswf:hasTSRegression"].append(op)
            else:
                buckets["tswf:hasTSAnalysis"].append(op)
        for key, ops in buckets.items():
            if len(ops) == 1:
                performs[key] = _op_node(ops[0])
            elif ops:
                performs[key] = {"@set": [_op_node(op) for op in ops]}
        root["tswf:performs"] = performs
    if doc.outputs:
        root["tswf:hasOutput"] = {
            "@type": "tswf:EvaluationMeasures",
            "@set": [
                {
                    "id": out.id,
                    "@type": out.kind,
                    "tswf:hasMeasures": [{"@type": m} for m in out.measures],
                }
                for out in doc.outputs
            ],
        }
    if doc.service_meta is not None:
        meta: dict = {}
        if doc.service_meta.cost_amount is not None:
            meta["dmcc:costPerRun"] = {
                "dmcc:amount": doc.service_meta.cost_amount,
                "dmcc:currency": doc.service_meta.cost_currency,
            }
        if doc.service_meta.auth_required is not None:
            meta["dmcc:authRequired"] = doc.service_meta.auth_required
        root["dmcc:serviceMeta"] = meta
    return json.dumps(root, indent=2, sort_keys=True, ensure_ascii=False)
