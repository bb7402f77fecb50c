"""HTTP bias-report service.

Three endpoints under /v1: health, catalogs (dataset, metric, and algorithm
ids the other endpoints accept), and bias-report, which runs the
split/train/measure pipeline, optionally routes one mitigation algorithm,
and returns per-metric values with fair ranges and explanation records.
Reports are cached in memory under a canonical digest of the request, so a
repeated request skips the pipeline and is marked ``"cached": true``.

All numbers on the wire are strict JSON: an infinite metric value is
encoded as a null value with flag "infinite", an undefined one as null with
flag "undefined" and the reason inside the explanation record.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from collections import OrderedDict
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import sampledata
from .bench import DEFAULT_METRICS, run_pipeline
from .dataset import GroupSpec, StructuredDataset, load_preset, preset_names, preset_spec
from .errors import (
    ArgumentError,
    CapabilityError,
    CatalogError,
    FairlabError,
    ParseError,
    SchemaError,
)
from .explain import explain_json
from .metrics import METRIC_INFO, MetricContext, metric_ids
from .mitigate import ALGORITHMS

__all__ = ["FAIR_RANGES", "create_app", "fair_range"]

DEFAULT_SEED = 0

# DI follows the four-fifths rule; difference metrics get a symmetric band.
FAIR_RANGES = {
    "disparate_impact": (0.8, 1.25),
}
_DIFFERENCE_BAND = (-0.1, 0.1)
_UPPER_BAND = (0.9, 1.0)


def fair_range(metric_id: str) -> tuple[float, float] | None:
    """Inclusive fair band for a metric; None when no ideal exists."""
    if metric_id in FAIR_RANGES:
        return FAIR_RANGES[metric_id]
    info = METRIC_INFO[metric_id]
    if info.ideal is None:
        return None
    if info.ideal == 0.0:
        return _DIFFERENCE_BAND
    return _UPPER_BAND if info.greater_is_fairer else _DIFFERENCE_BAND


def _wire_safe(obj):
    """Strict-JSON copy: non-finite floats become None."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _wire_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_wire_safe(v) for v in obj]
    return obj


class _ReportCache:
    """Thread-safe LRU of finished reports; failures are never stored."""

    def __init__(self, maxsize: int = 128):
        self.maxsize = maxsize
        self._entries: OrderedDict[str, dict] = OrderedDict()
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: str):
        with self._lock:
            if key in self._entries:
                self._entries.move_to_end(key)
                self.hits += 1
                return self._entries[key]
            self.misses += 1
            return None

    def put(self, key: str, value: dict) -> dict:
        with self._lock:
            winner = self._entries.setdefault(key, value)
            self._entries.move_to_end(key)
            while len(self._entries) > self.maxsize:
                self._entries.popitem(last=False)
            return winner


class _ServiceError(Exception):
    """Carries the HTTP status and error envelope fields."""

    def __init__(self, status: int, code: str, stage: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.stage = stage


def _envelope(exc: _ServiceError) -> JSONResponse:
    return JSONResponse(
        status_code=exc.status,
        content={
            "error": {"code": exc.code, "stage": exc.stage, "message": str(exc)}
        },
    )


def _catalog_message(exc: CatalogError) -> str:
    if exc.valid:
        return f"{exc}; valid: {sorted(exc.valid)}"
    return str(exc)


def _metric_entry(metric_id: str, ctx: MetricContext) -> dict:
    record = explain_json(metric_id, ctx)
    raw = record.stats.get("value")
    band = fair_range(metric_id)
    if raw is None:
        value, flag, fair = None, "undefined", None
    elif math.isinf(raw):
        value, flag, fair = None, "infinite", False
    else:
        value, flag = raw, None
        fair = None if band is None else bool(band[0] <= raw <= band[1])
    return {
        "metric_id": metric_id,
        "value": value,
        "flag": flag,
        "ideal": METRIC_INFO[metric_id].ideal,
        "fair_range": None if band is None else list(band),
        "fair": fair,
        "explanation": _wire_safe(record.to_dict()),
    }


def create_app(
    data_dir=None,
    generate_missing: bool = True,
    cache_size: int = 128,
    default_seed: int = DEFAULT_SEED,
) -> FastAPI:
    """Build the service; datasets load lazily from data_dir.

    With generate_missing enabled (the default), a preset whose CSV is
    absent from data_dir is backed by the bundled demo generator, so the
    service runs out of the box.
    """
    app = FastAPI(title="fairlab service", version="1")
    data_dir = Path(data_dir) if data_dir is not None else Path("data")
    cache = _ReportCache(maxsize=cache_size)
    datasets: dict[str, StructuredDataset] = {}
    datasets_lock = threading.Lock()
    app.state.cache = cache
    app.state.pipeline_runs = 0

    def load_dataset(name: str) -> StructuredDataset:
        with datasets_lock:
            if name in datasets:
                return datasets[name]
        try:
            ds = load_preset(name, data_dir)
        except CapabilityError:
            if not generate_missing:
                raise
            data_dir.mkdir(parents=True, exist_ok=True)
            sampledata.write_demo_files(data_dir)
            ds = load_preset(name, data_dir)
        with datasets_lock:
            return datasets.setdefault(name, ds)

    @app.exception_handler(_ServiceError)
    async def service_error_handler(request: Request, exc: _ServiceError):
        return _envelope(exc)

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.get("/v1/catalogs")
    def catalogs():
        return {
            "datasets": [
                {
                    "id": name,
                    "protected_attributes": [
                        p.name for p in preset_spec(name).protected
                    ],
                }
                for name in preset_names()
            ],
            "metrics": [
                {
                    "id": mid,
                    "kind": METRIC_INFO[mid].kind,
                    "ideal": METRIC_INFO[mid].ideal,
                    "greater_is_fairer": METRIC_INFO[mid].greater_is_fairer,
                    "definition": METRIC_INFO[mid].definition,
                    "fair_range": (
                        None if fair_range(mid) is None else list(fair_range(mid))
                    ),
                }
                for mid in metric_ids()
            ],
            "algorithms": [
                {"id": info.algorithm_id, "category": info.category,
                 "summary": info.summary}
                for info in ALGORITHMS.values()
            ],
            "default_metrics": list(DEFAULT_METRICS),
        }

    def _validate(body: dict) -> dict:
        if not isinstance(body, dict):
            raise _ServiceError(
                400, "invalid_request", "validate", "request body must be an object"
            )
        known = {
            "dataset",
            "protected",
            "privileged",
            "unprivileged",
            "metrics",
            "algorithm",
            "params",
            "seed",
        }
        unknown = sorted(set(body) - known)
        if unknown:
            raise _ServiceError(
                400, "invalid_request", "validate",
                f"unknown request field(s): {unknown}",
            )
        dataset = body.get("dataset")
        if not isinstance(dataset, str):
            raise _ServiceError(
                400, "invalid_request", "validate", "dataset id is required"
            )
        if dataset not in preset_names():
            raise _ServiceError(
                404, "unknown_id", "validate",
                f"unknown dataset {dataset!r}; valid: {preset_names()}",
            )
        protected = body.get("protected")
        if not isinstance(protected, str):
            raise _ServiceError(
                400, "invalid_request", "validate", "protected attribute is required"
            )
        spec_protected = [p.name for p in preset_spec(dataset).protected]
        if protected not in spec_protected:
            raise _ServiceError(
                404, "unknown_id", "validate",
                f"unknown protected attribute {protected!r}; valid: {spec_protected}",
            )
        metrics = body.get("metrics") or list(DEFAULT_METRICS)
        if not isinstance(metrics, list) or not metrics:
            raise _ServiceError(
                400, "invalid_request", "validate", "metrics must be a nonempty list"
            )
        bad = [m for m in metrics if m not in METRIC_INFO]
        if bad:
            raise _ServiceError(
                404, "unknown_id", "validate",
                f"unknown metric(s) {bad}; valid: {metric_ids()}",
            )
        algorithm = body.get("algorithm")
        if algorithm is not None and algorithm not in ALGORITHMS:
            raise _ServiceError(
                404, "unknown_id", "validate",
                f"unknown mitigation algorithm {algorithm!r}; "
                f"valid: {list(ALGORITHMS)}",
            )
        params = body.get("params") or {}
        if not isinstance(params, dict):
            raise _ServiceError(
                400, "invalid_request", "validate", "params must be an object"
            )
        privileged = body.get("privileged")
        unprivileged = body.get("unprivileged")
        if (privileged is None) != (unprivileged is None):
            raise _ServiceError(
                400, "invalid_request", "validate",
                "privileged and unprivileged value sets come as a pair",
            )
        seed = body.get("seed", default_seed)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise _ServiceError(
                400, "invalid_request", "validate", "seed must be an integer"
            )
        return {
            "dataset": dataset,
            "protected": protected,
            "privileged": privileged,
            "unprivileged": unprivileged,
            "metrics": list(metrics),
            "algorithm": algorithm,
            "params": params,
            "seed": seed,
        }

    def _groups(ds: StructuredDataset, req: dict) -> tuple[GroupSpec, GroupSpec]:
        if req["privileged"] is not None:
            try:
                priv = GroupSpec(
                    [{req["protected"]: float(v)} for v in req["privileged"]]
                )
                unpriv = GroupSpec(
                    [{req["protected"]: float(v)} for v in req["unprivileged"]]
                )
            except (TypeError, ValueError, FairlabError) as exc:
                raise _ServiceError(
                    400, "invalid_request", "validate", f"bad group values: {exc}"
                ) from None
        else:
            priv = ds.default_privileged_spec(req["protected"])
            unpriv = ds.default_unprivileged_spec(req["protected"])
        try:
            priv.validate(ds)
            unpriv.validate(ds)
            overlap = priv.mask(ds) & unpriv.mask(ds)
        except FairlabError as exc:
            raise _ServiceError(
                400, "invalid_request", "validate", str(exc)
            ) from None
        if overlap.any():
            raise _ServiceError(
                400, "invalid_request", "validate",
                f"groups overlap on {int(overlap.sum())} instance(s)",
            )
        return priv, unpriv

    def _compute_report(req: dict, ds, priv, unpriv) -> dict:
        app.state.pipeline_runs += 1
        try:
            result = run_pipeline(
                ds,
                priv,
                unpriv,
                metrics=(),
                algorithm=req["algorithm"],
                params=req["params"],
                seed=req["seed"],
            )
        except CatalogError as exc:
            raise _ServiceError(
                404, "unknown_id", "pipeline", _catalog_message(exc)
            ) from None
        except (ArgumentError, SchemaError, ParseError) as exc:
            raise _ServiceError(
                400, "invalid_request", "pipeline", str(exc)
            ) from None
        except FairlabError as exc:
            raise _ServiceError(
                500, "pipeline_failure", "pipeline",
                f"{type(exc).__name__}: {exc}",
            ) from None

        def block(pred) -> dict:
            ctx = MetricContext(result.test, priv, unpriv, predicted=pred)
            return {"metrics": [_metric_entry(mid, ctx) for mid in req["metrics"]]}

        request_digest = _request_digest(req)
        provenance_digest = hashlib.blake2b(
            f"{result.dataset_digest}:{request_digest}".encode(), digest_size=8
        ).hexdigest()
        report = {
            "dataset": req["dataset"],
            "protected": req["protected"],
            "privileged": priv.describe(),
            "unprivileged": unpriv.describe(),
            "metrics": req["metrics"],
            "algorithm": req["algorithm"],
            "seed": req["seed"],
            "before": block(result.pred_before),
            "accuracy": {
                "balanced_accuracy_before": result.balanced_accuracy_before,
                "balanced_accuracy_after": result.balanced_accuracy_after,
            },
            "provenance": {
                "digest": provenance_digest,
                "dataset_digest": result.dataset_digest,
                "request_digest": request_digest,
                "threshold_before": result.threshold_before,
                "threshold_after": result.threshold_after,
            },
        }
        if result.pred_after is not None:
            report["after"] = block(result.pred_after)
        return report

    def _request_digest(req: dict) -> str:
        payload = json.dumps(req, sort_keys=True, default=str)
        return hashlib.blake2b(payload.encode(), digest_size=8).hexdigest()

    @app.post("/v1/bias-report")
    async def bias_report(request: Request):
        try:
            body = await request.json()
        except Exception:
            raise _ServiceError(
                400, "invalid_request", "validate", "request body is not valid JSON"
            ) from None
        req = _validate(body)
        key = _request_digest(req)
        cached = cache.get(key)
        if cached is not None:
            return {"report": cached, "cached": True}
        try:
            ds = load_dataset(req["dataset"])
        except FairlabError as exc:
            raise _ServiceError(
                500, "pipeline_failure", "load", str(exc)
            ) from None
        priv, unpriv = _groups(ds, req)
        report = cache.put(key, _compute_report(req, ds, priv, unpriv))
        return {"report": report, "cached": False}

    return app
