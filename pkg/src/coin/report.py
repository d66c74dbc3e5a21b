"""JSON report for a batch of interpretations.

Reports are byte-stable: keys are emitted in a fixed order, floats are
written with their shortest round-trip repr, and wall-clock timings are only
included on request.
"""

from __future__ import annotations

import json

import numpy as np

from .config import Config
from .engine import Interpretation

REPORT_VERSION = 1


def _float(x) -> float:
    return float(x)


def cluster_record(evidence) -> dict:
    return {
        "size": evidence.cluster_size,
        "centroid": [_float(v) for v in evidence.centroid],
        "margin": _float(evidence.margin),
        "gamma": _float(evidence.resolution.cluster_gamma),
        "penalty": _float(evidence.boundary.penalty),
        "nonzero_weight_count": evidence.boundary.nonzero_count,
        "converged": bool(evidence.boundary.converged),
    }


def interpretation_record(interp: Interpretation) -> dict:
    record = {
        "id": interp.outlier_id if isinstance(interp.outlier_id, (int, str)) else str(interp.outlier_id),
        "outlierness": _float(interp.outlierness),
        "base_outlierness": _float(interp.base_outlierness),
        "attributes": [{"index": int(i), "name": name, "score": _float(s)}
                       for i, name, s in interp.abnormal_attributes],
        "context_size": int(interp.context_size),
        "L": int(interp.L),
        "pruned_count": int(interp.pruned_count),
        "clusters": [cluster_record(e) for e in interp.clusters],
        "flags": list(interp.flags),
    }
    if interp.error is not None:
        record["error"] = interp.error
    return record


def build_report(interpretations, config: Config, seed: int, data_path=None, outliers_path=None,
                 timings: dict | None = None) -> dict:
    meta = {
        "version": REPORT_VERSION,
        "seed": int(seed),
        "config": config.replace(master_seed=int(seed)).to_dict(),
        "data": None if data_path is None else str(data_path),
        "outliers": None if outliers_path is None else str(outliers_path),
    }
    if timings is not None:
        meta["timings"] = {k: round(float(v), 6) for k, v in timings.items()}
    return {"meta": meta, "records": [interpretation_record(r) for r in interpretations]}


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_report(report))


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def predictions_from_report(report: dict, dataset) -> dict:
    """Map each record's id (resolved against ``dataset``) to its attribute index set."""
    out = {}
    for rec in report["records"]:
        oid = dataset.resolve_id(str(rec["id"]))
        out[oid] = {int(a["index"]) for a in rec["attributes"]}
    return out
