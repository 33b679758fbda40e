"""Report and CSV serialization with a canonical form for determinism checks."""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone

import numpy as np

VOLATILE_KEYS = ("timestamp",)


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays so json can serialize them."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        # json.dump would emit non-standard tokens; keep reports portable.
        return repr(obj)
    return obj


def build_report(experiment: str, effective_config: dict, results: dict, version: str) -> dict:
    return {
        "experiment": experiment,
        "version": version,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": to_jsonable(effective_config),
        "results": to_jsonable(results),
    }


def write_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def canonical_report_bytes(report: dict) -> bytes:
    """Serialized report with volatile fields removed; two runs of the same
    seeded config must agree byte-for-byte on this form."""
    scrubbed = {k: v for k, v in report.items() if k not in VOLATILE_KEYS}
    return json.dumps(scrubbed, indent=2, sort_keys=True).encode()


def load_report(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def write_csv(path, header, rows) -> None:
    """Rows of floats/ints; floats written with repr for round-trip fidelity."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
