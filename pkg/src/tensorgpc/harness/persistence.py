"""On-disk formats: surrogate models (JSON) and run histories (CSV).

Model document::

    {
      "schema_version": 1,
      "d": 3, "p": 2, "R": 2,
      "family": "hermite",
      "standardization": [[mean_1, std_1], ..., [mean_d, std_d]],
      "factors": [U1, ..., Ud]       # each a list of p+1 rows of R floats
    }

Floats are written with ``repr`` so a round trip is bit-exact.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from ..cptensor import CPTensor
from ..exceptions import ModelLoadError, TensorGPCError
from ..polybasis import BasisFamily
from ..surrogate import SurrogateModel

SCHEMA_VERSION = 1
HISTORY_HEADER = ("round", "samples", "train_err", "test_err", "rank", "objective", "wall_ms")


def model_to_dict(model: SurrogateModel) -> dict:
    X = model.coeffs
    return {
        "schema_version": SCHEMA_VERSION,
        "d": X.dims,
        "p": model.basis.max_degree,
        "R": X.rank,
        "family": model.basis.kind,
        "standardization": [[float(m), float(s)] for m, s in zip(model.mean, model.std)],
        "factors": [U.tolist() for U in X.factors],
    }


def model_from_dict(doc) -> SurrogateModel:
    if not isinstance(doc, dict) or "schema_version" not in doc:
        raise ModelLoadError("model document has no schema_version")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ModelLoadError(
            f"unsupported schema_version {doc['schema_version']!r} (this build reads {SCHEMA_VERSION})"
        )
    try:
        d, p, R = int(doc["d"]), int(doc["p"]), int(doc["R"])
        basis = BasisFamily(doc["family"], p)
        stdz = np.asarray(doc["standardization"], dtype=float)
        factors = [np.asarray(U, dtype=float) for U in doc["factors"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelLoadError(f"malformed model document: {exc}") from exc
    if stdz.shape != (d, 2) or len(factors) != d or any(U.shape != (p + 1, R) for U in factors):
        raise ModelLoadError("model document dimensions are inconsistent with d, p, R")
    try:
        return SurrogateModel(CPTensor(factors), basis, stdz[:, 0], stdz[:, 1])
    except TensorGPCError as exc:
        raise ModelLoadError(f"invalid model contents: {exc}") from exc


def persist_model(model: SurrogateModel, path) -> Path:
    """Write ``model`` to ``path`` atomically (temporary file + rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def load_model(path) -> SurrogateModel:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelLoadError(f"{path}: not a complete model document ({exc})") from exc
    return model_from_dict(doc)


@dataclass(frozen=True)
class RoundRecord:
    """One row of a run history."""

    round: int
    samples: int
    train_err: float
    test_err: float
    rank: int
    objective: float
    wall_ms: float


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def emit_history(history, path) -> Path:
    """Write the per-round history as CSV (header plus one row per round)."""
    rows = list(history)
    if not rows:
        raise ValueError("cannot write an empty history")
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(HISTORY_HEADER) + "\n")
        for rec in rows:
            fh.write(",".join(_fmt(v) for v in astuple(rec)) + "\n")
    return path


def read_history(path) -> list[RoundRecord]:
    types = [f.type for f in fields(RoundRecord)]
    casts = [int if t in ("int", int) else float for t in types]
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != HISTORY_HEADER:
            raise ValueError(f"unexpected history header {header}")
        return [RoundRecord(*(c(v) for c, v in zip(casts, row))) for row in reader]
