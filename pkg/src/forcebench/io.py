"""Model, load and measured-data files."""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import ParseError
from .frd import FrequencyResponseData, frd_from_csv
from .lti import TransferFunction


def _coeffs(d: dict, key: str, path) -> list[float]:
    value = d.get(key)
    if not isinstance(value, list) or not value:
        raise ParseError(f"'{key}' must be a non-empty list of numbers", str(path))
    out = []
    for i, c in enumerate(value):
        if isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
            raise ParseError(f"'{key}[{i}]' is not a finite number: {c!r}", str(path))
        out.append(float(c))
    return out


def model_from_dict(d: dict, path=None) -> TransferFunction:
    if not isinstance(d, dict):
        raise ParseError("model file must hold a JSON object", None if path is None else str(path))
    units = d.get("units", "")
    return TransferFunction(_coeffs(d, "num", path), _coeffs(d, "den", path), str(units))


def load_model(path) -> TransferFunction:
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, str(path), exc.lineno, exc.colno) from None
    return model_from_dict(d, path)


def model_to_dict(tf: TransferFunction, name: str = "") -> dict:
    return {"name": name, "units": tf.units, "num": [float(c) for c in tf.num],
            "den": [float(c) for c in tf.den]}


def save_model(tf: TransferFunction, path, name: str = "") -> None:
    Path(path).write_text(json.dumps(model_to_dict(tf, name), indent=2) + "\n")


def load_system(path, kind: str = "auto") -> TransferFunction | FrequencyResponseData:
    """Load a model JSON or FRD CSV, choosing by extension unless ``kind`` says otherwise."""
    path = Path(path)
    if kind == "auto":
        suffix = path.suffix.lower()
        if suffix not in (".json", ".csv"):
            raise ParseError(f"cannot tell the file kind from extension {suffix!r}; "
                             f"pass an explicit input format", str(path))
        kind = suffix[1:]
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    if kind == "json":
        return load_model(path)
    if kind == "csv":
        return frd_from_csv(path)
    raise ValueError(f"unknown input kind {kind!r}")
