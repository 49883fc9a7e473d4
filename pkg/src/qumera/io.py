"""JSON file formats for specs, observables and reports.

Complex entries are stored as ``[re, im]`` pairs. Reports print every float
with 17 significant digits so that a re-parse reproduces the bits.
"""

import hashlib
import json
import math

import numpy as np

from .model import MeraSpec, StructuralError


class SchemaError(ValueError):
    """A file parsed as JSON but does not have the expected layout."""


def encode_complex(arr):
    arr = np.asarray(arr, dtype=complex)
    pairs = np.stack([arr.real, arr.imag], axis=-1)
    return pairs.tolist()


def decode_complex(obj, shape, name="array"):
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError):
        raise SchemaError(f"{name}: entries must be [re, im] number pairs") from None
    if arr.shape != tuple(shape) + (2,):
        raise SchemaError(f"{name}: expected shape {tuple(shape)} of [re, im] pairs, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SchemaError(f"{name}: non-finite entry")
    return arr[..., 0] + 1j * arr[..., 1]


def read_json(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        return json.loads(raw), raw
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None


def digest(raw):
    return "sha256:" + hashlib.sha256(raw).hexdigest()


def spec_to_json(spec):
    return {
        "d": spec.d,
        "chi": encode_complex(spec.chi),
        "lambda": encode_complex(spec.lam),
        "hat": encode_complex(spec.hat),
    }


def spec_from_json(doc):
    if not isinstance(doc, dict):
        raise SchemaError("spec must be a JSON object")
    missing = [k for k in ("d", "chi", "lambda", "hat") if k not in doc]
    if missing:
        raise SchemaError(f"spec is missing keys {missing}")
    d = doc["d"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        raise SchemaError(f"'d' must be an integer >= 2, got {d!r}")
    try:
        return MeraSpec(
            d=d,
            chi=decode_complex(doc["chi"], (d,) * 4, "chi"),
            lam=decode_complex(doc["lambda"], (d,) * 3, "lambda"),
            hat=decode_complex(doc["hat"], (d,) * 4, "hat"),
        )
    except StructuralError as exc:
        raise SchemaError(str(exc)) from None


def load_spec(path):
    doc, raw = read_json(path)
    return spec_from_json(doc), digest(raw)


def load_matrices(path, sizes):
    """Read the matrices named in ``sizes`` (key -> dimension) that are present."""
    doc, raw = read_json(path)
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    found = {k: decode_complex(doc[k], (n, n), k) for k, n in sizes.items() if k in doc}
    if not found:
        raise SchemaError(f"{path}: none of the keys {sorted(sizes)} present")
    return found, digest(raw)


def dumps(obj, indent=2):
    """JSON text with floats at 17 significant digits and stable key order."""
    return _dump(obj, 0, indent) + "\n"


def _dump(obj, level, indent):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, level + 1, indent)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_dump(v, level, indent) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, level + 1, indent) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return "null"
        return format(x, ".17g")
    if isinstance(obj, (complex, np.complexfloating)):
        return _dump([obj.real, obj.imag], level, indent)
    return json.dumps(str(obj))
