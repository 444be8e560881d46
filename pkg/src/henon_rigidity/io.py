"""Map-spec JSON, grid files and report serialization.

Map spec v1::

    {"name": "H", "factors": [{"b": [1, 0], "c": [0, 0], "delta": [1, 0],
                               "p": [[0, 0], [0, 0], [1, 0]]}]}

Complex numbers are ``[re, im]`` pairs; ``p`` lists coefficients in ascending
degree with explicit zeros.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .dynamics import GridMode, GridResult
from .maps import ElementaryFactor, HenonChain, InvalidFactor
from .poly import Polynomial, PolyMap2


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    def __init__(self, message: str, factor: int | None = None, field: str | None = None):
        where = "" if factor is None else f"factor {factor}" + (f", field {field!r}" if field else "") + ": "
        super().__init__(where + message)
        self.factor = factor
        self.field = field


def _complex(value: Any, factor: int, name: str) -> complex:
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ValidationError(f"expected [re, im], got {value!r}", factor, name)
    z = complex(float(value[0]), float(value[1]))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValidationError("non-finite value", factor, name)
    return z


def chain_from_spec(doc: dict) -> HenonChain:
    if not isinstance(doc, dict) or "factors" not in doc:
        raise ValidationError("document must be an object with a 'factors' list")
    factors = doc["factors"]
    if not isinstance(factors, list) or not factors:
        raise ValidationError("'factors' must be a nonempty list")
    out = []
    for i, f in enumerate(factors):
        if not isinstance(f, dict):
            raise ValidationError("factor must be an object", i)
        missing = [k for k in ("b", "delta", "p") if k not in f]
        if missing:
            raise ValidationError(f"missing fields {missing}", i)
        b = _complex(f["b"], i, "b")
        c = _complex(f.get("c", [0, 0]), i, "c")
        delta = _complex(f["delta"], i, "delta")
        if not isinstance(f["p"], list):
            raise ValidationError("p must be a list of [re, im] pairs", i, "p")
        p = Polynomial([_complex(v, i, "p") for v in f["p"]])
        if b == 0:
            raise ValidationError("b must be nonzero", i, "b")
        if delta == 0:
            raise ValidationError("delta must be nonzero", i, "delta")
        if p.degree() < 2:
            raise ValidationError(f"p must have degree >= 2, got {p.degree()}", i, "p")
        try:
            out.append(ElementaryFactor(b, c, delta, p))
        except InvalidFactor as exc:
            raise ValidationError(str(exc), i) from exc
    name = doc.get("name")
    return HenonChain(tuple(out), name if isinstance(name, str) else None)


def parse_map_spec(text: str) -> HenonChain:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return chain_from_spec(doc)


def load_map(path: str | Path) -> HenonChain:
    return parse_map_spec(Path(path).read_text(encoding="utf-8"))


def _pair(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def chain_to_spec(H: HenonChain) -> dict:
    doc: dict[str, Any] = {}
    if H.name:
        doc["name"] = H.name
    doc["factors"] = [
        {"b": _pair(f.b), "c": _pair(f.c), "delta": _pair(f.delta), "p": [_pair(a) for a in f.p.coeffs]}
        for f in H.factors
    ]
    return doc


def dump_map_spec(H: HenonChain) -> str:
    return json.dumps(chain_to_spec(H), indent=2) + "\n"


def polymap_to_dict(m: PolyMap2) -> dict:
    def terms(p):
        return [[i, j, c.real, c.imag] for (i, j), c in sorted(p.terms.items())]

    return {"first": terms(m.first), "second": terms(m.second)}


def report_json(command: str, inputs: dict, results: dict, residuals: dict) -> str:
    doc = {
        "tool_version": __version__,
        "command": command,
        "inputs": inputs,
        "results": results,
        "residuals": residuals,
    }
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


# ---------------------------------------------------------------------------
# grids


def grid_header(result: GridResult) -> str:
    job = result.job
    return (f"# henon-grid v1, mode={job.mode.value}, window={job.describe_window()}, "
            f"slice={job.slice.describe()}, budget={job.budget}")


def grid_csv(result: GridResult) -> str:
    lines = [grid_header(result)]
    integer = result.job.mode is GridMode.K_MEMBERSHIP
    for row in result.values:
        if integer:
            lines.append(",".join(str(int(v)) for v in row))
        else:
            lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_grid_csv(result: GridResult, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(grid_csv(result), encoding="ascii")
    return path


def grid_pgm(result: GridResult) -> tuple[bytes, str]:
    """16-bit binary PGM bytes and the sidecar metadata text.

    Values are mapped affinely from ``[0, max]`` onto ``[0, 65535]``.
    """
    vals = result.values
    ny, nx = vals.shape
    vmax = float(vals.max()) if vals.size else 0.0
    scale = 65535.0 / vmax if vmax > 0 else 0.0
    levels = np.clip(np.rint(vals * scale), 0, 65535).astype(">u2")
    data = f"P5\n{nx} {ny}\n65535\n".encode("ascii") + levels.tobytes()
    meta = "\n".join([
        grid_header(result),
        "format: pgm16",
        "value_min: 0",
        f"value_max: {vmax!r}",
        f"scale: {scale!r}",
        "level = round(value * scale)",
        "row 0 is the top edge (largest second slice parameter)",
    ]) + "\n"
    return data, meta


def write_grid_pgm(result: GridResult, path: str | Path) -> tuple[Path, Path]:
    path = Path(path)
    data, meta = grid_pgm(result)
    path.write_bytes(data)
    meta_path = path.with_name(path.name + ".meta")
    meta_path.write_text(meta, encoding="ascii")
    return path, meta_path


def read_grid_csv(path: str | Path) -> tuple[str, np.ndarray]:
    lines = Path(path).read_text(encoding="ascii").splitlines()
    header = lines[0]
    values = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:] if ln])
    return header, values


def read_pgm16(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ParseError("not a binary PGM")
    nx, ny = (int(v) for v in parts[1].split())
    if int(parts[2]) != 65535:
        raise ParseError("expected maxval 65535")
    return np.frombuffer(parts[3], dtype=">u2").reshape(ny, nx)
