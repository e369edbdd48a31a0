"""Instance files: JSON documents naming spaces, tensors, families and exponents.

Validation errors carry the line of the offending element in the source text.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .seqnorms import VectorFamily
from .serialize import to_jsonable
from .spaces import INF, SpaceSpec
from .summing import SummingKind, SummingParams
from .tensors import SCALARS, MultilinearMap

INSTANCE_VERSION = "summingnorms/instance@1"
REPORT_VERSION = "summingnorms/report@1"


class InstanceError(ValueError):
    """A malformed instance file; ``line`` is 1-based, or None when unknown."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None) -> None:
        self.line = line
        self.source = source
        where = source or "<instance>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {message}")


def load_schema(name: str) -> dict:
    text = resources.files("summingnorms").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


# ---------------------------------------------------------------------------
# locating a JSON path in the source text

_DECODER = json.JSONDecoder()
_WS = " \t\n\r"


def _skip(text: str, i: int) -> int:
    while i < len(text) and text[i] in _WS:
        i += 1
    return i


def _offset(text: str, path) -> int:
    """Character offset of the value at ``path`` (keys and indices)."""
    i = _skip(text, 0)
    for step in path:
        if text[i] == "{":
            i = _skip(text, i + 1)
            while text[i] != "}":
                key, i = _DECODER.raw_decode(text, i)
                i = _skip(text, _skip(text, i) + 1)  # past ':'
                if key == step:
                    break
                _, i = _DECODER.raw_decode(text, i)
                i = _skip(text, i)
                if text[i] == ",":
                    i = _skip(text, i + 1)
            else:
                return i
        elif text[i] == "[":
            i = _skip(text, i + 1)
            for _ in range(int(step)):
                _, i = _DECODER.raw_decode(text, i)
                i = _skip(text, _skip(text, i) + 1)  # past ','
        else:
            return i
    return i


def line_of(text: str, path) -> int | None:
    try:
        return text.count("\n", 0, _offset(text, list(path))) + 1
    except (ValueError, IndexError):
        return None


# ---------------------------------------------------------------------------
# the in-memory instance


@dataclass
class Instance:
    spaces: dict[str, SpaceSpec]
    tensors: dict[str, MultilinearMap] = field(default_factory=dict)
    families: dict[str, VectorFamily] = field(default_factory=dict)
    params: dict | None = None
    seed: int = 0
    comment: str | None = None


def _exponent(value):
    return INF if value == "inf" else float(value)


def params_from_dict(d: dict) -> SummingParams:
    """Build SummingParams from the ``params`` block of an instance file."""
    kind = SummingKind(d.get("kind", "multiple"))
    p = _exponent(d["p"]) if "p" in d else None
    qs = tuple(_exponent(q) for q in d["q_list"]) if "q_list" in d else None
    if qs is None and "q" in d:
        qs = (_exponent(d["q"]),)
    r = _exponent(d["r"]) if "r" in d else INF
    s = _exponent(d["s"]) if "s" in d else None
    if p is None or (qs is None and kind is not SummingKind.MIXING_MULTI):
        raise ValueError("params need p and q (or q_list)")
    if kind is SummingKind.AS_LINEAR:
        return SummingParams.as_linear(p, qs[0])
    if kind is SummingKind.AS_LINEAR_PQR:
        return SummingParams.as_linear_pqr(p, qs[0], r)
    if kind is SummingKind.AS_MULTI:
        return SummingParams.as_multi(p, qs)
    if kind is SummingKind.AS_MULTI_R:
        return SummingParams.as_multi_r(p, qs, r)
    if kind is SummingKind.MULTIPLE:
        return SummingParams.multiple(p, qs)
    if kind is SummingKind.MULTIPLE_R:
        return SummingParams.multiple_r(p, qs, r)
    # mixing: p is the outer exponent q of the mixed norm, q_list the input exponents
    if s is None or qs is None:
        raise ValueError("mixing params need s, p and q_list")
    return SummingParams.mixing(s, p, qs)


def _array(entry: dict, text: str, path: list, source: str | None) -> np.ndarray:
    try:
        arr = np.asarray(entry["data"], dtype=float)
    except (ValueError, TypeError):
        raise InstanceError("data is ragged or not numeric", line_of(text, path + ["data"]), source) from None
    if list(arr.shape) != list(entry["shape"]):
        raise InstanceError(f"declared shape {entry['shape']} but data has shape {list(arr.shape)}",
                            line_of(text, path + ["shape"]), source)
    if not np.all(np.isfinite(arr)):
        raise InstanceError("data must be finite", line_of(text, path + ["data"]), source)
    return arr


def parse_instance(text: str, source: str | None = None) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc.msg}", exc.lineno, source) from None
    validator = jsonschema.Draft202012Validator(load_schema("instance"))
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        where = "/".join(map(str, err.absolute_path)) or "document"
        raise InstanceError(f"{where}: {err.message}", line_of(text, err.absolute_path), source)

    spaces = {name: SpaceSpec(_exponent(sp["exponent"]), sp["dim"]) for name, sp in doc["spaces"].items()}

    def space(name: str, path: list) -> SpaceSpec:
        if name not in spaces:
            raise InstanceError(f"unknown space {name!r}", line_of(text, path), source)
        return spaces[name]

    tensors = {}
    for i, t in enumerate(doc.get("tensors", [])):
        path = ["tensors", i]
        domain = tuple(space(nm, path + ["domain", j]) for j, nm in enumerate(t["domain"]))
        codomain = SCALARS if t["codomain"] is None else space(t["codomain"], path + ["codomain"])
        arr = _array(t, text, path, source)
        expected = [s.dim for s in domain] + ([] if t["codomain"] is None else [codomain.dim])
        if list(arr.shape) != expected:
            raise InstanceError(f"tensor shape {list(arr.shape)} does not match its spaces {expected}",
                                line_of(text, path + ["shape"]), source)
        if t["name"] in tensors:
            raise InstanceError(f"duplicate tensor name {t['name']!r}", line_of(text, path + ["name"]), source)
        tensors[t["name"]] = MultilinearMap(domain, codomain, arr)

    families = {}
    for i, f in enumerate(doc.get("families", [])):
        path = ["families", i]
        sp = space(f["space"], path + ["space"])
        arr = _array(f, text, path, source)
        if arr.ndim < 2 or arr.shape[-1] != sp.dim:
            raise InstanceError(f"family members must have length {sp.dim}", line_of(text, path + ["shape"]), source)
        if f["name"] in families:
            raise InstanceError(f"duplicate family name {f['name']!r}", line_of(text, path + ["name"]), source)
        families[f["name"]] = VectorFamily(sp, arr)

    return Instance(spaces, tensors, families, doc.get("params"), doc.get("seed", 0), doc.get("comment"))


def load_instance(path: str | Path) -> Instance:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read file: {exc.strerror}", None, str(p)) from None
    return parse_instance(text, str(p))


# ---------------------------------------------------------------------------
# writing


def _space_name(spaces: dict[str, SpaceSpec], sp: SpaceSpec) -> str:
    for name, existing in spaces.items():
        if existing == sp:
            return name
    name = f"S{len(spaces)}"
    spaces[name] = sp
    return name


def instance_document(tensors: dict[str, MultilinearMap] | None = None,
                      families: dict[str, VectorFamily] | None = None,
                      seed: int = 0, params: dict | None = None, comment: str | None = None) -> dict:
    spaces: dict[str, SpaceSpec] = {}
    doc: dict = {"version": INSTANCE_VERSION}
    if comment:
        doc["comment"] = comment
    doc["seed"] = seed
    t_out, f_out = [], []
    for name, T in (tensors or {}).items():
        domain = [_space_name(spaces, s) for s in T.domain]
        coeffs = T.coeffs.reshape([s.dim for s in T.domain]) if T.is_scalar else T.coeffs
        codomain = None if T.is_scalar else _space_name(spaces, T.codomain)
        t_out.append({"name": name, "domain": domain, "codomain": codomain,
                      "shape": list(coeffs.shape), "data": coeffs.tolist()})
    for name, fam in (families or {}).items():
        f_out.append({"name": name, "space": _space_name(spaces, fam.space),
                      "shape": list(fam.coords.shape), "data": fam.coords.tolist()})
    doc["spaces"] = to_jsonable(spaces)
    if t_out:
        doc["tensors"] = t_out
    if f_out:
        doc["families"] = f_out
    if params:
        doc["params"] = to_jsonable(params)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def write_json(doc: dict, path: str | Path | None) -> str:
    text = dumps(doc)
    if path is None or str(path) == "-":
        return text
    Path(path).write_text(text)
    return text

