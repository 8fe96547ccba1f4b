"""Text formats for instances and max-cut graphs.

Native instance format (1-based indices, '#' starts a comment)::

    n m
    F i j v      # i <= j, sets F_ij = F_ji = v
    c i v
    A r j v
    b r v

Entries not listed are zero. A comment line "#! negate_display" marks an
instance whose objective is shown negated (maximisation problems stored
as minimisation). JSON holds the same data as dense arrays.

Max-cut edge lists: the first non-comment line is "V E", then one "i j w"
line per edge. Optional header comments "# scale s" and "# constant k"
record an integer scaling of the weights and the objective constant.
"""

from __future__ import annotations

import enum
import json
import logging
import math
import os
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .core import Bqp01Instance, InstanceError
from .maxcut import MaxCutInstance

log = logging.getLogger(__name__)

MAX_SCALE_EXPONENT = 12


class Format(str, enum.Enum):
    NATIVE = "native"
    JSON = "json"


class ParseError(InstanceError):
    def __init__(self, msg: str, line: Optional[int] = None, path=None):
        where = f"{path or '<input>'}:{line}: " if line is not None else ""
        super().__init__(where + msg)
        self.line = line


def _guess_format(path) -> Format:
    return Format.JSON if str(path).lower().endswith(".json") else Format.NATIVE


def _num(tok: str, lineno: int, path) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", lineno, path) from None


def _idx(tok: str, hi: int, lineno: int, path) -> int:
    try:
        i = int(tok)
    except ValueError:
        raise ParseError(f"not an index: {tok!r}", lineno, path) from None
    if not 1 <= i <= hi:
        raise ParseError(f"index {i} outside 1..{hi}", lineno, path)
    return i - 1


def _fmt(v: float) -> str:
    v = float(v)
    return str(int(v)) if v == int(v) and abs(v) < 2**53 else repr(v)


def parse_native(text: str, path=None, name: str = "") -> Bqp01Instance:
    negate = any(ln.strip().split() == ["#!", "negate_display"] for ln in text.splitlines())
    lines = [(k + 1, ln.split("#", 1)[0].split()) for k, ln in enumerate(text.splitlines())]
    lines = [(k, toks) for k, toks in lines if toks]
    if not lines:
        raise ParseError("empty file", None, path)
    k0, head = lines[0]
    if len(head) != 2:
        raise ParseError("header must be 'n m'", k0, path)
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError("header must hold two integers", k0, path) from None
    if n < 1 or m < 0:
        raise ParseError("need n >= 1 and m >= 0", k0, path)
    F = np.zeros((n, n))
    c = np.zeros(n)
    A = np.zeros((m, n))
    b = np.zeros(m)
    seen = {}
    for lineno, toks in lines[1:]:
        kind, args = toks[0], toks[1:]
        arity = {"F": 3, "c": 2, "A": 3, "b": 2}.get(kind)
        if arity is None:
            raise ParseError(f"unknown record {kind!r}", lineno, path)
        if len(args) != arity:
            raise ParseError(f"record {kind} takes {arity} fields, got {len(args)}", lineno, path)
        if kind == "F":
            i, j = _idx(args[0], n, lineno, path), _idx(args[1], n, lineno, path)
            v = _num(args[2], lineno, path)
            key = ("F",) + tuple(sorted((i, j)))
            if key in seen:
                prev_line, prev = seen[key]
                if i != j and prev != v:
                    raise ParseError(f"F is not symmetric: entry ({i + 1},{j + 1}) = {v} but line {prev_line} "
                                     f"gives {prev}", lineno, path)
                raise ParseError(f"duplicate F entry ({i + 1},{j + 1}), first on line {prev_line}", lineno, path)
            seen[key] = (lineno, v)
            F[i, j] = F[j, i] = v
        elif kind == "c":
            i = _idx(args[0], n, lineno, path)
            key = ("c", i)
            if key in seen:
                raise ParseError(f"duplicate c entry {i + 1}", lineno, path)
            seen[key] = (lineno, None)
            c[i] = _num(args[1], lineno, path)
        elif kind == "A":
            if m == 0:
                raise ParseError("A record in an instance with m = 0", lineno, path)
            r, j = _idx(args[0], m, lineno, path), _idx(args[1], n, lineno, path)
            v = _num(args[2], lineno, path)
            if v != round(v):
                raise ParseError(f"constraint coefficients must be integers, got {v}", lineno, path)
            key = ("A", r, j)
            if key in seen:
                raise ParseError(f"duplicate A entry ({r + 1},{j + 1})", lineno, path)
            seen[key] = (lineno, None)
            A[r, j] = v
        else:
            if m == 0:
                raise ParseError("b record in an instance with m = 0", lineno, path)
            r = _idx(args[0], m, lineno, path)
            v = _num(args[1], lineno, path)
            if v != round(v):
                raise ParseError(f"right-hand sides must be integers, got {v}", lineno, path)
            key = ("b", r)
            if key in seen:
                raise ParseError(f"duplicate b entry {r + 1}", lineno, path)
            seen[key] = (lineno, None)
            b[r] = v
    return Bqp01Instance(F, c, A, b, name=name, negate_display=negate)


def format_native(p: Bqp01Instance) -> str:
    out = [f"{p.n} {p.m}"]
    if p.negate_display:
        out.insert(0, "#! negate_display")
    if p.name:
        out.insert(0, f"# {p.name}")
    iu, ju = np.nonzero(np.triu(p.F_hat))
    out += [f"F {i + 1} {j + 1} {_fmt(p.F_hat[i, j])}" for i, j in zip(iu, ju)]
    out += [f"c {i + 1} {_fmt(v)}" for i, v in enumerate(p.c_hat) if v != 0]
    rr, jj = np.nonzero(p.A_hat)
    out += [f"A {r + 1} {j + 1} {int(p.A_hat[r, j])}" for r, j in zip(rr, jj)]
    out += [f"b {r + 1} {int(v)}" for r, v in enumerate(p.b_hat) if v != 0]
    return "\n".join(out) + "\n"


def to_json_dict(p: Bqp01Instance) -> dict:
    return {
        "name": p.name,
        "n": p.n,
        "m": p.m,
        "F": p.F_hat.tolist(),
        "c": p.c_hat.tolist(),
        "A": p.A_hat.tolist(),
        "b": p.b_hat.tolist(),
        "negate_display": p.negate_display,
    }


def from_json_dict(d: dict, path=None) -> Bqp01Instance:
    try:
        n, m = int(d["n"]), int(d.get("m", len(d.get("b", []))))
        A = np.asarray(d.get("A", []), dtype=float).reshape(m, n)
        p = Bqp01Instance(d["F"], d.get("c", [0.0] * n), A, d.get("b", []), name=d.get("name", ""),
                          negate_display=bool(d.get("negate_display", False)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise ParseError(f"bad JSON instance: {exc}", None, path) from None
    if p.n != n:
        raise ParseError(f"declared n = {n} but F has order {p.n}", None, path)
    return p


def read_instance(path, fmt: Union[Format, str, None] = None) -> Bqp01Instance:
    path = Path(path)
    fmt = Format(fmt) if fmt else _guess_format(path)
    text = path.read_text()
    if fmt == Format.JSON:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None
        return from_json_dict(data, path)
    return parse_native(text, path, name=path.stem)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_instance(p: Bqp01Instance, path, fmt: Union[Format, str, None] = None) -> None:
    fmt = Format(fmt) if fmt else _guess_format(path)
    if fmt == Format.JSON:
        _atomic_write(path, json.dumps(to_json_dict(p), indent=1) + "\n")
    else:
        _atomic_write(path, format_native(p))


# ---------------------------------------------------------------------------
# max-cut edge lists


def integer_scale(W: np.ndarray, cap_exponent: int = MAX_SCALE_EXPONENT) -> Optional[int]:
    """Smallest power of two s <= 2^cap making s*W integral within 1e-9, or None."""
    for k in range(cap_exponent + 1):
        s = 1 << k
        SW = s * W
        if np.all(np.abs(SW - np.round(SW)) <= 1e-9):
            return s
    return None


def format_maxcut(g: MaxCutInstance, scale_to_integer: bool = False) -> tuple:
    """Return (text, info) where info records the scale used and any warning."""
    W = g.weights
    scale, warning = 1, None
    if scale_to_integer:
        s = integer_scale(W)
        if s is None:
            warning = f"weights are not integral after scaling by 2^{MAX_SCALE_EXPONENT}; written unscaled"
            log.warning(warning)
        else:
            scale = s
    iu, ju = np.nonzero(np.triu(W, 1))
    head = [f"# scale {scale}", f"# constant {_fmt(g.constant)}"]
    if g.rho_cutoff is not None:
        head.append(f"# cutoff {_fmt(g.rho_cutoff)}")
    if warning:
        head.append("# warning unscaled")
    body = [f"{g.n_vertices} {len(iu)}"]
    for i, j in zip(iu, ju):
        w = scale * W[i, j]
        body.append(f"{i + 1} {j + 1} {_fmt(round(w) if scale_to_integer and warning is None else w)}")
    return "\n".join(head + body) + "\n", {"scale": scale, "warning": warning}


def export_maxcut(g: MaxCutInstance, path, scale_to_integer: bool = False) -> dict:
    text, info = format_maxcut(g, scale_to_integer)
    _atomic_write(path, text)
    return info


def read_maxcut(path) -> MaxCutInstance:
    """Read an edge list; weights are divided by the recorded scale."""
    path = Path(path)
    scale, constant, cutoff = 1.0, 0.0, None
    body = []
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        s = raw.strip()
        if s.startswith("#"):
            toks = s[1:].split()
            if len(toks) == 2 and toks[0] in ("scale", "constant", "cutoff"):
                val = _num(toks[1], lineno, path)
                if toks[0] == "scale":
                    scale = val
                elif toks[0] == "constant":
                    constant = val
                else:
                    cutoff = val
            continue
        if s:
            body.append((lineno, s.split()))
    if not body:
        raise ParseError("missing 'V E' header", None, path)
    lineno, head = body[0]
    if len(head) != 2:
        raise ParseError("header must be 'V E'", lineno, path)
    V, E = int(head[0]), int(head[1])
    if len(body) - 1 != E:
        raise ParseError(f"header announces {E} edges, found {len(body) - 1}", lineno, path)
    W = np.zeros((V, V))
    for lineno, toks in body[1:]:
        if len(toks) != 3:
            raise ParseError("edge line must be 'i j w'", lineno, path)
        i, j = _idx(toks[0], V, lineno, path), _idx(toks[1], V, lineno, path)
        if i == j:
            raise ParseError("self loops are not allowed", lineno, path)
        w = _num(toks[2], lineno, path) / scale
        W[i, j] += w
        W[j, i] += w
    if not math.isfinite(constant):
        raise ParseError("constant must be finite", None, path)
    return MaxCutInstance(W, constant=constant, rho_cutoff=cutoff)
