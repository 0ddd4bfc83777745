"""Parse command-line field descriptions into signed distance fields.

Grammar (whitespace-free)::

    field     := term ('+' term)*              union
    term      := primitive ('&' primitive)*    intersection
    primitive := 'sphere:' R ['@' cx,cy,cz]
               | 'box:' hx,hy,hz [',' r] ['@' cx,cy,cz]
               | 'capsule:' ax,ay,az,bx,by,bz,r
               | path to an SDFGRID1 file or an sdfmlp weight file

Examples: ``sphere:1.0``, ``box:0.7,0.5,0.4,0.1``,
``sphere:0.6@-0.5,0,0+sphere:0.6@0.5,0,0``.
"""

from __future__ import annotations

from pathlib import Path

from sdfshrink.sdf import analytic
from sdfshrink.sdf.grid import MAGIC, load_grid
from sdfshrink.sdf.mlp import load_mlp


class FieldSpecError(ValueError):
    pass


def _numbers(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",")]
    except ValueError as exc:
        raise FieldSpecError(f"bad numbers in {what}: {text!r}") from exc


def _primitive(token: str) -> analytic.AnalyticSdf:
    kind, sep, args = token.partition(":")
    if not sep:
        raise FieldSpecError(f"not a primitive: {token!r}")
    body, _, at = args.partition("@")
    center = _numbers(at, "center") if at else [0.0, 0.0, 0.0]
    if len(center) != 3:
        raise FieldSpecError(f"center needs 3 numbers: {at!r}")
    nums = _numbers(body, kind)
    try:
        if kind == "sphere" and len(nums) == 1:
            return analytic.sphere(nums[0], center)
        if kind == "box" and len(nums) in (3, 4):
            return analytic.box(nums[:3], nums[3] if len(nums) == 4 else 0.0, center)
        if kind == "capsule" and len(nums) == 7 and not at:
            return analytic.capsule(nums[:3], nums[3:6], nums[6])
    except ValueError as exc:
        raise FieldSpecError(str(exc)) from exc
    raise FieldSpecError(f"cannot parse {token!r}")


def _analytic(spec: str) -> analytic.AnalyticSdf:
    terms = []
    for term in spec.split("+"):
        prims = [_primitive(t) for t in term.split("&")]
        terms.append(prims[0] if len(prims) == 1 else analytic.intersection(*prims))
    return terms[0] if len(terms) == 1 else analytic.union(*terms)


def parse_field(spec: str):
    path = Path(spec)
    if path.is_file():
        with open(path, "rb") as fh:
            head = fh.read(8)
        if head == MAGIC:
            return load_grid(path)
        if head.startswith(b"sdfmlp"):
            return load_mlp(path)
        raise FieldSpecError(f"{spec}: neither an SDFGRID1 grid nor an sdfmlp weight file")
    if ":" not in spec:
        raise FieldSpecError(f"{spec!r} is neither an existing file nor an analytic field")
    return _analytic(spec)
