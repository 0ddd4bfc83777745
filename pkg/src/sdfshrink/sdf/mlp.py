"""Inference for SIREN-style MLP signed distance networks.

Hidden layers compute ``sin(omega0 * (W @ h + b))``; the last layer is affine.
Gradients are exact, propagated through the chain rule alongside the forward pass.

Weight files are plain text, one ``key value...`` record per line, ``#`` starts
a comment::

    sdfmlp 1
    layers <L>
    bounds <xlo> <ylo> <zlo> <xhi> <yhi> <zhi>      (optional, default -1..1)
    layer <index>
    shape <rows> <cols>
    activation sine|linear       (optional: sine for hidden, linear for last)
    omega0 <float>               (optional, default 30)
    weight <rows*cols floats, row-major>
    bias <rows floats>
    layer <index>
    ...

Layer 0 must have ``cols == 3`` and the last layer ``rows == 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from os import PathLike

import numpy as np
import numpy.typing as npt

from sdfshrink.sdf.base import FloatArray, as_points

DEFAULT_OMEGA0 = 30.0


class MlpFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Layer:
    weight: FloatArray
    bias: FloatArray
    activation: str = "sine"
    omega0: float = DEFAULT_OMEGA0


@dataclass(frozen=True, eq=False)
class MlpSdf:
    layers: tuple[Layer, ...]
    lo: FloatArray = field(default_factory=lambda: np.full(3, -1.0))
    hi: FloatArray = field(default_factory=lambda: np.full(3, 1.0))

    def __post_init__(self):
        _check_layers(self.layers)

    @classmethod
    def from_arrays(cls, weights, biases, omega0: float = DEFAULT_OMEGA0) -> MlpSdf:
        """Hidden layers get a sine activation, the last layer stays affine."""
        n = len(weights)
        layers = tuple(
            Layer(
                np.asarray(w, dtype=np.float64),
                np.asarray(b, dtype=np.float64).reshape(-1),
                "linear" if i == n - 1 else "sine",
                float(omega0),
            )
            for i, (w, b) in enumerate(zip(weights, biases, strict=True))
        )
        return cls(layers)

    def bounds(self) -> tuple[FloatArray, FloatArray]:
        return np.asarray(self.lo, dtype=np.float64), np.asarray(self.hi, dtype=np.float64)

    def eval(self, points: npt.ArrayLike) -> FloatArray:
        h = as_points(points)
        for layer in self.layers:
            z = h @ layer.weight.T + layer.bias
            h = np.sin(layer.omega0 * z) if layer.activation == "sine" else z
        return h[:, 0]

    def grad(self, points: npt.ArrayLike) -> FloatArray:
        h = as_points(points)
        jac = np.broadcast_to(np.eye(3), (len(h), 3, 3))
        for layer in self.layers:
            z = h @ layer.weight.T + layer.bias
            jac = np.einsum("oi,nij->noj", layer.weight, jac)
            if layer.activation == "sine":
                wz = layer.omega0 * z
                h = np.sin(wz)
                jac = (layer.omega0 * np.cos(wz))[:, :, None] * jac
            else:
                h = z
        return jac[:, 0, :]


def _check_layers(layers) -> None:
    if not layers:
        raise MlpFormatError("network has no layers")
    fan_in = 3
    for idx, layer in enumerate(layers):
        w, b = np.asarray(layer.weight), np.asarray(layer.bias)
        if w.ndim != 2 or w.shape[1] != fan_in:
            raise MlpFormatError(f"layer {idx}: weight shape {w.shape} does not accept {fan_in} inputs")
        if b.shape != (w.shape[0],):
            raise MlpFormatError(f"layer {idx}: bias shape {b.shape} does not match {w.shape[0]} outputs")
        if layer.activation not in ("sine", "linear"):
            raise MlpFormatError(f"layer {idx}: unknown activation {layer.activation!r}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise MlpFormatError(f"layer {idx}: non-finite parameters")
        fan_in = w.shape[0]
    if fan_in != 1:
        raise MlpFormatError(f"layer {len(layers) - 1}: network must end in 1 output, got {fan_in}")


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def save_mlp(net: MlpSdf, path: str | PathLike) -> None:
    lo, hi = net.bounds()
    lines = ["sdfmlp 1", f"layers {len(net.layers)}", f"bounds {_fmt(lo)} {_fmt(hi)}"]
    for idx, layer in enumerate(net.layers):
        rows, cols = layer.weight.shape
        lines += [
            f"layer {idx}",
            f"shape {rows} {cols}",
            f"activation {layer.activation}",
            f"omega0 {layer.omega0!r}",
            f"weight {_fmt(layer.weight)}",
            f"bias {_fmt(layer.bias)}",
        ]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mlp(path: str | PathLike) -> MlpSdf:
    with open(path, encoding="ascii") as fh:
        text = fh.read()
    records = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            key, *rest = line.split()
            records.append((lineno, key, rest))
    if not records or records[0][1:] != ("sdfmlp", ["1"]):
        raise MlpFormatError(f"{path}: missing 'sdfmlp 1' header")

    n_layers = None
    lo, hi = np.full(3, -1.0), np.full(3, 1.0)
    specs: list[dict] = []
    for lineno, key, rest in records[1:]:
        try:
            if key == "layers":
                n_layers = int(rest[0])
            elif key == "bounds":
                b = np.array(rest, dtype=np.float64)
                if b.shape != (6,):
                    raise MlpFormatError(f"line {lineno}: bounds needs 6 numbers")
                lo, hi = b[:3], b[3:]
            elif key == "layer":
                if int(rest[0]) != len(specs):
                    raise MlpFormatError(f"line {lineno}: expected layer {len(specs)}, got {rest[0]}")
                specs.append({})
            elif key in ("shape", "activation", "omega0", "weight", "bias"):
                if not specs:
                    raise MlpFormatError(f"line {lineno}: {key!r} before any 'layer' record")
                specs[-1][key] = rest
            else:
                raise MlpFormatError(f"line {lineno}: unknown key {key!r}")
        except (IndexError, ValueError) as exc:
            if isinstance(exc, MlpFormatError):
                raise
            raise MlpFormatError(f"line {lineno}: {exc}") from exc

    if n_layers is None or n_layers != len(specs):
        raise MlpFormatError(f"{path}: 'layers {n_layers}' but {len(specs)} layer records")

    layers = []
    for idx, spec in enumerate(specs):
        missing = {"shape", "weight", "bias"} - spec.keys()
        if missing:
            raise MlpFormatError(f"layer {idx}: missing {sorted(missing)}")
        try:
            rows, cols = (int(v) for v in spec["shape"])
            weight = np.array(spec["weight"], dtype=np.float64)
            bias = np.array(spec["bias"], dtype=np.float64)
            omega0 = float(spec["omega0"][0]) if "omega0" in spec else DEFAULT_OMEGA0
        except ValueError as exc:
            raise MlpFormatError(f"layer {idx}: {exc}") from exc
        if weight.size != rows * cols:
            raise MlpFormatError(f"layer {idx}: shape {rows}x{cols} but {weight.size} weights")
        last = idx == len(specs) - 1
        activation = spec["activation"][0] if "activation" in spec else ("linear" if last else "sine")
        layers.append(Layer(weight.reshape(rows, cols), bias, activation, omega0))
    return MlpSdf(tuple(layers), lo, hi)
