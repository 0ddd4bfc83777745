"""Textured OBJ export and checkerboard texture generation."""

from __future__ import annotations

from os import PathLike
from pathlib import Path

import numpy as np

from sdfshrink.mesh import TriangleMesh, save_obj

TEXTURE_SIZE = 512


def checkerboard(cells: int = 16, size: int = TEXTURE_SIZE) -> np.ndarray:
    """``size x size x 3`` uint8 checkerboard of ``cells x cells`` squares, white at pixel (0, 0)."""
    if cells < 2 or cells % 2:
        raise ValueError(f"cells must be an even number >= 2, got {cells}")
    idx = np.arange(size) * cells // size
    white = (idx[:, None] + idx[None, :]) % 2 == 0
    return np.repeat(np.where(white, 255, 0).astype(np.uint8)[..., None], 3, axis=2)


def write_ppm(image: np.ndarray, path: str | PathLike) -> None:
    h, w, _ = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image, dtype=np.uint8).tobytes())


def read_ppm(path: str | PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    payload = data[pos + 1:]
    if tokens[0] != b"P6" or int(tokens[3]) != 255:
        raise ValueError(f"{path}: not an 8-bit binary PPM")
    w, h = int(tokens[1]), int(tokens[2])
    if len(payload) != w * h * 3:
        raise ValueError(f"{path}: expected {w * h * 3} payload bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w, 3)


def save_textured_obj(mesh: TriangleMesh, path: str | PathLike, cells: int = 16) -> tuple[Path, Path]:
    """Write ``mesh`` with a sibling ``.mtl`` and checkerboard ``.ppm``; returns the MTL and texture paths."""
    path = Path(path)
    mtl_path = path.with_suffix(".mtl")
    tex_path = path.with_name(path.stem + "_checker.ppm")
    mtl_path.write_text(
        "newmtl checker\nKa 1 1 1\nKd 1 1 1\nKs 0 0 0\nillum 1\n" f"map_Kd {tex_path.name}\n",
        encoding="ascii",
    )
    write_ppm(checkerboard(cells), tex_path)
    save_obj(mesh, path, mtl=(mtl_path.name, "checker"))
    return mtl_path, tex_path
