"""The 256-case Marching Cubes triangle table, built from cube-face rules.

Corner and edge numbering follow the usual Lorensen-Cline / Bourke layout::

        7 ------ 6            edges: 0:0-1  1:1-2  2:2-3  3:3-0
       /|       /|                   4:4-5  5:5-6  6:6-7  7:7-4
      4 ------ 5 |                   8:0-4  9:1-5 10:2-6 11:3-7
      | 3 -----|-2
      |/       |/         z up, y into the page
      0 ------ 1

Bit ``c`` of a case index is set when corner ``c`` lies below the iso value.
Instead of transcribing the classic hand-made table, each case is derived:
on every cube face the crossing edges are paired into iso-line segments, the
segments are chained into closed loops and each loop is fan-triangulated.
The fan apex is the lowest-numbered loop vertex whose diagonals avoid joining
two vertices on a common cube face (such a diagonal could coincide with one
from the neighbouring cube and make the edge non-manifold). The few 9- and
12-vertex loops that admit no such apex are instead fanned around an extra
vertex, index ``CENTER`` in the table, placed at the mean of the loop's edge
vertices; ``CENTER_LOOPS[case]`` lists the edges of that loop.
On an ambiguous face (diagonal corners share a sign) the two corners whose
in-face coordinates are equal, (0,0) and (1,1), are always kept connected.
That rule depends only on the shared face, so neighbouring cubes agree and
closed iso-surfaces come out watertight; it is also sign-symmetric, so case
``255 - c`` is case ``c`` with every triangle reversed. Triangles are wound
so their normals point toward increasing field values.
"""

from __future__ import annotations

import numpy as np

CORNERS = np.array(
    [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]],
    dtype=np.int64,
)
EDGES = np.array(
    [[0, 1], [1, 2], [2, 3], [3, 0], [4, 5], [5, 6], [6, 7], [7, 4], [0, 4], [1, 5], [2, 6], [3, 7]],
    dtype=np.int64,
)


def _edge_id(a: int, b: int) -> int:
    for k, (p, q) in enumerate(EDGES):
        if {p, q} == {a, b}:
            return k
    raise KeyError((a, b))


def _corner_at(bits) -> int:
    return int(np.flatnonzero((CORNERS == bits).all(axis=1))[0])


def _faces():
    """Each face as (corners counter-clockwise seen from outside, ring positions of the joined diagonal)."""
    faces = []
    for axis in range(3):
        b, c = [x for x in range(3) if x != axis]
        for side in (0, 1):
            ring, diag = [], []
            for lb, lc in ((0, 0), (1, 0), (1, 1), (0, 1)):
                bits = np.zeros(3, dtype=np.int64)
                bits[axis], bits[b], bits[c] = side, lb, lc
                ring.append(_corner_at(bits))
                if lb == lc:
                    diag.append(ring[-1])
            p = CORNERS[ring].astype(float)
            outward = np.zeros(3)
            outward[axis] = 1.0 if side else -1.0
            if np.cross(p[1] - p[0], p[2] - p[0]) @ outward < 0:
                ring = ring[::-1]
            faces.append((ring, [ring.index(d) for d in diag]))
    return faces


def _face_segments(ring, keep, below):
    """Directed (enter, exit) edge pairs: entering and leaving the below-iso region walking the ring."""
    neg = [below[c] for c in ring]
    enter, leave = {}, {}
    for k in range(4):
        a, b = ring[k], ring[(k + 1) % 4]
        if neg[k] != neg[(k + 1) % 4]:
            (enter if neg[(k + 1) % 4] else leave)[k] = _edge_id(a, b)
    if len(enter) == 1:
        return [(next(iter(enter.values())), next(iter(leave.values())))]
    if len(enter) == 2:
        negatives_joined = neg[keep[0]]
        segs = []
        if negatives_joined:
            # cut off each above-iso corner
            for k, e in enter.items():
                segs.append((e, leave[(k - 1) % 4]))
        else:
            # cut off each below-iso corner
            for k, e in enter.items():
                segs.append((e, leave[(k + 1) % 4]))
        return segs
    return []


def _edge_faces(faces) -> list[set[int]]:
    out: list[set[int]] = [set() for _ in range(12)]
    for f, (ring, _) in enumerate(faces):
        for k in range(4):
            out[_edge_id(ring[k], ring[(k + 1) % 4])].add(f)
    return out


CENTER = 12


def _fan_apex(loop: list[int], edge_faces) -> int | None:
    n = len(loop)
    for a in sorted(range(n), key=lambda k: loop[k]):
        if all(not edge_faces[loop[a]] & edge_faces[loop[(a + k) % n]] for k in range(2, n - 1)):
            return a
    return None


def _build_case(case: int, faces) -> tuple[list[int], tuple[int, ...]]:
    below = [(case >> c) & 1 == 1 for c in range(8)]
    nxt: dict[int, int] = {}
    for ring, keep in faces:
        for e_in, e_out in _face_segments(ring, keep, below):
            assert e_in not in nxt
            nxt[e_in] = e_out
    edge_faces = _edge_faces(faces)
    center_loop: tuple[int, ...] = ()
    tris: list[int] = []
    unused = set(nxt)
    while unused:
        start = min(unused)
        loop = [start]
        unused.discard(start)
        e = nxt[start]
        while e != start:
            loop.append(e)
            unused.discard(e)
            e = nxt[e]
        a = _fan_apex(loop, edge_faces)
        if a is None:
            assert not center_loop
            center_loop = tuple(sorted(loop))
            for k in range(len(loop)):
                tris += [CENTER, loop[k], loop[(k + 1) % len(loop)]]
            continue
        loop = loop[a:] + loop[:a]
        for k in range(1, len(loop) - 1):
            tris += [loop[0], loop[k], loop[k + 1]]
    return tris, center_loop


def _orientation_sign(faces) -> int:
    # corner 0 alone below iso: normals must point away from it
    tris, _ = _build_case(1, faces)
    mid = CORNERS[EDGES].mean(axis=1)
    a, b, c = mid[tris[0]], mid[tris[1]], mid[tris[2]]
    return 1 if np.cross(b - a, c - a) @ np.ones(3) > 0 else -1


def _build_table() -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    faces = _faces()
    flip = _orientation_sign(faces) < 0
    table, centers = [], []
    for case in range(256):
        tris, center_loop = _build_case(case, faces)
        if flip:
            tris = [v for k in range(0, len(tris), 3) for v in (tris[k], tris[k + 2], tris[k + 1])]
        table.append(tuple(tris))
        centers.append(center_loop)
    return table, centers


TRI_TABLE, CENTER_LOOPS = _build_table()
EDGE_TABLE: list[int] = [sum(1 << e for e in set(t) if e != CENTER) for t in TRI_TABLE]
