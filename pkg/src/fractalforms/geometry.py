"""Exact geometry of the approximation graphs.

Vertices are stored with integer numerators at a fixed per-level scale:

* gasket, level n: point = (xn * 2**-(n+1), yn * sqrt(3) * 2**-(n+1)), so the
  bottom-left corner is (0, 0) and the bottom-right corner has xn = 2**(n+1);
* carpet, level n: point = (xn / (2*3**n), yn / (2*3**n)), so corners and edge
  midpoints of every cell are integer pairs.

Equality, hashing, and deduplication therefore never touch floats.  The
canonical (minimal-scale) form divides out the base while possible; cell
adjacency and vertex identity are decided on the fixed-scale numerators.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import sqrt
from typing import Iterable, Sequence

import numpy as np

from .kinds import SC_OX, SC_OY, SG_AX, SG_AY, FractalKind
from .words import Word, check_word, enumerate_words, pack_word, unpack_word


@dataclass(frozen=True)
class ExactPoint:
    """A vertex with exact integer coordinates; always in canonical form."""

    kind: FractalKind
    xn: int
    yn: int
    scale: int

    @staticmethod
    def make(kind: FractalKind, xn: int, yn: int, scale: int) -> "ExactPoint":
        b = kind.base
        while scale > 0 and xn % b == 0 and yn % b == 0:
            xn //= b
            yn //= b
            scale -= 1
        return ExactPoint(kind, xn, yn, scale)

    def lifted(self, scale: int) -> tuple[int, int]:
        """Numerators at a coarser-denominator representation (scale >= own)."""
        if scale < self.scale:
            raise ValueError("cannot lift to a smaller scale")
        f = self.kind.base ** (scale - self.scale)
        return self.xn * f, self.yn * f

    @property
    def x(self) -> Fraction:
        if self.kind is FractalKind.SG:
            return Fraction(self.xn, 2 ** self.scale)
        return Fraction(self.xn, 2 * 3 ** self.scale)

    @property
    def y_coeff(self) -> Fraction:
        """For the gasket: y = y_coeff * sqrt(3). For the carpet: y itself."""
        if self.kind is FractalKind.SG:
            return Fraction(self.yn, 2 ** self.scale)
        return Fraction(self.yn, 2 * 3 ** self.scale)

    def as_floats(self) -> tuple[float, float]:
        if self.kind is FractalKind.SG:
            s = 2.0 ** -self.scale
            return self.xn * s, self.yn * sqrt(3.0) * s
        s = 1.0 / (2 * 3 ** self.scale)
        return self.xn * s, self.yn * s

    def sq_dist(self, other: "ExactPoint") -> Fraction:
        """Exact squared Euclidean distance."""
        if self.kind is not other.kind:
            raise ValueError("points belong to different fractals")
        m = max(self.scale, other.scale)
        ax, ay = self.lifted(m)
        bx, by = other.lifted(m)
        dx, dy = ax - bx, ay - by
        if self.kind is FractalKind.SG:
            return Fraction(dx * dx + 3 * dy * dy, 4 ** m)
        return Fraction(dx * dx + dy * dy, 4 * 9 ** m)


def base_point(kind: FractalKind, i: int) -> ExactPoint:
    """The i-th generator fixed-boundary point (image of itself at level 0)."""
    if not 0 <= i < kind.n_maps:
        raise ValueError("digit out of range")
    if kind is FractalKind.SG:
        return ExactPoint.make(kind, SG_AX[i], SG_AY[i], 1)
    return ExactPoint.make(kind, SC_OX[i], SC_OY[i], 0)


def apply_map(kind: FractalKind, digit: int, p: ExactPoint) -> ExactPoint:
    """One contraction step f_digit applied to an exact point."""
    if p.kind is not kind:
        raise ValueError("point kind mismatch")
    if kind is FractalKind.SG:
        # f_i(x) = (x + p_i)/2 on the (1, sqrt(3)) lattice
        m = max(p.scale, 1)
        px, py = p.lifted(m)
        f = 2 ** (m - 1)
        return ExactPoint.make(kind, px + SG_AX[digit] * f, py + SG_AY[digit] * f, m + 1)
    # f_i(x) = (x + 2 p_i)/3; numerators live over 2*3**scale
    off = 2 * 3 ** p.scale
    return ExactPoint.make(
        kind, p.xn + SC_OX[digit] * off, p.yn + SC_OY[digit] * off, p.scale + 1
    )


def point_of(kind: FractalKind, w) -> ExactPoint:
    """The vertex addressed by a word: the image of the last digit's base point
    under the maps of the preceding digits.  Level-(n+1) words address the
    vertices of the level-n graph."""
    digits = check_word(kind, w)
    if not digits:
        raise ValueError("need at least one digit")
    p = base_point(kind, digits[-1])
    for d in reversed(digits[:-1]):
        p = apply_map(kind, d, p)
    return p


# ---------------------------------------------------------------------------
# fixed-scale corner numerators (fast integer path used by the graph builders)

def _cell_accumulators(kind: FractalKind, digits: Sequence[int]) -> tuple[int, int]:
    """Per-cell integer offsets: fold digits with the base-point tables."""
    if kind is FractalKind.SG:
        gx = gy = 0
        for d in digits:
            gx = 2 * gx + SG_AX[d]
            gy = 2 * gy + SG_AY[d]
        return gx, gy
    gx = gy = 0
    for d in digits:
        gx = 3 * gx + SC_OX[d]
        gy = 3 * gy + SC_OY[d]
    return gx, gy


def corner_numerators(
    kind: FractalKind, gx: int, gy: int, i: int
) -> tuple[int, int]:
    """Numerators of corner i of the cell with accumulators (gx, gy).

    Gasket: scale level+1; carpet: scale level.  See module docstring.
    """
    if kind is FractalKind.SG:
        return gx + SG_AX[i], gy + SG_AY[i]
    return 2 * gx + SC_OX[i], 2 * gy + SC_OY[i]


def vertex_scale(kind: FractalKind, level: int) -> int:
    return level + 1 if kind is FractalKind.SG else level


# ---------------------------------------------------------------------------
# cell graph

@dataclass(eq=False)
class CellGraph:
    """Level-n cells with intersection adjacency.

    Edges are index pairs into `words` (lexicographic order).  For the gasket
    each edge carries a type: "I" when the two cells' own addressed vertices
    differ, "II" when they coincide.
    """

    kind: FractalKind
    level: int
    words: list[tuple[int, ...]]
    edges: list[tuple[int, int]]
    edge_types: list[str] | None = None

    @property
    def n_cells(self) -> int:
        return len(self.words)


def cell_graph(kind: FractalKind, n: int) -> CellGraph:
    if n < 1:
        raise ValueError("cell graph needs level >= 1")
    words = list(enumerate_words(kind, n))
    if kind is FractalKind.SC:
        # same-size axis-aligned squares: 1-dimensional contact means the grid
        # coordinates differ by one step in exactly one axis
        coords = {}
        for ci, w in enumerate(words):
            coords[_cell_accumulators(kind, w)] = ci
        edges = []
        for (gx, gy), ci in coords.items():
            for nb in ((gx + 1, gy), (gx, gy + 1)):
                cj = coords.get(nb)
                if cj is not None:
                    edges.append((min(ci, cj), max(ci, cj)))
        edges.sort()
        return CellGraph(kind, n, words, edges)

    # gasket: cells meet at shared corner points
    point_cells: dict[tuple[int, int], list[int]] = {}
    accs = []
    for ci, w in enumerate(words):
        acc = _cell_accumulators(kind, w)
        accs.append(acc)
        for i in range(3):
            key = corner_numerators(kind, acc[0], acc[1], i)
            point_cells.setdefault(key, []).append(ci)
    edges = set()
    for cells in point_cells.values():
        if len(cells) > 1:
            cs = sorted(cells)
            for a in range(len(cs)):
                for b in range(a + 1, len(cs)):
                    edges.add((cs[a], cs[b]))
    edge_list = sorted(edges)
    # addressed vertex of a level-n word: prefix accumulators + last digit
    own_point = []
    for w in words:
        pgx, pgy = _cell_accumulators(kind, w[:-1])
        own_point.append(corner_numerators(kind, pgx, pgy, w[-1]))
    types = [
        "I" if own_point[a] != own_point[b] else "II" for a, b in edge_list
    ]
    return CellGraph(kind, n, words, edge_list, types)


# ---------------------------------------------------------------------------
# vertex graph

@dataclass(eq=False)
class VertexGraph:
    """Deduplicated level-n vertices with within-cell pair edges.

    Vertex ids follow the first (lexicographically smallest) address found
    while scanning cells in word order, which makes ids deterministic.  Edge
    multiplicity counts how many cells contribute the pair: 1 on the gasket,
    1 or 2 on the carpet.
    """

    kind: FractalKind
    level: int
    xn: np.ndarray            # int64 numerators at vertex_scale(kind, level)
    yn: np.ndarray
    edges: np.ndarray         # (m, 3) int64 rows (i, j, mult), i < j
    addr_packed: np.ndarray   # canonical level-(n+1) address, radix-packed
    index: dict[tuple[int, int], int] = field(repr=False, default_factory=dict)
    cells: dict[tuple[int, ...], tuple[int, ...]] | None = field(
        repr=False, default=None
    )

    @property
    def n_vertices(self) -> int:
        return len(self.xn)

    @property
    def scale(self) -> int:
        return vertex_scale(self.kind, self.level)

    def point(self, i: int) -> ExactPoint:
        return ExactPoint.make(self.kind, int(self.xn[i]), int(self.yn[i]), self.scale)

    def address(self, i: int) -> Word:
        packed = int(self.addr_packed[i])
        if packed < 0:
            raise ValueError("addresses were not stored for this graph")
        return Word(unpack_word(self.kind, packed, self.level + 1))

    def id_of(self, p: ExactPoint) -> int:
        key = p.lifted(self.scale)
        got = self.index.get((key[0], key[1]))
        if got is None:
            raise KeyError(f"not a level-{self.level} vertex: {p}")
        return got

    def float_coords(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind is FractalKind.SG:
            s = 2.0 ** -self.scale
            return self.xn * s, self.yn * (sqrt(3.0) * s)
        s = 1.0 / (2 * 3 ** self.scale)
        return self.xn * s, self.yn * s


@lru_cache(maxsize=24)
def cached_vertex_graph(kind: FractalKind, n: int) -> VertexGraph:
    """Shared immutable vertex graph (no per-vertex cell table).

    Callers must not mutate the arrays; use vertex_graph() for a private copy.
    """
    return vertex_graph(kind, n, with_cells=False)


def vertex_graph(
    kind: FractalKind, n: int, with_cells: bool | None = None
) -> VertexGraph:
    """Build the level-n vertex graph by scanning cells in word order."""
    if n < 0:
        raise ValueError("level must be >= 0")
    k = kind.n_maps
    nb = kind.boundary_size
    if with_cells is None:
        with_cells = k ** max(n, 0) <= 200_000

    index: dict[tuple[int, int], int] = {}
    xs: list[int] = []
    ys: list[int] = []
    addrs: list[int] = []
    edge_mult: dict[tuple[int, int], int] = {}
    cells: dict[tuple[int, ...], tuple[int, ...]] | None = {} if with_cells else None

    if n == 0:
        ids = []
        for i in range(nb):
            gxy = corner_numerators(kind, 0, 0, i)
            index[gxy] = i
            xs.append(gxy[0])
            ys.append(gxy[1])
            addrs.append(i)
            ids.append(i)
        if kind is FractalKind.SG:
            for a in range(3):
                for b in range(a + 1, 3):
                    edge_mult[(a, b)] = 1
        else:
            for a in range(8):
                i, j = sorted((ids[a], ids[(a + 1) % 8]))
                edge_mult[(i, j)] = edge_mult.get((i, j), 0) + 1
        if cells is not None:
            cells[()] = tuple(ids)
    else:
        for w in enumerate_words(kind, n):
            gx, gy = _cell_accumulators(kind, w)
            wpacked = pack_word(kind, w)
            ids = []
            for i in range(nb):
                key = corner_numerators(kind, gx, gy, i)
                vid = index.get(key)
                if vid is None:
                    vid = len(xs)
                    index[key] = vid
                    xs.append(key[0])
                    ys.append(key[1])
                    addrs.append(wpacked * k + i)
                ids.append(vid)
            if kind is FractalKind.SG:
                for a in range(3):
                    for b in range(a + 1, 3):
                        i, j = sorted((ids[a], ids[b]))
                        edge_mult[(i, j)] = edge_mult.get((i, j), 0) + 1
            else:
                for a in range(8):
                    i, j = sorted((ids[a], ids[(a + 1) % 8]))
                    edge_mult[(i, j)] = edge_mult.get((i, j), 0) + 1
            if cells is not None:
                cells[w] = tuple(ids)

    edge_rows = sorted((i, j, m) for (i, j), m in edge_mult.items())
    return VertexGraph(
        kind=kind,
        level=n,
        xn=np.asarray(xs, dtype=np.int64),
        yn=np.asarray(ys, dtype=np.int64),
        edges=np.asarray(edge_rows, dtype=np.int64).reshape(-1, 3),
        addr_packed=np.asarray(addrs, dtype=np.int64),
        index=index,
        cells=cells,
    )


def canonical_address(kind: FractalKind, p: ExactPoint, n: int) -> Word:
    """Lexicographically smallest level-(n+1) word addressing vertex p of the
    level-n graph.  Raises KeyError if p is not a level-n vertex."""
    vg = vertex_graph(kind, n, with_cells=False)
    return vg.address(vg.id_of(p))


# ---------------------------------------------------------------------------
# boundary selectors

def sg_corner_ids(vg: VertexGraph) -> tuple[int, int, int]:
    """Ids of the three outer corners (0,0), (1,0), (1/2, sqrt(3)/2)."""
    assert vg.kind is FractalKind.SG
    s = vg.scale
    return (
        vg.index[(0, 0)],
        vg.index[(2 ** s, 0)],
        vg.index[(2 ** (s - 1), 2 ** (s - 1))],
    )


def sc_side_ids(vg: VertexGraph, side: str) -> np.ndarray:
    """Vertex ids on one side of the unit square: left/right/bottom/top."""
    assert vg.kind is FractalKind.SC
    full = 2 * 3 ** vg.scale
    if side == "left":
        mask = vg.xn == 0
    elif side == "right":
        mask = vg.xn == full
    elif side == "bottom":
        mask = vg.yn == 0
    elif side == "top":
        mask = vg.yn == full
    else:
        raise ValueError(f"unknown side {side!r}")
    return np.nonzero(mask)[0]


# ---------------------------------------------------------------------------
# serialization (vertex triples are canonical minimal-scale forms)

def graph_to_json_dict(vg: VertexGraph) -> dict:
    verts = []
    for i in range(vg.n_vertices):
        p = vg.point(i)
        verts.append([p.xn, p.yn, p.scale])
    return {
        "kind": vg.kind.value,
        "level": vg.level,
        "vertices": verts,
        "edges": [[int(i), int(j), int(m)] for i, j, m in vg.edges],
    }


def graph_from_json_dict(d: dict) -> VertexGraph:
    kind = FractalKind(d["kind"])
    level = int(d["level"])
    s = vertex_scale(kind, level)
    xs, ys = [], []
    index = {}
    for vid, (xn, yn, sc) in enumerate(d["vertices"]):
        p = ExactPoint(kind, int(xn), int(yn), int(sc))
        lx, ly = p.lifted(s)
        xs.append(lx)
        ys.append(ly)
        index[(lx, ly)] = vid
    edges = np.asarray([[int(a), int(b), int(m)] for a, b, m in d["edges"]],
                       dtype=np.int64).reshape(-1, 3)
    return VertexGraph(
        kind=kind,
        level=level,
        xn=np.asarray(xs, dtype=np.int64),
        yn=np.asarray(ys, dtype=np.int64),
        edges=edges,
        addr_packed=np.full(len(xs), -1, dtype=np.int64),  # addresses not stored
        index=index,
        cells=None,
    )


def write_graph_json(vg: VertexGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_json_dict(vg), fh, separators=(",", ":"))
        fh.write("\n")


def read_graph_json(path) -> VertexGraph:
    with open(path) as fh:
        return graph_from_json_dict(json.load(fh))


def sg_vertex_count(n: int) -> int:
    # closed form for the gasket; the carpet count is obtained by enumeration
    return (3 ** (n + 1) + 3) // 2
