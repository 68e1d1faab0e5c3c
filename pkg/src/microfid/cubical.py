"""Sublevel-set persistent homology (degree 1) of grayscale chips.

The chip is turned into a filtered cubical complex with the V-construction:
pixels are vertices carrying their intensity, 4-neighbor pairs are edges
valued at the max of their endpoints, and each 2x2 pixel block is a square
valued at the max of its four corners. A bright blob ringed by darker
material then contributes exactly one H1 class: the dark ring closes a loop
early and the blob's peak fills it late.

Two independent engines compute the H1 diagram:

* :func:`compute_persistence` pairs cycles by union-find on the dual grid
  graph (squares plus a virtual outside face), sweeping thresholds downward.
  A loop in the sublevel complex encircles exactly one not-yet-filled region
  of squares, so H1 events are the merge events of those regions.
* :func:`brute_force_persistence` is a textbook full boundary-matrix
  reduction over Z/2 with no optimizations, kept deliberately slow and
  simple to serve as ground truth on small chips.

Both drop zero-persistence pairs and return identical multisets.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .images import GrayImage

__all__ = [
    "CubicalFiltration",
    "PersistenceDiagram",
    "build_filtration",
    "compute_persistence",
    "brute_force_persistence",
    "persistence_of_chip",
    "bottleneck_distance",
    "save_diagram",
    "load_diagram",
]

BRUTE_FORCE_MAX_SIDE = 32


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) pairs for H1 of one chip.

    Points are stored sorted; every retained point has death > birth, and no
    point is essential (the full complex is a solid rectangle, so every
    1-cycle eventually dies).
    """

    points: tuple[tuple[float, float], ...]
    homology_degree: int = 1

    def __post_init__(self):
        pts = tuple(sorted((float(b), float(d)) for b, d in self.points))
        for b, d in pts:
            if not (d > b):
                raise ValueError(f"diagram point ({b}, {d}) has no persistence")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self) -> np.ndarray:
        """(n, 2) float array of (birth, death) rows."""
        if not self.points:
            return np.zeros((0, 2))
        return np.array(self.points, dtype=np.float64)

    def persistences(self) -> np.ndarray:
        arr = self.as_array()
        return arr[:, 1] - arr[:, 0]


@dataclass(frozen=True)
class CubicalFiltration:
    """Cells of the V-construction complex in a valid filtration order.

    Cells are sorted ascending by (value, dimension, row-major index within
    dimension), so every face precedes its cofaces. ``boundary[i]`` lists the
    positions of cell i's facets in this order.
    """

    values: np.ndarray  # float64, per cell, ascending with the order
    dims: np.ndarray  # uint8 in {0, 1, 2}
    boundary: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.values)

    def cell_counts(self) -> tuple[int, int, int]:
        """(vertices, edges, squares)."""
        return (
            int(np.count_nonzero(self.dims == 0)),
            int(np.count_nonzero(self.dims == 1)),
            int(np.count_nonzero(self.dims == 2)),
        )

    def validate(self) -> None:
        """Check the lower-star and ordering invariants; raises on violation."""
        order_keys = list(zip(self.values.tolist(), self.dims.tolist()))
        if order_keys != sorted(order_keys):
            raise ValueError("cells are not sorted by (value, dimension)")
        for i, faces in enumerate(self.boundary):
            expected = {0: 0, 1: 2, 2: 4}[int(self.dims[i])]
            if len(faces) != expected:
                raise ValueError(f"cell {i} has {len(faces)} faces, expected {expected}")
            for f in faces:
                if f >= i:
                    raise ValueError(f"face {f} of cell {i} does not precede it")
                if self.values[f] > self.values[i]:
                    raise ValueError(
                        f"face value {self.values[f]} exceeds cell value {self.values[i]}"
                    )
                if self.dims[f] != self.dims[i] - 1:
                    raise ValueError("boundary lists must contain codimension-1 faces")


def build_filtration(chip: GrayImage) -> CubicalFiltration:
    """Build the sorted V-construction filtration of a chip."""
    values, dims, ids, faces = _enumerate_cells(chip.pixels)
    order = np.lexsort((ids, dims, values))
    pos_of = np.empty(len(order), dtype=np.int64)
    pos_of[order] = np.arange(len(order))
    boundary = tuple(
        tuple(int(pos_of[f]) for f in faces[cell]) for cell in order.tolist()
    )
    return CubicalFiltration(
        values=values[order], dims=dims[order].astype(np.uint8), boundary=boundary
    )


def compute_persistence(filtration: CubicalFiltration) -> PersistenceDiagram:
    """H1 (birth, death) pairs of the sublevel filtration, zero-persistence dropped.

    Sweeps the threshold downward over the dual graph: each square appears at
    its own value, the outside face is always present, and two faces connect
    when the edge between them is still absent from the sublevel complex.
    When two regions merge, the younger one (smaller maximum square value)
    dies; that maximum is the death of an H1 class and the merge edge's value
    is its birth.
    """
    dims = filtration.dims
    square_pos = np.flatnonzero(dims == 2)
    if square_pos.size == 0:
        return PersistenceDiagram(())

    n_edges = int(np.count_nonzero(dims == 1))
    edge_index = np.full(len(filtration), -1, dtype=np.int64)
    edge_index[dims == 1] = np.arange(n_edges)

    # Each edge bounds one square (perimeter) or two (interior).
    adj_a = np.full(n_edges, -1, dtype=np.int64)
    adj_b = np.full(n_edges, -1, dtype=np.int64)
    dense_of_square = {int(p): i for i, p in enumerate(square_pos.tolist())}
    for p in square_pos.tolist():
        k = dense_of_square[p]
        for f in filtration.boundary[p]:
            e = int(edge_index[f])
            if adj_a[e] < 0:
                adj_a[e] = k
            else:
                adj_b[e] = k

    omega = len(square_pos)  # virtual outside face, never filled
    births = np.empty(omega + 1, dtype=np.float64)
    births[:omega] = filtration.values[square_pos]
    births[omega] = math.inf

    edge_pos = np.flatnonzero(dims == 1)
    weights = filtration.values[edge_pos]
    sweep = np.lexsort((np.arange(n_edges), -weights))

    parent = list(range(omega + 1))

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    pairs = []
    birth_of = births.tolist()
    wlist = weights.tolist()
    alist = adj_a.tolist()
    blist = adj_b.tolist()
    for e in sweep.tolist():
        u = alist[e]
        v = blist[e]
        if v < 0:
            v = omega
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        if birth_of[ru] < birth_of[rv] or (
            birth_of[ru] == birth_of[rv] and ru != omega
        ):
            younger, elder = ru, rv
        else:
            younger, elder = rv, ru
        w = wlist[e]
        if birth_of[younger] > w:
            pairs.append((w, birth_of[younger]))
        parent[younger] = elder
    return PersistenceDiagram(tuple(pairs))


def persistence_of_chip(chip: GrayImage) -> PersistenceDiagram:
    """Convenience wrapper: filtration build + persistence in one call."""
    return compute_persistence(build_filtration(chip))


def brute_force_persistence(chip: GrayImage) -> PersistenceDiagram:
    """Ground-truth H1 diagram by full boundary-matrix reduction over Z/2.

    Enumerates its own cells and reduces every column with the standard
    algorithm, no clearing or twist, so it shares no code path with
    :func:`compute_persistence`. Restricted to small chips for tractability.
    """
    h, w = chip.pixels.shape
    if w > BRUTE_FORCE_MAX_SIDE or h > BRUTE_FORCE_MAX_SIDE:
        raise ValueError(
            f"chip {w}x{h} exceeds the {BRUTE_FORCE_MAX_SIDE}x{BRUTE_FORCE_MAX_SIDE} oracle limit"
        )
    values, dims, ids, faces = _enumerate_cells(chip.pixels)
    order = sorted(range(len(values)), key=lambda c: (values[c], dims[c], ids[c]))
    pos_of = {c: i for i, c in enumerate(order)}

    # Standard reduction: repeatedly cancel the lowest 1 of each column
    # against the recorded pivot column until the column is new or empty.
    columns = [set(pos_of[f] for f in faces[c]) for c in order]
    pivot_owner: dict[int, int] = {}
    pairs = []
    for j in range(len(columns)):
        col = columns[j]
        while col:
            low = max(col)
            owner = pivot_owner.get(low)
            if owner is None:
                break
            col ^= columns[owner]
        if col:
            low = max(col)
            pivot_owner[low] = j
            if dims[order[low]] == 1 and dims[order[j]] == 2:
                birth = values[order[low]]
                death = values[order[j]]
                if death > birth:
                    pairs.append((birth, death))
    return PersistenceDiagram(tuple(pairs))


def bottleneck_distance(a: PersistenceDiagram, b: PersistenceDiagram) -> float:
    """Exact bottleneck distance (L-infinity ground metric, diagonal allowed).

    Binary-searches the candidate radii and checks each by maximum bipartite
    matching, sized for oracle-scale diagrams.
    """
    pa = list(a.points)
    pb = list(b.points)
    if not pa and not pb:
        return 0.0

    def diag(p):
        return (p[1] - p[0]) / 2.0

    def dist(p, q):
        return max(abs(p[0] - q[0]), abs(p[1] - q[1]))

    candidates = sorted(
        {0.0}
        | {diag(p) for p in pa}
        | {diag(q) for q in pb}
        | {dist(p, q) for p in pa for q in pb}
    )

    def feasible(r: float) -> bool:
        # Left side: real points of `a` plus |b| diagonal slots; right side:
        # real points of `b` plus |a| diagonal slots. Bottleneck <= r iff a
        # perfect matching exists (diagonal slots pair freely among themselves).
        nl = len(pa) + len(pb)
        right_dummies = list(range(len(pb), len(pb) + len(pa)))
        adjacency: list[list[int]] = []
        for p in pa:
            row = [j for j, q in enumerate(pb) if dist(p, q) <= r]
            if diag(p) <= r:
                row.extend(right_dummies)
            adjacency.append(row)
        reachable_b = [j for j, q in enumerate(pb) if diag(q) <= r]
        for _ in range(len(pb)):
            adjacency.append(reachable_b + right_dummies)
        match_r = [-1] * (len(pb) + len(pa))

        def augment(u: int, seen: list[bool]) -> bool:
            for v in adjacency[u]:
                if not seen[v]:
                    seen[v] = True
                    if match_r[v] < 0 or augment(match_r[v], seen):
                        match_r[v] = u
                        return True
            return False

        matched = 0
        for u in range(nl):
            if augment(u, [False] * len(match_r)):
                matched += 1
        return matched == nl

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return candidates[lo]


def save_diagram(diagram: PersistenceDiagram, path: str | Path) -> Path:
    """Dump `birth,death` rows, one file per chip (`<chip_id>.dgm.csv`)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("birth", "death"))
        for b, d in diagram.points:
            writer.writerow((repr(b), repr(d)))
    return path


def load_diagram(path: str | Path) -> PersistenceDiagram:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["birth", "death"]:
            raise ValueError(f"{path}: expected 'birth,death' header, got {header}")
        points = tuple((float(b), float(d)) for b, d in reader)
    return PersistenceDiagram(points)


# ----------------------------------------------------------------------
# Cell enumeration (shared geometry; reduction paths stay independent)
# ----------------------------------------------------------------------

def _enumerate_cells(pixels: np.ndarray):
    """Canonical cells of the V-construction for a (H, W) intensity grid.

    Returns per-cell arrays (value, dimension, row-major index within the
    dimension) plus each cell's facet list as canonical cell ids. Horizontal
    edges precede vertical ones in the within-dimension numbering.
    """
    h, w = pixels.shape
    n_v = w * h
    n_he = (w - 1) * h
    n_ve = w * (h - 1)
    n_sq = (w - 1) * (h - 1)
    n = n_v + n_he + n_ve + n_sq

    values = np.empty(n, dtype=np.float64)
    dims = np.empty(n, dtype=np.int64)
    ids = np.empty(n, dtype=np.int64)
    faces: list[tuple[int, ...]] = [()] * n

    flat = pixels.ravel()
    values[:n_v] = flat
    dims[:n_v] = 0
    ids[:n_v] = np.arange(n_v)

    def vid(x, y):
        return y * w + x

    c = n_v
    for y in range(h):
        for x in range(w - 1):
            a, b = vid(x, y), vid(x + 1, y)
            values[c] = max(flat[a], flat[b])
            dims[c] = 1
            ids[c] = y * (w - 1) + x
            faces[c] = (a, b)
            c += 1
    for y in range(h - 1):
        for x in range(w):
            a, b = vid(x, y), vid(x, y + 1)
            values[c] = max(flat[a], flat[b])
            dims[c] = 1
            ids[c] = n_he + y * w + x
            faces[c] = (a, b)
            c += 1

    def heid(x, y):
        return n_v + y * (w - 1) + x

    def veid(x, y):
        return n_v + n_he + y * w + x

    for y in range(h - 1):
        for x in range(w - 1):
            top, bottom = heid(x, y), heid(x, y + 1)
            left, right = veid(x, y), veid(x + 1, y)
            values[c] = max(values[top], values[bottom], values[left], values[right])
            dims[c] = 2
            ids[c] = y * (w - 1) + x
            faces[c] = (top, bottom, left, right)
            c += 1

    return values, dims, ids, faces
