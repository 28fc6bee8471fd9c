"""Vietoris-Rips filtrations and 0/1-dimensional persistence diagrams.

The filtration truncates at ``alpha_max``: only edges with normalized
distance <= alpha_max enter the complex, and classes still alive there are
reported with death = alpha_max (finite coordinates keep the diagram
distances downstream well defined).  Simplices are ordered by
(filtration value, dimension, lexicographic vertex tuple); the tie rule is
arbitrary mathematically but pins down a reproducible computation.

Dimension-0 bars all have birth 0 and one bar is emitted per vertex: n-1 of
them record component merges (kept even at zero length, e.g. coincident
points) and the rest are capped essential bars.  Dimension-1 bars come from
pairing cycle-creating edges with the triangles that fill them; pairs with
death equal to birth carry no topological content and are dropped.

``persistence_h0`` runs Kruskal-style union-find, ``persistence_h1`` a
column reduction over triangle boundaries stored as integer bitsets.
``persistence_oracle`` is an independent, deliberately naive full
boundary-matrix reduction used as ground truth on small inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distance import DistanceMatrix
from .errors import InvalidParameter, OracleTooLarge

# (dim, birth, death)
Bar = tuple[int, float, float]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (dim, birth, death) bars."""

    bars: tuple[Bar, ...]
    alpha_max: float | None = None

    def __post_init__(self):
        bars = tuple((int(d), float(b), float(x)) for d, b, x in self.bars)
        for dim, birth, death in bars:
            if birth < 0 or death < birth:
                raise InvalidParameter(f"bad bar ({dim}, {birth}, {death})")
        object.__setattr__(self, "bars", bars)

    def restrict(self, dim: int) -> "PersistenceDiagram":
        return PersistenceDiagram(
            tuple(b for b in self.bars if b[0] == dim), self.alpha_max
        )

    def __len__(self) -> int:
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)


@dataclass(frozen=True)
class RipsFiltration:
    """Edges (i, j, value) with i < j, sorted by (value, i, j), truncated at alpha_max."""

    n: int
    edges: tuple[tuple[int, int, float], ...]
    alpha_max: float


def build_filtration(D: DistanceMatrix, alpha_max: float) -> RipsFiltration:
    """Collect all edges with distance <= alpha_max in deterministic order."""
    if not alpha_max > 0:
        raise InvalidParameter(f"alpha_max must be positive, got {alpha_max}")
    if alpha_max > 1:
        raise InvalidParameter("alpha_max cannot exceed 1 on normalized distances")
    n = D.n
    iu, ju = np.triu_indices(n, 1)
    vals = D.entries[iu, ju]
    keep = vals <= alpha_max
    iu, ju, vals = iu[keep], ju[keep], vals[keep]
    order = np.lexsort((ju, iu, vals))
    edges = tuple(
        (int(iu[o]), int(ju[o]), float(vals[o])) for o in order
    )
    return RipsFiltration(n=n, edges=edges, alpha_max=float(alpha_max))


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.min_vertex = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge components of a and b; the one with the larger minimum vertex dies."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.min_vertex[ra] > self.min_vertex[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def persistence_h0(filt: RipsFiltration) -> PersistenceDiagram:
    """Dimension-0 diagram: one merge bar per spanning-forest edge, capped essentials."""
    uf = _UnionFind(filt.n)
    bars = []
    for i, j, value in filt.edges:
        if uf.union(i, j):
            bars.append((0, 0.0, value))
    components = len({uf.find(v) for v in range(filt.n)})
    bars.extend((0, 0.0, filt.alpha_max) for _ in range(components))
    return PersistenceDiagram(tuple(bars), alpha_max=filt.alpha_max)


def _triangles(filt: RipsFiltration):
    """All (value, i, j, k) triangles of the truncated complex, sorted by (value, i, j, k)."""
    nbr = [set() for _ in range(filt.n)]
    value = {}
    for i, j, v in filt.edges:
        nbr[i].add(j)
        nbr[j].add(i)
        value[i, j] = v
    tris = []
    for i, j, vij in filt.edges:
        for k in nbr[i] & nbr[j]:
            if k > j:
                v = max(vij, value[i, k], value[j, k])
                tris.append((v, i, j, k))
    tris.sort()
    return tris, value


def persistence_h1(filt: RipsFiltration) -> PersistenceDiagram:
    """Dimension-1 diagram via column reduction of triangle boundaries.

    Columns are bitsets over edge positions in filtration order; the
    surviving low entry of each reduced column pairs a cycle-creating edge
    (birth) with the triangle that fills it (death).  Cycle edges never
    paired die at alpha_max.
    """
    edge_pos = {}
    edge_value = []
    for pos, (i, j, v) in enumerate(filt.edges):
        edge_pos[i, j] = pos
        edge_value.append(v)

    tris, _ = _triangles(filt)

    low_owner: dict[int, int] = {}
    death_of_edge: dict[int, float] = {}
    for v, i, j, k in tris:
        col = (
            (1 << edge_pos[i, j])
            | (1 << edge_pos[i, k])
            | (1 << edge_pos[j, k])
        )
        while col:
            low = col.bit_length() - 1
            owner = low_owner.get(low)
            if owner is None:
                low_owner[low] = col
                death_of_edge[low] = v
                break
            col ^= owner

    # Edges outside the spanning forest create cycles; any of them not killed
    # by a triangle is an essential loop capped at alpha_max.
    uf = _UnionFind(filt.n)
    cycle_edges = [
        pos
        for pos, (i, j, _) in enumerate(filt.edges)
        if not uf.union(i, j)
    ]

    bars = []
    for pos in cycle_edges:
        birth = edge_value[pos]
        death = death_of_edge.get(pos, filt.alpha_max)
        if death > birth:
            bars.append((1, birth, death))
    bars.sort()
    return PersistenceDiagram(tuple(bars), alpha_max=filt.alpha_max)


def threshold_diagram(diag: PersistenceDiagram, epsilon: float) -> PersistenceDiagram:
    """Keep bars with lifetime death - birth >= epsilon."""
    if epsilon < 0:
        raise InvalidParameter(f"epsilon must be nonnegative, got {epsilon}")
    return PersistenceDiagram(
        tuple(b for b in diag.bars if b[2] - b[1] >= epsilon), diag.alpha_max
    )


def persistence_oracle(filt: RipsFiltration, max_dim: int) -> PersistenceDiagram:
    """Naive full boundary-matrix reduction; ground truth on small inputs.

    Builds every simplex up to dimension max_dim + 1, reduces columns left to
    right with plain set arithmetic, and reads bars straight off the pairing.
    Guarded to n <= 16 because the simplex count explodes past that.
    """
    if filt.n > 16:
        raise OracleTooLarge(f"oracle limited to 16 points, got {filt.n}")
    if max_dim not in (0, 1):
        raise InvalidParameter("oracle supports max_dim 0 or 1")

    simplices: list[tuple[float, int, tuple[int, ...]]] = [
        (0.0, 0, (v,)) for v in range(filt.n)
    ]
    simplices.extend((v, 1, (i, j)) for i, j, v in filt.edges)
    if max_dim >= 1:
        tris, _ = _triangles(filt)
        simplices.extend((v, 2, (i, j, k)) for v, i, j, k in tris)
    simplices.sort()
    index = {verts: pos for pos, (_, _, verts) in enumerate(simplices)}

    columns: list[set[int]] = []
    for _, dim, verts in simplices:
        if dim == 0:
            columns.append(set())
        else:
            columns.append(
                {index[verts[:m] + verts[m + 1 :]] for m in range(len(verts))}
            )

    owner: dict[int, int] = {}
    for j, col in enumerate(columns):
        while col:
            low = max(col)
            prev = owner.get(low)
            if prev is None:
                owner[low] = j
                break
            col ^= columns[prev]

    bars = []
    paired_or_negative = set()
    for low, j in owner.items():
        paired_or_negative.add(low)
        paired_or_negative.add(j)
        dim, birth, death = simplices[low][1], simplices[low][0], simplices[j][0]
        if dim > max_dim:
            continue
        if dim == 0 or death > birth:
            bars.append((dim, birth, death))
    for pos, (value, dim, _) in enumerate(simplices):
        if pos in paired_or_negative or columns[pos]:
            continue
        if dim > max_dim:
            continue
        if dim == 0 or filt.alpha_max > value:
            bars.append((dim, value, filt.alpha_max))
    bars.sort()
    return PersistenceDiagram(tuple(bars), alpha_max=filt.alpha_max)


def write_diagram(diag: PersistenceDiagram, path):
    """One bar per line, "dim birth death", 17 significant digits."""
    ordered = sorted(diag.bars, key=lambda b: (b[0], b[1], b[2]))
    with open(path, "w", encoding="utf-8") as fh:
        for dim, birth, death in ordered:
            fh.write(f"{dim} {birth:.17g} {death:.17g}\n")


def read_diagram(path, alpha_max: float | None = None) -> PersistenceDiagram:
    bars = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            dim, birth, death = line.split()
            bars.append((int(dim), float(birth), float(death)))
    return PersistenceDiagram(tuple(bars), alpha_max=alpha_max)
