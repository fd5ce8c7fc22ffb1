"""Group extensions of a subshift driven by a one-symbol weight function.

The extension acts by (x, g) -> (shift x, psi(x0) g).  Weights of later
symbols multiply on the left, so the weight of a word w of length n is
psi(w[n-1]) ... psi(w[1]) psi(w[0]).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key

from .errors import (
    DimensionMismatch,
    InadmissibleWord,
    InfiniteGroup,
    RangeTooLarge,
    max_states_cap,
)
from .groups import Group, GroupElement, subgroup_rank_and_index
from .sft import (
    BlockGraph,
    PeriodicOrbit,
    SftSpec,
    Word,
    _tarjan_scc,
    build_block_graph,
    enumerate_periodic_orbits,
)


@dataclass(frozen=True)
class SkewSystem:
    sft: SftSpec
    group: Group
    psi: tuple[GroupElement, ...]

    def psi_of(self, symbol: int) -> GroupElement:
        return self.psi[symbol - 1]


def make_skew_system(sft: SftSpec, group: Group, psi) -> SkewSystem:
    psi = tuple(psi)
    if len(psi) != sft.k:
        raise DimensionMismatch(f"psi needs one value per symbol, got {len(psi)}")
    checked = []
    for value in psi:
        if group.is_finite:
            value = int(value)
            if not 0 <= value < group.order:
                raise DimensionMismatch(f"element index {value} out of range")
        else:
            value = tuple(int(x) for x in value)
            if len(value) != group.rank:
                raise DimensionMismatch(
                    f"expected vectors of length {group.rank}, got {value}"
                )
        checked.append(value)
    return SkewSystem(sft=sft, group=group, psi=tuple(checked))


def psi_n(system: SkewSystem, word) -> GroupElement:
    """Accumulated weight of an admissible word, later symbols on the left."""
    word = tuple(word)
    if not system.sft.is_admissible(word):
        raise InadmissibleWord(word)
    acc = system.group.identity
    for s in word:
        acc = system.group.mul(system.psi_of(s), acc)
    return acc


@dataclass(frozen=True)
class FrobeniusClassTag:
    """Conjugacy class (finite groups) or lattice vector (Z^d) of an orbit weight."""

    trivial: bool
    members: tuple[int, ...] | None = None
    vector: tuple[int, ...] | None = None


def frobenius_class(system: SkewSystem, orbit: PeriodicOrbit) -> FrobeniusClassTag:
    if not system.sft.is_admissible(orbit.word, cyclic=True):
        raise InadmissibleWord(orbit.word)
    weight = psi_n(system, orbit.word)
    group = system.group
    if group.is_finite:
        members = sorted(
            {group.mul(group.mul(g, weight), group.inv(g)) for g in group.elements()}
        )
        return FrobeniusClassTag(
            trivial=weight == group.identity, members=tuple(members)
        )
    return FrobeniusClassTag(trivial=not any(weight), vector=weight)


def enumerate_trivial_class_orbits(
    system: SkewSystem, max_period: int
) -> list[tuple[PeriodicOrbit, FrobeniusClassTag]]:
    """Primitive orbits of period <= max_period whose weight is the identity."""
    out = []
    for orbit in enumerate_periodic_orbits(system.sft, max_period):
        tag = frobenius_class(system, orbit)
        if tag.trivial:
            out.append((orbit, tag))
    return out


@dataclass(frozen=True)
class ProductGraph:
    """Block graph crossed with a finite group.

    Vertex ids are block-major: vid = block_index * order + element_index.
    Edge ids follow base edge order, then element order, so every traversal
    here is deterministic.
    """

    system: SkewSystem
    base: BlockGraph
    order: int
    edge_tail: tuple[int, ...]
    edge_head: tuple[int, ...]
    out_edges: tuple[tuple[int, ...], ...]

    @property
    def n_vertices(self) -> int:
        return len(self.base.vertices) * self.order

    def vertex_label(self, vid: int) -> tuple[Word, str]:
        block = self.base.vertices[vid // self.order]
        return block, self.system.group.name_of(vid % self.order)

    def edge_symbol(self, eid: int) -> int:
        return self.base.edges[eid // self.order][0]

    def project_cycle(self, edge_ids) -> Word:
        return tuple(self.edge_symbol(e) for e in edge_ids)


def build_product_graph(system: SkewSystem, r: int) -> ProductGraph:
    group = system.group
    if not group.is_finite:
        raise InfiniteGroup("product graphs require a finite group")
    base = build_block_graph(system.sft, r)
    order = group.order
    n = len(base.vertices) * order
    if n > max_states_cap():
        raise RangeTooLarge(f"product graph would have {n} vertices")
    tails = []
    heads = []
    out: list[list[int]] = [[] for _ in range(n)]
    for be in range(len(base.edges)):
        symbol = base.edges[be][0]
        step = system.psi_of(symbol)
        tb = base.edge_tail[be]
        hb = base.edge_head[be]
        for g in range(order):
            tail = tb * order + g
            head = hb * order + group.mul(step, g)
            out[tail].append(len(tails))
            tails.append(tail)
            heads.append(head)
    return ProductGraph(
        system=system,
        base=base,
        order=order,
        edge_tail=tuple(tails),
        edge_head=tuple(heads),
        out_edges=tuple(tuple(sorted(x)) for x in out),
    )


# ---------------------------------------------------------------------------
# Deterministic graph plumbing shared by the cohomology solvers.


def product_scc_witness(pg: ProductGraph):
    """First ordered pair of product vertices with no connecting path.

    Only called on graphs already known not to be strongly connected.
    """
    n = pg.n_vertices
    for v in range(n):
        reach = _forward_reach(n, pg.out_edges, pg.edge_head, v)
        if len(reach) != n:
            u = next(x for x in range(n) if x not in reach)
            return pg.vertex_label(v), pg.vertex_label(u)
    raise AssertionError("graph is strongly connected")


def bfs_arborescence(n: int, out_edges, edge_head, root: int):
    """Forward BFS tree from root: (parent_edge per vertex, visit order)."""
    parent = [None] * n
    seen = [False] * n
    seen[root] = True
    order = [root]
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for e in out_edges[v]:
            w = edge_head[e]
            if not seen[w]:
                seen[w] = True
                parent[w] = e
                order.append(w)
                queue.append(w)
    return parent, order


def shortest_return_edges(n: int, edge_tail, edge_head, root: int):
    """next_edge[v] = first edge of a shortest forward path from v to root."""
    in_edges: list[list[int]] = [[] for _ in range(n)]
    for e in range(len(edge_tail)):
        in_edges[edge_head[e]].append(e)
    next_edge = [None] * n
    seen = [False] * n
    seen[root] = True
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for e in in_edges[v]:
            t = edge_tail[e]
            if not seen[t]:
                seen[t] = True
                next_edge[t] = e
                queue.append(t)
    return next_edge


def path_from_root(parent_edge, edge_tail, v: int) -> list[int]:
    path = []
    while parent_edge[v] is not None:
        e = parent_edge[v]
        path.append(e)
        v = edge_tail[e]
    path.reverse()
    return path


def path_to_root(next_edge, edge_head, v: int) -> list[int]:
    path = []
    while next_edge[v] is not None:
        e = next_edge[v]
        path.append(e)
        v = edge_head[e]
    return path


def find_violating_cycle(walk_edges, edge_head, start: int, score):
    """Extract a simple cycle with positive score from a closed walk.

    The walk is scanned left to right; whenever a vertex repeats, the
    enclosed simple cycle is scored.  A positively scored cycle is returned
    at once; zero or negative cycles are spliced out and the scan continues.
    Returns the best-scoring cycle seen if none is positive, or None for an
    empty walk.  ``score`` maps an edge-id list to a number; exact callers
    use 1 for violating and 0 for clean cycles.
    """
    pos = {start: 0}
    stack_vertices = [start]
    stack_edges: list[int] = []
    best = None
    best_score = None
    for e in walk_edges:
        stack_edges.append(e)
        v = edge_head[e]
        if v in pos:
            i = pos[v]
            seg = stack_edges[i:]
            s = score(seg)
            if s > 0:
                return seg
            if best_score is None or s > best_score:
                best_score = s
                best = seg
            for u in stack_vertices[i + 1 :]:
                del pos[u]
            del stack_vertices[i + 1 :]
            del stack_edges[i:]
        else:
            pos[v] = len(stack_vertices)
            stack_vertices.append(v)
    return best


# ---------------------------------------------------------------------------
# Transitivity.


@dataclass(frozen=True)
class NonTransitivityCertificate:
    kind: str
    functional: tuple[int, ...] | None = None
    lattice_rank: int | None = None
    lattice_diagonal: tuple[int, ...] | None = None


@dataclass(frozen=True)
class TransitivityEvidence:
    probe_depth: int
    probe_covers_simple_cycles: bool
    orbit_count: int
    distinct_classes: tuple[tuple[int, ...], ...]
    lattice_rank: int
    lattice_diagonal: tuple[int, ...]
    lattice_full: bool
    zero_in_interior: bool
    heuristic_transitive: bool


@dataclass(frozen=True)
class TransitivityVerdict:
    status: str
    witness: tuple[tuple[Word, str], tuple[Word, str]] | None = None
    certificate: NonTransitivityCertificate | None = None
    evidence: TransitivityEvidence | None = None


def _cross(a, b) -> int:
    return a[0] * b[1] - a[1] * b[0]


def _strict_functional_dim2(vectors):
    """An integer functional positive on every vector, or None.

    Exists iff all directions fit in an open half plane; decided exactly by
    sorting directions around the circle and looking for a gap wider than
    a half turn.
    """
    if any(not any(v) for v in vectors):
        return None

    def primitive(v):
        g = _gcd(v[0], v[1])
        return (v[0] // g, v[1] // g)

    dirs = sorted(set(primitive(v) for v in vectors))

    def half(v):
        return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1

    def cmp(a, b):
        if half(a) != half(b):
            return half(a) - half(b)
        c = _cross(a, b)
        return -1 if c > 0 else (1 if c < 0 else 0)

    dirs.sort(key=cmp_to_key(cmp))
    m = len(dirs)
    if m == 1:
        lam = dirs[0]
    else:
        lam = None
        for i in range(m):
            a = dirs[i]
            b = dirs[(i + 1) % m]
            # Gap from a counterclockwise to b exceeds a half turn; the
            # occupied arc then runs from b counterclockwise to a, and the
            # sum of the two inward normals is positive on all of it.
            if _cross(a, b) < 0:
                lam = (a[1] - b[1], b[0] - a[0])
                break
        if lam is None:
            return None
    if all(lam[0] * v[0] + lam[1] * v[1] > 0 for v in vectors):
        return lam
    return None


def _nullspace_vector(rows, d):
    """One integer vector orthogonal to all rows, or None if they span Q^d."""
    mat = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    rank = 0
    for col in range(d):
        pivot = None
        for i in range(rank, len(mat)):
            if mat[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        inv = 1 / mat[rank][col]
        mat[rank] = [x * inv for x in mat[rank]]
        for i in range(len(mat)):
            if i != rank and mat[i][col]:
                factor = mat[i][col]
                mat[i] = [a - factor * b for a, b in zip(mat[i], mat[rank])]
        pivots.append(col)
        rank += 1
    if rank == d:
        return None
    free = next(c for c in range(d) if c not in pivots)
    sol = [Fraction(0)] * d
    sol[free] = Fraction(1)
    for row_i, col in enumerate(pivots):
        sol[col] = -mat[row_i][free]
    denom = 1
    for x in sol:
        denom = denom * x.denominator // _gcd(denom, x.denominator)
    return tuple(int(x * denom) for x in sol)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def _zero_in_interior(vectors, d) -> bool:
    """Whether 0 is interior to the convex hull of the given lattice vectors.

    Equivalent to: no nonzero functional is >= 0 on all of them.  Candidate
    functionals are taken from nullspaces of (d-1)-subsets, which covers the
    extreme rays of the dual cone; invariant under scaling each vector by a
    positive factor, so normalized class vectors give the same answer.
    """
    vecs = sorted(set(tuple(v) for v in vectors))
    if not vecs:
        return False
    from itertools import combinations

    candidates = []
    perp = _nullspace_vector(vecs, d)
    if perp is not None:
        candidates.append(perp)
    for subset in combinations(vecs, max(d - 1, 0)):
        lam = _nullspace_vector(list(subset), d)
        if lam is not None:
            candidates.append(lam)
    if d == 1:
        candidates.append((1,))
    for lam in candidates:
        if not any(lam):
            continue
        for sign in (1, -1):
            if all(sign * sum(l * x for l, x in zip(lam, v)) >= 0 for v in vecs):
                return False
    return True


def _strict_functional(vectors, d):
    if d == 1:
        if all(v[0] > 0 for v in vectors):
            return (1,)
        if all(v[0] < 0 for v in vectors):
            return (-1,)
        return None
    if d == 2:
        return _strict_functional_dim2(vectors)
    # Higher rank: try dual cone extreme-ray candidates, soundly incomplete.
    from itertools import combinations

    vecs = sorted(set(tuple(v) for v in vectors))
    candidates = []
    for subset in combinations(vecs, max(d - 1, 0)):
        lam = _nullspace_vector(list(subset), d)
        if lam is not None:
            candidates.extend([lam, tuple(-x for x in lam)])
    total = None
    for lam in candidates:
        if all(sum(l * x for l, x in zip(lam, v)) >= 0 for v in vecs):
            total = lam if total is None else tuple(a + b for a, b in zip(total, lam))
    if total is not None and all(
        sum(l * x for l, x in zip(total, v)) > 0 for v in vecs
    ):
        return total
    return None


def check_transitivity(system: SkewSystem, *, probe_depth: int = 12) -> TransitivityVerdict:
    """Decide transitivity exactly for finite groups; for Z^d return a
    three-valued verdict backed by periodic orbit weights.

    Finite groups: the extension is transitive iff the product graph over
    1-blocks is strongly connected.  Z^d: a verified one-sided functional or
    a proper weight lattice refutes transitivity; transitivity itself is
    never certified, the best positive answer is "unknown" with evidence.
    """
    group = system.group
    if group.is_finite:
        pg = build_product_graph(system, 1)
        n = pg.n_vertices
        comps = _tarjan_scc(n, lambda v: [pg.edge_head[e] for e in pg.out_edges[v]])
        if len(comps) == 1:
            return TransitivityVerdict(status="transitive")
        return TransitivityVerdict(
            status="not_transitive", witness=product_scc_witness(pg)
        )

    d = group.rank
    orbits = enumerate_periodic_orbits(system.sft, probe_depth)
    classes = [psi_n_cyclic(system, o.word) for o in orbits]
    distinct = tuple(sorted(set(classes)))
    report = subgroup_rank_and_index(list(distinct), d)
    covers = probe_depth >= system.sft.k
    interior = _zero_in_interior(distinct, d) if distinct else False
    evidence = TransitivityEvidence(
        probe_depth=probe_depth,
        probe_covers_simple_cycles=covers,
        orbit_count=len(orbits),
        distinct_classes=distinct,
        lattice_rank=report.rank,
        lattice_diagonal=report.diagonal,
        lattice_full=report.full,
        zero_in_interior=interior,
        heuristic_transitive=report.full and interior,
    )
    if covers and distinct:
        lam = _strict_functional(distinct, d)
        if lam is not None:
            return TransitivityVerdict(
                status="not_transitive",
                certificate=NonTransitivityCertificate(
                    kind="one_sided", functional=lam
                ),
                evidence=evidence,
            )
        if not report.full:
            return TransitivityVerdict(
                status="not_transitive",
                certificate=NonTransitivityCertificate(
                    kind="proper_subgroup",
                    lattice_rank=report.rank,
                    lattice_diagonal=report.diagonal,
                ),
                evidence=evidence,
            )
    return TransitivityVerdict(status="unknown", evidence=evidence)


def psi_n_cyclic(system: SkewSystem, word) -> GroupElement:
    """Weight of a cyclic word, checking the wrap edge too."""
    if not system.sft.is_admissible(word, cyclic=True):
        raise InadmissibleWord(word)
    return psi_n(system, word)


def _forward_reach(n, out_edges, edge_head, start) -> set[int]:
    seen = {start}
    queue = [start]
    while queue:
        v = queue.pop()
        for e in out_edges[v]:
            w = edge_head[e]
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen
