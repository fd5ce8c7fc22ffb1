"""Subshifts of finite type as finite combinatorics.

A shift space on symbols 1..k with a 0/1 transition matrix is handled
entirely through admissible finite words: block graphs, primitive cyclic
words and sums along them.  No infinite sequences are materialized, so
every operation here is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .errors import (
    BadShape,
    DeadSymbol,
    InadmissibleWord,
    NotIrreducible,
    RangeTooLarge,
    DEFAULT_MAX_WORK,
    max_period_cap,
    max_states_cap,
)

Word = tuple[int, ...]


@dataclass(frozen=True)
class SftSpec:
    """Alphabet size and 0/1 transition matrix over symbols 1..k.

    ``transitions[a-1][b-1] == 1`` means the two-letter word ``ab`` is
    admissible.
    """

    k: int
    transitions: tuple[tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, rows) -> "SftSpec":
        rows = tuple(tuple(int(x) for x in row) for row in rows)
        return cls(k=len(rows), transitions=rows)

    @classmethod
    def full_shift(cls, k: int) -> "SftSpec":
        return cls(k=k, transitions=tuple(tuple(1 for _ in range(k)) for _ in range(k)))

    def allows(self, a: int, b: int) -> bool:
        return self.transitions[a - 1][b - 1] == 1

    def successors(self, a: int) -> tuple[int, ...]:
        row = self.transitions[a - 1]
        return tuple(b for b in range(1, self.k + 1) if row[b - 1] == 1)

    def is_admissible(self, word, *, cyclic: bool = False) -> bool:
        word = tuple(word)
        if not word:
            return False
        if any(not 1 <= s <= self.k for s in word):
            return False
        for a, b in zip(word, word[1:]):
            if not self.allows(a, b):
                return False
        if cyclic and not self.allows(word[-1], word[0]):
            return False
        return True


@dataclass(frozen=True)
class ValidationReport:
    irreducible: bool
    aperiodic: bool
    period: int


def _tarjan_scc(n: int, succ) -> list[list[int]]:
    """Strongly connected components of vertices 0..n-1, iterative Tarjan.

    Components are returned in a deterministic order; vertices inside a
    component are sorted.
    """
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            neighbors = succ(v)
            while pi < len(neighbors):
                w = neighbors[pi]
                pi += 1
                if index[w] is None:
                    work[-1] = (v, pi)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comp.sort()
                components.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return components


def validate_sft(spec: SftSpec) -> ValidationReport:
    """Check shape, absence of dead symbols and irreducibility.

    Raises BadShape, DeadSymbol or NotIrreducible.  The report records the
    cyclic period of the transition graph; irreducibility is required, so a
    returned report always has ``irreducible=True``.
    """
    if spec.k < 1:
        raise BadShape("alphabet must contain at least one symbol")
    if len(spec.transitions) != spec.k:
        raise BadShape(f"expected {spec.k} rows, got {len(spec.transitions)}")
    for row in spec.transitions:
        if len(row) != spec.k:
            raise BadShape(f"expected {spec.k} columns, got {len(row)}")
        for x in row:
            if x not in (0, 1):
                raise BadShape(f"transition entries must be 0 or 1, got {x!r}")
    for a in range(1, spec.k + 1):
        if not any(spec.transitions[a - 1]):
            raise DeadSymbol(a, "successor")
        if not any(spec.transitions[b - 1][a - 1] for b in range(1, spec.k + 1)):
            raise DeadSymbol(a, "predecessor")

    succ = [tuple(b - 1 for b in spec.successors(a)) for a in range(1, spec.k + 1)]
    components = _tarjan_scc(spec.k, lambda v: succ[v])
    if len(components) > 1:
        # Exhibit the first ordered pair with no connecting path.
        for i in range(spec.k):
            reach = _reachable_from(spec.k, succ, i)
            for j in range(spec.k):
                if j not in reach:
                    raise NotIrreducible((i + 1, j + 1))
        raise NotIrreducible((1, 1))  # unreachable

    # Cyclic period: gcd of (dist[u] + 1 - dist[v]) over edges u -> v.
    dist = [None] * spec.k
    dist[0] = 0
    queue = [0]
    while queue:
        v = queue.pop(0)
        for w in succ[v]:
            if dist[w] is None:
                dist[w] = dist[v] + 1
                queue.append(w)
    period = 0
    for v in range(spec.k):
        for w in succ[v]:
            period = gcd(period, dist[v] + 1 - dist[w])
    period = abs(period)
    if period == 0:
        period = 1
    return ValidationReport(irreducible=True, aperiodic=period == 1, period=period)


def _reachable_from(n: int, succ, start: int) -> set[int]:
    seen = {start}
    queue = [start]
    while queue:
        v = queue.pop()
        for w in succ[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


@dataclass(frozen=True)
class BlockGraph:
    """Presentation of the shift on admissible r-blocks.

    Vertices are the admissible words of length r in lexicographic order;
    each admissible word of length r+1 is an edge from its prefix block to
    its suffix block.
    """

    spec: SftSpec
    r: int
    vertices: tuple[Word, ...]
    edges: tuple[Word, ...]
    edge_tail: tuple[int, ...]
    edge_head: tuple[int, ...]
    out_edges: tuple[tuple[int, ...], ...]

    def vertex_index(self, block: Word) -> int:
        # Vertices are sorted, so bisection would do; linear maps are small
        # enough that a dict is built lazily by callers that need bulk lookup.
        try:
            return self.vertices.index(tuple(block))
        except ValueError:
            raise InadmissibleWord(block) from None

    def index_map(self) -> dict[Word, int]:
        return {b: i for i, b in enumerate(self.vertices)}

    def successors(self, v: int) -> list[int]:
        return [self.edge_head[e] for e in self.out_edges[v]]

    def is_strongly_connected(self) -> bool:
        n = len(self.vertices)
        return n > 0 and len(_tarjan_scc(n, self.successors)) == 1


def _admissible_words(spec: SftSpec, length: int, cap: int) -> list[Word]:
    words: list[Word] = []
    stack: list[Word] = [(a,) for a in range(spec.k, 0, -1)]
    while stack:
        w = stack.pop()
        if len(w) == length:
            words.append(w)
            if len(words) > cap:
                raise RangeTooLarge(
                    f"more than {cap} admissible words of length {length}"
                )
            continue
        for b in reversed(spec.successors(w[-1])):
            stack.append(w + (b,))
    words.sort()
    return words


def build_block_graph(spec: SftSpec, r: int, *, max_vertices: int | None = None) -> BlockGraph:
    """Build the r-block presentation.  Raises RangeTooLarge beyond the cap."""
    if r < 1:
        raise BadShape("block length must be at least 1")
    cap = max_states_cap() if max_vertices is None else max_vertices
    vertices = tuple(_admissible_words(spec, r, cap))
    index = {w: i for i, w in enumerate(vertices)}
    edges: list[Word] = []
    tails: list[int] = []
    heads: list[int] = []
    out: list[list[int]] = [[] for _ in vertices]
    for i, w in enumerate(vertices):
        for b in spec.successors(w[-1]):
            e = w + (b,)
            j = index[e[1:]]
            out[i].append(len(edges))
            edges.append(e)
            tails.append(i)
            heads.append(j)
    return BlockGraph(
        spec=spec,
        r=r,
        vertices=vertices,
        edges=tuple(edges),
        edge_tail=tuple(tails),
        edge_head=tuple(heads),
        out_edges=tuple(tuple(x) for x in out),
    )


@dataclass(frozen=True, order=True)
class PeriodicOrbit:
    """A primitive periodic orbit, stored as the least rotation of its word."""

    word: Word

    @property
    def period(self) -> int:
        return len(self.word)

    @classmethod
    def from_word(cls, word) -> "PeriodicOrbit":
        word = tuple(int(s) for s in word)
        if not word:
            raise BadShape("orbit word must be nonempty")
        if not is_primitive(word):
            raise BadShape(f"word {word} is a power of a shorter word")
        return cls(word=canonical_rotation(word))


def canonical_rotation(word: Word) -> Word:
    """Lexicographically least rotation of a cyclic word."""
    n = len(word)
    doubled = word + word
    best = word
    lo = min(word)
    for i in range(1, n):
        if word[i] != lo:
            continue
        cand = doubled[i : i + n]
        if cand < best:
            best = cand
    return best


def is_primitive(word: Word) -> bool:
    """True when the cyclic word is not a repetition of a shorter word."""
    n = len(word)
    for d in range(1, n):
        if n % d:
            continue
        if word == word[:d] * (n // d):
            return False
    return True


def primitive_root(word: Word) -> tuple[Word, int]:
    """Split a cyclic word into (primitive core, multiplicity)."""
    n = len(word)
    for d in range(1, n + 1):
        if n % d:
            continue
        if word == word[:d] * (n // d):
            return word[:d], n // d
    raise AssertionError("unreachable")


def _word_count_estimate(spec: SftSpec, max_len: int) -> int:
    """Number of admissible words of every length up to max_len."""
    total = 0
    power = [[1 if i == j else 0 for j in range(spec.k)] for i in range(spec.k)]
    for length in range(1, max_len + 1):
        if length == 1:
            total += spec.k
        else:
            power = _int_mat_mult(power, [list(r) for r in spec.transitions])
            total += sum(sum(row) for row in power)
        if total > 10 * DEFAULT_MAX_WORK:
            break
    return total


def enumerate_periodic_orbits(
    spec: SftSpec, max_period: int, *, max_work: int | None = None
) -> list[PeriodicOrbit]:
    """All primitive periodic orbits of period <= max_period.

    Orbits are returned sorted by (period, word).  The search walks every
    admissible word whose symbols stay >= its first symbol, keeping words
    that close up admissibly and are the least rotation of a primitive
    cycle, so no deduplication set is needed.
    """
    cap = max_period_cap()
    if max_period > cap:
        raise RangeTooLarge(f"period {max_period} exceeds cap {cap}")
    if max_period < 1:
        return []
    budget = DEFAULT_MAX_WORK if max_work is None else max_work
    if _word_count_estimate(spec, max_period) > budget:
        raise RangeTooLarge(
            f"orbit enumeration up to period {max_period} exceeds the work budget"
        )

    succ = [spec.successors(a) for a in range(1, spec.k + 1)]
    found: list[Word] = []

    def extend(word: list[int]) -> None:
        a = word[-1]
        first = word[0]
        if spec.allows(a, first):
            w = tuple(word)
            if w == canonical_rotation(w) and is_primitive(w):
                found.append(w)
        if len(word) == max_period:
            return
        for b in succ[a - 1]:
            if b < first:
                continue
            word.append(b)
            extend(word)
            word.pop()

    for start in range(1, spec.k + 1):
        extend([start])

    found.sort(key=lambda w: (len(w), w))
    return [PeriodicOrbit(word=w) for w in found]


def _int_mat_mult(a, b):
    n = len(a)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(n):
            x = ai[t]
            if x:
                bt = b[t]
                for j in range(n):
                    oi[j] += x * bt[j]
    return out


def count_periodic_points(spec: SftSpec, n: int) -> int:
    """Exact number of points of (not necessarily least) period n: trace of A^n."""
    if n < 1:
        raise BadShape("period must be positive")
    result = None
    base = [list(row) for row in spec.transitions]
    e = n
    while e:
        if e & 1:
            result = base if result is None else _int_mat_mult(result, base)
        e >>= 1
        if e:
            base = _int_mat_mult(base, base)
    assert result is not None
    return sum(result[i][i] for i in range(spec.k))


def birkhoff_sum(cocycle, orbit: PeriodicOrbit):
    """Sum (or ordered product) of a cocycle around one period of an orbit.

    For rational cocycles this is the exact sum of window values.  For
    matrix cocycles it is the ordered product with the step at index n-1
    applied last, i.e. leftmost.
    """
    word = orbit.word
    n = len(word)
    spec = cocycle.sft
    if not spec.is_admissible(word, cyclic=True):
        raise InadmissibleWord(word)
    rf = cocycle.block_range
    reps = 1 + (rf + n - 1) // n if rf else 1
    ext = word * max(reps, 1)
    if getattr(cocycle, "is_matrix_valued", False):
        import numpy as np

        prod = np.eye(cocycle.dim)
        for i in range(n):
            prod = cocycle.window_value(ext[i : i + rf + 1]) @ prod
        return prod
    total = None
    for i in range(n):
        v = cocycle.window_value(ext[i : i + rf + 1])
        total = v if total is None else total + v
    return total
