"""Finite Cayley-graph balls for finitely presented groups.

Elements inside a ball are identified by a bounded Todd-Coxeter style
enumeration: breadth-first growth out to the radius, alternating with
relator tracing that either deduces missing edges or merges vertices
(coincidences, processed through a union-find).  Identities whose proofs
need to leave the ball stay unresolved, in which case the ball is
flagged unconfirmed rather than silently accepted.
"""

from __future__ import annotations

import itertools
import random
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .words import Alphabet, Word, invert


class BudgetExceeded(RuntimeError):
    """Vertex or rewriting budget hit; the radius is too large for desk scale."""


class BeyondBall(ValueError):
    """A distance or trace query left the materialized ball."""


class Presentation:
    def __init__(self, alphabet: Alphabet, relators: Sequence[Word]):
        self.alphabet = alphabet
        rels = []
        for r in relators:
            w = Word(r)
            if len(w) == 0:
                raise ValueError("relators must be nonempty")
            if w[0] == -w[-1]:
                raise ValueError(f"relator {tuple(w)} is not cyclically reduced")
            alphabet.validate(w)
            rels.append(w)
        self.relators = tuple(rels)

    def __repr__(self):
        rels = "; ".join(self.alphabet.render(r) for r in self.relators)
        return f"Presentation({list(self.alphabet.names)}, [{rels}])"


class _Table:
    """Partial coset table with union-find coincidence handling."""

    def __init__(self, rank: int):
        self.rank = rank
        self.edges: List[Dict[int, int]] = [{}]   # vertex -> {letter: vertex}
        self.parent: List[int] = [0]

    def new_vertex(self) -> int:
        self.edges.append({})
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, v: int) -> int:
        while self.parent[v] != v:
            self.parent[v] = self.parent[self.parent[v]]
            v = self.parent[v]
        return v

    def step(self, v: int, letter: int) -> Optional[int]:
        v = self.find(v)
        nxt = self.edges[v].get(letter)
        return None if nxt is None else self.find(nxt)

    def set_edge(self, v: int, letter: int, w: int, queue: List[Tuple[int, int]]) -> None:
        v, w = self.find(v), self.find(w)
        cur = self.step(v, letter)
        if cur is None:
            self.edges[v][letter] = w
            back = self.step(w, -letter)
            if back is None:
                self.edges[w][-letter] = v
            elif back != v:
                queue.append((back, v))
        elif cur != w:
            queue.append((cur, w))

    def merge_all(self, queue: List[Tuple[int, int]]) -> None:
        while queue:
            a, b = queue.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if a > b:
                a, b = b, a
            self.parent[b] = a
            for letter, target in list(self.edges[b].items()):
                self.set_edge(a, letter, target, queue)
            self.edges[b] = {}


def build_ball(presentation: Presentation, radius: int,
               vertex_budget: int = 500_000, round_budget: int = 64) -> "CayleyBall":
    """Breadth-first ball with relator-closure identification.

    Raises BudgetExceeded when vertex creation or the deduction rounds
    exceed their budgets before the table stops changing.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    alphabet = presentation.alphabet
    letters = list(alphabet.letters())
    table = _Table(alphabet.rank)
    relator_paths = []
    for rel in presentation.relators:
        relator_paths.append(tuple(rel))
        relator_paths.append(tuple(invert(rel)))

    def distances() -> Dict[int, int]:
        dist = {0: 0}
        frontier = [0]
        while frontier:
            nxt = []
            for v in frontier:
                for letter in letters:
                    w = table.step(v, letter)
                    if w is not None and w not in dist:
                        dist[w] = dist[v] + 1
                        nxt.append(w)
            frontier = nxt
        return dist

    changed = True
    rounds = 0
    while changed:
        rounds += 1
        if rounds > round_budget:
            raise BudgetExceeded(f"no closure after {round_budget} rounds")
        changed = False

        # Grow: every vertex within the radius gets all its edges.
        queue: List[Tuple[int, int]] = []
        dist = distances()
        for v in sorted(dist):
            if table.find(v) != v or dist[v] >= radius:
                continue
            for letter in letters:
                if table.step(v, letter) is None:
                    w = table.new_vertex()
                    if len(table.parent) > vertex_budget:
                        raise BudgetExceeded(f"vertex budget {vertex_budget} exceeded")
                    table.set_edge(v, letter, w, queue)
                    changed = True
        table.merge_all(queue)

        # Close: trace every relator from every vertex; a trace with a
        # single gap deduces that edge, a closed trace ending elsewhere
        # merges the endpoints.
        dist = distances()
        for v in list(dist):
            if table.find(v) != v:
                continue
            for path in relator_paths:
                length = len(path)
                cur = v
                forward = [v]
                for letter in path:
                    nxt = table.step(cur, letter)
                    if nxt is None:
                        break
                    cur = nxt
                    forward.append(cur)
                f = len(forward) - 1
                if f == length:
                    if forward[-1] != v:
                        table.merge_all([(forward[-1], v)])
                        changed = True
                    continue
                # Trace backwards from v along the inverse relator;
                # backward[j] sits at relator position length - j.
                cur = v
                backward = [v]
                for letter in reversed(path):
                    nxt = table.step(cur, -letter)
                    if nxt is None:
                        break
                    cur = nxt
                    backward.append(cur)
                b = len(backward) - 1
                if f + b >= length:
                    # Traces meet or overlap: position f is seen by both.
                    x, y = forward[f], backward[length - f]
                    if x != y:
                        table.merge_all([(x, y)])
                        changed = True
                elif f + b == length - 1:
                    gap_letter = path[f]
                    q: List[Tuple[int, int]] = []
                    table.set_edge(forward[-1], gap_letter, backward[-1], q)
                    table.merge_all(q)
                    changed = True

    dist = distances()
    keep = sorted(v for v, d in dist.items() if d <= radius and table.find(v) == v)
    index = {v: i for i, v in enumerate(keep)}
    n = len(keep)
    edge_table = np.full((n, len(letters)), -1, dtype=np.int64)
    for v in keep:
        for li, letter in enumerate(letters):
            w = table.step(v, letter)
            if w is not None and w in index:
                edge_table[index[v], li] = index[w]
    dvec = np.array([dist[v] for v in keep], dtype=np.int64)
    return CayleyBall(presentation, radius, edge_table, dvec)


class CayleyBall:
    """Vertices within the radius, generator-labeled adjacency, and the
    distance table from the identity.  Immutable after build."""

    def __init__(self, presentation: Presentation, radius: int,
                 edge_table: np.ndarray, dist_from_identity: np.ndarray):
        self.presentation = presentation
        self.radius = radius
        self.edges = edge_table
        self.dist_from_identity = dist_from_identity
        self._letters = list(presentation.alphabet.letters())
        self._letter_index = {letter: i for i, letter in enumerate(self._letters)}
        self._pair_dist: Optional[np.ndarray] = None

    @property
    def n_vertices(self) -> int:
        return len(self.dist_from_identity)

    def step(self, vertex: int, letter: int) -> int:
        nxt = self.edges[vertex, self._letter_index[letter]]
        if nxt < 0:
            raise BeyondBall(f"edge {letter} from vertex {vertex} leaves the ball")
        return int(nxt)

    def trace(self, w: Sequence[int], start: int = 0) -> int:
        v = start
        for letter in w:
            v = self.step(v, letter)
        return v

    def distance_matrix(self) -> np.ndarray:
        """All-pairs distances inside the ball graph (computed once)."""
        if self._pair_dist is None:
            n = self.n_vertices
            dist = np.full((n, n), -1, dtype=np.int64)
            neighbors = [self.edges[v][self.edges[v] >= 0] for v in range(n)]
            for src in range(n):
                dist[src, src] = 0
                frontier = [src]
                d = 0
                while frontier:
                    d += 1
                    nxt = []
                    for v in frontier:
                        for w in neighbors[v]:
                            if dist[src, w] < 0:
                                dist[src, w] = d
                                nxt.append(int(w))
                    frontier = nxt
            self._pair_dist = dist
        return self._pair_dist

    def geodesic(self, u: int, v: int) -> List[int]:
        """Canonical geodesic: repeatedly take the first generator (in
        alphabet order) that decreases the distance to the target."""
        dist = self.distance_matrix()
        if dist[u, v] < 0:
            raise BeyondBall(f"vertices {u} and {v} are not connected in the ball")
        path = [u]
        cur = u
        while cur != v:
            for li in range(len(self._letters)):
                nxt = self.edges[cur, li]
                if nxt >= 0 and dist[nxt, v] == dist[cur, v] - 1:
                    cur = int(nxt)
                    break
            else:
                raise BeyondBall("no distance-decreasing edge inside the ball")
            path.append(cur)
        return path


def estimate_delta(ball: CayleyBall, triple_budget: int = 200_000,
                   seed: Optional[int] = None) -> int:
    """Thin-triangle constant over canonical geodesic triangles.

    Exhaustive over all vertex triples when their number fits the budget,
    otherwise a seeded sample.  For each triangle this measures the least
    e such that each side lies in the e-neighborhood of the other two;
    the maximum is a lower bound for the delta of the group.
    """
    n = ball.n_vertices
    dist = ball.distance_matrix()
    total = n * (n - 1) * (n - 2) // 6
    if total <= triple_budget:
        triples = itertools.combinations(range(n), 3)
    else:
        rng = random.Random(0 if seed is None else seed)
        triples = (tuple(sorted(rng.sample(range(n), 3)))
                   for _ in range(triple_budget))

    geodesic_cache: Dict[Tuple[int, int], np.ndarray] = {}

    def side(u, v):
        key = (u, v) if u <= v else (v, u)
        path = geodesic_cache.get(key)
        if path is None:
            path = np.array(ball.geodesic(*key), dtype=np.int64)
            geodesic_cache[key] = path
        return path

    best = 0
    for a, b, c in triples:
        sides = (side(a, b), side(b, c), side(a, c))
        for i in range(3):
            others = np.concatenate([sides[(i + 1) % 3], sides[(i + 2) % 3]])
            e = int(dist[np.ix_(sides[i], others)].min(axis=1).max())
            if e > best:
                best = e
    return best


def is_local_geodesic(backend: Optional[CayleyBall], w: Word, r: int) -> bool:
    """True when every length-r subword of w is a geodesic word.

    With backend None (free group) reduced words are geodesics, so any
    Word passes.  With a ball backend each window is traced from the
    identity and its endpoint distance compared to the window length.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    w = Word(w)
    if backend is None:
        return True
    k = min(r, len(w))
    if k == 0:
        return True
    for i in range(len(w) - k + 1):
        window = w[i:i + k]
        end = backend.trace(window)
        if backend.dist_from_identity[end] != k:
            return False
    return True


def parse_presentation(text: str) -> Presentation:
    """Presentation file: an alphabet line then one relator per line.

        alphabet: a b
        a b a^-1 b^-1
    """
    alphabet = None
    relators = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet:"):
            alphabet = Alphabet(line[len("alphabet:"):].split())
            continue
        if alphabet is None:
            raise ValueError("presentation file must declare the alphabet first")
        relators.append(alphabet.word(line))
    if alphabet is None:
        raise ValueError("presentation file has no alphabet line")
    return Presentation(alphabet, relators)
