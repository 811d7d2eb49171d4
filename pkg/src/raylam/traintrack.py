"""Substitution self-maps of a free-group basis on a rose.

A map sends each positive generator to a nonempty reduced word; the
image of an inverse generator is the inverse word.  Such a map is a
valid train-track representative (at a given depth) when iterating it
on generators never cancels at the crossed two-letter turns, which is
exactly what :func:`verify_train_track` checks.
"""

from __future__ import annotations

import hashlib
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import rays
from .words import Alphabet, Word, concat_reduced, free_reduce, invert


class CancellationDetected(ValueError):
    """Iterating the map cancels at a crossed turn, so it is not a
    train-track representative at the requested depth."""

    def __init__(self, turn: Tuple[int, int], witness_depth: int):
        self.turn = turn
        self.witness_depth = witness_depth
        super().__init__(f"turn {turn} cancels under iteration (depth {witness_depth})")


class SeedNotExpanding(ValueError):
    """image(seed) does not begin with seed, so iterates are not nested."""


class VerificationReport:
    def __init__(self, depth: int, turns_checked: int, closed: bool):
        self.depth = depth
        self.turns_checked = turns_checked
        # True when the turn set reached a fixed point before the depth
        # cap, which certifies every depth at once.
        self.closed = closed

    def __repr__(self):
        return (f"VerificationReport(depth={self.depth}, "
                f"turns_checked={self.turns_checked}, closed={self.closed})")


class TrainTrackMap:
    """Images of the positive generators, with iteration and verification.

    images maps generator number k (1-based) to a nonempty reduced Word.
    """

    def __init__(self, alphabet: Alphabet, images: Mapping[int, Sequence[int]],
                 primitive_flag: bool = False):
        self.alphabet = alphabet
        imgs: Dict[int, Word] = {}
        for k in range(1, alphabet.rank + 1):
            if k not in images:
                raise ValueError(f"missing image for generator {k}")
            w = Word(images[k])
            if len(w) == 0:
                raise ValueError(f"image of generator {k} is empty")
            alphabet.validate(w)
            imgs[k] = w
        self.images = imgs
        self.primitive_flag = primitive_flag
        self.verified_depth = 0
        self._turns_closed = False

    @classmethod
    def from_text(cls, alphabet: Alphabet, rules: Mapping[str, str], **kw) -> "TrainTrackMap":
        images = {alphabet._index[g]: alphabet.word(rhs) for g, rhs in rules.items()}
        return cls(alphabet, images, **kw)

    def image(self, letter: int) -> Word:
        """Image of a single letter; inverse letters map to inverse words."""
        if letter > 0:
            return self.images[letter]
        return invert(self.images[-letter])

    def apply_once(self, w: Iterable[int]) -> Word:
        out: list[int] = []
        for x in w:
            img = self.images[x] if x > 0 else invert(self.images[-x])
            for y in img:
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
        return tuple.__new__(Word, tuple(out))

    def apply(self, w: Sequence[int], n: int) -> Word:
        """n-fold application with free reduction, identity for n = 0."""
        if n < 0:
            raise ValueError("n must be >= 0")
        cur = w if isinstance(w, Word) else free_reduce(w)
        for _ in range(n):
            cur = self.apply_once(cur)
        return cur

    def transition_matrix(self) -> np.ndarray:
        """Unsigned generator-occurrence counts of the images (rank x rank);
        entry [i, j] counts occurrences of generator i+1 in image(j+1)."""
        r = self.alphabet.rank
        m = np.zeros((r, r), dtype=np.int64)
        for j in range(1, r + 1):
            for x in self.images[j]:
                m[abs(x) - 1, j - 1] += 1
        return m

    def is_primitive(self) -> bool:
        """Some power of the transition matrix up to rank**2 is positive."""
        r = self.alphabet.rank
        m = self.transition_matrix().astype(object)
        power = m.copy()
        for _ in range(r * r):
            if (power > 0).all():
                return True
            power = power @ m
        return (power > 0).all()

    def content_hash(self) -> str:
        """Stable hash of the alphabet and the image rules."""
        h = hashlib.sha256()
        h.update(" ".join(self.alphabet.names).encode())
        for k in range(1, self.alphabet.rank + 1):
            h.update(b"|")
            h.update(" ".join(map(str, self.images[k])).encode())
        return h.hexdigest()[:16]

    def __repr__(self):
        rules = ", ".join(
            f"{self.alphabet.names[k - 1]}->{self.alphabet.render(w)}"
            for k, w in self.images.items())
        return f"TrainTrackMap({rules})"


def verify_train_track(ttmap: TrainTrackMap, depth: int) -> VerificationReport:
    """Check the no-cancellation property on every two-letter turn arising
    in iterated generator images up to the given depth.

    A turn (x, y) is a reduced two-letter factor of some iterate f^k(e).
    The map is valid at this depth when image(x)*image(y) never cancels
    for any such turn.  The turn set usually closes (stops growing) after
    a few rounds; that certifies all depths, not just the one requested.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    turns = set()
    for letter in ttmap.alphabet.letters():
        img = ttmap.image(letter)
        for i in range(len(img) - 1):
            turns.add((img[i], img[i + 1]))

    checked = set()
    closed = False
    for level in range(1, depth + 1):
        new_turns = set()
        for turn in turns:
            if turn in checked:
                continue
            checked.add(turn)
            x, y = turn
            joined, cancelled = concat_reduced(ttmap.image(x), ttmap.image(y))
            if cancelled > 0:
                raise CancellationDetected(turn, level)
            # Turns of the next level crossed by this one: the interior
            # turns of both images plus the junction turn.
            imgx, imgy = ttmap.image(x), ttmap.image(y)
            for img in (imgx, imgy):
                for i in range(len(img) - 1):
                    new_turns.add((img[i], img[i + 1]))
            new_turns.add((imgx[-1], imgy[0]))
        if new_turns <= turns:
            closed = True
            break
        turns |= new_turns

    ttmap.verified_depth = max(ttmap.verified_depth, depth)
    ttmap._turns_closed = closed
    return VerificationReport(depth, len(checked), closed)


class FixedRayScheme:
    """Seed generator g with image(g) starting with g, so the iterated
    images are nested prefixes of one infinite word."""

    def __init__(self, ttmap: TrainTrackMap, seed: int):
        if seed <= 0 or seed > ttmap.alphabet.rank:
            raise ValueError(f"seed must be a positive generator, got {seed}")
        img = ttmap.images[seed]
        if img[0] != seed:
            name = ttmap.alphabet.names[seed - 1]
            raise SeedNotExpanding(
                f"image of {name} is {ttmap.alphabet.render(img)}, "
                f"which does not start with {name}")
        if len(img) == 1:
            raise SeedNotExpanding("image of seed is the seed itself; ray would be finite")
        self.map = ttmap
        self.seed = seed
        self._current = Word((seed,))
        self._depth = 0

    def prefix(self, length: int) -> Word:
        """The first `length` letters of the fixed infinite word."""
        guard = 0
        while len(self._current) < length:
            nxt = self.map.apply_once(self._current)
            if len(nxt) <= len(self._current):
                raise SeedNotExpanding("iterates stopped growing")
            # Nesting check is cheap insurance against a bad map.
            if nxt[:len(self._current)] != self._current:
                raise SeedNotExpanding("iterates are not nested prefixes")
            self._current = nxt
            self._depth += 1
            guard += 1
            if guard > 10_000:
                raise RuntimeError("runaway iteration")
        return self._current[:length]

    def provenance(self) -> dict:
        return {
            "kind": "fixed",
            "map_hash": self.map.content_hash(),
            "seed": self.map.alphabet.names[self.seed - 1],
        }


def fixed_ray(scheme: FixedRayScheme) -> "rays.RayStream":
    """The lazily extendable infinite word fixed by the substitution."""
    return rays.RayStream(scheme, provenance=scheme.provenance())


def parse_map_text(text: str) -> TrainTrackMap:
    """Map definition text: alphabet, one image rule per line, optional flags.

        alphabet: a b c
        a -> a b
        b -> a c
        c -> a
        primitive
        verify_depth = 6
    """
    alphabet = None
    rules = {}
    primitive = False
    verify_depth = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("alphabet:"):
            alphabet = Alphabet(line[len("alphabet:"):].split())
        elif line == "primitive":
            primitive = True
        elif line.replace(" ", "").startswith("verify_depth="):
            verify_depth = int(line.split("=", 1)[1])
        elif "->" in line:
            if alphabet is None:
                raise ValueError("map file must declare the alphabet before rules")
            lhs, rhs = (part.strip() for part in line.split("->", 1))
            if lhs not in alphabet._index:
                raise ValueError(f"rule for unknown generator {lhs!r}")
            if lhs in rules:
                raise ValueError(f"duplicate rule for generator {lhs!r}")
            rules[lhs] = rhs
        else:
            raise ValueError(f"cannot parse map file line {raw!r}")
    if alphabet is None:
        raise ValueError("map file has no alphabet line")
    ttmap = TrainTrackMap.from_text(alphabet, rules, primitive_flag=primitive)
    if primitive and not ttmap.is_primitive():
        raise ValueError("map is flagged primitive but its transition matrix is not")
    if verify_depth is not None:
        verify_train_track(ttmap, verify_depth)
    return ttmap


def load_map_file(path) -> TrainTrackMap:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_map_text(fh.read())
