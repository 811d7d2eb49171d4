"""Freely reduced words over a symmetric generating alphabet.

Letters are nonzero integers: generator number k (1-based) is +k, its
formal inverse is -k.  The involution is plain negation, so the hot
paths (reduction, inversion, hashing) never touch the name table.
Generator names matter only when parsing or rendering text.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence, Tuple


class UnknownLetter(ValueError):
    """A symbol outside the alphabet was used."""


class NotReduced(ValueError):
    """A letter sequence claimed to be reduced is not."""


class Word(tuple):
    """An immutable freely reduced word (tuple of nonzero ints).

    Construction checks reducedness; use :func:`reduce_word` to build a
    Word from an arbitrary letter sequence.  The empty word is the
    identity.
    """

    __slots__ = ()

    def __new__(cls, letters: Iterable[int] = ()):
        w = super().__new__(cls, letters)
        prev = 0
        for x in w:
            if not isinstance(x, int) or x == 0:
                raise UnknownLetter(f"invalid letter {x!r}")
            if x == -prev:
                raise NotReduced(f"letters {prev} {x} cancel")
            prev = x
        return w

    def __repr__(self):
        return f"Word({tuple(self)})"

    def __invert__(self) -> "Word":
        return tuple.__new__(Word, tuple(-x for x in reversed(self)))

    def __mul__(self, other) -> "Word":  # type: ignore[override]
        return concat_reduced(self, other)[0]

    def __getitem__(self, item):
        # Any contiguous slice of a reduced word is reduced.
        if isinstance(item, slice) and item.step in (None, 1):
            return tuple.__new__(Word, tuple.__getitem__(self, item))
        return tuple.__getitem__(self, item)


EMPTY = Word()


def free_reduce(letters: Sequence[int]) -> Word:
    """Freely reduce an arbitrary sequence of nonzero integer letters."""
    out: list[int] = []
    for x in letters:
        if not isinstance(x, int) or x == 0:
            raise UnknownLetter(f"invalid letter {x!r}")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple.__new__(Word, tuple(out))


def invert(w: Word) -> Word:
    """The group inverse: reversed word with each letter negated."""
    return tuple.__new__(Word, tuple(-x for x in reversed(w)))


def concat_reduced(u: Word, v: Word) -> Tuple[Word, int]:
    """Reduced product u*v and the number of letters cancelled at the junction."""
    i = len(u)
    j = 0
    n = len(v)
    while i > 0 and j < n and u[i - 1] == -v[j]:
        i -= 1
        j += 1
    return tuple.__new__(Word, tuple.__getitem__(u, slice(0, i)) + tuple.__getitem__(v, slice(j, n))), j


def factors(w: Word, length: int):
    """All contiguous subwords of w of the given length, as a set."""
    if length < 0:
        raise ValueError("length must be >= 0")
    if length == 0:
        return {EMPTY}
    return {w[i:i + length] for i in range(len(w) - length + 1)}


def is_cyclically_reduced(w: Word) -> bool:
    return len(w) == 0 or w[0] != -w[-1]


class Alphabet:
    """Ordered generator names with the formal-inverse pairing.

    Maps between human-readable text and integer letters.  Inverses
    render as ``name^-1``; the parser also accepts the Unicode
    superscript form ``name⁻¹``.  Words with multi-character generator
    names must be space-separated; single-character alphabets may also
    be written juxtaposed (``aba⁻¹``).
    """

    __slots__ = ("names", "_index")

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if not names:
            raise ValueError("alphabet needs at least one generator")
        seen = set()
        for name in names:
            if not name or any(c.isspace() for c in name) or "^" in name or "⁻" in name:
                raise ValueError(f"bad generator name {name!r}")
            if name in seen:
                raise ValueError(f"duplicate generator {name!r}")
            seen.add(name)
        self.names = names
        self._index = {name: k + 1 for k, name in enumerate(names)}

    @property
    def rank(self) -> int:
        return len(self.names)

    def letters(self) -> Iterator[int]:
        """All 2*rank letters, positive generators first."""
        r = self.rank
        yield from range(1, r + 1)
        yield from range(-1, -r - 1, -1)

    def validate(self, letters: Iterable[int]) -> None:
        r = self.rank
        for x in letters:
            if not isinstance(x, int) or x == 0 or abs(x) > r:
                raise UnknownLetter(f"letter {x!r} not in alphabet of rank {r}")

    def reduce(self, raw) -> Word:
        """Freely reduce raw input, either text or an integer sequence."""
        if isinstance(raw, str):
            return free_reduce(self._tokens(raw))
        letters = list(raw)
        self.validate(letters)
        return free_reduce(letters)

    def word(self, text: str) -> Word:
        """Parse text that must already be freely reduced."""
        return Word(self._tokens(text))

    def _tokens(self, text: str) -> list[int]:
        text = text.strip()
        if not text:
            return []
        if any(c.isspace() for c in text):
            chunks = text.split()
        elif all(len(n) == 1 for n in self.names):
            chunks = self._split_juxtaposed(text)
        else:
            chunks = [text]
        out = []
        for chunk in chunks:
            inverse = False
            if chunk.endswith("^-1"):
                chunk, inverse = chunk[:-3], True
            elif chunk.endswith("⁻¹"):
                chunk, inverse = chunk[:-2], True
            k = self._index.get(chunk)
            if k is None:
                raise UnknownLetter(f"unknown generator {chunk!r}")
            out.append(-k if inverse else k)
        return out

    def _split_juxtaposed(self, text: str) -> list[str]:
        chunks = []
        i = 0
        while i < len(text):
            name = text[i]
            i += 1
            if text.startswith("^-1", i):
                chunks.append(name + "^-1")
                i += 3
            elif text.startswith("⁻¹", i):
                chunks.append(name + "⁻¹")
                i += 2
            else:
                chunks.append(name)
        return chunks

    def render(self, w: Iterable[int], sep: str = " ") -> str:
        parts = []
        for x in w:
            if x > 0:
                parts.append(self.names[x - 1])
            else:
                parts.append(self.names[-x - 1] + "^-1")
        return sep.join(parts)

    def __repr__(self):
        return f"Alphabet({list(self.names)!r})"

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self):
        return hash(self.names)
