"""The leaf factor language of a substitution lamination.

Members are the finite factors of the iterated generator images f^n(e)
of one or two train-track maps, closed under inversion.  Membership up
to a fixed horizon is answered by a generalized suffix automaton over
the iterate corpus, so a query costs one transition per letter.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple, Union

from .traintrack import TrainTrackMap, verify_train_track
from .words import Word, invert, is_cyclically_reduced
from .rays import NotCyclicallyReduced


class BeyondHorizon(ValueError):
    """Query word longer than the materialized horizon."""


class TooShort(ValueError):
    """Segment too short to have a nonempty trimmed core."""


class HorizonTooLarge(RuntimeError):
    """Estimated member count exceeds the configured memory budget."""


class NotStabilized(RuntimeError):
    """Factor sets kept growing up to the generation depth cap."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"factor sets not stabilized by depth {cap}")


@dataclass(frozen=True)
class HyperbolicityParams:
    """delta, the local-geodesic scale r and the fellow-traveling bound D.

    r and D default to the textbook local-geodesic constants 8*delta + 1
    and 2*delta.
    """

    delta: int
    r: int = field(default=0)
    D: int = field(default=0)

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError("delta must be >= 1")
        if self.r == 0:
            object.__setattr__(self, "r", 8 * self.delta + 1)
        if self.D == 0:
            object.__setattr__(self, "D", 2 * self.delta)
        if self.r < 1:
            raise ValueError("r must be >= 1")


class _SuffixAutomaton:
    """Generalized suffix automaton over several strings.

    States are kept in parallel lists.  Paths from the root are exactly
    the distinct factors of the inserted strings, which gives O(|w|)
    membership, factor enumeration by DFS, and distinct-factor counts
    per length from the (link-length, length] intervals of the states.
    """

    def __init__(self):
        self.lens: List[int] = [0]
        self.links: List[int] = [-1]
        self.nexts: List[Dict[str, int]] = [{}]

    def _new_state(self, length: int, link: int, transitions: Dict[str, int]) -> int:
        self.lens.append(length)
        self.links.append(link)
        self.nexts.append(transitions)
        return len(self.lens) - 1

    def _extend(self, last: int, ch: str) -> int:
        lens, links, nexts = self.lens, self.links, self.nexts
        if ch in nexts[last]:
            q = nexts[last][ch]
            if lens[q] == lens[last] + 1:
                return q
            clone = self._new_state(lens[last] + 1, links[q], dict(nexts[q]))
            p = last
            while p != -1 and nexts[p].get(ch) == q:
                nexts[p][ch] = clone
                p = links[p]
            links[q] = clone
            return clone
        cur = self._new_state(lens[last] + 1, -1, {})
        p = last
        while p != -1 and ch not in nexts[p]:
            nexts[p][ch] = cur
            p = links[p]
        if p == -1:
            links[cur] = 0
        else:
            q = nexts[p][ch]
            if lens[p] + 1 == lens[q]:
                links[cur] = q
            else:
                clone = self._new_state(lens[p] + 1, links[q], dict(nexts[q]))
                while p != -1 and nexts[p].get(ch) == q:
                    nexts[p][ch] = clone
                    p = links[p]
                links[q] = clone
                links[cur] = clone
        return cur

    def add_string(self, s: str) -> None:
        last = 0
        for ch in s:
            last = self._extend(last, ch)

    def __len__(self):
        return len(self.lens)

    def has(self, s: str) -> bool:
        v = 0
        nexts = self.nexts
        for ch in s:
            nxt = nexts[v].get(ch)
            if nxt is None:
                return False
            v = nxt
        return True

    def counts_by_length(self, max_len: int) -> List[int]:
        """counts[k] = number of distinct factors of length k, k <= max_len."""
        diff = [0] * (max_len + 2)
        lens, links = self.lens, self.links
        for v in range(1, len(lens)):
            lo = lens[links[v]] + 1
            if lo > max_len:
                continue
            hi = min(lens[v], max_len)
            diff[lo] += 1
            diff[hi + 1] -= 1
        counts = [0] * (max_len + 1)
        running = 0
        for k in range(1, max_len + 1):
            running += diff[k]
            counts[k] = running
        return counts

    def iter_factors(self, length: int) -> Iterator[str]:
        """All distinct factors of exactly this length, in sorted order."""
        if length == 0:
            yield ""
            return
        stack = [(0, "")]
        while stack:
            state, prefix = stack.pop()
            if len(prefix) == length:
                yield prefix
                continue
            for ch in sorted(self.nexts[state], reverse=True):
                stack.append((self.nexts[state][ch], prefix + ch))


Sources = Union[TrainTrackMap, Sequence[TrainTrackMap]]


def _as_sources(sources: Sources) -> Tuple[TrainTrackMap, ...]:
    if isinstance(sources, TrainTrackMap):
        return (sources,)
    out = tuple(sources)
    if not 1 <= len(out) <= 2:
        raise ValueError("need one or two source maps")
    if len(out) == 2 and out[0].alphabet != out[1].alphabet:
        raise ValueError("source maps must share an alphabet")
    return out


class LeafLanguage:
    """Factor-closed, inversion-closed language of leaf segments.

    Immutable after build; all queries are thread-safe reads.
    """

    def __init__(self, sources: Tuple[TrainTrackMap, ...], horizon: int,
                 generation_depth: int, stabilization_window: int,
                 sam: _SuffixAutomaton, counts: List[int]):
        self.sources = sources
        self.alphabet = sources[0].alphabet
        self.horizon = horizon
        self.generation_depth = generation_depth
        self.stabilization_window = stabilization_window
        self._sam = sam
        self._counts = counts
        self._rank = self.alphabet.rank

    # Letters are encoded as characters so the automaton works on str.
    def _encode(self, letters: Iterable[int]) -> str:
        r = self._rank
        return "".join(chr(0x40 + x + r) for x in letters)

    def _decode(self, s: str) -> Word:
        r = self._rank
        return tuple.__new__(Word, tuple(ord(ch) - 0x40 - r for ch in s))

    def language_hash(self) -> str:
        h = hashlib.sha256()
        for src in self.sources:
            h.update(src.content_hash().encode())
        h.update(f"|h={self.horizon}|g={self.generation_depth}".encode())
        return h.hexdigest()[:16]

    def is_leaf_factor(self, w: Word) -> bool:
        """Exact membership for words up to the horizon."""
        if len(w) > self.horizon:
            raise BeyondHorizon(f"|w| = {len(w)} exceeds horizon {self.horizon}")
        if len(w) == 0:
            return True
        return self._sam.has(self._encode(w)) or self._sam.has(self._encode(invert(w)))

    def enumerate_members(self, length: int) -> set:
        if length > self.horizon:
            raise BeyondHorizon(f"length {length} exceeds horizon {self.horizon}")
        if length == 0:
            return {Word()}
        out = set()
        for s in self._sam.iter_factors(length):
            w = self._decode(s)
            out.add(w)
            out.add(invert(w))
        return out

    def member_count(self, length: int) -> int:
        """Size of the member set of one length (inversion closure included)."""
        return len(self.enumerate_members(length))

    def is_coarse_leaf_segment(self, params: HyperbolicityParams, w: Word) -> bool:
        """Tree-model coarse leaf test: the 2*delta-trimmed core of w must
        be a member."""
        trim = 2 * params.delta
        if len(w) <= 2 * trim:
            raise TooShort(f"|w| = {len(w)} <= 4*delta = {2 * trim}")
        return self.is_leaf_factor(w[trim:len(w) - trim])

    def max_leaf_overlap(self, params: HyperbolicityParams, periodic_word: Word,
                         search_bound: int) -> int:
        """Largest L <= search_bound such that some length-L factor of the
        bi-infinite periodic word, trimmed by delta + D per side, is a member.

        Empirical stand-in for the poison-power bound of the period; every
        block certificate still re-checks its own word directly.
        """
        if search_bound > self.horizon:
            raise BeyondHorizon(f"search bound {search_bound} exceeds horizon {self.horizon}")
        w = Word(periodic_word)
        if len(w) == 0 or not is_cyclically_reduced(w):
            raise NotCyclicallyReduced(f"period {tuple(w)} is not cyclically reduced")
        trim = params.delta + params.D
        p = len(w)

        def some_window_is_member(k: int) -> bool:
            if k == 0:
                return True
            reps = -(-k // p) + 1
            rep = tuple(w) * reps
            for off in range(p):
                cand = tuple.__new__(Word, rep[off:off + k])
                if self.is_leaf_factor(cand):
                    return True
            return False

        lo, hi = 0, max(0, search_bound - 2 * trim)
        # some_window_is_member is monotone decreasing in k (factor closure).
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if some_window_is_member(mid):
                lo = mid
            else:
                hi = mid - 1
        return min(lo + 2 * trim, search_bound)

    def counts_summary(self, up_to: int = None) -> List[int]:
        """Member counts per length (index = length), for reports."""
        cap = self.horizon if up_to is None else min(up_to, self.horizon)
        return [self.member_count(k) for k in range(cap + 1)]

    def __repr__(self):
        return (f"LeafLanguage(sources={len(self.sources)}, horizon={self.horizon}, "
                f"generation_depth={self.generation_depth}, states={len(self._sam)})")


def _ensure_verified(src: TrainTrackMap, depth: int) -> None:
    if src._turns_closed or src.verified_depth >= depth:
        return
    verify_train_track(src, depth)


def build_language(sources: Sources, horizon: int, stabilization_window: int = 2,
                   depth_cap: int = 48, member_budget: int = 5_000_000,
                   corpus_budget: int = 4_000_000,
                   min_generation_depth: int = 0) -> LeafLanguage:
    """Materialize the leaf language saturated at the horizon.

    Iterates of every positive generator are inserted depth by depth; the
    generation depth is the least n at which the per-length factor counts
    (lengths <= horizon) agree with those at n + stabilization_window.
    Setting min_generation_depth forces at least that depth (used to
    re-check saturation empirically).
    """
    srcs = _as_sources(sources)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if stabilization_window < 1:
        raise ValueError("stabilization window must be >= 1")

    alphabet = srcs[0].alphabet
    rank = alphabet.rank

    def encode(letters):
        return "".join(chr(0x40 + x + rank) for x in letters)

    sam = _SuffixAutomaton()
    current: List[Dict[int, Word]] = [
        {g: Word((g,)) for g in range(1, rank + 1)} for _ in srcs]
    history: List[List[int]] = [sam.counts_by_length(horizon)]  # depth 0
    corpus_letters = 0
    generation_depth = None

    for depth in range(1, depth_cap + stabilization_window + 1):
        for si, src in enumerate(srcs):
            _ensure_verified(src, depth)
            for g in range(1, rank + 1):
                nxt = src.apply_once(current[si][g])
                current[si][g] = nxt
                corpus_letters += len(nxt)
                sam.add_string(encode(nxt))
        if corpus_letters > corpus_budget:
            raise HorizonTooLarge(
                f"iterate corpus reached {corpus_letters} letters at depth {depth}")
        counts = sam.counts_by_length(horizon)
        if 2 * sum(counts) > member_budget:
            raise HorizonTooLarge(
                f"about {2 * sum(counts)} members at depth {depth} exceeds budget")
        history.append(counts)
        base = depth - stabilization_window
        if base >= max(1, min_generation_depth) and history[base] == counts:
            generation_depth = base
            break

    if generation_depth is None:
        raise NotStabilized(depth_cap)

    return LeafLanguage(srcs, horizon, generation_depth, stabilization_window,
                        sam, history[generation_depth])


# Thin functional surface over the methods.

def is_leaf_factor(lang: LeafLanguage, w: Word) -> bool:
    return lang.is_leaf_factor(w)


def is_coarse_leaf_segment(lang: LeafLanguage, params: HyperbolicityParams, w: Word) -> bool:
    return lang.is_coarse_leaf_segment(params, w)


def enumerate_members(lang: LeafLanguage, length: int) -> set:
    return lang.enumerate_members(length)


def max_leaf_overlap(lang: LeafLanguage, params: HyperbolicityParams,
                     periodic_word: Word, search_bound: int) -> int:
    return lang.max_leaf_overlap(params, periodic_word, search_bound)
