"""Bounded-depth boundary-point classifiers.

Each classifier examines a finite prefix of a ray against a leaf
language and returns a Verdict: either a replayable certificate
(conicality) or depth-stamped evidence.  Evidence verdicts that rely on
positive leaf membership carry a caveat flag, because the materialized
language under-approximates the full lamination (diagonal leaves are
not computed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .leaflang import BeyondHorizon, HyperbolicityParams, LeafLanguage
from .rays import RayStream, extend
from .words import Word

CONICAL_CERTIFIED = "ConicalCertified"
NON_CONICAL_EVIDENCE = "NonConicalEvidence"
INJECTIVE_EVIDENCE = "InjectiveEvidence"
NON_INJECTIVE_EVIDENCE = "NonInjectiveEvidence"
RECURRENT_EVIDENCE = "RecurrentEvidence"
NOT_RECURRENT_EVIDENCE = "NotRecurrentEvidence"
UNKNOWN = "Unknown"


class DepthTooSmall(ValueError):
    """Prefix too short for the requested classification."""


class DepthMismatch(ValueError):
    """Verdicts to be cross-checked were computed at different depths."""


@dataclass
class ConicalCertificate:
    """Witness for conicality: a long segment whose truncation leaves the
    leaf language yet whose aligned core recurs along the ray into the tail."""

    tau: Word
    tau_truncated: Word
    core: Word
    occurrences: List[int]
    depth: int
    delta: int
    min_occurrences: int
    language_hash: str
    horizon: int

    def replay(self, ray: RayStream, language: LeafLanguage,
               params: HyperbolicityParams) -> bool:
        """Re-verify every claim of the certificate at its recorded depth."""
        delta = params.delta
        if delta != self.delta or language.language_hash() != self.language_hash:
            return False
        if len(self.tau) < 100 * delta:
            return False
        c = 20 * delta
        if self.tau_truncated != self.tau[c:len(self.tau) - c]:
            return False
        if language.is_coarse_leaf_segment(params, self.tau_truncated):
            return False
        t = 6 * delta
        if self.core != self.tau[t:len(self.tau) - t]:
            return False
        prefix = extend(ray, self.depth)
        if len(self.occurrences) < self.min_occurrences:
            return False
        last = -1
        for pos in self.occurrences:
            if pos <= last:
                return False
            if prefix[pos:pos + len(self.core)] != self.core:
                return False
            last = pos
        return last >= self.depth - self.depth // 4 - len(self.core)

    def to_doc(self, alphabet) -> dict:
        return {
            "tau": alphabet.render(self.tau),
            "tau_truncated": alphabet.render(self.tau_truncated),
            "core": alphabet.render(self.core),
            "occurrences": list(self.occurrences),
            "depth": self.depth,
            "delta": self.delta,
            "min_occurrences": self.min_occurrences,
            "language_hash": self.language_hash,
            "horizon": self.horizon,
        }


@dataclass
class Verdict:
    kind: str
    depth: int
    payload: dict = field(default_factory=dict)
    certificate: Optional[ConicalCertificate] = None
    language_hash: Optional[str] = None
    caveat_underapproximation: bool = False
    proxy_recurrence: bool = False

    def to_doc(self, alphabet=None) -> dict:
        doc = {
            "kind": self.kind,
            "depth": self.depth,
            "payload": self.payload,
            "language_hash": self.language_hash,
            "caveat_underapproximation": self.caveat_underapproximation,
            "proxy_recurrence": self.proxy_recurrence,
        }
        if self.certificate is not None:
            doc["certificate"] = self.certificate.to_doc(alphabet)
        return doc


def _occurrence_positions(haystack: str, needle: str) -> List[int]:
    out = []
    pos = haystack.find(needle)
    while pos != -1:
        out.append(pos)
        pos = haystack.find(needle, pos + 1)
    return out


def _encode(letters, rank: int) -> str:
    return "".join(chr(0x40 + x + rank) for x in letters)


def classify_conical(ray: RayStream, language: LeafLanguage,
                     params: HyperbolicityParams, depth: int,
                     min_occurrences: int = 5,
                     candidate_budget: Optional[int] = None) -> Verdict:
    """Search for a conicality certificate in the length-`depth` prefix.

    Candidates are the length-100*delta windows whose 20*delta-truncation
    fails the coarse-leaf test.  A candidate certifies when its 6*delta-
    trimmed core occurs at >= min_occurrences non-overlapping positions
    (stride at least |tau|) with the last one in the final quarter.
    """
    delta = params.delta
    tau_len = 100 * delta
    if language.horizon < tau_len:
        raise BeyondHorizon(f"horizon {language.horizon} < 100*delta = {tau_len}")
    if depth < tau_len:
        raise DepthTooSmall(f"depth {depth} < 100*delta = {tau_len}")

    prefix = extend(ray, depth)
    rank = language.alphabet.rank
    enc = _encode(prefix, rank)
    trunc = 20 * delta
    trim = 6 * delta
    core_len = tau_len - 2 * trim
    tail_start = depth - depth // 4

    candidates = 0
    last_candidate_pos = None
    best_count = 0
    examined = 0
    for s in range(depth - tau_len + 1):
        if candidate_budget is not None and examined >= candidate_budget:
            return Verdict(UNKNOWN, depth,
                           payload={"reason": "candidate budget exhausted",
                                    "examined": examined},
                           language_hash=language.language_hash())
        examined += 1
        tau = prefix[s:s + tau_len]
        tau_trunc = tau[trunc:tau_len - trunc]
        if language.is_coarse_leaf_segment(params, tau_trunc):
            continue
        candidates += 1
        last_candidate_pos = s
        core = tau[trim:tau_len - trim]
        occs = _occurrence_positions(enc, _encode(core, rank))
        picked: List[int] = []
        for o in occs:
            if not picked or o >= picked[-1] + tau_len:
                picked.append(o)
        best_count = max(best_count, len(picked))
        if len(picked) >= min_occurrences and picked[-1] >= tail_start - core_len:
            cert = ConicalCertificate(
                tau=tau, tau_truncated=tau_trunc, core=core, occurrences=picked,
                depth=depth, delta=delta, min_occurrences=min_occurrences,
                language_hash=language.language_hash(), horizon=language.horizon)
            return Verdict(CONICAL_CERTIFIED, depth, certificate=cert,
                           payload={"tau_position": s},
                           language_hash=language.language_hash())

    if candidates == 0:
        payload = {"flavor": "tail_leaf", "cutoff": 0,
                   "windows_examined": examined,
                   "note": "every window's truncation is a coarse leaf segment"}
    elif last_candidate_pos is not None and last_candidate_pos + 1 <= tail_start:
        payload = {"flavor": "tail_leaf", "cutoff": last_candidate_pos + 1,
                   "windows_examined": examined,
                   "candidates": candidates,
                   "note": "beyond the cutoff every truncation is a coarse leaf segment"}
    else:
        payload = {"flavor": "no_recurrence", "candidates": candidates,
                   "windows_examined": examined,
                   "best_aligned_occurrences": best_count,
                   "required": min_occurrences}
    return Verdict(NON_CONICAL_EVIDENCE, depth, payload=payload,
                   language_hash=language.language_hash(),
                   caveat_underapproximation=True)


def classify_injective(ray: RayStream, language: LeafLanguage,
                       params: HyperbolicityParams, depth: int) -> Verdict:
    """Look for non-leaf windows persisting into the tail of the prefix.

    A position s is a witness when some window starting at s has a
    (delta+D)-trimmed core outside the language; by factor closure it is
    enough to test the longest admissible window at s.  Witnesses beyond
    every quarter checkpoint give InjectiveEvidence; a tail with no
    witness beyond a cutoff gives NonInjectiveEvidence.
    """
    delta = params.delta
    t = delta + params.D
    min_len = 2 * t + 1
    if depth < 100 * delta:
        raise DepthTooSmall(f"depth {depth} < 100*delta = {100 * delta}")
    if language.horizon < min_len:
        raise BeyondHorizon("horizon too small for any trimmed window")

    prefix = extend(ray, depth)
    max_len = language.horizon + 2 * t

    def core_is_leaf(s: int, length: int) -> bool:
        window = prefix[s:s + length]
        return language.is_leaf_factor(window[t:len(window) - t])

    witnesses: List[int] = []
    for s in range(depth - min_len + 1):
        length = min(max_len, depth - s)
        if not core_is_leaf(s, length):
            witnesses.append(s)

    checkpoints = [0, depth // 4, depth // 2, (3 * depth) // 4]
    lang_hash = language.language_hash()
    if witnesses and all(any(w >= c for w in witnesses) for c in checkpoints):
        recorded = []
        for c in checkpoints:
            s = next(w for w in witnesses if w >= c)
            lo, hi = min_len, min(max_len, depth - s)
            # Smallest witnessing window at s (monotone in the length).
            while lo < hi:
                mid = (lo + hi) // 2
                if core_is_leaf(s, mid):
                    lo = mid + 1
                else:
                    hi = mid
            recorded.append({"checkpoint": c, "position": s, "window_length": lo})
        return Verdict(INJECTIVE_EVIDENCE, depth,
                       payload={"witnesses": recorded,
                                "witness_count": len(witnesses)},
                       language_hash=lang_hash)

    cutoff = (witnesses[-1] + 1) if witnesses else 0
    first_failed = next(c for c in checkpoints
                        if not any(w >= c for w in witnesses))
    return Verdict(NON_INJECTIVE_EVIDENCE, depth,
                   payload={"cutoff": cutoff,
                            "first_failed_checkpoint": first_failed,
                            "note": "beyond the cutoff every window core is a leaf factor"},
                   language_hash=lang_hash,
                   caveat_underapproximation=True)


def classify_recurrent(ray: RayStream, depth: int, window: int,
                       factor_length: int) -> Verdict:
    """Symbolic uniform-recurrence proxy for controlled concentration.

    RecurrentEvidence: every factor of the first half recurs inside every
    window-length interval of the second half.  NotRecurrentEvidence: some
    factor occurs exactly once in the whole prefix, before the midpoint.
    """
    k = factor_length
    if depth < 2 * window:
        raise DepthTooSmall(f"depth {depth} < 2*window = {2 * window}")
    if k < 1 or k > window:
        raise ValueError("need 1 <= factor_length <= window")

    prefix = extend(ray, depth)
    enc = "".join(chr(0x4000 + x) for x in prefix)
    half = depth // 2

    first_half_factors = {enc[i:i + k] for i in range(half - k + 1)}

    def recurs_everywhere(f: str) -> bool:
        occs = [o for o in _occurrence_positions(enc, f) if o >= half]
        if not occs:
            return False
        reach = window - k  # an occurrence at o covers starts in [o - reach, o]
        if occs[0] - reach > half:
            return False
        for a, b in zip(occs, occs[1:]):
            if b - reach > a + 1:
                return False
        return occs[-1] >= depth - window

    if all(recurs_everywhere(f) for f in first_half_factors):
        return Verdict(RECURRENT_EVIDENCE, depth,
                       payload={"window": window, "factor_length": k,
                                "factors_checked": len(first_half_factors)},
                       proxy_recurrence=True)

    counts: dict = {}
    first_pos: dict = {}
    for i in range(depth - k + 1):
        f = enc[i:i + k]
        counts[f] = counts.get(f, 0) + 1
        if f not in first_pos:
            first_pos[f] = i
    for f, n in counts.items():
        if n == 1 and first_pos[f] < half:
            witness = prefix[first_pos[f]:first_pos[f] + k]
            return Verdict(NOT_RECURRENT_EVIDENCE, depth,
                           payload={"window": window, "factor_length": k,
                                    "witness_position": first_pos[f],
                                    "witness": list(witness)},
                           proxy_recurrence=True)

    return Verdict(UNKNOWN, depth,
                   payload={"window": window, "factor_length": k,
                            "reason": "neither uniform recurrence nor a unique factor"},
                   proxy_recurrence=True)


@dataclass
class ConsistencyReport:
    consistent: bool
    kinds: Tuple[str, ...]
    flagged: Optional[Tuple[str, ...]] = None
    note: str = ""

    def to_doc(self) -> dict:
        return {
            "consistent": self.consistent,
            "kinds": list(self.kinds),
            "flagged": list(self.flagged) if self.flagged else None,
            "note": self.note,
        }


_FORBIDDEN = frozenset({RECURRENT_EVIDENCE, INJECTIVE_EVIDENCE, NON_CONICAL_EVIDENCE})


def consistency_check(verdicts: Sequence[Verdict]) -> ConsistencyReport:
    """Cross-classifier law: a recurrent ray with injective evidence cannot
    be non-conical; that combination is flagged as inconsistent."""
    if not verdicts:
        raise ValueError("no verdicts to check")
    depths = {v.depth for v in verdicts}
    if len(depths) != 1:
        raise DepthMismatch(f"verdict depths differ: {sorted(depths)}")
    hashes = {v.language_hash for v in verdicts if v.language_hash is not None}
    if len(hashes) > 1:
        raise DepthMismatch(f"verdicts reference different languages: {sorted(hashes)}")
    kinds = tuple(v.kind for v in verdicts)
    if _FORBIDDEN <= set(kinds):
        return ConsistencyReport(
            consistent=False, kinds=kinds, flagged=tuple(sorted(_FORBIDDEN)),
            note="recurrent + injective evidence contradicts non-conicality")
    return ConsistencyReport(consistent=True, kinds=kinds)
