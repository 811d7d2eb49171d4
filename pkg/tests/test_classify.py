import pytest

from raylam import (CONICAL_CERTIFIED, INJECTIVE_EVIDENCE,
                    NON_CONICAL_EVIDENCE, NON_INJECTIVE_EVIDENCE,
                    NOT_RECURRENT_EVIDENCE, RECURRENT_EVIDENCE, UNKNOWN,
                    DepthMismatch, DepthTooSmall, FixedRayScheme, Verdict,
                    classify_conical, classify_injective, classify_recurrent,
                    consistency_check, explicit_ray, extend, fixed_ray,
                    periodic_ray)
from raylam.leaflang import BeyondHorizon
from raylam.words import Word


@pytest.fixture()
def ray_a(trib_alphabet):
    return periodic_ray(trib_alphabet.word("a"))


@pytest.fixture()
def leaf_ray(tribonacci):
    return fixed_ray(FixedRayScheme(tribonacci, 1))


class TestConical:
    def test_periodic_a_certifies(self, ray_a, trib_lang, params1):
        v = classify_conical(ray_a, trib_lang, params1, depth=2000,
                             min_occurrences=5)
        assert v.kind == CONICAL_CERTIFIED
        cert = v.certificate
        assert cert.tau == Word((1,) * 100)
        assert cert.tau_truncated == Word((1,) * 60)
        assert len(cert.occurrences) >= 5
        assert cert.occurrences[0] == 0
        assert cert.occurrences[:3] == [0, 100, 200]
        assert cert.occurrences[-1] >= 1500
        assert not v.caveat_underapproximation

    def test_certificate_replays(self, ray_a, trib_lang, params1):
        v = classify_conical(ray_a, trib_lang, params1, depth=2000)
        assert v.certificate.replay(ray_a, trib_lang, params1)

    def test_certificate_replay_rejects_wrong_ray(self, ray_a, leaf_ray,
                                                  trib_lang, params1):
        v = classify_conical(ray_a, trib_lang, params1, depth=2000)
        assert not v.certificate.replay(leaf_ray, trib_lang, params1)

    def test_leaf_ray_non_conical(self, leaf_ray, trib_lang, params1):
        v = classify_conical(leaf_ray, trib_lang, params1, depth=2000)
        assert v.kind == NON_CONICAL_EVIDENCE
        assert v.payload["flavor"] == "tail_leaf"
        assert v.payload["cutoff"] == 0
        assert v.caveat_underapproximation

    def test_w_infinity_non_conical(self, trib_winf, trib_lang, params1):
        stream, _ = trib_winf
        depth = len(stream.materialized)
        v = classify_conical(stream, trib_lang, params1, depth=depth)
        assert v.kind == NON_CONICAL_EVIDENCE

    def test_monotone_certification(self, ray_a, trib_lang, params1):
        v1 = classify_conical(ray_a, trib_lang, params1, depth=2000)
        v2 = classify_conical(ray_a, trib_lang, params1, depth=4000)
        assert v1.kind == v2.kind == CONICAL_CERTIFIED
        # The old certificate still replays at its own depth.
        assert v1.certificate.replay(ray_a, trib_lang, params1)

    def test_depth_too_small(self, ray_a, trib_lang, params1):
        with pytest.raises(DepthTooSmall):
            classify_conical(ray_a, trib_lang, params1, depth=80)

    def test_horizon_precondition(self, ray_a, tribonacci, params1):
        from raylam import build_language
        small = build_language(tribonacci, horizon=64)
        with pytest.raises(BeyondHorizon):
            classify_conical(ray_a, small, params1, depth=2000)

    def test_candidate_budget_gives_unknown(self, ray_a, trib_lang, params1):
        # Budget zero: no window examined, neither pattern established.
        v = classify_conical(ray_a, trib_lang, params1, depth=2000,
                             candidate_budget=0)
        assert v.kind == UNKNOWN


class TestInjective:
    def test_periodic_a(self, ray_a, trib_lang, params1):
        v = classify_injective(ray_a, trib_lang, params1, depth=2000)
        assert v.kind == INJECTIVE_EVIDENCE
        assert len(v.payload["witnesses"]) == 4

    def test_leaf_ray(self, leaf_ray, trib_lang, params1):
        v = classify_injective(leaf_ray, trib_lang, params1, depth=2000)
        assert v.kind == NON_INJECTIVE_EVIDENCE
        assert v.payload["cutoff"] == 0
        assert v.caveat_underapproximation

    def test_w_infinity(self, trib_winf, trib_lang, params1):
        stream, _ = trib_winf
        depth = len(stream.materialized)
        v = classify_injective(stream, trib_lang, params1, depth=depth)
        assert v.kind == INJECTIVE_EVIDENCE

    def test_witness_windows_minimal(self, ray_a, trib_lang, params1):
        v = classify_injective(ray_a, trib_lang, params1, depth=2000)
        for w in v.payload["witnesses"]:
            # Minimal non-leaf window for a^inf: core a^{L-6} leaves the
            # language at core length 3 (runs of a have length 2), so L = 9.
            assert w["window_length"] == 9

    def test_depth_too_small(self, ray_a, trib_lang, params1):
        with pytest.raises(DepthTooSmall):
            classify_injective(ray_a, trib_lang, params1, depth=50)


class TestRecurrent:
    def test_fixed_ray_uniformly_recurrent(self, leaf_ray):
        v = classify_recurrent(leaf_ray, depth=4000, window=256, factor_length=8)
        assert v.kind == RECURRENT_EVIDENCE
        assert v.proxy_recurrence

    def test_periodic(self, trib_alphabet):
        ray = periodic_ray(trib_alphabet.word("a b"))
        v = classify_recurrent(ray, depth=200, window=40, factor_length=4)
        assert v.kind == RECURRENT_EVIDENCE

    def test_w_infinity_not_recurrent(self, trib_winf):
        stream, _ = trib_winf
        depth = len(stream.materialized)
        v = classify_recurrent(stream, depth=depth, window=320, factor_length=40)
        assert v.kind == NOT_RECURRENT_EVIDENCE
        assert v.payload["witness_position"] < depth // 2

    def test_unique_factor_straddle(self):
        # Handmade: abab...ab | c | abab...; the single c gives a unique
        # factor before the midpoint.
        letters = [1, 2] * 30 + [3] + [1, 2] * 50
        ray = explicit_ray(Word(letters))
        v = classify_recurrent(ray, depth=len(letters), window=20, factor_length=3)
        assert v.kind == NOT_RECURRENT_EVIDENCE

    def test_unknown_when_neither(self):
        # ab-periodic through position 80, then cd-periodic: first-half
        # factors miss the late windows (not uniformly recurrent), while
        # the only once-occurring factors straddle position 79 >= half.
        letters = [1, 2] * 40 + [3, 4] * 20
        ray = explicit_ray(Word(letters))
        v = classify_recurrent(ray, depth=120, window=20, factor_length=4)
        assert v.kind == UNKNOWN

    def test_depth_window_validation(self, leaf_ray):
        with pytest.raises(DepthTooSmall):
            classify_recurrent(leaf_ray, depth=100, window=60, factor_length=4)
        with pytest.raises(ValueError):
            classify_recurrent(leaf_ray, depth=200, window=20, factor_length=30)

    def test_gap_coverage_boundary(self):
        # Factor recurs but leaves one window-length interval empty.
        letters = [1, 2, 1, 1, 2, 1] + [1] * 60 + [2] + [1] * 9
        ray = explicit_ray(Word(letters))
        v = classify_recurrent(ray, depth=len(letters), window=12, factor_length=2)
        assert v.kind != RECURRENT_EVIDENCE


class TestConsistency:
    @staticmethod
    def _verdict(kind, depth=2000, lang="deadbeef"):
        return Verdict(kind=kind, depth=depth, language_hash=lang)

    def test_conical_triple_passes(self):
        report = consistency_check([
            self._verdict(RECURRENT_EVIDENCE, lang=None),
            self._verdict(INJECTIVE_EVIDENCE),
            self._verdict(CONICAL_CERTIFIED)])
        assert report.consistent

    def test_forbidden_combination_flagged(self):
        report = consistency_check([
            self._verdict(RECURRENT_EVIDENCE, lang=None),
            self._verdict(INJECTIVE_EVIDENCE),
            self._verdict(NON_CONICAL_EVIDENCE)])
        assert not report.consistent
        assert set(report.flagged) == {RECURRENT_EVIDENCE, INJECTIVE_EVIDENCE,
                                       NON_CONICAL_EVIDENCE}

    def test_theorem_signature_passes(self):
        report = consistency_check([
            self._verdict(NOT_RECURRENT_EVIDENCE, lang=None),
            self._verdict(INJECTIVE_EVIDENCE),
            self._verdict(NON_CONICAL_EVIDENCE)])
        assert report.consistent

    def test_depth_mismatch(self):
        with pytest.raises(DepthMismatch):
            consistency_check([self._verdict(RECURRENT_EVIDENCE, depth=100),
                               self._verdict(INJECTIVE_EVIDENCE, depth=200)])

    def test_language_mismatch(self):
        with pytest.raises(DepthMismatch):
            consistency_check([self._verdict(INJECTIVE_EVIDENCE, lang="aaaa"),
                               self._verdict(NON_CONICAL_EVIDENCE, lang="bbbb")])

    def test_live_pipeline_consistency(self, trib_winf, trib_lang, params1):
        stream, _ = trib_winf
        depth = len(stream.materialized)
        vc = classify_conical(stream, trib_lang, params1, depth=depth)
        vi = classify_injective(stream, trib_lang, params1, depth=depth)
        vr = classify_recurrent(stream, depth=depth, window=320, factor_length=40)
        report = consistency_check([vc, vi, vr])
        assert report.consistent
        assert (vc.kind, vi.kind, vr.kind) == (
            NON_CONICAL_EVIDENCE, INJECTIVE_EVIDENCE, NOT_RECURRENT_EVIDENCE)


class TestTheoremAlignment:
    def test_non_injective_implies_not_certified(self, trib_lang, params1,
                                                 tribonacci, trib_alphabet):
        # On every test ray: NonInjectiveEvidence excludes ConicalCertified
        # on the same prefix.
        rays = [fixed_ray(FixedRayScheme(tribonacci, 1)),
                periodic_ray(trib_alphabet.word("a")),
                periodic_ray(trib_alphabet.word("a b"))]
        for ray in rays:
            vi = classify_injective(ray, trib_lang, params1, depth=2000)
            vc = classify_conical(ray, trib_lang, params1, depth=2000)
            if vi.kind == NON_INJECTIVE_EVIDENCE:
                assert vc.kind != CONICAL_CERTIFIED
