import itertools

import pytest

from raylam import (Alphabet, BeyondBall, BudgetExceeded, Presentation,
                    build_ball, estimate_delta, is_local_geodesic,
                    parse_presentation)
from raylam.words import Word


@pytest.fixture(scope="module")
def free2():
    return Presentation(Alphabet(["a", "b"]), [])


@pytest.fixture(scope="module")
def z2():
    a = Alphabet(["a", "b"])
    return Presentation(a, [a.word("a b a^-1 b^-1")])


@pytest.fixture(scope="module")
def surface2():
    a = Alphabet(["a", "b", "c", "d"])
    return Presentation(a, [a.word("a b a^-1 b^-1 c d c^-1 d^-1")])


# --------------------------------------------------------------------------
# Independent oracles
# --------------------------------------------------------------------------

def z2_point(word):
    x = y = 0
    for letter in word:
        if abs(letter) == 1:
            x += 1 if letter > 0 else -1
        else:
            y += 1 if letter > 0 else -1
    return x, y


def z2_lattice_ball(radius):
    return {(x, y)
            for x in range(-radius, radius + 1)
            for y in range(-radius, radius + 1)
            if abs(x) + abs(y) <= radius}


def z2_greedy_geodesic(p, q):
    """Mirror of the canonical geodesic rule (first generator in alphabet
    order that decreases the distance), computed on lattice coordinates."""
    path = [p]
    cur = p
    moves = [(1, 0), (-1, 0), (0, 1), (0, -1)]  # a, a^-1, b, b^-1
    while cur != q:
        d = abs(cur[0] - q[0]) + abs(cur[1] - q[1])
        for dx, dy in moves:
            nxt = (cur[0] + dx, cur[1] + dy)
            if abs(nxt[0] - q[0]) + abs(nxt[1] - q[1]) == d - 1:
                cur = nxt
                break
        path.append(cur)
    return path


def z2_thin_triangle_delta(radius):
    """Exhaustive thin-triangle constant over canonical geodesic triangles
    of lattice points, with exact l^1 distances."""
    pts = sorted(z2_lattice_ball(radius))

    def dist(p, q):
        return abs(p[0] - q[0]) + abs(p[1] - q[1])

    best = 0
    for a, b, c in itertools.combinations(pts, 3):
        sides = (z2_greedy_geodesic(a, b), z2_greedy_geodesic(b, c),
                 z2_greedy_geodesic(a, c))
        for i in range(3):
            others = sides[(i + 1) % 3] + sides[(i + 2) % 3]
            e = max(min(dist(p, q) for q in others) for p in sides[i])
            best = max(best, e)
    return best


class TestBallCounts:
    @pytest.mark.parametrize("radius,expected", [(1, 5), (2, 17), (3, 53)])
    def test_free_group_tree_counts(self, free2, radius, expected):
        assert build_ball(free2, radius).n_vertices == expected

    @pytest.mark.parametrize("radius", [1, 2, 3, 4, 5, 6])
    def test_z2_lattice_counts(self, z2, radius):
        ball = build_ball(z2, radius)
        assert ball.n_vertices == 2 * radius * radius + 2 * radius + 1

    def test_z2_distances_match_l1(self, z2):
        radius = 4
        ball = build_ball(z2, radius)
        # Walk every vertex via its geodesic from the identity and compare
        # the distance table with lattice coordinates.
        for v in range(ball.n_vertices):
            path = ball.geodesic(0, v)
            word = []
            for cur, nxt in zip(path, path[1:]):
                for letter in (1, -1, 2, -2):
                    try:
                        if ball.step(cur, letter) == nxt:
                            word.append(letter)
                            break
                    except BeyondBall:
                        continue
            x, y = z2_point(word)
            assert abs(x) + abs(y) == ball.dist_from_identity[v]

    def test_surface_group_radius_two_is_tree_like(self, surface2):
        # The relator has length 8, so no identification is visible at
        # radius 2: the ball matches the rank-4 free ball.
        ball = build_ball(surface2, 2)
        assert ball.n_vertices == 1 + 8 + 8 * 7

    def test_budget_exceeded(self, z2):
        with pytest.raises(BudgetExceeded):
            build_ball(z2, 6, vertex_budget=10)


class TestDelta:
    @pytest.mark.parametrize("radius", [1, 2, 3])
    def test_free_group_delta_zero(self, free2, radius):
        assert estimate_delta(build_ball(free2, radius)) == 0

    def test_z2_monotone_and_detects_fatness(self, z2):
        estimates = [estimate_delta(build_ball(z2, r)) for r in (2, 3, 4)]
        assert estimates == sorted(estimates)
        assert estimates[-1] >= 2

    @pytest.mark.parametrize("radius", [2, 3])
    def test_z2_matches_exhaustive_lattice_oracle(self, z2, radius):
        got = estimate_delta(build_ball(z2, radius))
        assert got == z2_thin_triangle_delta(radius)

    def test_sampled_mode_is_deterministic(self, z2):
        ball = build_ball(z2, 4)
        a = estimate_delta(ball, triple_budget=500, seed=11)
        b = estimate_delta(ball, triple_budget=500, seed=11)
        assert a == b


class TestLocalGeodesic:
    def test_free_backend_accepts_reduced(self):
        assert is_local_geodesic(None, Word((1, 2, -1, 2)), 4)

    def test_relator_loop_rejected(self, z2):
        ball = build_ball(z2, 4)
        a = Alphabet(["a", "b"])
        assert not is_local_geodesic(ball, a.word("a b a^-1 b^-1"), 4)

    def test_z2_straight_word(self, z2):
        ball = build_ball(z2, 4)
        a = Alphabet(["a", "b"])
        assert is_local_geodesic(ball, a.word("a a b b"), 4)

    def test_window_scale_monotone(self, z2):
        ball = build_ball(z2, 6)
        a = Alphabet(["a", "b"])
        # Locally geodesic at scale 4 but globally a detour.
        w = a.word("a a b b a^-1 a^-1")
        for r in (2, 3):
            assert is_local_geodesic(ball, w, r)

    def test_beyond_ball(self, z2):
        ball = build_ball(z2, 2)
        with pytest.raises(BeyondBall):
            is_local_geodesic(ball, Word((1, 1, 1, 1)), 4)


def test_parse_presentation_round_trip():
    pres = parse_presentation("# comment\nalphabet: a b\na b a^-1 b^-1\n")
    assert pres.alphabet.names == ("a", "b")
    assert len(pres.relators) == 1


def test_parse_presentation_requires_alphabet():
    with pytest.raises(ValueError):
        parse_presentation("a b a^-1 b^-1\n")


def test_presentation_rejects_bad_relators():
    a = Alphabet(["a", "b"])
    with pytest.raises(ValueError):
        Presentation(a, [Word()])
    with pytest.raises(ValueError):
        Presentation(a, [a.word("a b a^-1")])
