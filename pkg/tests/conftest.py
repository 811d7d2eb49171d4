import pytest

from raylam import (Alphabet, FixedRayScheme, HyperbolicityParams,
                    TrainTrackMap, build_language, build_w_infinity,
                    fixed_ray, verify_train_track)


@pytest.fixture(scope="session")
def trib_alphabet():
    return Alphabet(["a", "b", "c"])


@pytest.fixture(scope="session")
def fib_alphabet():
    return Alphabet(["a", "b"])


@pytest.fixture(scope="session")
def tribonacci(trib_alphabet):
    ttmap = TrainTrackMap.from_text(
        trib_alphabet, {"a": "a b", "b": "a c", "c": "a"}, primitive_flag=True)
    verify_train_track(ttmap, 8)
    return ttmap


@pytest.fixture(scope="session")
def fibonacci(fib_alphabet):
    ttmap = TrainTrackMap.from_text(
        fib_alphabet, {"a": "a b", "b": "a"}, primitive_flag=True)
    verify_train_track(ttmap, 8)
    return ttmap


@pytest.fixture(scope="session")
def trib_lang(tribonacci):
    return build_language(tribonacci, horizon=256)


@pytest.fixture(scope="session")
def fib_lang(fibonacci):
    return build_language(fibonacci, horizon=256)


@pytest.fixture(scope="session")
def params1():
    return HyperbolicityParams(delta=1)


@pytest.fixture(scope="session")
def trib_winf(tribonacci, trib_lang, params1):
    leaf = fixed_ray(FixedRayScheme(tribonacci, 1))
    return build_w_infinity(trib_lang, params1, leaf, target_length=2000)
