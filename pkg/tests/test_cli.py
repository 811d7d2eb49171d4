import json
from pathlib import Path

import pytest

from raylam.cli import main

TRIB_MAP = """\
alphabet: a b c
a -> a b
b -> a c
c -> a
primitive
verify_depth = 8
"""

Z2_PRES = """\
alphabet: a b
a b a^-1 b^-1
"""


@pytest.fixture()
def workdir(tmp_path):
    (tmp_path / "trib.map").write_text(TRIB_MAP)
    (tmp_path / "z2.pres").write_text(Z2_PRES)
    (tmp_path / "cache").mkdir()
    return tmp_path


def run(workdir, *argv):
    return main([str(a) for a in argv])


def classify_args(workdir, ray, out, depth=2000, extra=()):
    return ["classify", "--map", workdir / "trib.map",
            "--horizon", 256, "--delta", 1, "--depth", depth,
            "--ray", ray, "--cache-dir", workdir / "cache",
            "--out", workdir / out, *extra]


class TestBuildLanguage:
    def test_build_and_cache_hit(self, workdir, capsys):
        code = run(workdir, "build-language", "--map", workdir / "trib.map",
                   "--horizon", 20, "--cache-dir", workdir / "cache")
        assert code == 0
        out = capsys.readouterr()
        assert "cache miss" in out.out
        assert "length   2: 10 members" in out.out
        code = run(workdir, "build-language", "--map", workdir / "trib.map",
                   "--horizon", 20, "--cache-dir", workdir / "cache")
        assert code == 0
        assert "cache hit" in capsys.readouterr().out

    def test_corrupted_cache_rebuilds(self, workdir, capsys):
        run(workdir, "build-language", "--map", workdir / "trib.map",
            "--horizon", 20, "--cache-dir", workdir / "cache")
        capsys.readouterr()
        cache_file = next((workdir / "cache").glob("lang-*.json"))
        cache_file.write_text("{ not json")
        code = run(workdir, "build-language", "--map", workdir / "trib.map",
                   "--horizon", 20, "--cache-dir", workdir / "cache")
        assert code == 0
        captured = capsys.readouterr()
        assert "corrupted" in captured.err
        assert "cache miss" in captured.out

    def test_bad_horizon_is_config_error(self, workdir):
        code = run(workdir, "build-language", "--map", workdir / "trib.map",
                   "--horizon", 0, "--cache-dir", workdir / "cache")
        assert code == 3


class TestClassify:
    def test_periodic_certifies(self, workdir):
        code = run(workdir, *classify_args(workdir, "periodic: a", "doc.json"))
        assert code == 0
        doc = json.loads((workdir / "doc.json").read_text())
        assert doc["verdicts"]["conical"]["kind"] == "ConicalCertified"
        assert doc["consistency"]["consistent"]

    def test_fixed_ray_document(self, workdir):
        code = run(workdir, *classify_args(workdir, "fixed: trib.map seed a",
                                           "doc.json"))
        assert code == 0
        doc = json.loads((workdir / "doc.json").read_text())
        kinds = {k: v["kind"] for k, v in doc["verdicts"].items()}
        assert kinds["conical"] == "NonConicalEvidence"
        assert kinds["injective"] == "NonInjectiveEvidence"

    def test_winf_pipeline_document(self, workdir):
        code = run(workdir, *classify_args(
            workdir, "winf: trib.map target 2000", "doc.json"))
        assert code == 0
        doc = json.loads((workdir / "doc.json").read_text())
        kinds = {k: v["kind"] for k, v in doc["verdicts"].items()}
        assert kinds == {"conical": "NonConicalEvidence",
                         "injective": "InjectiveEvidence",
                         "recurrent": "NotRecurrentEvidence"}
        assert doc["consistency"]["consistent"]
        assert doc["winfinity_scheme"]["blocks"]

    def test_ray_script_from_file(self, workdir):
        script = workdir / "ray.txt"
        script.write_text("periodic: a b\n")
        code = run(workdir, *classify_args(workdir, script, "doc.json"))
        assert code == 0

    def test_config_validation(self, workdir):
        code = run(workdir, "classify", "--map", workdir / "trib.map",
                   "--horizon", 50, "--delta", 1, "--depth", 2000,
                   "--ray", "periodic: a", "--cache-dir", workdir / "cache")
        assert code == 3

    def test_determinism_modulo_timestamp(self, workdir):
        for name in ("d1.json", "d2.json"):
            assert run(workdir, *classify_args(
                workdir, "winf: trib.map target 2000", name)) == 0
        d1 = json.loads((workdir / "d1.json").read_text())
        d2 = json.loads((workdir / "d2.json").read_text())
        d1.pop("timestamp"), d2.pop("timestamp")
        assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)


class TestWinf:
    def test_scheme_document(self, workdir):
        code = run(workdir, "winf", "--map", workdir / "trib.map",
                   "--horizon", 256, "--delta", 1, "--target", 500,
                   "--cache-dir", workdir / "cache",
                   "--out", workdir / "winf.json")
        assert code == 0
        doc = json.loads((workdir / "winf.json").read_text())
        assert doc["prefix_length"] >= 500
        assert doc["local_geodesic"]
        assert doc["certificates_replayed"]
        assert all(b["certificate"]["verdict"] for b in doc["scheme"]["blocks"])


class TestCayley:
    def test_delta_report(self, workdir, capsys):
        code = run(workdir, "cayley", "--presentation", workdir / "z2.pres",
                   "--radii", "2:4", "--out", workdir / "cayley.json")
        assert code == 0
        doc = json.loads((workdir / "cayley.json").read_text())
        estimates = [row["delta_estimate"] for row in doc["estimates"]]
        assert estimates == sorted(estimates)
        vertices = [row["vertices"] for row in doc["estimates"]]
        assert vertices == [13, 25, 41]

    def test_malformed_relator_exit_code(self, workdir):
        (workdir / "bad.pres").write_text("alphabet: a b\na b a^-1\n")
        code = run(workdir, "cayley", "--presentation", workdir / "bad.pres")
        assert code == 3


class TestReplay:
    def test_replay_conical(self, workdir):
        run(workdir, *classify_args(workdir, "periodic: a", "doc.json"))
        code = run(workdir, "replay-certificate", workdir / "doc.json",
                   "--cache-dir", workdir / "cache")
        assert code == 0

    def test_replay_winf_scheme(self, workdir):
        run(workdir, *classify_args(workdir, "winf: trib.map target 2000",
                                    "doc.json"))
        code = run(workdir, "replay-certificate", workdir / "doc.json",
                   "--cache-dir", workdir / "cache")
        assert code == 0

    def test_replay_detects_tampering(self, workdir):
        run(workdir, *classify_args(workdir, "periodic: a", "doc.json"))
        doc = json.loads((workdir / "doc.json").read_text())
        cert = doc["verdicts"]["conical"]["certificate"]
        # An occurrence whose core would overrun the examined prefix.
        cert["occurrences"][-1] = cert["depth"] - 1
        (workdir / "doc.json").write_text(json.dumps(doc))
        code = run(workdir, "replay-certificate", workdir / "doc.json",
                   "--cache-dir", workdir / "cache")
        assert code == 1

    def test_replay_detects_wrong_truncation(self, workdir):
        run(workdir, *classify_args(workdir, "periodic: a", "doc.json"))
        doc = json.loads((workdir / "doc.json").read_text())
        cert = doc["verdicts"]["conical"]["certificate"]
        cert["tau_truncated"] = "a b"
        (workdir / "doc.json").write_text(json.dumps(doc))
        code = run(workdir, "replay-certificate", workdir / "doc.json",
                   "--cache-dir", workdir / "cache")
        assert code == 1

    def test_replay_detects_map_change(self, workdir):
        run(workdir, *classify_args(workdir, "periodic: a", "doc.json"))
        (workdir / "trib.map").write_text(TRIB_MAP.replace("c -> a", "c -> a b"))
        code = run(workdir, "replay-certificate", workdir / "doc.json",
                   "--cache-dir", workdir / "cache")
        assert code == 1
