"""Command-line front end: cached language builds, classification runs,
poisoned-ray construction, ball experiments, and certificate replay.

Every document is versioned JSON with sorted keys; runs with identical
configuration and cache state are byte-identical apart from the
timestamp field.  No default code path uses randomness; delta sampling
takes an explicit seed that is recorded in the report.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import cayley as cayley_mod
from .classify import (UNKNOWN, ConicalCertificate, classify_conical,
                       classify_injective, classify_recurrent,
                       consistency_check)
from .leaflang import HyperbolicityParams, build_language
from .rays import build_w_infinity, explicit_ray, periodic_ray
from .traintrack import FixedRayScheme, fixed_ray, load_map_file
from .words import Word

SCHEMA_VERDICTS = "raylam/verdicts/1"
SCHEMA_LANGUAGE_CACHE = "raylam/language-cache/1"
SCHEMA_WINF = "raylam/winfinity/1"
SCHEMA_CAYLEY = "raylam/cayley-report/1"

EXIT_OK = 0
EXIT_UNKNOWN = 2
EXIT_ERROR = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _dump(doc: dict, out_path) -> str:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return text


def _cache_dir(args) -> Path:
    if getattr(args, "cache_dir", None):
        d = Path(args.cache_dir)
    else:
        d = Path(os.environ.get("RAYLAM_CACHE_DIR", ".raylam-cache"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def load_or_build_language(map_path, horizon: int, window: int, cache_dir: Path,
                           member_budget: int, corpus_budget: int,
                           quiet: bool = False):
    """Build the leaf language, or rebuild it from a hash-validated cache
    entry (which pins the generation depth and skips the depth search)."""
    ttmap = load_map_file(map_path)
    map_hash = ttmap.content_hash()
    cache_path = cache_dir / f"lang-{map_hash}-h{horizon}-w{window}.json"
    pinned_depth = 0
    cache_hit = False
    if cache_path.exists():
        try:
            doc = json.loads(cache_path.read_text(encoding="utf-8"))
            if (doc.get("schema") == SCHEMA_LANGUAGE_CACHE
                    and doc.get("map_hash") == map_hash
                    and doc.get("horizon") == horizon
                    and doc.get("stabilization_window") == window):
                pinned_depth = int(doc["generation_depth"])
                cache_hit = True
            else:
                print(f"warning: cache {cache_path} does not match; rebuilding",
                      file=sys.stderr)
        except (ValueError, KeyError):
            print(f"warning: cache {cache_path} is corrupted; rebuilding",
                  file=sys.stderr)
    lang = build_language(ttmap, horizon, stabilization_window=window,
                          member_budget=member_budget,
                          corpus_budget=corpus_budget,
                          min_generation_depth=pinned_depth)
    if cache_hit and doc.get("language_hash") not in (None, lang.language_hash()):
        print(f"warning: cache {cache_path} hash mismatch; rebuilt fresh",
              file=sys.stderr)
        cache_hit = False
    if not cache_hit:
        cache_doc = {
            "schema": SCHEMA_LANGUAGE_CACHE,
            "map_hash": map_hash,
            "map_file": str(map_path),
            "horizon": horizon,
            "stabilization_window": window,
            "generation_depth": lang.generation_depth,
            "language_hash": lang.language_hash(),
            "counts": lang.counts_summary(min(horizon, 24)),
        }
        cache_path.write_text(json.dumps(cache_doc, sort_keys=True, indent=2) + "\n",
                              encoding="utf-8")
    if not quiet:
        state = "cache hit" if cache_hit else "built"
        print(f"language {lang.language_hash()} ({state}): "
              f"generation_depth={lang.generation_depth}, horizon={horizon}",
              file=sys.stderr)
    return ttmap, lang, cache_hit


def _default_seed_generator(ttmap) -> int:
    for g in range(1, ttmap.alphabet.rank + 1):
        img = ttmap.images[g]
        if img[0] == g and len(img) > 1:
            return g
    raise ValueError("map has no expanding seed generator for a fixed ray")


def parse_ray_script(script: str, language, params, base_dir, search_budget: int,
                     depth: int):
    """Ray scripts: `periodic: a b`, `fixed: MAP seed a`,
    `winf: MAP target 2000`, `explicit: a b a`."""
    script = script.strip()
    if os.path.isfile(script):
        script = Path(script).read_text(encoding="utf-8").strip()
    kind, _, rest = script.partition(":")
    kind = kind.strip()
    rest = rest.strip()
    alphabet = language.alphabet
    if kind == "periodic":
        ray = periodic_ray(alphabet.word(rest))
        ray.provenance["script"] = script
        return ray, None
    if kind == "explicit":
        ray = explicit_ray(alphabet.word(rest))
        ray.provenance["script"] = script
        return ray, None
    if kind == "fixed":
        parts = rest.split()
        if len(parts) != 3 or parts[1] != "seed":
            raise ValueError(f"bad fixed-ray script {script!r}")
        ttmap = load_map_file(Path(base_dir) / parts[0])
        seed = ttmap.alphabet._index[parts[2]]
        ray = fixed_ray(FixedRayScheme(ttmap, seed))
        ray.provenance["script"] = script
        return ray, None
    if kind == "winf":
        parts = rest.split()
        if len(parts) != 3 or parts[1] != "target":
            raise ValueError(f"bad winf script {script!r}")
        ttmap = load_map_file(Path(base_dir) / parts[0])
        target = int(parts[2])
        if target < depth:
            target = depth
        seed = _default_seed_generator(ttmap)
        leaf = fixed_ray(FixedRayScheme(ttmap, seed))
        stream, scheme = build_w_infinity(language, params, leaf, target,
                                          search_budget=search_budget)
        stream.provenance["script"] = script
        return stream, scheme
    raise ValueError(f"unknown ray script kind {kind!r}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_build_language(args) -> int:
    if args.horizon < 1:
        print("error: horizon must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    cache = _cache_dir(args)
    ttmap, lang, cache_hit = load_or_build_language(
        args.map, args.horizon, args.stabilization_window, cache,
        args.budget_members, args.budget_corpus)
    cap = min(args.horizon, 24)
    lines = [f"map {ttmap.content_hash()}  language {lang.language_hash()}",
             f"generation_depth {lang.generation_depth}  horizon {lang.horizon}"
             f"  cache {'hit' if cache_hit else 'miss'}"]
    counts = lang.counts_summary(cap)
    for k in range(1, cap + 1):
        lines.append(f"  length {k:3d}: {counts[k]} members")
    if args.horizon > cap:
        lines.append(f"  (lengths up to {args.horizon} are materialized)")
    print("\n".join(lines))
    return EXIT_OK


def _validate_classify_config(args) -> None:
    if args.delta < 1:
        raise ValueError("delta must be >= 1")
    if args.horizon < 100 * args.delta:
        raise ValueError(f"horizon must be >= 100*delta = {100 * args.delta}")
    if args.depth < args.horizon:
        raise ValueError(f"depth must be >= horizon = {args.horizon}")


def cmd_classify(args) -> int:
    _validate_classify_config(args)
    cache = _cache_dir(args)
    ttmap, lang, _ = load_or_build_language(
        args.map, args.horizon, args.stabilization_window, cache,
        args.budget_members, args.budget_corpus)
    params = HyperbolicityParams(delta=args.delta)
    base_dir = Path(args.map).parent
    ray, scheme = parse_ray_script(args.ray, lang, params, base_dir,
                                   args.budget_search, args.depth)

    window = args.window if args.window else max(320, 8 * args.factor_length)
    if args.depth < 2 * window:
        window = args.depth // 2
    vc = classify_conical(ray, lang, params, args.depth,
                          min_occurrences=args.min_occurrences)
    vi = classify_injective(ray, lang, params, args.depth)
    vr = classify_recurrent(ray, args.depth, window, args.factor_length)
    report = consistency_check([vc, vi, vr])

    alphabet = lang.alphabet
    doc = {
        "schema": SCHEMA_VERDICTS,
        "timestamp": _now(),
        "config": {
            "map": str(args.map),
            "map_hash": ttmap.content_hash(),
            "horizon": args.horizon,
            "delta": args.delta,
            "depth": args.depth,
            "ray": args.ray,
            "min_occurrences": args.min_occurrences,
            "factor_length": args.factor_length,
            "window": window,
            "stabilization_window": args.stabilization_window,
            "budgets": {"search": args.budget_search,
                        "members": args.budget_members,
                        "corpus": args.budget_corpus},
            "seed": args.seed,
        },
        "language": {
            "hash": lang.language_hash(),
            "generation_depth": lang.generation_depth,
            "horizon": lang.horizon,
        },
        "params": {"delta": params.delta, "r": params.r, "D": params.D},
        "ray": {"provenance": ray.provenance},
        "verdicts": {
            "conical": vc.to_doc(alphabet),
            "injective": vi.to_doc(alphabet),
            "recurrent": vr.to_doc(alphabet),
        },
        "consistency": report.to_doc(),
    }
    if scheme is not None:
        doc["winfinity_scheme"] = scheme.to_doc(alphabet)
    _dump(doc, args.out)
    kinds = {vc.kind, vi.kind, vr.kind}
    return EXIT_UNKNOWN if UNKNOWN in kinds else EXIT_OK


def cmd_winf(args) -> int:
    if args.delta < 1:
        raise ValueError("delta must be >= 1")
    cache = _cache_dir(args)
    ttmap, lang, _ = load_or_build_language(
        args.map, args.horizon, args.stabilization_window, cache,
        args.budget_members, args.budget_corpus)
    params = HyperbolicityParams(delta=args.delta)
    seed = _default_seed_generator(ttmap)
    leaf = fixed_ray(FixedRayScheme(ttmap, seed))
    stream, scheme = build_w_infinity(lang, params, leaf, args.target,
                                      search_budget=args.budget_search)
    prefix = stream.materialized
    local = cayley_mod.is_local_geodesic(None, prefix, params.r)
    replayed = all(b.certificate.replay(lang, params) for b in scheme.blocks)
    doc = {
        "schema": SCHEMA_WINF,
        "timestamp": _now(),
        "config": {"map": str(args.map), "map_hash": ttmap.content_hash(),
                   "horizon": args.horizon, "delta": args.delta,
                   "target": args.target, "budget_search": args.budget_search},
        "language": {"hash": lang.language_hash(),
                     "generation_depth": lang.generation_depth},
        "prefix_length": len(prefix),
        "local_geodesic_scale": params.r,
        "local_geodesic": local,
        "certificates_replayed": replayed,
        "scheme": scheme.to_doc(lang.alphabet),
    }
    _dump(doc, args.out)
    print(f"built {len(prefix)} letters in {len(scheme.blocks)} blocks; "
          f"certificates {'ok' if replayed else 'FAILED'}", file=sys.stderr)
    return EXIT_OK if (local and replayed) else EXIT_ERROR


def _parse_radii(text: str):
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",")]


def cmd_cayley(args) -> int:
    pres = cayley_mod.parse_presentation(Path(args.presentation).read_text(encoding="utf-8"))
    radii = _parse_radii(args.radii)
    rows = []
    for radius in radii:
        ball = cayley_mod.build_ball(pres, radius,
                                     vertex_budget=args.budget_vertices)
        delta = cayley_mod.estimate_delta(ball, triple_budget=args.triple_budget,
                                          seed=args.seed)
        rows.append({"radius": radius, "vertices": ball.n_vertices,
                     "delta_estimate": delta})
        print(f"radius {radius:3d}: {ball.n_vertices:6d} vertices, "
              f"delta estimate {delta}")
    if args.out:
        doc = {
            "schema": SCHEMA_CAYLEY,
            "timestamp": _now(),
            "presentation": str(args.presentation),
            "presentation_hash": _file_hash(args.presentation),
            "seed": args.seed,
            "triple_budget": args.triple_budget,
            "estimates": rows,
        }
        _dump(doc, args.out)
    return EXIT_OK


def cmd_replay_certificate(args) -> int:
    doc = json.loads(Path(args.document).read_text(encoding="utf-8"))
    schema = doc.get("schema")
    cache = _cache_dir(args)
    config = doc.get("config", {})
    map_path = args.map or config.get("map")
    if map_path is None:
        print("error: document records no map file; pass --map", file=sys.stderr)
        return EXIT_ERROR
    ttmap, lang, _ = load_or_build_language(
        map_path, config["horizon"], config.get("stabilization_window", 2),
        cache, args.budget_members, args.budget_corpus, quiet=True)
    if ttmap.content_hash() != config.get("map_hash", ttmap.content_hash()):
        print("replay FAILED: map file hash differs from the document",
              file=sys.stderr)
        return 1
    params = HyperbolicityParams(delta=config["delta"])
    alphabet = lang.alphabet
    ok = True

    if schema == SCHEMA_VERDICTS:
        if doc["language"]["hash"] != lang.language_hash():
            print("replay FAILED: language hash differs", file=sys.stderr)
            return 1
        conical = doc["verdicts"]["conical"]
        cert_doc = conical.get("certificate")
        if cert_doc is not None:
            ray, _ = parse_ray_script(config["ray"], lang, params,
                                      Path(map_path).parent,
                                      config["budgets"]["search"],
                                      config["depth"])
            cert = ConicalCertificate(
                tau=alphabet.word(cert_doc["tau"]),
                tau_truncated=alphabet.word(cert_doc["tau_truncated"]),
                core=alphabet.word(cert_doc["core"]),
                occurrences=list(cert_doc["occurrences"]),
                depth=cert_doc["depth"],
                delta=cert_doc["delta"],
                min_occurrences=cert_doc["min_occurrences"],
                language_hash=cert_doc["language_hash"],
                horizon=cert_doc["horizon"])
            ok &= cert.replay(ray, lang, params)
        blocks = doc.get("winfinity_scheme", {}).get("blocks", [])
        ok &= _replay_blocks(blocks, lang, params, alphabet)
    elif schema == SCHEMA_WINF:
        if doc["language"]["hash"] != lang.language_hash():
            print("replay FAILED: language hash differs", file=sys.stderr)
            return 1
        ok &= _replay_blocks(doc["scheme"]["blocks"], lang, params, alphabet)
    else:
        print(f"error: unknown document schema {schema!r}", file=sys.stderr)
        return EXIT_ERROR

    print("replay OK" if ok else "replay FAILED",
          file=sys.stderr if not ok else sys.stdout)
    return EXIT_OK if ok else 1


def _replay_blocks(block_docs, lang, params, alphabet) -> bool:
    from .rays import NonLeafBlockCertificate
    ok = True
    for bd in block_docs:
        cd = bd["certificate"]
        cert = NonLeafBlockCertificate(
            index=cd["index"],
            block=alphabet.word(cd["block"]),
            truncation=alphabet.word(cd["truncation"]),
            language_hash=cd["language_hash"],
            horizon=cd["horizon"],
            delta=cd["delta"],
            verdict=cd["verdict"])
        v = alphabet.word(bd["v"])
        u = alphabet.word(bd["u"])
        alpha = Word(tuple(v) + tuple(u))
        expected = Word(tuple(alpha) * bd["kappa"])
        if expected != cert.block:
            ok = False
            continue
        ok &= cert.replay(lang, params)
    return ok


# ---------------------------------------------------------------------------

def _add_language_options(sub):
    sub.add_argument("--map", required=True, help="train-track map definition file")
    sub.add_argument("--horizon", type=int, required=True)
    sub.add_argument("--stabilization-window", type=int, default=2)
    sub.add_argument("--cache-dir", default=None,
                     help="defaults to $RAYLAM_CACHE_DIR or ./.raylam-cache")
    sub.add_argument("--budget-members", type=int, default=5_000_000)
    sub.add_argument("--budget-corpus", type=int, default=4_000_000)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="raylam",
                     description="leaf languages and boundary-ray classification")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("build-language", parents=[], help="materialize and cache a leaf language")
    _add_language_options(p)
    p.set_defaults(func=cmd_build_language)

    p = subs.add_parser("classify", help="run all classifiers on one ray")
    _add_language_options(p)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--ray", required=True, help="ray script or script file")
    p.add_argument("--min-occurrences", type=int, default=5)
    p.add_argument("--factor-length", type=int, default=40)
    p.add_argument("--window", type=int, default=0,
                   help="recurrence window (default max(320, 8*factor_length))")
    p.add_argument("--budget-search", type=int, default=1 << 20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_classify)

    p = subs.add_parser("winf", help="build the certified injective non-conical ray")
    _add_language_options(p)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--budget-search", type=int, default=1 << 20)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_winf)

    p = subs.add_parser("cayley", help="build balls and estimate delta")
    p.add_argument("--presentation", required=True)
    p.add_argument("--radii", default="1:4", help="range lo:hi or comma list")
    p.add_argument("--triple-budget", type=int, default=200_000)
    p.add_argument("--budget-vertices", type=int, default=500_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cayley)

    p = subs.add_parser("replay-certificate",
                        help="re-verify a stored certificate document")
    p.add_argument("document")
    p.add_argument("--map", default=None, help="override the recorded map path")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--budget-members", type=int, default=5_000_000)
    p.add_argument("--budget-corpus", type=int, default=4_000_000)
    p.set_defaults(func=cmd_replay_certificate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - single CLI error funnel
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
