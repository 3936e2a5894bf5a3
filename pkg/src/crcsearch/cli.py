"""Command-line entry point: ``crcsearch <subcommand> [options]``.

Every subcommand writes one structured document (JSON by default, TSV with
``--format tsv``) to stdout or ``--out``.  Binary artifacts (networks,
indexes) go to ``--save``.  Log level comes from ``CRCSEARCH_LOG_LEVEL``.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import index_compress, wcf_index
from .coredec import core_decompose
from .dyngraph import NETWORK_MAGIC, DynamicNetwork, QueryParams, ingest_edge_stream
from .eef_search import SearchStats, eef_query
from .errors import CrcError, ParameterError
from .index_maint import MaintenanceReport, apply_delta, parse_delta
from .metrics import evaluate
from .oracle import brute_force_query
from .reliability import Community
from .wcf_search import alpha_sweep, wcf_query

log = logging.getLogger("crcsearch")

SCHEMA = "crcsearch/1"

DEFAULT_K = "40%"
DEFAULT_THETA = 0.4
DEFAULT_WINDOW_LEN = 12
DEFAULT_ALPHA = 1.0


# -- loading --------------------------------------------------------------

def load_network(args) -> DynamicNetwork:
    path = Path(args.data)
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == NETWORK_MAGIC:
        return DynamicNetwork.load(path)
    with open(path, encoding="utf-8") as fh:
        return ingest_edge_stream(
            fh,
            getattr(args, "snapshots", None),
            getattr(args, "weight_mode", "given"),
            normalize=not getattr(args, "no_normalize", False),
            partition=getattr(args, "partition", "timestamp"),
        )


def load_or_build_index(args, net: DynamicNetwork) -> wcf_index.WcfIndex:
    if getattr(args, "index", None):
        idx = wcf_index.load(args.index)
        idx.check_matches(net)
        return idx
    log.info("no --index given; building one in memory")
    return wcf_index.build(net)


def parse_window(text: str | None, net: DynamicNetwork) -> tuple[int, int]:
    if text is None:
        return 0, min(net.num_snapshots, DEFAULT_WINDOW_LEN) - 1
    try:
        a, b = (int(x) for x in text.split(":"))
    except ValueError:
        raise ParameterError(f"window must look like START:END, got {text!r}") from None
    if not 0 <= a <= b < net.num_snapshots:
        raise ParameterError(f"window {a}:{b} outside snapshot range 0:{net.num_snapshots - 1}")
    return a, b


def window_k_max(net: DynamicNetwork, window: tuple[int, int]) -> int:
    return max(
        (max(core_decompose(net[t]).values(), default=0) for t in range(window[0], window[1] + 1)),
        default=0,
    )


def resolve_k(text: str, net: DynamicNetwork, window: tuple[int, int]) -> int:
    """Absolute k, or ``P%`` of the largest core number in the window (half up, at least 1)."""
    text = str(text).strip()
    if text.endswith("%"):
        try:
            pct = float(text[:-1])
        except ValueError:
            raise ParameterError(f"bad k percentage {text!r}") from None
        return max(1, int(window_k_max(net, window) * pct / 100 + 0.5))
    try:
        return int(text)
    except ValueError:
        raise ParameterError(f"k must be an integer or a percentage, got {text!r}") from None


def query_params(args, net: DynamicNetwork, q_label: str | None = None) -> QueryParams:
    window = parse_window(args.window, net)
    label = q_label if q_label is not None else args.q
    if label is None:
        raise ParameterError("--q is required")
    k = resolve_k(args.k, net, window)
    params = QueryParams(net.vertex_id(label), k, args.theta, window, args.alpha)
    params.validate(net)
    return params


# -- output ---------------------------------------------------------------

def community_doc(c: Community | None, net: DynamicNetwork) -> dict | None:
    return c.to_dict(net.labels) if c is not None else None


def community_row(c: Community | None, net: DynamicNetwork, **extra) -> dict:
    row = dict(extra)
    if c is None:
        row.update(found=False, size=0, duration=0, start="", end="", score=0.0, vertices="")
    else:
        row.update(found=True, size=c.size, duration=c.duration, start=c.interval[0],
                   end=c.interval[1], score=c.score,
                   vertices=",".join(net.labels[v] for v in sorted(c.vertices)))
    return row


def emit(args, command: str, result, rows: list[dict]) -> None:
    if args.format == "tsv":
        buf = io.StringIO()
        if rows:
            writer = csv.DictWriter(buf, fieldnames=list(rows[0]), delimiter="\t", lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps({"schema": SCHEMA, "command": command, "result": result}, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def params_doc(p: QueryParams, net: DynamicNetwork) -> dict:
    return {"q": net.labels[p.q], "k": p.k, "theta": p.theta, "window": list(p.window), "alpha": p.alpha}


# -- subcommands ----------------------------------------------------------

def cmd_ingest(args) -> int:
    net = load_network(args)
    if args.save:
        net.save(args.save)
    doc = {
        "vertices": net.vertex_count,
        "snapshots": net.num_snapshots,
        "edges": [net[t].edge_count for t in range(net.num_snapshots)],
        "saved": args.save,
    }
    emit(args, "ingest", doc, [{"t": t, "edges": m} for t, m in enumerate(doc["edges"])])
    return 0


def cmd_build_index(args) -> int:
    net = load_network(args)
    start = time.perf_counter()
    idx = wcf_index.build(net, workers=args.workers)
    elapsed = time.perf_counter() - start
    if args.save:
        wcf_index.save(idx, args.save)
    if args.json_export:
        Path(args.json_export).write_text(json.dumps(wcf_index.to_json(idx)), encoding="utf-8")
    doc = {"forests": len(idx.forests), "slots": idx.slot_count(), "k_max": idx.k_max,
           "seconds": elapsed, "saved": args.save}
    emit(args, "build-index", doc, [{"t": t, "k_max": k} for t, k in enumerate(idx.k_max)])
    return 0


def cmd_maintain(args) -> int:
    net = load_network(args)
    idx = load_or_build_index(args, net)
    with open(args.delta, encoding="utf-8") as fh:
        delta = parse_delta(fh, net, args.snapshot)
    report = MaintenanceReport()
    idx, net = apply_delta(idx, net, delta, report=report)
    if args.save:
        wcf_index.save(idx, args.save)
    if args.save_data:
        net.save(args.save_data)
    changes = [
        {"k": k, "vertex": net.labels[v],
         "old": idx.grid[old] if old is not None else None,
         "new": idx.grid[new] if new is not None else None}
        for (k, v), (old, new) in sorted(report.changed.items())
    ]
    doc = {"snapshot": args.snapshot, "updates": len(delta.updates), "changed": changes,
           "rebuilt_k": report.rebuilt_k, "saved": args.save}
    emit(args, "maintain", doc, changes)
    return 0


def cmd_compress(args) -> int:
    idx = wcf_index.load(args.index)
    before = len(wcf_index.to_bytes(idx))
    slots_before = idx.slot_count()
    packed, table = index_compress.compress(idx)
    after = len(wcf_index.to_bytes(packed))
    if args.save:
        wcf_index.save(packed, args.save)
    doc = {"virtual_nodes": len(table), "slots_before": slots_before, "slots_after": packed.slot_count(),
           "bytes_before": before, "bytes_after": after, "saved": args.save}
    emit(args, "compress", doc, [doc])
    return 0


def cmd_query(args, method: str) -> int:
    net = load_network(args)
    params = query_params(args, net)
    stats = SearchStats()
    start = time.perf_counter()
    if method == "eef":
        best = eef_query(net, params, prune=not args.no_prune, stats=stats)
    else:
        idx = load_or_build_index(args, net)
        start = time.perf_counter()
        best = wcf_query(net, idx, params, prune=not args.no_prune, stats=stats)
    elapsed = time.perf_counter() - start
    doc = {"params": params_doc(params, net), "community": community_doc(best, net),
           "stats": dataclasses.asdict(stats), "seconds": elapsed}
    emit(args, f"query-{method}", doc, [community_row(best, net)])
    return 0


def cmd_alpha_sweep(args) -> int:
    net = load_network(args)
    params = query_params(args, net)
    idx = load_or_build_index(args, net)
    alphas = [float(a) for a in args.alphas.split(",")]
    results = alpha_sweep(net, idx, params, alphas)
    doc = {"params": params_doc(params, net),
           "sweep": [{"alpha": a, "community": community_doc(c, net)} for a, c in results]}
    emit(args, "alpha-sweep", doc, [community_row(c, net, alpha=a) for a, c in results])
    return 0


def cmd_metrics(args) -> int:
    net = load_network(args)
    params = query_params(args, net)
    idx = load_or_build_index(args, net)
    best = wcf_query(net, idx, params)
    if best is None:
        raise ParameterError("no community found for these parameters")
    report = evaluate(net, best)
    doc = {"params": params_doc(params, net), "community": community_doc(best, net),
           "quality": report.to_dict()}
    emit(args, "metrics", doc, [dataclasses.asdict(r) for r in report.per_snapshot])
    return 0


def sample_queries(net: DynamicNetwork, window: tuple[int, int], count: int, seed: int) -> list[int]:
    """Query vertices whose core numbers spread evenly over [1, k_max] of the window."""
    best_core: dict[int, int] = {}
    for t in range(window[0], window[1] + 1):
        for v, c in core_decompose(net[t]).items():
            best_core[v] = max(best_core.get(v, 0), c)
    by_core: dict[int, list[int]] = {}
    for v, c in sorted(best_core.items()):
        if c >= 1:
            by_core.setdefault(c, []).append(v)
    if not by_core:
        return []
    rng = random.Random(seed)
    levels = sorted(by_core)
    return [rng.choice(by_core[rng.choice(levels)]) for _ in range(count)]


def _bench_one(job):
    net, idx, params, no_prune = job
    t0 = time.perf_counter()
    a = eef_query(net, params, prune=not no_prune)
    t1 = time.perf_counter()
    b = wcf_query(net, idx, params, prune=not no_prune)
    t2 = time.perf_counter()
    return {
        "q": net.labels[params.q], "k": params.k, "theta": params.theta,
        "eef_ms": 1000 * (t1 - t0), "wcf_ms": 1000 * (t2 - t1),
        "eef_score": a.score if a else 0.0, "wcf_score": b.score if b else 0.0,
        "agree": (a.score if a else 0.0) == (b.score if b else 0.0),
    }


def cmd_bench(args) -> int:
    net = load_network(args)
    window = parse_window(args.window, net)
    k = resolve_k(args.k, net, window)
    t0 = time.perf_counter()
    idx = load_or_build_index(args, net)
    build_s = time.perf_counter() - t0
    queries = sample_queries(net, window, args.queries, args.seed)
    jobs = [(net, idx, QueryParams(q, k, args.theta, window, args.alpha), args.no_prune) for q in queries]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    doc = {
        "seed": args.seed, "k": k, "theta": args.theta, "window": list(window), "alpha": args.alpha,
        "index_seconds": build_s, "queries": rows,
        "mean_eef_ms": sum(r["eef_ms"] for r in rows) / len(rows) if rows else 0.0,
        "mean_wcf_ms": sum(r["wcf_ms"] for r in rows) / len(rows) if rows else 0.0,
    }
    emit(args, "bench", doc, rows)
    return 0 if all(r["agree"] for r in rows) else 1


def random_network(rng: random.Random, max_v: int = 12, max_t: int = 4) -> DynamicNetwork:
    n = rng.randint(3, max_v)
    t_count = rng.randint(1, max_t)
    density = rng.uniform(0.2, 0.8)
    base = {(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < density}
    snaps = []
    for _ in range(t_count):
        snaps.append([(u, v, rng.randint(1, 10) / 10) for u, v in sorted(base) if rng.random() < 0.85])
    return DynamicNetwork.from_edge_lists(snaps, n)


def cmd_oracle_check(args) -> int:
    rng = random.Random(args.seed)
    mismatches = []
    checked = 0
    for trial in range(args.trials):
        net = random_network(rng)
        idx = wcf_index.build(net)
        q = rng.randrange(net.vertex_count)
        for k in (1, 2, 3):
            for theta in (0.0, 0.3, 0.6):
                params = QueryParams(q, k, theta, (0, net.num_snapshots - 1), rng.choice((0.0, 1.0, 2.0)))
                ref = brute_force_query(net, params).best_community
                got = {"eef": eef_query(net, params), "wcf": wcf_query(net, idx, params)}
                checked += 1
                for name, c in got.items():
                    same = (c is None and ref is None) or (
                        c is not None and ref is not None and c.score == ref.score
                        and c.interval == ref.interval and c.vertices == ref.vertices
                    )
                    if not same:
                        mismatches.append({"trial": trial, "method": name, "k": k, "theta": theta,
                                           "q": q, "alpha": params.alpha})
    doc = {"seed": args.seed, "trials": args.trials, "queries": checked, "mismatches": mismatches}
    emit(args, "oracle-check", doc, mismatches or [{"queries": checked, "mismatches": 0}])
    return 1 if mismatches else 0


# -- argument parsing -----------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "tsv"), default="json")
    p.add_argument("--out", help="write the report here instead of stdout")


def _add_data(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="binary network or 'u v t w' edge stream")
    p.add_argument("--snapshots", type=int, help="snapshot count for count partitioning")
    p.add_argument("--partition", choices=("count", "timestamp"), default="timestamp")
    p.add_argument("--weight-mode", choices=("given", "frequency"), default="given")
    p.add_argument("--no-normalize", action="store_true")


def _add_query(p: argparse.ArgumentParser, need_q: bool = True) -> None:
    if need_q:
        p.add_argument("--q", required=True, help="query vertex label")
    p.add_argument("--k", default=DEFAULT_K, help="integer, or P%% of the window's largest core number")
    p.add_argument("--theta", type=float, default=DEFAULT_THETA)
    p.add_argument("--window", help="START:END snapshot indices (inclusive)")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--no-prune", action="store_true", help="disable all bound-based pruning")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crcsearch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an edge stream into a binary network")
    _add_data(p)
    p.add_argument("--save")
    _add_common(p)

    p = sub.add_parser("build-index", help="build the threshold-forest index")
    _add_data(p)
    p.add_argument("--save")
    p.add_argument("--json-export", help="also write a JSON debug dump of the index")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("maintain", help="apply an update file to one snapshot")
    _add_data(p)
    p.add_argument("--index")
    p.add_argument("--delta", required=True)
    p.add_argument("--snapshot", type=int, required=True)
    p.add_argument("--save")
    p.add_argument("--save-data")
    _add_common(p)

    p = sub.add_parser("compress", help="share repeated tree nodes")
    p.add_argument("--index", required=True)
    p.add_argument("--save")
    _add_common(p)

    for name, help_text in (("query-eef", "online search"), ("query-wcf", "index-based search")):
        p = sub.add_parser(name, help=help_text)
        _add_data(p)
        _add_query(p)
        if name == "query-wcf":
            p.add_argument("--index")
        _add_common(p)

    p = sub.add_parser("alpha-sweep", help="best community for several alpha values")
    _add_data(p)
    _add_query(p)
    p.add_argument("--index")
    p.add_argument("--alphas", default="0,0.5,1,2,4,6")
    _add_common(p)

    p = sub.add_parser("metrics", help="quality measures of the best community")
    _add_data(p)
    _add_query(p)
    p.add_argument("--index")
    _add_common(p)

    p = sub.add_parser("bench", help="time both searches over sampled query vertices")
    _add_data(p)
    _add_query(p, need_q=False)
    p.add_argument("--index")
    p.add_argument("--queries", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)

    p = sub.add_parser("oracle-check", help="compare both searches with brute force")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    return parser


HANDLERS = {
    "ingest": cmd_ingest,
    "build-index": cmd_build_index,
    "maintain": cmd_maintain,
    "compress": cmd_compress,
    "query-eef": lambda a: cmd_query(a, "eef"),
    "query-wcf": lambda a: cmd_query(a, "wcf"),
    "alpha-sweep": cmd_alpha_sweep,
    "metrics": cmd_metrics,
    "bench": cmd_bench,
    "oracle-check": cmd_oracle_check,
}


def run(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("CRCSEARCH_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return HANDLERS[args.command](args)
    except (CrcError, OSError) as exc:
        print(f"crcsearch {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
