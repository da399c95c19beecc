"""Command-line interface for scripted pipelines and batch runs.

Exit codes: 0 success, 1 I/O or parse failure, 2 precondition violation.
All randomness sits behind --seed; flags are the only configuration source.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import sys
from fractions import Fraction

import numpy as np

from . import diffusion, embed, graph as graphmod, imagegraph, improve
from .fracprog import SeedRejectedError
from .graph import GraphFormatError

EXIT_OK = 0
EXIT_IO = 1
EXIT_PRECONDITION = 2


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_graph(path: str, fold_self_loops: bool = False):
    try:
        with open(path) as handle:
            return graphmod.load_edge_list(handle, fold_self_loops=fold_self_loops)
    except OSError as exc:
        raise CliError(f"cannot read graph {path}: {exc}", EXIT_IO) from exc
    except GraphFormatError as exc:
        raise CliError(f"bad graph {path}: {exc}", EXIT_IO) from exc


def _load_seeds(args, g):
    try:
        if args.seed_ids:
            labels = [int(tok) for tok in args.seed_ids.replace(",", " ").split()]
            return g.node_set([g.from_label(l) for l in labels])
        with open(args.seeds) as handle:
            return graphmod.load_node_set(handle, g)
    except OSError as exc:
        raise CliError(f"cannot read seeds {args.seeds}: {exc}", EXIT_IO) from exc
    except (GraphFormatError, KeyError, ValueError) as exc:
        raise CliError(f"bad seed set: {exc}", EXIT_IO) from exc


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise CliError(f"bad numeric value {text!r}: {exc}", EXIT_IO) from exc


def _emit(payload: str, output: str | None):
    if output:
        try:
            with open(output, "w") as handle:
                handle.write(payload)
                if not payload.endswith("\n"):
                    handle.write("\n")
        except OSError as exc:
            raise CliError(f"cannot write {output}: {exc}", EXIT_IO) from exc
    else:
        print(payload)


def _run_improve_once(g, seeds, args):
    delta = _parse_rational(args.delta) if args.delta is not None else Fraction(1)
    eps = float(args.eps) if args.eps is not None else None
    kwargs = dict(mode=args.mode, eps=eps, allow_large_seed=args.allow_large_seed)
    if args.alg == "mqi":
        return improve.mqi(g, seeds, **kwargs)
    if args.alg == "fi":
        return improve.flow_improve(g, seeds, **kwargs)
    return improve.local_flow_improve(g, seeds, delta_param=delta, **kwargs)


def cmd_improve(args) -> int:
    g = _load_graph(args.graph, args.fold_self_loops)
    seeds = _load_seeds(args, g)
    if args.eps is not None and args.mode != "bisection":
        raise CliError("--eps only applies to --mode bisection", EXIT_IO)
    if args.delta is not None and args.alg != "lfi":
        raise CliError("--delta only applies to --alg lfi", EXIT_IO)
    try:
        result = _run_improve_once(g, seeds, args)
    except SeedRejectedError as exc:
        raise CliError(f"seed rejected: {exc}", EXIT_PRECONDITION) from exc
    _emit(json.dumps(result.to_json_dict(g), indent=2), args.output)
    return EXIT_OK


def cmd_metrics(args) -> int:
    g = _load_graph(args.graph, args.fold_self_loops)
    seeds = _load_seeds(args, g)
    try:
        record = graphmod.metrics_json(g, seeds)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    _emit(json.dumps(record, indent=2), args.output)
    return EXIT_OK


def cmd_ppr(args) -> int:
    g = _load_graph(args.graph, args.fold_self_loops)
    seeds = _load_seeds(args, g)
    try:
        scores = diffusion.seeded_pagerank(g, seeds, args.alpha, args.rho)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    lines = [f"{g.to_label(v)} {scores[v]:.12g}" for v in scores.support()]
    _emit("\n".join(lines), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    g = _load_graph(args.graph, args.fold_self_loops)
    seeds = _load_seeds(args, g)
    try:
        scores = diffusion.seeded_pagerank(g, seeds, args.alpha, args.rho)
        node_set, profile = diffusion.sweep_cut(g, scores)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    record = {
        "set": [g.to_label(v) for v in node_set],
        "cut": profile.cut,
        "vol": profile.volume,
        "size": profile.size,
        "conductance": profile.conductance,
    }
    _emit(json.dumps(record, indent=2), args.output)
    return EXIT_OK


def _improver_for(name: str, delta: Fraction):
    if name == "mqi":
        return lambda g, s: improve.mqi(g, s).set
    if name == "fi":
        return lambda g, s: improve.flow_improve(g, s).set
    return lambda g, s: improve.local_flow_improve(g, s, delta_param=delta).set


def cmd_embed(args) -> int:
    g = _load_graph(args.graph, args.fold_self_loops)
    seeds = _load_seeds(args, g)
    params = embed.EmbeddingParams(samples=args.samples, subset_size=args.subset_size,
                                   hops=args.hops, dims=args.dims)
    delta = _parse_rational(args.delta) if args.delta is not None else Fraction(1)
    spectral = None
    if args.spectral:
        spectral = lambda gg, ss: diffusion.seeded_pagerank(gg, ss, args.alpha, args.rho)
    try:
        result = embed.flow_coordinates(g, seeds, _improver_for(args.alg, delta), params,
                                        rng_seed=args.seed, spectral_analog=spectral)
    except (ValueError, SeedRejectedError) as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc
    coords = embed.rank_order(result.coordinates) if args.rank_order else result.coordinates
    lines = ["node," + ",".join(f"c{j + 1}" for j in range(coords.shape[1]))]
    for v in range(coords.shape[0]):
        lines.append(f"{g.to_label(v)}," + ",".join(f"{coords[v, j]:.12g}" for j in range(coords.shape[1])))
    _emit("\n".join(lines), args.output)
    return EXIT_OK


def cmd_img2graph(args) -> int:
    try:
        from PIL import Image
    except ImportError as exc:  # pragma: no cover - Pillow is a hard dependency
        raise CliError(f"Pillow unavailable: {exc}", EXIT_IO) from exc
    try:
        with Image.open(args.image) as img:
            pixels = np.asarray(img, dtype=np.float64) / 255.0
    except OSError as exc:
        raise CliError(f"cannot read image {args.image}: {exc}", EXIT_IO) from exc
    try:
        g, pmap = imagegraph.image_to_graph(pixels, args.radius2, args.sigma_d2, args.sigma_i2)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_PRECONDITION) from exc

    edge_lines = []
    for u in range(g.node_count):
        nbrs, wts = g.neighbors(u)
        for v, w in zip(nbrs, wts):
            if u < v:
                edge_lines.append(f"{u} {int(v)} {w:.12g}")
    _emit("\n".join(edge_lines), args.out_edges)
    map_lines = [f"{node} {r} {c}" for node in range(g.node_count) for r, c in [pmap.pixel_of(node)]]
    _emit("\n".join(map_lines), args.out_map)
    return EXIT_OK


_BATCH_STATE: dict = {}


def _batch_init(graph, alg, delta, allow_large_seed):
    _BATCH_STATE.update(graph=graph, alg=alg, delta=delta, allow=allow_large_seed)


def _batch_run_one(member_list):
    g = _BATCH_STATE["graph"]
    seeds = g.node_set(member_list)
    try:
        if _BATCH_STATE["alg"] == "mqi":
            result = improve.mqi(g, seeds, allow_large_seed=_BATCH_STATE["allow"])
        elif _BATCH_STATE["alg"] == "fi":
            result = improve.flow_improve(g, seeds, allow_large_seed=_BATCH_STATE["allow"])
        else:
            result = improve.local_flow_improve(g, seeds, delta_param=_BATCH_STATE["delta"],
                                                allow_large_seed=_BATCH_STATE["allow"])
        return result.to_json_dict(g)
    except SeedRejectedError as exc:
        return {"error": str(exc), "set": [g.to_label(v) for v in seeds]}


def cmd_batch(args) -> int:
    g = _load_graph(args.graph, args.fold_self_loops)
    try:
        with open(args.seeds_file) as handle:
            seed_lines = [line.split("#", 1)[0].split() for line in handle]
    except OSError as exc:
        raise CliError(f"cannot read {args.seeds_file}: {exc}", EXIT_IO) from exc
    seed_sets = []
    for lineno, tokens in enumerate(seed_lines, start=1):
        if not tokens:
            continue
        try:
            seed_sets.append([g.from_label(int(t)) for t in tokens])
        except (ValueError, KeyError) as exc:
            raise CliError(f"line {lineno}: bad seed set: {exc}", EXIT_IO) from exc
    if not seed_sets:
        raise CliError("no seed sets in input", EXIT_IO)

    delta = _parse_rational(args.delta) if args.delta is not None else Fraction(1)
    _batch_init(g, args.alg, delta, args.allow_large_seed)
    if args.threads > 1 and "fork" in multiprocessing.get_all_start_methods():
        # Workers inherit the immutable graph via fork; imap keeps input order.
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(processes=args.threads) as pool:
            records = list(pool.imap(_batch_run_one, seed_sets))
    else:
        records = [_batch_run_one(s) for s in seed_sets]
    _emit("\n".join(json.dumps(r) for r in records), args.output)
    return EXIT_OK


def _add_common(parser, seeds_required=True):
    parser.add_argument("--graph", "-g", required=True, help="edge-list file: 'u v [w]' per line")
    parser.add_argument("--fold-self-loops", action="store_true",
                        help="fold self-loop weight into the degree instead of dropping it")
    group = parser.add_mutually_exclusive_group(required=seeds_required)
    group.add_argument("--seeds", "-s", help="node-set file, one id per line")
    group.add_argument("--seed-ids", help="inline comma/space separated node ids")
    parser.add_argument("--output", "-o", help="write result here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowclust",
                                     description="Flow-based cluster improvement toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("improve", help="improve a seed set with mqi/fi/lfi")
    _add_common(p)
    p.add_argument("--alg", choices=["mqi", "fi", "lfi"], required=True)
    p.add_argument("--delta", help="locality parameter for lfi (rational, e.g. 0.1)")
    p.add_argument("--mode", choices=["dinkelbach", "bisection"], default="dinkelbach")
    p.add_argument("--eps", type=float, help="bisection relative tolerance")
    p.add_argument("--allow-large-seed", action="store_true",
                   help="permit seeds above half the graph volume")
    p.set_defaults(func=cmd_improve)

    p = sub.add_parser("metrics", help="cut/volume/conductance metrics of a set")
    _add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("ppr", help="seeded PageRank scores ('node score' lines)")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.15, help="teleport probability")
    p.add_argument("--rho", type=float, default=1e-6, help="push tolerance per unit degree")
    p.set_defaults(func=cmd_ppr)

    p = sub.add_parser("sweep", help="seeded PageRank followed by a sweep cut")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--rho", type=float, default=1e-6)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("embed", help="flow-based coordinates as CSV")
    _add_common(p)
    p.add_argument("--alg", choices=["mqi", "fi", "lfi"], default="lfi")
    p.add_argument("--delta", help="lfi locality parameter")
    p.add_argument("--samples", "-N", type=int, default=500)
    p.add_argument("--subset-size", "-k", type=int, default=1)
    p.add_argument("--hops", "-d", type=int, default=2)
    p.add_argument("--dims", "-c", type=int, default=2)
    p.add_argument("--seed", type=int, default=0, help="rng seed")
    p.add_argument("--rank-order", action="store_true",
                   help="emit per-column sorted ranks instead of raw coordinates")
    p.add_argument("--spectral", action="store_true",
                   help="use log-scaled seeded PageRank columns instead of flow sets")
    p.add_argument("--alpha", type=float, default=0.15)
    p.add_argument("--rho", type=float, default=1e-6)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("img2graph", help="convert an image to an edge list + pixel map")
    p.add_argument("--image", required=True, help="PNG/PGM image file")
    p.add_argument("--radius2", type=float, required=True, help="squared-distance edge gate")
    p.add_argument("--sigma-d2", type=float, required=True, dest="sigma_d2",
                   help="spatial kernel variance")
    p.add_argument("--sigma-i2", type=float, required=True, dest="sigma_i2",
                   help="color kernel variance")
    p.add_argument("--out-edges", required=True)
    p.add_argument("--out-map", required=True, help="written as 'nodeid row col' lines")
    p.set_defaults(func=cmd_img2graph)

    p = sub.add_parser("batch", help="improve many seed sets; JSON-lines output")
    p.add_argument("--graph", "-g", required=True)
    p.add_argument("--fold-self-loops", action="store_true")
    p.add_argument("--seeds-file", required=True, help="one whitespace-separated set per line")
    p.add_argument("--alg", choices=["mqi", "fi", "lfi"], required=True)
    p.add_argument("--delta", help="lfi locality parameter")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--allow-large-seed", action="store_true")
    p.add_argument("--output", "-o")
    p.add_argument("--seed", type=int, default=0, help="rng seed (unused; reserved)")
    p.set_defaults(func=cmd_batch)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"flowclust: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
