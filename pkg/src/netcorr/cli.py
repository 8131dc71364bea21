"""Command-line entry point: ``netcorr <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import dataio, report, stats, synth
from .errors import InputError, NetcorrError
from .graph import Graph, NodeData, binary_adjacency, row_normalized
from .inference import (
    CONDITIONAL,
    CONFIGURATION,
    DATA,
    NullSpec,
    conditional_permutation_local,
    configuration_null,
    configuration_null_local,
    permutation_null,
)

logger = logging.getLogger("netcorr")

CACHE_ENV = "NETCORR_CACHE_DIR"
EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and not np.isfinite(v)):
        return "NA"
    return f"{v:.6g}"


# -- shared plumbing ---------------------------------------------------------

def _load(args) -> tuple[Graph, NodeData]:
    g = dataio.read_edge_list(args.graph)
    x = dataio.read_node_values(args.values, args.column, g, log10=args.log10)
    return g, x


def _weights(g: Graph, args, kind: str | None = None):
    kind = kind or args.weights
    if kind == "binary":
        return binary_adjacency(g)
    return row_normalized(g, self_loops=args.self_loops)


def _nulls(args) -> list[str]:
    return {"data": [DATA], "config": [CONFIGURATION], "both": [DATA, CONFIGURATION], "none": []}[args.null]


def _spec(args, kind) -> NullSpec:
    return NullSpec(kind=kind, replicates=args.nperm, seed=args.seed,
                    swaps_per_sample=args.swaps, tail=args.tail)


_COL = {DATA: "p_d", CONDITIONAL: "p_d", CONFIGURATION: "p_c"}


def _metadata(args, extra=None) -> dict:
    inputs = {}
    for name in ("graph", "values"):
        p = getattr(args, name, None)
        if p:
            inputs[name] = {"path": str(p), "digest": dataio.file_digest(p)}
    md = {"command": args.command, "inputs": inputs, "seed": args.seed,
          "replicates": getattr(args, "nperm", None), "alpha": getattr(args, "alpha", None)}
    if getattr(args, "column", None):
        md["column"] = args.column
        md["log10"] = bool(getattr(args, "log10", False))
    if getattr(args, "timestamp", False):
        md["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    md.update(extra or {})
    return md


def _null_meta(spec: NullSpec, g: Graph) -> dict:
    md = {"kind": spec.kind, "seed": spec.seed, "replicates": spec.replicates, "tail": spec.tail}
    if spec.kind == CONFIGURATION:
        md["swaps_per_sample"] = spec.swaps_for(g)
    return md


def _emit(doc: dataio.ResultDocument, args) -> None:
    if args.out:
        dataio.write_results(doc, args.out, args.format)


# -- subcommands -------------------------------------------------------------

_GLOBAL_STATS = {
    "moran": ("I", stats.global_moran),
    "geary": ("C", stats.geary_c),
    "getis": ("G", stats.getis_ord_global),
    "assort": ("r", stats.assortativity_continuous),
    "coscia": ("rho_G", stats.coscia_rho),
}


def cmd_global(args) -> int:
    g, x = _load(args)
    symbol, fn = _GLOBAL_STATS[args.stat]
    y = None
    if args.stat == "coscia":
        if not args.column2:
            raise InputError("--stat coscia needs --column2")
        y = dataio.read_node_values(args.values, args.column2, g, log10=args.log10)
    W = g if args.stat == "assort" else _weights(g, args)
    value = fn(W, x) if y is None else fn(W, x, y)
    record = {"statistic": args.stat, "value": value}
    nulls = {}
    for kind in _nulls(args):
        spec = _spec(args, kind)
        if kind == DATA:
            res = permutation_null(fn, W, x, y, spec, n_jobs=args.jobs)
        else:
            wkind = None if args.stat == "assort" else W.kind
            res = configuration_null(fn, g, x, y, spec, kind=wkind, n_jobs=args.jobs)
        col = _COL[kind]
        record[col] = res.p_value
        record[f"null_mean_{col[-1]}"] = res.null_mean
        record[f"null_sd_{col[-1]}"] = res.null_sd
        nulls[col] = _null_meta(spec, g)
    wk = "graph" if args.stat == "assort" else W.kind
    doc = dataio.ResultDocument(args.stat, "global", [record], nulls, _metadata(args, {"weights": wk}))
    parts = [f"{symbol} = {_fmt(value)}"] + [f"{c} = {_fmt(record[c])}" for c in ("p_d", "p_c") if c in record]
    print("  ".join(parts))
    _emit(doc, args)
    return EXIT_OK


def cmd_local(args) -> int:
    g, x = _load(args)
    W = row_normalized(g, self_loops=args.self_loops)
    values = stats.local_moran(W, x)
    cols = {}
    nulls = {}
    for kind in _nulls(args):
        if kind == DATA:
            spec = _spec(args, CONDITIONAL)
            res = conditional_permutation_local(W, x, spec, n_jobs=args.jobs)
        else:
            spec = _spec(args, CONFIGURATION)
            res = configuration_null_local(g, x, spec, kind=W.kind, n_jobs=args.jobs)
        col = _COL[kind]
        cols[col] = [None if r is None else r.p_value for r in res]
        nulls[col] = _null_meta(spec, g)
    scatter = stats.moran_scatter(W, x, labels=g.labels)
    quad = dict(zip(scatter.labels, scatter.quadrant))
    records = []
    for i, lab in enumerate(g.labels):
        rec = {"label": str(lab), "value": None if np.isnan(values[i]) else float(values[i]),
               "quadrant": quad.get(lab, "")}
        for col, ps in cols.items():
            rec[col] = ps[i]
        records.append(rec)
    doc = dataio.ResultDocument("local_moran", "local", records, nulls, _metadata(args, {"weights": W.kind}))
    header = ["label", "I_i", "quadrant", *cols]
    print("\t".join(header))
    for rec in records:
        print("\t".join([rec["label"], _fmt(rec["value"]), rec["quadrant"], *(_fmt(rec[c]) for c in cols)]))
    if args.histogram:
        ps = cols.get("p_d") or cols.get("p_c") or [None] * g.n_nodes
        report.render_local_histogram(values, ps, args.histogram, alpha=args.alpha)
    _emit(doc, args)
    return EXIT_OK


def cmd_bivar(args) -> int:
    from scipy.stats import pearsonr

    g = dataio.read_edge_list(args.graph)
    W = row_normalized(g, self_loops=not args.no_self_loops)
    x = dataio.read_node_values(args.values, args.x, g, log10=args.log10)
    records = []
    nulls = {}
    print("\t".join(["x", "y", "pearson", "p_pearson", "L", *(_COL[k] for k in _nulls(args))]))
    for yname in args.y.split(","):
        yname = yname.strip()
        y = dataio.read_node_values(args.values, yname, g, log10=args.log10)
        both = x.mask & y.mask
        r, p_r = pearsonr(x.values[both], y.values[both])
        L = stats.lee_l(W, x, y)
        rec = {"x": args.x, "y": yname, "pearson": float(r), "p_pearson": float(p_r), "L": L}
        for kind in _nulls(args):
            spec = _spec(args, kind)
            if kind == DATA:
                res = permutation_null(stats.lee_l, W, x, y, spec, n_jobs=args.jobs)
            else:
                res = configuration_null(stats.lee_l, g, x, y, spec, kind=W.kind, n_jobs=args.jobs)
            rec[_COL[kind]] = res.p_value
            nulls[_COL[kind]] = _null_meta(spec, g)
        records.append(rec)
        print("\t".join([args.x, yname, *(_fmt(rec[k]) for k in ("pearson", "p_pearson", "L")),
                         *(_fmt(rec[_COL[k]]) for k in _nulls(args))]))
    md = _metadata(args, {"weights": W.kind, "x": args.x, "y": args.y})
    doc = dataio.ResultDocument("lee_l", "bivariate", records, nulls, md)
    _emit(doc, args)
    return EXIT_OK


def cmd_correlogram(args) -> int:
    g, x = _load(args)
    kinds = _nulls(args)
    per_kind = {}
    for kind in kinds:
        per_kind[kind] = stats.correlogram(g, x, args.dmax, _spec(args, kind),
                                           normalize=args.normalize, n_jobs=args.jobs)
    points = per_kind[kinds[0]] if kinds else stats.correlogram(g, x, args.dmax, normalize=args.normalize)
    records = []
    print("\t".join(["d", "I(d)", "|W(d)|", *(_COL[k] for k in kinds)]))
    for k, pt in enumerate(points):
        rec = {"d": pt.d, "value": pt.value, "total_weight": pt.total_weight}
        for kind in kinds:
            rec[_COL[kind]] = per_kind[kind][k].p_value
        records.append(rec)
        print("\t".join([str(pt.d), _fmt(pt.value), _fmt(pt.total_weight), *(_fmt(rec[_COL[q]]) for q in kinds)]))
    nulls = {_COL[k]: _null_meta(_spec(args, k), g) for k in kinds}
    md = _metadata(args, {"weights": "distance-row" if args.normalize else "distance", "dmax": args.dmax})
    _emit(dataio.ResultDocument("moran_correlogram", "correlogram", records, nulls, md), args)
    if args.figure:
        report.render_correlogram(points, args.figure, alpha=args.alpha)
    return EXIT_OK


def cmd_scatter(args) -> int:
    g, x = _load(args)
    W = row_normalized(g, self_loops=args.self_loops)
    sc = stats.moran_scatter(W, x, labels=g.labels)
    flags = sc.outliers(args.outliers) if args.outliers is not None else np.zeros(len(sc), dtype=bool)
    records = []
    print(f"slope = {_fmt(sc.slope)}")
    print("\t".join(["label", "z", "lag", "quadrant", "outlier"]))
    for lab, zi, li, q, f in zip(sc.labels, sc.z, sc.lagged, sc.quadrant, flags):
        records.append({"label": str(lab), "z": float(zi), "lag": float(li), "quadrant": q, "outlier": int(f)})
        print("\t".join([str(lab), _fmt(zi), _fmt(li), q, str(int(f))]))
    md = _metadata(args, {"weights": W.kind, "slope": sc.slope, "outliers_k": args.outliers})
    _emit(dataio.ResultDocument("moran_scatter", "local", records, {}, md), args)
    if args.figure:
        report.render_scatter(sc, args.figure, outliers_k=args.outliers)
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    blocks = None
    if args.kind == "karate":
        g = synth.karate()
    elif args.kind == "er":
        g = synth.er_graph(args.n, args.p, seed=args.seed)
    else:
        g, blocks = synth.planted_partition(args.n, args.blocks, args.p_in, args.p_out, seed=args.seed)
    dataio.write_edge_list(g, out / "edges.txt")
    print(f"wrote {out / 'edges.txt'}: {g.n_nodes} nodes, {g.n_edges} edges")
    if args.steps is not None:
        src = args.source if args.source is not None else str(g.labels[0])
        try:
            source = g.index(src)
        except InputError:
            source = g.index(int(src))
        x = synth.value_propagation(g, synth.PropagationSpec(source, args.steps, args.sigma, args.seed))
        import csv

        with open(out / "values.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["label", "x"] + (["block"] if blocks is not None else []))
            for i, lab in enumerate(g.labels):
                w.writerow([lab, repr(float(x.values[i]))] + ([int(blocks[i])] if blocks is not None else []))
        print(f"wrote {out / 'values.csv'}")
    return EXIT_OK


def cmd_wiki(args) -> int:
    from . import wiki

    cache = args.cache_dir or os.environ.get(CACHE_ENV)
    if not cache:
        raise InputError(f"--cache-dir or ${CACHE_ENV} is required")
    client = wiki.WikiClient(cache, user_agent=args.user_agent, rate=args.rate,
                             offline=args.offline, seed=args.seed)
    net = wiki.build_ego_minus_ego(client, args.seed_page, max_workers=args.jobs)
    records = wiki.fetch_metrics(client, net.members, args.month, max_workers=args.jobs)
    paths = wiki.write_dataset(net, records, args.out_dir)
    g = net.graph
    print(f"{net.seed}: {len(net.members)} member pages, {g.n_edges} edges, "
          f"{len(net.dropped)} red links dropped, {len(net.failures)} fetch failures")
    for name, p in paths.items():
        print(f"wrote {p}")
    logger.info("network requests issued: %d", client.network_requests)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _common(p, values=True):
    p.add_argument("--graph", required=True, help="edge list file")
    if values:
        p.add_argument("--values", required=True, help="CSV with a label column and value columns")
        p.add_argument("--column", required=True, help="value column to analyse")
    p.add_argument("--log10", action="store_true", help="analyse log10 of the values; non-positive values masked")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.01, help="highlight threshold (display only)")
    p.add_argument("--out", help="write the result document here")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--timestamp", action="store_true", help="record generation time in the result metadata")


def _null_flags(p, default="data"):
    p.add_argument("--null", choices=("data", "config", "both", "none"), default=default)
    p.add_argument("--nperm", type=int, default=999, help="null replicates")
    p.add_argument("--swaps", type=int, default=None, help="swaps per configuration sample (default 10*E)")
    p.add_argument("--tail", choices=("upper", "lower", "two-sided"), default="upper")
    p.add_argument("--jobs", type=int, default=1, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netcorr", description="Autocorrelation and correlation of node values on networks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("global", help="global statistic with permutation / configuration p-values")
    _common(p)
    _null_flags(p)
    p.add_argument("--stat", choices=tuple(_GLOBAL_STATS), default="moran")
    p.add_argument("--column2", help="second column (coscia)")
    p.add_argument("--weights", choices=("row", "binary"), default="row")
    p.add_argument("--self-loops", action="store_true")
    p.set_defaults(func=cmd_global)

    p = sub.add_parser("local", help="node Moran indices with conditional / configuration p-values")
    _common(p)
    _null_flags(p)
    p.add_argument("--self-loops", action="store_true")
    p.add_argument("--histogram", help="write an SVG histogram of I_i here")
    p.set_defaults(func=cmd_local)

    p = sub.add_parser("bivar", help="Lee's L and Pearson correlation")
    _common(p, values=False)
    _null_flags(p, default="both")
    p.add_argument("--values", required=True)
    p.add_argument("--x", required=True, help="first column")
    p.add_argument("--y", required=True, help="second column, or several separated by commas")
    p.add_argument("--no-self-loops", action="store_true", help="use W without unit diagonal")
    p.set_defaults(func=cmd_bivar)

    p = sub.add_parser("correlogram", help="Moran correlogram over distance classes")
    _common(p)
    _null_flags(p)
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--normalize", action="store_true", help="row-normalize distance classes")
    p.add_argument("--figure", help="write an SVG correlogram here")
    p.set_defaults(func=cmd_correlogram)

    p = sub.add_parser("scatter", help="Moran scatter table and figure")
    _common(p)
    p.add_argument("--self-loops", action="store_true")
    p.add_argument("--outliers", type=float, default=None, metavar="K",
                   help="flag points with regression residual beyond K residual SDs")
    p.add_argument("--figure", help="write an SVG scatter plot here")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("synth", help="generate a graph and propagation data")
    p.add_argument("--kind", choices=("er", "planted", "karate"), required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--p", type=float, default=0.05)
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--p-in", type=float, default=0.3)
    p.add_argument("--p-out", type=float, default=0.01)
    p.add_argument("--source", help="source node label (default: first node)")
    p.add_argument("--steps", type=int, default=None, help="propagation rounds; omit for graph only")
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("wiki", help="build a Wikipedia EgoMinusEgo network and page metrics")
    p.add_argument("--seed-page", required=True)
    p.add_argument("--month", required=True, help="YYYY-MM")
    p.add_argument("--cache-dir", default=None, help=f"response cache (default ${CACHE_ENV})")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--user-agent", default=None)
    p.add_argument("--offline", action="store_true", help="fail on cache misses instead of fetching")
    p.add_argument("--rate", type=float, default=10.0, help="max requests per second")
    p.add_argument("--jobs", type=int, default=4)
    p.add_argument("--seed", type=int, default=0, help="seed for retry jitter")
    p.set_defaults(func=cmd_wiki)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "user_agent", "unset") is None:
        from .wiki import DEFAULT_USER_AGENT

        args.user_agent = DEFAULT_USER_AGENT
    try:
        return args.func(args)
    except (InputError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NetcorrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
