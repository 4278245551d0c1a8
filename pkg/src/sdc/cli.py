"""Command-line entry points: cluster, inject, eval, serve."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
import webbrowser

import numpy as np

from .dataset import (
    DatasetError,
    DegenerateDataError,
    MissingDataset,
    inject_mar,
    load_csv,
    read_labels_csv,
    write_labels_csv,
)
from .metrics import ari, nmi, purity
from .partition import run_sdc
from .service import make_server

log = logging.getLogger("sdc")

EXIT_USAGE = 1
EXIT_DEGENERATE = 2


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 on usage errors (2 is reserved for degenerate data)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _setup_logging():
    level = os.environ.get("SDC_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def _load(args) -> MissingDataset:
    return load_csv(
        args.input,
        missing_marker=args.missing_marker,
        label_column=args.label_column,
        has_header=args.header,
    )


def _dump_graphs(pipeline, directory: str):
    os.makedirs(directory, exist_ok=True)
    for graph in pipeline.graphs:
        if graph is None:
            continue
        path = os.path.join(directory, f"graph_dim_{graph.dim_index}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(graph.to_records(), fh)
    log.info("decision graphs written to %s", directory)


def cmd_cluster(args) -> int:
    ds = _load(args)
    if args.mode == "auto":
        pipes: list = []
        partition = run_sdc(ds, normalize=not args.no_normalize,
                            enhance=not args.no_enhance, pipeline_out=pipes)
        pipeline = pipes[0]
        if all(g is None for g in pipeline.graphs):
            raise DegenerateDataError("no dimension has two observed values")
        if args.graphs_dir:
            _dump_graphs(pipeline, args.graphs_dir)
        write_labels_csv(args.output, partition.assignments)
        print(f"wrote {args.output}: {partition.cluster_count} clusters over "
              f"{len(partition)} objects")
        return 0

    # interactive: host the session and wait for a human (or script) to finish it
    server = make_server(args.port, static_dir=args.static_dir)
    handler = server.RequestHandlerClass
    session = handler.store.create(ds, normalize=not args.no_normalize,
                                   enhance=not args.no_enhance)
    if all(g is None for g in session.pipeline.graphs):
        raise DegenerateDataError("no dimension has two observed values")
    host, port = server.server_address
    url = f"http://{host}:{port}/?session={session.session_id}"
    print(f"session {session.session_id} waiting at {url}", flush=True)
    import threading

    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    if args.open_browser:
        webbrowser.open(url)
    try:
        while session.status == "awaiting_thresholds":
            time.sleep(0.2)
    except KeyboardInterrupt:
        print("aborted", file=sys.stderr)
        return EXIT_USAGE
    finally:
        server.shutdown()
    if session.status != "finished":
        print("session aborted before finishing", file=sys.stderr)
        return EXIT_USAGE
    partition = session.pipeline.result()
    if args.graphs_dir:
        _dump_graphs(session.pipeline, args.graphs_dir)
    write_labels_csv(args.output, partition.assignments)
    print(f"wrote {args.output}: {partition.cluster_count} clusters over "
          f"{len(partition)} objects")
    return 0


def cmd_inject(args) -> int:
    ds = _load(args)
    out = inject_mar(ds, args.rate, args.seed)
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if args.header:
            cols = [f"f{j}" for j in range(out.dim_count)]
            if out.truth_labels is not None:
                cols.append("label")
            writer.writerow(cols)
        for i in range(out.object_count):
            row = ["" if np.isnan(v) else repr(float(v)) for v in out.cells[i]]
            if out.truth_labels is not None:
                row.append(out.truth_labels[i])
            writer.writerow(row)
    kept = int(np.isnan(out.cells).sum())
    print(f"wrote {args.output}: {kept} of {out.cells.size} cells removed")
    return 0


def cmd_eval(args) -> int:
    pred = read_labels_csv(args.pred)
    truth = read_labels_csv(args.truth)
    if set(pred) != set(truth):
        raise DatasetError("prediction and truth files cover different object ids")
    print(json.dumps({
        "nmi": nmi(pred, truth),
        "ari": ari(pred, truth),
        "purity": purity(pred, truth),
    }))
    return 0


def cmd_serve(args) -> int:
    server = make_server(args.port, static_dir=args.static_dir,
                         ttl_seconds=args.ttl)
    host, port = server.server_address
    print(f"sdc service listening on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _add_input_flags(p: argparse.ArgumentParser):
    p.add_argument("--input", required=True, help="input CSV file")
    p.add_argument("--missing-marker", default="",
                   help="cell text marking a missing value (default: empty)")
    p.add_argument("--header", action="store_true",
                   help="the first CSV row is a header")
    p.add_argument("--label-column", default=None,
                   help="column name (with --header) holding ground-truth labels")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdc",
                     description="Parameter-free clustering for missing datasets")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("cluster", help="cluster a dataset")
    _add_input_flags(p)
    p.add_argument("--mode", choices=("auto", "interactive"), default="auto")
    p.add_argument("--no-normalize", action="store_true",
                   help="skip min-max normalization")
    p.add_argument("--no-enhance", action="store_true",
                   help="skip the gravity enhancement pass")
    p.add_argument("--output", default="labels.csv", help="labels CSV to write")
    p.add_argument("--graphs-dir", default=None,
                   help="dump per-dimension decision graphs as JSON here")
    p.add_argument("--port", type=int, default=0,
                   help="interactive mode: port to serve on (0 = ephemeral)")
    p.add_argument("--static-dir", default=None,
                   help="interactive mode: serve this UI directory")
    p.add_argument("--open-browser", action="store_true",
                   help="interactive mode: open the session in a browser")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("inject", help="remove cells at random to build a missing dataset")
    _add_input_flags(p)
    p.add_argument("--rate", type=float, required=True,
                   help="independent removal probability per cell, in [0,1)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("eval", help="score predicted labels against ground truth")
    p.add_argument("--pred", required=True, help="object_id,cluster_id CSV")
    p.add_argument("--truth", required=True, help="object_id,label CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the interactive HTTP service")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--static-dir", default=None, help="UI assets to serve")
    p.add_argument("--ttl", type=float, default=3600.0,
                   help="idle session lifetime in seconds")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DegenerateDataError as err:
        print(f"sdc: degenerate dataset: {err}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DatasetError, OSError, ValueError) as err:
        print(f"sdc: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
