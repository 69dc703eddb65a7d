"""Command-line interface.

Subcommands:

    evaluate   survey inputs (dyad CSV, or node CSV + edge list) -> reports
    table      a 64-cell census file -> reports
    simulate   synthetic two-wave scenario -> dyad CSV and/or reports
    chart      a JSON report -> bubble-chart SVG

A config file (``--config``, ``key = value`` lines, '#' comments) supplies
defaults; explicit command-line flags win.  Exit codes: 0 success, 1 input
error, 2 numerical-integrity failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ._version import __version__
from .chart import emit_bubble_chart
from .errors import InputError, NumericalIntegrityError
from .inference import method_disagreement
from .io import (EvaluationConfig, ItemReport, emit_report, evaluate_items,
                 load_report_json)
from .sim import EdgeModel, SimParams, simulate, to_dyad_records

__all__ = ["main", "build_parser"]


def _add_inference_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--method", choices=("bootstrap", "exact", "both"),
                    default="both", help="significance method(s) to run")
    sp.add_argument("--trials", type=int, default=100_000,
                    help="bootstrap sample count (B_N)")
    sp.add_argument("--alpha", type=float, default=0.05,
                    help="significance level for flagging")
    sp.add_argument("--seed", type=int, default=0, help="master random seed")
    sp.add_argument("--two-sided", action="store_true",
                    help="double the one-sided tail probability")
    sp.add_argument("--invert-behavior", action="store_true",
                    help="recode all behavior bits (p,q,r,s -> 1-bit) before tallying")


def _add_report_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--out-csv", metavar="PATH", help="write results CSV here")
    sp.add_argument("--out-json", metavar="PATH", help="write results JSON here")
    sp.add_argument("--chart", metavar="PATH", help="write bubble-chart SVG here")
    sp.add_argument("--chart-method", choices=("bootstrap", "exact"),
                    help="which method the chart shows (default: exact if run)")
    sp.add_argument("--items", metavar="PATH",
                    help="CSV of item_id,label restricting and labeling items")
    sp.add_argument("--delimiter", default=",", help="field delimiter for text inputs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadeval",
        description="Evaluate community-intervention effects on dyadic network data.")
    parser.add_argument("--version", action="version", version=f"dyadeval {__version__}")
    parser.add_argument("--config", metavar="PATH",
                        help="key = value defaults file; flags override")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("evaluate", help="evaluate survey data")
    ev.add_argument("--dyads", metavar="PATH", help="dyad CSV input")
    ev.add_argument("--nodes", metavar="PATH", help="node survey CSV input")
    ev.add_argument("--edges", metavar="PATH", help="edge list input")
    ev.add_argument("--orientation", choices=("directed", "symmetrize"),
                    default="directed",
                    help="dyad orientation policy for node+edge inputs")
    _add_inference_flags(ev)
    _add_report_flags(ev)

    tb = sub.add_parser("table", help="evaluate a 64-cell census file")
    tb.add_argument("--table", metavar="PATH", required=True, help="64-cell table file")
    tb.add_argument("--probabilities", action="store_true",
                    help="table holds per-row probabilities, not counts")
    tb.add_argument("--scale", type=int, default=100,
                    help="count = round(probability * scale)")
    tb.add_argument("--item-id", default="table", help="item id for the report")
    tb.add_argument("--item-label", default=None, help="item label for the report")
    _add_inference_flags(tb)
    _add_report_flags(tb)

    sim = sub.add_parser("simulate", help="generate a synthetic two-wave dataset")
    sim.add_argument("--node-count", type=int, default=444)
    sim.add_argument("--edge-kind", choices=("degree_sequence", "small_world", "edge_list"),
                     default="degree_sequence")
    sim.add_argument("--mean-degree", type=float, default=10.8,
                     help="degree_sequence: target mean degree")
    sim.add_argument("--ws-k", type=int, default=10, help="small_world: ring degree (even)")
    sim.add_argument("--ws-beta", type=float, default=0.1,
                     help="small_world: rewiring probability")
    sim.add_argument("--edges-file", metavar="PATH",
                     help="edge_list: fixed topology to use verbatim")
    sim.add_argument("--both-orientations", action="store_true",
                     help="emit each generated edge in both directions")
    sim.add_argument("--participation-prob", type=float, default=0.5)
    sim.add_argument("--p-effect", type=float, default=0.5)
    sim.add_argument("--p-against", type=float, default=0.05)
    sim.add_argument("--p-change", type=float, default=0.05)
    sim.add_argument("--p-stay", type=float, default=0.05)
    sim.add_argument("--p-social", type=float, default=0.2)
    sim.add_argument("--baseline-prevalence", type=float, default=0.5)
    sim.add_argument("--peer-weight", type=float, default=0.5)
    sim.add_argument("--item-id", default="sim", help="item id stamped on the records")
    sim.add_argument("--out-dyads", metavar="PATH", help="write the dyad CSV here")
    sim.add_argument("--evaluate", action="store_true",
                     help="run the significance tests on the simulated data")
    _add_inference_flags(sim)
    _add_report_flags(sim)

    ch = sub.add_parser("chart", help="render a bubble chart from a JSON report")
    ch.add_argument("--results", metavar="PATH", required=True, help="JSON report input")
    ch.add_argument("--out", metavar="PATH", required=True, help="SVG output path")
    ch.add_argument("--chart-method", choices=("bootstrap", "exact"))
    ch.add_argument("--alpha", type=float, default=None,
                    help="override the significance cutoff used for glyphs")

    parser._dyadeval_subparsers = (ev, tb, sim, ch)
    return parser


def _coerce(value: str):
    text = value.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def _load_config_file(path: str) -> dict:
    cfg_path = Path(path)
    if not cfg_path.exists():
        raise InputError(f"no such config file: {path}")
    values = {}
    for line_no, line in enumerate(cfg_path.read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise InputError(f"{path}: line {line_no}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        values[key.strip().replace("-", "_")] = _coerce(raw)
    return values


def _read_items_file(path: str, delimiter: str) -> tuple[tuple[str, str], ...]:
    items_path = Path(path)
    if not items_path.exists():
        raise InputError(f"no such items file: {path}")
    items = []
    for line_no, line in enumerate(items_path.read_text().splitlines(), start=1):
        if not line.strip() or line.strip().startswith("#"):
            continue
        parts = line.split(delimiter, 1)
        item_id = parts[0].strip()
        label = parts[1].strip() if len(parts) > 1 else item_id
        if line_no == 1 and item_id.lower() == "item_id":
            continue
        items.append((item_id, label))
    if not items:
        raise InputError(f"{path}: no items listed")
    return tuple(items)


def _emit_all(reports: list[ItemReport], args) -> int:
    wrote = False
    if args.out_csv:
        emit_report(reports, "csv", args.out_csv, seed=args.seed)
        wrote = True
    if args.out_json:
        emit_report(reports, "json", args.out_json, seed=args.seed)
        wrote = True
    if args.chart:
        emit_bubble_chart(reports, args.chart, method=args.chart_method)
        wrote = True
    _print_summary(reports, verbose=not wrote)
    # isolated per-item failures keep the run alive, but a run in which
    # nothing succeeded is an input error
    return 0 if any(r.error is None for r in reports) else 1


def _print_summary(reports: list[ItemReport], verbose: bool) -> None:
    for report in reports:
        if report.error is not None:
            print(f"{report.item_id}: ERROR {report.error}")
            continue
        flagged = sum(1 for res in report.results if res.significant)
        print(f"{report.item_id}: {report.dyads_used} dyads "
              f"({report.dyads_dropped} dropped), {flagged} significant results")
        if verbose:
            for res in report.results:
                print(f"  {res.measure.value if res.measure else '-'} "
                      f"[{res.method}] observed={res.observed} "
                      f"null_mean={res.null_mean:.3f} direction={res.direction} "
                      f"p={res.p_value:.6g}"
                      + (" *" if res.significant else ""))
        gaps = method_disagreement(report.results)
        if gaps:
            worst = max(gaps.values())
            print(f"  max |p_bootstrap - p_exact| across measures: {worst:.6g}")


def _cmd_evaluate(args) -> int:
    if args.dyads and (args.nodes or args.edges):
        raise InputError("give either --dyads or --nodes/--edges, not both")
    if args.dyads:
        mode = "dyad_csv"
    elif args.nodes and args.edges:
        mode = "node_edges"
    else:
        raise InputError("evaluate needs --dyads, or --nodes and --edges")
    items = _read_items_file(args.items, args.delimiter) if args.items else None
    config = EvaluationConfig(
        input_mode=mode, dyads_path=args.dyads, nodes_path=args.nodes,
        edges_path=args.edges, items=items, method=args.method,
        trials=args.trials, alpha=args.alpha, seed=args.seed,
        two_sided=args.two_sided, invert_behavior=args.invert_behavior,
        orientation=args.orientation, delimiter=args.delimiter)
    return _emit_all(evaluate_items(config), args)


def _cmd_table(args) -> int:
    label = args.item_label if args.item_label is not None else args.item_id
    config = EvaluationConfig(
        input_mode="table64", table_path=args.table,
        table_probabilities=args.probabilities, table_scale=args.scale,
        items=((args.item_id, label),), method=args.method, trials=args.trials,
        alpha=args.alpha, seed=args.seed, two_sided=args.two_sided,
        invert_behavior=args.invert_behavior, delimiter=args.delimiter)
    return _emit_all(evaluate_items(config), args)


def _write_dyad_csv(records, path) -> None:
    lines = ["ego_id,alter_id,ego_part,alter_part,ego_b0,alter_b0,ego_b1,alter_b1,item_id"]
    lines += [f"{r.ego_id},{r.alter_id},{r.x},{r.y},{r.p},{r.q},{r.r},{r.s},{r.item_id}"
              for r in records]
    try:
        Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from None


def _cmd_simulate(args) -> int:
    from .io import read_edge_list

    if args.edge_kind == "edge_list":
        if not args.edges_file:
            raise InputError("edge_kind=edge_list requires --edges-file")
        edges = tuple(read_edge_list(args.edges_file, args.delimiter))
        model = EdgeModel(kind="edge_list", edges=edges,
                          both_orientations=args.both_orientations)
    elif args.edge_kind == "small_world":
        model = EdgeModel(kind="small_world", k=args.ws_k, rewire_prob=args.ws_beta,
                          both_orientations=args.both_orientations)
    else:
        model = EdgeModel(kind="degree_sequence", mean_degree=args.mean_degree,
                          both_orientations=args.both_orientations)
    params = SimParams(
        participation_prob=args.participation_prob, p_effect=args.p_effect,
        p_against=args.p_against, p_change=args.p_change, p_stay=args.p_stay,
        p_social=args.p_social, baseline_prevalence=args.baseline_prevalence,
        peer_weight=args.peer_weight, seed=args.seed)
    network = simulate(params, node_count=args.node_count, edge_model=model)
    records = to_dyad_records(network, item_id=args.item_id)
    print(f"simulated {network.node_count} nodes, {len(records)} dyads")
    if args.out_dyads:
        _write_dyad_csv(records, args.out_dyads)
        print(f"wrote {args.out_dyads}")
    if args.evaluate:
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            dyads_path = args.out_dyads or str(Path(tmp) / "sim_dyads.csv")
            if not args.out_dyads:
                _write_dyad_csv(records, dyads_path)
            config = EvaluationConfig(
                input_mode="dyad_csv", dyads_path=dyads_path,
                items=((args.item_id, args.item_id),), method=args.method,
                trials=args.trials, alpha=args.alpha, seed=args.seed,
                two_sided=args.two_sided, invert_behavior=args.invert_behavior,
                delimiter=",")
            return _emit_all(evaluate_items(config), args)
    elif not args.out_dyads:
        raise InputError("simulate needs --out-dyads and/or --evaluate")
    return 0


def _cmd_chart(args) -> int:
    reports = load_report_json(args.results)
    emit_bubble_chart(reports, args.out, method=args.chart_method, alpha=args.alpha)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "evaluate": _cmd_evaluate,
    "table": _cmd_table,
    "simulate": _cmd_simulate,
    "chart": _cmd_chart,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if "--config" in argv:
            at = argv.index("--config")
            if at + 1 >= len(argv):
                raise InputError("--config requires a path")
            cfg = _load_config_file(argv[at + 1])
            for sp in parser._dyadeval_subparsers:
                sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalIntegrityError as exc:
        print(f"numerical integrity failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
