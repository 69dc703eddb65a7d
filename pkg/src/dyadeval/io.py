"""File ingestion, batch evaluation across items, and report emission.

Input formats (all delimiter-configurable, default comma):

dyad CSV      header ego_id, alter_id, ego_part, alter_part, ego_b0,
              alter_b0, ego_b1, alter_b1, item_id; one observed dyad per
              row.  Empty/NA bits drop the row (counted); any other
              non-binary value is a hard error naming row and column.

node CSV      header node_id, participation, then <item>_before and
              <item>_after column pairs; empty/NA cells mark that item
              missing for the node.

edge list     two identifier columns; lines starting with '#' and blank
              lines are skipped.

64-cell table long form (header x,y,p,q,r,s,value; 64 rows) or grid form
              (header x,y,p,q,rs00,rs01,rs10,rs11; 16 rows, the rs columns
              being post-states (0,0),(0,1),(1,0),(1,1)).  In probability
              mode values are per-row probabilities converted to counts by
              round(prob * scale).

Missing data policy is listwise deletion per dyad per item, always with a
drop count in the report.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from ._version import __version__
from .census import DyadRecord, DyadTable, build_table
from .errors import DyadevalError, InputError
from .inference import InferenceConfig, TestResult, run_all
from .measures import MeasureId
from .sim import probabilities_to_counts

__all__ = [
    "NodeSurveyRow",
    "JoinStats",
    "EvaluationConfig",
    "ItemReport",
    "parse_dyad_csv",
    "parse_node_csv",
    "read_edge_list",
    "join_node_edges",
    "parse_table64",
    "evaluate_items",
    "emit_report",
    "load_report_json",
]

_MISSING_TOKENS = {"", "na", "nan", "none", "null", "."}

_DYAD_COLUMNS = ("ego_id", "alter_id", "ego_part", "alter_part",
                 "ego_b0", "alter_b0", "ego_b1", "alter_b1", "item_id")


def _is_missing(token: str) -> bool:
    return token.strip().lower() in _MISSING_TOKENS


def _parse_bit(token: str, line_no: int, column: str) -> int:
    value = token.strip()
    if value == "0":
        return 0
    if value == "1":
        return 1
    raise InputError(f"line {line_no}: column {column!r} must be 0 or 1, got {token!r}")


def parse_dyad_csv(path, delimiter: str = ",") -> tuple[list[DyadRecord], list[tuple[int, str | None]]]:
    """Read a dyad CSV.

    Returns (records, drops) where drops lists (line number, item id or
    None) for rows excluded because of missing bits.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    records: list[DyadRecord] = []
    drops: list[tuple[int, str | None]] = []
    with path.open(newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty file, expected a header row") from None
        header = [h.strip() for h in header]
        missing_cols = [c for c in _DYAD_COLUMNS if c not in header]
        if missing_cols:
            raise InputError(f"{path}: header lacks columns {missing_cols}")
        col = {name: header.index(name) for name in _DYAD_COLUMNS}
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise InputError(f"{path}: line {line_no}: expected "
                                 f"{len(header)} fields, got {len(row)}")
            item = row[col["item_id"]].strip()
            bit_cells = {name: row[col[name]] for name in _DYAD_COLUMNS[2:8]}
            if any(_is_missing(v) for v in bit_cells.values()):
                drops.append((line_no, item if not _is_missing(item) else None))
                continue
            bits = {name: _parse_bit(value, line_no, name)
                    for name, value in bit_cells.items()}
            try:
                records.append(DyadRecord(
                    ego_id=row[col["ego_id"]].strip(),
                    alter_id=row[col["alter_id"]].strip(),
                    x=bits["ego_part"], y=bits["alter_part"],
                    p=bits["ego_b0"], q=bits["alter_b0"],
                    r=bits["ego_b1"], s=bits["alter_b1"],
                    item_id=item,
                ))
            except ValueError as exc:
                raise InputError(f"{path}: line {line_no}: {exc}") from None
    return records, drops


@dataclass(frozen=True)
class NodeSurveyRow:
    """One survey respondent: participation plus per-item before/after bits."""

    node_id: str
    participation: int | None
    item_bits: dict[str, tuple[int, int] | None]


def parse_node_csv(path, items: Sequence[str] | None = None,
                   delimiter: str = ",") -> tuple[list[NodeSurveyRow], list[str]]:
    """Read a node survey CSV; returns (rows, item ids found in the header)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    with path.open(newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file, expected a header row") from None
        for required in ("node_id", "participation"):
            if required not in header:
                raise InputError(f"{path}: header lacks column {required!r}")
        found_items = [h[: -len("_before")] for h in header if h.endswith("_before")]
        for item in found_items:
            if f"{item}_after" not in header:
                raise InputError(f"{path}: column {item}_before has no {item}_after")
        use_items = list(items) if items is not None else found_items
        for item in use_items:
            if f"{item}_before" not in header or f"{item}_after" not in header:
                raise InputError(f"{path}: header lacks columns for item {item!r}")
        idx = {h: i for i, h in enumerate(header)}
        rows: list[NodeSurveyRow] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                raise InputError(f"{path}: line {line_no}: expected "
                                 f"{len(header)} fields, got {len(row)}")
            part_cell = row[idx["participation"]]
            participation = (None if _is_missing(part_cell)
                             else _parse_bit(part_cell, line_no, "participation"))
            bits: dict[str, tuple[int, int] | None] = {}
            for item in use_items:
                before, after = row[idx[f"{item}_before"]], row[idx[f"{item}_after"]]
                if _is_missing(before) or _is_missing(after):
                    bits[item] = None
                else:
                    bits[item] = (_parse_bit(before, line_no, f"{item}_before"),
                                  _parse_bit(after, line_no, f"{item}_after"))
            rows.append(NodeSurveyRow(row[idx["node_id"]].strip(), participation, bits))
    return rows, use_items


def read_edge_list(path, delimiter: str = ",") -> list[tuple[str, str]]:
    """Two-column identifier pairs; '#' comment lines and blanks skipped."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    edges: list[tuple[str, str]] = []
    with path.open() as handle:
        for line_no, line in enumerate(handle, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = [f.strip() for f in stripped.split(delimiter)]
            fields = [f for f in fields if f]
            if len(fields) != 2:
                raise InputError(f"{path}: line {line_no}: expected 2 fields, "
                                 f"got {len(fields)}")
            edges.append((fields[0], fields[1]))
    return edges


@dataclass(frozen=True)
class JoinStats:
    """Data-quality counters from joining nodes with edges."""

    used: int = 0
    dropped_unknown_node: int = 0
    dropped_missing_bits: int = 0
    dropped_self_edge: int = 0

    @property
    def dropped(self) -> int:
        return self.dropped_unknown_node + self.dropped_missing_bits + self.dropped_self_edge


def join_node_edges(nodes: Sequence[NodeSurveyRow], edges: Sequence[tuple[str, str]],
                    item: str, orientation: str = "directed",
                    ) -> tuple[list[DyadRecord], JoinStats]:
    """Join survey rows with an edge list into dyad records for one item.

    ``orientation="directed"`` emits one record per edge as listed;
    ``"symmetrize"`` emits both orientations.  Dyads with an unresolvable
    endpoint or any missing bit are dropped and counted, never fatal.
    """
    if orientation not in ("directed", "symmetrize"):
        raise InputError(f"orientation must be directed or symmetrize, got {orientation!r}")
    lookup = {row.node_id: row for row in nodes}
    records: list[DyadRecord] = []
    unknown = missing = selfies = 0
    for a, b in edges:
        oriented = [(a, b)] if orientation == "directed" else [(a, b), (b, a)]
        for ego_id, alter_id in oriented:
            if ego_id == alter_id:
                selfies += 1
                continue
            ego, alter = lookup.get(ego_id), lookup.get(alter_id)
            if ego is None or alter is None:
                unknown += 1
                continue
            ego_bits = ego.item_bits.get(item)
            alter_bits = alter.item_bits.get(item)
            if (ego.participation is None or alter.participation is None
                    or ego_bits is None or alter_bits is None):
                missing += 1
                continue
            records.append(DyadRecord(
                ego_id=ego_id, alter_id=alter_id,
                x=ego.participation, y=alter.participation,
                p=ego_bits[0], q=alter_bits[0],
                r=ego_bits[1], s=alter_bits[1],
                item_id=item,
            ))
    stats = JoinStats(used=len(records), dropped_unknown_node=unknown,
                      dropped_missing_bits=missing, dropped_self_edge=selfies)
    return records, stats


def _parse_count(token: str, line_no: int, column: str, path) -> int:
    try:
        value = float(token)
    except ValueError:
        raise InputError(f"{path}: line {line_no}: column {column!r} is not "
                         f"a number: {token!r}") from None
    if value < 0 or value != int(value):
        raise InputError(f"{path}: line {line_no}: column {column!r} must be "
                         f"a non-negative integer, got {token!r}")
    return int(value)


_GRID_RS = ("rs00", "rs01", "rs10", "rs11")


def parse_table64(path, probabilities: bool = False, scale: int = 100,
                  delimiter: str = ",") -> DyadTable:
    """Read a 64-cell census, in long or grid form.

    With ``probabilities=True`` the values are per-row probabilities and are
    converted to counts via round(value * scale).
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    with path.open(newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file, expected a header row") from None
        rows = [(n, row) for n, row in enumerate(reader, start=2)
                if row and any(cell.strip() for cell in row)]
    values = np.zeros(64, dtype=float)
    filled = np.zeros(64, dtype=bool)
    if all(c in header for c in ("x", "y", "p", "q", "r", "s", "value")):
        idx = {h: header.index(h) for h in ("x", "y", "p", "q", "r", "s", "value")}
        for line_no, row in rows:
            bits = [_parse_bit(row[idx[b]], line_no, b) for b in ("x", "y", "p", "q", "r", "s")]
            code = (bits[0] << 5 | bits[1] << 4 | bits[2] << 3
                    | bits[3] << 2 | bits[4] << 1 | bits[5])
            if filled[code]:
                raise InputError(f"{path}: line {line_no}: duplicate cell "
                                 f"(x,y,p,q,r,s)={tuple(bits)}")
            filled[code] = True
            values[code] = (float(row[idx["value"]]) if probabilities
                            else _parse_count(row[idx["value"]], line_no, "value", path))
    elif all(c in header for c in ("x", "y", "p", "q") + _GRID_RS):
        idx = {h: header.index(h) for h in ("x", "y", "p", "q") + _GRID_RS}
        for line_no, row in rows:
            bits = [_parse_bit(row[idx[b]], line_no, b) for b in ("x", "y", "p", "q")]
            base = bits[0] << 5 | bits[1] << 4 | bits[2] << 3 | bits[3] << 2
            for rs, column in enumerate(_GRID_RS):
                code = base | rs
                if filled[code]:
                    raise InputError(f"{path}: line {line_no}: duplicate group "
                                     f"(x,y,p,q)={tuple(bits)}")
                filled[code] = True
                values[code] = (float(row[idx[column]]) if probabilities
                                else _parse_count(row[idx[column]], line_no, column, path))
    else:
        raise InputError(
            f"{path}: header must be either x,y,p,q,r,s,value or "
            f"x,y,p,q,{','.join(_GRID_RS)} (got {header})")
    if not filled.all():
        raise InputError(f"{path}: only {int(filled.sum())} of 64 cells provided")
    if probabilities:
        return probabilities_to_counts(values, scale)
    return DyadTable(values.astype(np.int64))


@dataclass(frozen=True)
class EvaluationConfig:
    """Everything one batch evaluation needs.

    ``items`` maps item id -> label; None means discover items from the
    input.  Exactly one input mode is used: ``dyad_csv`` (path in
    ``dyads_path``), ``node_edges`` (``nodes_path`` + ``edges_path``) or
    ``table64`` (``table_path``).
    """

    input_mode: str = "dyad_csv"
    dyads_path: str | None = None
    nodes_path: str | None = None
    edges_path: str | None = None
    table_path: str | None = None
    table_probabilities: bool = False
    table_scale: int = 100
    items: tuple[tuple[str, str], ...] | None = None
    method: str = "both"
    trials: int = 100_000
    alpha: float = 0.05
    seed: int = 0
    two_sided: bool = False
    invert_behavior: bool = False
    orientation: str = "directed"
    delimiter: str = ","

    def __post_init__(self) -> None:
        if self.input_mode not in ("dyad_csv", "node_edges", "table64"):
            raise InputError(f"unknown input mode {self.input_mode!r}")

    def inference(self, seed) -> InferenceConfig:
        return InferenceConfig(method=self.method, trials=self.trials,
                               alpha=self.alpha, seed=seed,
                               two_sided=self.two_sided)


@dataclass(frozen=True)
class ItemReport:
    """Results and data-quality counters for one behavioral item."""

    item_id: str
    item_label: str
    results: tuple[TestResult, ...]
    dyads_used: int
    dyads_dropped: int
    error: str | None = None


def _item_labels(config: EvaluationConfig, discovered: Iterable[str]
                 ) -> list[tuple[str, str]]:
    if config.items is not None:
        return list(config.items)
    return [(item, item) for item in sorted(discovered)]


def evaluate_items(config: EvaluationConfig) -> list[ItemReport]:
    """Census -> null model -> all measures, per item.

    Per-item randomness comes from the children of SeedSequence(seed) in
    item order, so results are reproducible and independent of which other
    items are present only when the item list is unchanged.  A failing item
    produces a report carrying its error; other items still run.
    """
    builders: list[tuple[str, str, Callable[[], tuple[DyadTable, int]]]] = []
    if config.input_mode == "dyad_csv":
        if config.dyads_path is None:
            raise InputError("dyad_csv mode requires dyads_path")
        records, drops = parse_dyad_csv(config.dyads_path, config.delimiter)
        by_item: dict[str, list[DyadRecord]] = {}
        for rec in records:
            by_item.setdefault(rec.item_id, []).append(rec)
        dropped: dict[str | None, int] = {}
        for _, item in drops:
            dropped[item] = dropped.get(item, 0) + 1
        for item_id, label in _item_labels(config, by_item):
            recs = by_item.get(item_id, [])
            n_drop = dropped.get(item_id, 0)
            builders.append((item_id, label,
                             lambda recs=recs, item_id=item_id, n_drop=n_drop:
                             (build_table(recs, item=item_id), n_drop)))
    elif config.input_mode == "node_edges":
        if config.nodes_path is None or config.edges_path is None:
            raise InputError("node_edges mode requires nodes_path and edges_path")
        wanted = [item for item, _ in config.items] if config.items is not None else None
        nodes, found = parse_node_csv(config.nodes_path, wanted, config.delimiter)
        edges = read_edge_list(config.edges_path, config.delimiter)
        for item_id, label in _item_labels(config, found):
            def build(item_id=item_id):
                recs, stats = join_node_edges(nodes, edges, item_id, config.orientation)
                return build_table(recs, item=item_id), stats.dropped
            builders.append((item_id, label, build))
    else:
        if config.table_path is None:
            raise InputError("table64 mode requires table_path")
        labels = _item_labels(config, ["table"])
        if len(labels) != 1:
            raise InputError("table64 mode takes exactly one item")
        item_id, label = labels[0]
        builders.append((item_id, label,
                         lambda: (parse_table64(config.table_path,
                                                config.table_probabilities,
                                                config.table_scale,
                                                config.delimiter), 0)))

    children = np.random.SeedSequence(config.seed).spawn(len(builders))
    reports: list[ItemReport] = []
    for (item_id, label, build), child in zip(builders, children):
        try:
            table, n_dropped = build()
            if config.invert_behavior:
                table = table.invert_behavior()
            results = run_all(table, config.inference(child))
            reports.append(ItemReport(item_id, label, tuple(results),
                                      dyads_used=table.total,
                                      dyads_dropped=n_dropped))
        except DyadevalError as exc:
            reports.append(ItemReport(item_id, label, (), 0, 0, error=str(exc)))
    return reports


_CSV_FIELDS = ("item_id", "item_label", "measure", "measure_label", "method",
               "observed", "null_mean", "direction", "p_value", "p_value_addone",
               "significant", "alpha", "trials", "two_sided", "dyads_used",
               "dyads_dropped", "seed", "tool_version", "error")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _result_row(report: ItemReport, res: TestResult, seed: int) -> dict:
    return {
        "item_id": report.item_id,
        "item_label": report.item_label,
        "measure": res.measure.value if res.measure is not None else "",
        "measure_label": res.measure.label if res.measure is not None else "",
        "method": res.method,
        "observed": res.observed,
        "null_mean": res.null_mean,
        "direction": res.direction,
        "p_value": res.p_value,
        "p_value_addone": res.p_value_addone,
        "significant": res.significant,
        "alpha": res.alpha,
        "trials": res.trials,
        "two_sided": res.two_sided,
        "dyads_used": report.dyads_used,
        "dyads_dropped": report.dyads_dropped,
        "seed": seed,
        "tool_version": __version__,
        "error": report.error,
    }


def emit_report(reports: Sequence[ItemReport], fmt: str, path, seed: int = 0) -> None:
    """Write results as CSV (one row per test) or JSON (round-trippable).

    Field order is fixed; floats use repr so integers and 17-significant-
    digit reals survive a round trip byte-identically.
    """
    if not reports:
        raise InputError("nothing to report")
    path = Path(path)
    if fmt == "csv":
        lines = [",".join(_CSV_FIELDS)]
        for report in reports:
            if report.error is not None:
                row = _result_row(report, _EMPTY_RESULT, seed)
                lines.append(",".join(_csv_quote(_fmt(row[f])) for f in _CSV_FIELDS))
                continue
            for res in report.results:
                row = _result_row(report, res, seed)
                lines.append(",".join(_csv_quote(_fmt(row[f])) for f in _CSV_FIELDS))
        _write_bytes(path, ("\n".join(lines) + "\n").encode("utf-8"))
    elif fmt == "json":
        payload = {
            "tool": "dyadeval",
            "version": __version__,
            "seed": seed,
            "items": [
                {
                    "item_id": r.item_id,
                    "item_label": r.item_label,
                    "dyads_used": r.dyads_used,
                    "dyads_dropped": r.dyads_dropped,
                    "error": r.error,
                    "results": [
                        {
                            "measure": res.measure.value if res.measure is not None else None,
                            "measure_label": (res.measure.label
                                              if res.measure is not None else None),
                            "method": res.method,
                            "observed": res.observed,
                            "null_mean": res.null_mean,
                            "direction": res.direction,
                            "p_value": res.p_value,
                            "p_value_addone": res.p_value_addone,
                            "significant": res.significant,
                            "alpha": res.alpha,
                            "trials": res.trials,
                            "two_sided": res.two_sided,
                        }
                        for res in r.results
                    ],
                }
                for r in reports
            ],
        }
        _write_bytes(path, (json.dumps(payload, indent=2, sort_keys=True) + "\n")
                     .encode("utf-8"))
    else:
        raise InputError(f"unknown report format {fmt!r}")


def _write_bytes(path: Path, payload: bytes) -> None:
    try:
        path.write_bytes(payload)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from None


_EMPTY_RESULT = TestResult(measure=None, observed=0, null_mean=0.0,
                           direction="none", p_value=1.0, method="",
                           alpha=0.05, significant=False)


def _csv_quote(text: str) -> str:
    if any(ch in text for ch in ",\"\n"):
        return '"' + text.replace('"', '""') + '"'
    return text


def load_report_json(path) -> list[ItemReport]:
    """Re-parse a JSON report into ItemReports (inverse of emit_report)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    reports = []
    for item in payload.get("items", []):
        results = tuple(
            TestResult(
                measure=MeasureId(res["measure"]) if res["measure"] else None,
                observed=res["observed"],
                null_mean=res["null_mean"],
                direction=res["direction"],
                p_value=res["p_value"],
                method=res["method"],
                alpha=res["alpha"],
                significant=res["significant"],
                trials=res["trials"],
                p_value_addone=res["p_value_addone"],
                two_sided=res["two_sided"],
            )
            for res in item["results"]
        )
        reports.append(ItemReport(
            item_id=item["item_id"], item_label=item["item_label"],
            results=results, dyads_used=item["dyads_used"],
            dyads_dropped=item["dyads_dropped"], error=item["error"],
        ))
    return reports
