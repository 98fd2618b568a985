"""CSV datasets, versioned JSON model files and result tables."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict
from pathlib import Path

import numpy as np

from riforest.exceptions import DataError, ModelFormatError, ParameterError
from riforest.model import (
    Dataset,
    ForestModel,
    RiForestParams,
    StandardizationStats,
    TreeModel,
    TreeNode,
    validate_params,
)
from riforest.projection import RANDOM_PROJECTION, UNIT_BASIS, HyperplaneVector

FORMAT_VERSION = 1
TABLE_FORMATS = ("csv", "json")


# ----------------------------------------------------------------------------
# CSV datasets
# ----------------------------------------------------------------------------


def _parse_real(cell: str, line: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"line {line}, column {column!r}: not a number: {cell!r}") from None
    if not math.isfinite(value):
        raise DataError(f"line {line}, column {column!r}: non-finite value {cell!r}")
    return value


def load_csv(path, label_column: str = "label", require_labels: bool = False) -> Dataset:
    """Read a headed, comma-separated numeric file.

    The column named ``label_column``, if present, must hold 0 or 1 and is
    returned as the labels; every other column becomes a feature. Errors name
    the file line (the header is line 1) and the column.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError(f"{path}: missing header row")
        header = [h.strip() for h in header]
        label_idx = header.index(label_column) if label_column in header else None
        if label_idx is None and require_labels:
            raise DataError(f"{path}: label column {label_column!r} required")
        feature_idx = [i for i in range(len(header)) if i != label_idx]
        if not feature_idx:
            raise DataError(f"{path}: no feature columns")

        rows, labels = [], []
        for line, record in enumerate(reader, start=2):
            if not record or all(not c.strip() for c in record):
                continue
            if len(record) != len(header):
                raise DataError(
                    f"line {line}: expected {len(header)} fields, got {len(record)}"
                )
            rows.append([_parse_real(record[i], line, header[i]) for i in feature_idx])
            if label_idx is not None:
                y = _parse_real(record[label_idx], line, label_column)
                if y not in (0.0, 1.0):
                    raise DataError(
                        f"line {line}, column {label_column!r}: label must be 0 or 1, "
                        f"got {record[label_idx]!r}"
                    )
                labels.append(int(y))
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(
        np.array(rows, dtype=np.float64),
        np.array(labels, dtype=np.int8) if label_idx is not None else None,
        tuple(header[i] for i in feature_idx),
    )


def save_csv(data: Dataset, path, label_column: str = "label") -> None:
    """Write ``data`` in the format :func:`load_csv` reads, with exact reals."""
    header = list(data.column_names)
    if data.labels is not None:
        header.append(label_column)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, row in enumerate(data.values.tolist()):
            cells = [repr(v) for v in row]
            if data.labels is not None:
                cells.append(str(int(data.labels[i])))
            writer.writerow(cells)


# ----------------------------------------------------------------------------
# Model files
# ----------------------------------------------------------------------------


def _node_record(node: TreeNode, left: int, right: int) -> dict:
    if node.is_external:
        return {"type": "external", "size": node.size}
    v = node.split_vector
    return {
        "type": "internal",
        "kind": node.split_kind,
        "hyperplane": v.kind,
        "coeffs": [[int(i), float(w)] for i, w in zip(v.support, v.weights)],
        "q": node.split_point,
        "pl": node.path_increment,
        "left": left,
        "right": right,
        "size": node.size,
    }


def _flatten(root: TreeNode) -> list[dict]:
    order = list(root.iter_nodes())
    pos = {id(n): i for i, n in enumerate(order)}
    return [
        _node_record(n, -1, -1)
        if n.is_external
        else _node_record(n, pos[id(n.left)], pos[id(n.right)])
        for n in order
    ]


def model_to_dict(forest: ForestModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "params": asdict(forest.params),
        "standardization": {
            "means": forest.standardization.means.tolist(),
            "stds": forest.standardization.stds.tolist(),
        },
        "c_psi": forest.c_psi,
        "trees": [
            {"lambda": t.sparsity, "height_limit": t.height_limit, "nodes": _flatten(t.root)}
            for t in forest.trees
        ],
    }


def save_model(forest: ForestModel, path) -> None:
    """Write ``forest`` as JSON. Floats are written in shortest round-trip form."""
    text = json.dumps(model_to_dict(forest), allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def _real(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelFormatError(f"{where}: expected a number, got {value!r}")
    return float(value)


def _build_node(records: list[dict], i: int, d: int, where: str, seen: set) -> TreeNode:
    if not isinstance(i, int) or isinstance(i, bool) or not (0 <= i < len(records)):
        raise ModelFormatError(f"{where}: dangling child index {i!r}")
    if i in seen:
        raise ModelFormatError(f"{where}: node {i} is referenced twice")
    seen.add(i)
    rec = records[i]
    at = f"{where}, node {i}"
    if not isinstance(rec, dict):
        raise ModelFormatError(f"{at}: not an object")
    size = rec.get("size")
    if not isinstance(size, int) or isinstance(size, bool) or size < 0:
        raise ModelFormatError(f"{at}: bad size {size!r}")
    if rec.get("type") == "external":
        return TreeNode.external(size)
    if rec.get("type") != "internal":
        raise ModelFormatError(f"{at}: unknown node type {rec.get('type')!r}")

    pl = _real(rec.get("pl"), at)
    if not (0.0 < pl <= 1.0):
        raise ModelFormatError(f"{at}: pl {pl} outside (0, 1]")
    q = _real(rec.get("q"), at)
    coef = np.zeros(d)
    pairs = rec.get("coeffs")
    if not isinstance(pairs, list) or not pairs:
        raise ModelFormatError(f"{at}: missing coefficients")
    for pair in pairs:
        if not (isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], int)):
            raise ModelFormatError(f"{at}: bad coefficient entry {pair!r}")
        j, w = pair
        if not 0 <= j < d:
            raise ModelFormatError(f"{at}: coefficient index {j} outside [0, {d})")
        coef[j] = _real(w, at)
    kind = rec.get("hyperplane", RANDOM_PROJECTION)
    try:
        if kind == UNIT_BASIS:
            vector = HyperplaneVector(coef, UNIT_BASIS, int(np.flatnonzero(coef)[0]))
        else:
            vector = HyperplaneVector(coef, kind)
    except (ValueError, IndexError) as exc:
        raise ModelFormatError(f"{at}: {exc}") from None

    left = rec.get("left")
    right = rec.get("right")
    # pre-order storage puts children after their parent
    for child in (left, right):
        if isinstance(child, int) and child <= i:
            raise ModelFormatError(f"{at}: child index {child} does not follow its parent")
    left_node = _build_node(records, left, d, where, seen)
    right_node = _build_node(records, right, d, where, seen)
    return TreeNode.internal(vector, q, pl, left_node, right_node, rec.get("kind", ""), size)


def model_from_dict(doc: dict) -> ForestModel:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format_version {version!r} (expected {FORMAT_VERSION})"
        )
    try:
        params = validate_params(RiForestParams(**doc["params"]))
        std = doc["standardization"]
        stats = StandardizationStats(
            np.array(std["means"], dtype=np.float64), np.array(std["stds"], dtype=np.float64)
        )
        c_psi = _real(doc["c_psi"], "c_psi")
        tree_docs = doc["trees"]
    except (KeyError, TypeError) as exc:
        raise ModelFormatError(f"missing or malformed field: {exc}") from None
    except (ParameterError, DataError) as exc:
        raise ModelFormatError(str(exc)) from None
    if not isinstance(tree_docs, list) or not tree_docs:
        raise ModelFormatError("model has no trees")

    trees = []
    for t, tdoc in enumerate(tree_docs):
        where = f"tree {t}"
        try:
            nodes = tdoc["nodes"]
            lam = _real(tdoc["lambda"], where)
            limit = tdoc["height_limit"]
        except (KeyError, TypeError) as exc:
            raise ModelFormatError(f"{where}: missing field {exc}") from None
        if not isinstance(nodes, list) or not nodes:
            raise ModelFormatError(f"{where}: no nodes")
        seen: set[int] = set()
        root = _build_node(nodes, 0, stats.d, where, seen)
        if len(seen) != len(nodes):
            raise ModelFormatError(f"{where}: {len(nodes) - len(seen)} unreachable nodes")
        trees.append(TreeModel(root, lam, int(limit)))
    return ForestModel(trees, params, stats, c_psi)


def load_model(path) -> ForestModel:
    """Read a model written by :func:`save_model`.

    Raises:
        ModelFormatError: unreadable or truncated JSON, wrong format version,
            or a structurally invalid tree.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"{path}: not a valid model file ({exc})") from None
    return model_from_dict(doc)


# ----------------------------------------------------------------------------
# Result tables
# ----------------------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_table(rows: list[dict], fmt: str = "csv", summary: dict | None = None) -> str:
    """Render rows (dicts sharing keys) as CSV or JSON text.

    In CSV, summary entries follow the rows with the statistic name in the first
    column. In JSON they go under ``"summary"``.
    """
    if fmt not in TABLE_FORMATS:
        raise ValueError(f"format must be one of {TABLE_FORMATS}, got {fmt!r}")
    if fmt == "json":
        doc: dict = {"rows": rows}
        if summary is not None:
            doc["summary"] = summary
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row[c]) for c in columns])
    for key, value in (summary or {}).items():
        writer.writerow([key, _cell(value)] + [""] * max(len(columns) - 2, 0))
    return buf.getvalue()


def _parse_cell(cell: str):
    if cell == "":
        return None
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def parse_table(text: str, fmt: str = "csv") -> list[dict]:
    """Inverse of :func:`format_table` for the row part (CSV summary lines included as rows)."""
    if fmt == "json":
        return json.loads(text)["rows"]
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return [dict(zip(header, map(_parse_cell, record))) for record in reader]
