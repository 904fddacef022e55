"""Domain types shared by all estimators: datasets, DAG specifications, configs.

Everything here is immutable after construction and safe to share across
workers. All logarithms downstream are natural; estimates are in nats.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParseError",
    "ValidationError",
    "Dataset",
    "NodeSpec",
    "DagSpec",
    "EstimatorConfig",
    "EstimateResult",
    "dataset_from_array",
    "load_dataset",
    "save_dataset",
    "validate_dag",
    "mi_dag",
    "cmi_dag",
    "tc_dag",
    "dag_from_json",
    "dag_to_json",
    "compensated_mean",
]


class ParseError(ValueError):
    """Malformed input file (CSV dataset or JSON graph)."""


class ValidationError(ValueError):
    """Structurally valid input that violates a domain invariant."""


def compensated_mean(values) -> float:
    """Exactly-rounded mean of a float sequence (Shewchuk summation).

    The sum is independent of element order, which makes permutation
    robustness of the estimators exact rather than approximate.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValidationError("mean of empty sequence")
    return math.fsum(values.ravel()) / values.size


@dataclass(frozen=True)
class Dataset:
    """N x D matrix of finite 64-bit floats with unique column names.

    Rows are samples, columns are scalar coordinates. Discrete values are
    represented by exact repetition of the same float bit pattern, so
    duplicate detection is plain float equality.
    """

    values: np.ndarray
    col_names: tuple[str, ...]

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, order="C")
        if vals.ndim != 2:
            raise ValidationError(f"dataset values must be 2-D, got ndim={vals.ndim}")
        n, d = vals.shape
        if n < 1 or d < 1:
            raise ValidationError(f"dataset must be at least 1x1, got {n}x{d}")
        bad = np.argwhere(~np.isfinite(vals))
        if bad.size:
            r, c = bad[0]
            raise ValidationError(f"non-finite value at row {r} col {c}")
        names = tuple(str(s) for s in self.col_names)
        if len(names) != d:
            raise ValidationError(
                f"{len(names)} column names for {d} columns"
            )
        if any(not s for s in names):
            raise ValidationError("empty column name")
        if len(set(names)) != d:
            raise ValidationError("duplicate column names")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "col_names", names)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def column_index(self, name: str) -> int:
        try:
            return self.col_names.index(name)
        except ValueError:
            raise ValidationError(f"unknown column name {name!r}") from None


def dataset_from_array(values, col_names=None) -> Dataset:
    """Wrap a 2-D array-like as a Dataset; default names are c0, c1, ..."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim == 1:
        vals = vals.reshape(-1, 1)
    if col_names is None:
        col_names = tuple(f"c{j}" for j in range(vals.shape[1] if vals.ndim == 2 else 0))
    return Dataset(vals, tuple(col_names))


def load_dataset(path, has_header: bool = True) -> Dataset:
    """Parse a rectangular numeric CSV into a Dataset.

    The optional single header row supplies column names; otherwise names
    are c0, c1, ... Errors name the offending row and column.
    """
    try:
        fh = open(path, "r", newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise ParseError(f"empty file: {path}")
    names = None
    if has_header:
        names = tuple(s.strip() for s in rows[0])
        rows = rows[1:]
        if not rows:
            raise ParseError(f"no data rows in {path}")
    width = len(rows[0])
    data = np.empty((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(
                f"ragged row {i}: expected {width} cells, got {len(row)}"
            )
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric value at row {i} col {j}: {cell!r}") from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value at row {i} col {j}")
            data[i, j] = v
    if names is None:
        names = tuple(f"c{j}" for j in range(width))
    try:
        return Dataset(data, names)
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


def save_dataset(dataset: Dataset, path, with_header: bool = True) -> None:
    """Write a Dataset as CSV with full round-trip precision (repr floats)."""
    with open(path, "w", newline="") as fh:
        if with_header:
            fh.write(",".join(dataset.col_names) + "\n")
        for row in dataset.values:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


@dataclass(frozen=True)
class NodeSpec:
    """One graph node: an id and the dataset columns it groups.

    A node may span several columns so that vector-valued variables (for
    instance time blocks in directed information) fit the same machinery.
    """

    id: str
    columns: tuple[int, ...]

    def __post_init__(self):
        cols = tuple(int(c) for c in self.columns)
        if not cols:
            raise ValidationError(f"node {self.id!r} has no columns")
        if len(set(cols)) != len(cols):
            raise ValidationError(f"node {self.id!r} repeats a column")
        if any(c < 0 for c in cols):
            raise ValidationError(f"node {self.id!r} has a negative column index")
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "columns", cols)


@dataclass(frozen=True)
class DagSpec:
    """A DAG over column-group nodes; encodes the factorized target measure.

    `parents[i]` lists the parent node ids of `nodes[i]`. Columns not
    referenced by any node are ignored by every estimator, so one dataset
    can serve several measures.
    """

    nodes: tuple[NodeSpec, ...]
    parents: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        nodes = tuple(self.nodes)
        parents = tuple(tuple(str(p) for p in ps) for ps in self.parents)
        if len(nodes) != len(parents):
            raise ValidationError(
                f"{len(nodes)} nodes but {len(parents)} parent lists"
            )
        if not nodes:
            raise ValidationError("graph has no nodes")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "parents", parents)

    def node_index(self, node_id: str) -> int:
        for i, node in enumerate(self.nodes):
            if node.id == node_id:
                return i
        raise ValidationError(f"unknown node id {node_id!r}")

    def parent_columns(self, i: int) -> tuple[int, ...]:
        cols = []
        for pid in self.parents[i]:
            cols.extend(self.nodes[self.node_index(pid)].columns)
        return tuple(cols)

    def all_columns(self) -> tuple[int, ...]:
        cols = []
        for node in self.nodes:
            cols.extend(node.columns)
        return tuple(cols)

    def n_parentless(self) -> int:
        return sum(1 for ps in self.parents if not ps)


def validate_dag(dag: DagSpec, dataset: Dataset) -> list[int]:
    """Check a DagSpec against a dataset and return a topological order.

    The order is deterministic: among nodes whose parents are all placed,
    the one earliest in the node list goes first. Raises ValidationError
    on cycles, unknown parent ids, overlapping column groups or column
    indices out of range.
    """
    ids = [node.id for node in dag.nodes]
    if len(set(ids)) != len(ids):
        raise ValidationError("duplicate node ids")
    index = {nid: i for i, nid in enumerate(ids)}

    seen_cols: set[int] = set()
    for node in dag.nodes:
        for c in node.columns:
            if c >= dataset.n_cols:
                raise ValidationError(
                    f"node {node.id!r}: column {c} out of range for {dataset.n_cols} columns"
                )
            if c in seen_cols:
                raise ValidationError(f"column {c} appears in more than one node")
            seen_cols.add(c)

    in_deg = [0] * len(ids)
    children: list[list[int]] = [[] for _ in ids]
    for i, plist in enumerate(dag.parents):
        for pid in plist:
            if pid not in index:
                raise ValidationError(f"node {ids[i]!r}: unknown parent id {pid!r}")
            p = index[pid]
            if p == i:
                raise ValidationError(f"node {ids[i]!r} is its own parent")
            children[p].append(i)
            in_deg[i] += 1

    order: list[int] = []
    ready = sorted(i for i, d in enumerate(in_deg) if d == 0)
    while ready:
        i = ready.pop(0)
        order.append(i)
        changed = False
        for j in children[i]:
            in_deg[j] -= 1
            if in_deg[j] == 0:
                ready.append(j)
                changed = True
        if changed:
            ready.sort()
    if len(order) != len(ids):
        stuck = [ids[i] for i, d in enumerate(in_deg) if d > 0]
        raise ValidationError(f"cycle detected among nodes {stuck}")
    return order


def _as_group(cols) -> tuple[int, ...]:
    group = tuple(int(c) for c in cols)
    if not group:
        raise ValidationError("empty column group")
    return group


def _check_disjoint(groups) -> None:
    seen: set[int] = set()
    for g in groups:
        for c in g:
            if c in seen:
                raise ValidationError(f"column {c} appears in more than one group")
            seen.add(c)


def mi_dag(cols_a, cols_b) -> DagSpec:
    """Two parentless nodes: the mutual-information graph."""
    a, b = _as_group(cols_a), _as_group(cols_b)
    _check_disjoint([a, b])
    return DagSpec(
        nodes=(NodeSpec("a", a), NodeSpec("b", b)),
        parents=((), ()),
    )


def cmi_dag(cols_a, cols_b, cols_c) -> DagSpec:
    """Conditional-MI graph: a and b each depend on the parentless c."""
    a, b, c = _as_group(cols_a), _as_group(cols_b), _as_group(cols_c)
    _check_disjoint([a, b, c])
    return DagSpec(
        nodes=(NodeSpec("a", a), NodeSpec("b", b), NodeSpec("c", c)),
        parents=(("c",), ("c",), ()),
    )


def tc_dag(groups) -> DagSpec:
    """Edgeless graph with one parentless node per group: total correlation."""
    gs = [_as_group(g) for g in groups]
    if not gs:
        raise ValidationError("no groups")
    _check_disjoint(gs)
    return DagSpec(
        nodes=tuple(NodeSpec(f"g{i}", g) for i, g in enumerate(gs)),
        parents=tuple(() for _ in gs),
    )


def dag_from_json(text_or_path, from_path: bool = False) -> DagSpec:
    """Parse the graph file schema: {"nodes": [{"id", "columns", "parents"}]}."""
    if from_path:
        try:
            with open(text_or_path, "r") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot open {text_or_path}: {exc}") from exc
    else:
        text = text_or_path
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid graph JSON: {exc}") from exc
    if not isinstance(obj, dict) or "nodes" not in obj:
        raise ParseError('graph JSON must be an object with a "nodes" list')
    nodes = []
    parents = []
    for entry in obj["nodes"]:
        if not isinstance(entry, dict):
            raise ParseError("each node must be a JSON object")
        try:
            nodes.append(NodeSpec(str(entry["id"]), tuple(entry["columns"])))
        except KeyError as exc:
            raise ParseError(f"node missing field {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad node entry: {exc}") from exc
        parents.append(tuple(str(p) for p in entry.get("parents", ())))
    return DagSpec(tuple(nodes), tuple(parents))


def dag_to_json(dag: DagSpec) -> str:
    obj = {
        "nodes": [
            {"id": n.id, "columns": list(n.columns), "parents": list(ps)}
            for n, ps in zip(dag.nodes, dag.parents)
        ]
    }
    return json.dumps(obj)


@dataclass(frozen=True)
class EstimatorConfig:
    """Estimator parameters. k=None selects the automatic rule.

    tie_mode and summation_mode are fixed design choices; they are fields
    only so the contract is visible, and any other value is rejected.
    """

    k: int | None = None
    tie_mode: str = "closed"
    summation_mode: str = "compensated"

    def __post_init__(self):
        if self.k is not None:
            if int(self.k) != self.k or self.k < 1:
                raise ValidationError(f"k must be a positive integer, got {self.k!r}")
            object.__setattr__(self, "k", int(self.k))
        if self.tie_mode != "closed":
            raise ValidationError("tie_mode is fixed to 'closed'")
        if self.summation_mode != "compensated":
            raise ValidationError("summation_mode is fixed to 'compensated'")


@dataclass(frozen=True)
class EstimateResult:
    """Scalar estimate in nats plus per-sample diagnostics.

    Self-consistency: value == mean(zeta) + (parentless_nodes - 1) * ln(n_used)
    to within 1e-12, with the mean compensated. parentless_nodes is carried
    so the identity is checkable from the result alone.
    """

    value: float
    zeta: np.ndarray
    k_used: int
    n_used: int
    parentless_nodes: int

    def __post_init__(self):
        z = np.ascontiguousarray(self.zeta, dtype=np.float64)
        z.flags.writeable = False
        object.__setattr__(self, "zeta", z)

    def recomputed_value(self) -> float:
        return compensated_mean(self.zeta) + (self.parentless_nodes - 1) * math.log(
            self.n_used
        )
