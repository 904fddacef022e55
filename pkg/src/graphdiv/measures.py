"""Named information measures as graph-divergence specializations.

MI, CMI and total correlation are direct DAG constructions. Multivariate
mutual information minimizes the normalized divergence over set partitions.
Directed information and its restricted variants pool lagged time-series
tuples into one dataset and reduce to a CMI; treating those tuples as i.i.d.
is the usual stationarity approximation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import (
    Dataset,
    EstimatorConfig,
    NodeSpec,
    DagSpec,
    ValidationError,
    cmi_dag,
    dataset_from_array,
    mi_dag,
    tc_dag,
)
from .gdm import estimate_gdm

__all__ = [
    "TimeSeries",
    "Partition",
    "mi",
    "cmi",
    "total_correlation",
    "mmi",
    "restricted_growth_strings",
    "directed_information",
    "di_pooled",
    "rdi",
    "crdi",
    "rdi_pooled",
]

MMI_MAX_GROUPS = 10


@dataclass(frozen=True)
class TimeSeries:
    """T x n_vars matrix; row t holds every process at time t."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, order="C")
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if vals.ndim != 2:
            raise ValidationError("time series values must be 2-D")
        if vals.shape[0] < 2:
            raise ValidationError("time series needs at least 2 steps")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("non-finite value in time series")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n_steps(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Partition:
    """A set partition of the node groups, in restricted-growth-string form.

    blocks[b] lists group indices; rgs[i] is the block of group i. The rgs
    tuple is the deterministic tie-break key for the MMI minimization.
    """

    rgs: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.blocks) < 2:
            raise ValidationError("partition needs at least 2 blocks")

    def rgs_string(self) -> str:
        return ",".join(str(a) for a in self.rgs)


def mi(dataset: Dataset, cols_a, cols_b, config: EstimatorConfig = EstimatorConfig()) -> float:
    return estimate_gdm(dataset, mi_dag(cols_a, cols_b), config).value


def cmi(
    dataset: Dataset, cols_a, cols_b, cols_c, config: EstimatorConfig = EstimatorConfig()
) -> float:
    return estimate_gdm(dataset, cmi_dag(cols_a, cols_b, cols_c), config).value


def total_correlation(
    dataset: Dataset, groups, config: EstimatorConfig = EstimatorConfig()
) -> float:
    return estimate_gdm(dataset, tc_dag(groups), config).value


def restricted_growth_strings(n: int) -> Iterator[tuple[int, ...]]:
    """All set partitions of n items as RGS tuples, lexicographically.

    a[0] = 0 and a[i] <= 1 + max(a[0..i-1]); Bell(n) strings in total.
    """
    a = [0] * n
    while True:
        yield tuple(a)
        # next string: increment the rightmost position that can still grow
        i = n - 1
        while i > 0:
            if a[i] <= max(a[:i]):
                a[i] += 1
                for j in range(i + 1, n):
                    a[j] = 0
                break
            i -= 1
        else:
            return


def _blocks_from_rgs(rgs: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    n_blocks = max(rgs) + 1
    return tuple(
        tuple(i for i, b in enumerate(rgs) if b == block) for block in range(n_blocks)
    )


def mmi(
    dataset: Dataset, groups, config: EstimatorConfig = EstimatorConfig()
) -> tuple[float, Partition]:
    """Minimum over partitions of divergence / (blocks - 1), with the argmin.

    Enumerates every partition with at least two blocks; ties go to the
    lexicographically smallest restricted growth string.
    """
    groups = [tuple(int(c) for c in g) for g in groups]
    if not 2 <= len(groups) <= MMI_MAX_GROUPS:
        raise ValidationError(
            f"mmi supports 2..{MMI_MAX_GROUPS} groups, got {len(groups)}"
        )
    best: tuple[float, Partition] | None = None
    for rgs in restricted_growth_strings(len(groups)):
        blocks = _blocks_from_rgs(rgs)
        if len(blocks) < 2:
            continue
        dag = DagSpec(
            nodes=tuple(
                NodeSpec(f"b{bi}", tuple(c for g in block for c in groups[g]))
                for bi, block in enumerate(blocks)
            ),
            parents=tuple(() for _ in blocks),
        )
        value = estimate_gdm(dataset, dag, config).value / (len(blocks) - 1)
        if best is None or value < best[0]:
            best = (value, Partition(rgs, blocks))
    return best


def di_pooled(x, y, m: int) -> tuple[Dataset, DagSpec]:
    """Order-m pooled dataset and conditioning graph for directed information.

    Rows are (x_{t-m..t-1}, y_{t-m..t-1}, y_t) for every admissible t; the
    graph conditions the x block against y_t given the y block.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValidationError("x and y must have the same length")
    if m < 1:
        raise ValidationError("order must be a positive integer")
    t_len = len(x)
    if m >= t_len:
        raise ValidationError(f"order m={m} needs a series longer than {m}")
    cols = []
    for lag in range(m, 0, -1):
        cols.append(x[m - lag : t_len - lag])
    for lag in range(m, 0, -1):
        cols.append(y[m - lag : t_len - lag])
    cols.append(y[m:])
    data = dataset_from_array(np.column_stack(cols))
    a = tuple(range(m))
    c = tuple(range(m, 2 * m))
    b = (2 * m,)
    return data, cmi_dag(a, b, c)


def rdi_pooled(ts: TimeSeries, i: int, j: int, cond_var: int | None = None) -> tuple[Dataset, DagSpec]:
    """Lag-1 pooled dataset and graph for (conditional) restricted DI."""
    if i == j:
        raise ValidationError("source and target must differ")
    v = ts.values
    cols = [v[:-1, i], v[1:, j], v[:-1, j]]
    c_group = [2]
    if cond_var is not None:
        if cond_var in (i, j):
            raise ValidationError("conditioning variable clashes with source or target")
        cols.append(v[:-1, cond_var])
        c_group = [2, 3]
    data = dataset_from_array(np.column_stack(cols))
    return data, cmi_dag([0], [1], c_group)


def directed_information(
    x,
    y,
    m: int = 1,
    config: EstimatorConfig = EstimatorConfig(),
    full_history: bool = False,
) -> float:
    """Directed information rate from process x to process y, in nats.

    The default pools order-m lag tuples over time and evaluates one CMI of
    the x block against y_t given the y block. full_history sums the exact
    per-time terms with m = t-1 each (then divides by T); that is
    exponential in dimension and therefore gated to T <= 30. Terms whose
    pooled sample count is below 2 cannot be estimated and contribute zero.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValidationError("x and y must have the same length")
    t_len = len(x)
    if full_history:
        if t_len > 30:
            raise ValidationError("full-history mode is limited to T <= 30")
        total = 0.0
        for t in range(1, t_len + 1):
            order = t - 1
            pooled_rows = t_len - order
            if pooled_rows < 2:
                continue
            if order == 0:
                data = dataset_from_array(np.column_stack([x, y]))
                total += mi(data, [0], [1], config)
            else:
                data, dag = di_pooled(x, y, order)
                total += estimate_gdm(data, dag, config).value
        return total / t_len
    data, dag = di_pooled(x, y, m)
    return estimate_gdm(data, dag, config).value


def rdi(ts: TimeSeries, i: int, j: int, config: EstimatorConfig = EstimatorConfig()) -> float:
    """Restricted directed information: I(X_i(t-1); X_j(t) | X_j(t-1))."""
    data, dag = rdi_pooled(ts, i, j)
    return estimate_gdm(data, dag, config).value


def crdi(
    ts: TimeSeries,
    i: int,
    j: int,
    cond_var: int,
    config: EstimatorConfig = EstimatorConfig(),
) -> float:
    """RDI conditioned on one extra lagged process:
    I(X_i(t-1); X_j(t) | X_j(t-1), Z(t-1))."""
    data, dag = rdi_pooled(ts, i, j, cond_var)
    return estimate_gdm(data, dag, config).value
