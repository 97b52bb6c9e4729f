"""CSV ingestion, balanced subsampling, and report assembly.

Input data is long-format CSV with a header row: columns ``factor_a`` and
``factor_b`` hold level labels (taken verbatim after trimming surrounding
whitespace), and the caller names the response columns.  Observational data
is rarely balanced, so a seeded uniform subsample without replacement brings
every cell down to a common count before testing.

Determinism: factor levels are ordered lexicographically, never by file
order, and rows are pre-sorted by a full-record key, so the same data, cell
size, and seed give the same design table even if the input rows are permuted.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDesign, EmptyFile, InsufficientCell, MissingColumn, UnparseableValue
from .manova import (
    FACTORS,
    DesignTable,
    compute_sop,
    dof_map,
    scalar_statistic,
    test_statistic_eigs,
    univariate_f_test,
)
from .mc import McConfig, PValueEstimate, mc_pvalue
from .rng import RngStream
from .symmat import SpdMat, SymMat

__all__ = [
    "RawDataset",
    "FactorResult",
    "ReportTable",
    "load_design_csv",
    "subsample_balanced",
    "run_report",
    "read_matrix_file",
    "report_to_dict",
    "report_to_text",
]

FACTOR_A_COLUMN = "factor_a"
FACTOR_B_COLUMN = "factor_b"


@dataclass(frozen=True)
class RawDataset:
    """Long-format observations before balancing."""

    factor_a: tuple[str, ...]
    factor_b: tuple[str, ...]
    responses: np.ndarray  # (n_rows, d)
    response_names: tuple[str, ...]

    @property
    def n_rows(self) -> int:
        return len(self.factor_a)

    @property
    def dim(self) -> int:
        return self.responses.shape[1]


def load_design_csv(path, response_columns) -> RawDataset:
    """Parse a long-format design CSV.

    Requires the header columns ``factor_a``, ``factor_b``, and every name in
    ``response_columns``.  Labels are trimmed but otherwise verbatim; every
    response value must parse as a finite real, otherwise
    :class:`UnparseableValue` names the offending row.
    """
    response_columns = [str(c) for c in response_columns]
    if not response_columns:
        raise MissingColumn("at least one response column must be named")
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise EmptyFile(f"{path}: no header row")
        header = [h.strip() for h in reader.fieldnames]
        for needed in [FACTOR_A_COLUMN, FACTOR_B_COLUMN, *response_columns]:
            if needed not in header:
                raise MissingColumn(f"{path}: missing column {needed!r}")
        a_labels: list[str] = []
        b_labels: list[str] = []
        values: list[list[float]] = []
        for row_number, row in enumerate(reader, start=2):
            record = {(k or "").strip(): v for k, v in row.items()}
            a_labels.append((record[FACTOR_A_COLUMN] or "").strip())
            b_labels.append((record[FACTOR_B_COLUMN] or "").strip())
            parsed = []
            for col in response_columns:
                raw = (record.get(col) or "").strip()
                try:
                    value = float(raw)
                except ValueError:
                    value = math.nan
                if not math.isfinite(value):
                    raise UnparseableValue(f"{path}: row {row_number}, column {col!r}: {raw!r} is not a finite number")
                parsed.append(value)
            values.append(parsed)
    if not values:
        raise EmptyFile(f"{path}: no data rows")
    return RawDataset(tuple(a_labels), tuple(b_labels), np.array(values), tuple(response_columns))


def subsample_balanced(data: RawDataset, n_per_cell: int, seed: int) -> DesignTable:
    """Uniform, seeded subsample of ``n_per_cell`` rows per factor-level cell.

    Levels are the distinct labels in lexicographic order; every cell of the
    implied grid must hold at least ``n_per_cell`` rows, otherwise
    :class:`InsufficientCell` names the first deficient cell.  A cell holding
    exactly ``n_per_cell`` rows is passed through unchanged.
    """
    n_per_cell = int(n_per_cell)
    if n_per_cell < 1:
        raise ValueError("n_per_cell must be positive")
    levels_a = sorted(set(data.factor_a))
    levels_b = sorted(set(data.factor_b))
    order = sorted(
        range(data.n_rows),
        key=lambda r: (data.factor_a[r], data.factor_b[r], tuple(data.responses[r])),
    )
    cells: dict[tuple[str, str], list[int]] = {}
    for r in order:
        cells.setdefault((data.factor_a[r], data.factor_b[r]), []).append(r)

    gen = RngStream(int(seed)).generator()
    out = np.empty((len(levels_a), len(levels_b), n_per_cell, data.dim))
    for i, la in enumerate(levels_a):
        for j, lb in enumerate(levels_b):
            rows = cells.get((la, lb), [])
            if len(rows) < n_per_cell:
                raise InsufficientCell(
                    f"cell ({la!r}, {lb!r}) holds {len(rows)} rows, needs {n_per_cell}"
                )
            if len(rows) == n_per_cell:
                chosen = rows
            else:
                picks = gen.choice(len(rows), size=n_per_cell, replace=False)
                chosen = [rows[k] for k in sorted(picks)]
            out[i, j] = data.responses[chosen]
    return DesignTable(out, labels_a=tuple(levels_a), labels_b=tuple(levels_b))


@dataclass(frozen=True)
class FactorResult:
    """One row of the report: observed statistic, eigenvalues, Monte Carlo p-value.

    ``f_stat`` and ``f_pvalue`` carry the exact univariate variance-component
    test and are set only for one-dimensional responses.
    """

    name: str
    observed: float
    eigenvalues: tuple[float, ...]
    p: PValueEstimate
    f_stat: float | None = None
    f_pvalue: float | None = None


@dataclass(frozen=True)
class ReportTable:
    """Three factor results plus an echo of the configuration that produced them."""

    factors: tuple[FactorResult, ...]
    functional: str
    n_mc: int
    seed: int
    a: int
    b: int
    n: int
    d: int

    def factor(self, name: str) -> FactorResult:
        return {fr.name: fr for fr in self.factors}[name]


def run_report(table: DesignTable, cfg: McConfig, sigma: SpdMat | None = None) -> ReportTable:
    """Run the full three-factor battery on a balanced table.

    Computes the SOP decomposition, the statistic eigenvalues per factor
    (optionally conjugated by a user-supplied ``sigma``, which provably does
    not change them), the scalar statistic, and its Monte Carlo p-value with
    the factor's degrees of freedom.  For ``d = 1`` the exact univariate F
    test is attached to each factor.  All-constant responses short-circuit to
    zero statistics rather than failing the residual PD check.
    """
    dofs = dof_map(table.levels_a, table.levels_b, table.reps)
    factor_dof1 = dict(zip(FACTORS, (dofs.nu_a, dofs.nu_b, dofs.nu_ab)))
    for name, dof1 in factor_dof1.items():
        if not dof1 > table.dim - 1:
            raise DegenerateDesign(
                f"factor {name} has {dof1} degrees of freedom, which cannot support a "
                f"{table.dim}-dimensional statistic (need more factor levels or fewer responses)"
            )
    if not dofs.nu_e > table.dim - 1:
        raise DegenerateDesign(
            f"residual degrees of freedom {dofs.nu_e} cannot support a {table.dim}-dimensional statistic"
        )
    sop = compute_sop(table)
    # all responses identical per component: every statistic is zero by convention
    degenerate = bool(np.all(np.ptp(table.responses.reshape(-1, table.dim), axis=0) == 0.0))
    results = []
    for name in FACTORS:
        if degenerate:
            eigs = np.zeros(table.dim)
        else:
            eigs = test_statistic_eigs(sop.factor(name), sop.sop_e, sigma)
        observed = float(scalar_statistic(eigs, cfg.functional))
        p = mc_pvalue(observed, factor_dof1[name], dofs.nu_e, table.dim, cfg)
        f_stat = f_pvalue = None
        if table.dim == 1 and not degenerate:
            f_stat, f_pvalue = univariate_f_test(table, name)
        results.append(FactorResult(name, observed, tuple(float(v) for v in eigs), p, f_stat, f_pvalue))
    return ReportTable(
        tuple(results),
        cfg.functional.value,
        cfg.n_mc,
        cfg.seed,
        table.levels_a,
        table.levels_b,
        table.reps,
        table.dim,
    )


def read_matrix_file(path) -> SymMat:
    """Read the plain-text square matrix format: a line with ``d``, then ``d`` rows.

    Rows hold ``d`` whitespace-separated reals; the matrix must be symmetric
    to about eight significant digits.
    """
    with open(path, encoding="utf-8") as handle:
        tokens = handle.read().split()
    if not tokens:
        raise EmptyFile(f"{path}: empty matrix file")
    try:
        d = int(tokens[0])
    except ValueError as exc:
        raise UnparseableValue(f"{path}: first token must be the dimension, got {tokens[0]!r}") from exc
    if d < 1 or len(tokens) != 1 + d * d:
        raise UnparseableValue(f"{path}: expected {d}x{d} entries after the dimension line")
    try:
        m = np.array([float(t) for t in tokens[1:]], dtype=float).reshape(d, d)
    except ValueError as exc:
        raise UnparseableValue(f"{path}: matrix entries must be real numbers") from exc
    if not np.all(np.isfinite(m)):
        raise UnparseableValue(f"{path}: matrix entries must be finite")
    scale = max(1.0, float(np.max(np.abs(m))))
    if np.max(np.abs(m - m.T)) > 1e-8 * scale:
        raise UnparseableValue(f"{path}: matrix is not symmetric")
    return SymMat(m)


def _pvalue_dict(p: PValueEstimate) -> dict:
    return {
        "p_hat": p.p_hat,
        "p_raw": p.p_raw,
        "mc_se": p.mc_se,
        "n_mc": p.n_mc,
        "n_extreme": p.n_extreme,
    }


def report_to_dict(report: ReportTable) -> dict:
    """Structured form of the report, full precision, JSON-ready."""
    return {
        "factors": [
            {
                "name": fr.name,
                "observed": fr.observed,
                "eigenvalues": list(fr.eigenvalues),
                "p": _pvalue_dict(fr.p),
                **({"f_stat": fr.f_stat, "f_pvalue": fr.f_pvalue} if fr.f_stat is not None else {}),
            }
            for fr in report.factors
        ],
        "config": {
            "functional": report.functional,
            "n_mc": report.n_mc,
            "seed": report.seed,
            "a": report.a,
            "b": report.b,
            "n": report.n,
            "d": report.d,
        },
    }


def write_report_json(report: ReportTable, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report_to_dict(report), handle, indent=2)
        handle.write("\n")


def report_to_text(report: ReportTable, response_names: tuple[str, ...] | None = None) -> str:
    """Fixed-width text report: one MANOVA row, plus the F-test row for d = 1."""
    label = f"({', '.join(response_names)})" if response_names else f"d = {report.d}"
    width = max(40, len(label) + 26)
    header = f"{'':<{width}}" + "".join(f"{'p_' + fr.name:>10}" for fr in report.factors)
    manova = f"{'Beta Type II MANOVA on ' + label:<{width}}" + "".join(
        f"{fr.p.p_hat:>10.4f}" for fr in report.factors
    )
    lines = [
        f"balanced design: a = {report.a}, b = {report.b}, n = {report.n}, d = {report.d}",
        f"functional = {report.functional}, n_mc = {report.n_mc}, seed = {report.seed}",
        "",
        header,
        manova,
    ]
    if report.factors[0].f_stat is not None:
        name = response_names[0] if response_names else "response"
        row = f"{'Variance-component F test on ' + name:<{width}}" + "".join(
            f"{fr.f_pvalue:>10.4f}" for fr in report.factors
        )
        lines.append(row)
    lines.append("")
    lines.append(f"{'':<{width}}" + "".join(f"{'se_' + fr.name:>10}" for fr in report.factors))
    lines.append(
        f"{'Monte Carlo standard error':<{width}}"
        + "".join(f"{fr.p.mc_se:>10.4f}" for fr in report.factors)
    )
    return "\n".join(lines)
