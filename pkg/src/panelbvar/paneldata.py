"""Country-year panel handling.

Loads long-form CSV panels, applies per-variable transforms (deflate,
per-capita, log), and stacks the panel into VAR regression matrices with
lag blocks, country dummies, and time dummies.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

MISSING_TOKENS = ("", "NA")


class PanelError(ValueError):
    """Malformed panel file or invalid panel operation."""


@dataclass
class PanelDataset:
    """Unbalanced country-year panel.

    ``values`` has shape (countries, years, variables) over the sorted union
    of observed years; cells are NaN where missing. ``observed`` marks which
    (country, year) rows exist at all: a row can exist with some (or all)
    cells missing, which is distinct from the row being absent.
    """

    countries: list[str]
    years: list[int]
    variables: list[str]
    values: np.ndarray
    observed: np.ndarray

    @property
    def n_countries(self) -> int:
        return len(self.countries)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_missing(self) -> int:
        """Missing cells on rows that exist in the panel."""
        return int(np.isnan(self.values[self.observed]).sum())

    def country_years(self, country: str) -> list[int]:
        i = self.countries.index(country)
        return [y for t, y in enumerate(self.years) if self.observed[i, t]]

    def select(self, variables: Sequence[str]) -> "PanelDataset":
        """Subset and reorder variables."""
        missing = [v for v in variables if v not in self.variables]
        if missing:
            raise PanelError(f"unknown variables: {', '.join(missing)}")
        idx = [self.variables.index(v) for v in variables]
        return PanelDataset(
            countries=list(self.countries),
            years=list(self.years),
            variables=list(variables),
            values=self.values[:, :, idx].copy(),
            observed=self.observed.copy(),
        )

    def select_countries(self, countries: Sequence[str]) -> "PanelDataset":
        missing = [c for c in countries if c not in self.countries]
        if missing:
            raise PanelError(f"unknown countries: {', '.join(missing)}")
        keep = sorted(countries)
        idx = [self.countries.index(c) for c in keep]
        values = self.values[idx]
        observed = self.observed[idx]
        # retrim the year axis to the years this subset actually covers
        has = observed.any(axis=0)
        return PanelDataset(
            countries=keep,
            years=[y for t, y in enumerate(self.years) if has[t]],
            variables=list(self.variables),
            values=values[:, has].copy(),
            observed=observed[:, has].copy(),
        )

    def equals(self, other: "PanelDataset") -> bool:
        return (
            self.countries == other.countries
            and self.years == other.years
            and self.variables == other.variables
            and np.array_equal(self.observed, other.observed)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )


def load_panel(path, schema: Sequence[str] | None = None) -> PanelDataset:
    """Read a long-form CSV panel with header ``country,year,<var1>,...``.

    Missing cells are the empty string or ``NA``. Rejects duplicate
    (country, year) rows, non-numeric cells, non-integral years, and
    interior gaps in a country's year coverage. When ``schema`` is given the
    file must contain exactly those variable columns (any order); variables
    are returned in schema order.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3 or header[0] != "country" or header[1] != "year":
            raise PanelError("header must be 'country,year,<var1>,...'")
        file_vars = header[2:]
        if len(set(file_vars)) != len(file_vars):
            raise PanelError("duplicate variable columns in header")
        if schema is not None:
            unknown = [v for v in file_vars if v not in schema]
            if unknown:
                raise PanelError(f"unknown column(s): {', '.join(unknown)}")
            absent = [v for v in schema if v not in file_vars]
            if absent:
                raise PanelError(f"missing column(s): {', '.join(absent)}")
        records: dict[tuple[str, int], list[float]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise PanelError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            country = row[0]
            try:
                year = int(row[1])
            except ValueError:
                raise PanelError(f"line {lineno}: year {row[1]!r} is not an integer") from None
            key = (country, year)
            if key in records:
                raise PanelError(f"duplicate entry for ({country}, {year})")
            cells = []
            for name, token in zip(file_vars, row[2:]):
                if token in MISSING_TOKENS:
                    cells.append(np.nan)
                    continue
                try:
                    cells.append(float(token))
                except ValueError:
                    raise PanelError(
                        f"line {lineno}: non-numeric value {token!r} in column {name!r}"
                    ) from None
            records[key] = cells

    if not records:
        raise PanelError("panel file contains no data rows")

    countries = sorted({c for c, _ in records})
    for country in countries:
        ys = sorted(y for c, y in records if c == country)
        if ys != list(range(ys[0], ys[-1] + 1)):
            raise PanelError(f"gap in years for {country}")

    years = sorted({y for _, y in records})
    variables = list(schema) if schema is not None else file_vars
    order = [file_vars.index(v) for v in variables]

    values = np.full((len(countries), len(years), len(variables)), np.nan)
    observed = np.zeros((len(countries), len(years)), dtype=bool)
    year_pos = {y: t for t, y in enumerate(years)}
    for (country, year), cells in records.items():
        i = countries.index(country)
        t = year_pos[year]
        observed[i, t] = True
        values[i, t] = [cells[j] for j in order]
    return PanelDataset(countries, years, variables, values, observed)


def write_panel_csv(data: PanelDataset, path) -> None:
    """Write rows sorted by (country, year); floats use round-trip repr."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["country", "year"] + data.variables)
        for i, country in enumerate(data.countries):
            for t, year in enumerate(data.years):
                if not data.observed[i, t]:
                    continue
                cells = [
                    "" if np.isnan(v) else repr(float(v)) for v in data.values[i, t]
                ]
                writer.writerow([country, year] + cells)


@dataclass(frozen=True)
class VariableTransform:
    """Per-variable pipeline, applied deflate -> per-capita -> log.

    All fields left at defaults is a passthrough (e.g. share variables).
    """

    deflate_by: str | None = None
    per_capita_by: str | None = None
    log: bool = False


def apply_transforms(
    data: PanelDataset, spec: Mapping[str, VariableTransform]
) -> PanelDataset:
    """Return a new panel with transformed variables replacing the originals.

    Reference series (deflator, population) must be present wherever the
    target variable is observed; log requires strictly positive inputs.
    """
    for name, tr in spec.items():
        if name not in data.variables:
            raise PanelError(f"transform target {name!r} is not a panel variable")
        for ref in (tr.deflate_by, tr.per_capita_by):
            if ref is not None and ref not in data.variables:
                raise PanelError(f"transform of {name!r} references unknown variable {ref!r}")

    values = data.values.copy()
    for name, tr in spec.items():
        v = data.variables.index(name)
        arr = values[:, :, v]
        mask = ~np.isnan(arr)
        for ref, step in ((tr.deflate_by, "deflate"), (tr.per_capita_by, "per-capita")):
            if ref is None:
                continue
            ref_arr = data.values[:, :, data.variables.index(ref)]
            bad = mask & ~np.isfinite(ref_arr)
            if bad.any():
                i, t = np.argwhere(bad)[0]
                raise PanelError(
                    f"{step} reference {ref!r} missing for {name!r} at "
                    f"({data.countries[i]}, {data.years[t]})"
                )
            with np.errstate(divide="ignore", invalid="ignore"):
                arr = np.where(mask, arr / ref_arr, arr)
            bad = mask & ~np.isfinite(arr)
            if bad.any():
                i, t = np.argwhere(bad)[0]
                raise PanelError(
                    f"{step} of {name!r} by {ref!r} is not finite at "
                    f"({data.countries[i]}, {data.years[t]})"
                )
        if tr.log:
            bad = mask & (arr <= 0)
            if bad.any():
                i, t = np.argwhere(bad)[0]
                raise PanelError(
                    f"log of non-positive value for {name!r} at "
                    f"({data.countries[i]}, {data.years[t]})"
                )
            arr = np.where(mask, np.log(np.where(mask, arr, 1.0)), arr)
        values[:, :, v] = arr
    return PanelDataset(
        list(data.countries), list(data.years), list(data.variables), values, data.observed.copy()
    )


@dataclass
class RegressionData:
    """Stacked VAR system.

    ``x`` columns are [lag-1 block | ... | lag-L block | country dummies |
    time dummies]; the first usable year's time dummy is dropped so the
    country-dummy block can stay complete. Row r of ``y`` at (country, t)
    aligns with lag entries for years t-1..t-L in ``x``.
    """

    y: np.ndarray
    x: np.ndarray
    row_index: list[tuple[str, int]]
    column_index: list[str]
    n_vars: int
    n_lags: int
    countries: list[str]
    time_dummy_years: list[int]
    dropped_countries: list[str] = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return self.y.shape[0]

    @property
    def n_lag_cols(self) -> int:
        return self.n_vars * self.n_lags

    @property
    def n_exog(self) -> int:
        return len(self.countries) + len(self.time_dummy_years)

    @property
    def k(self) -> int:
        return self.x.shape[1]


def build_regression_matrices(data: PanelDataset, lags: int) -> RegressionData:
    """Stack complete-lag-window rows into (Y, X) with dummy columns.

    Rows are included listwise within country: (i, t) enters only when
    Z_{i,t} and all of Z_{i,t-1}..Z_{i,t-lags} are fully observed.
    Countries contributing no rows are dropped with a warning.
    """
    if lags < 1:
        raise PanelError("lag length must be >= 1")
    n = data.n_vars
    year_pos = {y: t for t, y in enumerate(data.years)}
    complete = data.observed & ~np.isnan(data.values).any(axis=2)

    rows: list[tuple[int, int]] = []  # (country idx, year)
    kept: list[str] = []
    dropped: list[str] = []
    for i, country in enumerate(data.countries):
        before = len(rows)
        for t, year in enumerate(data.years):
            if not complete[i, t]:
                continue
            window = [year_pos.get(year - l) for l in range(1, lags + 1)]
            if any(w is None or not complete[i, w] for w in window):
                continue
            rows.append((i, year))
        if len(rows) > before:
            kept.append(country)
        else:
            dropped.append(country)
    if dropped:
        warnings.warn(
            f"dropping countries without {lags + 1} consecutive complete years: "
            + ", ".join(dropped),
            stacklevel=2,
        )
    if not rows:
        raise PanelError("insufficient time span")

    usable_years = sorted({year for _, year in rows})
    td_years = usable_years[1:]
    country_pos = {c: j for j, c in enumerate(kept)}
    td_pos = {y: j for j, y in enumerate(td_years)}
    k = n * lags + len(kept) + len(td_years)

    y = np.empty((len(rows), n))
    x = np.zeros((len(rows), k))
    row_index: list[tuple[str, int]] = []
    for r, (i, year) in enumerate(rows):
        y[r] = data.values[i, year_pos[year]]
        for l in range(1, lags + 1):
            x[r, (l - 1) * n : l * n] = data.values[i, year_pos[year - l]]
        x[r, n * lags + country_pos[data.countries[i]]] = 1.0
        if year in td_pos:
            x[r, n * lags + len(kept) + td_pos[year]] = 1.0
        row_index.append((data.countries[i], year))

    column_index = (
        [f"{v}.L{l}" for l in range(1, lags + 1) for v in data.variables]
        + [f"fe[{c}]" for c in kept]
        + [f"td[{y_}]" for y_ in td_years]
    )
    dead = [column_index[j] for j in range(k) if not x[:, j].any()]
    if dead:
        raise PanelError(f"identically zero regressor column(s): {', '.join(dead)}")
    return RegressionData(
        y=y,
        x=x,
        row_index=row_index,
        column_index=column_index,
        n_vars=n,
        n_lags=lags,
        countries=kept,
        time_dummy_years=td_years,
        dropped_countries=dropped,
    )
