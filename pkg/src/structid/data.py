"""Shared data model: gridded datasets, assembled linear systems, sparse models.

All arrays are float64.  Objects are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import json
import struct
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

_MAGIC = b"STRUCTID-GRID-1\n"


@dataclass(frozen=True)
class GridDataset:
    """Sampled state trajectories on a regular space(-or-trajectory)/time grid.

    values is indexed (component, space..., time) for kind="field" or
    (component, trajectory, time) for kind="ensemble".  For ensembles the
    trajectory axis replaces space and dx is a meaningless placeholder (1.0).
    """

    values: np.ndarray
    dx: tuple[float, ...]
    dt: float
    periodic: tuple[bool, ...]
    component_names: tuple[str, ...]
    kind: str = "field"  # "field" | "ensemble"
    meta: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dx", tuple(float(h) for h in self.dx))
        object.__setattr__(self, "periodic", tuple(bool(p) for p in self.periodic))
        object.__setattr__(self, "component_names", tuple(self.component_names))
        object.__setattr__(self, "meta", tuple((str(k), str(v_)) for k, v_ in self.meta))

    @property
    def n_components(self) -> int:
        return self.values.shape[0]

    @property
    def n_time(self) -> int:
        return self.values.shape[-1]

    @property
    def n_space_axes(self) -> int:
        return 0 if self.kind == "ensemble" else self.values.ndim - 2

    @property
    def spatial_shape(self) -> tuple[int, ...]:
        return self.values.shape[1:-1]

    def component(self, c: int) -> np.ndarray:
        return self.values[c]

    def meta_get(self, key: str, default: str = "") -> str:
        for k, v in self.meta:
            if k == key:
                return v
        return default

    def with_values(self, values: np.ndarray) -> "GridDataset":
        return replace(self, values=np.asarray(values, dtype=np.float64))


def validate_dataset(d: GridDataset) -> list[str]:
    """Check dataset invariants; one diagnostic string per violation."""
    diags = []
    if d.values.ndim < 2:
        diags.append("values must have at least (component, time) axes")
        return diags
    if d.kind not in ("field", "ensemble"):
        diags.append(f"unknown kind {d.kind!r}")
    if d.dt <= 0:
        diags.append("dt must be positive")
    for i, h in enumerate(d.dx):
        if h <= 0:
            diags.append(f"dx[{i}] must be positive")
    if d.kind == "field" and len(d.dx) != d.values.ndim - 2:
        diags.append("dx must have one entry per spatial axis")
    if d.kind == "field" and len(d.periodic) != d.values.ndim - 2:
        diags.append("periodic must have one flag per spatial axis")
    if len(d.component_names) != d.values.shape[0]:
        diags.append("component_names must match the component axis length")
    if not np.all(np.isfinite(d.values)):
        idx = np.argwhere(~np.isfinite(d.values))[0]
        diags.append("non-finite entry at index %s" % (tuple(int(i) for i in idx),))
    return diags


def save_dataset(d: GridDataset, path) -> None:
    """Self-describing container: magic, JSON header, little-endian f8 payload."""
    header = {
        "shape": list(d.values.shape),
        "dx": list(d.dx),
        "dt": d.dt,
        "periodic": list(d.periodic),
        "component_names": list(d.component_names),
        "kind": d.kind,
        "meta": [list(kv) for kv in d.meta],
        "dtype": "<f8",
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(d.values, dtype="<f8").tobytes())


def load_dataset(path) -> GridDataset:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a structid dataset container")
        (n,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(n).decode("utf-8"))
        payload = fh.read()
    values = np.frombuffer(payload, dtype="<f8").reshape(header["shape"]).astype(np.float64)
    return GridDataset(
        values=values,
        dx=tuple(header["dx"]),
        dt=header["dt"],
        periodic=tuple(header["periodic"]),
        component_names=tuple(header["component_names"]),
        kind=header["kind"],
        meta=tuple(tuple(kv) for kv in header.get("meta", [])),
    )


@dataclass(frozen=True)
class LinearSystem:
    """Design matrix with unit-norm columns, target vector, and scaling.

    theta[:, j] * column_scales[j] reconstructs the raw (unnormalized)
    column.  row_component/row_sample record each row's provenance:
    which state equation it belongs to and which sample/subdomain it came
    from.
    """

    theta: np.ndarray
    b: np.ndarray
    column_scales: np.ndarray
    row_component: np.ndarray
    row_sample: np.ndarray

    def __post_init__(self):
        for name in ("theta", "b", "column_scales"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("row_component", "row_sample"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_rows(self) -> int:
        return self.theta.shape[0]

    @property
    def n_terms(self) -> int:
        return self.theta.shape[1]

    def raw_column(self, j: int) -> np.ndarray:
        return self.theta[:, j] * self.column_scales[j]


def build_linear_system(
    theta_raw, b, row_component=None, row_sample=None, equation_weighting: bool = True
) -> LinearSystem:
    """Normalize raw columns to unit l2 norm and record the scales.

    With equation_weighting (the default) each component equation's row
    block is first divided by its target-vector norm, so every equation
    contributes comparably to a joint regression even when state components
    live on very different scales.  Identically-zero columns keep scale 1 so
    they stay zero instead of producing NaNs; they can never be selected by
    correlation.
    """
    theta_raw = np.asarray(theta_raw, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if theta_raw.ndim != 2 or b.ndim != 1 or theta_raw.shape[0] != b.shape[0]:
        raise ValueError("theta must be (M, P) and b length M")
    if not np.all(np.isfinite(theta_raw)) or not np.all(np.isfinite(b)):
        raise ValueError("non-finite entries in assembled system")
    m, p = theta_raw.shape
    if m < p:
        warnings.warn(f"linear system has fewer rows ({m}) than columns ({p})", stacklevel=2)
    if row_component is None:
        row_component = np.zeros(m, dtype=np.int64)
    if row_sample is None:
        row_sample = np.arange(m, dtype=np.int64)
    row_component = np.asarray(row_component, dtype=np.int64)
    if equation_weighting and len(np.unique(row_component)) > 1:
        theta_raw = np.array(theta_raw, copy=True)
        b = np.array(b, copy=True)
        for comp in np.unique(row_component):
            rows = row_component == comp
            w = np.linalg.norm(b[rows])
            if w > 0:
                theta_raw[rows] /= w
                b[rows] /= w
    scales = np.linalg.norm(theta_raw, axis=0)
    safe = np.where(scales > 0, scales, 1.0)
    theta = theta_raw / safe
    return LinearSystem(theta, b, safe, row_component, row_sample)


@dataclass(frozen=True)
class IdentifyTrace:
    """Bookkeeping from a full identification run, for reports and export."""

    theta_star: int
    residuals: tuple[float, ...]          # R_theta after trim+refit, indexed from theta=1
    reduction_ratios: tuple[float, ...]   # s_theta, same indexing (padded with nan)
    supports: tuple[tuple[int, ...], ...]
    trimmed: tuple[tuple[int, ...], ...]  # indices removed at each sparsity level
    diagnostics: tuple[str, ...] = ()


@dataclass(frozen=True)
class SparseModel:
    """Identified sparse model: support, coefficients in unscaled units,
    squared residual on the normalized system."""

    support: tuple[int, ...]
    coefficients: np.ndarray
    residual_sq: float
    trace: IdentifyTrace | None = field(default=None, compare=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.float64)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "support", tuple(int(i) for i in self.support))
        if len(self.support) != len(coeffs):
            raise ValueError("support and coefficients length mismatch")
        if list(self.support) != sorted(set(self.support)):
            raise ValueError("support must be strictly increasing")
        if self.residual_sq < 0:
            raise ValueError("residual_sq must be nonnegative")

    @property
    def sparsity(self) -> int:
        return len(self.support)

    def dense(self, n_terms: int) -> np.ndarray:
        c = np.zeros(n_terms)
        c[list(self.support)] = self.coefficients
        return c

    def coefficient_of(self, index: int) -> float:
        for i, j in enumerate(self.support):
            if j == index:
                return float(self.coefficients[i])
        return 0.0


def model_to_json(model: SparseModel, term_names=None) -> str:
    doc = {
        "support": list(model.support),
        "coefficients": [float(c) for c in model.coefficients],
        "residual_sq": model.residual_sq,
    }
    if term_names is not None:
        doc["terms"] = [term_names[j] for j in model.support]
    if model.trace is not None:
        t = model.trace
        doc["trace"] = {
            "theta_star": t.theta_star,
            "residuals": list(t.residuals),
            "reduction_ratios": list(t.reduction_ratios),
            "supports": [list(s) for s in t.supports],
            "trimmed": [list(s) for s in t.trimmed],
            "diagnostics": list(t.diagnostics),
        }
    return json.dumps(doc, indent=2)


def model_from_json(text: str) -> SparseModel:
    doc = json.loads(text)
    trace = None
    if "trace" in doc:
        t = doc["trace"]
        trace = IdentifyTrace(
            theta_star=t["theta_star"],
            residuals=tuple(t["residuals"]),
            reduction_ratios=tuple(t["reduction_ratios"]),
            supports=tuple(tuple(s) for s in t["supports"]),
            trimmed=tuple(tuple(s) for s in t["trimmed"]),
            diagnostics=tuple(t["diagnostics"]),
        )
    return SparseModel(
        support=tuple(doc["support"]),
        coefficients=np.array(doc["coefficients"], dtype=np.float64),
        residual_sq=doc["residual_sq"],
        trace=trace,
    )
