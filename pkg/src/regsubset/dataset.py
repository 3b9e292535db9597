"""Regression instances: CSV I/O, summary statistics and a synthetic generator."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

RHO_SEED = 0.2
CHILD_RHO_RANGE = (0.5, 0.8)
CHILDREN_PER_SEED = 4
RESPONSE_SD = 5.0


class InstanceError(ValueError):
    """Raised for malformed instance data."""


@dataclass
class Instance:
    """Observation matrix ``a`` (n x m) and response ``b`` (n)."""

    a: np.ndarray
    b: np.ndarray
    var_names: list[str] | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        if self.a.ndim == 1:
            self.a = self.a.reshape(-1, 1)
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        n = self.b.size
        if self.a.size == 0:
            self.a = self.a.reshape(n, 0)
        if self.a.shape[0] != n:
            raise InstanceError(f"a has {self.a.shape[0]} rows but b has {n} entries")
        if n < 3:
            raise InstanceError(f"need at least 3 observations, got {n}")
        if not (np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b))):
            raise InstanceError("instance data must be finite")
        if self.var_names is None:
            self.var_names = [f"x{j + 1}" for j in range(self.m)]
        self.var_names = list(self.var_names)
        if len(self.var_names) != self.m:
            raise InstanceError("var_names length does not match column count")
        if len(set(self.var_names)) != self.m:
            raise InstanceError("var_names must be unique")

    @property
    def n(self) -> int:
        return self.b.size

    @property
    def m(self) -> int:
        return self.a.shape[1]

    @property
    def is_fat(self) -> bool:
        """True when a full fit is not identifiable (m > n - 2)."""
        return self.m > self.n - 2

    def subinstance(self, columns) -> "Instance":
        cols = sorted(columns)
        return Instance(self.a[:, cols], self.b, [self.var_names[j] for j in cols],
                        seed=self.seed, meta=dict(self.meta, parent_columns=cols))

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.var_names == other.var_names
                and np.array_equal(self.a, other.a)
                and np.array_equal(self.b, other.b))


@dataclass(frozen=True)
class InstanceStats:
    b_bar: float
    t_max: float
    mae_0: float
    mse_0: float
    mae_m: float | None
    mse_m: float | None
    sae_m: float | None
    sse_m: float | None


def compute_stats(inst: Instance) -> InstanceStats:
    """Summary statistics used by the big-M procedures and the penalties.

    ``mae_m``/``mse_m`` are the full-model criteria SAE/(n-1-m) and
    SSE/(n-1-m); they are ``None`` when ``m > n - 2``.
    """
    from .objectives import lad_fit, ols_sse

    n = inst.n
    b_bar = float(np.mean(inst.b))
    dev = inst.b - b_bar
    t_max = float(np.sum(np.abs(dev)))
    mse_0 = float(dev @ dev) / (n - 1)
    mae_m = mse_m = sae_m = sse_m = None
    if inst.m <= n - 2:
        full = list(range(inst.m))
        sae_m = lad_fit(inst, full).sae
        sse_m = ols_sse(inst, full)
        mae_m = sae_m / (n - 1 - inst.m)
        mse_m = sse_m / (n - 1 - inst.m)
    return InstanceStats(b_bar=b_bar, t_max=t_max, mae_0=t_max / (n - 1), mse_0=mse_0,
                         mae_m=mae_m, mse_m=mse_m, sae_m=sae_m, sse_m=sse_m)


def load_csv(path) -> Instance:
    """Read an instance with a ``b`` column and one column per predictor."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InstanceError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        dup = sorted({h for h in header if header.count(h) > 1})
        raise InstanceError(f"{path}: duplicate column names {dup}")
    if "b" not in header:
        raise InstanceError(f"{path}: no response column named 'b'")
    data = []
    for r, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise InstanceError(f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
        vals = []
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise InstanceError(
                    f"{path}: row {r}, column {c + 1} ({header[c]}): cannot parse {cell!r}"
                ) from None
            if not math.isfinite(v):
                raise InstanceError(f"{path}: row {r}, column {c + 1} ({header[c]}): non-finite value")
            vals.append(v)
        data.append(vals)
    if len(data) < 3:
        raise InstanceError(f"{path}: need at least 3 data rows, got {len(data)}")
    arr = np.array(data, dtype=float)
    bi = header.index("b")
    cols = [j for j in range(len(header)) if j != bi]
    return Instance(arr[:, cols], arr[:, bi], [header[j] for j in cols])


def save_csv(inst: Instance, path, sidecar: dict | None = None) -> None:
    """Write ``inst`` as ``b,x1,...``; floats use repr so reloading is exact."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["b", *inst.var_names])
        for i in range(inst.n):
            w.writerow([repr(float(inst.b[i]))] + [repr(float(v)) for v in inst.a[i]])
    if sidecar is not None:
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def _standardize(v: np.ndarray) -> np.ndarray:
    return (v - v.mean()) / v.std()


def generate(m: int, n: int, seed: int) -> Instance:
    """Synthetic instance with m/5 groups of highly correlated predictors.

    ``b ~ Normal(0, sd=5)``. Each group has a seed column with population
    correlation 0.2 to ``b`` and four children, each correlated to the seed
    column with a coefficient drawn from Uniform(0.5, 0.8). Columns are laid
    out group by group: seed column first, then its children.
    """
    if m < 5 or m % 5:
        raise InstanceError(f"m must be a positive multiple of 5, got {m}")
    if n < 3:
        raise InstanceError(f"need n >= 3, got {n}")
    rng = np.random.default_rng(seed)
    b = rng.normal(0.0, RESPONSE_SD, size=n)
    zb = _standardize(b)
    cols, names, parents, rhos = [], [], [], []
    for g in range(m // 5):
        seed_col = RHO_SEED * zb + math.sqrt(1 - RHO_SEED**2) * rng.standard_normal(n)
        seed_idx = len(cols)
        cols.append(seed_col)
        names.append(f"x{seed_idx + 1}")
        parents.append(None)
        rhos.append(RHO_SEED)
        zs = _standardize(seed_col)
        for _ in range(CHILDREN_PER_SEED):
            rho = float(rng.uniform(*CHILD_RHO_RANGE))
            child = rho * zs + math.sqrt(1 - rho**2) * rng.standard_normal(n)
            names.append(f"x{len(cols) + 1}")
            cols.append(child)
            parents.append(seed_idx)
            rhos.append(rho)
    meta = {
        "generator": "grouped-correlation",
        "m": m,
        "n": n,
        "seed": seed,
        "rho_seed": RHO_SEED,
        "response_sd": RESPONSE_SD,
        "response_sd_convention": "N(0,5) read as standard deviation 5",
        "parents": parents,
        "rho": rhos,
    }
    return Instance(np.column_stack(cols), b, names, seed=seed, meta=meta)


def sidecar_for(inst: Instance) -> dict:
    keys = ("m", "n", "seed", "rho_seed", "response_sd", "response_sd_convention")
    return {k: inst.meta[k] for k in keys if k in inst.meta}


def generate_prefix(m: int, n: int, seed: int) -> Instance:
    """First ``m`` columns of ``generate(5*ceil(m/5), n, seed)``.

    Allows column counts that are not multiples of five while keeping the
    grouped correlation structure for the columns that remain.
    """
    if m < 1:
        raise InstanceError(f"need m >= 1, got {m}")
    full = generate(5 * math.ceil(m / 5), n, seed)
    if full.m == m:
        return full
    inst = full.subinstance(range(m))
    inst.meta = dict(full.meta, m=m, generated_m=full.m)
    return inst
