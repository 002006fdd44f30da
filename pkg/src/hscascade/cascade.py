"""Monte Carlo simulation of the branch cascade and exponent estimation.

The observable is the branch product Phi(r^n) = W_1 * ... * W_n, so that
E[Phi^p] = (E[W^p])^n and ln S_p(r^n) is linear in n with slope
zeta_p * ln r.  Structure-function averages are accumulated with
log-sum-exp; standard errors come from a leave-one-out jackknife over
the independent branch realizations.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .exponents import CascadeParams, DeltaSeries
from .generators import sample_logW

__all__ = [
    "SimConfig",
    "StructureTable",
    "ZetaEstimate",
    "default_p_list",
    "simulate",
    "estimate_zeta",
    "estimate_deltas",
]

_FMT = "%.17g"


def default_p_list(k: int) -> tuple:
    """Moment orders {0, 1, k, 2k, ..., 6k}, sorted."""
    return tuple(sorted({0.0, 1.0} | {float(j * k) for j in range(1, 7)}))


@dataclass(frozen=True)
class SimConfig:
    params: CascadeParams
    n_levels: int = 8
    n_samples: int = 10_000
    seed: int = 0
    p_list: tuple = ()

    def __post_init__(self):
        if self.n_levels < 2:
            raise ValueError(f"n_levels must be >= 2, got {self.n_levels}")
        if self.n_samples < 100:
            raise ValueError(f"n_samples must be >= 100, got {self.n_samples}")
        p_list = tuple(float(p) for p in self.p_list) or default_p_list(self.params.k)
        if 0.0 not in p_list:
            p_list = (0.0,) + p_list
        if any(p < 0 for p in p_list):
            raise ValueError("moment orders must be >= 0")
        object.__setattr__(self, "p_list", tuple(sorted(set(p_list))))


@dataclass(frozen=True)
class StructureTable:
    """Rows of (p, n, ln_S, se) plus run metadata."""

    p: np.ndarray
    n: np.ndarray
    ln_s: np.ndarray
    se: np.ndarray
    metadata: dict = field(default_factory=dict)

    def rows_for(self, p: float):
        sel = self.p == p
        return self.n[sel], self.ln_s[sel], self.se[sel]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("# " + json.dumps(self.metadata) + "\n")
            fh.write("p,n,ln_S,se\n")
            for p, n, ls, se in zip(self.p, self.n, self.ln_s, self.se):
                fh.write(f"{_FMT % p},{int(n)},{_FMT % ls},{_FMT % se}\n")

    @classmethod
    def from_csv(cls, path) -> "StructureTable":
        meta, rows = _read_csv(path, ("p", "n", "ln_S", "se"))
        arr = np.asarray(rows, dtype=float)
        return cls(p=arr[:, 0], n=arr[:, 1].astype(int), ln_s=arr[:, 2], se=arr[:, 3], metadata=meta)


@dataclass(frozen=True)
class ZetaEstimate:
    """Estimated scaling exponents (p, zeta_hat, se)."""

    p: np.ndarray
    zeta_hat: np.ndarray
    se: np.ndarray
    metadata: dict = field(default_factory=dict)

    def value(self, p: float) -> tuple:
        idx = np.nonzero(self.p == p)[0]
        if len(idx) == 0:
            raise KeyError(f"no estimate at order p = {p}")
        i = int(idx[0])
        return float(self.zeta_hat[i]), float(self.se[i])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("# " + json.dumps(self.metadata) + "\n")
            fh.write("p,zeta_hat,se\n")
            for p, z, se in zip(self.p, self.zeta_hat, self.se):
                fh.write(f"{_FMT % p},{_FMT % z},{_FMT % se}\n")

    @classmethod
    def from_csv(cls, path) -> "ZetaEstimate":
        meta, rows = _read_csv(path, ("p", "zeta_hat", "se"))
        arr = np.asarray(rows, dtype=float)
        return cls(p=arr[:, 0], zeta_hat=arr[:, 1], se=arr[:, 2], metadata=meta)


def _read_csv(path, expected_header):
    meta = {}
    if isinstance(path, io.TextIOBase):
        lines = path.read().splitlines()
    else:
        with open(path) as fh:
            lines = fh.read().splitlines()
    i = 0
    if lines and lines[0].startswith("#"):
        meta = json.loads(lines[0][1:].strip() or "{}")
        i = 1
    header = tuple(h.strip() for h in lines[i].split(","))
    if header != tuple(expected_header):
        raise ValueError(f"bad CSV header {header!r}, expected {tuple(expected_header)!r}")
    rows = []
    for ln_no, line in enumerate(lines[i + 1 :], start=i + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(expected_header):
            raise ValueError(f"row {ln_no}: expected {len(expected_header)} columns, got {len(parts)}")
        try:
            rows.append([float(v) for v in parts])
        except ValueError as exc:
            raise ValueError(f"row {ln_no}: {exc}") from None
    return meta, rows


def _ln_mean_and_jackknife(z: np.ndarray) -> tuple:
    """ln mean(exp(z)) and its leave-one-out jackknife standard error."""
    ns = len(z)
    m = z.max()
    x = np.exp(z - m)
    total = x.sum()
    ln_s = m + math.log(total / ns)
    # theta_(-j) = ln((total - x_j)/(ns-1)) + m
    loo = np.log(np.maximum(total - x, 1e-300)) - math.log(ns - 1) + m
    se = math.sqrt((ns - 1) / ns * float(((loo - loo.mean()) ** 2).sum()))
    return ln_s, se


def simulate(config: SimConfig, gen) -> StructureTable:
    """Structure-function table ln S_p(r^n) for n = 1..n_levels.

    Deterministic given the seed; the p = 0 rows are exactly zero.
    """
    nl, ns = config.n_levels, config.n_samples
    logw = sample_logW(gen, nl * ns, config.seed).reshape(nl, ns)
    branch = np.cumsum(logw, axis=0)  # log Phi(r^n) per sample

    ps, ns_col, lns, ses = [], [], [], []
    for p in config.p_list:
        for n in range(1, nl + 1):
            if p == 0.0:
                ln_s, se = 0.0, 0.0
            else:
                ln_s, se = _ln_mean_and_jackknife(p * branch[n - 1])
            ps.append(p)
            ns_col.append(n)
            lns.append(ln_s)
            ses.append(se)
    meta = {
        "r": config.params.r,
        "k": config.params.k,
        "n_levels": nl,
        "n_samples": ns,
        "seed": config.seed,
        "p_list": list(config.p_list),
    }
    return StructureTable(
        p=np.array(ps), n=np.array(ns_col), ln_s=np.array(lns), se=np.array(ses), metadata=meta
    )


def estimate_zeta(table: StructureTable) -> ZetaEstimate:
    """OLS slope of ln S_p against n*ln r, per moment order.

    The slope standard error is propagated from the per-level jackknife
    errors.  zeta_hat at p = 0 is forced to zero.  Orders with fewer
    than 3 valid levels are omitted with a warning in the metadata.
    """
    r = table.metadata.get("r")
    if r is None or not (0.0 < r < 1.0):
        raise ValueError("structure table metadata must carry the scale ratio r")
    ln_r = math.log(r)

    ps, zs, ses, skipped = [], [], [], []
    for p in sorted(set(table.p.tolist())):
        n, y, se = table.rows_for(p)
        ok = np.isfinite(y)
        n, y, se = n[ok], y[ok], se[ok]
        if p == 0.0:
            ps.append(0.0)
            zs.append(0.0)
            ses.append(0.0)
            continue
        if len(n) < 3:
            skipped.append(p)
            continue
        x = n.astype(float) * ln_r
        xm = x.mean()
        denom = float(((x - xm) ** 2).sum())
        coef = (x - xm) / denom
        slope = float(coef @ y)
        slope_se = math.sqrt(float((coef**2) @ (se**2)))
        ps.append(p)
        zs.append(slope)
        ses.append(slope_se)

    meta = dict(table.metadata)
    if skipped:
        meta["skipped_orders"] = skipped
    return ZetaEstimate(p=np.array(ps), zeta_hat=np.array(zs), se=np.array(ses), metadata=meta)


def estimate_deltas(zeta: ZetaEstimate, k: int) -> DeltaSeries:
    """Incremental exponents delta_{mk} = zeta_{(m+1)k} - zeta_{mk} with errors."""
    if k < 1:
        raise ValueError(f"hierarchy step k must be >= 1, got {k}")
    available = set(zeta.p.tolist())
    m_max = 0
    while (m_max + 2) * k in available or float((m_max + 2) * k) in available:
        m_max += 1
    needed = [float(m * k) for m in range(m_max + 2)]
    missing = [p for p in needed if p not in available]
    if missing or m_max < 1:
        raise ValueError(f"zeta estimate is missing orders {missing or needed}")
    deltas, errs = [], []
    for m in range(m_max + 1):
        z0, e0 = zeta.value(float(m * k))
        z1, e1 = zeta.value(float((m + 1) * k))
        deltas.append(z1 - z0)
        errs.append(math.hypot(e0, e1))
    return DeltaSeries(k=k, m=tuple(range(m_max + 1)), delta=tuple(deltas), stderr=tuple(errs))
