"""Hierarchical-symmetry test bench.

Fits the contraction form delta_m = delta_inf + D*q**m to an
incremental-exponent series, reports the sup-norm recurrence residual
epsilon, and classifies the series into the principal cascade families:

    a1-holds         geometric relaxation with ratio in (0,1)
    monofractal      constant series (C = 0)
    affine-divergent delta_m affine in m (Gaussian generator part)
    power-decay      delta_m - delta_inf ~ m**(alpha-1) (power-law jumps)
    other            anything else
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exponents import DeltaSeries, ScalingLaw, law_from_deltas
from .generators import LogPoissonParams, logpoisson_from_scaling

__all__ = ["A1Fit", "A1Report", "fit_a1", "classify", "characterize"]

SCHEMA_VERSION = 1

_Q_LO, _Q_HI, _Q_NODES = 1e-3, 0.999, 1000


class A1Fit(NamedTuple):
    beta_hat: float
    delta_inf_hat: float
    epsilon_hat: float
    amplitude: float  # fitted D in delta_inf + D*q**m
    identifiable: bool  # False when the series is constant (any beta fits)


@dataclass(frozen=True)
class A1Report:
    beta_hat: float
    delta_inf_hat: float
    epsilon_hat: float
    verdict: str
    law: ScalingLaw | None = None
    logpoisson: LogPoissonParams | None = None
    m_max: int = 0
    series_digest: str = ""

    def to_dict(self) -> dict:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "beta_hat": self.beta_hat,
            "delta_inf_hat": self.delta_inf_hat,
            "epsilon_hat": self.epsilon_hat,
            "verdict": self.verdict,
            "m_max": self.m_max,
            "series_digest": self.series_digest,
            "law": None,
            "logpoisson": None,
        }
        if self.law is not None:
            doc["law"] = {
                "gamma": self.law.gamma,
                "big_c": self.law.big_c,
                "beta": self.law.beta,
                "k": self.law.k,
            }
        if self.logpoisson is not None:
            doc["logpoisson"] = {
                "a": self.logpoisson.a,
                "b": self.logpoisson.b,
                "lambda": self.logpoisson.lam,
            }
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _digest(series: DeltaSeries) -> str:
    return hashlib.sha256(np.asarray(series.delta, dtype=float).tobytes()).hexdigest()[:16]


def _weights(series: DeltaSeries) -> np.ndarray:
    if series.stderr is None:
        return np.ones(len(series))
    se = np.asarray(series.stderr, dtype=float)
    floor = max(se[se > 0].min() if (se > 0).any() else 1.0, 1e-300)
    return 1.0 / np.maximum(se, floor) ** 2


def _sse_at(q: float, m: np.ndarray, d: np.ndarray, w: np.ndarray) -> tuple:
    """Weighted LS of d = delta_inf + D*q**m at fixed q; returns (sse, delta_inf, D)."""
    x = q**m
    sw, sx, sxx = w.sum(), w @ x, w @ x**2
    sy, sxy = w @ d, w @ (x * d)
    den = sw * sxx - sx * sx
    if den <= 0:
        return math.inf, math.nan, math.nan
    amp = (sw * sxy - sx * sy) / den
    dinf = (sy - amp * sx) / sw
    resid = d - dinf - amp * x
    return float(w @ resid**2), float(dinf), float(amp)


def _recurrence_residual(series: DeltaSeries, beta: float, delta_inf: float) -> float:
    """sup over consecutive m of |delta_{m+1} - (1-beta)*delta_inf - beta*delta_m|."""
    m = np.asarray(series.m)
    d = np.asarray(series.delta)
    worst = 0.0
    idx = {int(mm): i for i, mm in enumerate(m)}
    for mm, i in idx.items():
        j = idx.get(mm + 1)
        if j is None:
            continue
        worst = max(worst, abs(d[j] - (1.0 - beta) * delta_inf - beta * d[i]))
    return worst


def fit_a1(series: DeltaSeries) -> A1Fit:
    """Fit (beta, delta_inf) to the series and report the sup-norm residual.

    Stage 1 grid-searches the contraction ratio q over (0.001, 0.999)
    with a weighted linear solve for (delta_inf, D) at each node, then
    refines q by golden section.  Stage 2 recomputes the achieved
    recurrence residual exactly at the fitted parameters.
    """
    if len(series) < 4:
        raise ValueError(f"need at least 4 series entries, got {len(series)}")
    m = np.asarray(series.m, dtype=float)
    d = np.asarray(series.delta, dtype=float)
    w = _weights(series)

    scale = max(np.abs(d).max(), 1e-300)
    if np.abs(d - d.mean()).max() <= 1e-10 * max(scale, 1.0):
        # constant series: the contraction ratio is unidentifiable
        mean = float(np.average(d, weights=w))
        eps = _recurrence_residual(series, 0.5, mean)
        return A1Fit(math.nan, mean, eps, 0.0, identifiable=False)

    qs = np.exp(np.linspace(math.log(_Q_LO), math.log(_Q_HI), _Q_NODES))
    x = qs[:, None] ** m[None, :]
    sw, sy, syy = w.sum(), w @ d, w @ d**2
    sx, sxx, sxy = x @ w, (x * x) @ w, x @ (w * d)
    den = sw * sxx - sx * sx
    amp = (sw * sxy - sx * sy) / den
    dinf = (sy - amp * sx) / sw
    sses = (
        syy - 2.0 * dinf * sy - 2.0 * amp * sxy
        + dinf**2 * sw + 2.0 * dinf * amp * sx + amp**2 * sxx
    )
    best = int(np.argmin(sses))  # smallest q wins ties via argmin

    lo = qs[max(best - 1, 0)]
    hi = qs[min(best + 1, len(qs) - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    e = a + invphi * (b - a)
    fc = _sse_at(c, m, d, w)[0]
    fe = _sse_at(e, m, d, w)[0]
    for _ in range(80):
        if fc < fe:
            b, e, fe = e, c, fc
            c = b - invphi * (b - a)
            fc = _sse_at(c, m, d, w)[0]
        else:
            a, c, fc = c, e, fe
            e = a + invphi * (b - a)
            fe = _sse_at(e, m, d, w)[0]
    q_hat = (a + b) / 2.0
    _, delta_inf, amp = _sse_at(q_hat, m, d, w)
    eps = _recurrence_residual(series, q_hat, delta_inf)
    return A1Fit(float(q_hat), delta_inf, eps, amp, identifiable=True)


def default_tolerance(series: DeltaSeries) -> float:
    """1e-8 for analytic series; max(1e-8, 3*median se) for noisy data."""
    if series.stderr is None:
        return 1e-8
    return max(1e-8, 3.0 * float(np.median(series.stderr)))


def classify(series: DeltaSeries, tol: float | None = None) -> A1Report:
    """Decision tree over the principal cascade families."""
    if len(series) < 5:
        raise ValueError(f"need at least 5 series entries, got {len(series)}")
    if tol is None:
        tol = default_tolerance(series)
    d = np.asarray(series.delta, dtype=float)
    scale = max(np.abs(d).max(), 1.0)
    digest = _digest(series)
    m_max = int(max(series.m))

    # constant series: C indistinguishable from 0
    if np.abs(d - d.mean()).max() <= tol * scale:
        return A1Report(
            beta_hat=math.nan,
            delta_inf_hat=float(d.mean()),
            epsilon_hat=float(np.abs(d - d.mean()).max()),
            verdict="monofractal",
            law=ScalingLaw(gamma=float(d.mean()) / series.k, big_c=0.0, beta=0.5, k=series.k),
            m_max=m_max,
            series_digest=digest,
        )

    diffs = np.diff(d)
    if np.abs(diffs - diffs.mean()).max() <= tol * scale and abs(diffs.mean()) > tol * scale:
        return A1Report(
            beta_hat=math.nan,
            delta_inf_hat=math.nan,
            epsilon_hat=math.inf,
            verdict="affine-divergent",
            m_max=m_max,
            series_digest=digest,
        )

    fit = fit_a1(series)
    if fit.identifiable and 0.0 < fit.beta_hat < 1.0 and fit.epsilon_hat <= tol * scale:
        # tie rule: if the fitted relaxation amplitude vanishes, C ~ 0
        if abs(fit.amplitude) < tol * scale:
            verdict = "monofractal"
            law = ScalingLaw(gamma=fit.delta_inf_hat / series.k, big_c=0.0, beta=0.5, k=series.k)
        else:
            verdict = "a1-holds"
            law = law_from_deltas(
                fit.delta_inf_hat + fit.amplitude, fit.delta_inf_hat, fit.beta_hat, series.k
            )
        return A1Report(
            beta_hat=fit.beta_hat,
            delta_inf_hat=fit.delta_inf_hat,
            epsilon_hat=fit.epsilon_hat,
            verdict=verdict,
            law=law,
            m_max=m_max,
            series_digest=digest,
        )

    verdict = "other"
    # Power decay is detected on first differences, which are free of the
    # fitted asymptote: their successive ratios increase toward 1, while a
    # geometric series keeps them constant at beta < 1.
    ratios = diffs[1:] / diffs[:-1]
    if (
        len(ratios) >= 4
        and (np.all(diffs > 0) or np.all(diffs < 0))
        and np.all((ratios > 0) & (ratios < 1))
        and np.all(np.diff(ratios) > -1e-9)
        and ratios[-1] - ratios[0] > 0.01
    ):
        # extrapolate the tail half of the ratios in 1/m; a limit near 1
        # marks power decay
        tail = ratios[len(ratios) // 2 :]
        ms = np.arange(len(ratios) // 2 + 1, len(ratios) + 1, dtype=float)
        _, c0 = np.polyfit(1.0 / ms, tail, 1)
        if c0 >= 0.85:
            verdict = "power-decay"
    return A1Report(
        beta_hat=fit.beta_hat,
        delta_inf_hat=fit.delta_inf_hat,
        epsilon_hat=fit.epsilon_hat,
        verdict=verdict,
        m_max=m_max,
        series_digest=digest,
    )


def characterize(series: DeltaSeries, r: float, k: int, tol: float | None = None) -> A1Report:
    """Full log-Poisson characterization of an a1-holds series."""
    if k != series.k:
        raise ValueError(f"series carries k = {series.k}, got k = {k}")
    report = classify(series, tol=tol)
    if report.verdict != "a1-holds":
        raise ValueError(
            f"series does not satisfy the hierarchical symmetry (verdict: {report.verdict})"
        )
    lp = logpoisson_from_scaling(report.law, r)
    return A1Report(
        beta_hat=report.beta_hat,
        delta_inf_hat=report.delta_inf_hat,
        epsilon_hat=report.epsilon_hat,
        verdict=report.verdict,
        law=report.law,
        logpoisson=lp,
        m_max=report.m_max,
        series_digest=report.series_digest,
    )
