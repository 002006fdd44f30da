"""Log-infinitely-divisible generator algebra.

A generator describes the law of log W for a cascade multiplier W via a
Levy triplet (drift, sigma2, nu) restricted to the compound-Poisson
regime: nu has finite total mass, represented as a finite set of atoms
plus an optional truncated power-law tail.  The uncompensated cumulant
function

    psi(p) = ln E[W^p]
           = drift*p + sigma2*p**2/2 + integral (e**(p*x) - 1) nu(dx)

is used throughout; compensation is absorbed into the drift, which
leaves all increments psi(p+k) - psi(p) unchanged.

All moment arithmetic stays in log space; non-finite intermediates
raise instead of saturating.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .exponents import DeltaSeries, ScalingLaw

__all__ = [
    "LogPoissonParams",
    "StableTail",
    "LevyGenerator",
    "logpoisson_from_scaling",
    "ln_moment",
    "delta_series_analytic",
    "sample_logW",
    "normalize_mean_one",
    "carleman_terms",
    "carleman_partial_sum",
    "determinacy_verdict",
    "generator_to_dict",
    "generator_from_dict",
    "generator_to_json",
    "generator_from_json",
]


@dataclass(frozen=True)
class LogPoissonParams:
    """log W = a + b*N with N ~ Poisson(lam); contracting case b < 0."""

    a: float
    b: float
    lam: float

    def __post_init__(self):
        if not self.b < 0:
            raise ValueError(f"jump size b must be < 0, got {self.b}")
        if not self.lam > 0:
            raise ValueError(f"Poisson rate must be > 0, got {self.lam}")


@dataclass(frozen=True)
class StableTail:
    """Truncated power-law jump measure c*|x|**(-1-alpha) dx on [-x_max, -x_min]."""

    alpha: float
    c: float
    x_min: float
    x_max: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise ValueError(f"stable index alpha must lie in (0,2), got {self.alpha}")
        if not self.c > 0:
            raise ValueError(f"tail amplitude c must be > 0, got {self.c}")
        if not (0.0 < self.x_min < self.x_max < math.inf):
            raise ValueError("tail truncation must satisfy 0 < x_min < x_max < inf")

    @property
    def mass(self) -> float:
        """Total jump rate of the truncated tail."""
        return self.c * (self.x_min ** -self.alpha - self.x_max ** -self.alpha) / self.alpha


@dataclass(frozen=True)
class LevyGenerator:
    """Compound-Poisson Levy triplet for log W.

    atoms is a tuple of (jump location x != 0, rate w > 0) pairs; tail,
    when present, adds a truncated power-law jump measure on the
    negative axis.
    """

    drift: float = 0.0
    sigma2: float = 0.0
    atoms: tuple = ()
    tail: StableTail | None = None

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError(f"Gaussian variance must be >= 0, got {self.sigma2}")
        atoms = tuple((float(x), float(w)) for x, w in self.atoms)
        for x, w in atoms:
            if x == 0.0:
                raise ValueError("jump atoms at x = 0 are not allowed")
            if not w > 0:
                raise ValueError(f"jump rates must be > 0, got {w}")
        object.__setattr__(self, "atoms", atoms)


def as_levy(gen) -> LevyGenerator:
    """View any supported generator as a LevyGenerator."""
    if isinstance(gen, LevyGenerator):
        return gen
    if isinstance(gen, LogPoissonParams):
        return LevyGenerator(drift=gen.a, atoms=((gen.b, gen.lam),))
    raise TypeError(f"unsupported generator type {type(gen).__name__}")


def logpoisson_from_scaling(law: ScalingLaw, r: float) -> LogPoissonParams:
    """The unique log-Poisson parameters matching a scaling law at ratio r.

    a = gamma*ln r, b = ln(beta)/k, lam = -C*ln r.
    """
    if not (0.0 < r < 1.0):
        raise ValueError(f"scale ratio r must lie in (0,1), got {r}")
    if not law.big_c > 0:
        raise ValueError(
            "monofractal: C = 0 makes the multiplier deterministic; "
            "no nontrivial log-Poisson parameters exist"
        )
    ln_r = math.log(r)
    return LogPoissonParams(
        a=law.gamma * ln_r,
        b=math.log(law.beta) / law.k,
        lam=-law.big_c * ln_r,
    )


def _tail_integral(tail: StableTail, p: float) -> float:
    """integral (e**(p*x) - 1) c*|x|**(-1-alpha) dx over [-x_max, -x_min]."""
    a, c = tail.alpha, tail.c

    def f(y):  # y = |x|
        return np.expm1(-p * y) * c * y ** (-1.0 - a)

    val, _ = integrate.quad(f, tail.x_min, tail.x_max, epsrel=1e-11, limit=400)
    return val


def ln_moment(gen, p: float) -> float:
    """Cumulant function psi(p) = ln E[W^p]; psi(0) = 0."""
    p = float(p)
    if not math.isfinite(p) or p < 0:
        raise ValueError(f"moment order must be finite and >= 0, got {p}")
    g = as_levy(gen)
    total = g.drift * p + 0.5 * g.sigma2 * p * p
    for x, w in g.atoms:
        term = w * math.expm1(p * x) if p * x < 700 else math.inf
        total += term
    if g.tail is not None:
        total += _tail_integral(g.tail, p)
    if not math.isfinite(total):
        raise OverflowError(f"ln E[W^p] is not finite at p = {p}")
    return total


def delta_series_analytic(gen, r: float, k: int, m_max: int) -> DeltaSeries:
    """Incremental exponents delta_{m*k} = (psi(mk+k) - psi(mk)) / ln r, m = 0..m_max."""
    if not (0.0 < r < 1.0):
        raise ValueError(f"scale ratio r must lie in (0,1), got {r}")
    if k < 1:
        raise ValueError(f"hierarchy step k must be >= 1, got {k}")
    if m_max < 2:
        raise ValueError(f"m_max must be >= 2, got {m_max}")
    ln_r = math.log(r)
    psi = [ln_moment(gen, m * k) for m in range(m_max + 2)]
    deltas = [(psi[m + 1] - psi[m]) / ln_r for m in range(m_max + 1)]
    return DeltaSeries(k=k, m=tuple(range(m_max + 1)), delta=tuple(deltas))


def sample_logW(gen, count: int, seed: int) -> np.ndarray:
    """Draw i.i.d. samples of log W, deterministic given (gen, count, seed).

    Uses a counter-based (Philox) stream keyed by the seed.  The jump
    part draws one Poisson count per sample from the total jump rate
    and then assigns jumps to atoms/tail by a categorical pick, so two
    generators with equal total rate sampled with the same seed share
    their jump counts (useful for common-random-number comparisons).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    g = as_levy(gen)
    rng = np.random.Generator(np.random.Philox(key=int(seed)))

    out = np.full(count, g.drift, dtype=float)
    if g.sigma2 > 0:
        out += rng.normal(0.0, math.sqrt(g.sigma2), size=count)

    locs = [x for x, _ in g.atoms]
    rates = [w for _, w in g.atoms]
    tail = g.tail
    if tail is not None:
        rates.append(tail.mass)
    total_rate = float(sum(rates))
    if total_rate == 0.0:
        return out

    n_jumps = rng.poisson(total_rate, size=count)
    t = int(n_jumps.sum())
    if t == 0:
        return out

    cum = np.cumsum(rates) / total_rate
    pick = np.searchsorted(cum, rng.random(t), side="right")
    sizes = np.empty(t, dtype=float)
    for i, x in enumerate(locs):
        sizes[pick == i] = x
    if tail is not None:
        sel = pick == len(locs)
        if sel.any():
            # inverse-CDF draw from c*y**(-1-alpha) on [x_min, x_max], y = |x|
            v = rng.random(int(sel.sum()))
            lo, hi, a = tail.x_min ** -tail.alpha, tail.x_max ** -tail.alpha, tail.alpha
            sizes[sel] = -((lo - v * (lo - hi)) ** (-1.0 / a))

    sample_idx = np.repeat(np.arange(count), n_jumps)
    out += np.bincount(sample_idx, weights=sizes, minlength=count)
    return out


def normalize_mean_one(gen):
    """Shift the drift so that E[W] = 1 (psi(1) = 0); idempotent."""
    shift = ln_moment(gen, 1.0)
    if isinstance(gen, LogPoissonParams):
        return replace(gen, a=gen.a - shift)
    g = as_levy(gen)
    return replace(g, drift=g.drift - shift)


def carleman_terms(gen, P: int) -> np.ndarray:
    """Terms (E[W^{2p}])**(-1/(2p)) for p = 1..P."""
    if P < 1:
        raise ValueError(f"P must be >= 1, got {P}")
    return np.array([math.exp(-ln_moment(gen, 2.0 * p) / (2.0 * p)) for p in range(1, P + 1)])


def carleman_partial_sum(gen, P: int) -> float:
    """Partial Carleman sum sum_{p=1}^P (E[W^{2p}])**(-1/(2p))."""
    return float(carleman_terms(gen, P).sum())


def determinacy_verdict(gen, P: int = 200, threshold: float = 1e-6) -> str:
    """Moment-determinacy dichotomy from the Carleman terms.

    'determinate-divergent' when the tail terms stay bounded away from
    zero (the sum diverges, so the moments pin down the law);
    'indeterminate-convergent' when the tail terms decay geometrically
    (the sum converges); 'inconclusive' otherwise.
    """
    if P < 10:
        raise ValueError(f"P must be >= 10, got {P}")
    terms = carleman_terms(gen, P)
    tail = terms[P // 2 :]
    if tail.min() >= threshold:
        return "determinate-divergent"
    pos = tail[tail > 0]
    if len(pos) >= 5:
        y = np.log(pos)
        x = np.arange(len(pos), dtype=float)
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        ss_tot = float(((y - y.mean()) ** 2).sum())
        r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
        if math.exp(slope) < 1.0 and r2 > 0.999:
            return "indeterminate-convergent"
    return "inconclusive"


# --- JSON wire format --------------------------------------------------

def generator_to_dict(gen) -> dict:
    """Serialize a generator to its JSON document (lossless round trip)."""
    if isinstance(gen, LogPoissonParams):
        return {"kind": "log-poisson", "a": gen.a, "b": gen.b, "lambda": gen.lam}
    g = as_levy(gen)
    if g.tail is not None:
        doc = {
            "kind": "log-stable",
            "drift": g.drift,
            "alpha": g.tail.alpha,
            "c": g.tail.c,
            "x_min": g.tail.x_min,
            "x_max": g.tail.x_max,
        }
        if g.atoms:
            doc["atoms"] = [[x, w] for x, w in g.atoms]
        return doc
    if g.sigma2 > 0 and not g.atoms:
        return {"kind": "log-normal", "drift": g.drift, "sigma2": g.sigma2}
    return {
        "kind": "atomic",
        "drift": g.drift,
        "sigma2": g.sigma2,
        "atoms": [[x, w] for x, w in g.atoms],
    }


def generator_from_dict(doc: dict):
    kind = doc.get("kind")
    if kind == "log-poisson":
        return LogPoissonParams(a=doc["a"], b=doc["b"], lam=doc["lambda"])
    if kind == "log-normal":
        return LevyGenerator(drift=doc["drift"], sigma2=doc["sigma2"])
    if kind == "log-stable":
        tail = StableTail(alpha=doc["alpha"], c=doc["c"], x_min=doc["x_min"], x_max=doc["x_max"])
        atoms = tuple((x, w) for x, w in doc.get("atoms", []))
        return LevyGenerator(drift=doc["drift"], atoms=atoms, tail=tail)
    if kind == "atomic":
        return LevyGenerator(
            drift=doc["drift"],
            sigma2=doc.get("sigma2", 0.0),
            atoms=tuple((x, w) for x, w in doc.get("atoms", [])),
        )
    raise ValueError(f"unknown generator kind {kind!r}")


def generator_to_json(gen) -> str:
    return json.dumps(generator_to_dict(gen))


def generator_from_json(text: str):
    return generator_from_dict(json.loads(text))
