import math

import numpy as np
import pytest

from hscascade.exponents import ScalingLaw, zeta
from hscascade.generators import (
    LevyGenerator,
    LogPoissonParams,
    StableTail,
    as_levy,
    carleman_partial_sum,
    carleman_terms,
    delta_series_analytic,
    determinacy_verdict,
    generator_from_json,
    generator_to_json,
    ln_moment,
    logpoisson_from_scaling,
    normalize_mean_one,
    sample_logW,
)

SL = ScalingLaw(gamma=1.0 / 9.0, big_c=2.0, beta=2.0 / 3.0, k=3)
SL_LP = logpoisson_from_scaling(SL, 0.5)
LOGNORMAL = LevyGenerator(drift=-0.1, sigma2=0.2)


def random_law(rng):
    return ScalingLaw(
        gamma=rng.uniform(-1, 1),
        big_c=rng.uniform(0.1, 5),
        beta=rng.uniform(0.05, 0.95),
        k=int(rng.integers(1, 5)),
    )


class TestLogPoissonFromScaling:
    def test_sl_values(self):
        assert SL_LP.a == pytest.approx(-0.077016, abs=1e-6)
        assert SL_LP.b == pytest.approx(-0.135155, abs=1e-6)
        assert SL_LP.lam == pytest.approx(1.386294, abs=1e-6)

    def test_unit_normalization(self):
        lp = logpoisson_from_scaling(
            ScalingLaw(gamma=0.0, big_c=1.0, beta=1.0 / math.e, k=1), 1.0 / math.e
        )
        assert lp.a == pytest.approx(0.0, abs=1e-15)
        assert lp.b == pytest.approx(-1.0, abs=1e-12)
        assert lp.lam == pytest.approx(1.0, abs=1e-12)

    def test_symmetric_case(self):
        lp = logpoisson_from_scaling(ScalingLaw(gamma=1.0, big_c=1.0, beta=0.5, k=1), 0.5)
        ln2 = math.log(2.0)
        assert lp.a == pytest.approx(-ln2, abs=1e-12)
        assert lp.b == pytest.approx(-ln2, abs=1e-12)
        assert lp.lam == pytest.approx(ln2, abs=1e-12)

    def test_rejects_monofractal_and_bad_r(self):
        with pytest.raises(ValueError, match="monofractal"):
            logpoisson_from_scaling(ScalingLaw(gamma=0.1, big_c=0.0, beta=0.5, k=1), 0.5)
        with pytest.raises(ValueError):
            logpoisson_from_scaling(SL, 1.5)


class TestLnMoment:
    def test_zero_order(self):
        assert ln_moment(SL_LP, 0.0) == 0.0
        assert ln_moment(LOGNORMAL, 0.0) == 0.0

    def test_log_poisson_matches_zeta(self):
        assert ln_moment(SL_LP, 3.0) == pytest.approx(math.log(0.5), abs=1e-12)

    def test_log_normal(self):
        assert ln_moment(LOGNORMAL, 2.0) == pytest.approx(0.2, abs=1e-15)

    def test_moment_identity_random_laws(self):
        rng = np.random.default_rng(21)
        for _ in range(30):
            law = random_law(rng)
            r = rng.uniform(0.1, 0.9)
            lp = logpoisson_from_scaling(law, r)
            for p in range(31):
                assert ln_moment(lp, p) == pytest.approx(
                    zeta(law, p) * math.log(r), abs=1e-10
                )

    def test_rejects_negative_order(self):
        with pytest.raises(ValueError):
            ln_moment(SL_LP, -1.0)

    def test_overflow_reported(self):
        gen = LevyGenerator(drift=0.0, atoms=((5.0, 1.0),))
        with pytest.raises(OverflowError):
            ln_moment(gen, 1000.0)


class TestDeltaSeriesAnalytic:
    def test_sl_series(self):
        series = delta_series_analytic(SL_LP, 0.5, 3, 3)
        expected = (1.0, 7.0 / 9.0, 1.0 / 3.0 + (2.0 / 3.0) ** 2 * (2.0 / 3.0),
                    1.0 / 3.0 + (2.0 / 3.0) ** 3 * (2.0 / 3.0))
        assert series.delta == pytest.approx(expected, abs=1e-12)

    def test_log_normal_affine(self):
        series = delta_series_analytic(LOGNORMAL, 0.5, 1, 10)
        diffs = np.diff(series.delta)
        step = 0.2 / math.log(0.5)
        assert np.allclose(diffs, step, atol=1e-12)
        assert step == pytest.approx(-0.288539, abs=1e-6)

    def test_deterministic_constant(self):
        gen = LevyGenerator(drift=-0.3)
        series = delta_series_analytic(gen, 0.5, 2, 5)
        assert np.allclose(series.delta, -0.3 * 2 / math.log(0.5), atol=1e-15)

    def test_converse_recurrence(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            law = random_law(rng)
            r = rng.uniform(0.1, 0.9)
            lp = logpoisson_from_scaling(law, r)
            series = delta_series_analytic(lp, r, law.k, 20)
            d = np.asarray(series.delta)
            beta = math.exp(lp.b * law.k)
            dinf = lp.a * law.k / math.log(r)
            resid = d[1:] - (1.0 - beta) * dinf - beta * d[:-1]
            assert np.abs(resid).max() < 1e-10

    def test_gaussian_part_diverges_affinely(self):
        # sigma2 > 0: deltas affine in m with slope sigma2*k**2/ln r, no finite limit
        gen = LevyGenerator(drift=0.0, sigma2=0.5, atoms=((-1.0, 0.3),))
        series = delta_series_analytic(gen, 0.5, 2, 30)
        diffs = np.diff(series.delta)[20:]
        assert np.allclose(diffs, 0.5 * 4 / math.log(0.5), atol=1e-6)

    def test_positive_jump_diverges(self):
        gen = LevyGenerator(drift=0.0, atoms=((-1.0, 1.0), (0.5, 0.1)))
        series = delta_series_analytic(gen, 0.5, 1, 30)
        d = np.asarray(series.delta)
        assert np.all(np.diff(d[10:]) < 0)  # ln r < 0 flips the sign of the blow-up
        assert d[-1] < -100


class TestSampleLogW:
    def test_deterministic_generator(self):
        out = sample_logW(LevyGenerator(drift=-0.3), 100, seed=1)
        assert np.all(out == -0.3)

    def test_poisson_mean(self):
        lp = LogPoissonParams(a=0.0, b=-1.0, lam=1.0)
        out = sample_logW(lp, 1_000_000, seed=42)
        n_mean = -out.mean()  # N = -log W here
        assert abs(n_mean - 1.0) < 3e-3

    def test_seed_determinism(self):
        a = sample_logW(SL_LP, 10_000, seed=9)
        b = sample_logW(SL_LP, 10_000, seed=9)
        assert np.array_equal(a, b)
        c = sample_logW(SL_LP, 10_000, seed=10)
        assert not np.array_equal(a, c)

    def test_monte_carlo_moments(self):
        n = 1_000_000
        logw = sample_logW(SL_LP, n, seed=3)
        for p in (1, 2, 3, 4):
            x = np.exp(p * logw)
            se = x.std(ddof=1) / math.sqrt(n)
            assert abs(x.mean() - math.exp(ln_moment(SL_LP, p))) < 4 * se

    def test_stable_tail_samplable(self):
        gen = LevyGenerator(
            drift=0.0, tail=StableTail(alpha=0.5, c=0.05, x_min=1e-3, x_max=1.0)
        )
        out = sample_logW(gen, 50_000, seed=0)
        assert np.all(out <= 0.0)
        # sample mean of log W should match psi'(0) = integral x nu(dx)
        t = gen.tail
        mean_jump = -t.c * (t.x_max ** (1 - t.alpha) - t.x_min ** (1 - t.alpha)) / (1 - t.alpha)
        assert out.mean() == pytest.approx(mean_jump, abs=4 * out.std() / math.sqrt(50_000))


class TestNormalizeMeanOne:
    def test_log_poisson(self):
        lp = normalize_mean_one(LogPoissonParams(a=0.0, b=-1.0, lam=1.0))
        assert lp.a == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)
        assert ln_moment(lp, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_idempotent(self):
        gen = normalize_mean_one(SL_LP)
        again = normalize_mean_one(gen)
        assert again.a == pytest.approx(gen.a, abs=1e-15)

    def test_log_normal(self):
        gen = normalize_mean_one(LevyGenerator(drift=0.0, sigma2=0.2))
        assert gen.drift == pytest.approx(-0.1, abs=1e-15)


class TestCarleman:
    def test_log_poisson_terms_converge(self):
        terms = carleman_terms(SL_LP, 500)
        assert terms[-1] == pytest.approx(2.0 ** (1.0 / 9.0), abs=2e-3)
        assert carleman_partial_sum(SL_LP, 1000) > 1000.0

    def test_log_normal_geometric_sum(self):
        total = carleman_partial_sum(LOGNORMAL, 300)
        closed = math.exp(0.1) * math.exp(-0.2) / (1.0 - math.exp(-0.2))
        assert total == pytest.approx(closed, abs=1e-4)
        assert total == pytest.approx(4.99169, abs=1e-4)

    def test_deterministic(self):
        gen = LevyGenerator(drift=math.log(0.7))
        terms = carleman_terms(gen, 50)
        assert np.allclose(terms, 1.0 / 0.7, atol=1e-12)
        assert carleman_partial_sum(gen, 50) == pytest.approx(50 / 0.7, rel=1e-12)

    def test_verdicts(self):
        assert determinacy_verdict(SL_LP) == "determinate-divergent"
        assert determinacy_verdict(LOGNORMAL) == "indeterminate-convergent"
        assert determinacy_verdict(LevyGenerator(drift=-0.5)) == "determinate-divergent"


class TestSerialization:
    def test_round_trips(self):
        gens = [
            SL_LP,
            LOGNORMAL,
            LevyGenerator(drift=0.1, atoms=((-1.0, 0.5), (-2.0, 0.25))),
            LevyGenerator(
                drift=0.0, tail=StableTail(alpha=0.5, c=0.05, x_min=1e-4, x_max=1.0)
            ),
        ]
        for gen in gens:
            assert generator_from_json(generator_to_json(gen)) == gen

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generator_from_json('{"kind": "mystery"}')


class TestValidation:
    def test_log_poisson_params(self):
        with pytest.raises(ValueError):
            LogPoissonParams(a=0.0, b=0.1, lam=1.0)
        with pytest.raises(ValueError):
            LogPoissonParams(a=0.0, b=-1.0, lam=0.0)

    def test_levy_generator(self):
        with pytest.raises(ValueError):
            LevyGenerator(sigma2=-1.0)
        with pytest.raises(ValueError):
            LevyGenerator(atoms=((0.0, 1.0),))
        with pytest.raises(ValueError):
            LevyGenerator(atoms=((-1.0, -1.0),))

    def test_stable_tail(self):
        with pytest.raises(ValueError):
            StableTail(alpha=2.5, c=1.0, x_min=0.1, x_max=1.0)
        with pytest.raises(ValueError):
            StableTail(alpha=0.5, c=1.0, x_min=1.0, x_max=0.1)

    def test_as_levy(self):
        g = as_levy(SL_LP)
        assert g.atoms == ((SL_LP.b, SL_LP.lam),)
        with pytest.raises(TypeError):
            as_levy("nope")
