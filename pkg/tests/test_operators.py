import math

import numpy as np
import pytest

from hlab.hgroup import Convention, GroupDim, HPoint, dilate, origin
from hlab.integrate import QuadSpec, SeededStream
from hlab.operators import (
    KernelHomogeneityError,
    KernelSpec,
    McEngine,
    OperatorKind,
    OperatorSpec,
    QuadEngine,
    TestFunction,
    eval_hardy,
    eval_hilbert,
    eval_hlp,
    eval_kernel_op,
    hardy_kernel,
    hilbert_kernel,
    hlp_kernel,
    kernel_constant,
    weighted_norm,
)
from hlab.specfun import (
    AlphaProfile,
    DivergentConstantError,
    hilbert_constant,
    hlp_constant,
    i_m_closed,
)

DIM1 = GroupDim(1)
E1 = HPoint.of(1, (1.0, 0.0, 0.0))
OMEGA = 2 * math.pi**2
TIGHT = QuadEngine(QuadSpec(rel_tol=1e-10, abs_tol=1e-14))


def extremals(*alphas):
    return [TestFunction.extremal(a) for a in alphas]


def spec_of(kind, *alphas, convention=Convention.GEOMETRIC, kernel=None):
    return OperatorSpec(kind, DIM1, AlphaProfile.of(*alphas), convention, kernel)


class TestTestFunction:
    def test_extremal_values(self):
        f = TestFunction.extremal(1.5)
        assert f(origin(1)) == 0.0
        assert math.isclose(f(HPoint.of(1, (1, 0, 0))), 1.0, rel_tol=1e-15)
        assert np.allclose(f.radial(np.array([2.0])), 2.0**-1.5)

    def test_step_semantics(self):
        f = TestFunction.step(1.0, [0.5, 2.0], [1.0, 0.3, 0.8])
        mod = f.modulation
        vals = mod(np.array([0.1, 0.5, 0.7, 2.0, 5.0]))
        assert np.array_equal(vals, [1.0, 1.0, 0.3, 0.3, 0.8])

    def test_step_validation(self):
        with pytest.raises(ValueError):
            TestFunction.step(1.0, [1.0], [0.5, 1.5])  # value above 1
        with pytest.raises(ValueError):
            TestFunction.step(1.0, [1.0], [0.5])  # wrong arity

    def test_positive_exponent_required(self):
        with pytest.raises(ValueError):
            TestFunction.extremal(0.0)


class TestWeightedNorm:
    def test_extremal_at_own_exponent(self):
        assert weighted_norm(TestFunction.extremal(1.3), 1.3, DIM1) == 1.0

    def test_constant_modulation(self):
        f = TestFunction.modulated(1.0, lambda s: np.full_like(np.asarray(s, float), 0.5))
        assert math.isclose(weighted_norm(f, 1.0, DIM1), 0.5, rel_tol=1e-15)

    def test_monotone_modulation_approaches_sup(self):
        f = TestFunction.modulated(1.0, lambda s: s / (1.0 + s))
        assert weighted_norm(f, 1.0, DIM1) >= 0.9999

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            weighted_norm(TestFunction.extremal(1.0), 0.0, DIM1)


class TestHardyEvaluator:
    def test_constant_input_averages_to_one(self):
        # modulation s -> s^alpha makes f identically 1 inside the unit ball
        f = TestFunction.modulated(1.0, lambda s: np.asarray(s, float) ** 1.0)
        spec = spec_of(OperatorKind.HARDY, 1.0)
        for g in (0.3, 1.0):
            x = dilate(g, E1)
            est = eval_hardy([f], x, spec, TIGHT)
            assert math.isclose(est.value, 1.0, rel_tol=1e-10)

    def test_extremal_m1(self):
        est = eval_hardy(extremals(1.0), E1, spec_of(OperatorKind.HARDY, 1.0), TIGHT)
        assert abs(est.value - 4.0 / 3.0) <= 1e-10

    def test_extremal_m2_with_dilation(self):
        spec = spec_of(OperatorKind.HARDY, 1.0, 1.0)
        x = dilate(2.0, E1)
        est = eval_hardy(extremals(1.0, 1.0), x, spec, TIGHT)
        assert abs(2.0**2 * est.value - math.pi / 6) <= 1e-8

    def test_mc_engine_matches(self):
        spec = spec_of(OperatorKind.HARDY, 1.0, 1.0)
        mc = eval_hardy(
            extremals(1.0, 1.0), E1, spec, McEngine(200_000, SeededStream(31))
        )
        assert abs(mc.value - math.pi / 6) <= 3 * mc.std_error

    def test_rejects_origin(self):
        with pytest.raises(ValueError):
            eval_hardy(extremals(1.0), origin(1), spec_of(OperatorKind.HARDY, 1.0))

    def test_kind_mismatch(self):
        with pytest.raises(ValueError):
            eval_hardy(extremals(1.0), E1, spec_of(OperatorKind.HLP, 1.0))


class TestHlpEvaluator:
    def test_extremal_m1(self):
        est = eval_hlp(extremals(1.0), E1, spec_of(OperatorKind.HLP, 1.0), TIGHT)
        assert abs(est.value - 8 * math.pi**2 / 3) / (8 * math.pi**2 / 3) <= 1e-8

    def test_homogeneity_in_x(self):
        spec = spec_of(OperatorKind.HLP, 1.0)
        vals = []
        for g in (1.0, 2.0):
            est = eval_hlp(extremals(1.0), dilate(g, E1), spec, TIGHT)
            vals.append(g**1.0 * est.value)
        assert abs(vals[0] - vals[1]) / vals[0] <= 1e-6

    def test_extremal_m2(self):
        spec = spec_of(OperatorKind.HLP, 1.0, 1.0)
        est = eval_hlp(extremals(1.0, 1.0), E1, spec, TIGHT)
        closed = hlp_constant(1, AlphaProfile.of(1.0, 1.0)).value
        assert abs(est.value - closed) / closed <= 1e-8
        assert math.isclose(closed, 16 * math.pi**4 / 9, rel_tol=1e-13)

    def test_tabulated_convention_scales(self):
        est_g = eval_hlp(extremals(1.0), E1, spec_of(OperatorKind.HLP, 1.0), TIGHT)
        est_p = eval_hlp(
            extremals(1.0),
            E1,
            spec_of(OperatorKind.HLP, 1.0, convention=Convention.PAPER_FORMULA),
            TIGHT,
        )
        assert math.isclose(est_p.value, 2.0 * est_g.value, rel_tol=1e-12)

    def test_mc_engine_matches(self):
        spec = spec_of(OperatorKind.HLP, 1.0)
        mc = eval_hlp(extremals(1.0), E1, spec, McEngine(200_000, SeededStream(32)))
        assert abs(mc.value - 8 * math.pi**2 / 3) <= 3 * mc.std_error


class TestHilbertEvaluator:
    def test_extremal_m1(self):
        est = eval_hilbert(extremals(2.0), E1, spec_of(OperatorKind.HILBERT, 2.0), TIGHT)
        assert abs(est.value - math.pi**3 / 2) / (math.pi**3 / 2) <= 1e-8

    def test_tabulated_convention(self):
        est = eval_hilbert(
            extremals(2.0),
            E1,
            spec_of(OperatorKind.HILBERT, 2.0, convention=Convention.PAPER_FORMULA),
            TIGHT,
        )
        assert abs(est.value - math.pi**3) / math.pi**3 <= 1e-8

    def test_m2_matches_product_integral(self):
        spec = spec_of(OperatorKind.HILBERT, 1.0, 1.0)
        x = dilate(1.0, E1)
        est = eval_hilbert(extremals(1.0, 1.0), x, spec, TIGHT)
        expected = (OMEGA / 4) ** 2 * i_m_closed(2.0, (0.25, 0.25))
        assert abs(est.value - expected) / expected <= 1e-8
        assert math.isclose(
            expected, hilbert_constant(1, AlphaProfile.of(1.0, 1.0)).value, rel_tol=1e-13
        )

    def test_mc_engine_matches(self):
        spec = spec_of(OperatorKind.HILBERT, 2.0)
        mc = eval_hilbert(extremals(2.0), E1, spec, McEngine(200_000, SeededStream(33)))
        assert abs(mc.value - math.pi**3 / 2) <= 3 * mc.std_error


class TestNormBound:
    def test_modulated_tuples_respect_bound_mc(self):
        rng = np.random.default_rng(55)
        spec = spec_of(OperatorKind.HARDY, 1.0, 1.0)
        bound = spec.constant().value
        lattice = np.logspace(-2, 2, 41)
        for trial in range(10):
            fs = []
            for a in spec.profile.alphas:
                k = int(rng.integers(1, 4))
                edges = np.sort(rng.choice(lattice, size=k, replace=False))
                fs.append(TestFunction.step(a, edges, rng.uniform(0.1, 1.0, k + 1)))
            est = eval_hardy(fs, E1, spec, McEngine(100_000, SeededStream(600 + trial)))
            norms = math.prod(
                weighted_norm(f, a, DIM1) for f, a in zip(fs, spec.profile.alphas)
            )
            ratio = est.value / norms
            rel_se = est.std_error / max(est.value, 1e-300)
            assert ratio <= bound * (1.0 + 3.0 * rel_se + 1e-6)


class TestEngineAgreement:
    @pytest.mark.parametrize(
        "kind,evaluator,alphas,seed",
        [
            (OperatorKind.HARDY, eval_hardy, (1.0,), 41),
            (OperatorKind.HARDY, eval_hardy, (1.0, 1.0), 42),
            (OperatorKind.HLP, eval_hlp, (1.0,), 43),
            (OperatorKind.HLP, eval_hlp, (1.0, 1.0), 44),
            (OperatorKind.HILBERT, eval_hilbert, (2.0,), 45),
            (OperatorKind.HILBERT, eval_hilbert, (1.0, 1.0), 46),
        ],
    )
    def test_mc_and_quad_agree(self, kind, evaluator, alphas, seed):
        spec = spec_of(kind, *alphas)
        fs = extremals(*alphas)
        quad = evaluator(fs, E1, spec, TIGHT)
        mc = evaluator(fs, E1, spec, McEngine(150_000, SeededStream(seed)))
        assert abs(mc.value - quad.value) <= 3 * max(mc.std_error, 1e-12 * quad.value)


class TestDilationCovariance:
    @pytest.mark.parametrize(
        "kind,evaluator",
        [
            (OperatorKind.HARDY, eval_hardy),
            (OperatorKind.HLP, eval_hlp),
            (OperatorKind.HILBERT, eval_hilbert),
        ],
    )
    def test_gauge_power_times_value_constant(self, kind, evaluator):
        spec = spec_of(kind, 1.0)
        vals = []
        for g in (0.5, 1.0, 2.0, 10.0):
            est = evaluator(extremals(1.0), dilate(g, E1), spec, TIGHT)
            vals.append(g**1.0 * est.value)
        spread = (max(vals) - min(vals)) / abs(np.mean(vals))
        assert spread <= 1e-6


class TestKernelOperator:
    def test_hardy_specialization(self):
        kern = hardy_kernel(DIM1, 1)
        spec = spec_of(OperatorKind.KERNEL, 1.0, kernel=kern)
        est = eval_kernel_op(kern, extremals(1.0), E1, spec, TIGHT)
        named = eval_hardy(extremals(1.0), E1, spec_of(OperatorKind.HARDY, 1.0), TIGHT)
        assert abs(est.value - named.value) / named.value <= 1e-8

    def test_hlp_specialization(self):
        kern = hlp_kernel(DIM1, 2)
        spec = spec_of(OperatorKind.KERNEL, 1.0, 1.0, kernel=kern)
        est = eval_kernel_op(kern, extremals(1.0, 1.0), E1, spec, TIGHT)
        named = eval_hlp(
            extremals(1.0, 1.0), E1, spec_of(OperatorKind.HLP, 1.0, 1.0), TIGHT
        )
        assert abs(est.value - named.value) / named.value <= 1e-6

    def test_hilbert_specialization(self):
        kern = hilbert_kernel(DIM1, 1)
        spec = spec_of(OperatorKind.KERNEL, 2.0, kernel=kern)
        est = eval_kernel_op(kern, extremals(2.0), E1, spec, TIGHT)
        named = eval_hilbert(extremals(2.0), E1, spec_of(OperatorKind.HILBERT, 2.0), TIGHT)
        assert abs(est.value - named.value) / named.value <= 1e-6

    def test_linearity_in_kernel(self):
        base = hilbert_kernel(DIM1, 1)
        scaled = KernelSpec(
            lambda r0, r1: 3.0 * base.radial_profile(r0, r1),
            base.homogeneity_degree,
        )
        spec = spec_of(OperatorKind.KERNEL, 2.0, kernel=scaled)
        est_scaled = eval_kernel_op(scaled, extremals(2.0), E1, spec, TIGHT)
        est_base = eval_kernel_op(base, extremals(2.0), E1, spec, TIGHT)
        assert math.isclose(est_scaled.value, 3.0 * est_base.value, rel_tol=1e-12)

    def test_wrong_declared_degree(self):
        bad = KernelSpec(lambda r0, r1: (r0**4 + r1**4) ** -1.0, -3.0)
        spec = spec_of(OperatorKind.KERNEL, 2.0, kernel=hilbert_kernel(DIM1, 1))
        with pytest.raises(KernelHomogeneityError, match="-mQ"):
            eval_kernel_op(bad, extremals(2.0), E1, spec)

    def test_inhomogeneous_profile_reports_worst_ratio(self):
        bad = KernelSpec(lambda r0, r1: (r0**4 + r1**3) ** -1.0, -4.0)
        spec = spec_of(OperatorKind.KERNEL, 2.0, kernel=hilbert_kernel(DIM1, 1))
        with pytest.raises(KernelHomogeneityError, match="worst probe"):
            eval_kernel_op(bad, extremals(2.0), E1, spec)

    def test_mc_engine_specialization(self):
        kern = hilbert_kernel(DIM1, 1)
        spec = spec_of(OperatorKind.KERNEL, 2.0, kernel=kern)
        mc = eval_kernel_op(
            kern, extremals(2.0), E1, spec, McEngine(150_000, SeededStream(34))
        )
        assert abs(mc.value - math.pi**3 / 2) <= 3 * mc.std_error


class TestKernelConstant:
    def test_hardy_value(self):
        est = kernel_constant(hardy_kernel(DIM1, 1), DIM1, AlphaProfile.of(1.0), TIGHT)
        assert abs(est.value - 4.0 / 3.0) <= 1e-9

    def test_hilbert_value(self):
        est = kernel_constant(hilbert_kernel(DIM1, 1), DIM1, AlphaProfile.of(2.0), TIGHT)
        assert abs(est.value - math.pi**3 / 2) / (math.pi**3 / 2) <= 1e-8

    def test_divergent_profile_rejected(self):
        with pytest.raises(DivergentConstantError):
            kernel_constant(hardy_kernel(DIM1, 1), DIM1, AlphaProfile.of(4.0))


class TestOperatorSpec:
    def test_constant_dispatch(self):
        assert math.isclose(
            spec_of(OperatorKind.HARDY, 1.0).constant().value, 4.0 / 3.0, rel_tol=1e-14
        )
        with pytest.raises(ValueError):
            spec_of(OperatorKind.KERNEL, 1.0, kernel=hardy_kernel(DIM1, 1)).constant()

    def test_profile_validated_against_q(self):
        with pytest.raises(DivergentConstantError):
            spec_of(OperatorKind.HARDY, 4.5)

    def test_kernel_kind_needs_kernel(self):
        with pytest.raises(ValueError):
            OperatorSpec(OperatorKind.KERNEL, DIM1, AlphaProfile.of(1.0))

    def test_quad_engine_rejects_large_m(self):
        spec = spec_of(OperatorKind.HARDY, *([0.5] * 4))
        with pytest.raises(ValueError, match="m <= 3"):
            eval_hardy(extremals(*[0.5] * 4), E1, spec, TIGHT)
