"""Evaluation of the m-linear integral operators and weighted-type norms.

Four operators are evaluated at gauge-radial test functions: a general
nonnegative homogeneous-kernel operator, the averaging (Hardy-type)
operator over the tuple ball, the max-kernel (Hardy-Littlewood-Polya type)
operator, and the sum-kernel (Hilbert-type) operator.

Every evaluator reduces to the dilation identity: the value at ``x`` is an
integral over tuples at base gauge 1 against ``f_i(delta_{|x|_h} .)``.  The
quadrature engine performs the polar radial reduction (one radial variable
per factor); the Monte Carlo engine samples tuples directly with importance
tilts taken from the operator's exponent profile.

Convention handling: the volume convention applies jointly to the
normalizing ball volume and to every polar surface constant, so the
Hardy-type value is convention-independent while max-kernel and sum-kernel
values scale by 2^m between conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .hgroup import (
    Convention,
    GroupDim,
    HPoint,
    gauge,
    gauge_array,
    sphere_measure,
    unit_ball_volume,
)
from .integrate import (
    Domain,
    Estimate,
    FullSpaceHeavyTail,
    Method,
    QuadSpec,
    SeededStream,
    TupleBall,
    mc_integrate,
    quad_1d,
    quad_tensor,
)
from .specfun import AlphaProfile, ConstantResult, hardy_constant, hilbert_constant, hlp_constant

__all__ = [
    "KernelHomogeneityError",
    "KernelSpec",
    "McEngine",
    "OperatorKind",
    "OperatorSpec",
    "QuadEngine",
    "TestFunction",
    "eval_hardy",
    "eval_hilbert",
    "eval_hlp",
    "eval_kernel_op",
    "hardy_kernel",
    "hilbert_kernel",
    "hlp_kernel",
    "kernel_constant",
    "weighted_norm",
]

_NORM_GRID = np.logspace(-6.0, 6.0, 10_000)


class OperatorKind(Enum):
    KERNEL = "kernel"
    HARDY = "hardy"
    HLP = "hlp"
    HILBERT = "hilbert"


class KernelHomogeneityError(ValueError):
    """A kernel failed its homogeneity probe."""


@dataclass(frozen=True)
class KernelSpec:
    """A nonnegative gauge-radial kernel of homogeneity degree -mQ.

    ``radial_profile(r0, r1, ..., rm)`` gives the kernel as a function of the
    gauges of its m + 1 arguments and must be numpy-vectorized.  When
    ``simplex_support`` is set the profile vanishes outside
    ``sum r_i^2 < simplex_support^2 * r0^2``, which lets the quadrature
    engine integrate over the exact support instead of chasing a jump.
    """

    radial_profile: Callable[..., np.ndarray]
    homogeneity_degree: float
    base_gauge: float = 1.0
    simplex_support: float | None = None


@dataclass(frozen=True)
class TestFunction:
    """Gauge-radial test function ``|x|_h^{-alpha_j} * modulation(|x|_h)``.

    ``modulation`` is a bounded function of the gauge into (0, 1]; ``None``
    means the extremal power itself.  ``breakpoints`` lists gauges where the
    modulation is non-smooth so quadrature can split there.  The value at the
    origin is 0 by convention.
    """

    alpha_j: float
    modulation: Callable[[np.ndarray], np.ndarray] | None = None
    breakpoints: tuple[float, ...] = ()
    description: str = "extremal power"

    __test__ = False  # keep pytest from collecting this as a test class

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha_j) and self.alpha_j > 0.0):
            raise ValueError(f"alpha_j must be positive, got {self.alpha_j!r}")

    @property
    def is_extremal(self) -> bool:
        return self.modulation is None

    @staticmethod
    def extremal(alpha_j: float) -> "TestFunction":
        return TestFunction(alpha_j)

    @staticmethod
    def modulated(
        alpha_j: float,
        modulation: Callable[[np.ndarray], np.ndarray],
        breakpoints: Sequence[float] = (),
        description: str = "modulated power",
    ) -> "TestFunction":
        return TestFunction(alpha_j, modulation, tuple(breakpoints), description)

    @staticmethod
    def step(alpha_j: float, edges: Sequence[float], values: Sequence[float]) -> "TestFunction":
        """Step-function modulation: ``values[k]`` on ``(edges[k-1], edges[k]]``."""
        e = np.asarray(tuple(edges), dtype=float)
        v = np.asarray(tuple(values), dtype=float)
        if v.size != e.size + 1:
            raise ValueError("need len(values) == len(edges) + 1")
        if not ((v > 0.0) & (v <= 1.0)).all():
            raise ValueError("step values must lie in (0, 1]")

        def modulation(s: np.ndarray) -> np.ndarray:
            return v[np.searchsorted(e, s, side="left")]

        return TestFunction(
            alpha_j, modulation, tuple(float(x) for x in e), f"step modulation ({e.size} edges)"
        )

    def radial(self, s: np.ndarray) -> np.ndarray:
        """Radial profile at positive gauges (vectorized)."""
        s = np.asarray(s, dtype=float)
        out = s ** (-self.alpha_j)
        if self.modulation is not None:
            out = out * self.modulation(s)
        return out

    def power_weighted(self, c: float, r: np.ndarray, exponent: float) -> np.ndarray:
        """``(c r)^{-alpha_j} * modulation(c r) * r^exponent`` with the powers
        of ``r`` combined, so exponents close to -Q cannot overflow through an
        intermediate factor near r = 0."""
        r = np.asarray(r, dtype=float)
        out = c**-self.alpha_j * r ** (exponent - self.alpha_j)
        if self.modulation is not None:
            out = out * self.modulation(c * r)
        return out

    def __call__(self, point: HPoint | np.ndarray, n: int | None = None) -> float | np.ndarray:
        if isinstance(point, HPoint):
            g = gauge(point)
            return 0.0 if g == 0.0 else float(self.radial(np.asarray(g)))
        if n is None:
            raise ValueError("coordinate-array evaluation needs the group index n")
        g = gauge_array(point, n)
        out = np.zeros_like(g)
        pos = g > 0.0
        out[pos] = self.radial(g[pos])
        return out


@dataclass(frozen=True)
class OperatorSpec:
    """Which operator, on which group, with which exponent profile."""

    kind: OperatorKind
    dim: GroupDim
    profile: AlphaProfile
    convention: Convention = Convention.GEOMETRIC
    kernel: KernelSpec | None = None

    def __post_init__(self) -> None:
        self.profile.validate_for(self.dim)
        if self.kind is OperatorKind.KERNEL and self.kernel is None:
            raise ValueError("kind=KERNEL requires a KernelSpec")

    @property
    def m(self) -> int:
        return self.profile.m

    def constant(self) -> ConstantResult:
        """Closed-form sharp constant for the named operator kinds."""
        if self.kind is OperatorKind.HARDY:
            return hardy_constant(self.dim, self.profile, self.convention)
        if self.kind is OperatorKind.HLP:
            return hlp_constant(self.dim, self.profile, self.convention)
        if self.kind is OperatorKind.HILBERT:
            return hilbert_constant(self.dim, self.profile, self.convention)
        raise ValueError("general kernels have no closed form; use kernel_constant")


@dataclass(frozen=True)
class QuadEngine:
    """Deterministic engine; requires gauge-radial inputs and m <= 3."""

    quad: QuadSpec = field(default_factory=QuadSpec)


@dataclass(frozen=True)
class McEngine:
    """Stochastic engine; works for any m and any measurable inputs."""

    n_samples: int = 1_000_000
    stream: SeededStream = field(default_factory=lambda: SeededStream(0))
    workers: int = 1


Engine = QuadEngine | McEngine


def weighted_norm(f: TestFunction, alpha: float, dim: GroupDim) -> float:
    """Weighted-type norm ``ess sup |x|_h^alpha |f(x)|``.

    Exact (= 1) for an extremal power measured at its own exponent.  For
    modulated powers the supremum is taken over a deterministic log-spaced
    gauge grid of 10^4 points between 1e-6 and 1e6; for step modulations with
    plateaus wider than the grid spacing this is exact, otherwise it is a
    lower bound.
    """
    if not alpha > 0.0:
        raise ValueError(f"norm exponent must be positive, got {alpha!r}")
    if f.is_extremal and alpha == f.alpha_j:
        return 1.0
    vals = _NORM_GRID ** (alpha - f.alpha_j)
    if f.modulation is not None:
        vals = vals * f.modulation(_NORM_GRID)
    return float(vals.max())


def _require(spec: OperatorSpec, kind: OperatorKind, fs: Sequence[TestFunction], x: HPoint) -> float:
    if spec.kind is not kind:
        raise ValueError(f"spec is for {spec.kind.value!r}, evaluator is {kind.value!r}")
    if len(fs) != spec.m:
        raise ValueError(f"need {spec.m} test functions, got {len(fs)}")
    if x.dim != spec.dim:
        raise ValueError("evaluation point lives on a different group")
    c = gauge(x)
    if c == 0.0:
        raise ValueError("operators are defined away from the origin; got x = 0")
    return c


def _conv_factor(spec: OperatorSpec) -> float:
    """(Omega_convention / Omega_geometric)^m, the joint-convention scaling."""
    if spec.convention is Convention.GEOMETRIC:
        return 1.0
    ratio = unit_ball_volume(spec.dim, spec.convention) / unit_ball_volume(spec.dim)
    return ratio**spec.m


def _radial_breaks(f: TestFunction, c: float, lo: float, hi: float) -> list[float]:
    return [b / c for b in f.breakpoints if lo < b / c < hi]


def _scalar_map(fn: Callable[[float], float]) -> Callable[[np.ndarray], np.ndarray]:
    def wrapped(arr: np.ndarray) -> np.ndarray:
        arr = np.atleast_1d(np.asarray(arr, dtype=float))
        return np.array([fn(float(x)) for x in arr])

    return wrapped


def _product_integrand(fs: Sequence[TestFunction], c: float, n: int):
    """f(y_1)...f(y_m) evaluated at dilated tuples, for the MC engine."""

    def f(coords: list[np.ndarray]) -> np.ndarray:
        out = np.full(coords[0].shape[0], 1.0)
        for tf, coord in zip(fs, coords):
            out = out * tf.radial(c * gauge_array(coord, n))
        return out

    return f


def eval_hardy(
    fs: Sequence[TestFunction], x: HPoint, spec: OperatorSpec, engine: Engine = QuadEngine()
) -> Estimate:
    """Averaging operator over the tuple ball of radius ``|x|_h``.

    Value: ``1/(Omega^m |x|^{mQ}) * int_{|(y_1..y_m)|_h < |x|_h} prod f_i``.
    Convention-independent because the normalizer and the polar constant
    shift together.
    """
    c = _require(spec, OperatorKind.HARDY, fs, x)
    Q, m, n = spec.dim.Q, spec.m, spec.dim.n
    if isinstance(engine, QuadEngine):
        if m > 3:
            raise ValueError("quadrature engine supports m <= 3; use the MC engine")

        def integrand(*rs: np.ndarray) -> np.ndarray:
            out = 1.0
            for tf, r in zip(fs, rs):
                out = out * tf.power_weighted(c, r, Q - 1)
            return out

        pts = [_radial_breaks(tf, c, 0.0, 1.0) for tf in fs]
        est = quad_tensor(integrand, m, Domain.SIMPLEX_BALL, engine.quad, points=pts)
        return est.scaled(float(Q) ** m)
    raw = mc_integrate(
        _product_integrand(fs, c, n),
        spec.dim,
        m,
        TupleBall(tuple(spec.profile.alphas)),
        engine.n_samples,
        engine.stream,
        engine.workers,
    )
    return raw.scaled(unit_ball_volume(spec.dim) ** -m)


def eval_hlp(
    fs: Sequence[TestFunction], x: HPoint, spec: OperatorSpec, engine: Engine = QuadEngine()
) -> Estimate:
    """Max-kernel operator ``int prod f_i(y_i) / max(|x|^Q, |y_i|^Q...)^m``.

    The quadrature engine splits the radial orthant into the m + 1 cells
    induced by which argument realizes the max; each cell collapses to an
    outer 1-D integral times inner 1-D factors.
    """
    c = _require(spec, OperatorKind.HLP, fs, x)
    Q, m, n = spec.dim.Q, spec.m, spec.dim.n
    factor = _conv_factor(spec)
    omega = sphere_measure(spec.dim)
    if isinstance(engine, QuadEngine):
        if m > 3:
            raise ValueError("quadrature engine supports m <= 3; use the MC engine")
        # relative-error-driven inner integrals: their values are re-weighted
        # by the outer tail, so an absolute cutoff would truncate it
        inner_spec = QuadSpec(
            engine.quad.rel_tol * 0.1, 1e-290, engine.quad.max_subdivisions
        )
        n_evals = 0

        def unit_factor(tf: TestFunction, scale: float) -> Estimate:
            # int_0^1 g(scale * v) v^{Q-1} dv
            return quad_1d(
                lambda v: tf.power_weighted(scale, v, Q - 1),
                0.0,
                1.0,
                inner_spec,
                points=_radial_breaks(tf, scale, 0.0, 1.0),
            )

        total = 0.0
        cell0 = 1.0
        for tf in fs:
            est = unit_factor(tf, c)
            cell0 *= est.value
            n_evals += est.n_samples
        total += cell0
        for j, tfj in enumerate(fs):
            others = [tf for i, tf in enumerate(fs) if i != j]

            def outer_scalar(r: float) -> float:
                nonlocal n_evals
                val = float(tfj.power_weighted(c, np.asarray(r), -1.0))
                for tf in others:
                    est = unit_factor(tf, c * r)
                    val *= est.value
                    n_evals += est.n_samples
                return val

            est_j = quad_1d(
                _scalar_map(outer_scalar),
                1.0,
                math.inf,
                engine.quad,
                points=_radial_breaks(tfj, c, 1.0, math.inf),
            )
            total += est_j.value
            n_evals += est_j.n_samples
        return Estimate(factor * omega**m * total, 0.0, n_evals, Method.QUAD)

    prod = _product_integrand(fs, c, n)

    def f(coords: list[np.ndarray]) -> np.ndarray:
        gmax = np.full(coords[0].shape[0], 1.0)
        for coord in coords:
            gmax = np.maximum(gmax, gauge_array(coord, n))
        return prod(coords) * gmax ** (-Q * m)

    raw = mc_integrate(
        f,
        spec.dim,
        m,
        FullSpaceHeavyTail(tuple(spec.profile.alphas)),
        engine.n_samples,
        engine.stream,
        engine.workers,
    )
    return raw.scaled(factor)


def eval_hilbert(
    fs: Sequence[TestFunction], x: HPoint, spec: OperatorSpec, engine: Engine = QuadEngine()
) -> Estimate:
    """Sum-kernel operator ``int prod f_i(y_i) / (|x|^Q + sum |y_i|^Q)^m``.

    The quadrature engine substitutes ``t_i = r_i^Q`` and then
    ``t_i = v_i^{1/(1 - beta_i)}`` with ``beta_i = alpha_i / Q``, which
    removes the power-law endpoint singularity exactly.
    """
    c = _require(spec, OperatorKind.HILBERT, fs, x)
    Q, m, n = spec.dim.Q, spec.m, spec.dim.n
    factor = _conv_factor(spec)
    omega = sphere_measure(spec.dim)
    if isinstance(engine, QuadEngine):
        if m > 3:
            raise ValueError("quadrature engine supports m <= 3; use the MC engine")
        value, n_evals = _hilbert_quad(fs, c, Q, spec.profile.alphas, engine.quad)
        return Estimate(factor * (omega / Q) ** m * value, 0.0, n_evals, Method.QUAD)

    prod = _product_integrand(fs, c, n)

    def f(coords: list[np.ndarray]) -> np.ndarray:
        denom = np.full(coords[0].shape[0], 1.0)
        for coord in coords:
            denom = denom + gauge_array(coord, n) ** Q
        return prod(coords) * denom ** (-float(m))

    raw = mc_integrate(
        f,
        spec.dim,
        m,
        FullSpaceHeavyTail(tuple(spec.profile.alphas)),
        engine.n_samples,
        engine.stream,
        engine.workers,
    )
    return raw.scaled(factor)


def _hilbert_quad(
    fs: Sequence[TestFunction],
    c: float,
    Q: int,
    alphas: Sequence[float],
    qspec: QuadSpec,
) -> tuple[float, int]:
    """Radial sum-kernel integral ``int prod g_i(c t_i^{1/Q}) (1 + sum t)^{-m} dt``.

    Two exact substitutions: the orthant is mapped to the open simplex via
    ``t_i = s_i / (1 - sum s)``, then ``s_i = w_i^{1/(1 - beta_i)}`` with
    ``beta_i = alpha_i / Q`` cancels every power singularity analytically,
    leaving ``c^-alpha prod p_i * prod mod_i * (1 - S)^{sum beta - 1}`` over
    nested limits ``w_k < (1 - S_{k-1})^{1 - beta_k}``.  Only the hypotenuse
    singularity remains for the adaptive rule.
    """
    m = len(fs)
    betas = [a / Q for a in alphas]
    ps = [1.0 / (1.0 - b) for b in betas]
    sum_beta = math.fsum(betas)
    prefactor = c ** -math.fsum(alphas) * math.prod(ps)
    any_mod = any(tf.modulation is not None for tf in fs)
    break_ts = [sorted((b / c) ** Q for b in tf.breakpoints if b > 0.0) for tf in fs]
    # endpoint exponent of the level-d integrand near its upper limit;
    # the xi-substitution below flattens it exactly for pure powers
    taus = [sum_beta + math.fsum(1.0 - b for b in betas[d + 1 :]) for d in range(m)]
    level_specs = [
        QuadSpec(qspec.rel_tol * 0.1**d, qspec.abs_tol if d == 0 else 1e-290, qspec.max_subdivisions)
        for d in range(m)
    ]
    n_evals = [0]

    def leaf_w_points(prefix_sum: float, s_prefix: list[float], ub: float) -> list[float]:
        pts: list[float] = []
        rest = 1.0 - prefix_sum
        for bt in break_ts[m - 1]:
            s_m = bt * rest / (1.0 + bt)
            pts.append(s_m ** (1.0 / ps[m - 1]))
        for i, s_i in enumerate(s_prefix):
            for bt in break_ts[i]:
                s_m = rest - s_i / bt
                if s_m > 0.0:
                    pts.append(s_m ** (1.0 / ps[m - 1]))
        return [p for p in pts if 0.0 < p < ub]

    def level(depth: int, rest0: float, s_prefix: list[float]) -> float:
        if rest0 <= 0.0:
            return 0.0
        p = ps[depth]
        ub = rest0 ** (1.0 - betas[depth])
        tau = taus[depth]

        # w = ub (1 - eta), eta = xi^{1/tau}: flattens the (rest)^{tau - 1}
        # endpoint decay.  Since ub^p == rest0 exactly, the remainder
        # rest0 - w^p equals -rest0 expm1(p log1p(-eta)), which avoids the
        # cancellation that otherwise drowns the leaf in rounding noise.
        def split(xi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
            eta = xi ** (1.0 / tau)
            shrink = np.exp(p * np.log1p(-eta))
            s_d = rest0 * shrink
            rest = rest0 * -np.expm1(p * np.log1p(-eta))
            jac = (ub / tau) * xi ** (1.0 / tau - 1.0)
            return s_d, rest, jac

        if depth == m - 1:

            def integrand(xi: np.ndarray) -> np.ndarray:
                xi = np.asarray(xi, dtype=float)
                s_last, rest, jac = split(xi)
                out = np.zeros_like(xi)
                ok = rest > 0.0
                out[ok] = rest[ok] ** (sum_beta - 1.0)
                if any_mod:
                    ss = s_prefix + [s_last]
                    for i, tf in enumerate(fs):
                        if tf.modulation is None:
                            continue
                        t_i = np.asarray(ss[i]) / np.where(ok, rest, 1.0)
                        out = out * np.where(ok, tf.modulation(c * t_i ** (1.0 / Q)), 1.0)
                return out * jac

            w_points = leaf_w_points(1.0 - rest0, s_prefix, ub)
        else:

            def integrand(xi: np.ndarray) -> np.ndarray:
                xi = np.atleast_1d(np.asarray(xi, dtype=float))
                s_d, rest, jac = split(xi)
                vals = np.array(
                    [
                        level(depth + 1, float(r), s_prefix + [float(s)])
                        for s, r in zip(s_d, rest)
                    ]
                )
                return vals * jac

            w_points = []

        xi_points = [(1.0 - p_w / ub) ** tau for p_w in w_points if 0.0 < p_w < ub]
        est = quad_1d(integrand, 0.0, 1.0, level_specs[depth], points=xi_points)
        n_evals[0] += est.n_samples
        return est.value

    return prefactor * level(0, 1.0, []), n_evals[0]


_PROBE_SEED = 0x9E3779B97F4A7C15


def _probe_homogeneity(kernel: KernelSpec, dim: GroupDim, m: int) -> None:
    """Check degree -mQ on 10 random probes; report the worst ratio."""
    expected = -float(m * dim.Q)
    if kernel.homogeneity_degree != expected:
        raise KernelHomogeneityError(
            f"kernel declares degree {kernel.homogeneity_degree}, "
            f"but -mQ = {expected} is required"
        )
    gen = np.random.Generator(np.random.Philox(key=[_PROBE_SEED, 0]))
    worst = 0.0
    for _ in range(10):
        r0 = float(gen.uniform(0.5, 2.0))
        rs = gen.uniform(0.5, 2.0, m)
        t = float(gen.uniform(0.5, 2.0))
        base = float(np.asarray(kernel.radial_profile(r0, *rs)))
        scaled = float(np.asarray(kernel.radial_profile(t * r0, *(t * rs))))
        if base == 0.0 and scaled == 0.0:
            continue
        if base == 0.0 or scaled == 0.0:
            raise KernelHomogeneityError(
                "kernel support is not dilation-invariant "
                f"(probe r0={r0}, rs={rs.tolist()}, t={t})"
            )
        worst = max(worst, abs(scaled / (t**expected * base) - 1.0))
    if worst > 1e-10:
        raise KernelHomogeneityError(
            f"kernel is not homogeneous of degree {expected}: worst probe ratio "
            f"deviates by {worst:.3e}"
        )


def eval_kernel_op(
    kernel: KernelSpec,
    fs: Sequence[TestFunction],
    x: HPoint,
    spec: OperatorSpec,
    engine: Engine = QuadEngine(),
) -> Estimate:
    """General-kernel operator via the dilation identity.

    ``T(x) = int K(e_1, y_1..y_m) prod f_i(delta_{|x|_h} y_i) dy``; the kernel
    is probed for homogeneity -mQ before any evaluation.
    """
    if len(fs) != spec.m:
        raise ValueError(f"need {spec.m} test functions, got {len(fs)}")
    if x.dim != spec.dim:
        raise ValueError("evaluation point lives on a different group")
    c = gauge(x)
    if c == 0.0:
        raise ValueError("operators are defined away from the origin; got x = 0")
    Q, m, n = spec.dim.Q, spec.m, spec.dim.n
    _probe_homogeneity(kernel, spec.dim, m)
    factor = _conv_factor(spec)
    omega = sphere_measure(spec.dim)
    base = kernel.base_gauge

    if isinstance(engine, QuadEngine):
        if m > 3:
            raise ValueError("quadrature engine supports m <= 3; use the MC engine")
        if kernel.simplex_support is not None:
            s = kernel.simplex_support * base

            def integrand(*us: np.ndarray) -> np.ndarray:
                rs = [s * np.asarray(u) for u in us]
                out = kernel.radial_profile(base, *rs)
                for tf, r in zip(fs, rs):
                    out = out * tf.power_weighted(c, r, Q - 1)
                return out * s**m

            pts = [[b / (c * s) for b in tf.breakpoints if 0.0 < b / (c * s) < 1.0] for tf in fs]
            est = quad_tensor(integrand, m, Domain.SIMPLEX_BALL, engine.quad, points=pts)
        else:

            def integrand(*rs: np.ndarray) -> np.ndarray:
                out = kernel.radial_profile(base, *rs)
                for tf, r in zip(fs, rs):
                    out = out * tf.power_weighted(c, np.asarray(r), Q - 1)
                return out

            pts = [[base] + _radial_breaks(tf, c, 0.0, math.inf) for tf in fs]
            est = quad_tensor(integrand, m, Domain.POSITIVE_ORTHANT, engine.quad, points=pts)
        return est.scaled(factor * omega**m)

    prod = _product_integrand(fs, c, n)

    def f(coords: list[np.ndarray]) -> np.ndarray:
        gauges = [gauge_array(coord, n) for coord in coords]
        return prod(coords) * kernel.radial_profile(base, *gauges)

    sampler: TupleBall | FullSpaceHeavyTail
    if kernel.simplex_support is not None and kernel.simplex_support * base <= 1.0:
        sampler = TupleBall(tuple(spec.profile.alphas))
    else:
        sampler = FullSpaceHeavyTail(tuple(spec.profile.alphas))
    raw = mc_integrate(f, spec.dim, m, sampler, engine.n_samples, engine.stream, engine.workers)
    return raw.scaled(factor)


def kernel_constant(
    kernel: KernelSpec,
    dim: GroupDim,
    profile: AlphaProfile,
    engine: Engine = QuadEngine(),
    convention: Convention = Convention.GEOMETRIC,
) -> Estimate:
    """Numeric sharp constant ``H_m = int K(e_1, y) prod |y_i|^{-alpha_i} dy``.

    Exponents outside (0, Q) make the integral diverge and are rejected up
    front, naming every offending index.
    """
    profile.validate_for(dim)
    spec = OperatorSpec(OperatorKind.KERNEL, dim, profile, convention, kernel)
    fs = [TestFunction.extremal(a) for a in profile.alphas]
    e1 = HPoint.of(dim, [1.0] + [0.0] * (dim.ambient - 1))
    return eval_kernel_op(kernel, fs, e1, spec, engine)


def hardy_kernel(
    dim: GroupDim, m: int, convention: Convention = Convention.GEOMETRIC
) -> KernelSpec:
    """Kernel profile of the averaging operator:
    ``chi(sum r_i^2 < r0^2) / (Omega^m r0^{mQ})``."""
    om = unit_ball_volume(dim, convention) ** m
    Q = dim.Q

    def profile(r0: np.ndarray, *rs: np.ndarray) -> np.ndarray:
        r0 = np.asarray(r0, dtype=float)
        ss = sum(np.asarray(r, dtype=float) ** 2 for r in rs)
        return np.where(ss < r0**2, 1.0 / (om * r0 ** (m * Q)), 0.0)

    return KernelSpec(profile, -float(m * Q), simplex_support=1.0)


def hlp_kernel(dim: GroupDim, m: int) -> KernelSpec:
    """Max-kernel profile ``max(r0, r_1, ..., r_m)^{-mQ}``."""
    Q = dim.Q

    def profile(r0: np.ndarray, *rs: np.ndarray) -> np.ndarray:
        gmax = np.asarray(r0, dtype=float)
        for r in rs:
            gmax = np.maximum(gmax, np.asarray(r, dtype=float))
        return gmax ** (-float(m * Q))

    return KernelSpec(profile, -float(m * Q))


def hilbert_kernel(dim: GroupDim, m: int) -> KernelSpec:
    """Sum-kernel profile ``(r0^Q + sum r_i^Q)^{-m}``."""
    Q = dim.Q

    def profile(r0: np.ndarray, *rs: np.ndarray) -> np.ndarray:
        denom = np.asarray(r0, dtype=float) ** Q
        for r in rs:
            denom = denom + np.asarray(r, dtype=float) ** Q
        return denom ** (-float(m))

    return KernelSpec(profile, -float(m * Q))
