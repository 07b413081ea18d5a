"""Numerical integration engines.

Three layers:

* adaptive 1-D quadrature (15-point Gauss-Kronrod panels with bisection
  refinement, infinite upper limits mapped through ``t -> t/(1-t)``),
* nested tensor quadrature for up to three variables,
* seeded Monte Carlo samplers adapted to the Koranyi geometry, with
  importance tilts that neutralize power-law singularities.

Monte Carlo determinism contract: work is cut into fixed-size chunks, chunk
``k`` draws from the counter-based substream ``(seed, stream_id, block=k)``,
and partial sums are reduced in chunk-index order.  Results are therefore
bit-identical for any worker count.
"""

from __future__ import annotations

import enum
import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .hgroup import GroupDim, HPoint, gauge_array, sphere_measure

__all__ = [
    "Domain",
    "Estimate",
    "EstimationError",
    "FullSpaceHeavyTail",
    "Method",
    "QuadSpec",
    "QuadratureError",
    "SeededStream",
    "TupleBall",
    "mc_integrate",
    "quad_1d",
    "quad_tensor",
    "rejection_volume_estimate",
    "sample_radius",
    "sample_sphere_direction",
    "sample_unit_ball",
]

_MASK64 = (1 << 64) - 1
_CHUNK = 1 << 16


class Method(enum.Enum):
    QUAD = "quad"
    MC = "mc"


@dataclass(frozen=True)
class Estimate:
    """A numeric value with its uncertainty and provenance.

    ``std_error`` is 0 for deterministic quadrature.  Monte Carlo estimates
    carry the sample standard error (which is itself 0 in the degenerate case
    of a constant weighted integrand).
    """

    value: float
    std_error: float
    n_samples: int
    method: Method

    def __post_init__(self) -> None:
        if self.method is Method.QUAD and self.std_error != 0.0:
            raise ValueError("quadrature estimates must have zero std_error")
        if self.std_error < 0.0:
            raise ValueError("std_error must be nonnegative")

    def scaled(self, factor: float) -> "Estimate":
        return Estimate(
            self.value * factor, self.std_error * abs(factor), self.n_samples, self.method
        )


@dataclass(frozen=True)
class QuadSpec:
    """Error control for adaptive quadrature."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 4096

    def __post_init__(self) -> None:
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")

    def tighter(self, factor: float = 0.1) -> "QuadSpec":
        return QuadSpec(self.rel_tol * factor, self.abs_tol * factor, self.max_subdivisions)


class QuadratureError(RuntimeError):
    """Adaptive refinement failed to converge; carries the best estimate."""

    def __init__(self, message: str, estimate: Estimate | None = None):
        super().__init__(message)
        self.estimate = estimate


class EstimationError(RuntimeError):
    """A Monte Carlo estimate could not be formed."""


# 15-point Gauss-Kronrod rule: Kronrod abscissae/weights plus the embedded
# 7-point Gauss weights used for the error estimate.
_XGK = np.array(
    [
        0.9914553711208126,
        0.9491079123427585,
        0.8648644233597691,
        0.7415311855993944,
        0.5860872354676911,
        0.4058451513773972,
        0.2077849550078985,
        0.0,
    ]
)
_WGK = np.array(
    [
        0.0229353220105292,
        0.0630920926299785,
        0.1047900103222502,
        0.1406532597155259,
        0.1690047266392679,
        0.1903505780647854,
        0.2044329400752989,
        0.2094821410847278,
    ]
)
_WG = np.array(
    [
        0.1294849661688697,
        0.2797053914892767,
        0.3818300505051189,
        0.4179591836734694,
    ]
)

_ABSC = np.concatenate((-_XGK[:7], _XGK[7:8], _XGK[6::-1]))
_WK15 = np.concatenate((_WGK[:7], _WGK[7:8], _WGK[6::-1]))
_WG15 = np.zeros(15)
_WG15[1:14:2] = np.concatenate((_WG[:3], _WG[3:4], _WG[2::-1]))


def _eval_panel(f, a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    xs = mid + half * _ABSC
    # keep nodes strictly interior: on panels a few ulps wide, rounding can
    # otherwise push a node onto an endpoint (e.g. the infinite-limit map's
    # singular point t = 1)
    xs = np.clip(xs, np.nextafter(a, b), np.nextafter(b, a))
    fv = np.asarray(f(xs), dtype=float)
    if fv.shape != xs.shape:
        raise TypeError("integrand must be vectorized: f(ndarray) -> ndarray of same shape")
    if not np.all(np.isfinite(fv)):
        bad = xs[~np.isfinite(fv)][0]
        raise QuadratureError(f"non-finite integrand value at x={bad!r}")
    val_k = half * float(_WK15 @ fv)
    val_g = half * float(_WG15 @ fv)
    return val_k, abs(val_k - val_g)


def quad_1d(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadSpec | None = None,
    *,
    points: Sequence[float] = (),
) -> Estimate:
    """Adaptively integrate ``f`` over ``(a, b)``; ``b`` may be ``math.inf``.

    ``points`` seeds interior breakpoints (kinks, plateau edges) so panels
    never straddle them.  Integrable endpoint singularities like ``r**-s``
    with ``s < 1`` are handled by subdivision toward the endpoint; panel nodes
    never touch the endpoints themselves.

    Raises :class:`QuadratureError` with the best estimate attached once
    ``max_subdivisions`` is exhausted.
    """
    spec = spec or QuadSpec()
    if not math.isfinite(a):
        raise ValueError("lower limit must be finite")
    if math.isinf(b):
        inner = f

        def f(t: np.ndarray) -> np.ndarray:  # noqa: ANN001 - local rebinding
            t = np.asarray(t, dtype=float)
            x = a + t / (1.0 - t)
            return np.asarray(inner(x), dtype=float) / (1.0 - t) ** 2

        points = [(p - a) / (1.0 + (p - a)) for p in points if p > a]
        lo, hi = 0.0, 1.0
    else:
        if not (b > a):
            raise ValueError(f"empty or reversed interval ({a}, {b})")
        lo, hi = float(a), float(b)

    edges = [lo] + sorted(p for p in set(points) if lo < p < hi) + [hi]
    heap: list[tuple[float, int, float, float, float]] = []
    counter = 0
    total_val = 0.0
    total_err = 0.0
    frozen_err = 0.0
    n_evals = 0
    for left, right in zip(edges[:-1], edges[1:]):
        val, err = _eval_panel(f, left, right)
        n_evals += 15
        heapq.heappush(heap, (-err, counter, left, right, val))
        counter += 1
        total_val += val
        total_err += err

    splits = 0
    while total_err + frozen_err > max(spec.abs_tol, spec.rel_tol * abs(total_val)):
        if not heap:
            raise QuadratureError(
                "all panels are at floating-point resolution without convergence",
                Estimate(total_val, 0.0, n_evals, Method.QUAD),
            )
        if splits >= spec.max_subdivisions:
            raise QuadratureError(
                f"max_subdivisions={spec.max_subdivisions} exhausted "
                f"(error {total_err + frozen_err:.3e})",
                Estimate(total_val, 0.0, n_evals, Method.QUAD),
            )
        neg_err, _, left, right, val = heapq.heappop(heap)
        width = right - left
        if width <= 4.0 * np.finfo(float).eps * (abs(left) + abs(right) + 1e-300):
            frozen_err += -neg_err
            total_err -= -neg_err
            continue
        mid = 0.5 * (left + right)
        val_l, err_l = _eval_panel(f, left, mid)
        val_r, err_r = _eval_panel(f, mid, right)
        n_evals += 30
        splits += 1
        total_val += val_l + val_r - val
        total_err += err_l + err_r - (-neg_err)
        heapq.heappush(heap, (-err_l, counter, left, mid, val_l))
        counter += 1
        heapq.heappush(heap, (-err_r, counter, mid, right, val_r))
        counter += 1

    return Estimate(total_val, 0.0, n_evals, Method.QUAD)


class Domain(enum.Enum):
    UNIT_CUBE = "unit_cube"
    POSITIVE_ORTHANT = "positive_orthant"
    SIMPLEX_BALL = "simplex_ball"


def quad_tensor(
    f: Callable[..., np.ndarray],
    m: int,
    domain: Domain,
    spec: QuadSpec | None = None,
    *,
    points: Sequence[Sequence[float]] | None = None,
) -> Estimate:
    """Nested adaptive quadrature of an m-variate function, m <= 3.

    ``f(r_1, ..., r_m)`` must broadcast when its last argument is an array.
    SIMPLEX_BALL is ``{r_i > 0, sum r_i^2 < 1}``; POSITIVE_ORTHANT maps each
    axis through ``t/(1-t)``.  ``points`` optionally lists per-axis
    breakpoints in the native axis variable.
    """
    spec = spec or QuadSpec()
    if not 1 <= m <= 3:
        raise ValueError(f"tensor quadrature supports 1 <= m <= 3, got m={m}")
    axis_points = [tuple(points[k]) if points is not None else () for k in range(m)]
    # Inner levels are driven by relative error with a vanishing absolute
    # floor: inner values of any magnitude get re-weighted by the outer
    # variable transforms, so an absolute cutoff would silently truncate
    # tails.
    level_specs = [
        QuadSpec(
            rel_tol=spec.rel_tol * 0.1**d,
            abs_tol=spec.abs_tol if d == 0 else 1e-290,
            max_subdivisions=spec.max_subdivisions,
        )
        for d in range(m)
    ]
    n_evals = [0]

    def axis_limits(depth: int, prefix: tuple[float, ...]) -> tuple[float, float]:
        if domain is Domain.UNIT_CUBE:
            return 0.0, 1.0
        if domain is Domain.POSITIVE_ORTHANT:
            return 0.0, math.inf
        remaining = 1.0 - sum(r * r for r in prefix)
        return 0.0, math.sqrt(max(remaining, 0.0))

    def integrate_axis(depth: int, prefix: tuple[float, ...]) -> float:
        lo, hi = axis_limits(depth, prefix)
        if hi <= lo or (math.isfinite(hi) and hi - lo < 1e-15):
            return 0.0
        if depth == m - 1:
            integrand = lambda arr: f(*prefix, arr)  # noqa: E731
        else:

            def integrand(arr: np.ndarray) -> np.ndarray:
                arr = np.atleast_1d(np.asarray(arr, dtype=float))
                return np.array([integrate_axis(depth + 1, prefix + (x,)) for x in arr])

        est = quad_1d(integrand, lo, hi, level_specs[depth], points=axis_points[depth])
        n_evals[0] += est.n_samples
        return est.value

    value = integrate_axis(0, ())
    return Estimate(value, 0.0, n_evals[0], Method.QUAD)


@dataclass(frozen=True)
class SeededStream:
    """Counter-based splittable random stream.

    Identical ``(seed, stream_id)`` reproduce identical sample sequences;
    ``generator(block=k)`` opens the disjoint substream used for chunk k.
    """

    seed: int
    stream_id: int = 0

    def generator(self, block: int = 0) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        counter = np.array([0, block & _MASK64, 0, 0], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(counter=counter, key=key))


StreamLike = SeededStream | np.random.Generator


def _gen_of(stream: StreamLike) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return stream.generator()


def sample_radius(
    Q: int, tilt: float, stream: StreamLike, size: int | None = None
) -> float | np.ndarray:
    """Radius with density ``(Q - tilt) r^{Q - tilt - 1}`` on (0, 1).

    Inverse CDF: ``r = U^{1/(Q - tilt)}``.
    """
    if tilt >= Q:
        raise ValueError(f"tilt must be < Q, got tilt={tilt} with Q={Q}")
    gen = _gen_of(stream)
    u = gen.random(size)
    return u ** (1.0 / (Q - tilt))


def _ball_batch(gen: np.random.Generator, dim: GroupDim, size: int) -> np.ndarray:
    """Uniform Lebesgue samples of the unit gauge ball via box rejection."""
    ambient = dim.ambient
    accept_rate = _geom_ball_volume(dim) / 2.0**ambient
    out = np.empty((size, ambient))
    have = 0
    while have < size:
        k = int((size - have) / accept_rate) + 16
        props = gen.uniform(-1.0, 1.0, (k, ambient))
        g = gauge_array(props, dim.n)
        hits = props[g < 1.0]
        take = min(size - have, hits.shape[0])
        out[have : have + take] = hits[:take]
        have += take
    return out


def _geom_ball_volume(dim: GroupDim) -> float:
    from .hgroup import Convention, unit_ball_volume

    return unit_ball_volume(dim, Convention.GEOMETRIC)


def sample_unit_ball(
    dim: GroupDim, stream: StreamLike, size: int | None = None
) -> HPoint | np.ndarray:
    """Uniform point(s) of the unit gauge ball (Lebesgue measure).

    Rejection from the exact bounding box ``[-1, 1]^{2n} x [-1, 1]``; the
    acceptance rate is ``|B(0,1)| / 2^{2n+1}``.
    """
    gen = _gen_of(stream)
    batch = _ball_batch(gen, dim, 1 if size is None else size)
    if size is None:
        return HPoint.of(dim, batch[0])
    return batch


def _scale_coords(coords: np.ndarray, r: np.ndarray | float, n: int) -> np.ndarray:
    out = np.array(coords, dtype=float, copy=True)
    r = np.asarray(r, dtype=float)
    out[..., : 2 * n] *= r[..., None]
    out[..., 2 * n] *= r * r
    return out


def sample_sphere_direction(
    dim: GroupDim, stream: StreamLike, size: int | None = None
) -> HPoint | np.ndarray:
    """Gauge-sphere direction under the cone measure.

    Normalizes a uniform ball sample by ``delta_{1/gauge}``; combined with
    ``sample_radius(Q, 0)`` this reconstructs the uniform ball law.
    """
    gen = _gen_of(stream)
    batch = _ball_batch(gen, dim, 1 if size is None else size)
    g = gauge_array(batch, dim.n)
    batch = _scale_coords(batch, 1.0 / g, dim.n)
    if size is None:
        return HPoint.of(dim, batch[0])
    return batch


@dataclass(frozen=True)
class TupleBall:
    """Sample m-tuples with tilted radii, rejecting unless ``sum r_i^2 < 1``.

    Estimates Lebesgue integrals over the tuple ball
    ``{(y_1, ..., y_m) : sum |y_i|_h^2 < 1}``; rejected tuples contribute 0.
    """

    tilts: tuple[float, ...]


@dataclass(frozen=True)
class FullSpaceHeavyTail:
    """Sample m-tuples covering all of H^{nm}.

    Tilted radii on (0, 1) are pushed through ``r -> r/(1-r)`` with the
    matching Jacobian weight.
    """

    tilts: tuple[float, ...]


Sampler = TupleBall | FullSpaceHeavyTail


def _chunk_sizes(n_samples: int, chunk: int) -> list[int]:
    full, rem = divmod(n_samples, chunk)
    return [chunk] * full + ([rem] if rem else [])


def _chunked_mc(
    values_fn: Callable[[np.random.Generator, int], np.ndarray],
    n_samples: int,
    stream: SeededStream,
    workers: int = 1,
    chunk: int = _CHUNK,
) -> tuple[Estimate, int]:
    """Chunked mean estimator; returns (estimate, nonzero evaluation count)."""
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    sizes = _chunk_sizes(n_samples, chunk)

    def one(block: int) -> tuple[float, float, int]:
        gen = stream.generator(block=block + 1)
        v = values_fn(gen, sizes[block])
        return float(v.sum()), float(np.square(v).sum()), int(np.count_nonzero(v))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(one, range(len(sizes))))
    else:
        partials = [one(i) for i in range(len(sizes))]

    s1 = 0.0
    s2 = 0.0
    nonzero = 0
    for p1, p2, pn in partials:
        s1 += p1
        s2 += p2
        nonzero += pn
    n = n_samples
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / (n - 1)
    std_error = math.sqrt(var / n)
    return Estimate(mean, std_error, n, Method.MC), nonzero


def _check_finite(values: np.ndarray, coords: list[np.ndarray]) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        idx = int(np.argmax(bad))
        where = [c[idx].tolist() for c in coords]
        raise EstimationError(f"non-finite integrand value at point(s) {where}")


def mc_integrate(
    f: Callable[[list[np.ndarray]], np.ndarray],
    dim: GroupDim,
    m: int,
    sampler: Sampler,
    n_samples: int,
    stream: SeededStream,
    workers: int = 1,
) -> Estimate:
    """Importance-sampled Lebesgue integral of ``f`` over m-tuples of points.

    ``f`` receives a list of m coordinate arrays of shape (N, 2n + 1) and
    must return N values.  Tilts equal to the integrand's power-law exponents
    make the weighted evaluations bounded.
    """
    if len(sampler.tilts) != m:
        raise ValueError(f"sampler carries {len(sampler.tilts)} tilts for m={m}")
    Q = dim.Q
    for t in sampler.tilts:
        if t >= Q:
            raise ValueError(f"tilt {t} must be < Q={Q}")
    omega = sphere_measure(dim)
    heavy = isinstance(sampler, FullSpaceHeavyTail)
    tiny = 2.0**-53

    def values_fn(gen: np.random.Generator, size: int) -> np.ndarray:
        radii = []
        weights = np.full(size, 1.0)
        for tilt in sampler.tilts:
            u = np.clip(gen.random(size), tiny, 1.0 - tiny)
            r = u ** (1.0 / (Q - tilt))
            if heavy:
                s = r / (1.0 - r)
                # density of s: (Q - tilt) r^{Q-tilt-1} (1-r)^2
                weights *= omega * s ** (Q - 1) / ((Q - tilt) * r ** (Q - tilt - 1) * (1.0 - r) ** 2)
                radii.append(s)
            else:
                weights *= omega * r**tilt / (Q - tilt)
                radii.append(r)
        dirs = [_ball_batch(gen, dim, size) for _ in range(m)]
        out = np.zeros(size)
        if heavy:
            mask = np.full(size, True)
        else:
            rr = np.stack(radii)
            mask = np.einsum("ij,ij->j", rr, rr) < 1.0
        if mask.any():
            coords = []
            for r, d in zip(radii, dirs):
                g = gauge_array(d[mask], dim.n)
                coords.append(_scale_coords(d[mask], r[mask] / g, dim.n))
            fv = np.asarray(f(coords), dtype=float)
            vals = fv * weights[mask]
            _check_finite(vals, coords)
            out[mask] = vals
        return out

    estimate, nonzero = _chunked_mc(values_fn, n_samples, stream, workers)
    if nonzero == 0:
        raise EstimationError("zero accepted samples; cannot form an estimate")
    return estimate


def rejection_volume_estimate(
    dim: GroupDim, n_samples: int, stream: SeededStream, workers: int = 1
) -> Estimate:
    """Monte Carlo volume of the unit gauge ball, normalized by the exact
    bounding-box volume 2^{2n+1}.  Shares no closed-form ball constant with
    anything it is used to check."""
    box = 2.0**dim.ambient

    def values_fn(gen: np.random.Generator, size: int) -> np.ndarray:
        props = gen.uniform(-1.0, 1.0, (size, dim.ambient))
        g = gauge_array(props, dim.n)
        return np.where(g < 1.0, box, 0.0)

    estimate, _ = _chunked_mc(values_fn, n_samples, stream, workers)
    return estimate
