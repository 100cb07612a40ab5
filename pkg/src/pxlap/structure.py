"""Structure conditions for general flux pairs div A(x, u, grad u) = B(...).

The admissible pairs satisfy, for |s| <= M0,

    (1)  A(x, s, xi) . xi >= alpha |xi|^p(x) - C0(x) |s|^p(x) - g0(x)
    (2)  |A(x, s, xi)|     <= g1(x) + C1(x) |s|^(p(x)-1) + K1(x) |xi|^(p(x)-1)
    (3)  |B(x, s, xi)|     <= f(x)  + C2(x) |s|^(p(x)-1) + K2(x) |xi|^(p(x)-1)

with the natural-growth variant adding b |xi|^p(x) to (3).  The checker
evaluates the inequalities on explicit sample sets and reports every
violation with both sides and the slack; the general Harnack scale mu sums
three ball-norm terms; the exponential transforms rescale the flux by
exp(+-(b/alpha)(s - M0)) so that natural-growth sources reduce to the plain
case at the price of a smaller ellipticity constant alpha e^(-(b/alpha) M0).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .exponent import ExponentField
from .grid import Ball, GridFunction, as_points
from .quadrature import lq_ball_norm

__all__ = [
    "StructureBounds", "FluxPair", "SampleSet", "Violation", "StructureReport",
    "check_conditions", "check_conditions_natural_growth", "mu_general",
    "exponential_transform", "structure_sample_lattice", "p_laplacian_flux",
    "scaled_flux", "zero_flux", "constant_source", "grid_source",
]

_SLACK_ATOL = 1e-12
_SLACK_RTOL = 1e-12


@dataclass(frozen=True)
class FluxPair:
    """Deterministic evaluators A(x, s, xi) -> vectors, B(x, s, xi) -> scalars.

    Both take batched arrays: points (m, n), states (m,), gradients (m, n).
    """

    A: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    B: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass
class StructureBounds:
    """Constants and coefficient fields of the structure conditions.

    The coefficient grids all live on one lattice; b is the natural-growth
    constant, m0 the state bound, q0/q1/q2/t2 the integrability exponents.
    """

    alpha: float
    g0: GridFunction
    g1: GridFunction
    f_src: GridFunction
    c0: GridFunction
    c1: GridFunction
    c2: GridFunction
    k1: GridFunction
    k2: GridFunction
    m0: float
    q0: float
    q1: float
    q2: float
    t2: float
    b: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"ellipticity constant alpha must be positive, got {self.alpha}")
        if self.m0 < 0 or self.b < 0:
            raise ValueError(f"m0 and b must be >= 0, got m0={self.m0}, b={self.b}")
        names = ("g0", "g1", "f_src", "c0", "c1", "c2", "k1", "k2")
        grids = [getattr(self, n) for n in names]
        for n, g in zip(names, grids):
            if not grids[0].same_lattice(g):
                raise ValueError(f"coefficient grid {n} is on a different lattice")
            if np.any(g.values < 0):
                raise ValueError(f"coefficient grid {n} must be nonnegative")

    def validate_exponents(self, field: ExponentField) -> None:
        """Admissibility of q0, q1, q2, t2 against the field's lower bound."""
        n = self.g0.n_axes
        lo01 = max(1.0, n / (field.p1 - 1.0))
        lo2 = max(1.0, n / field.p1)
        for name, q, lo in (("q0", self.q0, lo01), ("q1", self.q1, lo01),
                            ("q2", self.q2, lo2), ("t2", self.t2, lo2)):
            if not q > lo:
                raise ValueError(
                    f"integrability exponent {name} = {q} must exceed {lo} "
                    f"(n = {n}, p1 = {field.p1})"
                )

    @classmethod
    def constants(cls, like: GridFunction, field: ExponentField, *, alpha: float,
                  g0: float = 0.0, g1: float = 0.0, f_src: float = 0.0,
                  c0: float = 0.0, c1: float = 0.0, c2: float = 0.0,
                  k1: float = 0.0, k2: float = 0.0, m0: float = 1.0,
                  q0: float = np.inf, q1: float = np.inf, q2: float = np.inf,
                  t2: float = np.inf, b: float = 0.0) -> "StructureBounds":
        """Bounds with constant coefficient fields on the lattice of `like`;
        validates the integrability exponents against the field."""
        mk = lambda v: like.like(np.full(like.dims, float(v)))
        out = cls(alpha, mk(g0), mk(g1), mk(f_src), mk(c0), mk(c1), mk(c2),
                  mk(k1), mk(k2), m0, q0, q1, q2, t2, b)
        out.validate_exponents(field)
        return out


@dataclass(frozen=True)
class SampleSet:
    """Evaluation triples (x, s, xi) as batched arrays."""

    points: np.ndarray    # (m, n)
    states: np.ndarray    # (m,)
    gradients: np.ndarray  # (m, n)

    def __post_init__(self):
        object.__setattr__(self, "points", as_points(self.points))
        object.__setattr__(self, "states", np.atleast_1d(np.asarray(self.states, dtype=float)))
        object.__setattr__(self, "gradients", as_points(self.gradients))
        m = self.points.shape[0]
        if self.states.shape != (m,) or self.gradients.shape != self.points.shape:
            raise ValueError("sample arrays disagree in shape")

    @property
    def size(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class Violation:
    condition: str
    index: int
    x: np.ndarray
    s: float
    xi: np.ndarray
    lhs: float
    rhs: float
    slack: float


@dataclass
class StructureReport:
    n_samples: int
    conditions: tuple
    violations: list = dc_field(default_factory=list)
    max_slack: dict = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations


def structure_sample_lattice(like: GridFunction, m0: float, seed: int = 0,
                             n_states: int = 5, n_radii: int = 7,
                             n_dir: int = 4, max_nodes: int = 128) -> SampleSet:
    """Deterministic sample triples covering degenerate and large gradients.

    Points: a stride of the grid nodes.  States: 0 plus a log ladder up to
    m0.  Gradients: log-spaced magnitudes 1e-3 .. 1e3 along seeded unit
    directions.
    """
    nodes = like.nodes()
    stride = max(1, nodes.shape[0] // max_nodes)
    pts = nodes[::stride]
    if m0 > 0:
        states = np.concatenate([[0.0], np.geomspace(1e-3 * m0, m0, n_states)])
    else:
        states = np.array([0.0])
    rng = np.random.default_rng(seed)
    n = like.n_axes
    dirs = rng.normal(size=(n_dir, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    mags = np.geomspace(1e-3, 1e3, n_radii)
    xis = (mags[:, None, None] * dirs[None, :, :]).reshape(-1, n)

    P = np.repeat(pts, states.size * xis.shape[0], axis=0)
    S = np.tile(np.repeat(states, xis.shape[0]), pts.shape[0])
    X = np.tile(xis, (pts.shape[0] * states.size, 1))
    return SampleSet(P, S, X)


def _coef(g: GridFunction, pts: np.ndarray) -> np.ndarray:
    return g.interp(pts)


def _violated(slack: np.ndarray, lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return slack > _SLACK_ATOL + _SLACK_RTOL * scale


def _check(pair: FluxPair, bounds: StructureBounds, field: ExponentField,
           samples: SampleSet, with_gradient_term: bool,
           alpha_override: float | None = None,
           conditions: tuple = ("1", "2", "3")) -> StructureReport:
    if np.any(np.abs(samples.states) > bounds.m0 * (1 + 1e-12) + 1e-300):
        bad = float(np.abs(samples.states).max())
        raise ValueError(f"sample state |s| = {bad} exceeds m0 = {bounds.m0}")
    pts, s, xi = samples.points, samples.states, samples.gradients
    p = field(pts)
    xin = np.linalg.norm(xi, axis=1)
    A = np.asarray(pair.A(pts, s, xi), dtype=float).reshape(xi.shape)
    Bv = np.asarray(pair.B(pts, s, xi), dtype=float).reshape(s.shape)
    alpha = bounds.alpha if alpha_override is None else float(alpha_override)

    report = StructureReport(samples.size, tuple(conditions))
    abs_s = np.abs(s)

    def record(name, lhs, rhs, slack):
        report.max_slack[name] = float(slack.max(initial=-np.inf))
        for i in np.nonzero(_violated(slack, lhs, rhs))[0]:
            report.violations.append(Violation(name, int(i), pts[i], float(s[i]),
                                               xi[i], float(lhs[i]), float(rhs[i]),
                                               float(slack[i])))

    if "1" in conditions:
        lhs = np.sum(A * xi, axis=1)
        rhs = alpha * xin**p - _coef(bounds.c0, pts) * abs_s**p - _coef(bounds.g0, pts)
        record("1", lhs, rhs, rhs - lhs)
    if "2" in conditions:
        lhs = np.linalg.norm(A, axis=1)
        rhs = _coef(bounds.g1, pts) + _coef(bounds.c1, pts) * abs_s ** (p - 1.0) \
            + _coef(bounds.k1, pts) * xin ** (p - 1.0)
        record("2", lhs, rhs, lhs - rhs)
    if "3" in conditions:
        lhs = np.abs(Bv)
        rhs = _coef(bounds.f_src, pts) + _coef(bounds.c2, pts) * abs_s ** (p - 1.0) \
            + _coef(bounds.k2, pts) * xin ** (p - 1.0)
        if with_gradient_term:
            rhs = rhs + bounds.b * xin**p
        record("3'" if with_gradient_term else "3", lhs, rhs, lhs - rhs)
    return report


def check_conditions(pair: FluxPair, bounds: StructureBounds, field: ExponentField,
                     samples: SampleSet, conditions: tuple = ("1", "2", "3"),
                     alpha_override: float | None = None) -> StructureReport:
    """Evaluate conditions (1), (2), (3) per sample; empty report means all
    hold.  Near-equalities within 1e-12 absolute or relative slack are
    treated as floating-point noise, not violations; the raw slack for
    triage is in max_slack."""
    return _check(pair, bounds, field, samples, False, alpha_override, conditions)


def check_conditions_natural_growth(pair: FluxPair, bounds: StructureBounds,
                                    field: ExponentField, samples: SampleSet,
                                    conditions: tuple = ("1", "2", "3"),
                                    alpha_override: float | None = None) -> StructureReport:
    """As check_conditions, with the source bound widened by b |xi|^p(x)."""
    return _check(pair, bounds, field, samples, True, alpha_override, conditions)


def mu_general(bounds: StructureBounds, ball: Ball, field: ExponentField) -> float:
    """Three-term source scale of the general Harnack bound:

        mu = [R^(1-n/q2) ||f||_{q2}]^e + [R^(-n/q0) ||g0||_{q0}]^e
           + [R^(-n/q1) ||g1||_{q1}]^e,    e = 1 / (p_minus^4R - 1),

    with ball norms over the 4R dilate.  Bounded powers of mu across scales
    are what make the Harnack constant radius-independent for log-Hoelder
    exponents.
    """
    R = ball.radius
    if R > 1.0 + 1e-12:
        raise ValueError(f"ball radius must be <= 1, got {R}")
    big = ball.dilate(4.0)
    box = bounds.g0.box
    if not (np.all(big.center - big.radius >= box.lo - 1e-12)
            and np.all(big.center + big.radius <= box.hi + 1e-12)):
        raise ValueError(f"the 4R dilate of the ball (radius {big.radius}) escapes the grid box")
    nodes = bounds.g0.nodes()
    p_minus = float(field(nodes[big.contains(nodes)]).min())
    e = 1.0 / (p_minus - 1.0)
    n = bounds.g0.n_axes

    def term(g: GridFunction, q: float, power_shift: float) -> float:
        if np.all(g.values == 0.0):
            return 0.0
        scale = 0.0 if q == np.inf else n / q
        return float((R ** (power_shift - scale) * lq_ball_norm(g, q, big)) ** e)

    return term(bounds.f_src, bounds.q2, 1.0) + term(bounds.g0, bounds.q0, 0.0) \
        + term(bounds.g1, bounds.q1, 0.0)


def exponential_transform(pair: FluxPair, bounds: StructureBounds,
                          direction: str) -> FluxPair:
    """Rescale the flux by exp((b/alpha)(s - M0)) ("sub") or its reciprocal
    ("super"); the source map is unchanged."""
    if not bounds.alpha > 0:
        raise ValueError(f"alpha must be positive, got {bounds.alpha}")
    if direction not in ("sub", "super"):
        raise ValueError(f"direction must be 'sub' or 'super', got {direction!r}")
    rate = bounds.b / bounds.alpha
    sign = 1.0 if direction == "sub" else -1.0

    def A(pts, s, xi):
        factor = np.exp(sign * rate * (np.asarray(s, dtype=float) - bounds.m0))
        return factor[:, None] * np.asarray(pair.A(pts, s, xi), dtype=float)

    return FluxPair(A, pair.B)


# -- named flux forms -----------------------------------------------------------

def p_laplacian_flux(field: ExponentField) -> FluxPair:
    """A = |xi|^(p(x)-2) xi, B = 0; the model divergence-form pair."""

    def A(pts, s, xi):
        p = field(pts)
        mag = np.linalg.norm(xi, axis=1)
        with np.errstate(divide="ignore", over="ignore"):
            coef = np.where(mag > 0, np.where(mag > 0, mag, 1.0) ** (p - 2.0), 0.0)
        return coef[:, None] * xi

    return FluxPair(A, _zero_b)


def scaled_flux(field: ExponentField, factor: float) -> FluxPair:
    base = p_laplacian_flux(field)

    def A(pts, s, xi):
        return factor * base.A(pts, s, xi)

    return FluxPair(A, _zero_b)


def zero_flux() -> FluxPair:
    def A(pts, s, xi):
        return np.zeros_like(np.asarray(xi, dtype=float))

    return FluxPair(A, _zero_b)


def constant_source(pair: FluxPair, value: float) -> FluxPair:
    def B(pts, s, xi):
        return np.full(np.asarray(s).shape, float(value))

    return FluxPair(pair.A, B)


def grid_source(pair: FluxPair, f: GridFunction) -> FluxPair:
    def B(pts, s, xi):
        return f.interp(pts)

    return FluxPair(pair.A, B)


def _zero_b(pts, s, xi):
    return np.zeros(np.asarray(s).shape, dtype=float)
