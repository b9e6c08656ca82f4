"""Engines for the determinant and Pfaffian integration identities.

Four computations share this module:

* the N-fold integral of det[f_j(x_k)] det[phi_j(x_k)] (by tensor
  quadrature, by Monte Carlo, and by the permutation-expanded intermediate
  form), against N! times the determinant of the Gram matrix of pairwise
  integrals;
* the 2n-fold integral of det[f_j(x_k)] Pf[h(x_j, x_k)] / (2n)! against the
  Pfaffian of the matrix of double integrals of f_j(x) h(x, y) f_k(y);
* the finite-interval covariance-style gap (b-a) int fg - int f int g and
  its double-integral form, which is non-negative for co-monotone pairs;
* the bundled pass/fail report combining the routes above.

Weighted families on infinite domains are handled through the reduction in
ensembles.weight_factorization: exactly the members that carry the embedded
weight are swapped for their smooth parts, and any leftover weight factors
appear as an explicit per-point factor.  The same reduced integrand feeds
the tensor, Monte Carlo, and Gram routes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .ensembles import (
    EnsembleSpec,
    FunctionFamily,
    KernelFunction,
    evaluate,
    matches_embedded,
    weight_factorization,
)
from .linalg import (
    determinant,
    determinant_batch,
    pfaffian,
    pfaffian_batch,
    relative_gap,
    skew_symmetrize,
)
from .quadrature import (
    DEFAULT_EVAL_BUDGET,
    DEFAULT_NODES_1D,
    DEFAULT_NODES_TENSOR,
    EMBEDDED_WEIGHTS,
    BudgetError,
    Domain,
    MCEstimate,
    gauss_rule,
    integrate_1d,
    integrate_nd,
    monte_carlo_nd,
)

__all__ = [
    "DEBRUIJN_SIZE_LIMIT",
    "DEFAULT_SEED",
    "DEFAULT_TOLERANCE",
    "MC_PASS_SLACK",
    "TENSOR_SIZE_LIMIT",
    "GramMatrix",
    "IdentityReport",
    "VerifyConfig",
    "andreief_lhs_mc",
    "andreief_lhs_permutation_oracle",
    "andreief_lhs_quadrature",
    "andreief_rhs",
    "chebyshev_gap",
    "debruijn_lhs_quadrature",
    "debruijn_rhs",
    "gram_matrix",
    "verify_andreief",
]

DEFAULT_TOLERANCE = 1e-9
DEFAULT_SEED = 42

# Tensor-grid size gates; an explicit force flag overrides them.
TENSOR_SIZE_LIMIT = 6
DEBRUIJN_SIZE_LIMIT = 4

# Absolute slack added to the 3-sigma Monte Carlo pass rule so that
# zero-variance estimates tolerate quadrature round-off on the other side.
MC_PASS_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Matrix of pairwise integrals int f_j(x) phi_k(x) dx."""

    order: int
    entries: np.ndarray
    rule_descriptor: str

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float).copy()
        if entries.shape != (self.order, self.order):
            raise ValueError(
                f"expected ({self.order}, {self.order}) entries, got {entries.shape}"
            )
        if not np.all(np.isfinite(entries)):
            raise ValueError("Gram entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class VerifyConfig:
    """Knobs for verify_andreief; defaults match the CLI defaults."""

    n_nodes_1d: int = DEFAULT_NODES_1D
    n_nodes_tensor: int = DEFAULT_NODES_TENSOR
    mc_samples: int = 0
    seed: int = DEFAULT_SEED
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.mc_samples < 0:
            raise ValueError("mc_samples must be non-negative (0 disables MC)")


@dataclass(frozen=True, eq=False)
class IdentityReport:
    """Both sides of an identity plus the agreement verdict.

    passed requires rel_gap <= tolerance for the quadrature route and, when
    a Monte Carlo estimate is present, |mean - rhs| within 3 standard errors
    (plus MC_PASS_SLACK absolute).
    """

    lhs_quadrature: float
    lhs_mc: MCEstimate | None
    rhs: float
    abs_gap: float
    rel_gap: float
    passed: bool
    metadata: dict


def mc_agrees(estimate: MCEstimate, reference: float) -> bool:
    """3-sigma agreement with a round-off floor for sigma = 0 cases."""
    slack = MC_PASS_SLACK * max(1.0, abs(reference))
    return abs(estimate.mean - reference) <= 3.0 * estimate.std_error + slack


# ---------------------------------------------------------------------------
# reduced integrands

_RAW = "raw"
_SMOOTH = "smooth"


def _member_callables(family: FunctionFamily, domain: Domain, mode: str):
    if mode == _RAW:
        return [
            lambda x, j=j: np.asarray(evaluate(family, j, x), dtype=float)
            for j in range(family.size)
        ]
    return list(weight_factorization(family, domain).smooth)


@dataclass(frozen=True, eq=False)
class _ReducedPair:
    """Weight-reduced pair evaluation.

    The Gram entry (j, k) integrand is left_fns[j] * right_fns[k] *
    point_factor; the tensor integrand over N variables carries one
    point_factor per variable.  point_factor None means 1.
    """

    left_fns: list
    right_fns: list
    point_factor: Callable | None


def _inverse_weight(domain: Domain) -> Callable:
    if domain.kind == "half_line":
        return lambda x: np.exp(np.asarray(x, dtype=float))
    return lambda x: np.exp(np.asarray(x, dtype=float) ** 2)


def _reduced_pair(spec: EnsembleSpec) -> _ReducedPair:
    domain = spec.domain
    if domain.kind == "finite":
        return _ReducedPair(
            _member_callables(spec.left, domain, _RAW),
            _member_callables(spec.right, domain, _RAW),
            None,
        )
    left_matches = matches_embedded(spec.left, domain)
    right_matches = matches_embedded(spec.right, domain)
    if left_matches and right_matches:
        # both families absorb one weight factor; restore the single
        # factor the measure actually carries
        return _ReducedPair(
            _member_callables(spec.left, domain, _SMOOTH),
            _member_callables(spec.right, domain, _SMOOTH),
            EMBEDDED_WEIGHTS[domain.kind],
        )
    if left_matches:
        return _ReducedPair(
            _member_callables(spec.left, domain, _SMOOTH),
            _member_callables(spec.right, domain, _RAW),
            None,
        )
    if right_matches:
        return _ReducedPair(
            _member_callables(spec.left, domain, _RAW),
            _member_callables(spec.right, domain, _SMOOTH),
            None,
        )
    warnings.warn(
        f"neither family of {spec.name!r} matches the embedded weight on "
        f"{domain}; dividing by the weight directly, which may overflow",
        RuntimeWarning,
        stacklevel=3,
    )
    return _ReducedPair(
        _member_callables(spec.left, domain, _RAW),
        _member_callables(spec.right, domain, _RAW),
        _inverse_weight(domain),
    )


def _reduced_family(family: FunctionFamily, domain: Domain):
    """Single-family reduction for the Pfaffian-side engines."""
    if domain.kind == "finite":
        return _member_callables(family, domain, _RAW), None
    if matches_embedded(family, domain):
        return _member_callables(family, domain, _SMOOTH), None
    warnings.warn(
        f"{family.kind} family does not match the embedded weight on "
        f"{domain}; dividing by the weight directly, which may overflow",
        RuntimeWarning,
        stacklevel=3,
    )
    return _member_callables(family, domain, _RAW), _inverse_weight(domain)


def _value_stack(fns, points: np.ndarray) -> np.ndarray:
    """(P, len(fns), N) stack with [p, j, k] = fns[j](points[p, k])."""
    p_count, n = points.shape
    flat = points.reshape(-1)
    rows = [np.asarray(fn(flat), dtype=float).reshape(p_count, n) for fn in fns]
    return np.stack(rows, axis=1)


def _point_factor_product(point_factor, points: np.ndarray) -> np.ndarray:
    vals = np.asarray(point_factor(points.reshape(-1)), dtype=float)
    return np.prod(vals.reshape(points.shape), axis=1)


def _pair_integrand(reduced: _ReducedPair) -> Callable:
    def integrand(points: np.ndarray) -> np.ndarray:
        values = determinant_batch(
            _value_stack(reduced.left_fns, points)
        ) * determinant_batch(_value_stack(reduced.right_fns, points))
        if reduced.point_factor is not None:
            values = values * _point_factor_product(reduced.point_factor, points)
        return values

    return integrand


# ---------------------------------------------------------------------------
# determinant identity


def gram_matrix(spec: EnsembleSpec, n_nodes: int = DEFAULT_NODES_1D) -> GramMatrix:
    """Pairwise-integral matrix of the ensemble, by 1-D Gauss quadrature."""
    rule = gauss_rule(spec.domain, n_nodes)
    reduced = _reduced_pair(spec)
    n = spec.size
    entries = np.empty((n, n))
    for j in range(n):
        for k in range(n):
            lf, rf = reduced.left_fns[j], reduced.right_fns[k]
            if reduced.point_factor is None:
                f = lambda x, lf=lf, rf=rf: lf(x) * rf(x)
            else:
                pf = reduced.point_factor
                f = lambda x, lf=lf, rf=rf, pf=pf: lf(x) * rf(x) * pf(x)
            entries[j, k] = integrate_1d(rule, f)
    descriptor = f"gauss({spec.domain}, n={n_nodes})"
    return GramMatrix(order=n, entries=entries, rule_descriptor=descriptor)


def _factorial(n: int) -> float:
    if n <= 20:
        return float(math.factorial(n))
    return math.exp(math.lgamma(n + 1.0))


def andreief_rhs(g: GramMatrix) -> float:
    """N! times the determinant of the Gram matrix."""
    n = g.order
    det = determinant(g.entries)
    if n <= 20:
        return _factorial(n) * det
    if det == 0.0:
        return 0.0
    return math.copysign(
        math.exp(math.lgamma(n + 1.0) + math.log(abs(det))), det
    )


def _check_tensor_size(n: int, limit: int, n_nodes: int, force: bool, hint: str) -> None:
    if n <= limit:
        return
    if not force:
        raise BudgetError(
            f"tensor grid over {n} variables exceeds the default size gate "
            f"({limit}); {hint}"
        )
    print(f"evaluation count: {n_nodes**n}")


def andreief_lhs_quadrature(
    spec: EnsembleSpec,
    n_nodes: int = DEFAULT_NODES_TENSOR,
    *,
    force: bool = False,
    budget: int = DEFAULT_EVAL_BUDGET,
) -> float:
    """N-fold tensor quadrature of det[f_j(x_k)] det[phi_j(x_k)]."""
    n = spec.size
    _check_tensor_size(
        n, TENSOR_SIZE_LIMIT, n_nodes, force,
        "use andreief_lhs_mc or pass force=True",
    )
    rule = gauss_rule(spec.domain, n_nodes)
    integrand = _pair_integrand(_reduced_pair(spec))
    try:
        return integrate_nd(rule, n, integrand, budget=budget)
    except BudgetError as err:
        raise BudgetError(f"{err}; consider andreief_lhs_mc") from None


def andreief_lhs_mc(spec: EnsembleSpec, samples: int, seed: int) -> MCEstimate:
    """Monte Carlo estimate of the same N-fold integral."""
    integrand = _pair_integrand(_reduced_pair(spec))
    return monte_carlo_nd(spec.domain, spec.size, integrand, samples, seed)


def andreief_lhs_permutation_oracle(
    spec: EnsembleSpec, n_nodes: int = DEFAULT_NODES_TENSOR
) -> float:
    """N! times the integral of prod_j f_{j-1}(x_j) * det[phi_{j-1}(x_k)].

    The intermediate form obtained by expanding the left determinant over
    permutations and relabelling; must equal andreief_lhs_quadrature.
    """
    n = spec.size
    _check_tensor_size(
        n, TENSOR_SIZE_LIMIT, n_nodes, False, "oracle is tensor-bound"
    )
    rule = gauss_rule(spec.domain, n_nodes)
    reduced = _reduced_pair(spec)

    def integrand(points: np.ndarray) -> np.ndarray:
        prod = np.ones(points.shape[0])
        for j in range(n):
            prod *= np.asarray(reduced.left_fns[j](points[:, j]), dtype=float)
        values = prod * determinant_batch(_value_stack(reduced.right_fns, points))
        if reduced.point_factor is not None:
            values = values * _point_factor_product(reduced.point_factor, points)
        return values

    return _factorial(n) * integrate_nd(rule, n, integrand)


# ---------------------------------------------------------------------------
# Pfaffian identity


def _check_debruijn_size(two_n: int, family_size: int) -> None:
    if two_n % 2:
        raise ValueError(f"size must be even, got {two_n}")
    if two_n != family_size:
        raise ValueError(
            f"size {two_n} does not match family size {family_size}"
        )


def debruijn_rhs(
    left: FunctionFamily,
    kernel: KernelFunction,
    domain: Domain,
    n_nodes: int,
    two_n: int,
) -> float:
    """Pf of the matrix of double integrals int int f_j(x) h(x,y) f_k(y).

    Each entry is a full 2-D tensor-quadrature value.  The assembled matrix
    is antisymmetrized to (B - B^T)/2 before the Pfaffian; the pre-existing
    asymmetry (quadrature reduction order only) is checked against 1e-12.
    """
    _check_debruijn_size(two_n, left.size)
    rule = gauss_rule(domain, n_nodes)
    fns, point_factor = _reduced_family(left, domain)
    h = kernel.antisymmetrized()
    weighted = np.array(
        [np.asarray(fn(rule.nodes), dtype=float) * rule.weights for fn in fns]
    )
    if point_factor is not None:
        weighted = weighted * np.asarray(point_factor(rule.nodes), dtype=float)
    kernel_matrix = np.asarray(
        h(rule.nodes[:, None], rule.nodes[None, :]), dtype=float
    )
    b = weighted @ kernel_matrix @ weighted.T
    asymmetry = float(np.max(np.abs(b + b.T))) if b.size else 0.0
    if asymmetry > 1e-12 * max(1.0, float(np.max(np.abs(b)))):
        raise ValueError(
            f"kernel integral matrix asymmetry {asymmetry:g} exceeds 1e-12"
        )
    return pfaffian(skew_symmetrize(b))


def debruijn_lhs_quadrature(
    left: FunctionFamily,
    kernel: KernelFunction,
    domain: Domain,
    n_nodes: int,
    two_n: int,
    *,
    force: bool = False,
    budget: int = DEFAULT_EVAL_BUDGET,
) -> float:
    """Tensor quadrature of det[f_j(x_k)] Pf[h(x_j, x_k)] over 2n variables,
    divided by (2n)!."""
    _check_debruijn_size(two_n, left.size)
    _check_tensor_size(
        two_n, DEBRUIJN_SIZE_LIMIT, n_nodes, force,
        "pass force=True to run anyway",
    )
    rule = gauss_rule(domain, n_nodes)
    fns, point_factor = _reduced_family(left, domain)
    h = kernel.antisymmetrized()

    def integrand(points: np.ndarray) -> np.ndarray:
        dets = determinant_batch(_value_stack(fns, points))
        kernels = np.asarray(
            h(points[:, :, None], points[:, None, :]), dtype=float
        )
        values = dets * pfaffian_batch(kernels)
        if point_factor is not None:
            values = values * _point_factor_product(point_factor, points)
        return values

    raw = integrate_nd(rule, two_n, integrand, budget=budget)
    return raw / _factorial(two_n)


# ---------------------------------------------------------------------------
# covariance-gap identity


def chebyshev_gap(
    f: Callable,
    g: Callable,
    domain: Domain,
    n_nodes: int = DEFAULT_NODES_1D,
) -> tuple[float, float]:
    """Both forms of the finite-interval covariance gap.

    Returns ((b-a) int fg - int f int g, (1/2) int int (f(x)-f(y))(g(x)-g(y))).
    The two agree identically; both are non-negative when f and g are
    co-monotone, and flip sign together when one is reversed.
    """
    if domain.kind != "finite":
        raise ValueError("covariance gap requires a finite domain")
    rule = gauss_rule(domain, n_nodes)
    int_fg = integrate_1d(rule, lambda x: np.asarray(f(x)) * np.asarray(g(x)))
    int_f = integrate_1d(rule, f)
    int_g = integrate_1d(rule, g)
    gap = (domain.b - domain.a) * int_fg - int_f * int_g

    def spread(points: np.ndarray) -> np.ndarray:
        x, y = points[:, 0], points[:, 1]
        return (np.asarray(f(x)) - np.asarray(f(y))) * (
            np.asarray(g(x)) - np.asarray(g(y))
        )

    double_form = 0.5 * integrate_nd(rule, 2, spread)
    return gap, double_form


# ---------------------------------------------------------------------------
# bundled verification


def verify_andreief(
    spec: EnsembleSpec, config: VerifyConfig | None = None
) -> IdentityReport:
    """Evaluate both sides of the determinant identity and report agreement.

    Quadrature LHS is always computed; Monte Carlo runs when
    config.mc_samples > 0.  Disagreement shows up as passed=False with the
    gaps in the report, never as a silent adjustment.
    """
    cfg = config if config is not None else VerifyConfig()
    rhs = andreief_rhs(gram_matrix(spec, cfg.n_nodes_1d))
    lhs = andreief_lhs_quadrature(spec, cfg.n_nodes_tensor)
    abs_gap = abs(lhs - rhs)
    rel = relative_gap(lhs, rhs)
    passed = rel <= cfg.tolerance
    estimate = None
    if cfg.mc_samples > 0:
        estimate = andreief_lhs_mc(spec, cfg.mc_samples, cfg.seed)
        passed = passed and mc_agrees(estimate, rhs)
    metadata = {
        "ensemble": spec.name,
        "size": spec.size,
        "domain": str(spec.domain),
        "n_nodes_1d": cfg.n_nodes_1d,
        "n_nodes_tensor": cfg.n_nodes_tensor,
        "mc_samples": cfg.mc_samples,
        "seed": cfg.seed,
        "tolerance": cfg.tolerance,
    }
    return IdentityReport(
        lhs_quadrature=lhs,
        lhs_mc=estimate,
        rhs=rhs,
        abs_gap=abs_gap,
        rel_gap=rel,
        passed=passed,
        metadata=metadata,
    )
