"""Function families, antisymmetric kernels, and built-in ensemble pairs.

An ensemble pair is two same-size families {f_j}, {phi_j} on a common
domain; the identity engines integrate products of their determinants.
This module owns the catalogue of built-in pairs and the weight
factorization that bridges each family to the embedded weight of the
domain's Gauss rule (see quadrature).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .linalg import determinant
from .quadrature import Domain

__all__ = [
    "BUILTIN_ENSEMBLE_NAMES",
    "EnsembleSpec",
    "FunctionFamily",
    "KernelFunction",
    "Weight",
    "WeightFactorization",
    "build_ensemble",
    "evaluate",
    "family_matrix",
    "matches_embedded",
    "rescale",
    "vandermonde_check",
    "weight_factorization",
]

# Family kinds whose members involve non-integer powers of x and are
# therefore only defined for x > 0.
_POSITIVE_X_KINDS = ("stretched_monomial", "laguerre_meijer")

_FAMILY_KINDS = (
    "monomial",
    "weighted_monomial",
    "stretched_monomial",
    "shifted_gaussian",
    "laguerre_meijer",
)


@dataclass(frozen=True)
class Weight:
    """Scalar weight attached to a weighted_monomial family.

    kind "gaussian" is e^{-x^2}; kind "laguerre" is x^c e^{-x} with c >= 0.
    """

    kind: str
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "laguerre"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "gaussian" and self.c != 0.0:
            raise ValueError("gaussian weight takes no exponent parameter")
        if self.kind == "laguerre" and self.c < 0:
            raise ValueError("laguerre weight requires c >= 0")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-x * x)
        if self.c == 0.0:
            return np.exp(-x)
        return x**self.c * np.exp(-x)


@dataclass(frozen=True)
class FunctionFamily:
    """Indexed family f_0 .. f_{size-1} of one of the built-in kinds.

    kind            member j
    monomial            x^j
    weighted_monomial   x^j w(x)
    stretched_monomial  x^{theta j},  theta > 0
    shifted_gaussian    e^{-x^2 + 2 a_j x}
    laguerre_meijer     x^{nu + j} e^{-x},  nu >= 0 integer

    scales, when set, multiplies member j by scales[j]; used to probe
    scaling covariance of the identities.
    """

    size: int
    kind: str
    weight: Weight | None = None
    theta: float | None = None
    shifts: tuple[float, ...] | None = None
    nu: int | None = None
    scales: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("family size must be at least 1")
        if self.kind not in _FAMILY_KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}")
        if self.kind == "weighted_monomial":
            if self.weight is None:
                raise ValueError("weighted_monomial requires a weight")
        elif self.weight is not None:
            raise ValueError(f"{self.kind} takes no weight")
        if self.kind == "stretched_monomial":
            if self.theta is None or not self.theta > 0:
                raise ValueError("theta must be positive")
        elif self.theta is not None:
            raise ValueError(f"{self.kind} takes no theta")
        if self.kind == "shifted_gaussian":
            if self.shifts is None:
                raise ValueError("shifted_gaussian requires a shift per member")
            object.__setattr__(self, "shifts", tuple(float(a) for a in self.shifts))
            if len(self.shifts) != self.size:
                raise ValueError(
                    f"expected {self.size} shifts, got {len(self.shifts)}"
                )
        elif self.shifts is not None:
            raise ValueError(f"{self.kind} takes no shifts")
        if self.kind == "laguerre_meijer":
            if self.nu is None or self.nu != int(self.nu) or self.nu < 0:
                raise ValueError("nu must be a non-negative integer")
            object.__setattr__(self, "nu", int(self.nu))
        elif self.nu is not None:
            raise ValueError(f"{self.kind} takes no nu")
        if self.scales is not None:
            object.__setattr__(self, "scales", tuple(float(s) for s in self.scales))
            if len(self.scales) != self.size:
                raise ValueError(
                    f"expected {self.size} scales, got {len(self.scales)}"
                )

    def scale_of(self, j: int) -> float:
        return 1.0 if self.scales is None else self.scales[j]


def rescale(family: FunctionFamily, factors: Sequence[float]) -> FunctionFamily:
    """Copy of the family with member j multiplied by factors[j]."""
    if len(factors) != family.size:
        raise ValueError(f"expected {family.size} factors, got {len(factors)}")
    combined = tuple(
        family.scale_of(j) * float(factors[j]) for j in range(family.size)
    )
    return replace(family, scales=combined)


def _check_positive_x(x: np.ndarray, kind: str) -> None:
    if np.any(x <= 0):
        raise ValueError(f"x must be positive for {kind} families")


def evaluate(family: FunctionFamily, j: int, x):
    """Value of member j at x (scalar or array, shape preserved)."""
    if not 0 <= j < family.size:
        raise ValueError(f"member index {j} outside 0..{family.size - 1}")
    arr = np.asarray(x, dtype=float)
    kind = family.kind
    if kind in _POSITIVE_X_KINDS:
        _check_positive_x(arr, kind)
    if kind == "monomial":
        val = arr**j
    elif kind == "weighted_monomial":
        val = arr**j * family.weight(arr)
    elif kind == "stretched_monomial":
        val = arr ** (family.theta * j)
    elif kind == "shifted_gaussian":
        val = np.exp(-arr * arr + 2.0 * family.shifts[j] * arr)
    else:  # laguerre_meijer
        val = arr ** (family.nu + j) * np.exp(-arr)
    val = family.scale_of(j) * val
    return float(val) if np.isscalar(x) or np.ndim(x) == 0 else val


def family_matrix(family: FunctionFamily, x) -> np.ndarray:
    """Matrix [f_j(x_k)] of shape (size, len(x))."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    return np.stack([evaluate(family, j, arr) for j in range(family.size)])


@dataclass(frozen=True, eq=False)
class WeightFactorization:
    """Per-member smooth parts with smooth_j(x) * omega(x) = f_j(x).

    matches_embedded is true when the smooth parts come from a closed form
    that cannot overflow on the domain; otherwise the fallback f_j / omega
    is used and overflow_risk is set.
    """

    smooth: tuple[Callable, ...]
    matches_embedded: bool
    overflow_risk: bool = False


def _smooth_closed_form(family: FunctionFamily, domain: Domain):
    """Closed-form smooth parts when the family's decay matches the
    domain's embedded weight; None when no safe closed form exists."""
    kind = family.kind
    if domain.kind == "half_line":
        if kind == "weighted_monomial" and family.weight.kind == "laguerre":
            c = family.weight.c
            return [
                lambda x, j=j, c=c: family.scale_of(j) * np.asarray(x, float) ** (c + j)
                for j in range(family.size)
            ]
        if kind == "laguerre_meijer":
            nu = family.nu
            return [
                lambda x, j=j, nu=nu: family.scale_of(j) * np.asarray(x, float) ** (nu + j)
                for j in range(family.size)
            ]
        if kind == "weighted_monomial" and family.weight.kind == "gaussian":
            # x^j e^{-x^2} / e^{-x} decays; safe
            return [
                lambda x, j=j: family.scale_of(j)
                * np.asarray(x, float) ** j
                * np.exp(-np.asarray(x, float) ** 2 + np.asarray(x, float))
                for j in range(family.size)
            ]
        if kind == "shifted_gaussian":
            return [
                lambda x, a=family.shifts[j], j=j: family.scale_of(j)
                * np.exp(-np.asarray(x, float) ** 2 + (2.0 * a + 1.0) * np.asarray(x, float))
                for j in range(family.size)
            ]
    if domain.kind == "real_line":
        if kind == "weighted_monomial" and family.weight.kind == "gaussian":
            return [
                lambda x, j=j: family.scale_of(j) * np.asarray(x, float) ** j
                for j in range(family.size)
            ]
        if kind == "shifted_gaussian":
            return [
                lambda x, a=family.shifts[j], j=j: family.scale_of(j)
                * np.exp(2.0 * a * np.asarray(x, float))
                for j in range(family.size)
            ]
    return None


def matches_embedded(family: FunctionFamily, domain: Domain) -> bool:
    """True when the family factorizes over the domain's embedded weight
    without the overflow-prone f/omega fallback."""
    ensure_family_legal(family, domain)
    if domain.kind == "finite":
        return True
    return _smooth_closed_form(family, domain) is not None


def weight_factorization(family: FunctionFamily, domain: Domain) -> WeightFactorization:
    """Express each f_j as smooth_j * omega for the domain's embedded weight.

    On finite domains omega = 1 and smooth_j = f_j.  On infinite domains a
    closed-form smooth part is used when the family's own decay matches the
    embedded weight; otherwise the fallback smooth_j = f_j / omega is
    returned with overflow_risk set (and a RuntimeWarning, since the ratio
    grows without bound).
    """
    ensure_family_legal(family, domain)
    if domain.kind == "finite":
        smooth = [
            lambda x, j=j: evaluate(family, j, x) for j in range(family.size)
        ]
        return WeightFactorization(tuple(smooth), matches_embedded=True)
    closed = _smooth_closed_form(family, domain)
    if closed is not None:
        return WeightFactorization(tuple(closed), matches_embedded=True)
    if domain.kind == "half_line":
        inv = lambda x: np.exp(np.asarray(x, float))
    else:
        inv = lambda x: np.exp(np.asarray(x, float) ** 2)
    warnings.warn(
        f"{family.kind} on {domain} has no decay matching the embedded "
        "weight; falling back to f/omega, which may overflow",
        RuntimeWarning,
        stacklevel=2,
    )
    smooth = [
        lambda x, j=j: evaluate(family, j, x) * inv(x) for j in range(family.size)
    ]
    return WeightFactorization(tuple(smooth), matches_embedded=False, overflow_risk=True)


def ensure_family_legal(family: FunctionFamily, domain: Domain) -> None:
    """Construction-time legality of a family on a domain.

    Non-integer powers of x (stretched_monomial, laguerre weight with
    c > 0) require x >= 0, so those kinds are only legal on the half line
    or on finite(a, b) with a >= 0; laguerre_meijer additionally carries
    e^{-x}, which is non-normalizable on the real line.
    """
    needs_nonneg = family.kind in _POSITIVE_X_KINDS or (
        family.kind == "weighted_monomial"
        and family.weight.kind == "laguerre"
    )
    if needs_nonneg:
        ok = domain.kind == "half_line" or (
            domain.kind == "finite" and domain.a >= 0
        )
        if not ok:
            raise ValueError(
                f"{family.kind} family is only legal on half_line or "
                f"finite(a, b) with a >= 0, not {domain}"
            )


@dataclass(frozen=True)
class EnsembleSpec:
    """Named pair of same-size families on a common domain.

    m counts Meijer-type kernel factors in product ensembles; only the
    m = 1 specialization (plain x^{nu+j} e^{-x} members) is supported.
    """

    name: str
    domain: Domain
    left: FunctionFamily
    right: FunctionFamily
    m: int = 1

    def __post_init__(self):
        if self.m >= 2:
            raise NotImplementedError(
                "m >= 2 not implemented: only single-factor (m = 1) "
                "product kernels are supported"
            )
        if self.m != 1:
            raise ValueError("m must be a positive integer")
        if self.left.size != self.right.size:
            raise ValueError(
                f"family sizes differ: {self.left.size} vs {self.right.size}"
            )
        ensure_family_legal(self.left, self.domain)
        ensure_family_legal(self.right, self.domain)

    @property
    def size(self) -> int:
        return self.left.size


def _difference_kernel(x, y):
    return np.asarray(x, dtype=float) - np.asarray(y, dtype=float)


def _sign_kernel(x, y):
    return np.sign(np.asarray(y, dtype=float) - np.asarray(x, dtype=float))


_BUILTIN_KERNELS = {
    "difference": _difference_kernel,
    "sign": _sign_kernel,
}


@dataclass(frozen=True, eq=False)
class KernelFunction:
    """Two-point kernel h(x, y) for the Pfaffian-side identities.

    Built-in kinds are antisymmetric exactly (h(x, y) = -h(y, x) in floating
    point); custom evaluators carry no such guarantee and the identity
    engines use their antisymmetric part instead.
    """

    kind: str
    evaluator: Callable

    @classmethod
    def builtin(cls, kind: str) -> "KernelFunction":
        if kind not in _BUILTIN_KERNELS:
            raise ValueError(
                f"unknown kernel {kind!r}; built-ins: "
                + ", ".join(sorted(_BUILTIN_KERNELS))
            )
        return cls(kind, _BUILTIN_KERNELS[kind])

    @classmethod
    def custom(cls, fn: Callable) -> "KernelFunction":
        return cls("custom", fn)

    @property
    def is_builtin(self) -> bool:
        return self.kind != "custom"

    def antisymmetrized(self) -> Callable:
        """Evaluator guaranteed antisymmetric: built-ins pass through,
        custom kernels are replaced by (h(x,y) - h(y,x)) / 2."""
        if self.is_builtin:
            return self.evaluator
        fn = self.evaluator
        return lambda x, y: 0.5 * (fn(x, y) - fn(y, x))


def vandermonde_check(nodes) -> tuple[float, float]:
    """(det[x_k^j], product of differences) for the given nodes.

    The two values agree by the Vandermonde identity; repeated nodes give
    a pair of (near-)zeros rather than an error.
    """
    arr = np.atleast_1d(np.asarray(nodes, dtype=float))
    det = determinant(np.vander(arr, increasing=True).T)
    prod = 1.0
    n = arr.size
    for k in range(n):
        for j in range(k):
            prod *= arr[k] - arr[j]
    return det, prod


def _default_shifts(size: int) -> tuple[float, ...]:
    # distinct by default: coincident shifts make det[phi_j(x_k)] vanish
    return tuple(0.1 * (j + 1) for j in range(size))


def build_ensemble(
    name: str,
    size: int,
    *,
    theta: float = 2.0,
    c: float = 0.0,
    shifts: Sequence[float] | None = None,
    nu: int = 1,
    m: int = 1,
) -> EnsembleSpec:
    """Construct a built-in ensemble pair by name.

    Parameters beyond size apply only where meaningful: theta and c to
    muttalib-borodin, shifts to shifted-gue, nu to laguerre-product.
    """
    if size < 1:
        raise ValueError("size must be at least 1")
    mono = FunctionFamily(size, "monomial")
    if name == "uniform-monomial":
        return EnsembleSpec(name, Domain.finite(0.0, 1.0), mono, mono, m=m)
    if name == "legendre-monomial":
        return EnsembleSpec(name, Domain.finite(-1.0, 1.0), mono, mono, m=m)
    if name == "gue-monomial":
        left = FunctionFamily(size, "weighted_monomial", weight=Weight("gaussian"))
        return EnsembleSpec(name, Domain.real_line(), left, mono, m=m)
    if name == "muttalib-borodin":
        left = FunctionFamily(size, "weighted_monomial", weight=Weight("laguerre", c=c))
        right = FunctionFamily(size, "stretched_monomial", theta=theta)
        return EnsembleSpec(name, Domain.half_line(), left, right, m=m)
    if name == "shifted-gue":
        resolved = _default_shifts(size) if shifts is None else tuple(shifts)
        right = FunctionFamily(size, "shifted_gaussian", shifts=resolved)
        return EnsembleSpec(name, Domain.real_line(), mono, right, m=m)
    if name == "laguerre-product":
        right = FunctionFamily(size, "laguerre_meijer", nu=nu)
        return EnsembleSpec(name, Domain.half_line(), mono, right, m=m)
    raise ValueError(
        f"unknown ensemble {name!r}; built-ins: " + ", ".join(BUILTIN_ENSEMBLE_NAMES)
    )


BUILTIN_ENSEMBLE_NAMES = (
    "uniform-monomial",
    "legendre-monomial",
    "gue-monomial",
    "muttalib-borodin",
    "shifted-gue",
    "laguerre-product",
)
