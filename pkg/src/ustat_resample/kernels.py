"""Symmetric kernels of U-statistics.

A kernel of order ``m`` is a symmetric function of ``m`` observations.
Two structures are supported:

* separable: ``f(x_1, ..., x_m) = sum_q c_q prod_k psi_q(x_k)`` built
  from named scalar factors, which unlocks O(n) evaluation paths and
  exact projection moments;
* general: an arbitrary vectorized callable, spot-checked for symmetry
  at construction.

Evaluation convention: ``kernel.fn(*args)`` takes ``m`` arrays, each of
shape ``(...,)`` for scalar observations or ``(..., dim)`` for vector
observations, broadcasts elementwise over the leading shape, and
returns an array of that leading shape.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (ConfigInvalid, KernelOrderTooLarge, NonSymmetricKernel,
                     OrderMismatch)

_SYMMETRY_SPOT_POINTS = 32
_SYMMETRY_RTOL = 1e-9


@dataclass(frozen=True)
class Factor:
    """A named scalar factor of a separable kernel."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]


def _legendre1(x):
    return np.sqrt(3.0) * (2.0 * x - 1.0)

def _legendre2(x):
    return np.sqrt(5.0) * (6.0 * x * x - 6.0 * x + 1.0)

def _legendre3(x):
    return np.sqrt(7.0) * (20.0 * x**3 - 30.0 * x**2 + 12.0 * x - 1.0)


FACTORS = {
    "identity": Factor("identity", lambda x: np.asarray(x, dtype=np.float64)),
    "square": Factor("square", lambda x: np.asarray(x, dtype=np.float64) ** 2),
    "legendre1": Factor("legendre1", _legendre1),
    "legendre2": Factor("legendre2", _legendre2),
    "legendre3": Factor("legendre3", _legendre3),
}


@dataclass(frozen=True)
class Kernel:
    """A symmetric kernel of order ``order`` on ``arg_dim``-dimensional
    observations.

    ``coeffs``/``factors`` are set only for separable kernels.  Order-0
    kernels represent constants (``constant`` holds the value).
    """

    order: int
    arg_dim: int
    fn: Callable[..., np.ndarray]
    name: str = ""
    coeffs: Optional[tuple[float, ...]] = None
    factors: Optional[tuple[Factor, ...]] = None
    constant: Optional[float] = None

    @property
    def is_separable(self) -> bool:
        return self.coeffs is not None

    def __call__(self, *args: np.ndarray) -> np.ndarray:
        if len(args) != self.order:
            raise OrderMismatch(
                f"kernel {self.name!r} has order {self.order}, got {len(args)} arguments")
        return np.asarray(self.fn(*args), dtype=np.float64)

    def eval_tuples(self, points: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Evaluate on rows of an ``(T, order)`` index array into ``points``."""
        args = [points[idx[:, k]] for k in range(self.order)]
        return self(*args)


def _separable_fn(coeffs: np.ndarray, fns: Sequence[Callable]) -> Callable:
    def fn(*args):
        total = None
        for c, f in zip(coeffs, fns):
            term = f(args[0])
            for a in args[1:]:
                term = term * f(a)
            total = c * term if total is None else total + c * term
        return total
    return fn


def separable_from_factors(coeffs, factors: Sequence[Factor], order: int,
                           name: str = "") -> Kernel:
    """Build ``sum_q c_q psi_q^{tensor order}`` from factor objects."""
    if order < 1:
        raise OrderMismatch("separable kernels need order >= 1")
    coeffs = tuple(float(c) for c in coeffs)
    factors = tuple(factors)
    if len(coeffs) != len(factors):
        raise ConfigInvalid("kernel.coeffs", "length must match factors")
    fn = _separable_fn(np.asarray(coeffs), [f.fn for f in factors])
    if not name:
        name = "separable(" + ",".join(f.name for f in factors) + ")"
    return Kernel(order=order, arg_dim=1, fn=fn, name=name,
                  coeffs=coeffs, factors=factors)


def separable_kernel(coeffs, factor_names: Sequence[str], order: int,
                     name: str = "") -> Kernel:
    """Build ``sum_q c_q psi_q^{tensor order}`` from named factors."""
    try:
        factors = tuple(FACTORS[fname] for fname in factor_names)
    except KeyError as exc:
        raise ConfigInvalid(
            "kernel.factors",
            f"unknown factor {exc.args[0]!r}; choose from {sorted(FACTORS)}",
        ) from exc
    return separable_from_factors(coeffs, factors, order, name)


def constant_kernel(value: float) -> Kernel:
    value = float(value)
    return Kernel(order=0, arg_dim=1, fn=lambda: np.float64(value),
                  name=f"const({value:g})", constant=value)


def _spot_check_symmetry(order: int, arg_dim: int, fn: Callable, name: str) -> None:
    rng = np.random.default_rng(0)
    shape = (_SYMMETRY_SPOT_POINTS,) if arg_dim == 1 else (_SYMMETRY_SPOT_POINTS, arg_dim)
    args = [rng.standard_normal(shape) for _ in range(order)]
    base = np.asarray(fn(*args), dtype=np.float64)
    scale = 1.0 + np.max(np.abs(base))
    for perm in itertools.permutations(range(order)):
        permuted = np.asarray(fn(*[args[p] for p in perm]), dtype=np.float64)
        if np.max(np.abs(permuted - base)) > _SYMMETRY_RTOL * scale:
            raise NonSymmetricKernel(
                f"kernel {name!r} is not symmetric under argument permutation")


def general_kernel(order: int, fn: Callable, name: str = "", arg_dim: int = 1,
                   check_symmetry: bool = True) -> Kernel:
    """Wrap an arbitrary vectorized callable as a kernel.

    The symmetry spot check evaluates all argument permutations on
    random inputs; fails fast rather than silently producing
    order-dependent statistics.
    """
    if order < 1:
        raise OrderMismatch("kernels need order >= 1")
    if check_symmetry and order > 1:
        _spot_check_symmetry(order, arg_dim, fn, name)
    return Kernel(order=order, arg_dim=arg_dim, fn=fn, name=name)


def symmetrize(order: int, fn: Callable, name: str = "", arg_dim: int = 1) -> Kernel:
    """Symmetrize a non-symmetric callable by averaging over all
    argument permutations.  Cost grows as order!, so orders above 4 are
    rejected."""
    if order > 4:
        raise KernelOrderTooLarge(
            "permutation-average symmetrization is limited to order <= 4")
    perms = list(itertools.permutations(range(order)))

    def sym_fn(*args):
        total = None
        for perm in perms:
            term = fn(*[args[p] for p in perm])
            total = term if total is None else total + term
        return total / math.factorial(order)

    return general_kernel(order, sym_fn, name=name or "symmetrized",
                          arg_dim=arg_dim, check_symmetry=False)


def _cross2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def simplicial_indicator(theta) -> Kernel:
    """Order-3 kernel on planar points: 1 if ``theta`` lies strictly
    inside the open triangle spanned by the three arguments, else 0.
    Boundary cases evaluate to 0 (the triangle is open)."""
    t = np.asarray(theta, dtype=np.float64)
    if t.shape != (2,):
        raise ConfigInvalid("kernel.theta", "must be a 2-vector")

    def fn(a, b, c):
        s1 = _cross2(b - a, t - a)
        s2 = _cross2(c - b, t - b)
        s3 = _cross2(a - c, t - c)
        inside = ((s1 > 0) & (s2 > 0) & (s3 > 0)) | ((s1 < 0) & (s2 < 0) & (s3 < 0))
        return inside.astype(np.float64)

    return Kernel(order=3, arg_dim=2, fn=fn,
                  name=f"simplicial_indicator({t[0]:g},{t[1]:g})")


def _builtin_product_xy(**_):
    return separable_kernel([1.0], ["identity"], order=2, name="product_xy")

def _builtin_centered_legendre1_pair(**_):
    return separable_kernel([1.0], ["legendre1"], order=2,
                            name="centered_legendre1_pair")

def _builtin_simplicial(theta=(0.0, 0.0), **_):
    return simplicial_indicator(theta)


BUILTIN_KERNELS = {
    "product_xy": _builtin_product_xy,
    "centered_legendre1_pair": _builtin_centered_legendre1_pair,
    "simplicial_indicator": _builtin_simplicial,
}


def kernel_from_config(table: dict) -> Kernel:
    """Build a kernel from a config table.

    Either ``{name = <builtin>, ...params}`` or an inline separable
    spec ``{coeffs = [...], factors = [...], order = m}``.
    """
    if "name" in table:
        name = table["name"]
        if name not in BUILTIN_KERNELS:
            raise ConfigInvalid("kernel.name", f"unknown kernel {name!r}; "
                                f"choose from {sorted(BUILTIN_KERNELS)}")
        kwargs = {k: v for k, v in table.items() if k != "name"}
        return BUILTIN_KERNELS[name](**kwargs)
    if "coeffs" in table or "factors" in table:
        missing = {"coeffs", "factors", "order"} - set(table)
        if missing:
            raise ConfigInvalid("kernel", f"separable spec missing {sorted(missing)}")
        return separable_kernel(table["coeffs"], table["factors"], int(table["order"]))
    raise ConfigInvalid("kernel", "need either a builtin name or a separable spec")


def builtin_kernel_names() -> list[str]:
    return sorted(BUILTIN_KERNELS)


def factor_names() -> list[str]:
    return sorted(FACTORS)
