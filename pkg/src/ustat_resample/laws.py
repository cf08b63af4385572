"""Sampling laws for observations.

A :class:`Law` bundles what the rest of the package needs from a
distribution: draws, high-precision expectations of scalar functions
(for projection and chaos moments), quantile maps (for quasi-random
grids), and where available the analytic tail of ``|X|`` (for L_{p,1}
norms).  Supported laws: uniform on [0,1], scalar normal, finite
support on scalars or fixed-dimension tuples, and bivariate normal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

from .errors import ConfigInvalid, DimensionMismatch

_GAUSS_NODES = 128
_UEPS = 2.0**-53


@lru_cache(maxsize=None)
def _legendre_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    # Gauss-Legendre on [0, 1]; exact for polynomials of degree < 2*nodes.
    x, w = np.polynomial.legendre.leggauss(nodes)
    return (x + 1.0) / 2.0, w / 2.0

@lru_cache(maxsize=None)
def _hermite_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    # Gauss-Hermite for the standard normal weight.
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    return x, w / np.sqrt(2.0 * np.pi)


def _halton(dim: int, count: int) -> np.ndarray:
    """Deterministic Halton points in (0,1)^dim, origin skipped."""
    sampler = qmc.Halton(d=dim, scramble=False)
    sampler.fast_forward(1)
    u = sampler.random(count)
    return np.clip(u, _UEPS, 1.0 - _UEPS)


@dataclass(frozen=True)
class Law:
    """A sampling distribution for observations.

    Attributes
    ----------
    kind:
        One of ``uniform01``, ``normal``, ``finite``,
        ``bivariate_normal``.
    dim:
        Dimension of one observation (1 for scalars).
    """

    kind: str
    dim: int
    _sampler: Callable[[np.random.Generator, int], np.ndarray]
    _expect: Callable[[Callable[[np.ndarray], np.ndarray]], float]
    _quantile: Callable[[np.ndarray], np.ndarray]
    _abs_tail: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` observations, shape ``(n,)`` or ``(n, dim)``."""
        return self._sampler(rng, n)

    def expect(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        """E fn(X) by exact summation or high-order Gauss quadrature."""
        return float(self._expect(fn))

    def quantile(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in (0,1)^dim to representative observations."""
        return self._quantile(np.asarray(u, dtype=np.float64))

    def abs_tail(self, t: np.ndarray) -> np.ndarray:
        """P(|X| > t) for scalar laws with a known tail."""
        if self._abs_tail is None:
            raise ConfigInvalid("law", f"{self.kind} has no analytic |X| tail")
        return self._abs_tail(np.asarray(t, dtype=np.float64))

    @property
    def has_abs_tail(self) -> bool:
        return self._abs_tail is not None

    def mean(self) -> float:
        return self.expect(lambda x: x)

    def variance(self) -> float:
        m = self.mean()
        return self.expect(lambda x: (x - m) ** 2)

    def grid(self, count: int) -> np.ndarray:
        """Quasi-random representative points (Halton through quantile)."""
        u = _halton(self.dim, count)
        if self.dim == 1:
            return self.quantile(u[:, 0])
        return self.quantile(u)

    def fixed_tuples(self, j: int, count: int) -> np.ndarray:
        """``count`` quasi-random j-tuples of observations.

        Shape ``(count, j)`` for scalar laws, ``(count, j, dim)``
        otherwise.  Used as the fixed-argument grid in degeneracy
        checks.
        """
        u = _halton(self.dim * j, count)
        if self.dim == 1:
            return np.column_stack([self.quantile(u[:, i]) for i in range(j)])
        blocks = [self.quantile(u[:, self.dim * i:self.dim * (i + 1)])
                  for i in range(j)]
        return np.stack(blocks, axis=1)


def uniform01() -> Law:
    def expect(fn):
        x, w = _legendre_rule(_GAUSS_NODES)
        return float(np.dot(w, fn(x)))

    def tail(t):
        return np.clip(1.0 - t, 0.0, 1.0) * (t >= 0)

    return Law(
        kind="uniform01",
        dim=1,
        _sampler=lambda rng, n: rng.random(n),
        _expect=expect,
        _quantile=lambda u: u,
        _abs_tail=tail,
    )


def normal(mean: float = 0.0, sd: float = 1.0) -> Law:
    if sd <= 0:
        raise ConfigInvalid("law.sd", "must be positive")

    def expect(fn):
        x, w = _hermite_rule(_GAUSS_NODES)
        return float(np.dot(w, fn(mean + sd * x)))

    def tail(t):
        t = np.maximum(t, 0.0)
        return ndtr((-t - mean) / sd) + 1.0 - ndtr((t - mean) / sd)

    return Law(
        kind="normal",
        dim=1,
        _sampler=lambda rng, n: mean + sd * rng.standard_normal(n),
        _expect=expect,
        _quantile=lambda u: mean + sd * ndtri(u),
        _abs_tail=tail,
        params={"mean": mean, "sd": sd},
    )


def finite_support(points, probs) -> Law:
    pts = np.asarray(points, dtype=np.float64)
    pr = np.asarray(probs, dtype=np.float64)
    if pts.shape[0] != pr.shape[0]:
        raise ConfigInvalid("law.probs", "length must match points")
    if np.any(pr < 0) or abs(pr.sum() - 1.0) > 1e-9:
        raise ConfigInvalid("law.probs", "must be non-negative and sum to 1")
    pr = pr / pr.sum()
    dim = 1 if pts.ndim == 1 else pts.shape[1]
    cum = np.cumsum(pr)

    def sampler(rng, n):
        idx = rng.choice(pts.shape[0], size=n, p=pr)
        return pts[idx]

    def expect(fn):
        vals = fn(pts)
        return float(np.dot(pr, vals))

    def quantile(u):
        idx = np.minimum(np.searchsorted(cum, u, side="left"), pts.shape[0] - 1)
        return pts[idx]

    tail = None
    if dim == 1:
        def tail(t):
            t = np.atleast_1d(np.asarray(t, dtype=np.float64))
            mask = np.abs(pts)[None, :] > t[:, None]
            out = mask @ pr
            return out if out.size > 1 else out[0]

    return Law(
        kind="finite",
        dim=dim,
        _sampler=sampler,
        _expect=expect,
        _quantile=quantile,
        _abs_tail=tail,
        params={"points": pts, "probs": pr},
    )


def bivariate_normal(mean2=(0.0, 0.0), cov2=((1.0, 0.0), (0.0, 1.0))) -> Law:
    mu = np.asarray(mean2, dtype=np.float64)
    cov = np.asarray(cov2, dtype=np.float64)
    if mu.shape != (2,) or cov.shape != (2, 2):
        raise DimensionMismatch("bivariate_normal needs a 2-vector mean and 2x2 cov")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise ConfigInvalid("law.cov2", "must be positive definite") from exc

    def sampler(rng, n):
        return mu + rng.standard_normal((n, 2)) @ chol.T

    def expect(fn):
        # tensor Gauss-Hermite; each axis weight already carries 1/sqrt(2 pi)
        x, w = _hermite_rule(64)
        g1, g2 = np.meshgrid(x, x, indexing="ij")
        z = np.column_stack([g1.ravel(), g2.ravel()])
        pts = mu + z @ chol.T
        return float(np.dot(np.outer(w, w).ravel(), fn(pts)))

    def quantile(u):
        u = np.atleast_2d(u)
        z = ndtri(u)
        out = mu + z @ chol.T
        return out

    return Law(
        kind="bivariate_normal",
        dim=2,
        _sampler=sampler,
        _expect=expect,
        _quantile=quantile,
        params={"mean2": mu, "cov2": cov},
    )


_LAW_BUILDERS = {
    "uniform01": uniform01,
    "normal": normal,
    "finite": finite_support,
    "bivariate_normal": bivariate_normal,
}


def law_from_config(table: dict) -> Law:
    """Build a law from a config table ``{name: ..., <params>}``."""
    name = table.get("name")
    if name not in _LAW_BUILDERS:
        raise ConfigInvalid("law.name", f"unknown law {name!r}; "
                            f"choose from {sorted(_LAW_BUILDERS)}")
    kwargs = {k: v for k, v in table.items() if k != "name"}
    try:
        return _LAW_BUILDERS[name](**kwargs)
    except TypeError as exc:
        raise ConfigInvalid("law", str(exc)) from exc


def builtin_law_names() -> list[str]:
    return sorted(_LAW_BUILDERS)
