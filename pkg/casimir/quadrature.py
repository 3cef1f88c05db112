"""Quadrature rules for the spectral integrals.

Two rules cover every integral in the library: Gauss-Legendre on a finite
interval (the ``t = xi / (c kappa)`` variable on [0, 1]) and a
double-exponential exp-sinh rule for the half line (``kappa L`` on
[X, inf)). The adaptive drivers refine both until two successive estimates
agree to the configured relative tolerance.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
import logging
import math
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from casimir.errors import ConvergenceError
from config.settings import NumericsSettings, resolve

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# exp-sinh abscissae y = exp(pi/2 sinh tau) span roughly [1e-20, 3e2]
_TAU_MIN = -4.1
_TAU_MAX = 2.2


@dataclass(frozen=True)
class QuadratureResult:
    """Integral estimate with the difference of the last two refinements."""

    value: float | np.ndarray
    error: float
    evaluations: int


@lru_cache(maxsize=64)
def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [a, b] (read-only arrays)."""
    if n < 1:
        raise ValueError("number of Gauss-Legendre nodes must be positive")
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    nodes = a + half * (x + 1.0)
    weights = half * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=32)
def exp_sinh(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Exp-sinh nodes and weights for [0, inf) with step ``h = 2**-level``."""
    h = 2.0 ** -level
    k = np.arange(math.ceil(_TAU_MIN / h), math.floor(_TAU_MAX / h) + 1)
    tau = k * h
    y = np.exp(0.5 * np.pi * np.sinh(tau))
    w = h * 0.5 * np.pi * np.cosh(tau) * y
    y.setflags(write=False)
    w.setflags(write=False)
    return y, w


def _relative_change(new: np.ndarray, old: np.ndarray) -> tuple[float, float]:
    diff = float(np.max(np.abs(new - old)))
    scale = float(np.max(np.abs(new)))
    return diff, diff / scale if scale > 0.0 else diff


def integrate_half_line(
    func: Callable[[np.ndarray], np.ndarray],
    offset: float | np.ndarray = 0.0,
    *,
    settings: NumericsSettings | None = None,
    start_level: int = 2,
) -> QuadratureResult:
    """Integrate ``func`` over [offset, inf) for one or many offsets at once.

    Args:
        func: vectorized integrand; receives ``y`` with shape
            ``offset.shape + (nodes,)`` and returns an array of that shape.
        offset: lower limit(s) of integration.
        settings: numerical settings (tolerance and maximal refinement level).
        start_level: first exp-sinh level tried.

    Returns:
        QuadratureResult with ``value`` shaped like ``offset``.

    Raises:
        ConvergenceError: if the maximal level is reached without agreement.
    """
    cfg = resolve(settings)
    shift = np.asarray(offset, dtype=float)
    previous = None
    evaluations = 0
    for level in range(start_level, cfg.quad_max_level + 1):
        y, w = exp_sinh(level)
        values = func(shift[..., None] + y)
        evaluations += values.size
        estimate = np.sum(values * w, axis=-1)
        if previous is not None:
            diff, rel = _relative_change(estimate, previous)
            log.debug("exp-sinh level %d: change %.3e (rel %.3e)", level, diff, rel)
            if rel <= cfg.quad_rtol:
                value = estimate if estimate.ndim else float(estimate)
                return QuadratureResult(value, diff, evaluations)
        previous = estimate
    raise ConvergenceError(
        f"half-line quadrature did not converge by level {cfg.quad_max_level}",
        estimate=float(np.max(np.abs(previous))),
    )


def integrate_plane(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    *,
    settings: NumericsSettings | None = None,
    t_nodes: int = 12,
    start_level: int = 3,
    atol: float = 0.0,
) -> QuadratureResult:
    """Integrate ``func(t, y)`` over t in [0, 1] and y in [0, inf).

    ``func`` is called with broadcastable arrays ``t[:, None]`` and
    ``y[None, :]``. Gauss-Legendre nodes in t double while the exp-sinh step
    in y halves, until successive estimates agree to ``quad_rtol`` (or to
    ``atol`` for integrals that may vanish).
    """
    cfg = resolve(settings)
    previous = None
    evaluations = 0
    n_t = t_nodes
    for level in range(start_level, cfg.quad_max_level + 1):
        t, wt = gauss_legendre(n_t)
        y, wy = exp_sinh(level)
        values = np.broadcast_to(func(t[:, None], y[None, :]), (t.size, y.size))
        evaluations += values.size
        estimate = float(wt @ values @ wy)
        if previous is not None:
            diff = abs(estimate - previous)
            log.debug("plane quadrature n_t=%d level=%d: change %.3e", n_t, level, diff)
            if diff <= max(cfg.quad_rtol * abs(estimate), atol):
                return QuadratureResult(estimate, diff, evaluations)
        previous = estimate
        n_t *= 2
    raise ConvergenceError(
        f"plane quadrature did not converge by level {cfg.quad_max_level}",
        estimate=previous,
    )


def integrate_interval(
    func: Callable[[np.ndarray], np.ndarray],
    a: float = 0.0,
    b: float = 1.0,
    *,
    settings: NumericsSettings | None = None,
    start_nodes: int = 16,
    max_nodes: int = 1024,
) -> QuadratureResult:
    """Gauss-Legendre on [a, b], doubling the node count until converged."""
    cfg = resolve(settings)
    previous = None
    evaluations = 0
    n = start_nodes
    while n <= max_nodes:
        x, w = gauss_legendre(n, a, b)
        values = np.asarray(func(x), dtype=float)
        evaluations += n
        estimate = float(values @ w)
        if previous is not None:
            diff = abs(estimate - previous)
            if diff <= cfg.quad_rtol * abs(estimate):
                return QuadratureResult(estimate, diff, evaluations)
        previous = estimate
        n *= 2
    raise ConvergenceError(
        f"Gauss-Legendre quadrature did not converge with {max_nodes} nodes",
        estimate=previous,
    )


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """Map ``func`` over ``items``, optionally on a thread pool.

    Results come back in input order, so reductions over them are
    reproducible regardless of the worker count.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def ordered_sum(values: Sequence[float]) -> float:
    """Sum in a fixed order (math.fsum, independent of scheduling)."""
    return math.fsum(values)
