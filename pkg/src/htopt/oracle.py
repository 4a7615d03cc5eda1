"""
Independent reference solvers for ground-truth values.

Nothing here calls the tuner or the analytic gradients of the loss module:
the reference descent differences the loss values itself.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["OracleResult", "OracleError", "kkt_solve_qp", "grid_minimize",
           "golden_section", "reference_minimize"]

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class OracleError(RuntimeError):
    pass


@dataclass
class OracleResult:
    minimizer: np.ndarray
    optimal_value: float
    method: str
    certificate: dict = field(default_factory=dict)


def kkt_solve_qp(Q, c, A, b) -> OracleResult:
    """Minimize ``0.5 x'Qx + c'x`` subject to ``Ax = b`` via the KKT system.

    Raises
    ------
    OracleError
        If the KKT matrix ``[[Q, A'], [A, 0]]`` is singular.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    c = np.asarray(c, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    n, m = Q.shape[0], A.shape[0]
    K = np.block([[Q, A.T], [A, np.zeros((m, m))]])
    if np.linalg.matrix_rank(K) < n + m:
        raise OracleError("KKT matrix is singular")
    sol = np.linalg.solve(K, np.concatenate([-c, b]))
    x, lam = sol[:n], sol[n:]
    certificate = {
        "stationarity": float(np.linalg.norm(Q @ x + c + A.T @ lam, np.inf)),
        "feasibility": float(np.linalg.norm(A @ x - b, np.inf)),
    }
    return OracleResult(x, float(0.5 * x @ Q @ x + c @ x), "kkt", certificate)


def golden_section(fun: Callable, lo: float, hi: float, tol: float = 1e-12):
    """Minimize a unimodal scalar function on ``[lo, hi]``; returns ``(x, f(x), width)``."""
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol * (1.0 + abs(a) + abs(b)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
        if b - a <= 0:
            break
    candidates = [(fun(a), a), (fc, c), (fd, d), (fun(b), b)]
    value, x = min(candidates, key=lambda t: (np.nan_to_num(t[0], nan=np.inf), t[1]))
    return x, value, b - a


def grid_minimize(objective: Callable, lower, upper, points_per_axis: int = 201) -> OracleResult:
    """Exhaustive lattice search followed by one golden-section pass per axis.

    Parameters
    ----------
    objective : callable
        Maps a ``d``-vector to a scalar, ``d <= 3``.
    lower, upper : array_like
        Box bounds.

    Returns
    -------
    OracleResult
        ``certificate["spacing"]`` is the largest final bracket width.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    d = lower.size
    if d > 3:
        raise ValueError("grid search is limited to 3 dimensions")
    axes = [np.linspace(lower[i], upper[i], points_per_axis) for i in range(d)]
    best_x, best_f = None, np.inf
    with np.errstate(all="ignore"):
        for point in itertools.product(*axes):
            p = np.array(point)
            value = objective(p)
            if np.isfinite(value) and value < best_f:
                best_x, best_f = p, value
    if best_x is None:
        raise OracleError("objective is non-finite on the whole lattice")
    spacing = (upper - lower) / max(points_per_axis - 1, 1)
    widths = []
    x = best_x.copy()
    for i in range(d):
        lo = max(lower[i], x[i] - spacing[i])
        hi = min(upper[i], x[i] + spacing[i])

        def along(t, i=i):
            y = x.copy()
            y[i] = t
            return objective(y)

        t, value, width = golden_section(along, lo, hi)
        if value <= best_f:
            x[i], best_f = t, value
        widths.append(width)
    return OracleResult(x, float(best_f), "grid", {"spacing": float(max(widths, default=0.0))})


def _fd_gradient(fun, x):
    """Fourth-order central differences."""
    h = np.finfo(float).eps ** 0.2 * (1.0 + np.abs(x))
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        g[i] = (-fun(x + 2 * e) + 8 * fun(x + e) - 8 * fun(x - e) + fun(x - 2 * e)) / (12 * h[i])
    return g


def _polish(fun, x, g, L, grad_tol, max_steps=200):
    """Gradient steps accepted on gradient-norm decrease.

    Loss values stop resolving progress about ``sqrt(eps)`` away from the
    minimizer; the differenced gradient keeps resolving well below that.
    """
    gnorm = float(np.linalg.norm(g))
    for _ in range(max_steps):
        if gnorm <= grad_tol:
            break
        step = 1.0 / L
        improved = False
        for _ in range(40):
            cand = x - step * g
            gc = _fd_gradient(fun, cand)
            if np.linalg.norm(gc) < gnorm:
                x, g, gnorm, improved = cand, gc, float(np.linalg.norm(gc)), True
                break
            step *= 0.5
        if not improved:
            break
    return x, gnorm


def reference_minimize(rl, theta0, max_iters: int = 200_000, grad_tol: float = 1e-12) -> OracleResult:
    """Long accelerated descent on ``rl.value`` with finite-difference gradients.

    Nesterov momentum with backtracking and function-value restarts. Stops
    at ``grad_tol``, or when no step decreases the loss any more (the
    gradient is then at the differencing noise floor).

    Raises
    ------
    OracleError
        If ``max_iters`` is exhausted.
    """
    fun = rl.value
    x = np.atleast_1d(np.asarray(theta0, dtype=float)).copy()
    fx = fun(x)
    g = _fd_gradient(fun, x)
    if np.linalg.norm(g) <= grad_tol:
        return OracleResult(x, float(fx), "reference-descent", {"grad_norm": float(np.linalg.norm(g)), "iterations": 0})
    L = 1.0
    y, t = x.copy(), 1.0
    stalled = 0
    for it in range(1, max_iters + 1):
        gy = _fd_gradient(fun, y)
        fy = fun(y)
        while True:
            cand = y - gy / L
            fc = fun(cand)
            if fc <= fy - 0.5 / L * (gy @ gy) + 1e-15 * abs(fy) or L > 1e16:
                break
            L *= 2.0
        if fc < fx:
            stalled = 0
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = cand + (t - 1.0) / t_next * (cand - x)
            x, fx, t = cand, fc, t_next
        else:
            stalled += 1
            y, t = x.copy(), 1.0
        L = max(L / 2.0, 1e-12)
        g = _fd_gradient(fun, x)
        gnorm = float(np.linalg.norm(g))
        if gnorm <= grad_tol or stalled >= 20:
            x, gnorm = _polish(fun, x, g, L, grad_tol)
            return OracleResult(x, float(fun(x)), "reference-descent",
                                {"grad_norm": gnorm, "iterations": it})
    raise OracleError(f"reference descent exhausted {max_iters} iterations "
                      f"(gradient norm {np.linalg.norm(g):.3g})")
