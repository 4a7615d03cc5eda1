"""
High-order tuner (HT) iterations and first-order baselines.

One HT step on the reduced loss ``l`` with normalizer ``N``::

    theta_bar = theta - gamma * beta * grad l(theta) / N
    theta'    = theta_bar - beta * (theta_bar - nu)
    nu'       = nu - gamma * grad l(theta') / N

``N`` is computed once at ``theta`` and reused for both gradients.
Algorithm variants add a projection of ``theta'`` onto a convex region
(``ht3``), an inequality correction of ``theta'`` (``ht2``), or both
(``ht4``).
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import Projector
from .loss import ReducedLoss, estimate_lipschitz
from .problem import ConvexRegionSpec
from .trace import IterationTrace, TraceRow

__all__ = [
    "Gains", "GainError", "TunerState", "StopRule", "DivergenceError",
    "gain_bound", "validate_gains", "ht_step", "correction_delta", "rho",
    "run_alg1", "run_alg2", "run_alg3", "run_alg4", "run_baseline",
]


class GainError(ValueError):
    pass


class DivergenceError(FloatingPointError):
    pass


def gain_bound(beta: float) -> float:
    """Upper limit on ``gamma`` for a given ``beta``: ``beta(2-beta)/(8+beta)``."""
    return beta * (2.0 - beta) / (8.0 + beta)


@dataclass(frozen=True)
class Gains:
    beta: float
    gamma: float
    alpha: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise GainError(f"beta={self.beta} violates 0 < beta < 1")
        bound = gain_bound(self.beta)
        if not 0.0 < self.gamma < bound:
            raise GainError(
                f"gamma={self.gamma} violates 0 < gamma < beta(2-beta)/(8+beta) = {bound:.7f}")
        if not self.alpha >= 0.0:
            raise GainError(f"alpha={self.alpha} must be nonnegative")

    @property
    def bound(self):
        return gain_bound(self.beta)


def validate_gains(beta: float, gamma: float, alpha: float = 0.0) -> Gains:
    """Build :class:`Gains`, raising :class:`GainError` naming the violated bound."""
    return Gains(float(beta), float(gamma), float(alpha))


@dataclass
class TunerState:
    theta: np.ndarray
    nu: np.ndarray
    k: int = 0

    def __post_init__(self):
        self.theta = np.atleast_1d(np.asarray(self.theta, dtype=float)).copy()
        self.nu = np.atleast_1d(np.asarray(self.nu, dtype=float)).copy()
        if self.theta.shape != self.nu.shape:
            raise ValueError(f"theta {self.theta.shape} and nu {self.nu.shape} differ in shape")


@dataclass(frozen=True)
class StopRule:
    """Stop when the stationarity measure drops to ``grad_tol``, when
    ``|l - loss_ref| <= loss_tol``, or after ``max_iters`` steps."""

    max_iters: int = 100_000
    grad_tol: float = 1e-10
    loss_tol: Optional[float] = None
    loss_ref: Optional[float] = None

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.grad_tol < 0:
            raise ValueError("grad_tol must be nonnegative")
        if (self.loss_tol is None) != (self.loss_ref is None):
            raise ValueError("loss_tol and loss_ref go together")

    def satisfied(self, measure, loss):
        if measure <= self.grad_tol:
            return True
        return self.loss_tol is not None and abs(loss - self.loss_ref) <= self.loss_tol


# ---------------------------------------------------------------------------
# single steps
# ---------------------------------------------------------------------------

def ht_step(state: TunerState, rl: ReducedLoss, gains: Gains) -> TunerState:
    """One unprojected, uncorrected HT step (the ``ht1`` body)."""
    theta, nu = state.theta, state.nu
    grad = rl.gradient(theta)
    _require_finite(grad, theta, "gradient")
    N = rl.normalizing_signal(theta)
    theta_next = _momentum_update(theta, nu, grad, N, gains)
    grad_next = rl.gradient(theta_next)
    _require_finite(grad_next, theta_next, "gradient")
    return TunerState(theta_next, nu - gains.gamma * grad_next / N, state.k + 1)


def _momentum_update(theta, nu, grad, N, gains):
    theta_bar = theta - gains.gamma * gains.beta * grad / N
    return theta_bar - gains.beta * (theta_bar - nu)


def _require_finite(values, theta, what):
    if not np.all(np.isfinite(values)):
        raise DivergenceError(f"non-finite {what} at theta={np.array2string(np.asarray(theta), precision=17)}")


def correction_delta(rl: ReducedLoss, theta) -> np.ndarray:
    """Gradient in ``theta`` of ``||softplus(g(complete(theta)))||^2``."""
    return rl.penalty_gradient(theta)


def rho(x, rl: ReducedLoss, alpha: float) -> np.ndarray:
    """Inequality correction of a completed point.

    ``theta`` moves by ``-alpha * delta``; the dependent block moves by
    ``-alpha * J delta`` with ``J`` the completion Jacobian, i.e. along the
    tangent of the equality manifold.
    """
    part = rl.partition
    theta, z = part.split(x)
    delta = correction_delta(rl, theta)
    if part.m:
        dz = rl.completion.jacobian(theta) @ delta
    else:
        dz = np.zeros(0)
    return part.assemble(theta - alpha * delta, z - alpha * dz)


# ---------------------------------------------------------------------------
# run loop
# ---------------------------------------------------------------------------

def _violation(rl, x):
    if rl.problem.inequality is None:
        return 0.0
    g = np.asarray(rl.problem.inequality(x), dtype=float)
    return float(np.max(np.maximum(g, 0.0), initial=0.0))


def _equality_residual(rl, x):
    if rl.problem.equality is None:
        return 0.0
    return float(np.linalg.norm(rl.problem.equality(x), np.inf))


def _row(rl, k, theta, measure, N):
    x = rl.complete(theta)
    return TraceRow(k, rl.value(theta), rl.full_loss(x), _equality_residual(rl, x),
                    _violation(rl, x), float(measure), float(N))


def _metadata(algorithm, rl, gains=None, extra=None):
    meta = {"algorithm": algorithm, "problem": rl.problem.name or "unnamed", "seed": rl.seed}
    if gains is not None:
        meta.update(beta=repr(gains.beta), gamma=repr(gains.gamma), alpha=repr(gains.alpha))
    meta["lambda_h"] = repr(rl.weights.lambda_h)
    meta["lambda_g"] = repr(rl.weights.lambda_g)
    if extra:
        meta.update(extra)
    return meta


def _finish(trace, status, started, message=""):
    trace.status = status
    trace.message = message
    trace.metadata["status"] = status
    trace.wall_time = time.perf_counter() - started
    return trace


def _run_ht(algorithm, rl, theta0, nu0, gains, stop, projector=None, correct=False,
            callback=None):
    if gains is None:
        raise ValueError("gains are required")
    started = time.perf_counter()
    theta = np.atleast_1d(np.asarray(theta0, dtype=float)).copy()
    if theta.shape != (rl.n_free,):
        raise ValueError(f"theta0 has shape {theta.shape}, expected ({rl.n_free},)")
    if projector is not None:
        theta = projector.project(theta)
    nu = theta.copy() if nu0 is None else np.atleast_1d(np.asarray(nu0, dtype=float)).copy()
    state = TunerState(theta, nu, 0)
    trace = IterationTrace(metadata=_metadata(algorithm, rl, gains))

    theta, nu, k = state.theta, state.nu, 0
    grad = rl.gradient(theta)
    while True:
        loss = rl.value(theta)
        if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
            return state, _finish(trace, "diverged", started,
                                  f"non-finite loss or gradient at k={k}, theta={theta.tolist()}")
        N = rl.normalizing_signal(theta)
        if projector is None:
            measure = np.linalg.norm(grad)
        else:
            measure = N * np.linalg.norm(theta - projector.project(theta - grad / N))
        trace.append(_row(rl, k, theta, measure, N))
        state = TunerState(theta, nu, k)
        if callback is not None:
            callback(state)
        if stop.satisfied(measure, loss):
            return state, _finish(trace, "converged", started)
        if k >= stop.max_iters:
            return state, _finish(trace, "max_iters", started)

        theta_next = _momentum_update(theta, nu, grad, N, gains)
        if correct:
            x_next = rho(rl.complete(theta_next), rl, gains.alpha)
            theta_next = rl.partition.split(x_next)[0]
        if projector is not None:
            theta_next = projector.project(theta_next)
        grad = rl.gradient(theta_next)
        nu = nu - gains.gamma * grad / N
        theta = theta_next
        k += 1


def run_alg1(rl: ReducedLoss, theta0, nu0=None, gains: Gains = None,
             stop: StopRule = StopRule(), callback=None):
    """HT on the reduced loss for equality-constrained convex problems.

    Returns the final :class:`TunerState` and the :class:`IterationTrace`.
    ``nu0`` defaults to ``theta0``. ``callback``, if given, receives the
    :class:`TunerState` of every recorded iterate (all ``run_*`` functions
    accept it).
    """
    return _run_ht("ht1", rl, theta0, nu0, gains, stop, callback=callback)


def _theta_from_x(rl, x0):
    x0 = np.asarray(x0, dtype=float)
    if x0.shape == (rl.partition.n,):
        return rl.partition.split(x0)[0]
    return x0


def run_alg2(rl: ReducedLoss, x0, nu0=None, gains: Gains = None,
             stop: StopRule = StopRule(), callback=None):
    """HT with the inequality correction applied after every momentum update.

    ``x0`` is a full point (its independent block is used) or ``theta0``.
    With ``gains.alpha == 0`` the trajectory equals :func:`run_alg1`.
    """
    if rl.problem.inequality is None:
        raise ValueError("run_alg2 needs inequality constraints")
    return _run_ht("ht2", rl, _theta_from_x(rl, x0), nu0, gains, stop, correct=True,
                   callback=callback)


def run_alg3(rl: ReducedLoss, theta0, nu0=None, gains: Gains = None,
             stop: StopRule = StopRule(), region: ConvexRegionSpec = None, callback=None):
    """Projected HT: iterates stay in ``region``, where ``l`` is assumed convex.

    ``theta0`` is projected first; ``nu0`` defaults to the projected start.
    The stop rule sees the gradient-mapping norm
    ``N * ||theta - proj(theta - grad/N)||``, which equals ``||grad||``
    in the interior.
    """
    projector = _independent_projector(rl, region)
    return _run_ht("ht3", rl, theta0, nu0, gains, stop, projector=projector, callback=callback)


def run_alg4(rl: ReducedLoss, x0, nu0=None, gains: Gains = None,
             stop: StopRule = StopRule(), region_n: ConvexRegionSpec = None, callback=None):
    """Projected HT with inequality correction.

    The full-space projection is realized by projecting the independent
    block onto the region's independent slice and completing again, which
    keeps ``h(x) = 0``. ``region_n`` may be given in full dimension (boxes
    and balls) or directly in the independent variables.
    """
    if rl.problem.inequality is None:
        raise ValueError("run_alg4 needs inequality constraints")
    projector = _independent_projector(rl, region_n)
    return _run_ht("ht4", rl, _theta_from_x(rl, x0), nu0, gains, stop,
                   projector=projector, correct=True, callback=callback)


def _independent_projector(rl, region):
    if region is None:
        raise ValueError("a convex region is required")
    if region.dimension == rl.n_free:
        return Projector(region)
    if region.dimension == rl.partition.n:
        return Projector(region.restrict(rl.partition.independent))
    raise ValueError(f"region dimension {region.dimension} matches neither "
                     f"{rl.n_free} independent nor {rl.partition.n} total variables")


def run_baseline(rl: ReducedLoss, theta0, stop: StopRule = StopRule(),
                 method: str = "gradient-descent", region: ConvexRegionSpec = None,
                 callback=None):
    """Gradient descent or Nesterov's method on ``l`` with step ``1/L``.

    ``L`` comes from :func:`estimate_lipschitz` over ``region`` (default: a
    box of half-width ``max(1, |theta0|_inf)`` around ``theta0``). Nesterov
    uses the constant momentum ``(sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu))``
    when the problem declares a strong convexity ``mu``, and ``k / (k + 3)``
    otherwise. The ``N_k`` trace column holds ``L``.
    """
    aliases = {"gd": "gradient-descent", "gradient-descent": "gradient-descent",
               "nesterov": "nesterov"}
    if method not in aliases:
        raise ValueError(f"unknown baseline {method!r}")
    method = aliases[method]
    started = time.perf_counter()
    theta = np.atleast_1d(np.asarray(theta0, dtype=float)).copy()
    name = "gd" if method == "gradient-descent" else "nesterov"
    trace = IterationTrace(metadata=_metadata(name, rl))
    L = None
    mu = rl.problem.strong_convexity
    previous = theta.copy()
    k = 0
    while True:
        grad = rl.gradient(theta)
        loss = rl.value(theta)
        if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
            return theta, _finish(trace, "diverged", started,
                                  f"non-finite loss or gradient at k={k}, theta={theta.tolist()}")
        measure = np.linalg.norm(grad)
        if L is None and not stop.satisfied(measure, loss) and k < stop.max_iters:
            if region is None:
                half = max(1.0, float(np.max(np.abs(theta), initial=0.0)))
                region = ConvexRegionSpec.box(theta - half, theta + half)
            L = estimate_lipschitz(rl, region, 200, seed=rl.seed) or 1.0
            trace.metadata["lipschitz"] = repr(L)
        trace.append(_row(rl, k, theta, measure, L if L is not None else 0.0))
        if callback is not None:
            callback(TunerState(theta, theta, k))
        if stop.satisfied(measure, loss):
            return theta, _finish(trace, "converged", started)
        if k >= stop.max_iters:
            return theta, _finish(trace, "max_iters", started)
        if method == "gradient-descent":
            theta = theta - grad / L
        else:
            if mu is not None and mu < L:
                momentum = (np.sqrt(L) - np.sqrt(mu)) / (np.sqrt(L) + np.sqrt(mu))
            else:
                momentum = k / (k + 3.0)
            y = theta + momentum * (theta - previous)
            previous = theta
            theta = y - rl.gradient(y) / L
        k += 1
