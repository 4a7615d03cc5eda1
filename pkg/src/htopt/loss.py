"""
Penalized losses.

The full loss on ``R^n`` is::

    L(x) = f(x) + lambda_h ||h(x)||^2 + lambda_g ||softplus(g(x))||^2

and the reduced loss on the independent variables is ``l(theta) =
L(complete(theta))`` with the equality penalty dropped, since it vanishes
on the completion manifold.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from . import geometry
from .completion import AffineCompletion, completion_for
from .problem import (
    FD_STEP,
    ConvexRegionSpec,
    ProblemSpec,
    central_gradient,
)

__all__ = [
    "PenaltyWeights", "ReducedLoss", "PowerIterationError",
    "softplus", "full_loss", "reduced_loss", "reduced_gradient",
    "hessian_max_eigenvalue", "normalizing_signal", "smoothness_bound",
    "estimate_lipschitz",
]

EXACT_POLICY_MAX_DIM = 50


def softplus(y):
    """``log(1 + e^y)`` elementwise, written as ``max(y, 0) + log1p(e^-|y|)``."""
    y = np.asarray(y, dtype=float)
    return np.maximum(y, 0.0) + np.log1p(np.exp(-np.abs(y)))


@dataclass(frozen=True)
class PenaltyWeights:
    lambda_h: float = 1.0
    lambda_g: float = 1.0

    def __post_init__(self):
        if not self.lambda_h > 0:
            raise ValueError(f"lambda_h must be positive, got {self.lambda_h}")
        if not self.lambda_g >= 0:
            raise ValueError(f"lambda_g must be nonnegative, got {self.lambda_g}")


def full_loss(spec: ProblemSpec, x, weights: PenaltyWeights = PenaltyWeights()) -> float:
    """``f(x) + lambda_h ||h(x)||^2 + lambda_g ||softplus(g(x))||^2``."""
    x = np.asarray(x, dtype=float)
    value = float(spec.objective(x))
    if spec.equality is not None:
        h = np.asarray(spec.equality(x), dtype=float)
        value += weights.lambda_h * float(h @ h)
    if spec.inequality is not None:
        s = softplus(spec.inequality(x))
        value += weights.lambda_g * float(s @ s)
    return value


def smoothness_bound(P, L_bar: float) -> float:
    """``sqrt(1 + ||P||_2) * L_bar`` with ``||P||_2`` the spectral norm."""
    if L_bar <= 0:
        raise ValueError("L_bar must be positive")
    P = np.atleast_2d(np.asarray(P, dtype=float))
    norm = np.linalg.norm(P, 2) if P.size else 0.0
    return float(np.sqrt(1.0 + norm) * L_bar)


class PowerIterationError(RuntimeError):
    pass


class ReducedLoss:
    """``l(theta)`` and its derivatives for one problem and completion.

    Parameters
    ----------
    problem : ProblemSpec
    completion : AffineCompletion or NewtonCompletion, optional
        Built from ``problem`` when omitted.
    weights : PenaltyWeights, optional
    gradient_mode : {"analytic", "finite-difference"}
        ``"analytic"`` applies the chain rule through the completion
        Jacobian; the other option differences ``l`` directly.
    seed : int
        Seeds the power-iteration start vector.
    policy : {"exact", "conservative"}, optional
        Default normalizing-signal policy; exact up to 50 free variables.
    lipschitz_region : ConvexRegionSpec, optional
        Region sampled when a smoothness constant must be estimated.
    """

    def __init__(self, problem: ProblemSpec, completion=None,
                 weights: Optional[PenaltyWeights] = None,
                 gradient_mode: str = "analytic", seed: int = 0,
                 policy: Optional[str] = None,
                 lipschitz_region: Optional[ConvexRegionSpec] = None):
        if gradient_mode not in ("analytic", "finite-difference"):
            raise ValueError(f"unknown gradient mode {gradient_mode!r}")
        self.problem = problem
        self.completion = completion_for(problem) if completion is None else completion
        self.weights = PenaltyWeights() if weights is None else weights
        self.gradient_mode = gradient_mode
        self.seed = int(seed)
        self.partition = problem.partition
        if policy is None:
            policy = "exact" if self.n_free <= EXACT_POLICY_MAX_DIM else "conservative"
        if policy not in ("exact", "conservative"):
            raise ValueError(f"unknown normalizing policy {policy!r}")
        self.policy = policy
        self.lipschitz_region = lipschitz_region
        self._smoothness = None

    @property
    def n_free(self):
        return self.partition.n_free

    @property
    def has_inequality(self):
        return self.problem.inequality is not None and self.weights.lambda_g > 0

    def complete(self, theta):
        return self.completion.complete(theta)

    # -- values ---------------------------------------------------------

    def _penalty(self, x):
        s = softplus(self.problem.inequality(x))
        return float(s @ s)

    def value(self, theta) -> float:
        x = self.complete(theta)
        value = float(self.problem.objective(x))
        if self.has_inequality:
            value += self.weights.lambda_g * self._penalty(x)
        return value

    def full_loss(self, x) -> float:
        return full_loss(self.problem, x, self.weights)

    def _reduce(self, theta, grad_x):
        """Map a gradient in ``x`` to ``theta`` through the completion."""
        part = self.partition
        g_theta, g_z = part.split(grad_x)
        if part.m == 0:
            return g_theta
        J = self.completion.jacobian(theta)
        return g_theta + J.T @ g_z

    def _penalty_gradient_x(self, x):
        g = np.asarray(self.problem.inequality(x), dtype=float)
        Jg = np.atleast_2d(self.problem.inequality.jacobian(x))
        return 2.0 * Jg.T @ (softplus(g) * expit(g))

    def gradient(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.gradient_mode == "finite-difference":
            return central_gradient(self.value, theta)
        x = self.complete(theta)
        grad_x = self.problem.objective_gradient(x)
        if self.has_inequality:
            grad_x = grad_x + self.weights.lambda_g * self._penalty_gradient_x(x)
        return self._reduce(theta, grad_x)

    def penalty_gradient(self, theta) -> np.ndarray:
        """Gradient in ``theta`` of ``||softplus(g(complete(theta)))||^2``."""
        theta = np.asarray(theta, dtype=float)
        if self.problem.inequality is None:
            raise ValueError("problem has no inequality constraints")
        x = self.complete(theta)
        return self._reduce(theta, self._penalty_gradient_x(x))

    # -- curvature ------------------------------------------------------

    def hessian_vector_product(self, theta, v) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        eps = FD_STEP * (1.0 + np.linalg.norm(theta))
        return (self.gradient(theta + eps * v) - self.gradient(theta - eps * v)) / (2.0 * eps)

    def _power_iteration(self, theta, shift, tol, max_iters):
        n = self.n_free
        v = np.random.default_rng(self.seed).standard_normal(n)
        v /= np.linalg.norm(v)
        previous = None
        rq = 0.0
        for _ in range(max_iters):
            w = self.hessian_vector_product(theta, v) - shift * v
            if not np.all(np.isfinite(w)):
                raise PowerIterationError("non-finite Hessian-vector product")
            rq = float(v @ w)
            norm = np.linalg.norm(w)
            if norm == 0.0:
                return 0.0, True
            if previous is not None and abs(rq - previous) <= tol * max(abs(rq), 1e-300):
                return rq, True
            previous = rq
            v = w / norm
        return rq, False

    def hessian_max_eigenvalue(self, theta, tol: float = 1e-6, max_iters: int = 200) -> float:
        """Largest eigenvalue of the reduced Hessian by power iteration.

        Hessian-vector products are central differences of the gradient. When
        the dominant eigenvalue is negative a second, shifted run recovers
        the largest one.

        Raises
        ------
        PowerIterationError
            If either run fails to settle within ``max_iters``.
        """
        theta = np.asarray(theta, dtype=float)
        if self.n_free == 0:
            return 0.0
        dominant, ok = self._power_iteration(theta, 0.0, tol, max_iters)
        if not ok:
            raise PowerIterationError(f"power iteration did not converge at theta={theta}")
        if dominant >= 0.0:
            return dominant
        offset, ok = self._power_iteration(theta, dominant, tol, max_iters)
        if not ok:
            raise PowerIterationError(f"shifted power iteration did not converge at theta={theta}")
        return offset + dominant

    def smoothness_constant(self, theta=None) -> float:
        """Gradient Lipschitz constant used by the conservative policy.

        Uses ``smoothness_bound(P, L_bar)`` for affine equality with known
        ``L_bar``; otherwise samples ``lipschitz_region`` (or a unit box
        around ``theta``).
        """
        if self._smoothness is not None:
            return self._smoothness
        L_bar = self.problem.smoothness
        if L_bar is not None and isinstance(self.completion, AffineCompletion):
            self._smoothness = smoothness_bound(self.completion.P, L_bar)
            return self._smoothness
        if self.lipschitz_region is not None:
            self._smoothness = estimate_lipschitz(self, self.lipschitz_region, 200, seed=self.seed)
            return self._smoothness
        if theta is None:
            raise ValueError("no smoothness metadata, region, or point to estimate from")
        theta = np.asarray(theta, dtype=float)
        box = ConvexRegionSpec.box(theta - 1.0, theta + 1.0)
        return estimate_lipschitz(self, box, 200, seed=self.seed)

    def normalizing_signal(self, theta, policy: Optional[str] = None) -> float:
        """``1 + H`` with ``H`` the largest Hessian eigenvalue (exact policy),
        or ``1 + M`` with ``M`` a smoothness constant (conservative policy).
        The exact policy falls back to the conservative one when power
        iteration fails or ``1 + H`` is not positive."""
        policy = self.policy if policy is None else policy
        if policy == "exact":
            try:
                signal = 1.0 + self.hessian_max_eigenvalue(theta)
            except PowerIterationError:
                signal = np.nan
            if np.isfinite(signal) and signal > 0:
                return signal
        elif policy != "conservative":
            raise ValueError(f"unknown normalizing policy {policy!r}")
        return 1.0 + self.smoothness_constant(theta)


def reduced_loss(rl: ReducedLoss, theta) -> float:
    return rl.value(theta)


def reduced_gradient(rl: ReducedLoss, theta) -> np.ndarray:
    return rl.gradient(theta)


def hessian_max_eigenvalue(rl: ReducedLoss, theta) -> float:
    return rl.hessian_max_eigenvalue(theta)


def normalizing_signal(rl: ReducedLoss, theta, policy: Optional[str] = None) -> float:
    return rl.normalizing_signal(theta, policy)


def estimate_lipschitz(rl: ReducedLoss, region: ConvexRegionSpec, samples: int,
                       seed: int = 0) -> float:
    """Largest observed ``||grad l(a) - grad l(b)|| / ||a - b||`` over random pairs.

    A lower bound on the true gradient Lipschitz constant over ``region``.
    """
    rng = np.random.default_rng(seed)
    first = geometry.sample(region, samples, rng)
    second = geometry.sample(region, samples, rng)
    best = 0.0
    for a, b in zip(first, second):
        gap = np.linalg.norm(a - b)
        if gap == 0.0:
            continue
        ratio = np.linalg.norm(rl.gradient(a) - rl.gradient(b)) / gap
        best = max(best, float(ratio))
    return best
