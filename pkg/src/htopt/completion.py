"""
Completion maps ``theta -> x`` that satisfy the equality constraints.

Given a partition of ``x`` into independent entries ``theta`` and dependent
entries ``z`` (one per equality constraint), a completion returns
``x = assemble(theta, p(theta))`` with ``h(x) = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .problem import (
    SINGULAR_COND,
    AffineEquality,
    ProblemSpec,
    VariablePartition,
    condition_1norm,
)

__all__ = [
    "CompletionError", "AffineCompletion", "NewtonCompletion",
    "build_affine_completion", "completion_for", "complete", "completion_jacobian",
]


class CompletionError(RuntimeError):
    """The dependent block cannot be solved for."""


@dataclass(frozen=True, eq=False)
class AffineCompletion:
    """``p(theta) = P theta + q``."""

    P: np.ndarray
    q: np.ndarray
    partition: VariablePartition

    def complete(self, theta):
        theta = np.asarray(theta, dtype=float).reshape(self.partition.n_free)
        return self.partition.assemble(theta, self.P @ theta + self.q)

    def jacobian(self, theta=None):
        return self.P


def build_affine_completion(A, b, partition: VariablePartition) -> AffineCompletion:
    """Solve ``A x = b`` for the dependent block.

    Returns ``P = -A_z^{-1} A_theta`` and ``q = A_z^{-1} b``.

    Raises
    ------
    CompletionError
        When ``A_z`` is singular (1-norm condition estimate above 1e12).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    m, n = A.shape
    if n != partition.n or m != partition.m or b.shape != (m,):
        raise ValueError(f"A is {A.shape}, b has {b.shape}, partition expects "
                         f"({partition.m}, {partition.n})")
    Az = A[:, list(partition.dependent)]
    At = A[:, list(partition.independent)]
    if m == 0:
        return AffineCompletion(np.zeros((0, n)), np.zeros(0), partition)
    cond = condition_1norm(Az)
    if not np.isfinite(cond) or cond > SINGULAR_COND:
        raise CompletionError(
            f"dependent columns {[i + 1 for i in partition.dependent]} of A are singular "
            f"(condition estimate {cond:.3g})")
    lu = scipy.linalg.lu_factor(Az)
    P = -scipy.linalg.lu_solve(lu, At)
    q = scipy.linalg.lu_solve(lu, b)
    return AffineCompletion(P.reshape(m, n - m), q, partition)


class NewtonCompletion:
    """Completion of a nonlinear ``h`` by Newton's method on the dependent block.

    Each call warm-starts from the dependent block of the previous solution,
    so an instance belongs to one solver run at a time.
    """

    def __init__(self, h, partition: VariablePartition, max_iters: int = 50,
                 tolerance: float = 1e-12, warm_start: bool = True, z0=None):
        if max_iters < 1 or tolerance <= 0:
            raise ValueError("max_iters must be positive and tolerance > 0")
        self.h = h
        self.partition = partition
        self.max_iters = int(max_iters)
        self.tolerance = float(tolerance)
        self.warm_start = warm_start
        self._z0 = np.zeros(partition.m) if z0 is None else np.asarray(z0, dtype=float)
        self._last_z = None

    def reset(self):
        self._last_z = None

    def _split_jacobian(self, x):
        J = np.atleast_2d(self.h.jacobian(x))
        part = self.partition
        return J[:, list(part.independent)], J[:, list(part.dependent)]

    def _solve_dependent(self, Jz, rhs):
        cond = condition_1norm(Jz)
        if not np.isfinite(cond) or cond > SINGULAR_COND:
            raise CompletionError(f"dependent Jacobian block is singular (condition {cond:.3g})")
        return np.linalg.solve(Jz, rhs)

    def complete(self, theta):
        part = self.partition
        theta = np.asarray(theta, dtype=float).reshape(part.n_free)
        z = self._last_z if (self.warm_start and self._last_z is not None) else self._z0
        z = z.copy()
        x = part.assemble(theta, z)
        r = np.asarray(self.h(x), dtype=float)
        for _ in range(self.max_iters):
            if np.linalg.norm(r, np.inf) <= self.tolerance:
                break
            if not np.all(np.isfinite(r)):
                raise CompletionError(f"non-finite residual at theta={theta}")
            _, Jz = self._split_jacobian(x)
            z = z - self._solve_dependent(Jz, r)
            x = part.assemble(theta, z)
            r = np.asarray(self.h(x), dtype=float)
        else:
            if np.linalg.norm(r, np.inf) > self.tolerance:
                raise CompletionError(
                    f"Newton completion did not converge in {self.max_iters} iterations "
                    f"(residual {np.linalg.norm(r, np.inf):.3g}) at theta={theta}")
        self._last_z = z
        return x

    def jacobian(self, theta):
        """``dp/dtheta = -(dh/dz)^{-1} dh/dtheta`` at the completed point."""
        x = self.complete(theta)
        Jt, Jz = self._split_jacobian(x)
        return -self._solve_dependent(Jz, Jt)


def completion_for(spec: ProblemSpec, **newton_options):
    """Affine completion for ``A x = b``, Newton completion otherwise."""
    if spec.equality is None:
        part = spec.partition
        return AffineCompletion(np.zeros((0, part.n)), np.zeros(0), part)
    if isinstance(spec.equality, AffineEquality):
        return build_affine_completion(spec.equality.A, spec.equality.b, spec.partition)
    return NewtonCompletion(spec.equality, spec.partition, **newton_options)


def complete(cmap, theta) -> np.ndarray:
    return cmap.complete(theta)


def completion_jacobian(cmap, theta) -> np.ndarray:
    return cmap.jacobian(theta)
