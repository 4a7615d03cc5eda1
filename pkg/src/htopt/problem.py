"""
Problem model: objective, equality and inequality constraints, and the
split of the decision vector into independent and dependent entries.

Indices are 0-based throughout the Python API. Problem files use the
1-based ``x1 .. xn`` naming and are converted on load.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg
import scipy.linalg.lapack

from . import expression as ex

__all__ = [
    "VariablePartition", "ConvexRegionSpec", "ProblemSpec", "Diagnostic",
    "QuadraticObjective", "ExpressionFunction", "CallableFunction",
    "AffineEquality", "ExpressionField", "CallableField",
    "central_gradient", "central_jacobian", "condition_1norm", "default_partition",
    "residual_equality", "residual_inequality", "validate",
]

EPS = np.finfo(float).eps
FD_STEP = EPS ** (1.0 / 3.0)
SINGULAR_COND = 1e12


def condition_1norm(M):
    """1-norm condition estimate from an LU factorization (LAPACK ``gecon``)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, _ = scipy.linalg.lu_factor(M, check_finite=False)
    if np.any(np.diag(lu) == 0):
        return np.inf
    rcond, info = scipy.linalg.lapack.dgecon(lu, np.linalg.norm(M, 1), norm="1")
    return np.inf if rcond == 0 else 1.0 / rcond


def _fd_steps(x):
    return FD_STEP * (1.0 + np.abs(x))


def central_gradient(fun, x):
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    h = _fd_steps(x)
    g = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        g[i] = (fun(xp) - fun(xm)) / (xp[i] - xm[i])
    return g


def central_jacobian(fun, x):
    """Central-difference Jacobian of a vector function, shape (m, n)."""
    x = np.asarray(x, dtype=float)
    h = _fd_steps(x)
    cols = []
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h[i]
        xm[i] -= h[i]
        cols.append((np.atleast_1d(fun(xp)) - np.atleast_1d(fun(xm))) / (xp[i] - xm[i]))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


# --------------------------------------------------------------------------
# Scalar and vector fields
# --------------------------------------------------------------------------

class QuadraticObjective:
    """``f(x) = 0.5 x'Qx + c'x + constant``."""

    def __init__(self, Q, c=None, constant=0.0):
        self.Q = np.atleast_2d(np.asarray(Q, dtype=float))
        n = self.Q.shape[0]
        self.c = np.zeros(n) if c is None else np.asarray(c, dtype=float).reshape(n)
        self.constant = float(constant)

    @property
    def n(self):
        return self.Q.shape[0]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.c @ x + self.constant)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        return 0.5 * (self.Q + self.Q.T) @ x + self.c


class ExpressionFunction:
    """Scalar field given by an expression string or tree."""

    def __init__(self, expr):
        self.tree = ex.parse(expr) if isinstance(expr, str) else expr
        self.text = ex.to_string(self.tree)
        self.n_min = max(ex.variables(self.tree), default=0)
        self._compiled = ex.compile_expr(self.tree)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[0] < self.n_min:
            raise IndexError(f"expression references x{self.n_min} but the point has {x.shape[0]} entries")
        with np.errstate(all="ignore"):
            return float(self._compiled(x))

    def gradient(self, x):
        return ex.gradient(self.tree, x)


class CallableFunction:
    """Scalar field from Python callables; gradient by central differences if absent."""

    def __init__(self, fun: Callable, grad: Optional[Callable] = None):
        self.fun = fun
        self.grad = grad

    def __call__(self, x):
        return float(self.fun(np.asarray(x, dtype=float)))

    def gradient(self, x):
        if self.grad is None:
            return central_gradient(self, x)
        return np.asarray(self.grad(np.asarray(x, dtype=float)), dtype=float)


@dataclass(frozen=True, eq=False)
class AffineEquality:
    """Equality block ``A x = b``."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, dtype=float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=float)))

    @property
    def m(self):
        return self.A.shape[0]

    def __call__(self, x):
        return self.A @ np.asarray(x, dtype=float) - self.b

    def jacobian(self, x):
        return self.A


class ExpressionField:
    """Vector field whose components are expressions."""

    def __init__(self, exprs: Sequence):
        self.components = [ExpressionFunction(e) for e in exprs]

    @property
    def m(self):
        return len(self.components)

    @property
    def texts(self):
        return [c.text for c in self.components]

    def __call__(self, x):
        return np.array([c(x) for c in self.components])

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        if not self.components:
            return np.zeros((0, x.size))
        return np.vstack([c.gradient(x) for c in self.components])


class CallableField:
    """Vector field from a callable; Jacobian by central differences if absent."""

    def __init__(self, fun: Callable, m: int, jac: Optional[Callable] = None):
        self.fun = fun
        self._m = int(m)
        self.jac = jac

    @property
    def m(self):
        return self._m

    def __call__(self, x):
        return np.atleast_1d(np.asarray(self.fun(np.asarray(x, dtype=float)), dtype=float))

    def jacobian(self, x):
        if self.jac is None:
            return central_jacobian(self, x).reshape(self.m, -1)
        return np.atleast_2d(np.asarray(self.jac(np.asarray(x, dtype=float)), dtype=float))


Field = Union[AffineEquality, ExpressionField, CallableField]


# --------------------------------------------------------------------------
# Partition, regions, problem
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class VariablePartition:
    """Split of ``range(n)`` into dependent entries (one per equality) and the rest."""

    n: int
    dependent: tuple

    def __post_init__(self):
        dep = tuple(int(i) for i in self.dependent)
        object.__setattr__(self, "dependent", dep)
        if len(set(dep)) != len(dep):
            raise ValueError(f"dependent indices repeat: {dep}")
        if any(i < 0 or i >= self.n for i in dep):
            raise ValueError(f"dependent indices {dep} out of range for n={self.n}")
        ind = tuple(i for i in range(self.n) if i not in set(dep))
        object.__setattr__(self, "_ind", np.array(ind, dtype=int))
        object.__setattr__(self, "_dep", np.array(dep, dtype=int))

    @property
    def independent(self) -> tuple:
        return tuple(int(i) for i in self._ind)

    @property
    def m(self):
        return len(self.dependent)

    @property
    def n_free(self):
        return self.n - self.m

    def split(self, x):
        x = np.asarray(x, dtype=float)
        return x[self._ind], x[self._dep]

    def assemble(self, theta, z):
        x = np.empty(self.n)
        x[self._ind] = theta
        x[self._dep] = z
        return x


@dataclass(frozen=True, eq=False)
class ConvexRegionSpec:
    """A box, a Euclidean ball, or an intersection of halfspaces ``a_i'x <= c_i``."""

    kind: str
    dimension: int
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    center: Optional[np.ndarray] = None
    radius: Optional[float] = None
    normals: Optional[np.ndarray] = None
    offsets: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("region dimension must be positive")
        if self.kind == "box":
            lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.dimension,)).copy()
            hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.dimension,)).copy()
            if np.any(lo > hi):
                raise ValueError("box lower bound exceeds upper bound")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        elif self.kind == "ball":
            center = np.asarray(self.center, dtype=float).reshape(self.dimension)
            if not self.radius or self.radius <= 0:
                raise ValueError("ball radius must be positive")
            object.__setattr__(self, "center", center)
            object.__setattr__(self, "radius", float(self.radius))
        elif self.kind == "halfspaces":
            normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
            offsets = np.atleast_1d(np.asarray(self.offsets, dtype=float))
            if normals.shape != (offsets.size, self.dimension):
                raise ValueError("halfspace normals must be (count, dimension) matching offsets")
            if np.any(np.linalg.norm(normals, axis=1) == 0):
                raise ValueError("halfspace normal must be nonzero")
            object.__setattr__(self, "normals", normals)
            object.__setattr__(self, "offsets", offsets)
        else:
            raise ValueError(f"unknown region kind {self.kind!r}")

    @classmethod
    def box(cls, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        return cls("box", lower.size, lower=lower, upper=upper)

    @classmethod
    def ball(cls, center, radius):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        return cls("ball", center.size, center=center, radius=radius)

    @classmethod
    def halfspaces(cls, normals, offsets):
        normals = np.atleast_2d(np.asarray(normals, dtype=float))
        return cls("halfspaces", normals.shape[1], normals=normals, offsets=offsets)

    def restrict(self, indices):
        """The region's image under ``x -> x[indices]`` (boxes and balls only)."""
        idx = list(indices)
        if self.kind == "box":
            return ConvexRegionSpec.box(self.lower[idx], self.upper[idx])
        if self.kind == "ball":
            return ConvexRegionSpec.ball(self.center[idx], self.radius)
        raise ValueError("coordinate image of a halfspace intersection is not computed; "
                         "supply the independent-variable region directly")

    def to_dict(self):
        if self.kind == "box":
            return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}
        if self.kind == "ball":
            return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}
        return {"kind": "halfspaces", "normals": self.normals.tolist(),
                "offsets": self.offsets.tolist()}


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """``min f(x)`` s.t. ``h(x) = 0``, ``g(x) <= 0``.

    ``equality`` is an :class:`AffineEquality` or a vector field; ``inequality``
    is an optional vector field. ``smoothness`` (gradient Lipschitz bound of
    ``f``) and ``strong_convexity`` are optional metadata.
    """

    n: int
    objective: Callable
    equality: Optional[Field] = None
    inequality: Optional[Field] = None
    partition: Optional[VariablePartition] = None
    smoothness: Optional[float] = None
    strong_convexity: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        if self.partition is None:
            if isinstance(self.equality, AffineEquality):
                part = default_partition(self.equality.A)
            elif self.equality is None:
                part = VariablePartition(self.n, ())
            else:
                raise ValueError("a nonlinear equality block needs an explicit partition")
            object.__setattr__(self, "partition", part)
        for label, value in (("smoothness", self.smoothness),
                             ("strong_convexity", self.strong_convexity)):
            if value is not None and value <= 0:
                raise ValueError(f"{label} must be positive")

    @property
    def m(self):
        return 0 if self.equality is None else self.equality.m

    @property
    def is_affine(self):
        return self.equality is None or isinstance(self.equality, AffineEquality)

    def objective_gradient(self, x):
        grad = getattr(self.objective, "gradient", None)
        if grad is None:
            return central_gradient(self.objective, x)
        return np.asarray(grad(x), dtype=float)


def default_partition(A) -> VariablePartition:
    """Dependent columns picked by QR with column pivoting on ``A``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    m, n = A.shape
    if m == 0:
        return VariablePartition(n, ())
    _, _, piv = scipy.linalg.qr(A, pivoting=True, mode="economic")
    return VariablePartition(n, tuple(sorted(int(i) for i in piv[:min(m, n)])))


def _check_dim(spec, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != spec.n:
        raise ValueError(f"point has shape {x.shape}, expected ({spec.n},)")
    return x


def residual_equality(spec: ProblemSpec, x) -> np.ndarray:
    """``h(x)``; ``A x - b`` for an affine block; empty without equalities."""
    x = _check_dim(spec, x)
    if spec.equality is None:
        return np.zeros(0)
    return np.asarray(spec.equality(x), dtype=float)


def residual_inequality(spec: ProblemSpec, x) -> np.ndarray:
    """``g(x)``; positive entries are violations."""
    x = _check_dim(spec, x)
    if spec.inequality is None:
        raise ValueError("problem has no inequality constraints")
    return np.asarray(spec.inequality(x), dtype=float)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str


def validate(spec: ProblemSpec) -> list:
    """Return a list of :class:`Diagnostic`, empty when the problem is well posed."""
    out = []
    n, m = spec.n, spec.m
    if m > n:
        out.append(Diagnostic("overdetermined",
                              f"{m} equality constraints exceed {n} variables (need m <= n)"))
    part = spec.partition
    if part.n != n:
        out.append(Diagnostic("partition-size", f"partition covers {part.n} variables, problem has {n}"))
    if part.m != m and m <= n:
        out.append(Diagnostic("partition-count",
                              f"{part.m} dependent indices for {m} equality constraints"))
    eq = spec.equality
    if isinstance(eq, AffineEquality):
        if eq.A.shape[1] != n:
            out.append(Diagnostic("dimension", f"A has {eq.A.shape[1]} columns, expected {n}"))
        if eq.b.shape[0] != eq.A.shape[0]:
            out.append(Diagnostic("dimension", f"b has {eq.b.shape[0]} entries, A has {eq.A.shape[0]} rows"))
        if not out and m > 0:
            Az = eq.A[:, list(part.dependent)]
            cond = condition_1norm(Az)
            if not np.isfinite(cond) or cond > SINGULAR_COND:
                out.append(Diagnostic(
                    "singular-dependent-block",
                    f"columns {[i + 1 for i in part.dependent]} of A are singular "
                    f"(1-norm condition {cond:.3g})"))
    return out
