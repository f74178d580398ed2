"""Structured parametric problems and their duals.

A structured problem is f(x, u) = <c, x> + h(b - A x + u) + k(x) with h, k
drawn from the convex building blocks in :mod:`valgrad.funcs`.  The dual
objective for recovering the value-function gradient is

    y  ->  k*(A^T y - c + v) + h*(y) - <b + u, y>,

assembled here together with its smooth/prox splitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .funcs import (
    BallIndicator,
    ConvexFunction,
    ElasticNet,
    Huber,
    SquaredNorm,
)
from .linalg import SpectralBounds, spectral_bounds


@dataclass(frozen=True)
class StructuredProblem:
    a: np.ndarray  # P x N
    h: ConvexFunction
    k: ConvexFunction
    c: np.ndarray = None
    b: np.ndarray = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        object.__setattr__(self, "a", a)
        p, n = a.shape
        c = np.zeros(n) if self.c is None else np.asarray(self.c, dtype=float)
        b = np.zeros(p) if self.b is None else np.asarray(self.b, dtype=float)
        if c.shape != (n,) or b.shape != (p,):
            raise ValueError("c must have length N and b length P")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.shape[1]

    @property
    def p(self) -> int:
        return self.a.shape[0]

    def residual(self, x, u):
        return self.b - self.a @ x + u

    def primal_value(self, x, u) -> float:
        return (
            float(np.dot(self.c, x))
            + self.h.value(self.residual(x, u))
            + self.k.value(x)
        )

    def conjugate_value(self, v, y) -> float:
        """f*(v, y) = -<b, y> + k*(A^T y - c + v) + h*(y)."""
        kc = self.k.conjugate()
        hc = self.h.conjugate()
        return (
            -float(np.dot(self.b, y))
            + kc.value(self.a.T @ y - self.c + v)
            + hc.value(y)
        )

    def duality_gap(self, x, y, u) -> float:
        """Primal value minus dual value; nonnegative by weak duality."""
        dual = float(np.dot(u, y)) - self.conjugate_value(np.zeros(self.n), y)
        return self.primal_value(x, u) - dual

    def dual_objective(self, u, v=None) -> "DualObjective":
        return DualObjective(self, np.asarray(u, dtype=float), v)

    # Smooth-part primal calculus used by solvers and estimators.  When the
    # regularizer is a nonsmooth elastic net it is handled entirely by its
    # prox, so the smooth part is <c, x> + h(b - A x + u) alone.

    @property
    def k_modulus(self) -> float:
        """Quadratic modulus of the regularizer (its lam / scale)."""
        if isinstance(self.k, SquaredNorm):
            return self.k.scale
        if isinstance(self.k, ElasticNet):
            return self.k.lam
        raise ValueError("unsupported regularizer")

    def prox_part(self):
        """Nonsmooth primal piece handled by a prox step, or None."""
        if isinstance(self.k, ElasticNet) and self.k.gamma > 0:
            return self.k
        return None

    def primal_smooth_grad(self, x, u):
        g = self.c - self.a.T @ self.h.grad(self.residual(x, u))
        if self.prox_part() is None:
            g = g + self.k_modulus * np.asarray(x, dtype=float)
        return g

    def grad_u(self, x, u):
        return self.h.grad(self.residual(x, u))

    def hess_xx_loss(self, x, u):
        """Pullback A^T H_h A of the loss Hessian at the residual."""
        hh = self.h.hessian(self.residual(x, u))
        return self.a.T @ hh @ self.a

    def hess_xx(self, x, u):
        """Smooth-surrogate Hessian A^T H_h A + lam I."""
        return self.hess_xx_loss(x, u) + self.k_modulus * np.eye(self.n)

    def hess_xu(self, x, u):
        return -self.a.T @ self.h.hessian(self.residual(x, u))

    def bounds(self) -> SpectralBounds:
        return spectral_bounds(self.a)

    def curvature(self) -> tuple[float, float]:
        """(L, m) of f(., u): L_h L_A + L_k and m_h m_p + m_k.

        For elastic-net k the smooth modulus lam is used for L so the pair
        stays finite; the l1 part adds no curvature.
        """
        sb = self.bounds()
        hp = self.h.profile()
        if isinstance(self.k, SquaredNorm):
            mk = lk = self.k.scale
        elif isinstance(self.k, ElasticNet):
            mk = lk = self.k.lam
        else:
            raise ValueError("unsupported regularizer")
        return hp.lips * sb.lmax_ata + lk, hp.m * sb.lmin_ata + mk


class DualObjective:
    """The assembled dual problem min_y k*(A^T y - c + v) + h*(y) - <b + u, y>.

    Exposes the smooth/prox split used by first-order solvers: for smooth h
    the whole objective is smooth; for Huber h the delta-ball indicator
    inside h* is the prox part and everything else is smooth.
    """

    def __init__(self, problem: StructuredProblem, u, v=None):
        self.problem = problem
        self.u = np.asarray(u, dtype=float)
        self.v = np.zeros(problem.n) if v is None else np.asarray(v, dtype=float)
        if self.u.shape != (problem.p,) or self.v.shape != (problem.n,):
            raise ValueError("dimension mismatch")
        self.kconj = problem.k.conjugate()
        if isinstance(problem.h, SquaredNorm):
            self.hstar_scale = 1.0 / problem.h.scale
            self.prox_part = None
        elif isinstance(problem.h, Huber):
            self.hstar_scale = 1.0
            self.prox_part = BallIndicator(problem.h.delta)
        else:
            raise ValueError("unsupported loss for the dual objective")
        self.shift = self.v - problem.c
        self.linear = problem.b + self.u

    def value(self, y) -> float:
        val = self.smooth_value(y)
        if self.prox_part is not None:
            val += self.prox_part.value(y)
        return val

    def smooth_value(self, y) -> float:
        q = self.problem.a.T @ y + self.shift
        return (
            self.kconj.value(q)
            + 0.5 * self.hstar_scale * float(np.dot(y, y))
            - float(np.dot(self.linear, y))
        )

    def smooth_grad(self, y):
        q = self.problem.a.T @ y + self.shift
        return (
            self.problem.a @ self.kconj.grad(q)
            + self.hstar_scale * np.asarray(y, dtype=float)
            - self.linear
        )

    def prox(self, tau, z):
        if self.prox_part is None:
            return np.asarray(z, dtype=float)
        return self.prox_part.prox(tau, z)

    def curvature(self) -> tuple[float, float]:
        """(L, m) of the smooth part."""
        sb = self.problem.bounds()
        kp = self.kconj.profile()
        lips = kp.lips * sb.lmax_ata + self.hstar_scale
        m = kp.m * sb.lmin_aat + self.hstar_scale
        return lips, m

    def quadratic_form(self):
        """(Q, r) with the objective equal to y^T Q y / 2 - r^T y + const.

        Only available when both pieces are quadratic (ridge loss and
        ridge regularizer).
        """
        pr = self.problem
        if not (
            isinstance(pr.h, SquaredNorm)
            and isinstance(self.kconj, SquaredNorm)
        ):
            raise ValueError("dual objective is not quadratic")
        s = self.kconj.scale  # 1 / lam
        q = s * (pr.a @ pr.a.T) + self.hstar_scale * np.eye(pr.p)
        r = self.linear - s * (pr.a @ self.shift)
        return q, r


def make_experiment_problem(
    which: int,
    a: np.ndarray,
    lam: float = 2.0,
    gamma: float = 0.1,
    delta: float = 0.1,
) -> StructuredProblem:
    """The four benchmark problems: ridge/Huber loss crossed with ridge/elastic-net
    regularizer, with c = 0 and b = 0."""
    if which not in (1, 2, 3, 4):
        raise ValueError("problem index must be in 1..4")
    h = SquaredNorm(1.0) if which in (1, 3) else Huber(delta)
    k = SquaredNorm(lam) if which in (1, 2) else ElasticNet(lam, gamma)
    return StructuredProblem(a=np.asarray(a, dtype=float), h=h, k=k)


def closed_form_f1(a: np.ndarray, lam: float, u: np.ndarray):
    """Exact minimizer and value-function gradient of the fully quadratic
    problem: x* = (A^T A + lam I)^{-1} A^T u and grad p(u) = u - A x*."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    a = np.asarray(a, dtype=float)
    u = np.asarray(u, dtype=float)
    n = a.shape[1]
    xstar = np.linalg.solve(a.T @ a + lam * np.eye(n), a.T @ u)
    return xstar, u - a @ xstar


@dataclass(frozen=True)
class ToyProblem:
    """Scalar counterexamples with closed-form ground truth.

    kind "exp_lower_bound":   f(x, u) = exp(x) + indicator(x >= u)
    kind "interval_quadratic": f(x, u) = (a x - b)^2 / 2 + indicator(|x| <= u)
    kind "no_minimizer":       f(x, u) = exp(x) + u^2 / 2
    """

    kind: str
    qa: float = 1.0
    qb: float = 1.0

    KINDS = ("exp_lower_bound", "interval_quadratic", "no_minimizer")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown toy problem {self.kind!r}")
        if self.kind == "interval_quadratic" and (self.qa == 0 or self.qb == 0):
            raise ValueError("quadratic toy needs nonzero coefficients")

    def ground_truth(self, u: float):
        """(xstar or None, p(u), p'(u))."""
        if self.kind == "exp_lower_bound":
            return u, float(np.exp(u)), float(np.exp(u))
        if self.kind == "interval_quadratic":
            ratio = abs(self.qb / self.qa)
            if not 0.0 < u < ratio:
                raise ValueError(f"u must lie in (0, {ratio})")
            xstar = np.sign(self.qb / self.qa) * u
            resid = self.qa * xstar - self.qb
            return xstar, 0.5 * resid * resid, self.qa * np.sign(self.qb / self.qa) * resid
        return None, 0.5 * u * u, u
