"""Value-function gradient estimators.

Four estimators of the gradient of p(u) = inf_x f(x, u):

* analytic:  the parameter-gradient of f at an approximate minimizer,
* automatic: forward sensitivity propagation through the solver recursion,
* implicit:  the implicit-function-theorem linear solve at one iterate,
* dual:      iterates of the assembled dual problem,

plus a central-difference oracle backed by high-accuracy inner solves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .funcs import ElasticNet, NonsmoothError
from .problems import DualObjective, StructuredProblem, ToyProblem
from .solvers import (
    NotSPDError,
    SolverConfig,
    conjugate_gradient,
    optimal_gd_step,
    optimal_inertial_params,
)


class EstimatorInapplicable(RuntimeError):
    """The estimator's assumptions fail structurally at the given point."""


@dataclass
class GradientEstimate:
    method: str
    per_iteration: list = field(default_factory=list)
    flagged: bool = False

    @property
    def final(self):
        return self.per_iteration[-1]

    def errors(self, truth):
        return error_trace(self, truth)


def error_trace(est: GradientEstimate, truth) -> list[float]:
    """Euclidean distance to the reference gradient, per iteration."""
    truth = np.asarray(truth, dtype=float)
    return [float(np.linalg.norm(g - truth)) for g in est.per_iteration]


@dataclass
class SensitivityState:
    jac: np.ndarray  # N x P Jacobian estimate of the iterate w.r.t. u
    jac_prev: np.ndarray


def sensitivity_step(
    pr: StructuredProblem,
    method: str,
    x,
    u,
    jac,
    jac_prev,
    tau: float,
    beta: float = 0.0,
    x_prev=None,
) -> SensitivityState:
    """One forward-mode step of the Jacobian recursion matching a solver step.

    Gradient-descent-type methods propagate J+ = (I - tau H_xx) J - tau H_xu
    (plus the inertial difference term); proximal methods post-compose with
    the prox derivative at the pre-prox point.  For the elastic-net prox the
    diagonal derivative is 0 where |z_i| <= tau*gamma and 1/(1+tau*lam)
    elsewhere, with ties resolved to 0.
    """
    x = np.asarray(x, dtype=float)
    if method in ("gd", "heavy_ball"):
        hxx = pr.hess_xx(x, u)
        hxu = pr.hess_xu(x, u)
        jac_new = jac - tau * (hxx @ jac + hxu)
        if beta:
            jac_new = jac_new + beta * (jac - jac_prev)
        return SensitivityState(jac_new, jac)
    if method in ("ista", "ipiasco"):
        hxx = pr.hess_xx_loss(x, u)
        hxu = pr.hess_xu(x, u)
        inner = jac - tau * (hxx @ jac + hxu)
        if beta:
            inner = inner + beta * (jac - jac_prev)
        z = x - tau * pr.primal_smooth_grad(x, u)
        if beta:
            z = z + beta * (x - x_prev)
        k = pr.k
        if not isinstance(k, ElasticNet):
            raise ValueError("proximal sensitivity requires an elastic-net regularizer")
        d = (np.abs(z) > tau * k.gamma).astype(float) / (1.0 + tau * k.lam)
        return SensitivityState(d[:, None] * inner, jac)
    raise ValueError(f"unknown method {method!r}")


@dataclass
class PrimalRun:
    """Iterates, sensitivities and regularizer subgradient selections."""

    method: str
    tau: float
    beta: float
    points: list = field(default_factory=list)
    jacobians: list = field(default_factory=list)
    selections: list = field(default_factory=list)

    @property
    def final(self):
        return self.points[-1]


def run_primal(
    pr: StructuredProblem,
    u,
    method: str = "gd",
    tau: float | None = None,
    beta: float | None = None,
    iterations: int = 250,
    x0=None,
    with_sensitivity: bool = True,
) -> PrimalRun:
    """Run a primal solver, propagating sensitivities alongside the iterates.

    Smooth problems use gd / heavy_ball, elastic-net problems ista /
    ipiasco.  Step sizes default to 2/(L+m) and the inertial pair to the
    optimal strongly convex choices, using the whole-objective curvature.
    """
    u = np.asarray(u, dtype=float)
    lips, m = pr.curvature()
    if method in ("gd", "ista"):
        if tau is None:
            tau = optimal_gd_step(lips, m)
        beta = 0.0
    else:
        t_opt, b_opt = optimal_inertial_params(lips, m)
        if tau is None:
            tau = t_opt
        if beta is None:
            beta = b_opt
    proximal = method in ("ista", "ipiasco")
    if proximal and pr.prox_part() is None:
        raise ValueError("proximal method on a smooth problem; use gd or heavy_ball")

    x = np.zeros(pr.n) if x0 is None else np.array(x0, dtype=float)
    x_prev = x.copy()
    jac = np.zeros((pr.n, pr.p))
    jac_prev = jac.copy()
    run = PrimalRun(method=method, tau=tau, beta=beta)
    run.points.append(x.copy())
    if with_sensitivity:
        run.jacobians.append(jac.copy())
    if proximal:
        run.selections.append(pr.k.subgradient_min_norm(x))

    for _ in range(iterations):
        if with_sensitivity:
            state = sensitivity_step(
                pr, method, x, u, jac, jac_prev, tau, beta, x_prev=x_prev
            )
            jac, jac_prev = state.jac, state.jac_prev
        g = pr.primal_smooth_grad(x, u)
        if proximal:
            z = x - tau * g + beta * (x - x_prev)
            x_next = pr.k.prox(tau, z)
            run.selections.append((z - x_next) / tau)
        else:
            x_next = x - tau * g + beta * (x - x_prev)
        x_prev, x = x, x_next
        run.points.append(x.copy())
        if with_sensitivity:
            run.jacobians.append(jac.copy())
    return run


def analytic_estimator(pr: StructuredProblem, points, u) -> GradientEstimate:
    """g1(k) = grad_u f(x(k), u) = grad h(b - A x(k) + u); needs smooth h."""
    if not pr.h.profile().smooth:
        raise NonsmoothError("analytic estimator requires a smooth loss")
    seq = [pr.grad_u(x, u) for x in points]
    return GradientEstimate("analytic", seq)


def automatic_estimator(pr: StructuredProblem, run: PrimalRun, u) -> GradientEstimate:
    """g2(k) = J(k)^T grad_x f(x(k), u) + grad_u f(x(k), u).

    For elastic-net problems the regularizer subgradient is the prox
    optimality selection recorded during the run.
    """
    if not run.jacobians:
        raise ValueError("run was produced without sensitivities")
    seq = []
    for i, x in enumerate(run.points):
        gu = pr.grad_u(x, u)
        gx = pr.c - pr.a.T @ gu
        if run.selections:
            gx = gx + run.selections[i]
        else:
            gx = gx + pr.k_modulus * x
        seq.append(run.jacobians[i].T @ gx + gu)
    return GradientEstimate("automatic", seq)


def implicit_estimator(
    pr: StructuredProblem, x, u, tol: float = 1e-12, max_iterations: int | None = None
) -> GradientEstimate:
    """g3 = -H_xu^T w + grad_u f with H_xx w = grad_x f solved by CG.

    Nonsmooth regularizers are handled through the smooth surrogate Hessian
    and a minimal-norm subgradient; erratic output there is expected, not an
    error.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    hxx = pr.hess_xx(x, u)
    gu = pr.grad_u(x, u)
    gx = pr.c - pr.a.T @ gu
    if isinstance(pr.k, ElasticNet):
        gx = gx + pr.k.subgradient_min_norm(x)
    else:
        gx = gx + pr.k_modulus * x
    cap = 5 * pr.n if max_iterations is None else max_iterations
    try:
        tr = conjugate_gradient(hxx, gx, np.zeros(pr.n), cap, tol=tol)
    except NotSPDError as exc:
        raise EstimatorInapplicable("surrogate Hessian is not positive definite") from exc
    w = tr.final
    flagged = float(np.linalg.norm(gx - hxx @ w)) > tol * max(
        1.0, float(np.linalg.norm(gx))
    )
    hh = pr.h.hessian(pr.residual(x, u))
    g3 = hh @ (pr.a @ w) + gu
    return GradientEstimate("implicit", [g3], flagged=flagged)


def dual_estimator(
    pr: StructuredProblem, u, cfg: SolverConfig, v=None, y0=None
) -> GradientEstimate:
    """g4(k) = y(k), the iterates of the dual problem under the chosen solver."""
    from . import solvers

    dob = pr.dual_objective(u, v)
    y = np.zeros(pr.p) if y0 is None else np.array(y0, dtype=float)
    lips, m = dob.curvature()
    method = cfg.method
    if method == "cg":
        q, r = dob.quadratic_form()
        tr = conjugate_gradient(q, r, y, cfg.iterations, tol=0.0)
    elif method in ("gd", "heavy_ball"):
        if dob.prox_part is not None:
            raise ValueError("dual objective has a prox part; use a proximal method")
        if method == "gd":
            tau = cfg.tau or optimal_gd_step(lips, m)
            tr = solvers.gradient_descent(dob.smooth_grad, y, tau, cfg.iterations)
        else:
            t_opt, b_opt = optimal_inertial_params(lips, m)
            tr = solvers.heavy_ball(
                dob.smooth_grad, y, cfg.tau or t_opt, cfg.beta or b_opt, cfg.iterations
            )
    elif method == "ista":
        tau = cfg.tau or optimal_gd_step(lips, m)
        tr = solvers.ista(dob.smooth_grad, dob.prox, y, tau, cfg.iterations)
    elif method == "fista":
        tau = cfg.tau or 1.0 / lips
        tr = solvers.fista(
            dob.smooth_grad, dob.prox, y, tau, cfg.iterations, sc_smooth=m
        )
    elif method == "ipiasco":
        t_opt, b_opt = optimal_inertial_params(lips, m)
        tr = solvers.ipiasco(
            dob.smooth_grad, dob.prox, y, cfg.tau or t_opt, cfg.beta or b_opt,
            cfg.iterations,
        )
    elif method == "pdhg":
        tr = _dual_pdhg(pr, dob, y, cfg)
    else:
        raise ValueError(f"unknown dual solver {method!r}")
    return GradientEstimate("dual", [np.array(p) for p in tr.points])


def _dual_pdhg(pr: StructuredProblem, dob: DualObjective, y0, cfg: SolverConfig):
    """PDHG on min_y k*(A^T y + shift) + [h*(y) - <linear, y>] with K = A^T."""
    from . import solvers
    from .linalg import spectral_bounds

    op_norm = float(np.sqrt(spectral_bounds(pr.a).lmax_ata))
    sigma = cfg.pdhg_sigma or 1.0 / op_norm
    tau = cfg.tau or 1.0 / op_norm
    hstar = pr.h.conjugate()
    shift, linear = dob.shift, dob.linear

    def prox_conj(s, z):
        # prox of (k*(. + shift))* = k(.) - <shift, .>
        return pr.k.prox(s, z + s * shift)

    def prox_primal(t, z):
        return hstar.prox(t, z + t * linear)

    return solvers.pdhg(
        k_op=lambda y: pr.a.T @ y,
        k_op_adj=lambda z: pr.a @ z,
        prox_conj=prox_conj,
        prox_primal=prox_primal,
        y0=y0,
        sigma=sigma,
        tau=tau,
        iterations=cfg.iterations,
        theta=cfg.pdhg_theta,
        op_norm=op_norm,
    )


def oracle_primal_solve(
    pr: StructuredProblem,
    u,
    x0=None,
    max_iterations: int = 40_000,
    tol: float = 1e-14,
):
    """High-accuracy primal solve for oracle use.

    Accelerated proximal gradient with strongly convex momentum, stopped
    once the objective decrease stays below ``tol`` for several steps.
    Returns (x, value, converged).
    """
    from . import solvers

    u = np.asarray(u, dtype=float)
    lips, m = pr.curvature()
    proximal = pr.prox_part() is not None
    tau = 1.0 / (lips if proximal else lips)
    x = np.zeros(pr.n) if x0 is None else np.array(x0, dtype=float)
    z = x.copy()
    q = tau * m / 1.0
    beta = (1.0 - np.sqrt(min(q, 1.0))) / (1.0 + np.sqrt(min(q, 1.0)))
    val = pr.primal_value(x, u)
    calm = 0
    for _ in range(max_iterations):
        g = pr.primal_smooth_grad(z, u)
        x_next = z - tau * g
        if proximal:
            x_next = pr.k.prox(tau, x_next)
        z = x_next + beta * (x_next - x)
        x = x_next
        val_next = pr.primal_value(x, u)
        calm = calm + 1 if abs(val - val_next) < tol else 0
        val = val_next
        # several consecutive calm steps: the momentum ripple can produce
        # isolated tiny decreases long before convergence
        if calm >= 8:
            return x, val, True
    return x, val, False


def value_function(pr: StructuredProblem, u, warm=None, **kwargs):
    """p(u), exactly for the fully quadratic problem, otherwise by an
    oracle-grade solve; returns (value, minimizer, converged)."""
    from .funcs import SquaredNorm

    u = np.asarray(u, dtype=float)
    if isinstance(pr.h, SquaredNorm) and isinstance(pr.k, SquaredNorm):
        # Closed form up to the h scale: solve grad = 0 directly.
        s, lam = pr.h.scale, pr.k.scale
        rhs = s * pr.a.T @ (pr.b + u) - pr.c
        x = np.linalg.solve(s * (pr.a.T @ pr.a) + lam * np.eye(pr.n), rhs)
        return pr.primal_value(x, u), x, True
    x, val, ok = oracle_primal_solve(pr, u, x0=warm, **kwargs)
    return val, x, ok


def fd_oracle(
    pr: StructuredProblem,
    u,
    eps: float = 1e-5,
    max_iterations: int = 40_000,
    tol: float = 1e-14,
) -> GradientEstimate:
    """Central-difference gradient of the value function.

    Per-coordinate step eps * (1 + |u_i|); inner solves are warm-started
    across the 2P evaluations.  The estimate is flagged if any inner solve
    fails to converge.
    """
    u = np.asarray(u, dtype=float)
    g = np.zeros(pr.p)
    warm = None
    flagged = False
    for i in range(pr.p):
        step = eps * (1.0 + abs(u[i]))
        e = np.zeros(pr.p)
        e[i] = step
        hi, warm, ok_hi = value_function(
            pr, u + e, warm=warm, max_iterations=max_iterations, tol=tol
        )
        lo, warm, ok_lo = value_function(
            pr, u - e, warm=warm, max_iterations=max_iterations, tol=tol
        )
        flagged = flagged or not (ok_hi and ok_lo)
        g[i] = (hi - lo) / (2.0 * step)
    return GradientEstimate("fd", [g], flagged=flagged)


# ---------------------------------------------------------------------------
# Scalar counterexample runs


@dataclass
class ToyRun:
    x_trace: list
    analytic: list
    automatic: list
    implicit: list
    dual: list | None
    truth: tuple


def run_toy(
    toy: ToyProblem, u: float, tau: float = 0.05, iterations: int = 200, x0=None
) -> ToyRun:
    """Run the matching scalar scheme and evaluate the estimators per iterate.

    The constrained examples use projected gradient; the projection
    derivative (1 when the clamp is active) is propagated into the forward
    sensitivity.  Where the parameter-partial is a nontrivial cone the zero
    subgradient is selected, which is exactly the analytic/implicit failure
    the examples exhibit.
    """
    truth = toy.ground_truth(u)
    if toy.kind == "exp_lower_bound":
        x = u + 1.0 if x0 is None else float(x0)
        jac = 0.0
        xs, ang, aug, ig = [x], [0.0], [jac * np.exp(x)], [0.0]
        for _ in range(iterations):
            xg = x - tau * np.exp(x)
            if xg <= u:
                x, jac = u, 1.0
            else:
                jac = (1.0 - tau * np.exp(x)) * jac
                x = xg
            xs.append(x)
            ang.append(0.0)
            aug.append(jac * np.exp(x))
            ig.append(0.0)
        return ToyRun(xs, ang, aug, ig, None, truth)

    if toy.kind == "interval_quadratic":
        a, b = toy.qa, toy.qb
        x = 0.0 if x0 is None else float(x0)
        jac = 0.0
        xs, ang, aug, ig = [x], [0.0], [jac * a * (a * x - b)], [0.0]
        for _ in range(iterations):
            xg = x - tau * a * (a * x - b)
            if xg >= u:
                x, jac = u, 1.0
            elif xg <= -u:
                x, jac = -u, -1.0
            else:
                jac = (1.0 - tau * a * a) * jac
                x = xg
            xs.append(x)
            ang.append(0.0)
            aug.append(jac * a * (a * x - b))
            ig.append(0.0)
        return ToyRun(xs, ang, aug, ig, None, truth)

    # No minimizer: plain gradient descent on exp(x) diverges downward while
    # the dual problem min_y y^2/2 - u y converges to u.
    x = 0.0 if x0 is None else float(x0)
    xs = [x]
    for _ in range(iterations):
        x = x - tau * np.exp(x)
        xs.append(x)
    y = 0.0
    dg = [y]
    for _ in range(iterations):
        y = y - 0.5 * (y - u)
        dg.append(y)
    grad_at_cap = [np.exp(xk) for xk in xs]  # analytic values at the capped iterates
    return ToyRun(xs, grad_at_cap, grad_at_cap, grad_at_cap, dg, truth)
