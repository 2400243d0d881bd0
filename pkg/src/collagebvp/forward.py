"""Galerkin solution of the coupled pair of two-point boundary value problems

    -u'' + lam1 * u = f,   u(0) = alpha1, u(1) = beta1,
    -v'' + lam2 * v = g,   v(0) = alpha2, v(1) = beta2,

over span{g_3, ..., g_{m+2}} of the tent basis.  Each unknown is written as
an affine boundary lift plus a combination of tents, which turns the
variational problem into the SPD linear system (I + lam * M) c = b per
equation; the two equations decouple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import haar_eval, load_vector, mass_matrix, schauder_matrix
from .expr import Expression, parse
from .linalg import SymMatrix, cholesky_solve
from .quadrature import QuadratureRule, default_rule

__all__ = [
    "ErrorReport",
    "GalerkinSolution",
    "ProblemSpec",
    "assemble",
    "error_report",
    "reference_problem",
    "solve_forward",
    "system_matrix",
]

MAX_DIMENSION = 256


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients, boundary values and source terms of the coupled pair.

    ``exact_*`` fields are optional closed-form solutions (and their
    derivatives) used only for error reporting.
    """

    lam1: float
    lam2: float
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    f: Expression
    g: Expression
    exact_u: Expression | None = None
    exact_v: Expression | None = None
    exact_du: Expression | None = None
    exact_dv: Expression | None = None

    def __post_init__(self):
        if not (self.lam1 > 0.0 and self.lam2 > 0.0):
            raise ValueError("lam1 and lam2 must be positive")

    def equation(self, eq):
        """(lam, alpha, beta, source) for ``eq`` in {1, 2, 'first', 'second'}."""
        if eq in (1, "first"):
            return self.lam1, self.alpha1, self.beta1, self.f
        if eq in (2, "second"):
            return self.lam2, self.alpha2, self.beta2, self.g
        raise ValueError(f"unknown equation selector {eq!r}")


def reference_problem() -> ProblemSpec:
    """The benchmark pair with solutions exp(x^2/10) and sin((x+1)^2)."""
    return ProblemSpec(
        lam1=math.e,
        lam2=math.pi / 2,
        alpha1=1.0,
        alpha2=math.sin(1.0),
        beta1=math.exp(0.1),
        beta2=math.sin(4.0),
        f=parse("(e - 1/5)*exp(x^2/10) - (x^2/25)*exp(x^2/10)"),
        g=parse("-2*cos((x+1)^2) + (pi/2)*sin((x+1)^2) + 4*(1+x)^2*sin((x+1)^2)"),
        exact_u=parse("exp(x^2/10)"),
        exact_v=parse("sin((x+1)^2)"),
        exact_du=parse("(x/5)*exp(x^2/10)"),
        exact_dv=parse("2*(x+1)*cos((x+1)^2)"),
    )


def system_matrix(lam: float, m: int) -> SymMatrix:
    """I + lam * M; the identity block is the (exact) stiffness Gram."""
    return SymMatrix(np.eye(m) + lam * mass_matrix(m))


def assemble(spec: ProblemSpec, m: int, eq, rule: QuadratureRule | None = None):
    """System matrix and load vector for one equation.

    The load is b_k = integral of (w - lam * lift) g_{k+2}: the stiffness
    contribution of the affine lift vanishes because every tent integrates
    its own derivative to zero.
    """
    if m < 1:
        raise ValueError("dimension must be >= 1")
    lam, alpha, beta, source = spec.equation(eq)
    rule = rule if rule is not None else default_rule(m)

    def integrand(x):
        return source(x) - lam * (alpha + (beta - alpha) * x)

    return system_matrix(lam, m), load_vector(integrand, m, rule)


@dataclass(frozen=True)
class GalerkinSolution:
    """Tent-basis coefficients of both equations plus their boundary lifts.

    The represented functions are u(x) = alpha1 + (beta1 - alpha1) x +
    sum_k coef_u[k-1] g_{k+2}(x) and the analogue for v; the boundary values
    are met exactly because every tent vanishes at 0 and 1.
    """

    m: int
    coef_u: np.ndarray
    coef_v: np.ndarray
    alpha1: float
    beta1: float
    alpha2: float
    beta2: float

    def __post_init__(self):
        for name in ("coef_u", "coef_v"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.m,):
                raise ValueError(f"{name} must have shape ({self.m},)")
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def evaluate(self, x):
        """(u, v, u', v') at ``x`` (scalar or array)."""
        arr = np.asarray(x, dtype=float)
        tents = schauder_matrix(range(3, self.m + 3), arr.ravel())
        steps = np.column_stack(
            [haar_eval(k, arr.ravel()) for k in range(2, self.m + 2)]
        )
        u = self.alpha1 + (self.beta1 - self.alpha1) * arr.ravel() + tents @ self.coef_u
        v = self.alpha2 + (self.beta2 - self.alpha2) * arr.ravel() + tents @ self.coef_v
        du = (self.beta1 - self.alpha1) + steps @ self.coef_u
        dv = (self.beta2 - self.alpha2) + steps @ self.coef_v
        if np.ndim(x) == 0:
            return float(u[0]), float(v[0]), float(du[0]), float(dv[0])
        shape = arr.shape
        return u.reshape(shape), v.reshape(shape), du.reshape(shape), dv.reshape(shape)

    def u(self, x):
        return self.evaluate(x)[0]

    def v(self, x):
        return self.evaluate(x)[1]


def solve_forward(spec: ProblemSpec, m: int, rule: QuadratureRule | None = None) -> GalerkinSolution:
    """Solve both equations over span{g_3, ..., g_{m+2}}."""
    if not 1 <= m <= MAX_DIMENSION:
        raise ValueError(f"dimension must be in 1..{MAX_DIMENSION}, got {m}")
    rule = rule if rule is not None else default_rule(m)
    A1, b1 = assemble(spec, m, 1, rule)
    A2, b2 = assemble(spec, m, 2, rule)
    coef_u = cholesky_solve(A1, b1)
    coef_v = cholesky_solve(A2, b2)
    return GalerkinSolution(
        m=m,
        coef_u=coef_u,
        coef_v=coef_v,
        alpha1=spec.alpha1,
        beta1=spec.beta1,
        alpha2=spec.alpha2,
        beta2=spec.beta2,
    )


@dataclass(frozen=True)
class ErrorReport:
    """Per-equation L2, derivative-L2 and H1 errors against exact solutions.

    By construction h1**2 == l2**2 + dl2**2 for each equation.
    """

    u_l2: float
    v_l2: float
    du_l2: float
    dv_l2: float
    u_h1: float
    v_h1: float

    def as_tuple(self):
        return (self.u_l2, self.v_l2, self.du_l2, self.dv_l2, self.u_h1, self.v_h1)


def error_report(
    sol: GalerkinSolution,
    exact_u,
    exact_v,
    exact_du,
    exact_dv,
    rule: QuadratureRule | None = None,
) -> ErrorReport:
    """Quadrature errors of ``sol`` against exact solutions and derivatives.

    The exact arguments are callables (parsed expressions qualify).  The
    derivative callables are required because the derivative-L2 column cannot
    be produced from the solution values alone.
    """
    for name, fn in (
        ("exact_u", exact_u),
        ("exact_v", exact_v),
        ("exact_du", exact_du),
        ("exact_dv", exact_dv),
    ):
        if fn is None:
            raise ValueError(f"missing exact solution data: {name}")
    rule = rule if rule is not None else default_rule(sol.m)
    x, w = rule.nodes_weights
    u, v, du, dv = sol.evaluate(x)

    def norm(residual):
        return float(np.sqrt(np.dot(w, residual * residual)))

    u_l2 = norm(exact_u(x) - u)
    v_l2 = norm(exact_v(x) - v)
    du_l2 = norm(exact_du(x) - du)
    dv_l2 = norm(exact_dv(x) - dv)
    return ErrorReport(
        u_l2=u_l2,
        v_l2=v_l2,
        du_l2=du_l2,
        dv_l2=dv_l2,
        u_h1=math.hypot(u_l2, du_l2),
        v_h1=math.hypot(v_l2, dv_l2),
    )
