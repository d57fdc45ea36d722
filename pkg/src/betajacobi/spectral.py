"""Limiting spectral objects and Chebyshev analysis on the support interval.

All integrals over the support are computed in theta coordinates,
x = c + r cos(theta), where the Chebyshev weight is flat and the closed
trapezoid rule is spectrally accurate (and exact for polynomials of degree
below half the panel count).  Default node count is 2048.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import eig
from .errors import ParameterError, QuadratureError
from .model import SymTridiagonal
from .params import AsymptoticParams, SupportInterval

__all__ = [
    "TestFunction",
    "ChebyshevCoefficients",
    "VarianceFunctionals",
    "monomial",
    "exp_function",
    "piecewise_linear",
    "chebyshev_poly_coeffs",
    "chebyshev_test_function",
    "shifted_chebyshev",
    "chebyshev_coefficients",
    "variance_functionals",
    "tau_integral",
    "integrate_density",
    "edge_weight_integral",
    "integrate_deviation",
    "arcsine_integral",
    "stieltjes_pair",
    "jacobi_recurrence_01",
    "jacobi_roots",
    "jacobi_probability_quadrature",
]

DEFAULT_NODES = 2048


@dataclass(frozen=True)
class TestFunction:
    """A test function on [0, 1], optionally with derivative and monomial form.

    poly_coeffs, when present, are ascending monomial coefficients; they let
    the experiment harness evaluate tr f(A) by exact banded power traces
    instead of a full eigendecomposition.
    """

    fn: Callable
    derivative: Optional[Callable] = None
    name: str = "f"
    poly_coeffs: Optional[tuple] = None

    def __call__(self, x):
        return self.fn(x)

    @property
    def is_polynomial(self) -> bool:
        return self.poly_coeffs is not None

    def check_derivative(self, grid: np.ndarray, tol: float = 1e-5, h: float = 1e-6) -> bool:
        """Central finite-difference check of the stored derivative."""
        if self.derivative is None:
            return True
        fd = (self.fn(grid + h) - self.fn(grid - h)) / (2 * h)
        return bool(np.max(np.abs(fd - self.derivative(grid))) <= tol)


def monomial(k: int) -> TestFunction:
    """x^k for 0 <= k <= 12."""
    if not (0 <= k <= 12):
        raise ParameterError("monomial degree limited to 0..12")
    if k == 0:
        return TestFunction(
            fn=lambda x: np.ones_like(np.asarray(x, dtype=float)),
            derivative=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            name="1",
            poly_coeffs=(1.0,),
        )
    coeffs = (0.0,) * k + (1.0,)
    return TestFunction(
        fn=lambda x, k=k: np.asarray(x, dtype=float) ** k,
        derivative=lambda x, k=k: k * np.asarray(x, dtype=float) ** (k - 1),
        name=f"x^{k}" if k > 1 else "x",
        poly_coeffs=coeffs,
    )


def exp_function() -> TestFunction:
    return TestFunction(fn=np.exp, derivative=np.exp, name="exp")


def piecewise_linear(knots: Sequence[float], values: Sequence[float]) -> TestFunction:
    """Piecewise-linear interpolant; not C^1, flagged in the name."""
    kn = np.asarray(knots, dtype=float)
    vals = np.asarray(values, dtype=float)
    if kn.ndim != 1 or kn.shape != vals.shape or kn.shape[0] < 2:
        raise ParameterError("need matching 1-d knots and values, at least two")
    if np.any(np.diff(kn) <= 0):
        raise ParameterError("knots must be strictly increasing")
    slopes = np.diff(vals) / np.diff(kn)

    def deriv(x, kn=kn, slopes=slopes):
        idx = np.clip(np.searchsorted(kn, np.asarray(x, dtype=float), side="right") - 1, 0, len(slopes) - 1)
        return slopes[idx]

    return TestFunction(
        fn=lambda x, kn=kn, vals=vals: np.interp(np.asarray(x, dtype=float), kn, vals),
        derivative=deriv,
        name="piecewise-linear (not C1)",
    )


def shifted_chebyshev(m: int, x, support: SupportInterval):
    """2 T_m((2x - l+ - l-)/(l+ - l-)) by the three-term recurrence."""
    if m < 0:
        raise ParameterError("order must be nonnegative")
    u = (np.asarray(x, dtype=float) - support.center) / support.half_width
    if m == 0:
        return 2.0 * np.ones_like(u)
    t_prev = np.ones_like(u)
    t_cur = u.copy()
    for _ in range(m - 1):
        t_prev, t_cur = t_cur, 2.0 * u * t_cur - t_prev
    return 2.0 * t_cur


def chebyshev_poly_coeffs(m: int, support: SupportInterval) -> tuple:
    """Ascending monomial coefficients of the shifted Chebyshev polynomial."""
    c, r = support.center, support.half_width
    if m == 0:
        return (2.0,)
    prev = np.array([1.0])  # T_0 in x
    cur = np.array([-c / r, 1.0 / r])  # T_1 = (x - c)/r
    for _ in range(m - 1):
        nxt = np.zeros(cur.shape[0] + 1)
        nxt[1:] += 2.0 / r * cur
        nxt[: cur.shape[0]] += -2.0 * c / r * cur
        nxt[: prev.shape[0]] -= prev
        prev, cur = cur, nxt
    return tuple(2.0 * cur)


def chebyshev_test_function(m: int, support: SupportInterval) -> TestFunction:
    """The m-th shifted Chebyshev polynomial as a TestFunction."""
    coeffs = chebyshev_poly_coeffs(m, support)
    dcoeffs = tuple(i * coeffs[i] for i in range(1, len(coeffs)))

    def deriv(x, d=dcoeffs):
        xx = np.asarray(x, dtype=float)
        acc = np.zeros_like(xx)
        for c in reversed(d):
            acc = acc * xx + c
        return acc

    return TestFunction(
        fn=lambda x, m=m, s=support: shifted_chebyshev(m, x, s),
        derivative=deriv,
        name=f"gamma{m}",
        poly_coeffs=coeffs,
    )


def _theta_grid(nodes: int):
    """Closed trapezoid grid on [0, pi]: nodes panels, weights sum to pi."""
    if nodes < 8:
        raise ParameterError("need at least 8 quadrature panels")
    theta = np.linspace(0.0, math.pi, nodes + 1)
    w = np.full(nodes + 1, math.pi / nodes)
    w[0] *= 0.5
    w[-1] *= 0.5
    return theta, w


@dataclass(frozen=True)
class ChebyshevCoefficients:
    """fhat[n] for 0 <= n <= N; fhat[0] is the theta-average of f.

    fhat[0] is the coefficient of (Gamma_0 / 2); the n = 0 basis function
    has squared norm 2, so it is stored as the plain average instead.
    """

    fhat: np.ndarray
    N: int

    def __post_init__(self):
        self.fhat.setflags(write=False)


def chebyshev_coefficients(
    f: Callable,
    N: int,
    support: SupportInterval,
    nodes: int = DEFAULT_NODES,
) -> ChebyshevCoefficients:
    """fhat[n] = (1/pi) integral of f(c + r cos t) cos(n t) dt, n >= 1."""
    theta, w = _theta_grid(nodes)
    x = support.center + support.half_width * np.cos(theta)
    vals = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("test function produced non-finite values on the support")
    wv = w * vals
    ns = np.arange(N + 1)
    fhat = (np.cos(np.outer(ns, theta)) @ wv) / math.pi
    return ChebyshevCoefficients(fhat=fhat, N=N)


@dataclass(frozen=True)
class VarianceFunctionals:
    """CLT variance sigma^2 = (2/beta) sum n fhat_n^2 and tau^2 = sum n^2 fhat_n^2."""

    sigma_sq: float
    tau_sq: float
    sigma_tail: float
    tau_tail: float
    coefficients_decayed: bool


def variance_functionals(
    f: Callable,
    N: int,
    beta: float,
    support: SupportInterval,
    nodes: int = DEFAULT_NODES,
) -> VarianceFunctionals:
    """Variance functionals from the Chebyshev coefficients.

    The tail fields hold the contribution of the last decade of
    coefficients; visible non-decay triggers a warning state.
    """
    coeffs = chebyshev_coefficients(f, N, support, nodes=nodes)
    ns = np.arange(1, N + 1)
    sq = coeffs.fhat[1:] ** 2
    sigma = (2.0 / beta) * float(np.sum(ns * sq))
    tau = float(np.sum(ns * ns * sq))
    cut = max(1, N - max(N // 10, 1))
    tail_idx = ns >= cut
    sigma_tail = (2.0 / beta) * float(np.sum(ns[tail_idx] * sq[tail_idx]))
    tau_tail = float(np.sum((ns[tail_idx] ** 2) * sq[tail_idx]))
    head = float(np.max(np.abs(coeffs.fhat[1:]), initial=0.0))
    tail_mag = float(np.max(np.abs(coeffs.fhat[1:][tail_idx]), initial=0.0))
    decayed = tail_mag <= max(1e-6 * head, 1e-13)
    if not decayed:
        warnings.warn(
            f"Chebyshev coefficients show no visible decay for {getattr(f, 'name', 'f')}; "
            "the function may not be smooth enough for the variance formula",
            stacklevel=2,
        )
    return VarianceFunctionals(
        sigma_sq=sigma,
        tau_sq=tau,
        sigma_tail=sigma_tail,
        tau_tail=tau_tail,
        coefficients_decayed=decayed,
    )


def tau_integral(f: TestFunction, support: SupportInterval, nodes: int = DEFAULT_NODES) -> float:
    """(1/2pi) integral of |f'|^2 sqrt((l+ - x)(x - l-)) dx, in theta form."""
    if f.derivative is None:
        raise ParameterError("tau integral needs a derivative")
    theta, w = _theta_grid(nodes)
    r = support.half_width
    x = support.center + r * np.cos(theta)
    vals = np.asarray(f.derivative(x), dtype=float) ** 2
    return float(np.sum(w * vals * (r * np.sin(theta)) ** 2) / (2.0 * math.pi))


def integrate_density(
    f: Callable,
    asym: AsymptoticParams,
    nodes: int = DEFAULT_NODES,
    support: SupportInterval | None = None,
) -> float:
    """Integral of f against the limiting spectral density.

    The density is sqrt(-(x - l-)(x - l+)) / (2 pi a x (1 - x)); in theta
    coordinates the integrand is (r^2/(2 pi a)) f(x) sin^2(t) / (x(1-x)).
    Endpoint limits are substituted when an edge sits at 0 or 1.
    """
    asym.require_bulk()
    sup = support if support is not None else SupportInterval.from_shape(asym.a, asym.b)
    theta, w = _theta_grid(nodes)
    r, c = sup.half_width, sup.center
    x = c + r * np.cos(theta)
    vals = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand produced non-finite values")
    denom = x * (1.0 - x)
    ratio = np.empty_like(x)
    interior = slice(1, -1)
    ratio[interior] = np.sin(theta[interior]) ** 2 / denom[interior]
    # sin^2/denominator limits at the endpoints; nonzero only if an edge
    # touches 0 or 1 (then sin^2 and x(1-x) vanish together)
    lam_p, lam_m = sup.lambda_plus, sup.lambda_minus
    ratio[0] = 2.0 / r if abs(1.0 - lam_p) < 1e-14 else 0.0
    ratio[-1] = 2.0 / r if abs(lam_m) < 1e-14 else 0.0
    total = float(np.sum(w * vals * ratio))
    return r * r * total / (2.0 * math.pi * asym.a)


def integrate_deviation(f: Callable, support: SupportInterval, nodes: int = DEFAULT_NODES) -> float:
    """f(l-)/4 + f(l+)/4 - (1/2pi) integral of f(c + r cos t) dt."""
    theta, w = _theta_grid(nodes)
    x = support.center + support.half_width * np.cos(theta)
    vals = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand produced non-finite values")
    edge = float(f(np.asarray(support.lambda_minus))) / 4.0 + float(
        f(np.asarray(support.lambda_plus))
    ) / 4.0
    return edge - float(np.sum(w * vals)) / (2.0 * math.pi)


def arcsine_integral(f: Callable, nodes: int = DEFAULT_NODES) -> float:
    """(1/pi) integral of f(x)/sqrt(x(1-x)) dx over [0, 1], in theta form."""
    theta, w = _theta_grid(nodes)
    x = 0.5 * (1.0 + np.cos(theta))
    vals = np.asarray(f(x), dtype=float)
    return float(np.sum(w * vals) / math.pi)


def edge_weight_integral(support: SupportInterval, nodes: int = DEFAULT_NODES) -> float:
    """Integral of sqrt(-(x - l-)(x - l+)) / (x(1-x)) over the support.

    Second-kind Gauss-Chebyshev rule in x space (open nodes), independent
    of the theta-trapezoid route used by integrate_density; the value
    should be 2 pi a.
    """
    j = np.arange(1, nodes + 1)
    t = j * math.pi / (nodes + 1)
    u = np.cos(t)
    w = math.pi / (nodes + 1) * np.sin(t) ** 2
    c, r = support.center, support.half_width
    x = c + r * u
    denom = x * (1.0 - x)
    if np.any(denom <= 0):
        raise QuadratureError("support node fell outside (0, 1)")
    return r * r * float(np.sum(w / denom))


def stieltjes_pair(x: float, asym: AsymptoticParams) -> tuple[float, float]:
    """Leading and 1/n Stieltjes-transform terms of the mean spectral measure.

    The square-root branch is fixed so the leading term behaves like 1/x at
    +infinity (sign(x - center) outside the support).
    """
    asym.require_bulk()
    sup = SupportInterval.from_shape(asym.a, asym.b)
    lam_m, lam_p = sup.lambda_minus, sup.lambda_plus
    if lam_m <= x <= lam_p:
        raise ParameterError(f"x={x} lies inside the support [{lam_m}, {lam_p}]")
    if x in (0.0, 1.0):
        raise ParameterError("poles at x = 0 and x = 1")
    a, b = asym.a, asym.b
    root = math.copysign(math.sqrt((x - lam_m) * (x - lam_p)), x - sup.center)
    m0 = ((a - b) + (1.0 - 2.0 * a) * x - root) / (2.0 * a * x * (1.0 - x))
    m1 = (-x + sup.center + root) / (2.0 * (x - lam_p) * (x - lam_m))
    return m0, m1


def jacobi_recurrence_01(nterms: int, r_param: float, s_param: float):
    """Symmetric three-term recurrence for the weight x^r (1-x)^s on [0, 1].

    Returns (diag, offsq): diag[k] are the recurrence centers and offsq[k]
    the squared off-diagonals (offsq[0] unused).
    """
    if r_param <= -1 or s_param <= -1:
        raise ParameterError("weight exponents must exceed -1")
    A, B = float(s_param), float(r_param)  # [-1,1] convention (1-u)^A (1+u)^B
    diag = np.empty(nterms)
    offsq = np.zeros(nterms)
    apb = A + B
    diag[0] = (B - A) / (apb + 2.0)
    for k in range(1, nterms):
        den = (2.0 * k + apb) * (2.0 * k + apb + 2.0)
        diag[k] = (B * B - A * A) / den
        if k == 1:
            offsq[k] = 4.0 * (A + 1.0) * (B + 1.0) / ((apb + 2.0) ** 2 * (apb + 3.0))
        else:
            t = 2.0 * k + apb
            offsq[k] = 4.0 * k * (k + A) * (k + B) * (k + apb) / (t * t * (t + 1.0) * (t - 1.0))
        if not np.isfinite(diag[k]) or not np.isfinite(offsq[k]):
            raise QuadratureError("recurrence coefficient overflow")
    # map u in [-1, 1] to x = (1 + u)/2
    return (1.0 + diag) / 2.0, offsq / 4.0


def jacobi_roots(n: int, r_param: float, s_param: float) -> np.ndarray:
    """Roots in (0, 1) of the degree-n polynomial orthogonal for x^r (1-x)^s.

    Computed as eigenvalues of the symmetric recurrence matrix.
    """
    if n < 1:
        raise ParameterError("need n >= 1")
    diag, offsq = jacobi_recurrence_01(n, r_param, s_param)
    A = SymTridiagonal(diag=diag, off=np.sqrt(offsq[1:n]))
    return eig.eigenvalues(A).values


def jacobi_probability_quadrature(nnodes: int, p_shape: float, q_shape: float):
    """Gauss nodes and weights for the Beta(p, q) probability measure.

    Weights come from the Christoffel sums of the recurrence orthonormal
    with respect to the probability measure, so they sum to one and no Beta
    normalization constant is ever formed.  Handles p or q below one (the
    endpoint-singular weights).
    """
    if p_shape <= 0 or q_shape <= 0:
        raise ParameterError("Beta shapes must be positive")
    diag, offsq = jacobi_recurrence_01(nnodes, p_shape - 1.0, q_shape - 1.0)
    off = np.sqrt(offsq[1:nnodes])
    nodes = eig.eigenvalues(SymTridiagonal(diag=diag, off=off)).values
    # orthonormal recurrence evaluated at the nodes
    qprev = np.ones_like(nodes)
    total = qprev.copy()
    if nnodes > 1:
        qcur = (nodes - diag[0]) / off[0]
        total += qcur * qcur
        for k in range(1, nnodes - 1):
            qnext = ((nodes - diag[k]) * qcur - off[k - 1] * qprev) / off[k]
            qprev, qcur = qcur, qnext
            total += qcur * qcur
    return nodes, 1.0 / total
