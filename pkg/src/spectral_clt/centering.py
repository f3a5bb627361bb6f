"""Finite-horizon centering F^{y_n,H_n}(f) for spiked sample covariance matrices.

The centering splits into two contour integrals in the companion-transform
plane plus a Marchenko-Pastur integral and point masses at phi(a_i) for the
distant spikes:

    F(f) = T1 + T2 + (1 - M/p) G^{y_n}(f) + (1/p) sum_{distant} n_i f(phi(a_i))

    T1 = -1/(2 pi i p) oint f(z(m)) [M/(y m) - sum n_i a_i^2 m/(1+a_i m)^2] dm
    T2 = +1/(2 pi i p) oint f'(z(m)) sum (1-a_i) n_i/((1+a_i m)(1+m))
                              * [1/m - y m/(1+m)^2] dm

with z(m) = -1/m + y/(1+m). The contour encloses m = -1 and the poles
-1/a_i of the close spikes, and keeps m = 0 and the distant-spike poles
outside. Integrals are taken with the periodic trapezoidal rule on an
ellipse, which converges geometrically for these integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import ContourError, DomainError, QuadratureError
from .functions import SpectralFunction
from .spike_model import SpikedModel, classify_spikes, phi
from .stieltjes import mp_integral

COUNTERCLOCKWISE = "counterclockwise"
CLOCKWISE = "clockwise"

DEFAULT_MARGIN = 0.5
QUAD_RTOL = 1e-10
N_START = 64
N_MAX = 2**16


@dataclass(frozen=True)
class Contour:
    """Axis-aligned ellipse ``center + h cos t + i v sin t`` in the m-plane."""

    center: float
    semi_axes: Tuple[float, float]
    orientation: str = COUNTERCLOCKWISE
    nodes: int = N_START
    interval: Tuple[float, float] = (math.nan, math.nan)
    excluded: Tuple[float, ...] = ()

    @property
    def kind(self) -> str:
        return "ellipse"

    @property
    def real_span(self) -> Tuple[float, float]:
        h = self.semi_axes[0]
        return self.center - h, self.center + h

    def points(self, n: int):
        """Nodes m_j and derivatives dm/dt at t_j = 2 pi j / n."""
        t = 2.0 * np.pi * np.arange(n) / n
        h, v = self.semi_axes
        m = self.center + h * np.cos(t) + 1j * v * np.sin(t)
        dm = -h * np.sin(t) + 1j * v * np.cos(t)
        return m, dm

    def encloses(self, x: float) -> bool:
        lo, hi = self.real_span
        return lo < x < hi


def enclosed_interval(model: SpikedModel) -> Tuple[float, float]:
    """Real interval the contour must enclose: the bulk preimage plus close-spike poles."""
    y = model.y
    r = math.sqrt(y)
    if y < 1:
        lo, hi = -1.0 / (1.0 - r), -1.0 / (1.0 + r)
    else:
        lo, hi = -1.0, -1.0 / (1.0 + r)
    # for y >= 1 a close spike below 1 puts its pole left of -1
    for a, _ in classify_spikes(model).close:
        lo = min(lo, -1.0 / a)
        hi = max(hi, -1.0 / a)
    return lo, hi


def _ellipse(lo: float, hi: float, excluded, margin: float) -> Contour:
    if not margin > 0:
        raise ContourError("margin must be positive")
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    h = half * (1.0 + margin)
    for q in excluded:
        if lo <= q <= hi:
            raise ContourError(f"excluded pole {q:g} lies inside the interval [{lo:g}, {hi:g}]")
        h = min(h, 0.5 * (abs(q - center) + half))
    if not h > half:
        raise ContourError("no room between the enclosed interval and an excluded pole")
    return Contour(
        center=center,
        semi_axes=(h, 0.5 * h),
        orientation=COUNTERCLOCKWISE,
        nodes=N_START,
        interval=(lo, hi),
        excluded=tuple(excluded),
    )


def build_contour(model: SpikedModel, margin: float = DEFAULT_MARGIN) -> Contour:
    """Ellipse around :func:`enclosed_interval` that avoids 0 and the distant-spike poles.

    The horizontal semi-axis is ``half_length * (1 + margin)``, cut back so
    that the real-axis vertex sits no further than halfway between the
    interval end and the nearest excluded pole.
    """
    lo, hi = enclosed_interval(model)
    excluded = [0.0] + [-1.0 / a for a, _ in classify_spikes(model).distant]
    return _ellipse(lo, hi, excluded, margin)


def null_contour(y: float, margin: float = DEFAULT_MARGIN) -> Contour:
    r = math.sqrt(y)
    lo = -1.0 / (1.0 - r) if y < 1 else -1.0
    return _ellipse(lo, -1.0 / (1.0 + r), [0.0], margin)


def contour_integral(
    func: Callable[[np.ndarray], np.ndarray],
    contour: Contour,
    rtol: float = QUAD_RTOL,
    n_start: int = N_START,
    n_max: int = N_MAX,
):
    """(1/(2 pi i)) oint func(m) dm over ``contour`` by the periodic trapezoidal rule.

    ``func`` maps an array of nodes to an array whose last axis runs over the
    nodes (several integrands can be stacked on the leading axes). The node
    count doubles, reusing earlier nodes, until successive estimates agree
    to ``rtol`` relative to the integrand's absolute mass.

    Returns ``(value, nodes_used, last_change)``.
    """
    sign = 1.0 if contour.orientation == COUNTERCLOCKWISE else -1.0
    n = n_start
    change = np.inf
    m, dm = contour.points(n)
    vals = func(m) * dm
    total = vals.sum(axis=-1)
    mass = np.abs(vals).sum(axis=-1)
    est = total / n
    while True:
        if 2 * n > n_max:
            raise QuadratureError(
                f"trapezoidal rule did not converge with {n} nodes (last change {np.max(change):.3g})"
            )
        # new nodes are the midpoints of the current ones
        t = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        h, v = contour.semi_axes
        m_new = contour.center + h * np.cos(t) + 1j * v * np.sin(t)
        dm_new = -h * np.sin(t) + 1j * v * np.cos(t)
        vals = func(m_new) * dm_new
        total = total + vals.sum(axis=-1)
        mass = mass + np.abs(vals).sum(axis=-1)
        n *= 2
        new_est = total / n
        change = np.abs(new_est - est)
        scale = np.maximum(np.abs(new_est), mass / n)
        est = new_est
        if np.all(change <= rtol * scale):
            break
    # (1/(2 pi i)) * (2 pi / n) * sum = sum / (i n)
    value = sign * est / 1j
    return value, n, float(np.max(change))


def _check_image(f: SpectralFunction, y: float, contour: Contour, n: int = 1024):
    m, _ = contour.points(n)
    f.require_domain(-1.0 / m + y / (1.0 + m), "contour image point")


def _integrands(f: SpectralFunction, model: SpikedModel):
    y, M = model.y, model.M
    spikes = model.spikes

    def func(m):
        z = -1.0 / m + y / (1.0 + m)
        w1 = M / (y * m) + 0j
        w2 = np.zeros_like(m)
        for a, n_i in spikes:
            w1 = w1 - n_i * a * a * m / (1.0 + a * m) ** 2
            w2 = w2 + (1.0 - a) * n_i / ((1.0 + a * m) * (1.0 + m))
        w2 = w2 * (1.0 / m - y * m / (1.0 + m) ** 2)
        return np.stack([f.eval(z) * w1, f.deriv(z) * w2])

    return func


@dataclass(frozen=True)
class ContourTerms:
    term1: float
    term2: float
    nodes: int
    est_error: float


def contour_terms_detail(
    f: SpectralFunction, model: SpikedModel, contour: Contour, rtol: float = QUAD_RTOL
) -> ContourTerms:
    if model.is_null:
        return ContourTerms(0.0, 0.0, 0, 0.0)
    _check_image(f, model.y, contour)
    value, nodes, change = contour_integral(_integrands(f, model), contour, rtol=rtol)
    p = model.p
    t1 = -value[0] / p
    t2 = value[1] / p
    est = max(abs(t1.imag), abs(t2.imag), change / p)
    return ContourTerms(float(t1.real), float(t2.real), nodes, float(est))


def contour_terms(f: SpectralFunction, model: SpikedModel, contour: Contour) -> Tuple[float, float]:
    """The two contour corrections (T1, T2) of the centering."""
    ct = contour_terms_detail(f, model, contour)
    return ct.term1, ct.term2


@dataclass(frozen=True)
class CenteringResult:
    term1: float
    term2: float
    base: float
    spike_sum: float
    total: float
    quadrature_nodes_used: int
    est_error: float
    margin: float = DEFAULT_MARGIN

    def to_dict(self):
        return {
            "term1": self.term1,
            "term2": self.term2,
            "base": self.base,
            "spike_sum": self.spike_sum,
            "total": self.total,
            "quadrature_nodes_used": self.quadrature_nodes_used,
            "est_error": self.est_error,
        }


def fit_contour(f: SpectralFunction, model: SpikedModel, margin: float = DEFAULT_MARGIN, max_halvings: int = 12):
    """Build the contour, halving the margin until f is analytic on its z-image."""
    for _ in range(max_halvings + 1):
        contour = build_contour(model, margin)
        try:
            _check_image(f, model.y, contour)
            return contour, margin
        except DomainError:
            margin *= 0.5
    raise ContourError(f"no contour margin keeps {f.name} analytic on the image of the contour")


def centering_value(f: SpectralFunction, model: SpikedModel, margin: float = DEFAULT_MARGIN) -> CenteringResult:
    """F^{y_n,H_n}(f) up to O(1/n^2), with its four-part decomposition."""
    y, p = model.y, model.p
    classes = classify_spikes(model)
    phis = [phi(a, y) for a, _ in classes.distant]
    if phis:
        f.require_domain(np.array(phis), "distant-spike limit")

    base = (1.0 - model.M / p) * mp_integral(f, y)
    spike_sum = sum(n_i * float(np.real(f.eval(x))) for (_, n_i), x in zip(classes.distant, phis)) / p

    if model.is_null:
        t1 = t2 = 0.0
        nodes, est = 0, 0.0
    else:
        contour, margin = fit_contour(f, model, margin)
        ct = contour_terms_detail(f, model, contour)
        t1, t2, nodes, est = ct.term1, ct.term2, ct.nodes, ct.est_error

    total = ((t1 + t2) + base) + spike_sum
    return CenteringResult(t1, t2, base, spike_sum, total, nodes, est, margin)


def mp_integral_contour(f: SpectralFunction, y: float, margin: float = DEFAULT_MARGIN) -> float:
    """G^y(f) from the m-plane contour representation.

    G^y(f) = -(1/y) (1/(2 pi i)) oint f(z(m)) (1/m - y m/(1+m)^2) dm around
    the same interval as the spiked centering. For y > 1 this form already
    accounts for the atom at zero.
    """
    contour = null_contour(y, margin)
    _check_image(f, y, contour)

    def func(m):
        z = -1.0 / m + y / (1.0 + m)
        return f.eval(z) * (1.0 / m - y * m / (1.0 + m) ** 2)

    value, _, _ = contour_integral(func, contour)
    return float((-value / y).real)


def closed_form_mean(model: SpikedModel) -> float:
    """F^{y_n,H_n}(x) = 1 + (1/p) sum n_i a_i - M/p."""
    return 1.0 + sum(n_i * a for a, n_i in model.spikes) / model.p - model.M / model.p


def closed_form_log(model: SpikedModel) -> float:
    """F^{y_n,H_n}(log x) = (1/p) sum n_i log a_i - 1 + (1 - 1/y) log(1 - y), for y < 1."""
    y = model.y
    if not 0 < y < 1:
        raise DomainError(f"closed form for log x needs 0 < y < 1, got y={y:g}")
    return sum(n_i * math.log(a) for a, n_i in model.spikes) / model.p - 1.0 + (1.0 - 1.0 / y) * math.log1p(-y)


def closed_form_lrt_g(model: SpikedModel) -> float:
    """Centering of g(x) = x - log x - 1 under the spiked model."""
    return closed_form_mean(model) - closed_form_log(model) - 1.0
