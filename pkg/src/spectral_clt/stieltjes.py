"""Marchenko-Pastur law and the companion Stieltjes transform.

The companion transform of the null model solves

    z = -1/m + y/(1+m),

and in the spiked case the population spectral distribution H_n adds one
term per spike. The forward maps are explicit; the inverse maps clear
denominators, take every polynomial root and keep the unique one lying in
the half-plane of z (or, for real z, the unique real root on an increasing
branch of z(m)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate

from .errors import DomainError, SolverFailure
from .functions import SpectralFunction
from .spike_model import SpikedModel

DEFAULT_RTOL = 1e-10


@dataclass(frozen=True)
class MPLaw:
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise DomainError(f"aspect ratio must be positive, got {self.y!r}")

    @property
    def support(self):
        return mp_support(self.y)

    @property
    def atom_at_zero(self) -> float:
        return max(0.0, 1.0 - 1.0 / self.y)

    def density(self, x):
        return mp_density(x, self.y)

    def integrate(self, f: SpectralFunction, rtol: float = DEFAULT_RTOL) -> float:
        return mp_integral(f, self.y, rtol=rtol)


def mp_support(y: float):
    if not y > 0:
        raise DomainError(f"aspect ratio must be positive, got {y!r}")
    r = math.sqrt(y)
    return (1.0 - r) ** 2, (1.0 + r) ** 2


def mp_density(x, y: float):
    """Density of the continuous part of the MP law (the y > 1 atom at 0 excluded)."""
    a, b = mp_support(y)
    x = np.asarray(x, dtype=float)
    inside = (x > a) & (x < b)
    xs = np.where(inside, x, 1.0)
    val = np.sqrt(np.clip((b - xs) * (xs - a), 0.0, None)) / (2 * np.pi * xs * y)
    out = np.where(inside, val, 0.0)
    return out if out.ndim else float(out)


def mp_integral(f: SpectralFunction, y: float, rtol: float = DEFAULT_RTOL) -> float:
    """Integral of f against the MP law G^y, including the atom (1-1/y) f(0) when y > 1.

    The substitution x = a + (b-a) sin^2(t) turns the square-root edges of the
    density into a smooth integrand on [0, pi/2].
    """
    a, b = mp_support(y)
    probe = np.linspace(a, b, 33)
    if y >= 1:
        probe = np.concatenate([[0.0], probe])
    try:
        f.require_domain(probe, "support point")
    except DomainError as exc:
        raise DomainError(f"G^y(f) undefined for y={y:g}: {exc}") from None

    w = b - a

    def integrand(t):
        s2 = math.sin(t) ** 2
        x = a + w * s2
        return float(np.real(f.eval(x))) * w * w * s2 * math.cos(t) ** 2 / (math.pi * x * y)

    val, err = integrate.quad(integrand, 0.0, math.pi / 2, epsabs=rtol * 1e-3, epsrel=rtol * 1e-2, limit=400)
    if y > 1:
        val += (1.0 - 1.0 / y) * float(np.real(f.eval(0.0)))
    return val


def z_of_m(m, y: float):
    """Inverse of the null companion transform: -1/m + y/(1+m)."""
    m = np.asarray(m, dtype=complex)
    if np.any(m == 0) or np.any(m == -1):
        raise DomainError("z(m) has poles at m = 0 and m = -1")
    out = -1.0 / m + y / (1.0 + m)
    return out if out.ndim else complex(out)


def _spike_arrays(model: SpikedModel):
    a = np.array([s[0] for s in model.spikes], dtype=float)
    w = np.array([s[1] for s in model.spikes], dtype=float)
    return a, w


def z_of_m_spiked(m, model: SpikedModel):
    m = np.asarray(m, dtype=complex)
    a, w = _spike_arrays(model)
    poles = np.concatenate([[0.0, -1.0], -1.0 / a])
    if np.any(np.isin(m, poles)):
        raise DomainError("z(m) has poles at m = 0, -1 and -1/a_i")
    y, p = model.y, model.p
    out = -1.0 / m + (p - model.M) / p * y / (1.0 + m)
    for ai, ni in zip(a, w):
        out = out + y / p * ai * ni / (1.0 + ai * m)
    return out if out.ndim else complex(out)


def dz_dm_spiked(m, model: SpikedModel):
    m = np.asarray(m, dtype=complex)
    a, w = _spike_arrays(model)
    y, p = model.y, model.p
    out = 1.0 / m**2 - (p - model.M) / p * y / (1.0 + m) ** 2
    for ai, ni in zip(a, w):
        out = out - y / p * ai * ai * ni / (1.0 + ai * m) ** 2
    return out if out.ndim else complex(out)


def _polish(m, z, zfun, dzfun, iters=8):
    for _ in range(iters):
        d = dzfun(m)
        if d == 0 or not np.isfinite(d):
            break
        step = (zfun(m) - z) / d
        if not np.isfinite(step):
            break
        m = m - step
        if abs(step) <= 1e-16 * max(1.0, abs(m)):
            break
    return m


def _select(roots, z, zfun, dzfun, tol):
    """Pick the Stieltjes branch among candidate roots of z(m) = z."""
    scale = max(1.0, abs(z))
    cands = []
    for r in roots:
        if not np.isfinite(r):
            continue
        try:
            r = _polish(complex(r), z, zfun, dzfun)
            res = abs(zfun(r) - z)
        except (ZeroDivisionError, DomainError):
            continue
        if res <= tol * scale:
            cands.append(r)
    diag = {"z": z, "candidates": cands}

    def nearly_real(c):
        return abs(c.imag) <= 1e-8 * max(1.0, abs(c))

    def increasing(c):
        return dzfun(complex(c.real)).real > 0

    if z.imag != 0:
        good = [c for c in cands if c.imag * z.imag > 0]
        if len(good) == 1:
            return good[0]
        # z hugging the real axis outside the support: every root is nearly
        # real and Im m ~ Im z / z'(m), so the increasing branch is the one
        good = [c for c in cands if nearly_real(c) and increasing(c)]
        if len(good) == 1:
            return good[0]
        raise SolverFailure(f"{len(good)} admissible roots for z={z}", diag)

    good = [c for c in cands if nearly_real(c) and increasing(c)]
    if len(good) == 1:
        return complex(good[0].real, 0.0)
    if not good:
        raise DomainError(f"real z={z.real:g} lies inside the spectral support")
    raise SolverFailure(f"{len(good)} increasing real branches for z={z.real:g}", diag)


def solve_companion(z, y: float, tol: float = 1e-12) -> complex:
    """Companion Stieltjes transform of the MP law with ratio y at z.

    For real z outside the support the boundary value from the upper
    half-plane is returned (a real number).
    """
    z = complex(z)
    if not y > 0:
        raise DomainError("y must be positive")
    a, b = mp_support(y)
    if z.imag == 0:
        x = z.real
        if a < x < b:
            raise DomainError(f"z={x:g} lies inside the MP support [{a:g}, {b:g}]")
        if x == 0:
            if y > 1:
                return complex(1.0 / (y - 1.0))
            raise DomainError("the companion transform has a pole at z = 0 for y <= 1")
    # z m^2 + (z + 1 - y) m + 1 = 0, discriminant (z - a)(z - b)
    B = z + 1.0 - y
    if z.imag == 0:
        disc = (z.real - a) * (z.real - b)
        if abs(disc) <= 1e-14 * max(1.0, z.real * z.real):
            # band edge: double root
            return complex(-B.real / (2.0 * z.real))
    s = np.sqrt(complex(B * B - 4.0 * z))
    if (B.conjugate() * s).real < 0:
        s = -s
    q = -(B + s) / 2.0
    roots = [q / z, 1.0 / q]
    return _select(roots, z, lambda m: z_of_m(m, y), lambda m: 1 / m**2 - y / (1 + m) ** 2, tol)


def _spiked_polynomial(z, model: SpikedModel):
    """Coefficients (ascending) of m(1+m)prod(1+a_i m) * (z - z(m))."""
    a, w = _spike_arrays(model)
    y, p = model.y, model.p
    prod_all = np.array([1.0])
    for ai in a:
        prod_all = P.polymul(prod_all, [1.0, ai])
    one_plus_m = np.array([1.0, 1.0])
    m_poly = np.array([0.0, 1.0])

    denom = P.polymul(P.polymul(m_poly, one_plus_m), prod_all)
    rhs = -P.polymul(one_plus_m, prod_all)
    rhs = P.polyadd(rhs, (p - model.M) / p * y * P.polymul(m_poly, prod_all))
    for i, (ai, ni) in enumerate(zip(a, w)):
        others = np.array([1.0])
        for j, aj in enumerate(a):
            if j != i:
                others = P.polymul(others, [1.0, aj])
        term = P.polymul(P.polymul(m_poly, one_plus_m), others)
        rhs = P.polyadd(rhs, y / p * ai * ni * term)
    return P.polysub(z * denom.astype(complex), rhs)


def solve_companion_spiked(z, model: SpikedModel, tol: float = 1e-12) -> complex:
    """Companion Stieltjes transform of F^{y_n, H_n} at z."""
    if model.is_null:
        return solve_companion(z, model.y, tol)
    z = complex(z)
    coeffs = _spiked_polynomial(z, model)
    roots = P.polyroots(coeffs)
    try:
        return _select(
            roots,
            z,
            lambda m: z_of_m_spiked(m, model),
            lambda m: dz_dm_spiked(m, model),
            tol,
        )
    except SolverFailure as exc:
        exc.diagnostics["model"] = str(model)
        raise
