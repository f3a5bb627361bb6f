"""Analytic test functions f (with derivative) fed to the centering machinery."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

ArrayFn = Callable[[np.ndarray], np.ndarray]


def _everywhere(z):
    return np.ones(np.shape(z), dtype=bool)


def _right_half_plane(z):
    return np.real(z) > 0


@dataclass(frozen=True)
class SpectralFunction:
    """An analytic f together with f' and a predicate for its analyticity region.

    ``domain_check`` takes an array of complex points and returns a boolean
    array; it must be False wherever f is not analytic (for ``log`` that is
    the closed left half-plane, so the principal branch is safe).
    """

    name: str
    eval: ArrayFn
    deriv: ArrayFn
    domain_check: Callable[[np.ndarray], np.ndarray] = _everywhere
    domain: str = "entire"

    def __call__(self, z):
        return self.eval(z)

    def require_domain(self, z, what="point") -> None:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        ok = np.asarray(self.domain_check(z))
        if not np.all(ok):
            bad = z[~ok][0]
            raise DomainError(
                f"{self.name} is not analytic at {what} {bad:.6g} (domain: {self.domain})"
            )

    def __add__(self, other: "SpectralFunction") -> "SpectralFunction":
        if not isinstance(other, SpectralFunction):
            return NotImplemented
        return _combine(1.0, self, 1.0, other)

    def __sub__(self, other: "SpectralFunction") -> "SpectralFunction":
        if not isinstance(other, SpectralFunction):
            return NotImplemented
        return _combine(1.0, self, -1.0, other)

    def __rmul__(self, scalar: float) -> "SpectralFunction":
        s = float(scalar)
        return SpectralFunction(
            name=f"{s:g}*({self.name})",
            eval=lambda z: s * self.eval(z),
            deriv=lambda z: s * self.deriv(z),
            domain_check=self.domain_check,
            domain=self.domain,
        )

    __mul__ = __rmul__


def _combine(alpha, f, beta, g):
    if f.domain == "entire":
        check, domain = g.domain_check, g.domain
    elif g.domain == "entire" or g.domain == f.domain:
        check, domain = f.domain_check, f.domain
    else:
        check = lambda z: np.logical_and(f.domain_check(z), g.domain_check(z))  # noqa: E731
        domain = f"{f.domain} and {g.domain}"
    return SpectralFunction(
        name=f"{alpha:g}*({f.name}) + {beta:g}*({g.name})",
        eval=lambda z: alpha * f.eval(z) + beta * g.eval(z),
        deriv=lambda z: alpha * f.deriv(z) + beta * g.deriv(z),
        domain_check=check,
        domain=domain,
    )


def identity() -> SpectralFunction:
    return SpectralFunction("x", lambda z: z * 1.0, lambda z: np.ones_like(z))


def square() -> SpectralFunction:
    return SpectralFunction("x2", lambda z: z * z, lambda z: 2.0 * z)


def log() -> SpectralFunction:
    return SpectralFunction(
        "log", np.log, lambda z: 1.0 / z, _right_half_plane, "right half-plane"
    )


def lrt_g() -> SpectralFunction:
    """g(x) = x - log x - 1, the function behind the likelihood-ratio statistic."""
    return SpectralFunction(
        "lrt_g",
        lambda z: z - np.log(z) - 1.0,
        lambda z: 1.0 - 1.0 / z,
        _right_half_plane,
        "right half-plane",
    )


def constant(c: float = 1.0) -> SpectralFunction:
    return SpectralFunction(
        f"const:{c:g}",
        lambda z: np.full(np.shape(z), c, dtype=np.result_type(z, float)),
        lambda z: np.zeros(np.shape(z), dtype=np.result_type(z, float)),
    )


def polynomial(coeffs: Sequence[float]) -> SpectralFunction:
    """Polynomial with coefficients in ascending powers: c0 + c1 x + c2 x^2 + ..."""
    coeffs = [float(c) for c in coeffs]
    if not coeffs:
        raise ValueError("polynomial needs at least one coefficient")
    desc = coeffs[::-1]
    ddesc = np.polyder(np.array(desc)) if len(desc) > 1 else np.array([0.0])
    label = ",".join(f"{c:g}" for c in coeffs)
    return SpectralFunction(
        f"poly:{label}",
        lambda z: np.polyval(desc, z),
        lambda z: np.polyval(ddesc, z),
    )


NAMED = {
    "x": identity,
    "x2": square,
    "log": log,
    "lrt_g": lrt_g,
}


def from_name(name: str) -> SpectralFunction:
    """Resolve ``x``, ``x2``, ``log``, ``lrt_g`` or ``poly:c0,c1,...``."""
    name = name.strip()
    if name in NAMED:
        return NAMED[name]()
    if name.startswith("poly:"):
        try:
            coeffs = [float(c) for c in name[5:].split(",") if c.strip()]
        except ValueError:
            raise ValueError(f"bad polynomial coefficients in {name!r}") from None
        return polynomial(coeffs)
    raise ValueError(
        f"unknown function {name!r}; choose from x, x2, log, lrt_g, poly:<c0,c1,...>"
    )


def check_derivative(f: SpectralFunction, points, h: float = 1e-5) -> float:
    """Largest relative gap between ``f.deriv`` and a complex central difference."""
    z = np.asarray(points, dtype=complex)
    fd = (f.eval(z + h) - f.eval(z - h)) / (2 * h)
    exact = f.deriv(z)
    scale = np.maximum(np.abs(exact), 1.0)
    return float(np.max(np.abs(fd - exact) / scale))
