"""Spiked population model: a p x p covariance equal to the identity except
for a fixed number of eigenvalues (spikes) with given multiplicities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Tuple

from .errors import DuplicateSpike, InvalidSpike, NotASpike, TooManySpikes

Spike = Tuple[float, int]


@dataclass(frozen=True)
class SpikedModel:
    """Population eigenvalues ``a_1 (x n_1), ..., a_k (x n_k), 1 (x p-M)``.

    Build instances with :func:`new_model`, which validates and sorts the
    spikes; the constructor itself trusts its arguments.
    """

    p: int
    n: int
    spikes: Tuple[Spike, ...] = ()

    @property
    def y(self) -> float:
        """Aspect ratio p/n."""
        return self.p / self.n

    @property
    def M(self) -> int:
        return sum(mult for _, mult in self.spikes)

    @property
    def k(self) -> int:
        return len(self.spikes)

    @property
    def is_null(self) -> bool:
        return not self.spikes

    def with_dims(self, p: int, n: int) -> "SpikedModel":
        return new_model(p, n, self.spikes)

    def __str__(self) -> str:
        spec = ",".join(f"{a:g}:{m}" for a, m in self.spikes) or "none"
        return f"SpikedModel(p={self.p}, n={self.n}, spikes={spec})"


@dataclass(frozen=True)
class SpikeClass:
    distant: Tuple[Spike, ...]
    close: Tuple[Spike, ...]

    @property
    def k1(self) -> int:
        return len(self.distant)


def new_model(p: int, n: int, spikes: Iterable[Tuple[float, int]] = ()) -> SpikedModel:
    """Validate inputs and return a model with spikes sorted in decreasing order."""
    if int(p) != p or p < 1:
        raise ValueError(f"p must be a positive integer, got {p!r}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    p, n = int(p), int(n)

    cleaned: List[Spike] = []
    for a, mult in spikes:
        a = float(a)
        if not math.isfinite(a) or a <= 0:
            raise InvalidSpike(f"spike value must be positive and finite, got {a!r}")
        if a == 1.0:
            raise NotASpike("a = 1 is the base eigenvalue, not a spike")
        if int(mult) != mult or mult < 1:
            raise InvalidSpike(f"multiplicity must be a positive integer, got {mult!r}")
        cleaned.append((a, int(mult)))

    values = [a for a, _ in cleaned]
    if len(set(values)) != len(values):
        raise DuplicateSpike("spike values must be distinct; use the multiplicity instead")
    M = sum(m for _, m in cleaned)
    if M >= p:
        raise TooManySpikes(f"total multiplicity M={M} must be smaller than p={p}")

    cleaned.sort(key=lambda s: s[0], reverse=True)
    return SpikedModel(p=p, n=n, spikes=tuple(cleaned))


def is_distant(a: float, y: float) -> bool:
    root = math.sqrt(y)
    if y < 1:
        return abs(a - 1.0) > root
    return a - 1.0 > root


def classify_spikes(model: SpikedModel) -> SpikeClass:
    # classification goes by the inequality, not by position in the sorted list:
    # for y < 1 a distant spike can sit below 1 - sqrt(y)
    y = model.y
    distant = tuple(s for s in model.spikes if is_distant(s[0], y))
    close = tuple(s for s in model.spikes if not is_distant(s[0], y))
    return SpikeClass(distant=distant, close=close)


def phi(a: float, y: float) -> float:
    """Almost-sure limit a + y*a/(a-1) of the sample eigenvalue of a distant spike."""
    if a == 1.0:
        raise NotASpike("phi has a pole at a = 1")
    if a <= 0 or y <= 0:
        raise ValueError("phi needs a > 0 and y > 0")
    return a + y * a / (a - 1.0)


def population_esd(model: SpikedModel) -> List[Tuple[float, float]]:
    """Atoms and masses of the population spectral distribution H_n."""
    p = model.p
    # exact rational masses, converted at the end so the total is exactly 1
    masses = [(1.0, Fraction(p - model.M, p))]
    masses += [(a, Fraction(mult, p)) for a, mult in model.spikes]
    return [(atom, float(w)) for atom, w in masses if w > 0]


def population_esd_exact(model: SpikedModel) -> List[Tuple[float, Fraction]]:
    p = model.p
    out = [(1.0, Fraction(p - model.M, p))]
    out += [(a, Fraction(mult, p)) for a, mult in model.spikes]
    return out


def parse_spikes(text: str) -> List[Spike]:
    """Parse ``value:multiplicity[,value:multiplicity...]``; a bare value means multiplicity 1."""
    out: List[Spike] = []
    text = text.strip()
    if not text or text.lower() == "none":
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            val, mult = item.split(":", 1)
        else:
            val, mult = item, "1"
        try:
            a = float(val)
            m = int(mult)
        except ValueError:
            raise ValueError(f"cannot parse spike {item!r}; expected value:multiplicity") from None
        out.append((a, m))
    return out
