import math

import numpy as np
import pytest
from scipy import integrate

from spectral_clt.errors import DomainError
from spectral_clt.functions import identity, log, square
from spectral_clt.spike_model import new_model
from spectral_clt.stieltjes import (
    MPLaw,
    mp_density,
    mp_integral,
    mp_support,
    solve_companion,
    solve_companion_spiked,
    z_of_m,
    z_of_m_spiked,
)


def test_support():
    assert mp_support(0.25) == (0.25, 2.25)
    assert mp_support(1) == (0.0, 4.0)
    with pytest.raises(DomainError):
        mp_support(0)


@pytest.mark.parametrize("y", [0.1, 0.5, 1.0, 2.0])
def test_density_mass(y):
    a, b = mp_support(y)
    mass, _ = integrate.quad(lambda x: mp_density(x, y), a, b, limit=200)
    assert abs(mass - min(1.0, 1.0 / y)) < 1e-8


def test_density_edges():
    a, b = mp_support(0.5)
    assert mp_density(a, 0.5) == 0
    assert mp_density(b + 1, 0.5) == 0
    assert MPLaw(2.0).atom_at_zero == 0.5


def test_z_of_m_values():
    assert z_of_m(-0.5, 1) == pytest.approx(4)
    assert abs(z_of_m(-1e6, 0.5)) < 2e-6
    assert z_of_m(-2 / 3, 0.25) == pytest.approx(2.25, abs=1e-12)
    m = new_model(200, 400, [(3, 1)])
    assert z_of_m_spiked(-0.5, m) == pytest.approx(2.98, abs=1e-12)
    w = 0.3 + 0.7j
    assert z_of_m_spiked(np.conj(w), m) == pytest.approx(np.conj(z_of_m_spiked(w, m)))


def test_edge_mapping():
    for y in (0.1, 0.5, 0.9):
        r = math.sqrt(y)
        assert abs(z_of_m(-1 / (1 + r), y) - (1 + r) ** 2) < 1e-12
        assert abs(z_of_m(-1 / (1 - r), y) - (1 - r) ** 2) < 1e-12


def test_solve_companion_values():
    assert solve_companion(4, 1) == pytest.approx(-0.5)
    z = 1e6 + 1j
    assert abs(solve_companion(z, 0.5) + 1 / z) < 1e-9
    assert solve_companion(1 + 1e-8j, 0.5).imag > 0
    assert solve_companion(0, 2) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        solve_companion(1.0, 0.5)


def test_spiked_solver():
    m = new_model(200, 400, [(3, 1)])
    root = solve_companion_spiked(10, m)
    assert root.imag == 0 and -1 / 3 < root.real < 0
    null = new_model(200, 400, [])
    z = 0.7 + 0.2j
    assert solve_companion_spiked(z, null) == solve_companion(z, 0.5)


def test_mp_integral_values():
    assert mp_integral(identity(), 0.5) == pytest.approx(1, abs=1e-12)
    assert mp_integral(identity(), 2.0) == pytest.approx(1, abs=1e-12)
    assert mp_integral(square(), 0.5) == pytest.approx(1.5, abs=1e-10)
    assert mp_integral(log(), 0.5) == pytest.approx(-0.306853, abs=1e-6)
    with pytest.raises(DomainError):
        mp_integral(log(), 1.5)
