import numpy as np
import pytest

from spectral_clt import functions as F
from spectral_clt.errors import DomainError


@pytest.mark.parametrize("name", ["x", "x2", "log", "lrt_g", "poly:1,-2,0.5,0.25"])
def test_derivatives(name):
    f = F.from_name(name)
    pts = np.array([0.5 + 0.3j, 1.0, 2.0 - 1.0j, 3.5 + 0.1j])
    assert F.check_derivative(f, pts) < 1e-6


def test_values():
    assert F.lrt_g()(1.0) == 0
    assert F.square()(3.0) == 9
    assert F.polynomial([1, 0, 2])(2.0) == 9
    assert F.constant(4)(7.0) == 4


def test_log_domain():
    with pytest.raises(DomainError):
        F.log().require_domain([1.0, -0.5])
    F.log().require_domain([0.1 + 5j])


def test_linear_combination():
    h = 2 * F.square() - F.identity()
    assert h(3.0) == pytest.approx(15.0)
    assert h.deriv(3.0) == pytest.approx(11.0)
    assert (F.identity() - F.log()).domain == F.log().domain


def test_unknown_name():
    with pytest.raises(ValueError):
        F.from_name("sin")
