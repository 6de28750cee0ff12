"""J-function accuracy against direct numerical integration."""

import numpy as np
import pytest
from scipy.integrate import quad

from scpbicm.errors import DomainError
from scpbicm.jfun import SIGMA_CAP, JTable, default_table, j_fun, j_inv


def j_quadrature(sigma: float) -> float:
    """Independent oracle: adaptive quadrature of the defining integral."""
    if sigma == 0:
        return 0.0

    def integrand(mu):
        gauss = np.exp(-((mu - sigma**2 / 2) ** 2) / (2 * sigma**2))
        gauss /= np.sqrt(2 * np.pi * sigma**2)
        return gauss * np.logaddexp(0.0, -mu) / np.log(2.0)

    val, _ = quad(integrand, -np.inf, np.inf, limit=200)
    return 1.0 - val


def test_limits():
    assert j_fun(0.0) == 0.0
    assert j_fun(10.0) > 0.999
    assert j_fun(100.0) == 1.0


def test_monotone_increasing():
    grid = np.linspace(0.0, 12.0, 400)
    vals = j_fun(grid)
    assert np.all(np.diff(vals) >= 0)
    assert np.all((vals >= 0) & (vals <= 1))


@pytest.mark.parametrize("sigma", [0.1, 0.5, 1.0, 1.6363, 2.5, 4.0, 6.0, 8.0])
def test_matches_quadrature(sigma):
    assert abs(j_fun(sigma) - j_quadrature(sigma)) < 1e-4


def test_quadrature_match_is_tight_at_knee():
    # the knee of the curve is the hardest region for approximations
    assert abs(j_fun(1.6363) - j_quadrature(1.6363)) < 1e-8


@pytest.mark.parametrize("sigma", [0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0])
def test_round_trip(sigma):
    assert abs(j_inv(j_fun(sigma)) - sigma) < 1e-3


def test_inverse_domain():
    with pytest.raises(DomainError):
        j_inv(1.0)
    with pytest.raises(DomainError):
        j_inv(-0.1)
    with pytest.raises(DomainError):
        j_fun(-1.0)
    assert j_inv(0.0) == 0.0


def test_inverse_saturates():
    assert j_inv(1.0 - 1e-15) <= SIGMA_CAP


def test_table_accuracy():
    table = JTable()
    sig = np.linspace(0.0, 10.0, 1717)
    assert np.max(np.abs(table.forward(sig) - j_fun(sig))) < 1e-4
    mi = j_fun(np.linspace(0.05, 7.5, 311))
    assert np.max(np.abs(j_fun(table.inverse(mi)) - mi)) < 1e-4


def test_default_table_cached():
    assert default_table() is default_table()


def test_vectorized_shapes():
    s = np.array([[0.5, 1.0], [2.0, 3.0]])
    out = j_fun(s)
    assert out.shape == s.shape
    back = j_inv(out)
    assert np.allclose(back, s, atol=1e-6)
