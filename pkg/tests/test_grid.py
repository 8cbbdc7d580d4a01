import numpy as np
import pytest

from pide_schauder import ContractError, Grid, GridFunction, second_difference
from pide_schauder.grid import CallableExterior, ConstantExterior, PeriodicExterior, make_exterior


def test_grid_nodes():
    g = Grid(1.0, 0.25)
    assert g.n == 9 and g.size == 9
    np.testing.assert_allclose(g.axis, np.linspace(-1, 1, 9))
    g2 = Grid(1.0, 0.5, 2)
    assert g2.nodes.shape == (25, 2)
    assert g2.index_of(np.array([[0.5, -1.0]]))[0] == 3 * 5 + 0
    assert g2.index_of(np.array([[0.25, 0.0]]))[0] == -1


def test_grid_requires_integer_cells():
    with pytest.raises(ContractError):
        Grid(1.0, 0.3)


def test_make_exterior():
    assert make_exterior(0.0).kind == "zero"
    assert isinstance(make_exterior(2.0), ConstantExterior)
    assert isinstance(make_exterior(("periodic", 3.0)), PeriodicExterior)
    assert isinstance(make_exterior(np.sin), CallableExterior)
    with pytest.raises(ContractError):
        make_exterior("nope")


def test_value_at_nodes_interior_and_exterior():
    g = Grid(1.0, 2.0 ** -5)
    u = GridFunction.from_function(g, lambda p: np.sin(p[:, 0]))
    pts = np.array([[0.5], [0.123], [3.0]])
    np.testing.assert_allclose(u.value_at(pts), np.sin(pts[:, 0]), atol=1e-7)


def test_periodic_extension():
    g = Grid(4.0, 2.0 ** -6)
    u = GridFunction(g, np.cos(g.nodes[:, 0]), ("periodic", 2 * np.pi))
    x = np.array([[7.0], [-11.3]])
    np.testing.assert_allclose(u.value_at(x), np.cos(x[:, 0]), atol=1e-7)
    assert u.exterior.far_mean(u) == pytest.approx(0.0, abs=1e-7)


def test_second_difference_quadratic():
    g = Grid(1.0, 0.125)
    u = GridFunction.from_function(g, lambda p: p[:, 0] ** 2)
    d = second_difference(u, np.array([[0.25]]), np.array([[2.0]]))
    assert d[0] == pytest.approx(2 * 2.0 ** 2)
