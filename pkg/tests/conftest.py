import math

import pytest

import circlelab as cl

ALPHA_SILVER = math.sqrt(2.0) - 1.0  # badly approximable rotation number


@pytest.fixture(scope="session")
def ns_map():
    """North-South map, chart x -> 4x: repels theta=0, attracts theta=1/2."""
    return cl.MoebiusMap(2.0, 0.0, 0.0, 0.5)


@pytest.fixture(scope="session")
def conjugated_ns(ns_map):
    R = cl.rotation(0.29)
    return cl.compose(cl.compose(R, ns_map), cl.invert(R))


@pytest.fixture(scope="session")
def rotation_pair():
    return cl.GeneratorSystem(
        (cl.rotation(ALPHA_SILVER), cl.rotation(-ALPHA_SILVER)),
        cl.ConstantWeights((0.5, 0.5)),
    )


@pytest.fixture(scope="session")
def proximal_two(ns_map, conjugated_ns):
    """Non-symmetric proximal pair {g, RgR^-1} with equal weights."""
    return cl.GeneratorSystem((ns_map, conjugated_ns), cl.ConstantWeights((0.5, 0.5)))


@pytest.fixture(scope="session")
def proximal_four(ns_map, conjugated_ns):
    """Symmetric proximal system {g, g^-1, h, h^-1}, weights 1/4."""
    return cl.GeneratorSystem(
        (ns_map, cl.invert(ns_map), conjugated_ns, cl.invert(conjugated_ns)),
        cl.ConstantWeights((0.25, 0.25, 0.25, 0.25)),
    )


@pytest.fixture(scope="session")
def basin_system():
    """Two parametric maps fixing {0, 1/2}; each attracts one point, and the
    pair is average-contracting at both."""
    return cl.GeneratorSystem(
        (cl.ParametricMap(-0.5, 1), cl.ParametricMap(0.5, 1)),
        cl.ConstantWeights((0.5, 0.5)),
    )
