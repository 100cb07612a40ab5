import pytest

import pxlap as px


@pytest.fixture
def unit_interval():
    return px.Box([0.0], [1.0])


@pytest.fixture
def unit_square():
    return px.Box([0.0, 0.0], [1.0, 1.0])


def grid_1d(lo, hi, cells, fn):
    box = px.Box([lo], [hi])
    return px.GridFunction.from_callable(box, cells, lambda pts: fn(pts[:, 0]))


def grid_2d(box, cells, fn):
    return px.GridFunction.from_callable(box, cells, fn)
