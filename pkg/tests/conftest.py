import pytest

from schottkylab.schottky import cylinder_template, load_group
from schottkylab.zeta import class_table


@pytest.fixture(scope="session")
def cylinder():
    return load_group("cylinder.json")


@pytest.fixture(scope="session")
def thin2():
    return load_group("thin2.json")


@pytest.fixture(scope="session")
def cyl_table(cylinder):
    return class_table(cylinder)


@pytest.fixture(scope="session")
def thin_table(thin2):
    return class_table(thin2)


@pytest.fixture()
def cylinder3():
    # a second cylinder so tests can exercise non-default lengths
    return cylinder_template(3.0)
