import pytest

from abelcon.words import Presentation


@pytest.fixture(scope="session")
def gamma1():
    """Path a-b-c-d, all vertices infinite order."""
    return Presentation.raag("abcd", [("a", "b"), ("b", "c"), ("c", "d")])


@pytest.fixture(scope="session")
def gamma2():
    """Triangle a-b-c plus pendant d on c; weak modules {a,b} and {d}."""
    return Presentation.raag("abcd", [("a", "b"), ("a", "c"), ("b", "c"), ("c", "d")])


@pytest.fixture(scope="session")
def f2():
    return Presentation.free("ab")


@pytest.fixture(scope="session")
def fxy():
    return Presentation.free("xy")


@pytest.fixture(scope="session")
def z2():
    return Presentation.raag("ab", [("a", "b")])


@pytest.fixture(scope="session")
def pentagon():
    """Right-angled Coxeter group on the 5-cycle."""
    names = "abcde"
    edges = [(names[i], names[(i + 1) % 5]) for i in range(5)]
    return Presentation.racg(names, edges)


@pytest.fixture(scope="session")
def c2_free_square():
    """Two order-2 vertices with no edge: the infinite dihedral group."""
    return Presentation("ab", [], {"a": 2, "b": 2})
