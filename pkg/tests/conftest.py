"""Shared fixtures: the standard test geometries, built once per session."""

import numpy as np
import pytest

from greendec.mesh import generate_mesh


def pytest_runtest_logreport(report):
    # one visible verdict line per acceptance check, capture-proof
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        verdict = "PASS" if report.passed else "FAIL"
        print(f"\nacceptance {name}: {verdict}", flush=True)


@pytest.fixture(scope="session")
def disk16():
    return generate_mesh("disk", 16, radius=1.0)


@pytest.fixture(scope="session")
def disk24():
    return generate_mesh("disk", 24, radius=1.0)


@pytest.fixture(scope="session")
def disk32():
    return generate_mesh("disk", 32, radius=1.0)


@pytest.fixture(scope="session")
def annulus16():
    return generate_mesh("annulus", 16, r_in=0.5, r_out=1.0)


@pytest.fixture(scope="session")
def torus8():
    return generate_mesh("torus2d", 8, side=1.0)


@pytest.fixture(scope="session")
def box8():
    return generate_mesh("box3d", 8, side=1.0)


@pytest.fixture()
def rng_values():
    def make(n, seed=0):
        rng = np.random.default_rng(seed)
        return rng.standard_normal(n)
    return make
