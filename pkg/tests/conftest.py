"""Shared fixtures: the certified reference run is expensive, so build it once."""

import pytest

from piezobeam import load_scenario, run


@pytest.fixture(scope="session")
def certified_scenario():
    return load_scenario("certified-decay")


@pytest.fixture(scope="session")
def certified_run(certified_scenario):
    return run(certified_scenario, collect_fields=False)


@pytest.fixture(scope="session")
def undamped_scenario():
    return load_scenario("undamped")
