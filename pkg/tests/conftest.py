import pytest

from aslhand.defaults import Rig


@pytest.fixture(scope="session")
def rig() -> Rig:
    return Rig()


@pytest.fixture(scope="session")
def topology(rig):
    return rig.topology


@pytest.fixture(scope="session")
def atlas(rig):
    return rig.atlas


@pytest.fixture(scope="session")
def servo_map(rig):
    return rig.servo_map


@pytest.fixture(scope="session")
def channel_map(rig):
    return rig.channel_map
