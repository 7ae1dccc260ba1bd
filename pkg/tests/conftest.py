import pytest

from editgym.types import TaskSpec


@pytest.fixture
def aor_spec():
    return TaskSpec.for_task("aor", 10, 5, 100)


@pytest.fixture
def aes_spec():
    return TaskSpec.for_task("aes", 100, 5, 100)


@pytest.fixture
def aec_spec():
    return TaskSpec.for_task("aec", 10, 5, 100)
