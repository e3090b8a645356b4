import socket

import pytest

from surveybot.config import load_default_config
from surveybot.engine import DialogueEngine


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@pytest.fixture(scope="session")
def config():
    return load_default_config()


@pytest.fixture
def engine(config):
    return DialogueEngine(config)
