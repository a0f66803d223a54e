import random

import pytest


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


@pytest.fixture
def keypair(rng):
    from medledger import crypto

    return crypto.gen_sig_keypair(rng)
