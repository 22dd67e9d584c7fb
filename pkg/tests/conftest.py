import os

import hypothesis
import numpy as np
import pytest

from config import DATA_DIR
from formats import config_from_doc, family_from_doc, lattice_from_doc, load_any_witness, load_json

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5)
hypothesis.settings.register_profile("thorough", max_examples=1000, deadline=None)
hypothesis.settings.register_profile("dev", deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "dev"))


def data_path(name):
    return os.path.join(DATA_DIR, name)


@pytest.fixture
def load_family():
    return lambda name: family_from_doc(load_json(data_path(name + ".json")))


@pytest.fixture
def load_lattice():
    return lambda name: lattice_from_doc(load_json(data_path(name + ".json")))


@pytest.fixture
def load_config():
    return lambda name: config_from_doc(load_json(data_path(name + ".json")))


@pytest.fixture
def load_witness():
    def load(tree, base=None):
        return load_any_witness(data_path(tree), data_path(base) if base else None)
    return load
