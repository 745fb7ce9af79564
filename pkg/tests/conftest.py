import copy

import numpy as np
import pytest

from baecv.fem import build_rect_mesh
from baecv.studies import bundle_from_config, canonical_config

EX1_LABELS = {"bottom": "I", "top": "A", "left": "A", "right": "A"}
EX2_LABELS = {"left": "D", "bottom": "D", "right": "N", "top": "N"}


@pytest.fixture(scope="session")
def strip_mesh():
    return build_rect_mesh(50, 15, 1.0, 0.25, labels=EX1_LABELS)


@pytest.fixture(scope="session")
def square_mesh():
    return build_rect_mesh(40, 40, 1.0, 1.0, labels=EX2_LABELS)


@pytest.fixture(scope="session")
def small_strip_mesh():
    return build_rect_mesh(12, 5, 1.0, 0.25, labels=EX1_LABELS)


@pytest.fixture(scope="session")
def small_square_mesh():
    return build_rect_mesh(8, 8, 1.0, 1.0, labels=EX2_LABELS)


def small_robin_config():
    cfg = copy.deepcopy(canonical_config("robin"))
    cfg["mesh"] = {"nx": 12, "ny": 5, "lx": 1.0, "ly": 0.25}
    cfg["observations"] = {"points": [[0.21, 0.11], [0.52, 0.2], [0.83, 0.05],
                                      [0.33, 0.17], [0.66, 0.08], [0.11, 0.22]]}
    cfg["factor"] = {"trace_tol": 1e-3, "max_rank": 30}
    cfg["study"].update({
        "n_grid": [2, 5, 10], "reference_n": 200, "n_seeds": 3, "n_data": 2,
        "posterior_n_grid": [5, 10], "posterior_seeds": 2, "posterior_reference_n": 200,
    })
    return cfg


def small_semilinear_config():
    cfg = copy.deepcopy(canonical_config("semilinear"))
    cfg["mesh"] = {"nx": 9, "ny": 9, "lx": 1.0, "ly": 1.0}
    cfg["observations"] = {"grid": {"nx": 4, "ny": 4}}
    cfg["factor"] = {"trace_tol": 1e-3, "max_rank": 30}
    cfg["study"].update({
        "n_grid": [2, 5, 10], "reference_n": 150, "n_seeds": 3, "n_data": 2,
        "posterior_n_grid": [5, 10], "posterior_seeds": 2, "posterior_reference_n": 150,
    })
    return cfg


@pytest.fixture(scope="session")
def small_robin_bundle():
    return bundle_from_config(small_robin_config(), master_seed=7)


@pytest.fixture(scope="session")
def small_semilinear_bundle():
    return bundle_from_config(small_semilinear_config(), master_seed=7)


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)
