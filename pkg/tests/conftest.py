import numpy as np
import pytest
import torch

torch.set_num_threads(2)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def icosphere4():
    from sketchsdf.mesh.primitives import icosphere

    return icosphere(0.5, 4)


@pytest.fixture(scope="session")
def icosphere2():
    from sketchsdf.mesh.primitives import icosphere

    return icosphere(0.5, 2)


@pytest.fixture(scope="session")
def sphere_field_32():
    from sketchsdf.mesh.primitives import sphere_sdf_values

    return sphere_sdf_values(32, 0.5)
