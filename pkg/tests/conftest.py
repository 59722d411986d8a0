import pytest
import torch

torch.set_num_threads(1)


@pytest.fixture
def desk_grid():
    from bevcast.scene import DESK_GRID

    return DESK_GRID


@pytest.fixture
def default_opts():
    from bevcast.scene import RenderOptions

    return RenderOptions()
