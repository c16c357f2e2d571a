import numpy as np
import pytest
import torch

from handsim.codec import Codec, CodecConfig
from handsim.data.builders import DEFAULT_TASK_MIX, build_record
from handsim.worldsim import WorldConfig

torch.set_num_threads(1)

# Small-but-nontrivial geometry shared by most tests: latents are (4,24,16,16)
# under the default 2x/2x pixel-shuffle codec.
MINI_WORLD = WorldConfig(world_size=64, view_size=32, num_frames=8)
MINI_LATENT = (4, 24, 16, 16)


@pytest.fixture(scope="session")
def mini_cfg() -> WorldConfig:
    return MINI_WORLD


@pytest.fixture(scope="session")
def patchify_codec() -> Codec:
    return Codec(CodecConfig())


@pytest.fixture(scope="session")
def mini_records(mini_cfg):
    return [build_record(seed, mini_cfg, DEFAULT_TASK_MIX, False) for seed in range(8)]


@pytest.fixture(scope="session")
def mini_videos(mini_records):
    return [r.interaction for r in mini_records]


@pytest.fixture
def rng():
    return np.random.default_rng(0)
