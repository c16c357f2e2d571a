from .schedule import NoiseSchedule, build_schedule, q_sample
from .conditioning import (
    ConditioningBundle,
    ConditioningMode,
    NULL_LABEL,
    collate_bundles,
    first_frame_mask,
    full_mask,
    make_finetune_bundle,
    make_i2v_bundle,
    make_inpaint_bundle,
    sample_box_mask,
    upsample_mask_to_pixels,
)
from .model import Denoiser, DenoiserConfig, predict_noise, timestep_embedding
from .training import (
    CKPT_MAGIC,
    CKPT_VERSION,
    TrainHP,
    TrainState,
    finetune_triplet,
    init_train_state,
    load_checkpoint,
    pretrain_i2v,
    pretrain_inpainting,
    run_training,
    save_checkpoint,
    training_loss,
)
from .sampling import ddim_timesteps, sample, sample_batch
