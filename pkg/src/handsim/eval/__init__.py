from .metrics import (
    frame_perceptual_distance,
    perceptual_distance,
    psnr,
    psnr_per_frame,
    ssim,
    ssim_frame,
)
from .probe import (
    ProbeTrainConfig,
    VideoProbe,
    classify,
    load_probe,
    save_probe,
    semantic_similarity,
    train_probe,
)
from .ranking import (
    EvalContext,
    GoalKind,
    GoalSpec,
    RankingResult,
    rank_actions,
    score_video,
)
from .batch import (
    MetricReport,
    batch_evaluate,
    copy_static_sampler,
    model_sampler,
    write_report_csv,
)
