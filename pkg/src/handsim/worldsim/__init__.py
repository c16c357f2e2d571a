from .types import (
    ActionScript,
    CameraPose,
    HandState,
    InfeasibleTaskError,
    LABEL_VOCAB,
    ObjectKind,
    ObjectSpec,
    PlacementError,
    Task,
    TASK_NAMES,
    WorldConfig,
    WorldError,
    WorldState,
)
from .scene import sample_scene, make_background, interior_color
from .render import (
    compose_world,
    hand_params_sequence,
    make_fixed_camera_static,
    render_hand_mask_video,
    render_hand_video,
    render_view,
    sprite_gap,
    sprite_rects,
    FINGER_LEN,
    FINGER_W,
    HAND_COLOR,
)
from .dynamics import step_world, rollout_triplet, GRASP_APERTURE, RELEASE_APERTURE
from .scripts import sample_action_script, MAX_CAM_STEP, OFFSCREEN
from .textio import scene_to_text, script_to_text, script_from_text
