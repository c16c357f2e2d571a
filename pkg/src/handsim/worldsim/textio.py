"""Human-readable structured-text serialization of scenes and scripts.

Script text, one line per key:
    label <int> <name>
    frames <F>
    cam <x> <y>              (F lines, in frame order)
    hand <x> <y> <aperture>  (F lines, in frame order)
`script_to_text(..., which="camera"|"hand")` emits only the matching lines
plus the header; "full" emits everything.

Scene text (descriptive; used for golden comparisons, not reconstruction):
    world_size / view_size / frames / background_sha256 / attached
    object <kind> anchor <x> <y> extent <w> <h> color <r> <g> <b> pose <...>
           [handle <x0> <y0> <x1> <y1> axis <ax> <ay> max_offset <d>]
"""

from __future__ import annotations

import hashlib

from .types import ActionScript, CameraPose, HandState, ObjectKind, WorldState, Task, TASK_NAMES


def script_to_text(script: ActionScript, which: str = "full") -> str:
    lines = [f"label {script.label} {script.label_name}", f"frames {len(script)}"]
    if which in ("full", "camera"):
        for cam in script.camera_traj:
            lines.append(f"cam {cam.offset[0]} {cam.offset[1]}")
    if which in ("full", "hand"):
        for hand in script.hand_traj:
            lines.append(f"hand {hand.position[0]} {hand.position[1]} {hand.aperture:.6f}")
    return "\n".join(lines) + "\n"


def script_from_text(camera_text: str, hand_text: str) -> ActionScript:
    """Rebuild a script from separately serialized camera and hand parts."""
    label = None
    name = ""
    cams: list[CameraPose] = []
    hands: list[HandState] = []
    for text in (camera_text, hand_text):
        for line in text.strip().splitlines():
            parts = line.split()
            if parts[0] == "label":
                label = int(parts[1])
                name = parts[2]
            elif parts[0] == "cam":
                cams.append(CameraPose((int(parts[1]), int(parts[2]))))
            elif parts[0] == "hand":
                hands.append(HandState((int(parts[1]), int(parts[2])), float(parts[3])))
            elif parts[0] != "frames":
                raise ValueError(f"unknown script key: {parts[0]}")
    if label is None or not cams or not hands:
        raise ValueError("incomplete script text")
    return ActionScript(tuple(cams), tuple(hands), label, name)


def scene_to_text(world: WorldState) -> str:
    cfg = world.cfg
    bg = hashlib.sha256(world.background.tobytes()).hexdigest()
    lines = [
        f"world_size {cfg.world_size}",
        f"view_size {cfg.view_size}",
        f"frames {cfg.num_frames}",
        f"background_sha256 {bg}",
        f"attached {world.attached if world.attached is not None else 'none'}",
    ]
    for spec, pose in world.objects:
        bits = [
            f"object {spec.kind.value}",
            f"anchor {spec.anchor[0]} {spec.anchor[1]}",
            f"extent {spec.extent[0]} {spec.extent[1]}",
            "color " + " ".join(f"{c:.6f}" for c in spec.color),
        ]
        if spec.kind is ObjectKind.FREE:
            bits.append(f"pose {pose[0]} {pose[1]}")
        else:
            bits.append(f"pose {float(pose):.6f}")
            hx0, hy0, hx1, hy1 = spec.handle_region
            bits.append(f"handle {hx0} {hy0} {hx1} {hy1}")
            bits.append(f"axis {spec.axis[0]} {spec.axis[1]}")
            bits.append(f"max_offset {spec.max_offset}")
        lines.append(" ".join(bits))
    return "\n".join(lines) + "\n"
