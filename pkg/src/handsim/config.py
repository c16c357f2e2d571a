"""Flat INI run configuration with a typed, closed key schema.

Every command resolves its config (file < --set overrides) and writes the
resolved text beside its outputs, so any run is reproducible from that
artifact alone.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass

from .codec import CodecConfig, CodecMode
from .diffusion import ConditioningMode, DenoiserConfig, build_schedule
from .worldsim import WorldConfig


class ConfigError(Exception):
    pass


def _bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s}")


# section -> key -> (parser, default)
SCHEMA: dict[str, dict[str, tuple]] = {
    "run": {
        "seed": (int, 0),
        "out_dir": (str, "runs/default"),
    },
    "worldsim": {
        "world_size": (int, 128),
        "view_size": (int, 64),
        "num_frames": (int, 16),
        "object_count_min": (int, 1),
        "object_count_max": (int, 3),
    },
    "codec": {
        "mode": (str, "patchify"),
        "temporal_ratio": (int, 2),
        "spatial_ratio": (int, 2),
        "latent_channels": (int, 16),
        "hidden_channels": (int, 32),
        "train_steps": (int, 2000),
        "batch_size": (int, 4),
        "lr": (float, 2e-3),
    },
    "diffusion": {
        "token_patch": (int, 4),
        "model_dim": (int, 128),
        "depth": (int, 4),
        "heads": (int, 4),
        "conditioning_mode": (str, "mesh_render"),
        "label_dropout": (float, 0.1),
        "schedule_t": (int, 1000),
        "beta_start": (float, 1e-4),
        "beta_end": (float, 2e-2),
        "train_steps": (int, 2000),
        "batch_size": (int, 4),
        "lr": (float, 2e-4),
        "sample_steps": (int, 50),
        "guidance_scale": (float, 2.0),
    },
    "dataset": {
        "n_train_syn": (int, 2000),
        "n_train_fix": (int, 2000),
        "n_val_syn": (int, 100),
        "n_val_fix": (int, 100),
        "n_test_syn": (int, 48),
        "n_test_fix": (int, 48),
        "n_test_holdout": (int, 48),
        "mix_weight": (float, 0.5),
    },
    "evaluator": {
        "eval_seeds": (int, 3),
        "probe_steps": (int, 600),
        "probe_lr": (float, 1e-3),
    },
}


@dataclass
class RunConfig:
    values: dict[str, dict[str, object]]

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]

    # -- typed views over the raw values ------------------------------------
    def world_config(self) -> WorldConfig:
        w = self.values["worldsim"]
        return WorldConfig(
            world_size=w["world_size"], view_size=w["view_size"],
            num_frames=w["num_frames"],
            object_count_range=(w["object_count_min"], w["object_count_max"]),
        )

    def codec_config(self) -> CodecConfig:
        c = self.values["codec"]
        return CodecConfig(
            temporal_ratio=c["temporal_ratio"], spatial_ratio=c["spatial_ratio"],
            latent_channels=c["latent_channels"], mode=CodecMode(c["mode"]),
            hidden_channels=c["hidden_channels"],
        )

    def denoiser_config(self) -> DenoiserConfig:
        d = self.values["diffusion"]
        w = self.values["worldsim"]
        codec = self.codec_config()
        f, c, h, _ = codec.latent_shape(w["num_frames"], w["view_size"], w["view_size"])
        return DenoiserConfig(
            latent_frames=f, latent_channels=c, latent_size=h,
            token_patch=d["token_patch"], model_dim=d["model_dim"],
            depth=d["depth"], heads=d["heads"], label_vocab=4,
            conditioning_mode=ConditioningMode(d["conditioning_mode"]),
            label_dropout=d["label_dropout"],
        )

    def schedule(self):
        d = self.values["diffusion"]
        return build_schedule(d["schedule_t"], d["beta_start"], d["beta_end"])

    def resolved_text(self) -> str:
        lines = []
        for section in SCHEMA:
            lines.append(f"[{section}]")
            for key in SCHEMA[section]:
                lines.append(f"{key} = {self.values[section][key]}")
            lines.append("")
        return "\n".join(lines)

    def write_resolved(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "resolved_config.ini"), "w") as f:
            f.write(self.resolved_text())


def _defaults() -> dict[str, dict[str, object]]:
    return {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}


def load_config(path: str | None = None, overrides: list[str] | None = None) -> RunConfig:
    """Read an INI file and apply `section.key=value` overrides on top."""
    values = _defaults()
    if path is not None:
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise ConfigError(f"cannot read config file {path}")
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown key {section}.{key}")
                cast = SCHEMA[section][key][0]
                try:
                    values[section][key] = cast(raw)
                except ValueError as err:
                    raise ConfigError(f"bad value for {section}.{key}: {raw}") from err
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must be section.key=value, got {item}")
        dotted, raw = item.split("=", 1)
        section, key = dotted.split(".", 1)
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown override target {dotted}")
        try:
            values[section][key] = SCHEMA[section][key][0](raw)
        except ValueError as err:
            raise ConfigError(f"bad value for {dotted}: {raw}") from err
    return RunConfig(values)
