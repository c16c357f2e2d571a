"""Small shared training utilities."""

from __future__ import annotations

import time


class TrainingDiverged(Exception):
    """Raised when a training loss becomes non-finite."""


class TrainLog:
    """Collects per-step rows and optionally appends them to a CSV file.

    One row per optimization step: step, loss, lr, wall-clock seconds.
    """

    HEADER = "step,loss,lr,wall_time"

    def __init__(self, path=None):
        self.rows: list[tuple[int, float, float, float]] = []
        self.path = path
        self._t0 = time.monotonic()
        if path is not None:
            with open(path, "w") as f:
                f.write(self.HEADER + "\n")

    def append(self, step: int, loss: float, lr: float) -> None:
        row = (step, loss, lr, time.monotonic() - self._t0)
        self.rows.append(row)
        if self.path is not None:
            with open(self.path, "a") as f:
                f.write(f"{row[0]},{row[1]:.8g},{row[2]:.8g},{row[3]:.3f}\n")

    @property
    def losses(self) -> list[float]:
        return [r[1] for r in self.rows]
