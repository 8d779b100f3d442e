"""Process settings via environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass

from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class Settings:
    """Process-wide settings loaded from environment variables."""

    log_level: str = "INFO"

    # Parallel cost evaluations per GSA iteration
    workers: int = 1

    # Grid resolution of the centroid defuzzifier
    centroid_points: int = 1001

    output_dir: str = "."

    @classmethod
    def from_env(cls) -> Settings:
        return cls(
            log_level=os.getenv("POSE_FLC_LOG_LEVEL", "INFO").upper(),
            workers=max(1, int(os.getenv("POSE_FLC_WORKERS", "1"))),
            centroid_points=int(os.getenv("POSE_FLC_CENTROID_POINTS", "1001")),
            output_dir=os.getenv("POSE_FLC_OUTPUT_DIR", "."),
        )


# Singleton
settings = Settings.from_env()
