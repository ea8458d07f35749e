"""Request/response models for the scenario service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    preset: Optional[str] = None
    scenario: Optional[dict] = None
    seed: Optional[int] = None  # overrides the scenario's seed when given


class ArtifactModel(BaseModel):
    name: str
    content: str


class RunResponse(BaseModel):
    exit_code: int
    report: dict
    artifacts: list[ArtifactModel]


class HealthResponse(BaseModel):
    status: str
    version: str


class PresetsResponse(BaseModel):
    presets: list[str]
