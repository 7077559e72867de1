"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"


class ObjectInfo(BaseModel):
    object_id: str
    super_class: str


class ObjectsResponse(BaseModel):
    objects: list[ObjectInfo]
    attackers: list[str]
    e_max: int
    num_super_classes: int
    objects_per_class: dict[str, int]


class CloudResponse(BaseModel):
    object_id: str
    l: float | None = None
    epoch: int | None = None
    seed: int | None = None
    count: int
    points: list[list[float]]


class LabelScore(BaseModel):
    label: str
    score: float


class EvaluateRequest(BaseModel):
    object_id: str
    l: float
    seed: int = 0
    attacker: str = "J1"
    rho1: float | None = Field(default=None, description="default: top-1 basket")
    rho2: float | None = Field(default=None, description="default: top-1 basket")
    max_points: int | None = Field(default=None, ge=1)


class EvaluateResponse(BaseModel):
    object_id: str
    super_class: str
    l: float
    epoch: int
    seed: int
    attacker: str
    rho1: float
    rho2: float
    pi1: float
    pi2: float
    q1: float
    q2_static: float
    q2_dynamic: float
    chamfer: float
    count: int
    points: list[list[float]]
    super_hypothesis: list[LabelScore]
    intra_hypothesis: list[LabelScore]
