#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Parameters of the four evaluation cases."""

from typing import Literal, Optional

from pydantic import Field, field_validator, model_validator

from core.models import BaseConfigModel
from simulator.specs import Vector3

DEFAULT_FRACTIONS = [1.0, 0.5, 0.25, 0.05, 0.01, 0.005, 0.001]


class CaseConfig(BaseConfigModel):
    """Which case to run and its scenario knobs.

    Case 1 compares the network with and without correspondences, case 2 thins the
    correspondences, case 3 estimates a boresight offset and case 4 removes GNSS over
    parts of the flight lines.
    """

    case_id: Literal[1, 2, 3, 4] = 1
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    fractions: list[float] = Field(default_factory=lambda: list(DEFAULT_FRACTIONS))
    boresight_offset: Vector3 = Field(default=(-0.276, 0.049, 0.154), description="deg")
    boresight_known: bool = False
    outage_duration: float = Field(default=30.0, gt=0.0)
    outages: Optional[list[tuple[float, float]]] = None
    double_outage: bool = True
    histogram_bins: int = Field(default=50, ge=1)

    @field_validator("fractions")
    @classmethod
    def validate_fractions(cls, value: list[float]) -> list[float]:
        """Every retention fraction lies in (0, 1]."""
        if not value:
            raise ValueError("At least one fraction is needed")
        for fraction in value:
            if not 0.0 < fraction <= 1.0:
                raise ValueError(f"Fraction {fraction} outside (0, 1]")
        return value

    @model_validator(mode="after")
    def validate_outages(self):
        """Explicit outage windows are ordered and non-empty, one per line."""
        if self.outages is not None:
            if not 1 <= len(self.outages) <= 2:
                raise ValueError("Give one outage window per affected line (one or two)")
            for start, end in self.outages:
                if not start < end:
                    raise ValueError(f"Outage window ({start}, {end}) is empty")
        return self
