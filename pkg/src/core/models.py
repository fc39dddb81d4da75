#!/usr/bin/env python3
# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Base class for structured configuration sections."""

from pydantic import BaseModel, ConfigDict


class BaseConfigModel(BaseModel):
    """Class to be used for defining the structured configuration options."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    def __getitem__(self, x):
        """Return the item using the notation instance[key]."""
        return getattr(self, x.replace("-", "_"))
