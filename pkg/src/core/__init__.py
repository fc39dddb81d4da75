# Copyright 2026 Canonical Ltd.
# See LICENSE file for licensing details.

"""Configuration, domain records and the run context."""
