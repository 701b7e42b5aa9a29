# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Periodic grid operators and the time stepping of the phase field."""
