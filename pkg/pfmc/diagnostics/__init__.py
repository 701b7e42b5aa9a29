# Copyright DB InfraGO AG and contributors
# SPDX-License-Identifier: Apache-2.0
"""Measured quantities of a phase-field state and the monotonicity checks."""
